#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion/dynamics.hpp"
#include "opinion/signal.hpp"
#include "opinion/tree.hpp"

// Everything derived on the limiting tree: the explicit series sampler for the
// stationary root opinion, and the closed-form mean/variance engines (exact
// limits, finite horizons, and the memory vs no-memory comparison).

namespace opinion {

// ---------------------------------------------------------------------------
// Series coefficients a(l,s) = binom(s,l) * (1-c-d)^(s-l)

inline double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double coefficient_a(int l, int s, double c, double d) {
  if (l < 0 || l > s) throw std::invalid_argument("coefficient_a: require 0 <= l <= s");
  if (l == s) return 1.0;
  double om = 1.0 - c - d;
  if (om == 0.0) return 0.0;
  // Log-space keeps binom(s,l) finite for large s.
  double sign = (om < 0.0 && ((s - l) % 2 != 0)) ? -1.0 : 1.0;
  return sign * std::exp(log_binom(s, l) + (s - l) * std::log(std::abs(om)));
}

// table[s][l] = a(l,s) for 0 <= l <= s <= max_s, built by the recurrence
// a(l-1,k) + (1-c-d) a(l,k) = a(l,k+1) so small tables are exact.
inline std::vector<std::vector<double>> coefficient_table(int max_s, double c, double d) {
  double om = 1.0 - c - d;
  std::vector<std::vector<double>> a(max_s + 1);
  for (int s = 0; s <= max_s; ++s) {
    a[s].assign(s + 1, 0.0);
    a[s][s] = 1.0;
    if (s == 0) continue;
    for (int l = 0; l < s; ++l) a[s][l] = (l > 0 ? a[s - 1][l - 1] : 0.0) + om * a[s - 1][l];
  }
  return a;
}

// ---------------------------------------------------------------------------
// Series sampler for the limiting root opinion

// Truncated triple sum over a depth-S tree: each node j at depth l contributes
// pi_j * sum_{s=l..S} a(l,s) W_j^(s).  Truncation error <= 2(1-d)^(S+1)/d.
inline double series_sum_on_tree(const SampledTree& tree, const SignalModel& model,
                                 MasterSeed master, int horizon,
                                 const std::vector<std::vector<double>>& coeff) {
  double total = 0.0;
  for (const SampledTree::Node& node : tree.nodes) {
    int l = node.depth;
    double node_sum = 0.0;
    for (int s = l; s <= horizon; ++s) {
      RandomStream ws = derive_stream(master, {StreamContext::Signal, node.key, static_cast<std::uint64_t>(s)});
      node_sum += coeff[s][l] * external_signal(model, node.mark, node.weight_sum, tree.c, tree.d, ws);
    }
    total += node.pi * node_sum;
  }
  return total;
}

inline double series_sample_root(const GWTreeSpec& spec, const SignalModel& model, int horizon,
                                 MasterSeed master, std::uint64_t tree_id = 0) {
  if (horizon < 0) throw std::invalid_argument("series_sample_root: horizon >= 0 required");
  spec.validate();
  const bool no_memory = std::abs(1.0 - spec.c - spec.d) <= 1e-15;

  // Fast path: fixed offspring >= 1 and attribute-independent signals need no
  // materialized tree and no marks (weight_sum is c everywhere, so W = d Z).
  if (spec.offspring.kind == OffspringDist::Kind::Fixed && spec.offspring.fixed_n >= 1 &&
      (!spec.root_offspring || (spec.root_offspring->kind == OffspringDist::Kind::Fixed &&
                                spec.root_offspring->fixed_n >= 1)) &&
      model.attribute_independent()) {
    int n0_root = spec.root_dist().fixed_n;
    int n0 = spec.offspring.fixed_n;
    double pop = 1.0, gen = 1.0;
    for (int l = 1; l <= horizon; ++l) {
      gen *= (l == 1) ? n0_root : n0;
      pop += gen;
      if (pop > static_cast<double>(spec.node_budget))
        throw std::runtime_error("series_sample_root: node budget exceeded");
    }
    std::vector<std::vector<double>> coeff;
    if (!no_memory) coeff = coefficient_table(horizon, spec.c, spec.d);
    VertexAttributes dummy;
    std::vector<std::uint64_t> keys{tree_root_key(tree_id)}, next_keys;
    double total = 0.0, pi = 1.0;
    for (int l = 0; l <= horizon; ++l) {
      for (std::uint64_t key : keys) {
        RandomStream ws = derive_stream(master, {StreamContext::Signal, key, static_cast<std::uint64_t>(l)});
        double node_sum = spec.d * model.fallback.sample(dummy, ws);
        if (!no_memory) {
          double acc = coeff[l][l] * node_sum;
          for (int s = l + 1; s <= horizon; ++s) {
            RandomStream ws2 =
                derive_stream(master, {StreamContext::Signal, key, static_cast<std::uint64_t>(s)});
            acc += coeff[s][l] * spec.d * model.fallback.sample(dummy, ws2);
          }
          node_sum = acc;
        }
        total += pi * node_sum;
      }
      if (l == horizon) break;
      int kids = (l == 0) ? n0_root : n0;
      next_keys.clear();
      next_keys.reserve(keys.size() * kids);
      for (std::uint64_t key : keys)
        for (int j = 0; j < kids; ++j) next_keys.push_back(child_key(key, j));
      keys.swap(next_keys);
      pi *= spec.c / static_cast<double>(l == 0 ? n0_root : n0);
    }
    return total;
  }

  SampledTree tree = sample_gw_tree(spec, horizon, master, tree_id);
  return series_sum_on_tree(tree, model, master, horizon, coefficient_table(horizon, spec.c, spec.d));
}

// Partial sums of the series with frozen, time-indexed signals: element k is
// sum_{s=0}^{k-1} sum_{|j|<=s} pi_j a(l_j,s) W_j^(k-1-s), which equals the
// root opinion after k synchronous updates from zero with the same signal
// streams (see run_on_tree).
inline std::vector<double> series_partial_sums(const SampledTree& tree, const SignalModel& model,
                                               MasterSeed master, int k_max) {
  std::vector<std::vector<double>> coeff = coefficient_table(k_max, tree.c, tree.d);
  // W[i][t] for t = 0..k_max-1-depth(i); deeper draws are never referenced.
  std::vector<double> sums(k_max + 1, 0.0);
  for (const SampledTree::Node& node : tree.nodes) {
    int l = node.depth;
    if (l >= k_max) continue;
    int t_max = k_max - 1 - l;
    std::vector<double> w(t_max + 1);
    for (int t = 0; t <= t_max; ++t) {
      RandomStream ws = derive_stream(master, {StreamContext::Signal, node.key, static_cast<std::uint64_t>(t)});
      w[t] = external_signal(model, node.mark, node.weight_sum, tree.c, tree.d, ws);
    }
    for (int k = l + 1; k <= k_max; ++k) {
      double acc = 0.0;
      for (int s = l; s <= k - 1; ++s) acc += coeff[s][l] * w[k - 1 - s];
      sums[k] += node.pi * acc;
    }
  }
  return sums;
}

// Fused evaluator for deep fixed(2) trees that cannot be materialized: walks
// the implicit binary tree once, computing (a) the root trajectory of the
// synchronous dynamics from zero and (b) per-depth signal aggregates from
// which the series partial sums are formed (all nodes at one depth share the
// same path product (c/2)^l, so grouping by depth is an exact regrouping of
// the triple sum).  Returns the dynamics trajectory and the series partial
// sums, both for k = 0..k_max.
struct FusedBinaryResult {
  std::vector<double> dynamics;  // root opinion after k steps
  std::vector<double> series;    // partial sum with horizon k
};

namespace detail {

struct FusedBinaryCtx {
  int k_max;
  double half_c, memory, d;
  std::uint64_t salt;  // folds the master seed and signal context once
  std::vector<std::vector<double>> signal_sums;  // [depth][t]
};

// traj must hold k_max - depth + 1 entries (times 0..k_max-depth).  Signal t
// of the node with ancestry hash `key` is word t of the stream based at
// salt + key; keys are already avalanche-mixed, so no per-node rehash needed.
inline void fused_binary_visit(FusedBinaryCtx& ctx, std::uint64_t key, int depth, double* traj) {
  int len = ctx.k_max - depth;
  traj[0] = 0.0;
  if (len <= 0) return;
  double w[64];
  std::uint64_t base = ctx.salt + key;
  double* sums = ctx.signal_sums[depth].data();
  for (int t = 0; t < len; ++t) {
    std::uint64_t u = mix64(base + static_cast<std::uint64_t>(t + 1) * kGolden);
    double value = ctx.d * (static_cast<double>(u >> 11) * 0x1.0p-53 * 2.0 - 1.0);
    w[t] = value;
    sums[t] += value;
  }
  double a[64], b[64];
  if (len > 1) {
    fused_binary_visit(ctx, child_key(key, 0), depth + 1, a);
    fused_binary_visit(ctx, child_key(key, 1), depth + 1, b);
  } else {
    a[0] = b[0] = 0.0;
  }
  for (int t = 0; t < len; ++t)
    traj[t + 1] = ctx.half_c * (a[t] + b[t]) + ctx.memory * traj[t] + w[t];
}

}  // namespace detail

// Signals are Z ~ Unif(-1,1), W = d Z (every node has two children, so the
// internal-opinion term vanishes).  Requires k_max <= 60.
inline FusedBinaryResult fused_binary_series_dynamics(double c, double d, int k_max,
                                                      MasterSeed master, std::uint64_t tree_id) {
  if (k_max < 1 || k_max > 60) throw std::invalid_argument("fused_binary: k_max in [1,60]");
  validate_cd(c, d);
  detail::FusedBinaryCtx ctx;
  ctx.k_max = k_max;
  ctx.half_c = c / 2.0;
  ctx.memory = 1.0 - c - d;
  ctx.d = d;
  ctx.salt = mix64(mix64(master.value + kGolden) +
                   static_cast<std::uint64_t>(StreamContext::Signal));
  ctx.signal_sums.resize(k_max);
  for (int l = 0; l < k_max; ++l) ctx.signal_sums[l].assign(k_max - l, 0.0);

  std::vector<double> traj(k_max + 1);
  detail::fused_binary_visit(ctx, tree_root_key(tree_id), 0, traj.data());

  FusedBinaryResult out;
  out.dynamics = traj;
  out.series.assign(k_max + 1, 0.0);
  std::vector<std::vector<double>> coeff = coefficient_table(k_max, c, d);
  for (int k = 1; k <= k_max; ++k) {
    double acc = 0.0;
    double pi = 1.0;
    for (int l = 0; l < k; ++l) {
      double level = 0.0;
      for (int s = l; s <= k - 1; ++s) level += coeff[s][l] * ctx.signal_sums[l][k - 1 - s];
      acc += pi * level;
      pi *= ctx.half_c;
    }
    out.series[k] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar statistics feeding the closed-form moment engines

struct GroupMoments {
  std::string name;
  double prob = 0.0;
  double mean_Y_root = 0.0;  // E[ E[W_root | mark] | group ]
  double mean_V_root = 0.0;  // E[ Var(W_root | mark) | group ]
};

struct MomentInputs {
  double c = 0.0, d = 1.0;
  double rho1 = 0.0, rho1_star = 0.0;  // E[sum of child weights], node / root
  double rho2 = 0.0, rho2_star = 0.0;  // E[sum of squared child weights]
  double mean_W1 = 0.0, var_W1 = 0.0;
  double mean_W_root = 0.0, var_W_root = 0.0;
  double mean_V1 = 0.0, var_Y1 = 0.0, cov_SC_Y1 = 0.0, var_SC = 0.0;
  double mean_V_root = 0.0, var_Y_root = 0.0, cov_SC_Y_root = 0.0, var_SC_root = 0.0;
  double p_zero_node = 0.0, p_zero_root = 0.0;  // P(no children)
  std::vector<GroupMoments> groups;             // root-mark groups (conditional engine)
  std::map<std::string, double> stderrs;        // filled by monte-carlo mode

  void validate() const {
    if (!(rho2 >= -1e-12) || rho2 > rho1 + 1e-12 || rho1 > c + 1e-12)
      throw std::invalid_argument("moment inputs: need 0 <= rho2 <= rho1 <= c");
    if (var_W1 < -1e-12 || var_W_root < -1e-12 || mean_V1 < -1e-12 || var_Y1 < -1e-12 ||
        var_SC < -1e-12)
      throw std::invalid_argument("moment inputs: negative variance field");
    if (cov_SC_Y1 * cov_SC_Y1 > var_SC * var_Y1 + 1e-9)
      throw std::invalid_argument("moment inputs: covariance violates Cauchy-Schwarz");
  }
};

struct MomentReport {
  double mean_root = 0.0, var_root = 0.0;
  double mean_node = 0.0, var_node = 0.0;
  struct Conditional {
    std::string group;
    double prob = 0.0, mean = 0.0, variance = 0.0;
  };
  std::vector<Conditional> conditionals;
};

enum class MomentMode { Analytic, MonteCarlo };

namespace detail {

struct OneGenAccum {
  double n = 0;
  double sc = 0, sc2 = 0, ssq = 0;  // sums of SC, SC^2, sum-of-squared-weights
  double y = 0, y2 = 0, v = 0, sc_y = 0;

  void add(double SC, double sum_sq, double Y, double V) {
    n += 1;
    sc += SC;
    sc2 += SC * SC;
    ssq += sum_sq;
    y += Y;
    y2 += Y * Y;
    v += V;
    sc_y += SC * Y;
  }
};

}  // namespace detail

// Exact one-generation statistics for discrete mark laws with equal-split
// weights: every expectation is a finite sum over (mark atom) x (offspring
// atom).  Continuous mark laws require monte-carlo mode.
inline MomentInputs moment_inputs(const GWTreeSpec& spec, const SignalModel& model,
                                  MomentMode mode = MomentMode::Analytic,
                                  std::size_t mc_samples = 100'000,
                                  MasterSeed master = MasterSeed{12345},
                                  Grouping grouping = Grouping::QSign) {
  spec.validate();
  MomentInputs in;
  in.c = spec.c;
  in.d = spec.d;

  struct Side {
    double rho1 = 0, rho2 = 0, var_SC = 0, mean_Y = 0, var_Y = 0, mean_V = 0, cov_SC_Y = 0,
           p_zero = 0;
  };

  auto atom_Y = [&](const VertexAttributes& a, bool has_children) {
    double weight_sum = has_children ? spec.c : 0.0;
    return a.q * (spec.c - weight_sum) + spec.d * model.resolve(a).mean(a.q);
  };
  auto atom_V = [&](const VertexAttributes& a) {
    double v = model.resolve(a).variance(a.q);
    return spec.d * spec.d * v;
  };

  if (mode == MomentMode::Analytic) {
    auto analytic_side = [&](const OffspringDist& off, const MarkLaw& marks, bool want_groups) {
      if (marks.kind != MarkLaw::Kind::DiscreteQ)
        throw std::runtime_error(
            "moment_inputs: analytic mode needs a discrete mark law; use monte-carlo mode");
      Side side;
      std::vector<double> off_pmf = off.probabilities();
      side.p_zero = off.p_zero();
      side.rho1 = spec.c * (1.0 - side.p_zero);
      side.rho2 = spec.c * spec.c * off.mean_inverse_positive();
      side.var_SC = spec.c * spec.c * side.p_zero * (1.0 - side.p_zero);
      double mean_Y2 = 0.0, mean_SC_Y = 0.0;
      std::map<std::string, GroupMoments> groups;
      for (std::size_t j = 0; j < marks.values.size(); ++j) {
        VertexAttributes a;
        a.q = marks.values[j];
        a.s = marks.s;
        a.tag = marks.tag;
        double pa = marks.probs[j];
        double V = atom_V(a);
        side.mean_V += pa * V;
        double y_pos = atom_Y(a, true), y_zero = atom_Y(a, false);
        double y_mean_over_N = (1.0 - side.p_zero) * y_pos + side.p_zero * y_zero;
        side.mean_Y += pa * y_mean_over_N;
        mean_Y2 += pa * ((1.0 - side.p_zero) * y_pos * y_pos + side.p_zero * y_zero * y_zero);
        mean_SC_Y += pa * (1.0 - side.p_zero) * spec.c * y_pos;
        if (want_groups) {
          GroupMoments& g = groups[group_name(grouping, a)];
          g.prob += pa;
          g.mean_Y_root += pa * y_mean_over_N;
          g.mean_V_root += pa * V;
        }
      }
      side.var_Y = mean_Y2 - side.mean_Y * side.mean_Y;
      side.cov_SC_Y = mean_SC_Y - side.rho1 * side.mean_Y;
      if (want_groups) {
        for (auto& [name, g] : groups) {
          g.name = name;
          if (g.prob > 0) {
            g.mean_Y_root /= g.prob;
            g.mean_V_root /= g.prob;
          }
          in.groups.push_back(g);
        }
      }
      return side;
    };
    Side node = analytic_side(spec.offspring, spec.mark_law, false);
    Side root = analytic_side(spec.root_dist(), spec.root_marks(), true);
    in.rho1 = node.rho1;
    in.rho2 = node.rho2;
    in.var_SC = node.var_SC;
    in.mean_W1 = node.mean_Y;
    in.var_Y1 = node.var_Y;
    in.mean_V1 = node.mean_V;
    in.var_W1 = node.var_Y + node.mean_V;
    in.cov_SC_Y1 = node.cov_SC_Y;
    in.p_zero_node = node.p_zero;
    in.rho1_star = root.rho1;
    in.rho2_star = root.rho2;
    in.var_SC_root = root.var_SC;
    in.mean_W_root = root.mean_Y;
    in.var_Y_root = root.var_Y;
    in.mean_V_root = root.mean_V;
    in.var_W_root = root.var_Y + root.mean_V;
    in.cov_SC_Y_root = root.cov_SC_Y;
    in.p_zero_root = root.p_zero;
  } else {
    auto mc_side = [&](const OffspringDist& off, const MarkLaw& marks, std::uint64_t salt,
                       bool want_groups) {
      detail::OneGenAccum acc;
      std::map<std::string, GroupMoments> groups;
      double p_zero_count = 0.0;
      for (std::size_t i = 0; i < mc_samples; ++i) {
        RandomStream st = derive_stream(master, {StreamContext::Replica, salt, i});
        VertexAttributes a = marks.sample(st);
        int n_kids = off.sample(st);
        if (n_kids == 0) p_zero_count += 1.0;
        double SC = n_kids > 0 ? spec.c : 0.0;
        double sum_sq = n_kids > 0 ? spec.c * spec.c / n_kids : 0.0;
        double Y = atom_Y(a, n_kids > 0);
        double V = atom_V(a);
        acc.add(SC, sum_sq, Y, V);
        if (want_groups) {
          GroupMoments& g = groups[group_name(grouping, a)];
          g.prob += 1.0;
          g.mean_Y_root += Y;
          g.mean_V_root += V;
        }
      }
      double n = acc.n;
      Side side;
      side.p_zero = p_zero_count / n;
      side.rho1 = acc.sc / n;
      side.rho2 = acc.ssq / n;
      side.var_SC = acc.sc2 / n - side.rho1 * side.rho1;
      side.mean_Y = acc.y / n;
      side.var_Y = std::max(0.0, acc.y2 / n - side.mean_Y * side.mean_Y);
      side.mean_V = acc.v / n;
      side.cov_SC_Y = acc.sc_y / n - side.rho1 * side.mean_Y;
      if (want_groups) {
        for (auto& [name, g] : groups) {
          g.name = name;
          if (g.prob > 0) {
            g.mean_Y_root /= g.prob;
            g.mean_V_root /= g.prob;
          }
          g.prob /= n;
          in.groups.push_back(g);
        }
      }
      return side;
    };
    Side node = mc_side(spec.offspring, spec.mark_law, 1, false);
    Side root = mc_side(spec.root_dist(), spec.root_marks(), 2, true);
    in.rho1 = node.rho1;
    in.rho2 = node.rho2;
    in.var_SC = node.var_SC;
    in.mean_W1 = node.mean_Y;
    in.var_Y1 = node.var_Y;
    in.mean_V1 = node.mean_V;
    in.var_W1 = node.var_Y + node.mean_V;
    in.cov_SC_Y1 = node.cov_SC_Y;
    in.p_zero_node = node.p_zero;
    in.rho1_star = root.rho1;
    in.rho2_star = root.rho2;
    in.var_SC_root = root.var_SC;
    in.mean_W_root = root.mean_Y;
    in.var_Y_root = root.var_Y;
    in.mean_V_root = root.mean_V;
    in.var_W_root = root.var_Y + root.mean_V;
    in.cov_SC_Y_root = root.cov_SC_Y;
    in.p_zero_root = root.p_zero;
    double rn = std::sqrt(static_cast<double>(mc_samples));
    in.stderrs["rho1"] = std::sqrt(std::max(0.0, in.var_SC)) / rn;
    in.stderrs["rho2"] = spec.c * spec.c / rn;  // conservative: summand is in [0, c^2]
    in.stderrs["mean_W1"] = std::sqrt(in.var_Y1) / rn;
  }
  in.validate();
  return in;
}

// ---------------------------------------------------------------------------
// Limit engines

// No-memory engine: requires c + d = 1 and offspring >= 1 almost surely, in
// which case W = d Z and the closed forms below hold.
inline MomentReport mean_var_no_memory(const MomentInputs& in) {
  if (std::abs(in.c + in.d - 1.0) > 1e-12)
    throw std::domain_error("mean_var_no_memory: requires c + d = 1 (use the general engine)");
  // Isolated-vertex mass below 1e-9 is treated as zero (it is ~5e-14 for the
  // calibrated Erdos-Renyi presets and contributes nothing at our tolerances).
  if (in.p_zero_node > 1e-9 || in.p_zero_root > 1e-9)
    throw std::domain_error(
        "mean_var_no_memory: requires offspring >= 1 a.s. (use the general engine)");
  MomentReport r;
  r.mean_root = in.mean_W_root + (in.c / in.d) * in.mean_W1;
  r.var_root = in.var_W_root + in.rho2_star / (1.0 - in.rho2) * in.var_W1;
  r.mean_node = in.mean_W1 / in.d;
  r.var_node = in.var_W1 / (1.0 - in.rho2);
  return r;
}

// Conditional (per-group) mean/variance given the root attributes.  The
// squared-weight sum is replaced by its expectation (marks are independent of
// the offspring count in every supported specification).
inline MomentReport::Conditional conditional_mean_var(const MomentInputs& in,
                                                      const std::string& group) {
  if (std::abs(in.c + in.d - 1.0) > 1e-12)
    throw std::domain_error("conditional_mean_var: requires c + d = 1");
  if (in.p_zero_node > 1e-9 || in.p_zero_root > 1e-9)
    throw std::domain_error("conditional_mean_var: requires offspring >= 1 a.s.");
  for (const GroupMoments& g : in.groups) {
    if (g.name != group) continue;
    MomentReport::Conditional c;
    c.group = group;
    c.prob = g.prob;
    c.mean = g.mean_Y_root + (in.c / in.d) * in.mean_W1;
    c.variance = g.mean_V_root + in.rho2_star / (1.0 - in.rho2) * in.var_W1;
    return c;
  }
  throw std::invalid_argument("conditional_mean_var: unknown group '" + group + "'");
}

// E[(c+d)^{-2(T+1+shift)} p_{T+shift}] with T ~ Geometric(1-rho2) on {0,1,..}
// and p_m = sum_s binom(s+m,s)^2 (1-c-d)^{2s} (c+d)^{2(m+1)} in (0,1).
// Writing q(m) = p_m (c+d)^{-2(m+1)} = sum_s binom(s+m,s)^2 (1-c-d)^{2s}, the
// expectation is (1-rho2) sum_t rho2^t q(t+shift); the outer tail is bounded
// by p < 1, the inner terms by their eventually-geometric ratio.
inline double geometric_weight_expectation(double rho2, double cd, int shift, double tol) {
  double om2 = (1.0 - cd) * (1.0 - cd);
  if (om2 >= 1.0) throw std::invalid_argument("geometric_weight_expectation: need c + d > 0");
  if (om2 == 0.0) return 1.0;  // q(m) = 1 for every m
  double cd2 = cd * cd;
  double outer_ratio = rho2 / cd2;
  if (outer_ratio >= 1.0)
    throw std::domain_error("geometric_weight_expectation: rho2 >= (c+d)^2, variance diverges");

  auto q = [&](int m) {
    double term = 1.0, acc = 1.0;
    for (int s = 0; s < 10'000'000; ++s) {
      double ratio = std::pow((static_cast<double>(s + m + 1)) / (s + 1), 2.0) * om2;
      term *= ratio;
      acc += term;
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-16 * acc) return acc;
    }
    throw std::runtime_error("geometric_weight_expectation: inner series did not converge");
  };

  double total = 0.0, weight = 1.0 - rho2;  // (1-rho2) * rho2^t
  for (int t = 0; t < 10'000'000; ++t) {
    total += weight * q(t + shift);
    // Remaining mass bounded via q(m) <= (cd)^{-2(m+1)} (that is, p < 1).
    double tail = weight * outer_ratio / (1.0 - outer_ratio) *
                  std::pow(cd, -2.0 * (t + 1 + shift + 1));
    if (tail < tol) return total;
    weight *= rho2;
  }
  throw std::runtime_error("geometric_weight_expectation: outer series did not converge");
}

// General engine: full mean/variance of the limiting root and node opinions,
// valid for c + d <= 1 and offspring that may be zero.
inline MomentReport mean_var_general(const MomentInputs& in, double tol = 1e-12) {
  if (!(tol > 0.0)) throw std::invalid_argument("mean_var_general: tol > 0 required");
  in.validate();
  double cd = in.c + in.d;
  double cd2 = cd * cd;
  double om = 1.0 - cd;
  if (in.rho2 >= cd2)
    throw std::domain_error("mean_var_general: rho2 >= (c+d)^2, variance diverges");

  MomentReport r;
  r.mean_root = in.mean_W_root / cd + in.rho1_star * in.mean_W1 / ((cd - in.rho1) * cd);
  r.mean_node = in.mean_W1 / (cd - in.rho1);

  double et_root = geometric_weight_expectation(in.rho2, cd, 1, tol);
  double et_node = geometric_weight_expectation(in.rho2, cd, 0, tol);
  double mw1 = in.mean_W1;

  r.var_root = in.var_SC_root * mw1 * mw1 / (cd2 * (cd - in.rho1) * (cd - in.rho1)) +
               in.var_Y_root / cd2 +
               2.0 * in.cov_SC_Y_root * mw1 / (cd2 * (cd - in.rho1)) +
               in.mean_V_root / (1.0 - om * om) +
               in.rho2_star * in.var_SC * mw1 * mw1 /
                   (cd2 * (cd - in.rho1) * (cd - in.rho1) * (cd2 - in.rho2)) +
               in.rho2_star * in.mean_V1 * et_root / (1.0 - in.rho2) +
               in.rho2_star * in.var_Y1 / (cd2 * (cd2 - in.rho2)) +
               2.0 * in.rho2_star * in.cov_SC_Y1 * mw1 / (cd2 * (cd - in.rho1) * (cd2 - in.rho2));

  r.var_node = in.var_SC * mw1 * mw1 / ((cd - in.rho1) * (cd - in.rho1) * (cd2 - in.rho2)) +
               in.mean_V1 * et_node / (1.0 - in.rho2) + in.var_Y1 / (cd2 - in.rho2) +
               2.0 * in.cov_SC_Y1 * mw1 / ((cd - in.rho1) * (cd2 - in.rho2));
  return r;
}

// ---------------------------------------------------------------------------
// Finite-horizon moments (zero initialization)

struct HorizonMoments {
  double mean_root = 0.0, var_root = 0.0;
  double mean_node = 0.0, var_node = 0.0;
};

// Exact mean/variance of the opinion after k+1 synchronous updates from zero,
// via the finite sums S_{k,m}, U_{k,m}, T_{k,m} over series coefficients.
inline HorizonMoments finite_horizon_moments(const MomentInputs& in, int k) {
  if (k < 0) throw std::invalid_argument("finite_horizon_moments: k >= 0 required");
  in.validate();
  std::vector<std::vector<double>> a = coefficient_table(k, in.c, in.d);

  auto S = [&](int kk, int m) {
    double acc = 0.0;
    for (int s = 1; s <= kk; ++s) {
      double rp = 1.0;
      for (int l = 1; l <= s; ++l) {
        acc += a[s + m][l + m] * rp;
        rp *= in.rho1;
      }
    }
    return acc;
  };
  auto U = [&](int kk, int m) {
    double acc = 0.0;
    for (int s = 0; s <= kk; ++s) acc += a[s + m][m];
    return acc;
  };
  auto T = [&](int kk, int m) {
    double acc = 0.0;
    for (int s = 0; s <= kk; ++s) acc += a[s + m][m] * a[s + m][m];
    return acc;
  };

  // B(kk,m): the variance block of a subtree whose coefficients are shifted
  // by m, assembled from node-law statistics.
  double mw1 = in.mean_W1;
  auto B = [&](int kk, int m) {
    double skm = S(kk, m), ukm = U(kk, m), tkm = T(kk, m);
    return in.var_SC * mw1 * mw1 * skm * skm + in.mean_V1 * tkm + in.var_Y1 * ukm * ukm +
           2.0 * mw1 * in.cov_SC_Y1 * skm * ukm;
  };
  auto rho2_pow = [&](int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= in.rho2;
    return acc;
  };

  HorizonMoments h;
  double s0 = S(k, 0), u0 = U(k, 0), t0 = T(k, 0);
  h.mean_root = in.mean_W1 * in.rho1_star * s0 + in.mean_W_root * u0;
  h.mean_node = in.mean_W1 * (in.rho1 * s0 + u0);

  // var(R_root^(k+1)): root-mark terms, then (for k >= 1) the depth >= 1
  // contribution rho2* [ rho2^{k-1} var(W1) + sum_{m=1}^{k-1} rho2^{m-1} B(k-m,m) ].
  h.var_root = mw1 * mw1 * in.var_SC_root * s0 * s0 + u0 * u0 * in.var_Y_root +
               2.0 * mw1 * s0 * u0 * in.cov_SC_Y_root + in.mean_V_root * t0;
  if (k >= 1) {
    h.var_root += in.rho2_star * rho2_pow(k - 1) * in.var_W1;
    for (int m = 1; m <= k - 1; ++m) h.var_root += in.rho2_star * rho2_pow(m - 1) * B(k - m, m);
  }

  // var(R_node^(k+1)) = rho2^k var(W1) + sum_{m=0}^{k-1} rho2^m B(k-m,m)
  h.var_node = rho2_pow(k) * in.var_W1;
  for (int m = 0; m <= k - 1; ++m) h.var_node += rho2_pow(m) * B(k - m, m);
  return h;
}

// ---------------------------------------------------------------------------
// Memory vs no-memory comparison

struct MemoryComparison {
  double var_memory = 0.0;
  double var_no_memory = 0.0;
  bool inequality_holds = false;
};

// var_memory: explicit variance of the limit of the autoregressive recursion
// (c + d < 1).  var_no_memory: variance for the proportionally rescaled
// recursion with weights C/(c+d) and signal W/(c+d), i.e. the no-memory
// closed form applied to the rescaled inputs.  Requires offspring >= 1 a.s.
inline MemoryComparison memory_comparison(const MomentInputs& in, double tol = 1e-12) {
  in.validate();
  if (in.p_zero_node > 1e-9 || in.p_zero_root > 1e-9)
    throw std::domain_error("memory_comparison: requires offspring >= 1 a.s.");
  double cd = in.c + in.d;
  double cd2 = cd * cd;
  if (in.rho2 >= cd2)
    throw std::domain_error("memory_comparison: rho2 >= (c+d)^2, variance diverges");

  MemoryComparison out;
  double base = in.var_W_root / cd2 + in.rho2_star * in.var_W1 / (cd2 * (cd2 - in.rho2));
  out.var_no_memory = base;
  double et_root = geometric_weight_expectation(in.rho2, cd, 1, tol);
  out.var_memory = base + 2.0 * (cd - 1.0) / (cd2 * (2.0 - cd)) * in.mean_V_root +
                   in.rho2_star * (et_root / (1.0 - in.rho2) - 1.0 / (cd2 * (cd2 - in.rho2))) *
                       in.mean_V1;
  out.inequality_holds = out.var_memory <= out.var_no_memory + 1e-12;
  return out;
}

}  // namespace opinion
