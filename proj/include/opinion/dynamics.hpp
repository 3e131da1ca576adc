#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "opinion/graph.hpp"
#include "opinion/signal.hpp"
#include "opinion/tree.hpp"

// Synchronous opinion updates on a fixed graph, the linear operator driving
// them, and stationary sampling via the a-priori geometric contraction bound.

namespace opinion {

struct OpinionState {
  std::vector<double> values;
  std::uint64_t step = 0;
};

struct RunReport {
  std::vector<std::pair<std::uint64_t, std::vector<double>>> trajectory;
  OpinionState final_state;
  std::uint64_t k_used = 0;
  double bound_at_k = 0.0;  // (1-d)^k_used * (2/d + 2)
};

// (Delta f)(i) = sum_r c(i,r) f(src(i,r)) + (1-c-d) f(i); sup-norm <= (1-d).
inline std::vector<double> apply_delta(const DirectedGraph& g, const std::vector<double>& f) {
  if (f.size() != g.n) throw std::invalid_argument("apply_delta: size mismatch");
  std::vector<double> out(g.n);
  double memory = 1.0 - g.c - g.d;
  for (std::size_t v = 0; v < g.n; ++v) {
    double acc = memory * f[v];
    for (std::size_t e = g.in_offsets[v]; e < g.in_offsets[v + 1]; ++e)
      acc += g.in_weight[e] * f[g.in_src[e]];
    out[v] = acc;
  }
  return out;
}

namespace detail {

inline std::vector<double> weight_sums(const DirectedGraph& g) {
  std::vector<double> ws(g.n);
  for (std::size_t v = 0; v < g.n; ++v) ws[v] = g.weight_sum(v);
  return ws;
}

}  // namespace detail

// One synchronous update.  Signals are drawn from streams keyed by
// (signal, entity_offset | vertex, step), so the result is independent of any
// parallel schedule.  entity_offset separates replicas.
inline void step(const DirectedGraph& g, OpinionState& state, const SignalModel& model,
                 MasterSeed master, const std::vector<double>& weight_sums,
                 std::uint64_t entity_offset = 0) {
  if (state.values.size() != g.n) throw std::invalid_argument("step: state size mismatch");
  std::vector<double> next(g.n);
  double memory = 1.0 - g.c - g.d;
  for (std::size_t v = 0; v < g.n; ++v) {
    double acc = memory * state.values[v];
    for (std::size_t e = g.in_offsets[v]; e < g.in_offsets[v + 1]; ++e)
      acc += g.in_weight[e] * state.values[g.in_src[e]];
    RandomStream ws = derive_stream(master, {StreamContext::Signal, entity_offset | v, state.step});
    acc += external_signal(model, g.attrs[v], weight_sums[v], g.c, g.d, ws);
#ifndef NDEBUG
    if (std::abs(acc) > 1.0 + 1e-9) throw std::logic_error("step: opinion left [-1,1]");
#endif
    next[v] = acc;
  }
  state.values.swap(next);
  ++state.step;
}

inline void step(const DirectedGraph& g, OpinionState& state, const SignalModel& model,
                 MasterSeed master, std::uint64_t entity_offset = 0) {
  step(g, state, model, master, detail::weight_sums(g), entity_offset);
}

inline OpinionState zero_state(const DirectedGraph& g) {
  OpinionState s;
  s.values.assign(g.n, 0.0);
  return s;
}

// Initial opinions uniform on {-1, +1}, keyed per vertex.
inline OpinionState rademacher_state(const DirectedGraph& g, MasterSeed master,
                                     std::uint64_t entity_offset = 0) {
  OpinionState s;
  s.values.resize(g.n);
  for (std::size_t v = 0; v < g.n; ++v) {
    RandomStream st = derive_stream(master, {StreamContext::Init, entity_offset | v, 0});
    s.values[v] = st.uniform01() < 0.5 ? -1.0 : 1.0;
  }
  return s;
}

inline RunReport run(const DirectedGraph& g, const SignalModel& model, MasterSeed master,
                     std::uint64_t k, OpinionState init,
                     const std::vector<std::uint64_t>& checkpoints = {},
                     std::uint64_t entity_offset = 0) {
  RunReport report;
  std::vector<double> ws = detail::weight_sums(g);
  OpinionState state = std::move(init);
  auto record = [&](std::uint64_t at) {
    for (std::uint64_t cp : checkpoints)
      if (cp == at) report.trajectory.emplace_back(at, state.values);
  };
  record(state.step);
  for (std::uint64_t i = 0; i < k; ++i) {
    step(g, state, model, master, ws, entity_offset);
    record(state.step);
  }
  report.k_used = k;
  report.bound_at_k = std::pow(1.0 - g.d, static_cast<double>(k)) * (2.0 / g.d + 2.0);
  report.final_state = std::move(state);
  return report;
}

// Smallest K with (1-d)^K * (2/d + 2) <= epsilon.
inline std::uint64_t steps_for_tolerance(double d, double epsilon) {
  if (d <= 0.0 || d > 1.0) throw std::invalid_argument("steps_for_tolerance: d in (0,1] required");
  if (!(epsilon > 0.0)) throw std::invalid_argument("steps_for_tolerance: epsilon > 0 required");
  double bound = 2.0 / d + 2.0;
  std::uint64_t k = 0;
  while (bound > epsilon) {
    bound *= (1.0 - d);
    ++k;
    if (k > 100'000'000) throw std::runtime_error("steps_for_tolerance: no convergence");
  }
  return k;
}

// Runs K(epsilon) steps from zero; the law of the result is within epsilon of
// stationarity in sup-norm coupling distance.  Replicas use disjoint signal
// streams and are therefore independent.
inline OpinionState stationary_sample(const DirectedGraph& g, const SignalModel& model,
                                      MasterSeed master, double epsilon, std::uint64_t replica) {
  std::uint64_t k = steps_for_tolerance(g.d, epsilon);
  std::uint64_t offset = (replica + 1) << 40;
  return run(g, model, master, k, zero_state(g), {}, offset).final_state;
}

// Dynamics on a sampled tree: a node's in-neighbors are its children.  Returns
// the root trajectory R_root^(0..k); opinions start from zero.
inline std::vector<double> run_on_tree(const SampledTree& tree, const SignalModel& model,
                                       MasterSeed master, std::uint64_t k) {
  std::size_t n = tree.nodes.size();
  std::vector<double> cur(n, 0.0), next(n);
  std::vector<double> root_traj{0.0};
  double memory = 1.0 - tree.c - tree.d;
  for (std::uint64_t t = 0; t < k; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const SampledTree::Node& node = tree.nodes[i];
      double acc = memory * cur[i];
      for (std::uint32_t j = 0; j < node.n_children; ++j)
        acc += tree.nodes[node.first_child + j].weight * cur[node.first_child + j];
      RandomStream ws = derive_stream(master, {StreamContext::Signal, node.key, t});
      acc += external_signal(model, node.mark, node.weight_sum, tree.c, tree.d, ws);
      next[i] = acc;
    }
    cur.swap(next);
    root_traj.push_back(cur[0]);
  }
  return root_traj;
}

}  // namespace opinion
