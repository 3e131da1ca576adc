#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion/graph.hpp"
#include "opinion/rng.hpp"

// Galton-Watson tree specification and depth-truncated sampling.  Node labels
// are ancestry strings; streams are keyed by a hash chained along the ancestry
// so that independent replicas and arbitrary traversal orders stay
// deterministic.

namespace opinion {

struct OffspringDist {
  enum class Kind { Fixed, Binomial, PoissonPositive, Pmf };
  Kind kind = Kind::Fixed;
  int fixed_n = 0;
  int binom_n = 0;
  double binom_p = 0.0;
  double lambda = 0.0;            // Poisson conditioned on being positive
  std::vector<double> pmf;        // pmf[k] = P(N = k)

  static OffspringDist fixed(int n) {
    if (n < 0) throw std::invalid_argument("offspring: fixed count must be >= 0");
    OffspringDist o;
    o.kind = Kind::Fixed;
    o.fixed_n = n;
    return o;
  }
  static OffspringDist binomial(int n, double p) {
    if (n < 0 || p < 0.0 || p > 1.0) throw std::invalid_argument("offspring: bad binomial");
    OffspringDist o;
    o.kind = Kind::Binomial;
    o.binom_n = n;
    o.binom_p = p;
    return o;
  }
  static OffspringDist poisson_positive(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("offspring: lambda must be positive");
    OffspringDist o;
    o.kind = Kind::PoissonPositive;
    o.lambda = lambda;
    return o;
  }
  static OffspringDist explicit_pmf(std::vector<double> pmf) {
    check_probability_vector(pmf);
    if (pmf.empty()) throw std::invalid_argument("offspring: empty pmf");
    OffspringDist o;
    o.kind = Kind::Pmf;
    o.pmf = std::move(pmf);
    return o;
  }

  int sample(RandomStream& stream) const {
    switch (kind) {
      case Kind::Fixed:
        return fixed_n;
      case Kind::Binomial: {
        std::binomial_distribution<int> dist(binom_n, binom_p);
        return dist(stream);
      }
      case Kind::PoissonPositive: {
        std::poisson_distribution<int> dist(lambda);
        int k = dist(stream);
        while (k == 0) k = dist(stream);
        return k;
      }
      case Kind::Pmf:
        return static_cast<int>(sample_index(stream, pmf));
    }
    return 0;
  }

  // Materialized pmf with total mass >= 1 - 1e-14 (Poisson tail truncated).
  std::vector<double> probabilities() const {
    switch (kind) {
      case Kind::Fixed: {
        std::vector<double> p(fixed_n + 1, 0.0);
        p[fixed_n] = 1.0;
        return p;
      }
      case Kind::Binomial: {
        std::vector<double> p(binom_n + 1, 0.0);
        double lp = std::log1p(-binom_p);
        double lq = std::log(binom_p);
        for (int k = 0; k <= binom_n; ++k) {
          double lbin = std::lgamma(binom_n + 1.0) - std::lgamma(k + 1.0) -
                        std::lgamma(binom_n - k + 1.0);
          p[k] = (binom_p <= 0.0)   ? (k == 0 ? 1.0 : 0.0)
                 : (binom_p >= 1.0) ? (k == binom_n ? 1.0 : 0.0)
                                    : std::exp(lbin + k * lq + (binom_n - k) * lp);
        }
        return p;
      }
      case Kind::PoissonPositive: {
        double p0 = std::exp(-lambda);
        double norm = 1.0 - p0;
        std::vector<double> p(1, 0.0);
        double term = p0;
        double mass = 0.0;
        for (int k = 1; mass < 1.0 - 1e-14; ++k) {
          term *= lambda / k;
          p.push_back(term / norm);
          mass += term / norm;
          if (k > 10 * lambda + 200) break;
        }
        return p;
      }
      case Kind::Pmf:
        return pmf;
    }
    return {};
  }

  double p_zero() const {
    switch (kind) {
      case Kind::Fixed: return fixed_n == 0 ? 1.0 : 0.0;
      case Kind::Binomial: return std::pow(1.0 - binom_p, binom_n);
      case Kind::PoissonPositive: return 0.0;
      case Kind::Pmf: return pmf[0];
    }
    return 0.0;
  }

  double mean() const {
    switch (kind) {
      case Kind::Fixed: return fixed_n;
      case Kind::Binomial: return binom_n * binom_p;
      case Kind::PoissonPositive: return lambda / (1.0 - std::exp(-lambda));
      case Kind::Pmf: {
        double m = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
        return m;
      }
    }
    return 0.0;
  }

  // E[1/N ; N > 0]
  double mean_inverse_positive() const {
    std::vector<double> p = probabilities();
    double m = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) m += p[k] / static_cast<double>(k);
    return m;
  }
};

struct GWTreeSpec {
  OffspringDist offspring;
  std::optional<OffspringDist> root_offspring;  // delayed root; default = offspring
  MarkLaw mark_law;
  std::optional<MarkLaw> root_mark_law;
  double c = 0.0;
  double d = 1.0;
  std::size_t node_budget = 10'000'000;

  const OffspringDist& root_dist() const { return root_offspring ? *root_offspring : offspring; }
  const MarkLaw& root_marks() const { return root_mark_law ? *root_mark_law : mark_law; }

  void validate() const {
    validate_cd(c, d);
    mark_law.validate();
    if (root_mark_law) root_mark_law->validate();
  }
};

// Hash-chained node identities: children of a node with key h get keys
// child_key(h, j) for j = 0..N-1.  The root key folds in a tree/replica id.
inline std::uint64_t tree_root_key(std::uint64_t tree_id) { return mix64(tree_id + kGolden); }
inline std::uint64_t child_key(std::uint64_t parent_key, std::uint64_t j) {
  return mix64(parent_key + (j + 1) * kGolden);
}

struct SampledTree {
  struct Node {
    std::uint64_t key = 0;          // stream identity
    std::uint32_t parent = 0;       // index into nodes; root points to itself
    std::uint32_t first_child = 0;  // index of first stored child
    std::uint32_t n_children = 0;   // stored children (0 at the depth bound)
    std::int32_t sampled_offspring = 0;  // offspring draw, kept even at the bound
    std::int32_t depth = 0;
    double weight = 0.0;      // trust weight on the edge from the parent
    double pi = 1.0;          // product of weights along the root path
    double weight_sum = 0.0;  // c if sampled_offspring > 0, else 0
    VertexAttributes mark;
  };
  std::vector<Node> nodes;  // breadth-first order; nodes[0] is the root
  double c = 0.0;
  double d = 1.0;
};

// Breadth-first sampling truncated at `depth` generations below the root.
// Nodes at the bound still draw their offspring count so that their signal
// term q*(c - weight_sum) follows the untruncated law.
inline SampledTree sample_gw_tree(const GWTreeSpec& spec, int depth, MasterSeed master,
                                  std::uint64_t tree_id = 0) {
  if (depth < 0) throw std::invalid_argument("sample_gw_tree: depth >= 0 required");
  spec.validate();
  SampledTree tree;
  tree.c = spec.c;
  tree.d = spec.d;

  // Fail fast when the expected population is clearly over budget.
  double expected = 1.0, gen = 1.0;
  double root_mean = spec.root_dist().mean();
  double mean = spec.offspring.mean();
  for (int l = 1; l <= depth && expected < 2.0 * static_cast<double>(spec.node_budget); ++l) {
    gen *= (l == 1) ? root_mean : mean;
    expected += gen;
  }
  if (expected > 2.0 * static_cast<double>(spec.node_budget))
    throw std::runtime_error("sample_gw_tree: expected population exceeds node budget");

  const bool leaf_offspring_matters = spec.offspring.p_zero() > 0.0;

  SampledTree::Node root;
  root.key = tree_root_key(tree_id);
  root.depth = 0;
  {
    RandomStream os = derive_stream(master, {StreamContext::GraphGen, root.key, 0});
    root.sampled_offspring = spec.root_dist().sample(os);
    RandomStream ms = derive_stream(master, {StreamContext::Weights, root.key, 0});
    root.mark = spec.root_marks().sample(ms);
  }
  root.weight_sum = root.sampled_offspring > 0 ? spec.c : 0.0;
  tree.nodes.push_back(root);

  std::size_t frontier_begin = 0, frontier_end = 1;
  for (int level = 0; level < depth; ++level) {
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      SampledTree::Node parent = tree.nodes[i];  // copy: push_back may reallocate
      int n = parent.sampled_offspring;
      if (n <= 0) continue;
      tree.nodes[i].first_child = static_cast<std::uint32_t>(tree.nodes.size());
      tree.nodes[i].n_children = static_cast<std::uint32_t>(n);
      double w = spec.c / static_cast<double>(n);
      for (int j = 0; j < n; ++j) {
        if (tree.nodes.size() >= spec.node_budget)
          throw std::runtime_error("sample_gw_tree: node budget exceeded");
        SampledTree::Node node;
        node.key = child_key(parent.key, static_cast<std::uint64_t>(j));
        node.parent = static_cast<std::uint32_t>(i);
        node.depth = parent.depth + 1;
        node.weight = w;
        node.pi = parent.pi * w;
        const bool need_offspring = (level + 1 < depth) || leaf_offspring_matters;
        if (need_offspring) {
          RandomStream os = derive_stream(master, {StreamContext::GraphGen, node.key, 0});
          node.sampled_offspring = spec.offspring.sample(os);
        } else {
          node.sampled_offspring = spec.offspring.kind == OffspringDist::Kind::Fixed
                                       ? spec.offspring.fixed_n
                                       : 1;  // only used for weight_sum; p_zero == 0 here
        }
        node.weight_sum = node.sampled_offspring > 0 ? spec.c : 0.0;
        RandomStream ms = derive_stream(master, {StreamContext::Weights, node.key, 0});
        node.mark = spec.mark_law.sample(ms);
        tree.nodes.push_back(node);
      }
    }
    frontier_begin = frontier_end;
    frontier_end = tree.nodes.size();
    if (frontier_begin == frontier_end) break;  // population died out
  }
  return tree;
}

}  // namespace opinion
