#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion/rng.hpp"

// Directed marked graph model: compressed in-adjacency (the update loop only
// reads in-neighbors), per-vertex attributes, and the random-graph generators
// used by the experiments.

namespace opinion {

struct VertexAttributes {
  double q = 0.0;  // internal opinion in [-1,1]
  int s = 0;       // stubborn/bot flag
  int tag = 0;     // generic grouping attribute
};

// Law for sampling vertex attributes.  Discrete q (finite atoms) keeps every
// expectation a finite sum for the analytic moment engines; continuous q is
// supported for simulation only.
struct MarkLaw {
  enum class Kind { DiscreteQ, UniformQ };
  Kind kind = Kind::DiscreteQ;
  std::vector<double> values{0.0};  // DiscreteQ atoms
  std::vector<double> probs{1.0};
  double lo = -1.0, hi = 1.0;  // UniformQ range
  int s = 0;
  int tag = 0;

  static MarkLaw constant(double q, int s_flag = 0, int tag_value = 0) {
    MarkLaw law;
    law.values = {q};
    law.probs = {1.0};
    law.s = s_flag;
    law.tag = tag_value;
    return law;
  }

  static MarkLaw two_point(double a, double pa, double b, double pb) {
    MarkLaw law;
    law.values = {a, b};
    law.probs = {pa, pb};
    return law;
  }

  static MarkLaw uniform(double lo, double hi) {
    MarkLaw law;
    law.kind = Kind::UniformQ;
    law.lo = lo;
    law.hi = hi;
    return law;
  }

  void validate() const {
    if (kind == Kind::DiscreteQ) {
      if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("mark law: values/probs length mismatch");
      check_probability_vector(probs);
      for (double v : values)
        if (v < -1.0 || v > 1.0)
          throw std::invalid_argument("mark law: q atom outside [-1,1]");
    } else {
      if (lo > hi || lo < -1.0 || hi > 1.0)
        throw std::invalid_argument("mark law: uniform q range outside [-1,1]");
    }
  }

  VertexAttributes sample(RandomStream& stream) const {
    VertexAttributes a;
    if (kind == Kind::DiscreteQ)
      a.q = values[sample_index(stream, probs)];
    else
      a.q = sample_uniform(stream, lo, hi);
    a.s = s;
    a.tag = tag;
    return a;
  }
};

// Attribute-based grouping used by conditional statistics.
enum class Grouping { None, QSign, SFlag, Tag };

inline std::string group_name(Grouping rule, const VertexAttributes& a) {
  switch (rule) {
    case Grouping::None: return "all";
    case Grouping::QSign: return a.q > 0.0 ? "q>0" : "q<=0";
    case Grouping::SFlag: return a.s ? "s=1" : "s=0";
    case Grouping::Tag: return "tag=" + std::to_string(a.tag);
  }
  return "all";
}

struct DirectedGraph {
  std::size_t n = 0;
  double c = 0.0;  // total neighbor trust per vertex
  double d = 1.0;  // media weight
  std::vector<VertexAttributes> attrs;
  // In-edges of vertex v: indices [in_offsets[v], in_offsets[v+1]).
  std::vector<std::size_t> in_offsets;
  std::vector<std::uint32_t> in_src;
  std::vector<double> in_weight;

  std::size_t in_degree(std::size_t v) const { return in_offsets[v + 1] - in_offsets[v]; }

  double weight_sum(std::size_t v) const {
    double s = 0.0;
    for (std::size_t e = in_offsets[v]; e < in_offsets[v + 1]; ++e) s += in_weight[e];
    return s;
  }

  std::size_t edge_count() const { return in_src.size(); }
};

namespace detail {

// Build CSR arrays from per-vertex in-edge lists.
inline void finalize_csr(DirectedGraph& g,
                         const std::vector<std::vector<std::pair<std::uint32_t, double>>>& lists) {
  g.in_offsets.assign(g.n + 1, 0);
  std::size_t total = 0;
  for (std::size_t v = 0; v < g.n; ++v) {
    g.in_offsets[v] = total;
    total += lists[v].size();
  }
  g.in_offsets[g.n] = total;
  g.in_src.resize(total);
  g.in_weight.resize(total);
  std::size_t e = 0;
  for (std::size_t v = 0; v < g.n; ++v) {
    for (const auto& [src, w] : lists[v]) {
      g.in_src[e] = src;
      g.in_weight[e] = w;
      ++e;
    }
  }
}

}  // namespace detail

inline void validate_cd(double c, double d) {
  if (c < 0.0 || c >= 1.0) throw std::invalid_argument("require c in [0,1)");
  if (d <= 0.0 || d > 1.0) throw std::invalid_argument("require d in (0,1]");
  if (c + d > 1.0 + 1e-12) throw std::invalid_argument("require c + d <= 1");
}

// Directed Erdos-Renyi: each ordered pair (i,j), i != j, carries edge i->j
// independently with probability p.  No self-loops.  Weights stay zero until
// assign_equal_weights.  graph_id separates replicas deterministically.
inline DirectedGraph generate_er_directed(std::size_t n, double p, double c, double d,
                                          const MarkLaw& mark_law, MasterSeed master,
                                          std::uint64_t graph_id = 0) {
  if (n < 1) throw std::invalid_argument("generate_er_directed: n >= 1 required");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("generate_er_directed: p outside [0,1]");
  validate_cd(c, d);
  mark_law.validate();
  DirectedGraph g;
  g.n = n;
  g.c = c;
  g.d = d;
  g.attrs.resize(n);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> lists(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::uint64_t entity = (graph_id << 32) | v;
    // One stream per target vertex decides all of its in-edges.
    RandomStream es = derive_stream(master, {StreamContext::GraphGen, entity, 0});
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      if (es.uniform01() < p) lists[v].emplace_back(static_cast<std::uint32_t>(u), 0.0);
    }
    RandomStream ms = derive_stream(master, {StreamContext::GraphGen, entity, 1});
    g.attrs[v] = mark_law.sample(ms);
  }
  detail::finalize_csr(g, lists);
  return g;
}

// Append n_bots zero-in-degree vertices (s=1, q=bot_q) and connect each bot to
// every existing vertex independently with probability p_bot.
inline DirectedGraph overlay_bots(const DirectedGraph& g, std::size_t n_bots, double p_bot,
                                  double bot_q, MasterSeed master, std::uint64_t graph_id = 0) {
  if (p_bot < 0.0 || p_bot > 1.0) throw std::invalid_argument("overlay_bots: p_bot outside [0,1]");
  DirectedGraph out;
  out.n = g.n + n_bots;
  out.c = g.c;
  out.d = g.d;
  out.attrs = g.attrs;
  for (std::size_t b = 0; b < n_bots; ++b) {
    VertexAttributes a;
    a.q = bot_q;
    a.s = 1;
    out.attrs.push_back(a);
  }
  std::vector<std::vector<std::pair<std::uint32_t, double>>> lists(out.n);
  for (std::size_t v = 0; v < g.n; ++v)
    for (std::size_t e = g.in_offsets[v]; e < g.in_offsets[v + 1]; ++e)
      lists[v].emplace_back(g.in_src[e], g.in_weight[e]);
  for (std::size_t b = 0; b < n_bots; ++b) {
    std::uint64_t entity = (graph_id << 32) | (g.n + b);
    RandomStream es = derive_stream(master, {StreamContext::GraphGen, entity, 2});
    std::uint32_t src = static_cast<std::uint32_t>(g.n + b);
    for (std::size_t v = 0; v < g.n; ++v)
      if (es.uniform01() < p_bot) lists[v].emplace_back(src, 0.0);
  }
  detail::finalize_csr(out, lists);
  return out;
}

// Equal-split trust: every vertex with in-degree D > 0 gets weight c/D on each
// in-edge; isolated vertices keep empty weight lists.
inline DirectedGraph assign_equal_weights(DirectedGraph g) {
  for (std::size_t v = 0; v < g.n; ++v) {
    std::size_t deg = g.in_degree(v);
    if (deg == 0) continue;
    double w = g.c / static_cast<double>(deg);
    for (std::size_t e = g.in_offsets[v]; e < g.in_offsets[v + 1]; ++e) g.in_weight[e] = w;
  }
  return g;
}

inline void check_weight_sums(const DirectedGraph& g) {
  for (std::size_t v = 0; v < g.n; ++v) {
    if (g.in_degree(v) == 0) continue;
    double s = g.weight_sum(v);
    // Unweighted graphs (all zero, pre-assignment) are tolerated.
    if (std::abs(s) <= 1e-12) continue;
    if (std::abs(s - g.c) > 1e-12)
      throw std::runtime_error("weight-sum violation at vertex " + std::to_string(v) +
                               ": sum=" + std::to_string(s) + " expected c=" + std::to_string(g.c));
  }
}

inline void save_edge_list(const DirectedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
  out.precision(17);
  out << "n=" << g.n << "\n";
  out << "c=" << g.c << "\n";
  out << "d=" << g.d << "\n";
  for (std::size_t v = 0; v < g.n; ++v) {
    const VertexAttributes& a = g.attrs[v];
    out << "v " << v << " q=" << a.q << " s=" << a.s << " tag=" << a.tag << "\n";
  }
  for (std::size_t v = 0; v < g.n; ++v)
    for (std::size_t e = g.in_offsets[v]; e < g.in_offsets[v + 1]; ++e)
      out << "e " << g.in_src[e] << " " << v << " " << g.in_weight[e] << "\n";
}

inline DirectedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
  DirectedGraph g;
  bool have_n = false;
  std::vector<std::vector<std::pair<std::uint32_t, double>>> lists;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.rfind("n=", 0) == 0) {
      g.n = std::stoull(line.substr(2));
      g.attrs.assign(g.n, {});
      lists.assign(g.n, {});
      have_n = true;
    } else if (line.rfind("c=", 0) == 0) {
      g.c = std::stod(line.substr(2));
    } else if (line.rfind("d=", 0) == 0) {
      g.d = std::stod(line.substr(2));
    } else if (line[0] == 'v') {
      if (!have_n) fail("vertex line before n= header");
      std::istringstream ss(line);
      std::string tok;
      std::size_t id;
      ss >> tok >> id;
      if (!ss || id >= g.n) fail("bad vertex line");
      VertexAttributes a;
      while (ss >> tok) {
        if (tok.rfind("q=", 0) == 0)
          a.q = std::stod(tok.substr(2));
        else if (tok.rfind("s=", 0) == 0)
          a.s = std::stoi(tok.substr(2));
        else if (tok.rfind("tag=", 0) == 0)
          a.tag = std::stoi(tok.substr(4));
        else
          fail("unknown vertex field '" + tok + "'");
      }
      g.attrs[id] = a;
    } else if (line[0] == 'e') {
      if (!have_n) fail("edge line before n= header");
      std::istringstream ss(line);
      std::string tok;
      std::size_t src, dst;
      double w;
      ss >> tok >> src >> dst >> w;
      if (!ss || src >= g.n || dst >= g.n) fail("bad edge line");
      if (w < 0.0) fail("negative edge weight");
      lists[dst].emplace_back(static_cast<std::uint32_t>(src), w);
    } else {
      fail("unrecognized line '" + line + "'");
    }
  }
  if (!have_n) throw std::runtime_error(path + ": missing n= header");
  detail::finalize_csr(g, lists);
  check_weight_sums(g);
  return g;
}

struct InDegreeStats {
  double mean = 0.0;
  std::vector<double> pmf;  // pmf[k] = fraction of vertices with in-degree k
  double frac_zero = 0.0;
};

inline InDegreeStats in_degree_statistics(const DirectedGraph& g) {
  InDegreeStats st;
  if (g.n == 0) return st;
  std::size_t max_deg = 0;
  for (std::size_t v = 0; v < g.n; ++v) max_deg = std::max(max_deg, g.in_degree(v));
  st.pmf.assign(max_deg + 1, 0.0);
  double total = 0.0;
  for (std::size_t v = 0; v < g.n; ++v) {
    std::size_t deg = g.in_degree(v);
    st.pmf[deg] += 1.0;
    total += static_cast<double>(deg);
  }
  for (double& x : st.pmf) x /= static_cast<double>(g.n);
  st.mean = total / static_cast<double>(g.n);
  st.frac_zero = st.pmf[0];
  return st;
}

}  // namespace opinion
