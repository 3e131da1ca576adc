#include <catch2/catch_amalgamated.hpp>

#include "opinion/analytics.hpp"

using namespace opinion;

namespace {

GWTreeSpec make_spec(OffspringDist off, MarkLaw marks, double c, double d) {
  GWTreeSpec spec;
  spec.offspring = std::move(off);
  spec.mark_law = std::move(marks);
  spec.c = c;
  spec.d = d;
  return spec;
}

}  // namespace

TEST_CASE("memoryless engine reproduces the binary-tree variance") {
  GWTreeSpec spec =
      make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.5);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs in = moment_inputs(spec, model);
  MomentReport r = mean_var_no_memory(in);
  // var(W) = 1/12, rho2 = 1/8: var = (1/12)/(7/8) = 2/21.
  REQUIRE(r.var_node == Catch::Approx(2.0 / 21.0).margin(1e-12));
  REQUIRE(r.var_root == Catch::Approx(2.0 / 21.0).margin(1e-12));
  REQUIRE(r.mean_root == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(r.mean_node == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("memoryless engine rejects out-of-scope inputs") {
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs with_memory = moment_inputs(
      make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.25), model);
  REQUIRE_THROWS_AS(mean_var_no_memory(with_memory), std::domain_error);
  MomentInputs with_leaves = moment_inputs(
      make_spec(OffspringDist::binomial(2, 0.5), MarkLaw::constant(0.0), 0.5, 0.5), model);
  REQUIRE_THROWS_AS(mean_var_no_memory(with_leaves), std::domain_error);
}

TEST_CASE("general engine reduces to the memoryless engine when c + d = 1") {
  RandomStream rnd = derive_stream(MasterSeed{101}, {StreamContext::Replica, 0, 0});
  for (int trial = 0; trial < 50; ++trial) {
    double c = 0.05 + 0.9 * rnd.uniform01();
    double p1 = rnd.uniform01();
    std::vector<double> pmf{0.0, p1, (1.0 - p1) * 0.5, (1.0 - p1) * 0.5};
    double qa = 2.0 * rnd.uniform01() - 1.0, qb = 2.0 * rnd.uniform01() - 1.0;
    double pa = rnd.uniform01();
    double za = 2.0 * rnd.uniform01() - 1.0, zb = 2.0 * rnd.uniform01() - 1.0;
    GWTreeSpec spec = make_spec(OffspringDist::explicit_pmf(pmf),
                                MarkLaw::two_point(qa, pa, qb, 1.0 - pa), c, 1.0 - c);
    SignalModel model =
        SignalModel::plain(MediaLaw::two_point({za, zb}, {0.5, 0.5}));
    MomentInputs in = moment_inputs(spec, model);
    MomentReport nm = mean_var_no_memory(in);
    MomentReport gen = mean_var_general(in);
    REQUIRE(gen.mean_root == Catch::Approx(nm.mean_root).margin(1e-10));
    REQUIRE(gen.mean_node == Catch::Approx(nm.mean_node).margin(1e-10));
    REQUIRE(gen.var_root == Catch::Approx(nm.var_root).margin(1e-10));
    REQUIRE(gen.var_node == Catch::Approx(nm.var_node).margin(1e-10));
  }
}

TEST_CASE("general engine matches monte-carlo series sampling with memory") {
  GWTreeSpec spec =
      make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.25);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentReport engine = mean_var_general(moment_inputs(spec, model));
  const int n = 20'000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = series_sample_root(spec, model, 12, MasterSeed{103}, i);
    sum += x;
    sum2 += x * x;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  double se_mean = std::sqrt(var / n);
  double se_var = std::sqrt(2.0 / n) * var;  // near-gaussian summand
  REQUIRE(std::abs(mean - engine.mean_root) < 4.0 * se_mean);
  REQUIRE(std::abs(var - engine.var_root) < 4.0 * se_var);
}

TEST_CASE("geometric weight expectation") {
  REQUIRE(geometric_weight_expectation(0.125, 1.0, 0, 1e-12) == 1.0);
  REQUIRE(geometric_weight_expectation(0.125, 1.0, 1, 1e-12) == 1.0);
  // rho2 = 0: only the t = 0 term survives, q(shift) with no geometric mixing.
  double q0 = geometric_weight_expectation(0.0, 0.75, 0, 1e-14);
  double direct = 0.0, om2 = 0.0625;
  for (int s = 0; s < 200; ++s) direct += std::pow(om2, s);  // binom(s,s)^2 = 1
  REQUIRE(q0 == Catch::Approx(direct).margin(1e-10));
  REQUIRE_THROWS_AS(geometric_weight_expectation(0.6, 0.75, 0, 1e-12), std::domain_error);
  REQUIRE(geometric_weight_expectation(0.1, 0.75, 1, 1e-12) >
          geometric_weight_expectation(0.1, 0.75, 0, 1e-12) * 0.0);  // finite
}

TEST_CASE("finite horizon at k = 0 returns the raw signal moments") {
  GWTreeSpec spec = make_spec(OffspringDist::binomial(3, 0.5),
                              MarkLaw::two_point(-1.0, 0.5, 1.0, 0.5), 0.5, 0.3);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs in = moment_inputs(spec, model);
  HorizonMoments h = finite_horizon_moments(in, 0);
  REQUIRE(h.mean_root == Catch::Approx(in.mean_W_root).margin(1e-14));
  REQUIRE(h.var_root == Catch::Approx(in.var_W_root).margin(1e-14));
  REQUIRE(h.mean_node == Catch::Approx(in.mean_W1).margin(1e-14));
  REQUIRE(h.var_node == Catch::Approx(in.var_W1).margin(1e-14));
}

TEST_CASE("finite horizon converges to the limiting moments") {
  GWTreeSpec spec = make_spec(OffspringDist::binomial(4, 0.6),
                              MarkLaw::two_point(-0.5, 0.5, 1.0, 0.5), 0.5, 0.3);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs in = moment_inputs(spec, model);
  MomentReport limit = mean_var_general(in);
  HorizonMoments h = finite_horizon_moments(in, 200);
  REQUIRE(h.mean_root == Catch::Approx(limit.mean_root).margin(1e-6));
  REQUIRE(h.var_root == Catch::Approx(limit.var_root).margin(1e-6));
  REQUIRE(h.mean_node == Catch::Approx(limit.mean_node).margin(1e-6));
  REQUIRE(h.var_node == Catch::Approx(limit.var_node).margin(1e-6));
}

TEST_CASE("finite horizon with no memory reaches the limit geometrically") {
  GWTreeSpec spec =
      make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.5);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs in = moment_inputs(spec, model);
  MomentReport limit = mean_var_no_memory(in);
  HorizonMoments h = finite_horizon_moments(in, 40);
  REQUIRE(h.var_node == Catch::Approx(limit.var_node).margin(1e-12));
  // Exact partial sum: var_node(k) = var(W) (1 - rho2^{k+1}) / (1 - rho2).
  HorizonMoments h2 = finite_horizon_moments(in, 2);
  double expected = (0.25 / 3.0) * (1.0 - std::pow(0.125, 3)) / 0.875;
  REQUIRE(h2.var_node == Catch::Approx(expected).margin(1e-14));
}

TEST_CASE("memory strictly reduces variance and vanishes smoothly at c + d = 1") {
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  GWTreeSpec spec =
      make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.25);
  MemoryComparison cmp = memory_comparison(moment_inputs(spec, model));
  REQUIRE(cmp.inequality_holds);
  REQUIRE(cmp.var_memory < cmp.var_no_memory);

  // Continuity: with c + d -> 1 both sides collapse to the memoryless value.
  GWTreeSpec near = make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.5 - 1e-9);
  MemoryComparison edge = memory_comparison(moment_inputs(near, model));
  MomentReport nm = mean_var_no_memory(
      moment_inputs(make_spec(OffspringDist::fixed(2), MarkLaw::constant(0.0), 0.5, 0.5), model));
  REQUIRE(edge.var_memory == Catch::Approx(nm.var_root).margin(1e-6));
  REQUIRE(edge.var_no_memory == Catch::Approx(nm.var_root).margin(1e-6));
}

TEST_CASE("memory comparison is an equality for deterministic media") {
  // Var(Z | mark) = 0 everywhere: both variances coincide.
  SignalModel model = SignalModel::plain(MediaLaw::copy_q());
  GWTreeSpec spec = make_spec(OffspringDist::fixed(2),
                              MarkLaw::two_point(-1.0, 0.5, 1.0, 0.5), 0.5, 0.25);
  MemoryComparison cmp = memory_comparison(moment_inputs(spec, model));
  REQUIRE(cmp.var_memory == Catch::Approx(cmp.var_no_memory).margin(1e-12));
  REQUIRE(cmp.inequality_holds);
}

TEST_CASE("memory comparison agrees with the general engine variance") {
  // With offspring >= 1 the explicit memory-variance formula and the general
  // engine describe the same quantity.
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  for (auto [c, d] : std::vector<std::pair<double, double>>{{0.5, 0.25}, {0.3, 0.5}, {0.6, 0.1}}) {
    GWTreeSpec spec = make_spec(OffspringDist::fixed(3),
                                MarkLaw::two_point(-1.0, 0.5, 1.0, 0.5), c, d);
    MomentInputs in = moment_inputs(spec, model);
    MemoryComparison cmp = memory_comparison(in);
    MomentReport gen = mean_var_general(in);
    REQUIRE(cmp.var_memory == Catch::Approx(gen.var_root).margin(1e-9));
  }
}

TEST_CASE("conditional moments satisfy the law of total variance") {
  // Two mark atoms, group = sign(q), media depending only on q: within each
  // group the conditional signal mean is constant, so group means explain all
  // of var(Y_root).
  GWTreeSpec spec = make_spec(OffspringDist::fixed(2),
                              MarkLaw::two_point(-1.0, 0.5, 1.0, 0.5), 0.5, 0.5);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  model.add_rule(parse_exposure_key("q>0"), MediaLaw::shifted_beta(8.0, 1.0));
  model.add_rule(parse_exposure_key("q<=0"), MediaLaw::shifted_beta(1.0, 8.0));
  MomentInputs in = moment_inputs(spec, model);
  MomentReport nm = mean_var_no_memory(in);
  double mean_total = 0.0, second_moment = 0.0;
  for (const GroupMoments& g : in.groups) {
    MomentReport::Conditional cond = conditional_mean_var(in, g.name);
    REQUIRE(cond.prob == Catch::Approx(0.5));
    mean_total += cond.prob * cond.mean;
    second_moment += cond.prob * (cond.variance + cond.mean * cond.mean);
  }
  REQUIRE(mean_total == Catch::Approx(nm.mean_root).margin(1e-10));
  REQUIRE(second_moment - mean_total * mean_total ==
          Catch::Approx(nm.var_root).margin(1e-10));
  REQUIRE_THROWS_AS(conditional_mean_var(in, "nonexistent"), std::invalid_argument);
}

TEST_CASE("variance engines reject divergent spectral inputs") {
  // rho2 >= (c+d)^2 makes the second-moment series diverge.
  GWTreeSpec spec =
      make_spec(OffspringDist::fixed(1), MarkLaw::constant(0.0), 0.6, 0.05);
  SignalModel model = SignalModel::plain(MediaLaw::uniform(-1.0, 1.0));
  MomentInputs in = moment_inputs(spec, model);  // rho2 = 0.36 > 0.4225? no
  in.rho2 = 0.5;                                 // force divergence
  REQUIRE_THROWS_AS(mean_var_general(in), std::domain_error);
  REQUIRE_THROWS_AS(memory_comparison(in), std::domain_error);
}
