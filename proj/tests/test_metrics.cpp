#include <catch2/catch_amalgamated.hpp>

#include "opinion/metrics.hpp"
#include "opinion/rng.hpp"

using namespace opinion;

TEST_CASE("summary statistics use the population convention") {
  Summary s = summary({1.0, 2.0, 3.0, 4.0});
  REQUIRE(s.mean == Catch::Approx(2.5));
  REQUIRE(s.variance == Catch::Approx(1.25));
  REQUIRE(s.min == 1.0);
  REQUIRE(s.max == 4.0);
  REQUIRE(s.count == 4);
  REQUIRE_THROWS_AS(summary({}), std::invalid_argument);
}

TEST_CASE("grouped summary decomposes the total variance") {
  std::vector<double> xs{1.0, 2.0, 3.0, 10.0, 11.0, 12.0};
  std::vector<std::string> keys{"a", "a", "a", "b", "b", "b"};
  GroupedSummary g = grouped_summary(xs, keys);
  REQUIRE(g.groups.size() == 2);
  REQUIRE(g.groups[0].key == "a");
  REQUIRE(g.groups[0].mean == Catch::Approx(2.0));
  REQUIRE(g.groups[1].mean == Catch::Approx(11.0));
  REQUIRE(g.between_group_variance + g.within_group_mean_variance ==
          Catch::Approx(g.total_variance).margin(1e-12));
  REQUIRE(g.between_group_variance == Catch::Approx(4.5 * 4.5));
  REQUIRE_THROWS_AS(grouped_summary({1.0}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("histogram bins are half-open with a closed top edge") {
  Histogram h = histogram({0.0}, -1.0, 1.0, 2);
  REQUIRE(h.counts == std::vector<std::uint64_t>{0, 1});  // 0 falls in [0, 1]
  Histogram top = histogram({1.0, -1.0, 0.999}, -1.0, 1.0, 4);
  REQUIRE(top.counts == std::vector<std::uint64_t>{1, 0, 0, 2});
  REQUIRE(top.total == 3);
  REQUIRE(top.bin_lo(0) == -1.0);
  REQUIRE(top.bin_hi(3) == 1.0);
  REQUIRE_THROWS_WITH(histogram({2.0}, -1.0, 1.0, 4),
                      Catch::Matchers::ContainsSubstring("2.0"));
  REQUIRE_THROWS_AS(histogram({0.0}, 1.0, -1.0, 4), std::invalid_argument);
}

TEST_CASE("kolmogorov-smirnov distance at the extremes") {
  REQUIRE(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  REQUIRE(ks_distance({0.0, 0.1}, {5.0, 6.0}) == 1.0);
  REQUIRE(ks_distance({0.0, 1.0}, {0.5}) == Catch::Approx(0.5));
  REQUIRE_THROWS_AS(ks_distance({}, {1.0}), std::invalid_argument);
}

TEST_CASE("kolmogorov-smirnov distance is small for equal laws") {
  RandomStream a = derive_stream(MasterSeed{7}, {StreamContext::Replica, 1, 0});
  RandomStream b = derive_stream(MasterSeed{7}, {StreamContext::Replica, 2, 0});
  std::vector<double> xs(10'000), ys(10'000);
  for (int i = 0; i < 10'000; ++i) {
    xs[i] = a.uniform01();
    ys[i] = b.uniform01();
  }
  REQUIRE(ks_distance(xs, ys) < 0.03);
  // A mean shift of 0.2 must be visible.
  for (double& y : ys) y = 0.8 * y + 0.2;
  REQUIRE(ks_distance(xs, ys) > 0.1);
}
