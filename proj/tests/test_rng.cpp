#include <catch2/catch_amalgamated.hpp>

#include "opinion/rng.hpp"

using namespace opinion;

TEST_CASE("derived streams are pure functions of seed and key") {
  MasterSeed seed{42};
  StreamKey key{StreamContext::Signal, 7, 3};
  RandomStream a = derive_stream(seed, key);
  RandomStream b = derive_stream(seed, key);
  for (int i = 0; i < 16; ++i) REQUIRE(a() == b());
}

TEST_CASE("distinct keys give distinct streams") {
  MasterSeed seed{42};
  RandomStream base = derive_stream(seed, {StreamContext::Signal, 7, 3});
  RandomStream other_entity = derive_stream(seed, {StreamContext::Signal, 8, 3});
  RandomStream other_step = derive_stream(seed, {StreamContext::Signal, 7, 4});
  RandomStream other_context = derive_stream(seed, {StreamContext::Init, 7, 3});
  RandomStream other_seed = derive_stream(MasterSeed{43}, {StreamContext::Signal, 7, 3});
  std::uint64_t first = base();
  REQUIRE(first != other_entity());
  REQUIRE(first != other_step());
  REQUIRE(first != other_context());
  REQUIRE(first != other_seed());
}

TEST_CASE("uniform01 lies in [0,1) with mean near one half") {
  RandomStream s = derive_stream(MasterSeed{1}, {StreamContext::Signal, 0, 0});
  double sum = 0.0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) {
    double u = s.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("sample_uniform respects bounds and rejects inverted ranges") {
  RandomStream s = derive_stream(MasterSeed{2}, {StreamContext::Signal, 0, 0});
  for (int i = 0; i < 1000; ++i) {
    double x = sample_uniform(s, -0.25, 0.75);
    REQUIRE(x >= -0.25);
    REQUIRE(x < 0.75);
  }
  REQUIRE(sample_uniform(s, 0.3, 0.3) == 0.3);
  REQUIRE_THROWS_AS(sample_uniform(s, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("beta sampler matches Beta(1,8) moments") {
  RandomStream s = derive_stream(MasterSeed{3}, {StreamContext::Signal, 0, 0});
  const int n = 200'000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = sample_beta(s, 1.0, 8.0);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
    sum2 += x * x;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  // Beta(1,8): mean 1/9, variance 8/(81*10).
  REQUIRE(std::abs(mean - 1.0 / 9.0) < 4.0 * std::sqrt(8.0 / 810.0 / n));
  REQUIRE(std::abs(var - 8.0 / 810.0) < 0.0005);
  REQUIRE_THROWS_AS(sample_beta(s, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("probability vectors are validated") {
  REQUIRE_NOTHROW(check_probability_vector({0.5, 0.5}));
  REQUIRE_THROWS_AS(check_probability_vector({0.5, 0.4}), std::invalid_argument);
  REQUIRE_THROWS_AS(check_probability_vector({1.5, -0.5}), std::invalid_argument);
}

TEST_CASE("sample_index matches atom frequencies") {
  RandomStream s = derive_stream(MasterSeed{4}, {StreamContext::Signal, 0, 0});
  std::vector<double> probs{0.2, 0.5, 0.3};
  std::vector<int> counts(3, 0);
  const int n = 100'000;
  for (int i = 0; i < n; ++i) ++counts[sample_index(s, probs)];
  for (int j = 0; j < 3; ++j)
    REQUIRE(std::abs(counts[j] / static_cast<double>(n) - probs[j]) < 0.01);
}

TEST_CASE("sample_discrete returns atoms and validates input") {
  RandomStream s = derive_stream(MasterSeed{5}, {StreamContext::Signal, 0, 0});
  double x = sample_discrete(s, {-1.0, 1.0}, {0.5, 0.5});
  REQUIRE((x == -1.0 || x == 1.0));
  REQUIRE_THROWS_AS(sample_discrete(s, {1.0}, {0.5, 0.5}), std::invalid_argument);
}
