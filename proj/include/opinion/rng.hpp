#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Deterministic, counter-based random streams.  Every consumer derives its own
// stream from (master seed, stream key), so results do not depend on the order
// in which threads draw numbers.

namespace opinion {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer: bijective mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

struct MasterSeed {
  std::uint64_t value = 0;
};

enum class StreamContext : std::uint64_t {
  GraphGen = 1,
  Weights = 2,
  Signal = 3,
  Init = 4,
  Replica = 5,
};

struct StreamKey {
  StreamContext context = StreamContext::Signal;
  std::uint64_t entity = 0;  // vertex id or node label hash
  std::uint64_t step = 0;    // time index k or replica index
};

// Word n of a stream is mix64(base + n*kGolden); the base is a hash of
// (seed, key), so the whole sequence is a pure function of those two values.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() = default;
  explicit RandomStream(std::uint64_t base) : state_(base) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_ = 0;
};

inline RandomStream derive_stream(MasterSeed master, StreamKey key) {
  std::uint64_t h = mix64(master.value + kGolden);
  h = mix64(h + static_cast<std::uint64_t>(key.context));
  h = mix64(h + key.entity);
  h = mix64(h + key.step);
  return RandomStream(h);
}

inline double sample_uniform(RandomStream& stream, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("sample_uniform: lo > hi");
  if (lo == hi) return lo;
  return lo + (hi - lo) * stream.uniform01();
}

// Beta via the two-Gamma-ratio construction; the Gamma draws use the standard
// library's generator (Marsaglia-Tsang squeeze in common implementations).
inline double sample_beta(RandomStream& stream, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("sample_beta: shape parameters must be positive");
  std::gamma_distribution<double> ga(alpha, 1.0);
  std::gamma_distribution<double> gb(beta, 1.0);
  double x = ga(stream);
  double y = gb(stream);
  double s = x + y;
  if (s <= 0.0) return 0.5;  // both underflowed; measure-zero fallback
  return x / s;
}

inline void check_probability_vector(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("probability entries must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("probabilities must sum to 1 (got " + std::to_string(sum) + ")");
}

inline std::size_t sample_index(RandomStream& stream, const std::vector<double>& probs) {
  double u = stream.uniform01();
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
    acc += probs[j];
    if (u < acc) return j;
  }
  return probs.empty() ? 0 : probs.size() - 1;
}

inline double sample_discrete(RandomStream& stream, const std::vector<double>& values,
                              const std::vector<double>& probs) {
  if (values.size() != probs.size() || values.empty())
    throw std::invalid_argument("sample_discrete: values/probs length mismatch");
  check_probability_vector(probs);
  return values[sample_index(stream, probs)];
}

}  // namespace opinion
