#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Summary statistics, grouped statistics with the between/within variance
// decomposition, histograms, and the two-sample Kolmogorov-Smirnov distance.

namespace opinion {

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // population convention (divide by n)
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline Summary summary(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("summary: empty input");
  Summary s;
  s.count = xs.size();
  s.min = xs[0];
  s.max = xs[0];
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = sum / static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - s.mean) * (x - s.mean);
  s.variance = acc / static_cast<double>(xs.size());
  return s;
}

struct GroupedSummary {
  struct Group {
    std::string key;
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
  };
  std::vector<Group> groups;
  double between_group_variance = 0.0;
  double within_group_mean_variance = 0.0;
  double total_variance = 0.0;
};

// keys[i] labels xs[i]; between + within equals the total population variance.
inline GroupedSummary grouped_summary(const std::vector<double>& xs,
                                      const std::vector<std::string>& keys) {
  if (xs.empty()) throw std::invalid_argument("grouped_summary: empty input");
  if (xs.size() != keys.size()) throw std::invalid_argument("grouped_summary: size mismatch");
  std::map<std::string, std::vector<double>> buckets;
  for (std::size_t i = 0; i < xs.size(); ++i) buckets[keys[i]].push_back(xs[i]);
  GroupedSummary out;
  Summary total = summary(xs);
  out.total_variance = total.variance;
  double n = static_cast<double>(xs.size());
  for (const auto& [key, values] : buckets) {
    Summary s = summary(values);
    out.groups.push_back({key, values.size(), s.mean, s.variance});
    double w = static_cast<double>(values.size()) / n;
    out.between_group_variance += w * (s.mean - total.mean) * (s.mean - total.mean);
    out.within_group_mean_variance += w * s.variance;
  }
  return out;
}

struct Histogram {
  double lo = 0.0, hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  double bin_lo(std::size_t b) const {
    return lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(counts.size());
  }
  double bin_hi(std::size_t b) const {
    return lo + (hi - lo) * static_cast<double>(b + 1) / static_cast<double>(counts.size());
  }
};

// Equal-width half-open bins [lo,m1), [m1,m2), ..., last bin closed at hi.
inline Histogram histogram(const std::vector<double>& xs, double lo, double hi, std::size_t bins) {
  if (!(lo < hi)) throw std::invalid_argument("histogram: lo < hi required");
  if (bins < 1) throw std::invalid_argument("histogram: bins >= 1 required");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(bins, 0);
  for (double x : xs) {
    if (x < lo || x > hi)
      throw std::out_of_range("histogram: value " + std::to_string(x) + " outside [lo,hi]");
    std::size_t b = (x == hi) ? bins - 1
                              : static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins));
    if (b >= bins) b = bins - 1;  // guard against rounding at the top edge
    ++h.counts[b];
    ++h.total;
  }
  return h;
}

// Sup-distance between the two empirical CDFs.
inline double ks_distance(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) throw std::invalid_argument("ks_distance: empty input");
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  double nx = static_cast<double>(xs.size());
  double ny = static_cast<double>(ys.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < xs.size() && j < ys.size()) {
    double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return best;
}

}  // namespace opinion
