#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion/graph.hpp"
#include "opinion/rng.hpp"

// External-signal models: a media distribution Z with support in [-1,1], an
// optional selective-exposure map from vertex attributes to media laws, and
// the signal W = q*(c - weight_sum) + d*Z fed into the opinion update.

namespace opinion {

struct MediaLaw {
  enum class Kind { Uniform, TwoPoint, ShiftedBeta, Constant, CopyQ };
  Kind kind = Kind::Constant;
  double lo = 0.0, hi = 0.0;                // Uniform
  std::vector<double> values;               // TwoPoint (any finite support)
  std::vector<double> probs;
  double alpha = 1.0, beta = 1.0;           // ShiftedBeta: -1 + 2*Beta(alpha,beta)
  double z = 0.0;                           // Constant

  static MediaLaw uniform(double lo, double hi) {
    MediaLaw m;
    m.kind = Kind::Uniform;
    m.lo = lo;
    m.hi = hi;
    m.validate();
    return m;
  }
  static MediaLaw two_point(std::vector<double> values, std::vector<double> probs) {
    MediaLaw m;
    m.kind = Kind::TwoPoint;
    m.values = std::move(values);
    m.probs = std::move(probs);
    m.validate();
    return m;
  }
  static MediaLaw shifted_beta(double alpha, double beta) {
    MediaLaw m;
    m.kind = Kind::ShiftedBeta;
    m.alpha = alpha;
    m.beta = beta;
    m.validate();
    return m;
  }
  static MediaLaw constant(double z) {
    MediaLaw m;
    m.kind = Kind::Constant;
    m.z = z;
    m.validate();
    return m;
  }
  static MediaLaw copy_q() {
    MediaLaw m;
    m.kind = Kind::CopyQ;
    return m;
  }

  void validate() const {
    switch (kind) {
      case Kind::Uniform:
        if (lo > hi) throw std::invalid_argument("media law: uniform lo > hi");
        if (lo < -1.0 || hi > 1.0)
          throw std::invalid_argument("media law: uniform support outside [-1,1]");
        break;
      case Kind::TwoPoint:
        if (values.size() != probs.size() || values.empty())
          throw std::invalid_argument("media law: values/probs length mismatch");
        check_probability_vector(probs);
        for (double v : values)
          if (v < -1.0 || v > 1.0)
            throw std::invalid_argument("media law: atom outside [-1,1]");
        break;
      case Kind::ShiftedBeta:
        if (!(alpha > 0.0) || !(beta > 0.0))
          throw std::invalid_argument("media law: beta shapes must be positive");
        break;
      case Kind::Constant:
        if (z < -1.0 || z > 1.0)
          throw std::invalid_argument("media law: constant outside [-1,1]");
        break;
      case Kind::CopyQ:
        break;
    }
  }

  double sample(const VertexAttributes& attrs, RandomStream& stream) const {
    switch (kind) {
      case Kind::Uniform:
        return sample_uniform(stream, lo, hi);
      case Kind::TwoPoint:
        return values[sample_index(stream, probs)];
      case Kind::ShiftedBeta:
        return -1.0 + 2.0 * sample_beta(stream, alpha, beta);
      case Kind::Constant:
        return z;
      case Kind::CopyQ:
        return attrs.q;
    }
    return 0.0;
  }

  // Conditional mean/variance of Z given the attributes (q enters via CopyQ).
  double mean(double q) const {
    switch (kind) {
      case Kind::Uniform:
        return 0.5 * (lo + hi);
      case Kind::TwoPoint: {
        double m = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) m += values[j] * probs[j];
        return m;
      }
      case Kind::ShiftedBeta:
        return -1.0 + 2.0 * alpha / (alpha + beta);
      case Kind::Constant:
        return z;
      case Kind::CopyQ:
        return q;
    }
    return 0.0;
  }

  double variance(double q) const {
    switch (kind) {
      case Kind::Uniform: {
        double w = hi - lo;
        return w * w / 12.0;
      }
      case Kind::TwoPoint: {
        double m = mean(q), v = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j)
          v += (values[j] - m) * (values[j] - m) * probs[j];
        return v;
      }
      case Kind::ShiftedBeta: {
        double ab = alpha + beta;
        return 4.0 * alpha * beta / (ab * ab * (ab + 1.0));
      }
      case Kind::Constant:
      case Kind::CopyQ:
        return 0.0;
    }
    return 0.0;
  }
};

// Finite-partition exposure rule on vertex attributes.
struct ExposureRule {
  enum class Pred { SEq, TagEq, QPos, QNonPos, QNeg, QNonNeg };
  Pred pred = Pred::QPos;
  int ref = 0;  // for SEq / TagEq

  bool matches(const VertexAttributes& a) const {
    switch (pred) {
      case Pred::SEq: return a.s == ref;
      case Pred::TagEq: return a.tag == ref;
      case Pred::QPos: return a.q > 0.0;
      case Pred::QNonPos: return a.q <= 0.0;
      case Pred::QNeg: return a.q < 0.0;
      case Pred::QNonNeg: return a.q >= 0.0;
    }
    return false;
  }

  // Precedence bucket: s-rules first, then tag, then q-sign.
  int rank() const {
    switch (pred) {
      case Pred::SEq: return 0;
      case Pred::TagEq: return 1;
      default: return 2;
    }
  }
};

struct SignalModel {
  MediaLaw fallback = MediaLaw::constant(0.0);
  std::vector<std::pair<ExposureRule, MediaLaw>> rules;  // kept sorted by rank

  static SignalModel plain(MediaLaw law) {
    SignalModel m;
    m.fallback = std::move(law);
    return m;
  }

  void add_rule(ExposureRule rule, MediaLaw law) {
    law.validate();
    rules.emplace_back(rule, std::move(law));
    std::stable_sort(rules.begin(), rules.end(),
                     [](const auto& a, const auto& b) { return a.first.rank() < b.first.rank(); });
  }

  const MediaLaw& resolve(const VertexAttributes& attrs) const {
    for (const auto& [rule, law] : rules)
      if (rule.matches(attrs)) return law;
    return fallback;
  }

  bool attribute_independent() const {
    return rules.empty() && fallback.kind != MediaLaw::Kind::CopyQ;
  }
};

inline double media_sample(const SignalModel& model, const VertexAttributes& attrs,
                           RandomStream& stream) {
  return model.resolve(attrs).sample(attrs, stream);
}

// W = q*(c - weight_sum) + d*Z, with |W| <= d + c - weight_sum.
inline double external_signal(const SignalModel& model, const VertexAttributes& attrs,
                              double weight_sum, double c, double d, RandomStream& stream) {
  double z = media_sample(model, attrs, stream);
  double w = attrs.q * (c - weight_sum) + d * z;
#ifndef NDEBUG
  if (std::abs(w) > d + c - weight_sum + 1e-9)
    throw std::logic_error("external_signal: |W| bound violated");
#endif
  return w;
}

// Config grammar: uniform(-0.03,0.03) | twopoint(-1:0.5,1:0.5) | betashift(8,1)
// | const(1) | copyq
inline MediaLaw parse_media_law(const std::string& text) {
  auto trim = [](std::string s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string s = trim(text);
  if (s == "copyq") return MediaLaw::copy_q();
  std::size_t open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw std::invalid_argument("media law: cannot parse '" + text + "'");
  std::string name = trim(s.substr(0, open));
  std::string args = s.substr(open + 1, s.size() - open - 2);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= args.size()) {
    std::size_t comma = args.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(trim(args.substr(start)));
      break;
    }
    parts.push_back(trim(args.substr(start, comma - start)));
    start = comma + 1;
  }
  if (name == "uniform") {
    if (parts.size() != 2) throw std::invalid_argument("uniform(lo,hi) takes 2 arguments");
    return MediaLaw::uniform(std::stod(parts[0]), std::stod(parts[1]));
  }
  if (name == "betashift") {
    if (parts.size() != 2) throw std::invalid_argument("betashift(a,b) takes 2 arguments");
    return MediaLaw::shifted_beta(std::stod(parts[0]), std::stod(parts[1]));
  }
  if (name == "const") {
    if (parts.size() != 1) throw std::invalid_argument("const(z) takes 1 argument");
    return MediaLaw::constant(std::stod(parts[0]));
  }
  if (name == "twopoint") {
    std::vector<double> values, probs;
    for (const std::string& part : parts) {
      std::size_t colon = part.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("twopoint entries must be value:prob");
      values.push_back(std::stod(part.substr(0, colon)));
      probs.push_back(std::stod(part.substr(colon + 1)));
    }
    return MediaLaw::two_point(std::move(values), std::move(probs));
  }
  throw std::invalid_argument("media law: unknown kind '" + name + "'");
}

// Exposure keys: "q>0", "q<=0", "q<0", "q>=0", "s=0", "s=1", "tag=<int>".
inline ExposureRule parse_exposure_key(const std::string& key) {
  ExposureRule r;
  if (key == "q>0") r.pred = ExposureRule::Pred::QPos;
  else if (key == "q<=0") r.pred = ExposureRule::Pred::QNonPos;
  else if (key == "q<0") r.pred = ExposureRule::Pred::QNeg;
  else if (key == "q>=0") r.pred = ExposureRule::Pred::QNonNeg;
  else if (key.rfind("s=", 0) == 0) {
    r.pred = ExposureRule::Pred::SEq;
    r.ref = std::stoi(key.substr(2));
  } else if (key.rfind("tag=", 0) == 0) {
    r.pred = ExposureRule::Pred::TagEq;
    r.ref = std::stoi(key.substr(4));
  } else {
    throw std::invalid_argument("exposure: unknown key '" + key + "'");
  }
  return r;
}

// Exposure grammar: { "q>0": betashift(8,1), "q<=0": betashift(1,8) }
inline void parse_exposure_map(SignalModel& model, const std::string& text) {
  std::size_t open = text.find('{');
  std::size_t close = text.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("exposure: expected { ... }");
  std::string body = text.substr(open + 1, close - open - 1);
  std::size_t pos = 0;
  while (true) {
    std::size_t q1 = body.find('"', pos);
    if (q1 == std::string::npos) break;
    std::size_t q2 = body.find('"', q1 + 1);
    if (q2 == std::string::npos) throw std::invalid_argument("exposure: unterminated key");
    std::string key = body.substr(q1 + 1, q2 - q1 - 1);
    std::size_t colon = body.find(':', q2 + 1);
    if (colon == std::string::npos) throw std::invalid_argument("exposure: missing ':'");
    // Value runs to the next top-level comma (laws contain no braces).
    std::size_t depth = 0, end = colon + 1;
    for (; end < body.size(); ++end) {
      if (body[end] == '(') ++depth;
      else if (body[end] == ')') --depth;
      else if (body[end] == ',' && depth == 0) break;
    }
    model.add_rule(parse_exposure_key(key), parse_media_law(body.substr(colon + 1, end - colon - 1)));
    pos = end + 1;
  }
}

}  // namespace opinion
