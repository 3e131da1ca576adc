#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "opinion/graph.hpp"
#include "opinion/signal.hpp"
#include "opinion/tree.hpp"

// Experiment configuration: flat key-value text files with optional [section]
// headers, plus parsers for the offspring / mark-law grammars.

namespace opinion {

struct ExperimentConfig {
  std::string mode = "simulate";  // simulate | tree-sample | tree-analytic |
                                  // finite-horizon | memory-compare | reproduce
  std::string figure;             // fig1..fig7 for reproduce
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int threads = 1;
  std::size_t replicas = 1;
  double epsilon = 1e-6;
  double c = 0.5, d = 0.5;

  // graph
  std::size_t n = 1000;
  double p = 0.03;
  std::size_t n_bots = 0;
  double p_bot = 0.0;
  double bot_q = 1.0;

  // tree
  std::string offspring = "fixed(2)";
  int horizon = 12;
  std::size_t samples = 100'000;
  std::vector<int> horizons{0, 1, 2, 5};  // finite-horizon mode

  // laws
  std::string q_law = "twopoint(-1:0.5,1:0.5)";
  std::string media = "uniform(-1,1)";
  std::string exposure;  // optional { "q>0": ..., ... }
  std::string group_by = "none";  // none | qsign | s | tag
  std::size_t bins = 40;

  bool trajectory = false;
  std::uint64_t trajectory_steps = 60;
};

inline OffspringDist parse_offspring(const std::string& text) {
  std::size_t open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw std::invalid_argument("offspring: cannot parse '" + text + "'");
  std::string name = text.substr(0, open);
  std::string args = text.substr(open + 1, text.size() - open - 2);
  std::vector<std::string> parts;
  std::stringstream ss(args);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (name == "fixed") return OffspringDist::fixed(std::stoi(parts.at(0)));
  if (name == "binomial")
    return OffspringDist::binomial(std::stoi(parts.at(0)), std::stod(parts.at(1)));
  if (name == "poissonpos") return OffspringDist::poisson_positive(std::stod(parts.at(0)));
  if (name == "pmf") {
    std::size_t max_k = 0;
    std::vector<std::pair<std::size_t, double>> entries;
    for (const std::string& e : parts) {
      std::size_t colon = e.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("pmf entries must be k:prob");
      std::size_t k = std::stoull(e.substr(0, colon));
      entries.emplace_back(k, std::stod(e.substr(colon + 1)));
      max_k = std::max(max_k, k);
    }
    std::vector<double> pmf(max_k + 1, 0.0);
    for (auto& [k, prob] : entries) pmf[k] += prob;
    return OffspringDist::explicit_pmf(std::move(pmf));
  }
  throw std::invalid_argument("offspring: unknown kind '" + name + "'");
}

inline MarkLaw parse_mark_law(const std::string& text) {
  std::size_t open = text.find('(');
  if (open == std::string::npos || text.back() != ')')
    throw std::invalid_argument("mark law: cannot parse '" + text + "'");
  std::string name = text.substr(0, open);
  std::string args = text.substr(open + 1, text.size() - open - 2);
  std::vector<std::string> parts;
  std::stringstream ss(args);
  std::string part;
  while (std::getline(ss, part, ',')) parts.push_back(part);
  if (name == "uniform") return MarkLaw::uniform(std::stod(parts.at(0)), std::stod(parts.at(1)));
  if (name == "const") {
    MarkLaw law = MarkLaw::constant(std::stod(parts.at(0)));
    law.validate();
    return law;
  }
  if (name == "twopoint") {
    MarkLaw law;
    law.values.clear();
    law.probs.clear();
    for (const std::string& e : parts) {
      std::size_t colon = e.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("twopoint entries must be q:prob");
      law.values.push_back(std::stod(e.substr(0, colon)));
      law.probs.push_back(std::stod(e.substr(colon + 1)));
    }
    law.validate();
    return law;
  }
  throw std::invalid_argument("mark law: unknown kind '" + name + "'");
}

inline Grouping parse_grouping(const std::string& text) {
  if (text == "none" || text.empty()) return Grouping::None;
  if (text == "qsign") return Grouping::QSign;
  if (text == "s") return Grouping::SFlag;
  if (text == "tag") return Grouping::Tag;
  throw std::invalid_argument("group_by: unknown rule '" + text + "'");
}

inline SignalModel build_signal_model(const ExperimentConfig& cfg) {
  SignalModel model = SignalModel::plain(parse_media_law(cfg.media));
  if (!cfg.exposure.empty()) parse_exposure_map(model, cfg.exposure);
  return model;
}

// Apply one key = value assignment; unknown keys raise.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
  if (key == "mode") cfg.mode = value;
  else if (key == "figure") cfg.figure = value;
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "out") cfg.out_dir = value;
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "replicas") cfg.replicas = std::stoull(value);
  else if (key == "epsilon") cfg.epsilon = std::stod(value);
  else if (key == "c") cfg.c = std::stod(value);
  else if (key == "d") cfg.d = std::stod(value);
  else if (key == "n") cfg.n = std::stoull(value);
  else if (key == "p") cfg.p = std::stod(value);
  else if (key == "n_bots") cfg.n_bots = std::stoull(value);
  else if (key == "p_bot") cfg.p_bot = std::stod(value);
  else if (key == "bot_q") cfg.bot_q = std::stod(value);
  else if (key == "offspring") cfg.offspring = value;
  else if (key == "horizon") cfg.horizon = std::stoi(value);
  else if (key == "samples") cfg.samples = std::stoull(value);
  else if (key == "horizons") {
    cfg.horizons.clear();
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) cfg.horizons.push_back(std::stoi(part));
  } else if (key == "q_law") cfg.q_law = value;
  else if (key == "media") cfg.media = value;
  else if (key == "exposure") cfg.exposure = value;
  else if (key == "group_by") cfg.group_by = value;
  else if (key == "bins") cfg.bins = std::stoull(value);
  else if (key == "trajectory") cfg.trajectory = (value == "1" || value == "true");
  else if (key == "trajectory_steps") cfg.trajectory_steps = std::stoull(value);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::size_t last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[' && line.back() == ']') continue;  // cosmetic section header
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": expected key = value");
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    try {
      apply_config_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// Returns the list of violations (empty means valid).
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.c < 0.0 || cfg.c >= 1.0) errors.push_back("c: must lie in [0,1)");
  if (cfg.d == 0.0)
    errors.push_back("d: d=0 is rejected; stationarity of the update requires d > 0");
  else if (cfg.d < 0.0 || cfg.d > 1.0) errors.push_back("d: must lie in (0,1]");
  if (cfg.c + cfg.d > 1.0 + 1e-12) errors.push_back("c+d: c + d must not exceed 1");
  if (cfg.replicas < 1) errors.push_back("replicas: must be >= 1");
  if (!(cfg.epsilon > 0.0)) errors.push_back("epsilon: must be positive");
  if (cfg.bins < 1) errors.push_back("bins: must be >= 1");
  if (cfg.horizon < 0) errors.push_back("horizon: must be >= 0");
  static const std::vector<std::string> modes{"simulate",       "tree-sample",
                                             "tree-analytic",  "finite-horizon",
                                             "memory-compare", "reproduce"};
  if (std::find(modes.begin(), modes.end(), cfg.mode) == modes.end())
    errors.push_back("mode: unknown mode '" + cfg.mode + "'");
  try {
    SignalModel model = build_signal_model(cfg);
    (void)model;
  } catch (const std::exception& e) {
    errors.push_back(std::string("media/exposure: ") + e.what());
  }
  try {
    parse_mark_law(cfg.q_law);
  } catch (const std::exception& e) {
    errors.push_back(std::string("q_law: ") + e.what());
  }
  try {
    parse_offspring(cfg.offspring);
  } catch (const std::exception& e) {
    errors.push_back(std::string("offspring: ") + e.what());
  }
  try {
    parse_grouping(cfg.group_by);
  } catch (const std::exception& e) {
    errors.push_back(std::string("group_by: ") + e.what());
  }
  return errors;
}

}  // namespace opinion
