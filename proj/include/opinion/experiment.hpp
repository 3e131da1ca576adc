#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "opinion/analytics.hpp"
#include "opinion/config.hpp"
#include "opinion/dynamics.hpp"
#include "opinion/metrics.hpp"

// End-to-end experiment driver: named presets (fig1..fig7), CSV/SVG output
// writers, and the mode dispatch used by the command-line tool.

namespace opinion {

// fig4/fig7 calibration: with exposure Z | q>0 ~ -1 + 2 Beta(8,1) we have
// E[Z | q>0] = 7/9, and the stationary group mean is d * E[Z | q>0].  The
// media weight below makes that gap equal +-0.3684; c takes the rest (c+d=1,
// i.e. no self-memory in the update).
inline constexpr double kCalibratedD = 0.3684 * 9.0 / 7.0;
inline constexpr double kCalibratedC = 1.0 - kCalibratedD;

inline void apply_preset(ExperimentConfig& cfg, const std::string& fig) {
  cfg.figure = fig;
  cfg.mode = "reproduce";
  cfg.n = 1000;
  cfg.p = 0.03;
  cfg.bins = 40;
  if (fig == "fig1") {
    cfg.c = 0.05;
    cfg.d = 0.95;
    cfg.q_law = "uniform(-1,1)";
    cfg.media = "uniform(-0.03,0.03)";
    cfg.replicas = 5;
  } else if (fig == "fig2") {
    cfg.c = 0.95;
    cfg.d = 0.05;
    cfg.q_law = "uniform(-1,1)";
    cfg.media = "twopoint(-1:0.5,1:0.5)";
    cfg.replicas = 5;
  } else if (fig == "fig3") {
    cfg.c = 0.95;
    cfg.d = 0.05;
    cfg.q_law = "uniform(-1,1)";
    cfg.media = "betashift(1,8)";
    cfg.replicas = 5;
  } else if (fig == "fig4") {
    cfg.c = kCalibratedC;
    cfg.d = kCalibratedD;
    cfg.q_law = "twopoint(-1:0.5,1:0.5)";
    cfg.media = "uniform(-1,1)";
    cfg.exposure = "{ \"q>0\": betashift(8,1), \"q<=0\": betashift(1,8) }";
    cfg.group_by = "qsign";
    cfg.replicas = 20;
  } else if (fig == "fig5" || fig == "fig6") {
    cfg.c = 0.5;
    cfg.d = 0.25;
    cfg.q_law = "uniform(-1,1)";
    cfg.media = "uniform(-1,1)";
    cfg.replicas = 5;
    if (fig == "fig6") {
      cfg.trajectory = true;
      cfg.trajectory_steps = 60;
      cfg.replicas = 1;
    }
  } else if (fig == "fig7") {
    cfg.c = kCalibratedC;
    cfg.d = kCalibratedD;
    cfg.n = 800;
    cfg.n_bots = 200;
    cfg.p_bot = 0.03;
    cfg.bot_q = 1.0;
    cfg.q_law = "twopoint(-1:0.5,1:0.5)";
    cfg.media = "uniform(-1,1)";
    cfg.exposure =
        "{ \"s=1\": const(1), \"q>0\": betashift(8,1), \"q<=0\": betashift(1,8) }";
    cfg.group_by = "s";
    cfg.replicas = 20;
  } else {
    throw std::invalid_argument("apply_preset: unknown figure '" + fig + "'");
  }
}

// ---------------------------------------------------------------------------
// Output writers

namespace io {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  return out;
}

inline void write_opinions_csv(const std::string& path, const DirectedGraph& g,
                               const std::vector<double>& values) {
  std::ofstream out = open_out(path);
  out << "vertex_id,q,s,in_degree,opinion\n";
  for (std::size_t v = 0; v < g.n; ++v)
    out << v << ',' << g.attrs[v].q << ',' << g.attrs[v].s << ',' << g.in_degree(v) << ','
        << values[v] << '\n';
}

inline void write_histogram_csv(const std::string& path, const Histogram& h) {
  std::ofstream out = open_out(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b)
    out << h.bin_lo(b) << ',' << h.bin_hi(b) << ',' << h.counts[b] << '\n';
}

inline void write_summary_csv(const std::string& path, const GroupedSummary& s) {
  std::ofstream out = open_out(path);
  out << "group,count,mean,variance\n";
  for (const auto& g : s.groups)
    out << g.key << ',' << g.count << ',' << g.mean << ',' << g.variance << '\n';
}

struct TrajectoryRow {
  std::uint64_t step;
  std::size_t vertex;
  double opinion;
};

inline void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRow>& rows) {
  std::ofstream out = open_out(path);
  out << "step,vertex_id,opinion\n";
  for (const TrajectoryRow& r : rows) out << r.step << ',' << r.vertex << ',' << r.opinion << '\n';
}

struct MomentRow {
  std::string quantity;
  std::string group;
  double value = 0.0;
  double stderr_value = -1.0;  // negative means "na"
  std::string method;
};

inline void write_moments_csv(const std::string& path, const std::vector<MomentRow>& rows) {
  std::ofstream out = open_out(path);
  out << "quantity,group,value,stderr_or_na,method\n";
  for (const MomentRow& r : rows) {
    out << r.quantity << ',' << r.group << ',' << r.value << ',';
    if (r.stderr_value >= 0.0)
      out << r.stderr_value;
    else
      out << "na";
    out << ',' << r.method << '\n';
  }
}

inline void write_histogram_svg(const std::string& path, const Histogram& h) {
  const int width = 640, height = 360, margin = 40;
  std::ofstream out = open_out(path);
  std::uint64_t peak = 1;
  for (std::uint64_t c : h.counts) peak = std::max(peak, c);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  double plot_w = width - 2.0 * margin, plot_h = height - 2.0 * margin;
  double bar_w = plot_w / static_cast<double>(h.counts.size());
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    double frac = static_cast<double>(h.counts[b]) / static_cast<double>(peak);
    double bh = frac * plot_h;
    out << "<rect x=\"" << margin + bar_w * static_cast<double>(b) << "\" y=\""
        << margin + plot_h - bh << "\" width=\"" << bar_w * 0.9 << "\" height=\"" << bh
        << "\" fill=\"steelblue\"/>\n";
  }
  out << "<line x1=\"" << margin << "\" y1=\"" << margin + plot_h << "\" x2=\"" << width - margin
      << "\" y2=\"" << margin + plot_h << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - 10 << "\" font-size=\"12\">" << h.lo
      << "</text>\n";
  out << "<text x=\"" << width - margin - 20 << "\" y=\"" << height - 10 << "\" font-size=\"12\">"
      << h.hi << "</text>\n";
  out << "<text x=\"5\" y=\"" << margin << "\" font-size=\"12\">" << peak << "</text>\n";
  out << "</svg>\n";
}

inline void write_manifest(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out = open_out(path);
  for (const std::string& line : lines) out << line << '\n';
}

}  // namespace io

// ---------------------------------------------------------------------------
// Replica threading

// Runs fn(r) for r = 0..count-1 on up to `threads` workers.  Each replica
// writes only its own preallocated slot, so the result is thread-count
// independent.
template <class Fn>
inline void parallel_replicas(std::size_t count, int threads, Fn&& fn) {
  int workers = std::max(1, threads);
  if (workers == 1 || count <= 1) {
    for (std::size_t r = 0; r < count; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      while (true) {
        std::size_t r = next.fetch_add(1);
        if (r >= count) return;
        try {
          fn(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Mode implementations

namespace detail {

inline std::vector<std::string> config_manifest_lines(const ExperimentConfig& cfg) {
  std::vector<std::string> lines;
  auto num = [](double x) {
    std::ostringstream ss;
    ss.precision(17);
    ss << x;
    return ss.str();
  };
  lines.push_back("mode=" + cfg.mode);
  if (!cfg.figure.empty()) lines.push_back("figure=" + cfg.figure);
  lines.push_back("seed=" + std::to_string(cfg.seed));
  lines.push_back("c=" + num(cfg.c));
  lines.push_back("d=" + num(cfg.d));
  lines.push_back("n=" + std::to_string(cfg.n));
  lines.push_back("p=" + num(cfg.p));
  if (cfg.n_bots > 0) {
    lines.push_back("n_bots=" + std::to_string(cfg.n_bots));
    lines.push_back("p_bot=" + num(cfg.p_bot));
    lines.push_back("bot_q=" + num(cfg.bot_q));
  }
  lines.push_back("replicas=" + std::to_string(cfg.replicas));
  lines.push_back("epsilon=" + num(cfg.epsilon));
  lines.push_back("q_law=" + cfg.q_law);
  lines.push_back("media=" + cfg.media);
  if (!cfg.exposure.empty()) lines.push_back("exposure=" + cfg.exposure);
  lines.push_back("group_by=" + cfg.group_by);
  if (cfg.figure == "fig4" || cfg.figure == "fig7")
    lines.push_back(
        "calibration: d = 0.3684 * 9/7 so that d * E[Z | q>0] = 0.3684 under the "
        "-1 + 2*Beta(8,1) exposure law (E[Z | q>0] = 7/9); c = 1 - d");
  return lines;
}

inline GWTreeSpec tree_spec_from_config(const ExperimentConfig& cfg) {
  GWTreeSpec spec;
  spec.offspring = parse_offspring(cfg.offspring);
  spec.mark_law = parse_mark_law(cfg.q_law);
  spec.c = cfg.c;
  spec.d = cfg.d;
  spec.validate();
  return spec;
}

}  // namespace detail

struct SimulationOutput {
  DirectedGraph graph0;              // replica 0, written to opinions.csv
  std::vector<double> values0;       // replica 0 final opinions
  std::vector<double> pooled;        // all replicas concatenated
  std::vector<std::string> pooled_keys;
  std::vector<io::TrajectoryRow> traj;  // replica 0, when enabled
  std::uint64_t k_used = 0;
};

// Graph simulation: `replicas` independent graphs and signal histories, run to
// epsilon-stationarity (or for trajectory_steps when recording trajectories).
inline SimulationOutput simulate_replicas(const ExperimentConfig& cfg) {
  MarkLaw mark_law = parse_mark_law(cfg.q_law);
  SignalModel model = build_signal_model(cfg);
  Grouping grouping = parse_grouping(cfg.group_by);
  MasterSeed master{cfg.seed};
  std::uint64_t k = cfg.trajectory ? cfg.trajectory_steps : steps_for_tolerance(cfg.d, cfg.epsilon);

  struct ReplicaOut {
    std::vector<double> values;
    std::vector<std::string> keys;
    std::vector<io::TrajectoryRow> traj;
  };
  std::vector<ReplicaOut> slots(cfg.replicas);
  DirectedGraph graph0;

  parallel_replicas(cfg.replicas, cfg.threads, [&](std::size_t r) {
    DirectedGraph g = generate_er_directed(cfg.n, cfg.p, cfg.c, cfg.d, mark_law, master, r);
    if (cfg.n_bots > 0) g = overlay_bots(g, cfg.n_bots, cfg.p_bot, cfg.bot_q, master, r);
    g = assign_equal_weights(g);
    std::uint64_t offset = (r + 1) << 40;
    OpinionState init = rademacher_state(g, master, offset);
    ReplicaOut& slot = slots[r];
    if (cfg.trajectory && g.n >= 2) {
      // Two tracked vertices start from opposite extremes.
      init.values[0] = -1.0;
      init.values[1] = 1.0;
      std::vector<double> ws = detail::weight_sums(g);
      slot.traj.push_back({0, 0, init.values[0]});
      slot.traj.push_back({0, 1, init.values[1]});
      OpinionState state = std::move(init);
      for (std::uint64_t t = 0; t < k; ++t) {
        step(g, state, model, master, ws, offset);
        slot.traj.push_back({state.step, 0, state.values[0]});
        slot.traj.push_back({state.step, 1, state.values[1]});
      }
      slot.values = state.values;
    } else {
      slot.values = run(g, model, master, k, std::move(init), {}, offset).final_state.values;
    }
    slot.keys.resize(g.n);
    for (std::size_t v = 0; v < g.n; ++v) slot.keys[v] = group_name(grouping, g.attrs[v]);
    if (r == 0) graph0 = std::move(g);
  });

  SimulationOutput out;
  out.k_used = k;
  out.graph0 = std::move(graph0);
  out.values0 = slots[0].values;
  out.traj = std::move(slots[0].traj);
  for (ReplicaOut& slot : slots) {
    out.pooled.insert(out.pooled.end(), slot.values.begin(), slot.values.end());
    out.pooled_keys.insert(out.pooled_keys.end(), slot.keys.begin(), slot.keys.end());
  }
  return out;
}

inline void run_simulate(const ExperimentConfig& cfg, const std::string& suffix = "") {
  SimulationOutput sim = simulate_replicas(cfg);
  std::uint64_t k = sim.k_used;

  Histogram hist = histogram(sim.pooled, -1.0, 1.0, cfg.bins);
  GroupedSummary summ = grouped_summary(sim.pooled, sim.pooled_keys);

  std::filesystem::create_directories(cfg.out_dir);
  auto path = [&](const std::string& stem, const std::string& ext) {
    return cfg.out_dir + "/" + stem + suffix + ext;
  };
  io::write_opinions_csv(path("opinions", ".csv"), sim.graph0, sim.values0);
  io::write_histogram_csv(path("histogram", ".csv"), hist);
  io::write_histogram_svg(path("histogram", ".svg"), hist);
  io::write_summary_csv(path("summary", ".csv"), summ);
  if (cfg.trajectory) io::write_trajectory_csv(path("trajectory", ".csv"), sim.traj);

  std::vector<io::MomentRow> rows;
  for (const auto& g : summ.groups) {
    double se = g.count > 0 ? std::sqrt(g.variance / static_cast<double>(g.count)) : 0.0;
    rows.push_back({"mean", g.key, g.mean, se, "simulation"});
    rows.push_back({"variance", g.key, g.variance, -1.0, "simulation"});
  }
  rows.push_back({"between_group_variance", "all", summ.between_group_variance, -1.0, "simulation"});
  rows.push_back(
      {"within_group_variance", "all", summ.within_group_mean_variance, -1.0, "simulation"});
  rows.push_back({"total_variance", "all", summ.total_variance, -1.0, "simulation"});

  // Closed-form predictions from the matching limiting-tree model (only when
  // bots are absent and the one-generation statistics admit the closed forms).
  if (cfg.n_bots == 0 && cfg.n >= 2) {
    try {
      GWTreeSpec spec;
      spec.offspring = OffspringDist::binomial(static_cast<int>(cfg.n) - 1, cfg.p);
      spec.mark_law = parse_mark_law(cfg.q_law);
      spec.c = cfg.c;
      spec.d = cfg.d;
      MomentInputs in = moment_inputs(spec, build_signal_model(cfg), MomentMode::Analytic, 0,
                                      MasterSeed{cfg.seed}, parse_grouping(cfg.group_by));
      MomentReport rep = mean_var_no_memory(in);
      rows.push_back({"mean", "all_predicted", rep.mean_root, -1.0, "closed-form"});
      rows.push_back({"variance", "all_predicted", rep.var_root, -1.0, "closed-form"});
      for (const GroupMoments& g : in.groups) {
        MomentReport::Conditional cond = conditional_mean_var(in, g.name);
        rows.push_back({"mean", g.name + "_predicted", cond.mean, -1.0, "closed-form"});
        rows.push_back({"variance", g.name + "_predicted", cond.variance, -1.0, "closed-form"});
      }
    } catch (const std::exception&) {
      // No closed form for this configuration; empirical rows stand alone.
    }
  }
  io::write_moments_csv(path("moments", ".csv"), rows);

  std::vector<std::string> manifest = detail::config_manifest_lines(cfg);
  manifest.push_back("k_used=" + std::to_string(k));
  {
    std::ostringstream ss;
    ss.precision(17);
    ss << "stationarity_bound=" << std::pow(1.0 - cfg.d, static_cast<double>(k)) * (2.0 / cfg.d + 2.0);
    manifest.push_back(ss.str());
  }
  io::write_manifest(path("manifest", ".txt"), manifest);
}

// Monte-carlo sampling of the limiting root opinion via the explicit series.
inline void run_tree_sample(const ExperimentConfig& cfg) {
  GWTreeSpec spec = detail::tree_spec_from_config(cfg);
  SignalModel model = build_signal_model(cfg);
  MasterSeed master{cfg.seed};

  std::vector<double> samples(cfg.samples);
  std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(cfg.samples, 64));
  parallel_replicas(chunks, cfg.threads, [&](std::size_t chunk) {
    for (std::size_t i = chunk; i < cfg.samples; i += chunks)
      samples[i] = series_sample_root(spec, model, cfg.horizon, master, i);
  });

  Summary s = summary(samples);
  std::filesystem::create_directories(cfg.out_dir);
  // Truncated partial sums can spill slightly past [-1,1]; widen if needed.
  Histogram hist = histogram(samples, std::min(-1.0, s.min), std::max(1.0, s.max), cfg.bins);
  io::write_histogram_csv(cfg.out_dir + "/histogram.csv", hist);
  io::write_histogram_svg(cfg.out_dir + "/histogram.svg", hist);
  double n = static_cast<double>(s.count);
  std::vector<io::MomentRow> rows{
      {"mean_root", "all", s.mean, std::sqrt(s.variance / n), "series-sample"},
      {"var_root", "all", s.variance, std::sqrt(2.0 / n) * s.variance, "series-sample"},
  };
  io::write_moments_csv(cfg.out_dir + "/moments.csv", rows);
  std::vector<std::string> manifest = detail::config_manifest_lines(cfg);
  manifest.push_back("horizon=" + std::to_string(cfg.horizon));
  manifest.push_back("samples=" + std::to_string(cfg.samples));
  {
    std::ostringstream ss;
    ss.precision(17);
    ss << "truncation_bound=" << 2.0 * std::pow(1.0 - cfg.d, cfg.horizon + 1) / cfg.d;
    manifest.push_back(ss.str());
  }
  io::write_manifest(cfg.out_dir + "/manifest.txt", manifest);
}

// Closed-form moments of the limiting opinions.
inline void run_tree_analytic(const ExperimentConfig& cfg) {
  GWTreeSpec spec = detail::tree_spec_from_config(cfg);
  SignalModel model = build_signal_model(cfg);
  Grouping grouping = parse_grouping(cfg.group_by);
  MasterSeed master{cfg.seed};

  MomentInputs in;
  std::string method = "closed-form";
  try {
    in = moment_inputs(spec, model, MomentMode::Analytic, 0, master, grouping);
  } catch (const std::exception&) {
    in = moment_inputs(spec, model, MomentMode::MonteCarlo, cfg.samples, master, grouping);
    method = "closed-form/mc-inputs";
  }
  MomentReport rep = mean_var_general(in);
  std::vector<io::MomentRow> rows{
      {"mean_root", "all", rep.mean_root, -1.0, method},
      {"var_root", "all", rep.var_root, -1.0, method},
      {"mean_node", "all", rep.mean_node, -1.0, method},
      {"var_node", "all", rep.var_node, -1.0, method},
  };
  if (grouping != Grouping::None) {
    try {
      for (const GroupMoments& g : in.groups) {
        MomentReport::Conditional cond = conditional_mean_var(in, g.name);
        rows.push_back({"mean_root", g.name, cond.mean, -1.0, method});
        rows.push_back({"var_root", g.name, cond.variance, -1.0, method});
      }
    } catch (const std::exception&) {
      // Conditional closed forms need c + d = 1 and offspring >= 1.
    }
  }
  std::filesystem::create_directories(cfg.out_dir);
  io::write_moments_csv(cfg.out_dir + "/moments.csv", rows);
  io::write_manifest(cfg.out_dir + "/manifest.txt", detail::config_manifest_lines(cfg));
}

// Exact mean/variance after k synchronous updates from zero, for each k.
inline void run_finite_horizon(const ExperimentConfig& cfg) {
  GWTreeSpec spec = detail::tree_spec_from_config(cfg);
  SignalModel model = build_signal_model(cfg);
  MasterSeed master{cfg.seed};
  MomentInputs in;
  std::string method = "finite-horizon";
  try {
    in = moment_inputs(spec, model, MomentMode::Analytic, 0, master);
  } catch (const std::exception&) {
    in = moment_inputs(spec, model, MomentMode::MonteCarlo, cfg.samples, master);
    method = "finite-horizon/mc-inputs";
  }
  std::vector<io::MomentRow> rows;
  for (int k : cfg.horizons) {
    HorizonMoments h = finite_horizon_moments(in, k);
    std::string tag = "k=" + std::to_string(k);
    rows.push_back({"mean_root", tag, h.mean_root, -1.0, method});
    rows.push_back({"var_root", tag, h.var_root, -1.0, method});
    rows.push_back({"mean_node", tag, h.mean_node, -1.0, method});
    rows.push_back({"var_node", tag, h.var_node, -1.0, method});
  }
  std::filesystem::create_directories(cfg.out_dir);
  io::write_moments_csv(cfg.out_dir + "/moments.csv", rows);
  io::write_manifest(cfg.out_dir + "/manifest.txt", detail::config_manifest_lines(cfg));
}

// Variance with self-memory vs the proportionally rescaled memoryless model.
inline void run_memory_compare(const ExperimentConfig& cfg) {
  GWTreeSpec spec = detail::tree_spec_from_config(cfg);
  SignalModel model = build_signal_model(cfg);
  MasterSeed master{cfg.seed};
  MomentInputs in;
  std::string method = "closed-form";
  try {
    in = moment_inputs(spec, model, MomentMode::Analytic, 0, master);
  } catch (const std::exception&) {
    in = moment_inputs(spec, model, MomentMode::MonteCarlo, cfg.samples, master);
    method = "closed-form/mc-inputs";
  }
  MemoryComparison cmp = memory_comparison(in);
  std::vector<io::MomentRow> rows{
      {"var_root_memory", "all", cmp.var_memory, -1.0, method},
      {"var_root_no_memory", "all", cmp.var_no_memory, -1.0, method},
      {"memory_reduces_variance", "all", cmp.inequality_holds ? 1.0 : 0.0, -1.0, method},
  };
  std::filesystem::create_directories(cfg.out_dir);
  io::write_moments_csv(cfg.out_dir + "/moments.csv", rows);
  io::write_manifest(cfg.out_dir + "/manifest.txt", detail::config_manifest_lines(cfg));
}

inline void run_reproduce(const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  apply_preset(cfg, base.figure);
  // Command-line overrides survive the preset.
  cfg.seed = base.seed;
  cfg.out_dir = base.out_dir;
  cfg.threads = base.threads;
  cfg.epsilon = base.epsilon;
  if (cfg.figure == "fig5" || cfg.figure == "fig6") {
    run_simulate(cfg);
    ExperimentConfig nomem = cfg;
    // Memoryless counterpart: rescale (c,d) proportionally so c' + d' = 1.
    double cd = cfg.c + cfg.d;
    nomem.c = cfg.c / cd;
    nomem.d = cfg.d / cd;
    run_simulate(nomem, "_nomemory");
  } else {
    run_simulate(cfg);
  }
}

inline void run_experiment(const ExperimentConfig& cfg) {
  std::vector<std::string> errors = validate_config(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  if (cfg.mode == "simulate") run_simulate(cfg);
  else if (cfg.mode == "tree-sample") run_tree_sample(cfg);
  else if (cfg.mode == "tree-analytic") run_tree_analytic(cfg);
  else if (cfg.mode == "finite-horizon") run_finite_horizon(cfg);
  else if (cfg.mode == "memory-compare") run_memory_compare(cfg);
  else if (cfg.mode == "reproduce") run_reproduce(cfg);
  else throw std::runtime_error("run_experiment: unknown mode '" + cfg.mode + "'");
}

}  // namespace opinion
