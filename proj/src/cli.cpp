#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dwb/experiments.hpp"
#include "svg_plot.hpp"

namespace dwb::experiments {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;
constexpr double kRadToDeg = 180.0 / kPi;

struct CliOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> trials;
  bool quiet = false;
};

ScenarioConfig load_with_overrides(const CliOptions& opts) {
  ScenarioConfig config = load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.out_dir) config.output_dir = *opts.out_dir;
  if (opts.trials) {
    if (*opts.trials < 1) throw ConfigError("--trials must be >= 1");
    config.n_trials = *opts.trials;
  }
  return config;
}

fs::path ensure_out_dir(const ScenarioConfig& config) {
  fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

json complex_matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

// Shared solve used by array-response and solve: one DWB and one nulling
// instance on the configured bearings with seeded comm symbols.
struct PairedSolution {
  beam::DwbSolution dwb;
  beam::NullingSolution nulling;
};

PairedSolution solve_configured(const ScenarioConfig& config) {
  if (!config.bearings) throw ConfigError("this subcommand requires fixed bearings");
  const signal::QamConstellation unit = signal::QamConstellation::make(config.qam_order);
  Rng rng(derive_seed(config.seed, 0));

  beam::DwbProblem problem;
  problem.geometry = config.geometry;
  problem.bearings = *config.bearings;
  problem.grid = config.grid;
  problem.constellation = unit;
  problem.spoof = config.spoof;
  problem.comm_symbols.resize(config.bearings->n_comm(), config.grid.n_subcarriers);
  for (Eigen::Index i = 0; i < problem.comm_symbols.rows(); ++i) {
    for (Eigen::Index j = 0; j < problem.comm_symbols.cols(); ++j) {
      problem.comm_symbols(i, j) = unit.random_symbol(rng);
    }
  }
  problem.tx_snr_db = config.tx_snr_db;
  problem.noise_var = config.noise_var;
  problem.symbol_index = 0;
  problem.tol = config.solver.tol;
  problem.max_iter = config.solver.max_iter;
  problem.resolve_after_rounding = config.solver.resolve_after_rounding;

  PairedSolution out;
  out.dwb = beam::solve_dwb(problem);
  out.nulling = beam::solve_nulling(problem);
  return out;
}

int run_array_response(const CliOptions& opts) {
  const ScenarioConfig config = load_with_overrides(opts);
  const fs::path dir = ensure_out_dir(config);
  const PairedSolution sol = solve_configured(config);

  std::vector<double> grid_rad;
  for (double deg = 0.0; deg <= 180.0 + 1e-9; deg += 0.05) {
    grid_rad.push_back(std::min(deg / kRadToDeg, kPi));
  }
  const ArrayResponse dwb = array_response(sol.dwb.tx_signal, config.geometry, grid_rad);
  const ArrayResponse nul =
      array_response(sol.nulling.tx_signal, config.geometry, grid_rad);

  auto csv = open_out(dir / "array_response.csv");
  csv << "angle_deg,magnitude_db,scheme\n";
  char buf[96];
  for (std::size_t i = 0; i < grid_rad.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,dwb\n", grid_rad[i] * kRadToDeg,
                  dwb.magnitude_db[i]);
    csv << buf;
  }
  for (std::size_t i = 0; i < grid_rad.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,nulling\n", grid_rad[i] * kRadToDeg,
                  nul.magnitude_db[i]);
    csv << buf;
  }

  std::vector<double> deg(grid_rad.size());
  for (std::size_t i = 0; i < grid_rad.size(); ++i) deg[i] = grid_rad[i] * kRadToDeg;
  plot::write_line_plot((dir / "array_response.svg").string(),
                        "Array response (first tx column)", "bearing [deg]",
                        "magnitude [dB]",
                        {{"dwb", deg, dwb.magnitude_db},
                         {"nulling", deg, nul.magnitude_db}});

  if (!opts.quiet) {
    std::printf("array response written to %s\n", (dir / "array_response.csv").c_str());
    std::printf("psl_db dwb=%.3f nulling=%.3f\n", psl_db(dwb), psl_db(nul));
    std::printf("power_w dwb=%.6g nulling=%.6g\n", sol.dwb.power_w,
                sol.nulling.power_w);
  }
  return 0;
}

int run_power_sweep(const CliOptions& opts) {
  const ScenarioConfig config = load_with_overrides(opts);
  const fs::path dir = ensure_out_dir(config);
  const PowerSweepResult result = power_sweep(config);

  {
    auto out = open_out(dir / "power_sweep.csv");
    write_power_sweep_csv(result, out);
  }
  {
    auto out = open_out(dir / "power_sweep_summary.csv");
    write_power_sweep_summary_csv(result, out);
  }

  // Mean power against the swept axis, one curve pair per fixed combination.
  const SweepAxes& axes = *config.sweep;
  auto varying = [](std::size_t n) { return n > 1; };
  std::string x_label = "eavesdroppers";
  std::vector<plot::Series> series;
  auto key_of = [&](const SweepPointSummary& s) {
    char k[96];
    if (varying(axes.n_eve.size()) || !varying(axes.n_antennas.size())) {
      std::snprintf(k, sizeof(k), "n_t=%d n_c=%d snr=%g", s.n_t, s.n_c, s.snr_db);
    } else {
      std::snprintf(k, sizeof(k), "n_c=%d n_e=%d snr=%g", s.n_c, s.n_e, s.snr_db);
    }
    return std::string(k);
  };
  auto x_of = [&](const SweepPointSummary& s) {
    if (varying(axes.n_eve.size())) return double(s.n_e);
    if (varying(axes.n_antennas.size())) return double(s.n_t);
    if (varying(axes.snr_db.size())) return s.snr_db;
    return double(s.n_c);
  };
  if (!varying(axes.n_eve.size())) {
    if (varying(axes.n_antennas.size())) x_label = "antennas";
    else if (varying(axes.snr_db.size())) x_label = "tx SNR [dB]";
    else x_label = "comm receivers";
  }
  auto series_named = [&series](const std::string& name) -> plot::Series& {
    for (auto& s : series) {
      if (s.name == name) return s;
    }
    series.push_back({name, {}, {}});
    return series.back();
  };
  for (const char* scheme : {"dwb", "nulling"}) {
    const bool is_dwb = scheme == std::string("dwb");
    for (const SweepPointSummary& s : result.summary) {
      plot::Series& ser = series_named(std::string(scheme) + " " + key_of(s));
      ser.x.push_back(x_of(s));
      ser.y.push_back(is_dwb ? s.mean_dwb_power_w : s.mean_nulling_power_w);
    }
  }
  plot::write_line_plot((dir / "power_sweep.svg").string(), "Mean transmit power",
                        x_label, "power [W]", series);

  if (!opts.quiet) {
    std::printf("power sweep written to %s (%zu rows)\n",
                (dir / "power_sweep.csv").c_str(), result.records.size());
    for (const SweepPointSummary& s : result.summary) {
      std::printf("n_t=%d n_c=%d n_e=%d snr=%g: dwb=%.4f nulling=%.4f (n=%d)\n",
                  s.n_t, s.n_c, s.n_e, s.snr_db, s.mean_dwb_power_w,
                  s.mean_nulling_power_w, s.n_ok);
    }
  }
  return 0;
}

int run_deceive(const CliOptions& opts) {
  const ScenarioConfig config = load_with_overrides(opts);
  const fs::path dir = ensure_out_dir(config);
  const DeceptionReport report = deception_demo(config);

  radar::write_map_csv(report.known_map, (dir / "range_doppler_known.csv").string());
  radar::write_map_csv(report.blind_map, (dir / "range_doppler_blind.csv").string());

  json j;
  j["true_range_m"] = report.true_range_m;
  j["true_doppler_hz"] = report.true_doppler_hz;
  j["fake_range_m"] = report.fake_range_m;
  j["fake_doppler_hz"] = report.fake_doppler_hz;
  j["known"] = {{"range_m", report.known_peak.range_m},
                {"doppler_hz", report.known_peak.doppler_hz},
                {"peak_to_floor_db", report.known_peak.peak_to_floor_db},
                {"range_err_m", report.known_range_err_m},
                {"doppler_err_hz", report.known_doppler_err_hz}};
  j["blind"] = {{"range_m", report.blind_peak.range_m},
                {"doppler_hz", report.blind_peak.doppler_hz},
                {"peak_to_floor_db", report.blind_peak.peak_to_floor_db},
                {"range_err_m", report.blind_range_err_m},
                {"doppler_err_hz", report.blind_doppler_err_hz}};
  j["legit_symbol_error_rate"] = report.legit_symbol_error_rate;
  j["max_comm_residual_rel"] = report.max_comm_residual_rel;
  j["max_eve_residual_rel"] = report.max_eve_residual_rel;
  auto out = open_out(dir / "deception_report.json");
  out << j.dump(2) << "\n";

  if (!opts.quiet) {
    const bool use_blind = config.radar.knowledge == "blind";
    const radar::PeakEstimate& peak = use_blind ? report.blind_peak : report.known_peak;
    std::printf("true (R, f_D)      = (%.3f m, %.3f Hz)\n", report.true_range_m,
                report.true_doppler_hz);
    std::printf("spoofed target     = (%.3f m, %.3f Hz)\n", report.fake_range_m,
                report.fake_doppler_hz);
    std::printf("estimated (%s) = (%.3f m, %.3f Hz)\n",
                use_blind ? "blind" : "known", peak.range_m, peak.doppler_hz);
    std::printf("legit symbol error rate = %.6g\n", report.legit_symbol_error_rate);
  }
  return 0;
}

int run_solve(const CliOptions& opts) {
  const ScenarioConfig config = load_with_overrides(opts);
  const fs::path dir = ensure_out_dir(config);
  const PairedSolution sol = solve_configured(config);

  json j;
  j["tx_signal"] = complex_matrix_json(sol.dwb.tx_signal);
  j["deceptive_symbols_relaxed"] = complex_matrix_json(sol.dwb.deceptive_symbols_relaxed);
  j["deceptive_symbols_rounded"] = complex_matrix_json(sol.dwb.deceptive_symbols_rounded);
  j["power_w"] = sol.dwb.power_w;
  j["relaxed_power_w"] = sol.dwb.relaxed_power_w;
  j["nulling_power_w"] = sol.nulling.power_w;
  j["diagnostics"] = {{"iterations", sol.dwb.solver_diag.iterations},
                      {"converged", sol.dwb.solver_diag.converged},
                      {"qp_equality_residual", sol.dwb.solver_diag.qp_equality_residual},
                      {"comm_residual_rel", sol.dwb.solver_diag.comm_residual_rel},
                      {"eve_residual_rel", sol.dwb.solver_diag.eve_residual_rel}};
  auto out = open_out(dir / "solution.json");
  out << j.dump(2) << "\n";

  if (!opts.quiet) {
    std::printf("solution written to %s\n", (dir / "solution.json").c_str());
    std::printf("power_w dwb=%.6g (relaxed %.6g) nulling=%.6g\n", sol.dwb.power_w,
                sol.dwb.relaxed_power_w, sol.nulling.power_w);
  }
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Deceptive wireless beamforming simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOptions opts;
  app.add_option("--config", opts.config_path, "Scenario JSON file")->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Override the config seed");
  std::string out_dir_value;
  auto* out_opt = app.add_option("--out-dir", out_dir_value, "Override the output directory");
  int trials_value = 0;
  auto* trials_opt = app.add_option("--trials", trials_value, "Override the trial count");
  app.add_flag("--quiet", opts.quiet, "Suppress progress output");

  auto* cmd_array = app.add_subcommand("array-response",
                                       "Beampatterns and PSL for DWB and nulling");
  auto* cmd_sweep = app.add_subcommand("power-sweep",
                                       "Paired DWB/nulling power comparison");
  auto* cmd_deceive = app.add_subcommand("deceive",
                                         "End-to-end range/Doppler deception demo");
  auto* cmd_solve = app.add_subcommand("solve", "Single-instance solve dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << std::flush;
    return 2;
  }
  if (*seed_opt) opts.seed = seed_value;
  if (*out_opt) opts.out_dir = out_dir_value;
  if (*trials_opt) opts.trials = trials_value;

  try {
    if (cmd_array->parsed()) return run_array_response(opts);
    if (cmd_sweep->parsed()) return run_power_sweep(opts);
    if (cmd_deceive->parsed()) return run_deceive(opts);
    if (cmd_solve->parsed()) return run_solve(opts);
    std::cerr << app.help() << std::flush;
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RankError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace dwb::experiments
