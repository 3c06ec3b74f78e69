#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dwb/beamformer.hpp"
#include "dwb/radar.hpp"
#include "dwb/rng.hpp"
#include "dwb/signal_model.hpp"

namespace dwb::experiments {

struct SolverOverrides {
  double tol = 1e-8;
  int max_iter = 5000;
  bool resolve_after_rounding = true;
};

// Cartesian sweep axes for power sweeps; singleton lists pin an axis.
struct SweepAxes {
  std::vector<int> n_antennas;
  std::vector<int> n_comm;
  std::vector<int> n_eve;
  std::vector<double> snr_db;
};

struct ChannelConfig {
  double range_m = 20.0;
  double velocity_mps = 10.0;
  double noise_var = 0.0;  // simulation noise at the eavesdropper
  double path_gain = 1.0;
};

struct RadarConfig {
  int pad_range = 4;
  int pad_doppler = 4;
  std::string knowledge = "known";  // "known" | "blind"
};

// One JSON document drives every subcommand. Angles are degrees in the file
// and radians in memory; unknown keys are rejected.
struct ScenarioConfig {
  signal::ArrayGeometry geometry;
  signal::OfdmGrid grid;
  int qam_order = 64;
  signal::SpoofProfile spoof;
  std::optional<signal::Bearings> bearings;  // fixed-topology subcommands
  std::optional<SweepAxes> sweep;            // power-sweep
  double tx_snr_db = 10.0;
  double noise_var = 1.0;  // design noise power behind the SNR -> P_s mapping
  int n_trials = 100;
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  ChannelConfig channel;
  RadarConfig radar;
  SolverOverrides solver;
};

ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

// |B(theta)| over the grid with B(theta) = (first tx column)^H a(theta),
// peak-normalized to 0 dB.
struct ArrayResponse {
  std::vector<double> angles_rad;
  std::vector<double> magnitude_db;
};

ArrayResponse array_response(const Eigen::MatrixXcd& tx_signal,
                             const signal::ArrayGeometry& geometry,
                             const std::vector<double>& angle_grid_rad);

// Main peak over the largest sidelobe (local maximum outside the main lobe's
// -3 dB region), dB; +inf when the response has a single lobe.
double psl_db(const ArrayResponse& response);

struct Topology {
  signal::Bearings bearings;
  std::vector<double> comm_distances_m;
  std::vector<double> eve_distances_m;
};

// Angles i.i.d. uniform on [0, 180] deg with a 2 deg minimum separation
// enforced by resampling; distances uniform on [1, 100] m.
Topology random_topology(Rng& rng, int n_comm, int n_eve);

struct TrialRecord {
  int trial_id = 0;
  int n_t = 0;
  int n_c = 0;
  int n_e = 0;
  double snr_db = 0.0;
  double dwb_power_w = 0.0;
  double dwb_relaxed_power_w = 0.0;
  double nulling_power_w = 0.0;
  int errors = 0;
  std::uint64_t seed = 0;
};

struct SweepPointSummary {
  int n_t = 0;
  int n_c = 0;
  int n_e = 0;
  double snr_db = 0.0;
  double mean_dwb_power_w = 0.0;
  double ci95_dwb_power_w = 0.0;
  double mean_dwb_relaxed_power_w = 0.0;
  double ci95_dwb_relaxed_power_w = 0.0;
  double mean_nulling_power_w = 0.0;
  double ci95_nulling_power_w = 0.0;
  int n_ok = 0;
};

struct PowerSweepResult {
  std::vector<TrialRecord> records;
  std::vector<SweepPointSummary> summary;
  double max_comm_residual_rel = 0.0;
  double max_eve_residual_rel = 0.0;
};

// Paired DWB/nulling solves on identical topologies and comm symbols; each
// trial keeps its topology across every sweep point.
PowerSweepResult power_sweep(const ScenarioConfig& config);

void write_power_sweep_csv(const PowerSweepResult& result, std::ostream& out);
void write_power_sweep_summary_csv(const PowerSweepResult& result, std::ostream& out);

struct DeceptionReport {
  double true_range_m = 0.0;
  double true_doppler_hz = 0.0;
  double fake_range_m = 0.0;    // R + R_sp
  double fake_doppler_hz = 0.0; // f_D + f_sp
  radar::PeakEstimate known_peak;
  radar::PeakEstimate blind_peak;
  double known_range_err_m = 0.0;
  double known_doppler_err_hz = 0.0;
  double blind_range_err_m = 0.0;
  double blind_doppler_err_hz = 0.0;
  double legit_symbol_error_rate = 0.0;
  double max_comm_residual_rel = 0.0;
  double max_eve_residual_rel = 0.0;
  radar::RangeDopplerMap known_map;
  radar::RangeDopplerMap blind_map;
};

// Full pipeline: per-symbol DWB solves, reception at the first eavesdropper
// bearing, then the estimator in known and blind modes.
DeceptionReport deception_demo(const ScenarioConfig& config);

// `dwb` entry point; exit codes: 0 ok, 2 config, 3 solver, 4 I/O.
int cli_main(int argc, const char* const* argv);

}  // namespace dwb::experiments
