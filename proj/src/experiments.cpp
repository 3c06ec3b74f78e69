#include "dwb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dwb::experiments {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinSeparationRad = 2.0 * kPi / 180.0;
constexpr double kHalfPowerDb = 3.0102999566398120;

Eigen::MatrixXcd random_unit_symbols(const signal::QamConstellation& unit, Rng& rng,
                                     int rows, int cols) {
  Eigen::MatrixXcd x(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) x(i, j) = unit.random_symbol(rng);
  }
  return x;
}

void append_row(std::ostream& out, const TrialRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.12g,%.12g,%.12g,%.12g,%d,%llu\n",
                r.trial_id, r.n_t, r.n_c, r.n_e, r.snr_db, r.dwb_power_w,
                r.dwb_relaxed_power_w, r.nulling_power_w, r.errors,
                static_cast<unsigned long long>(r.seed));
  out << buf;
}

struct MeanCi {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci95 = std::numeric_limits<double>::quiet_NaN();
};

MeanCi mean_ci(const std::vector<double>& values) {
  MeanCi out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / double(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(sq / double(values.size() - 1));
    out.ci95 = 1.96 * sd / std::sqrt(double(values.size()));
  } else {
    out.ci95 = 0.0;
  }
  return out;
}

}  // namespace

ArrayResponse array_response(const Eigen::MatrixXcd& tx_signal,
                             const signal::ArrayGeometry& geometry,
                             const std::vector<double>& angle_grid_rad) {
  if (tx_signal.size() == 0 || tx_signal.norm() == 0.0) {
    throw DomainError("array response of an all-zero transmit signal");
  }
  if (angle_grid_rad.empty()) throw DomainError("empty angle grid");
  const Eigen::VectorXcd first_col = tx_signal.col(0);
  ArrayResponse resp;
  resp.angles_rad = angle_grid_rad;
  resp.magnitude_db.resize(angle_grid_rad.size());
  double peak = 0.0;
  std::vector<double> mags(angle_grid_rad.size());
  for (std::size_t i = 0; i < angle_grid_rad.size(); ++i) {
    const Eigen::VectorXcd a = signal::steering_vector(geometry, angle_grid_rad[i]);
    // The pattern the array actually emits toward theta: a(theta)^T S[:,0],
    // the same functional the beamforming equalities constrain.
    mags[i] = std::abs(first_col.conjugate().dot(a));
    peak = std::max(peak, mags[i]);
  }
  if (peak == 0.0) throw DomainError("array response is identically zero on the grid");
  for (std::size_t i = 0; i < mags.size(); ++i) {
    resp.magnitude_db[i] =
        std::max(20.0 * std::log10(std::max(mags[i], 1e-300) / peak), -300.0);
  }
  return resp;
}

double psl_db(const ArrayResponse& response) {
  const auto& db = response.magnitude_db;
  const std::size_t n = db.size();
  if (n < 3) return std::numeric_limits<double>::infinity();
  const std::size_t peak =
      std::max_element(db.begin(), db.end()) - db.begin();

  // Main lobe = contiguous region around the peak above the half-power line.
  std::size_t lo = peak;
  while (lo > 0 && db[lo - 1] >= db[peak] - kHalfPowerDb) --lo;
  std::size_t hi = peak;
  while (hi + 1 < n && db[hi + 1] >= db[peak] - kHalfPowerDb) ++hi;

  double best_sidelobe = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= lo && i <= hi) continue;
    const bool left_ok = (i == 0) || db[i] >= db[i - 1];
    const bool right_ok = (i + 1 == n) || db[i] >= db[i + 1];
    if (left_ok && right_ok) {
      best_sidelobe = std::max(best_sidelobe, db[i]);
      found = true;
    }
  }
  if (!found) return std::numeric_limits<double>::infinity();
  return db[peak] - best_sidelobe;
}

Topology random_topology(Rng& rng, int n_comm, int n_eve) {
  if (n_comm < 0 || n_eve < 0) throw DomainError("receiver counts must be nonnegative");
  const int total = n_comm + n_eve;
  Topology topo;
  if (total == 0) return topo;

  std::vector<double> angles(total);
  bool placed = false;
  for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
    for (int i = 0; i < total; ++i) angles[i] = rng.uniform() * kPi;
    placed = true;
    for (int i = 0; i < total && placed; ++i) {
      for (int j = i + 1; j < total; ++j) {
        if (std::abs(angles[i] - angles[j]) < kMinSeparationRad) {
          placed = false;
          break;
        }
      }
    }
  }
  if (!placed) {
    throw DomainError(
        "could not draw a topology with 2 degree angular separation after "
        "1000 resamples");
  }
  topo.bearings.comm_angles_rad.assign(angles.begin(), angles.begin() + n_comm);
  topo.bearings.eve_angles_rad.assign(angles.begin() + n_comm, angles.end());
  topo.comm_distances_m.resize(n_comm);
  for (double& d : topo.comm_distances_m) d = rng.uniform(1.0, 100.0);
  topo.eve_distances_m.resize(n_eve);
  for (double& d : topo.eve_distances_m) d = rng.uniform(1.0, 100.0);
  return topo;
}

PowerSweepResult power_sweep(const ScenarioConfig& config) {
  if (!config.sweep) throw ConfigError("power sweep requires a \"sweep\" section");
  const SweepAxes& axes = *config.sweep;
  const signal::QamConstellation unit = signal::QamConstellation::make(config.qam_order);
  const int max_nc = *std::max_element(axes.n_comm.begin(), axes.n_comm.end());
  const int max_ne = *std::max_element(axes.n_eve.begin(), axes.n_eve.end());

  PowerSweepResult result;
  for (int trial = 0; trial < config.n_trials; ++trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    Rng rng(trial_seed);
    // One topology and one comm-symbol draw per trial; sweep points use
    // prefixes so every point sees the same paired scenario.
    const Topology topo = random_topology(rng, max_nc, max_ne);
    const Eigen::MatrixXcd x_comm =
        random_unit_symbols(unit, rng, max_nc, config.grid.n_subcarriers);

    for (int n_t : axes.n_antennas) {
      for (int n_c : axes.n_comm) {
        for (int n_e : axes.n_eve) {
          for (double snr_db : axes.snr_db) {
            TrialRecord rec;
            rec.trial_id = trial;
            rec.n_t = n_t;
            rec.n_c = n_c;
            rec.n_e = n_e;
            rec.snr_db = snr_db;
            rec.seed = trial_seed;

            beam::DwbProblem problem;
            problem.geometry = config.geometry;
            problem.geometry.n_antennas = n_t;
            problem.bearings.comm_angles_rad.assign(
                topo.bearings.comm_angles_rad.begin(),
                topo.bearings.comm_angles_rad.begin() + n_c);
            problem.bearings.eve_angles_rad.assign(
                topo.bearings.eve_angles_rad.begin(),
                topo.bearings.eve_angles_rad.begin() + n_e);
            problem.grid = config.grid;
            problem.constellation = unit;
            problem.spoof = config.spoof;
            problem.comm_symbols = x_comm.topRows(n_c);
            problem.tx_snr_db = snr_db;
            problem.noise_var = config.noise_var;
            problem.symbol_index = 0;
            problem.tol = config.solver.tol;
            problem.max_iter = config.solver.max_iter;
            problem.resolve_after_rounding = config.solver.resolve_after_rounding;

            try {
              const beam::DwbSolution dwb = beam::solve_dwb(problem);
              const beam::NullingSolution nulling = beam::solve_nulling(problem);
              rec.dwb_power_w = dwb.power_w;
              rec.dwb_relaxed_power_w = dwb.relaxed_power_w;
              rec.nulling_power_w = nulling.power_w;
              result.max_comm_residual_rel = std::max(
                  {result.max_comm_residual_rel, dwb.solver_diag.comm_residual_rel,
                   nulling.comm_residual_rel});
              result.max_eve_residual_rel = std::max(
                  result.max_eve_residual_rel, dwb.solver_diag.eve_residual_rel);
            } catch (const RankError&) {
              rec.errors = 1;
            } catch (const SolverError&) {
              rec.errors = 1;
            }
            if (rec.errors != 0) {
              rec.dwb_power_w = std::numeric_limits<double>::quiet_NaN();
              rec.dwb_relaxed_power_w = std::numeric_limits<double>::quiet_NaN();
              rec.nulling_power_w = std::numeric_limits<double>::quiet_NaN();
            }
            result.records.push_back(rec);
          }
        }
      }
    }
  }

  // Per-point summaries in sweep enumeration order.
  for (int n_t : axes.n_antennas) {
    for (int n_c : axes.n_comm) {
      for (int n_e : axes.n_eve) {
        for (double snr_db : axes.snr_db) {
          SweepPointSummary s;
          s.n_t = n_t;
          s.n_c = n_c;
          s.n_e = n_e;
          s.snr_db = snr_db;
          std::vector<double> dwb, relaxed, nulling;
          for (const TrialRecord& r : result.records) {
            if (r.n_t == n_t && r.n_c == n_c && r.n_e == n_e &&
                r.snr_db == snr_db && r.errors == 0) {
              dwb.push_back(r.dwb_power_w);
              relaxed.push_back(r.dwb_relaxed_power_w);
              nulling.push_back(r.nulling_power_w);
            }
          }
          const MeanCi a = mean_ci(dwb);
          const MeanCi b = mean_ci(relaxed);
          const MeanCi c = mean_ci(nulling);
          s.mean_dwb_power_w = a.mean;
          s.ci95_dwb_power_w = a.ci95;
          s.mean_dwb_relaxed_power_w = b.mean;
          s.ci95_dwb_relaxed_power_w = b.ci95;
          s.mean_nulling_power_w = c.mean;
          s.ci95_nulling_power_w = c.ci95;
          s.n_ok = static_cast<int>(dwb.size());
          result.summary.push_back(s);
        }
      }
    }
  }
  return result;
}

void write_power_sweep_csv(const PowerSweepResult& result, std::ostream& out) {
  out << "trial_id,n_t,n_c,n_e,snr_db,dwb_power_w,dwb_relaxed_power_w,"
         "nulling_power_w,errors,seed\n";
  for (const TrialRecord& r : result.records) append_row(out, r);
}

void write_power_sweep_summary_csv(const PowerSweepResult& result, std::ostream& out) {
  out << "n_t,n_c,n_e,snr_db,mean_dwb_power_w,ci95_dwb_power_w,"
         "mean_dwb_relaxed_power_w,ci95_dwb_relaxed_power_w,mean_nulling_power_w,"
         "ci95_nulling_power_w,n_ok\n";
  char buf[320];
  for (const SweepPointSummary& s : result.summary) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d\n", s.n_t,
                  s.n_c, s.n_e, s.snr_db, s.mean_dwb_power_w, s.ci95_dwb_power_w,
                  s.mean_dwb_relaxed_power_w, s.ci95_dwb_relaxed_power_w,
                  s.mean_nulling_power_w, s.ci95_nulling_power_w, s.n_ok);
    out << buf;
  }
}

DeceptionReport deception_demo(const ScenarioConfig& config) {
  if (!config.bearings) throw ConfigError("deception demo requires fixed bearings");
  const signal::Bearings& bearings = *config.bearings;
  if (bearings.n_comm() < 1 || bearings.n_eve() < 1) {
    throw ConfigError("deception demo needs at least one comm receiver and one "
                      "eavesdropper");
  }
  const signal::OfdmGrid& grid = config.grid;
  const signal::QamConstellation unit = signal::QamConstellation::make(config.qam_order);
  const double p_s = beam::power_per_symbol(config.tx_snr_db, config.noise_var);
  const signal::QamConstellation scaled = unit.with_power(p_s);

  signal::ChannelRealization eve_channel;
  eve_channel.path_gain = config.channel.path_gain;
  eve_channel.range_m = config.channel.range_m;
  eve_channel.velocity_mps = config.channel.velocity_mps;
  eve_channel.noise_var = config.channel.noise_var;

  // The comm receivers only need to demonstrate undistorted data delivery;
  // they see an identity channel at the same noise level.
  signal::ChannelRealization comm_channel;
  comm_channel.taps = {1.0};
  comm_channel.noise_var = config.channel.noise_var;

  DeceptionReport report;
  report.true_range_m = config.channel.range_m;
  report.true_doppler_hz = eve_channel.doppler_hz(grid);
  report.fake_range_m = config.channel.range_m + config.spoof.fake_range_m;
  report.fake_doppler_hz = report.true_doppler_hz + config.spoof.fake_doppler_hz;

  const double eve_bearing = bearings.eve_angles_rad.front();
  const Eigen::VectorXcd a_eve = signal::steering_vector(config.geometry, eve_bearing);

  std::vector<Eigen::VectorXcd> fd_symbols;
  fd_symbols.reserve(grid.n_symbols);
  Eigen::MatrixXcd known_symbols(grid.n_subcarriers, grid.n_symbols);
  long legit_errors = 0;
  long legit_total = 0;

  for (int m = 0; m < grid.n_symbols; ++m) {
    Rng sym_rng(derive_seed(config.seed, 1000 + m));
    beam::DwbProblem problem;
    problem.geometry = config.geometry;
    problem.bearings = bearings;
    problem.grid = grid;
    problem.constellation = unit;
    problem.spoof = config.spoof;
    problem.comm_symbols =
        random_unit_symbols(unit, sym_rng, bearings.n_comm(), grid.n_subcarriers);
    problem.tx_snr_db = config.tx_snr_db;
    problem.noise_var = config.noise_var;
    problem.symbol_index = m;
    problem.tol = config.solver.tol;
    problem.max_iter = config.solver.max_iter;
    problem.resolve_after_rounding = config.solver.resolve_after_rounding;

    const beam::DwbSolution sol = beam::solve_dwb(problem);
    report.max_comm_residual_rel =
        std::max(report.max_comm_residual_rel, sol.solver_diag.comm_residual_rel);
    report.max_eve_residual_rel =
        std::max(report.max_eve_residual_rel, sol.solver_diag.eve_residual_rel);

    const Eigen::VectorXcd y = signal::simulate_rx(
        sol.tx_signal, a_eve, eve_channel, grid, m, derive_seed(config.seed, 2000 + m));
    fd_symbols.push_back(signal::ofdm_demod(y));
    known_symbols.col(m) = sol.deceptive_symbols_rounded.row(0).transpose();

    // Legitimate receivers: genie-equalized identity channel, decisions must
    // reproduce the scaled comm constellation points.
    const Eigen::MatrixXcd x_scaled =
        beam::scale_comm_symbols(problem.comm_symbols, p_s);
    for (int i = 0; i < bearings.n_comm(); ++i) {
      const Eigen::VectorXcd a_c =
          signal::steering_vector(config.geometry, bearings.comm_angles_rad[i]);
      const Eigen::VectorXcd y_c =
          signal::simulate_rx(sol.tx_signal, a_c, comm_channel, grid, m,
                              derive_seed(config.seed, 3000 + 100 * m + i));
      const Eigen::VectorXcd fd = signal::ofdm_demod(y_c);
      for (int l = 0; l < grid.n_subcarriers; ++l) {
        const signal::Complex decided = signal::qam_nearest(fd(l), scaled);
        if (std::abs(decided - x_scaled(i, l)) > 1e-9 * std::sqrt(p_s)) {
          ++legit_errors;
        }
        ++legit_total;
      }
    }
  }

  const radar::RxFrame frame = radar::collect_frame(grid, fd_symbols);
  const Eigen::MatrixXcd z_known =
      radar::remove_symbols(frame, radar::SymbolKnowledge::known(known_symbols));
  report.known_map =
      radar::range_doppler_map(z_known, grid, config.radar.pad_range,
                               config.radar.pad_doppler);
  report.known_peak = radar::find_peak(report.known_map);

  const Eigen::MatrixXcd z_blind = radar::remove_symbols(
      frame, radar::SymbolKnowledge::blind(scaled, radar::Equalization::kPhaseOnly));
  report.blind_map =
      radar::range_doppler_map(z_blind, grid, config.radar.pad_range,
                               config.radar.pad_doppler);
  report.blind_peak = radar::find_peak(report.blind_map);

  report.known_range_err_m = report.known_peak.range_m - report.fake_range_m;
  report.known_doppler_err_hz = report.known_peak.doppler_hz - report.fake_doppler_hz;
  report.blind_range_err_m = report.blind_peak.range_m - report.fake_range_m;
  report.blind_doppler_err_hz = report.blind_peak.doppler_hz - report.fake_doppler_hz;
  report.legit_symbol_error_rate =
      legit_total > 0 ? double(legit_errors) / double(legit_total) : 0.0;
  return report;
}

}  // namespace dwb::experiments
