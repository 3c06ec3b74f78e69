#pragma once

#include <Eigen/Dense>

#include "dwb/qp_core.hpp"
#include "dwb/signal_model.hpp"

namespace dwb::beam {

// One deceptive-beamforming instance for a single OFDM symbol index.
// comm_symbols holds the unit-energy QAM points X_c (N_c x L); the per-symbol
// power P_s derived from (tx_snr_db, noise_var) scales them and bounds the
// eavesdropper symbols.
struct DwbProblem {
  signal::ArrayGeometry geometry;
  signal::Bearings bearings;
  signal::OfdmGrid grid;
  signal::QamConstellation constellation = signal::QamConstellation::make(4);
  signal::SpoofProfile spoof;
  Eigen::MatrixXcd comm_symbols;
  double tx_snr_db = 10.0;
  double noise_var = 1.0;
  int symbol_index = 0;

  double tol = 1e-8;
  int max_iter = 5000;
  // When false, the relaxed tx signal is emitted as-is and the eavesdropper
  // constraint holds for the relaxed (not the rounded) symbols.
  bool resolve_after_rounding = true;
};

struct SolveDiagnostics {
  int iterations = 0;              // worst column
  bool converged = true;           // all columns
  double qp_equality_residual = 0.0;
  double comm_residual_rel = 0.0;  // ||A_c S - D_c||_F / ||D_c||_F
  double eve_residual_rel = 0.0;   // same for the emitted eavesdropper targets
};

struct DwbSolution {
  Eigen::MatrixXcd tx_signal;                  // S, N_T x L
  Eigen::MatrixXcd deceptive_symbols_relaxed;  // N_e x L
  Eigen::MatrixXcd deceptive_symbols_rounded;  // N_e x L constellation points
  double power_w = 0.0;          // ||S||_F^2 of the emitted signal
  double relaxed_power_w = 0.0;  // objective of the relaxed QP
  SolveDiagnostics solver_diag;
};

struct NullingSolution {
  Eigen::MatrixXcd tx_signal;
  double power_w = 0.0;
  double comm_residual_rel = 0.0;
};

// P_s = 10^(snr_db/10) * sigma^2.
double power_per_symbol(double tx_snr_db, double noise_var);

// Multiplies unit-energy symbols by sqrt(P_s).
Eigen::MatrixXcd scale_comm_symbols(const Eigen::MatrixXcd& symbols, double p_s);

// Relaxed per-subcarrier box QP, QAM rounding, then a least-norm re-solve
// with the rounded targets so the emitted signal meets both constraints
// exactly. Requires N_T > N_c + N_e.
DwbSolution solve_dwb(const DwbProblem& problem);

// Benchmark: least-norm transmit signal with zeros forced toward the
// eavesdropper bearings.
NullingSolution solve_nulling(const DwbProblem& problem);

// ||S||_F^2.
double tx_power(const Eigen::MatrixXcd& tx_signal);

// ||S^T a(theta)||^2 / sigma^2.
double tx_snr_toward(const Eigen::MatrixXcd& tx_signal,
                     const signal::ArrayGeometry& geometry, double angle_rad,
                     double noise_var);

}  // namespace dwb::beam
