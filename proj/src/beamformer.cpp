#include "dwb/beamformer.hpp"

#include <algorithm>
#include <cmath>

namespace dwb::beam {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

struct ProblemMatrices {
  MatrixXcd a_comm;   // N_c x N_T
  MatrixXcd a_eve;    // N_e x N_T
  MatrixXcd d_comm;   // N_c x L, scaled time-domain comm targets
  double p_s = 0.0;
};

ProblemMatrices assemble(const DwbProblem& problem) {
  problem.geometry.validate();
  problem.bearings.validate();
  problem.grid.validate();
  const int n_c = problem.bearings.n_comm();
  const int n_e = problem.bearings.n_eve();
  if (problem.geometry.n_antennas <= n_c + n_e) {
    throw DomainError(
        "under-determined system required: n_antennas must exceed the total "
        "receiver count");
  }
  if (problem.comm_symbols.rows() != n_c ||
      problem.comm_symbols.cols() != problem.grid.n_subcarriers) {
    throw DomainError("comm_symbols must be N_c x L");
  }

  ProblemMatrices m;
  m.p_s = power_per_symbol(problem.tx_snr_db, problem.noise_var);
  m.a_comm = signal::steering_matrix(problem.geometry, problem.bearings.comm_angles_rad);
  m.a_eve = signal::steering_matrix(problem.geometry, problem.bearings.eve_angles_rad);

  const MatrixXcd x_scaled = scale_comm_symbols(problem.comm_symbols, m.p_s);
  const MatrixXcd fh = signal::idft_matrix(problem.grid.n_subcarriers);
  m.d_comm = (fh * x_scaled.transpose()).transpose();
  return m;
}

// Rank gate on the stacked steering matrix, reported as a bearing conflict.
void check_bearing_rank(const MatrixXcd& a_comm, const MatrixXcd& a_eve) {
  MatrixXcd stacked(a_comm.rows() + a_eve.rows(), a_comm.cols());
  stacked << a_comm, a_eve;
  const Eigen::VectorXd sv = stacked.jacobiSvd().singularValues();
  if (sv.size() > 0 && !(sv(sv.size() - 1) > 1e-10 * sv(0))) {
    throw RankError(
        "bearing conflict: combined steering matrix is numerically "
        "rank-deficient (near-duplicate bearings)",
        sv(0) / std::max(sv(sv.size() - 1), 1e-300));
  }
}

double relative_residual(const MatrixXcd& lhs, const MatrixXcd& sol,
                         const MatrixXcd& target) {
  const double denom = std::max(target.norm(), 1e-300);
  return (lhs * sol - target).norm() / denom;
}

}  // namespace

double power_per_symbol(double tx_snr_db, double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("noise_var must be positive");
  return std::pow(10.0, tx_snr_db / 10.0) * noise_var;
}

Eigen::MatrixXcd scale_comm_symbols(const Eigen::MatrixXcd& symbols, double p_s) {
  if (!(p_s > 0.0)) throw DomainError("symbol power must be positive");
  return std::sqrt(p_s) * symbols;
}

double tx_power(const Eigen::MatrixXcd& tx_signal) {
  return tx_signal.squaredNorm();
}

double tx_snr_toward(const Eigen::MatrixXcd& tx_signal,
                     const signal::ArrayGeometry& geometry, double angle_rad,
                     double noise_var) {
  if (!(noise_var > 0.0)) throw DomainError("noise_var must be positive");
  const VectorXcd a = signal::steering_vector(geometry, angle_rad);
  return (tx_signal.transpose() * a).squaredNorm() / noise_var;
}

DwbSolution solve_dwb(const DwbProblem& problem) {
  const ProblemMatrices m = assemble(problem);
  const int n_t = problem.geometry.n_antennas;
  const int n_c = problem.bearings.n_comm();
  const int n_e = problem.bearings.n_eve();
  const int n_sub = problem.grid.n_subcarriers;
  check_bearing_rank(m.a_comm, m.a_eve);

  DwbSolution sol;
  if (n_e == 0) {
    // No deceptive block: plain least-norm multicast beamforming.
    sol.tx_signal = qp::least_norm_solve(m.a_comm, m.d_comm);
    sol.deceptive_symbols_relaxed.resize(0, n_sub);
    sol.deceptive_symbols_rounded.resize(0, n_sub);
    sol.power_w = tx_power(sol.tx_signal);
    sol.relaxed_power_w = sol.power_w;
    sol.solver_diag.comm_residual_rel =
        relative_residual(m.a_comm, sol.tx_signal, m.d_comm);
    return sol;
  }

  // The eavesdropper constraint reads A_e S = X_e U with the unitary
  // U = diag(spoof) F^H. Substituting S = S_t U decouples the QP by
  // subcarrier while leaving the objective norm and the box untouched:
  //   min sum_l ||S_t[:,l]||^2
  //   s.t. A_c S_t[:,l] = (D_c U^H)[:,l],  A_e S_t[:,l] = X_e[:,l],
  //        |Re/Im X_e| <= sqrt(P_s).
  const VectorXcd spoof =
      signal::spoof_matrix_diag(problem.grid, problem.spoof, problem.symbol_index);
  const MatrixXcd fh = signal::idft_matrix(n_sub);
  const MatrixXcd u_mat = spoof.asDiagonal() * fh;
  const MatrixXcd d_comm_t = m.d_comm * u_mat.adjoint();

  MatrixXcd eq_complex(n_c + n_e, n_t + n_e);
  eq_complex.setZero();
  eq_complex.topLeftCorner(n_c, n_t) = m.a_comm;
  eq_complex.block(n_c, 0, n_e, n_t) = m.a_eve;
  eq_complex.block(n_c, n_t, n_e, n_e) = -MatrixXcd::Identity(n_e, n_e);
  const Eigen::MatrixXd eq_real = qp::lift_matrix(eq_complex);

  qp::BoxQp column_qp;
  column_qp.dim_free = 2 * n_t;
  column_qp.dim_boxed = 2 * n_e;
  column_qp.box_bound = std::sqrt(m.p_s);
  // Reorder the lifted columns so the real/imag parts of S_t come first.
  const int n_vars = n_t + n_e;
  Eigen::MatrixXd reordered(eq_real.rows(), eq_real.cols());
  reordered.leftCols(n_t) = eq_real.middleCols(0, n_t);
  reordered.middleCols(n_t, n_t) = eq_real.middleCols(n_vars, n_t);
  reordered.middleCols(2 * n_t, n_e) = eq_real.middleCols(n_t, n_e);
  reordered.rightCols(n_e) = eq_real.middleCols(n_vars + n_t, n_e);
  column_qp.equality_lhs = reordered;

  MatrixXcd s_transformed(n_t, n_sub);
  MatrixXcd x_e_relaxed(n_e, n_sub);
  double relaxed_power = 0.0;
  SolveDiagnostics diag;
  for (int l = 0; l < n_sub; ++l) {
    Eigen::VectorXd rhs(2 * (n_c + n_e));
    VectorXcd rhs_c = VectorXcd::Zero(n_c + n_e);
    rhs_c.head(n_c) = d_comm_t.col(l);
    rhs.head(n_c + n_e) = rhs_c.real();
    rhs.tail(n_c + n_e) = rhs_c.imag();
    column_qp.equality_rhs = rhs;

    const qp::QpSolution qs =
        qp::solve_box_qp(column_qp, problem.tol, problem.max_iter);
    for (int k = 0; k < n_t; ++k) {
      s_transformed(k, l) = {qs.free_block(k), qs.free_block(n_t + k)};
    }
    for (int k = 0; k < n_e; ++k) {
      x_e_relaxed(k, l) = {qs.boxed_block(k), qs.boxed_block(n_e + k)};
    }
    relaxed_power += qs.objective;
    diag.iterations = std::max(diag.iterations, qs.iterations);
    diag.converged = diag.converged && qs.converged;
    diag.qp_equality_residual =
        std::max(diag.qp_equality_residual, qs.equality_residual);
  }

  const signal::QamConstellation scaled =
      problem.constellation.with_power(m.p_s);
  MatrixXcd x_e_rounded(n_e, n_sub);
  for (int i = 0; i < n_e; ++i) {
    for (int l = 0; l < n_sub; ++l) {
      x_e_rounded(i, l) = signal::qam_nearest(x_e_relaxed(i, l), scaled);
    }
  }

  MatrixXcd tx;
  const MatrixXcd d_eve_rounded = signal::deceptive_time_signal(
      problem.grid, problem.spoof, x_e_rounded, problem.symbol_index);
  if (problem.resolve_after_rounding) {
    MatrixXcd a_full(n_c + n_e, n_t);
    a_full << m.a_comm, m.a_eve;
    MatrixXcd targets(n_c + n_e, n_sub);
    targets << m.d_comm, d_eve_rounded;
    tx = qp::least_norm_solve(a_full, targets);
  } else {
    tx = s_transformed * u_mat;
  }

  sol.tx_signal = tx;
  sol.deceptive_symbols_relaxed = x_e_relaxed;
  sol.deceptive_symbols_rounded = x_e_rounded;
  sol.power_w = tx_power(tx);
  sol.relaxed_power_w = relaxed_power;
  sol.solver_diag = diag;
  sol.solver_diag.comm_residual_rel = relative_residual(m.a_comm, tx, m.d_comm);
  const MatrixXcd d_eve_emitted =
      problem.resolve_after_rounding
          ? d_eve_rounded
          : signal::deceptive_time_signal(problem.grid, problem.spoof,
                                          x_e_relaxed, problem.symbol_index);
  sol.solver_diag.eve_residual_rel = relative_residual(m.a_eve, tx, d_eve_emitted);
  return sol;
}

NullingSolution solve_nulling(const DwbProblem& problem) {
  const ProblemMatrices m = assemble(problem);
  const int n_e = problem.bearings.n_eve();
  const int n_sub = problem.grid.n_subcarriers;
  check_bearing_rank(m.a_comm, m.a_eve);

  MatrixXcd a_full(n_e + m.a_comm.rows(), problem.geometry.n_antennas);
  a_full << m.a_eve, m.a_comm;
  MatrixXcd targets = MatrixXcd::Zero(a_full.rows(), n_sub);
  targets.bottomRows(m.a_comm.rows()) = m.d_comm;

  NullingSolution sol;
  sol.tx_signal = qp::least_norm_solve(a_full, targets);
  sol.power_w = tx_power(sol.tx_signal);
  sol.comm_residual_rel = relative_residual(m.a_comm, sol.tx_signal, m.d_comm);
  return sol;
}

}  // namespace dwb::beam
