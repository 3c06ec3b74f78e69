#pragma once

#include <Eigen/Dense>

#include "dwb/errors.hpp"

namespace dwb::qp {

// Under-determined complex system A S = D, one least-norm solve per target
// column. A is N x K with N <= K and full row rank.
struct LeastNormProblem {
  Eigen::MatrixXcd constraint_matrix;
  Eigen::MatrixXcd targets;
};

// Real lift of a complex linear system A z = b.
struct RealSystem {
  Eigen::MatrixXd lhs;
  Eigen::MatrixXd rhs;
};

// [[Re A, -Im A], [Im A, Re A]] [Re z; Im z] = [Re b; Im b].
RealSystem lift_to_real(const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs);
Eigen::MatrixXd lift_matrix(const Eigen::MatrixXcd& m);
// Stacked [Re; Im] solution back to complex.
Eigen::MatrixXcd unlift(const Eigen::MatrixXd& stacked);

// Minimum-Frobenius-norm solution A^H (A A^H)^{-1} D. Throws RankError when
// the smallest singular value of A falls below 1e-10 of the largest, the
// signature of near-duplicate bearings upstream.
Eigen::MatrixXcd least_norm_solve(const LeastNormProblem& problem);
Eigen::MatrixXcd least_norm_solve(const Eigen::MatrixXcd& constraint_matrix,
                                  const Eigen::MatrixXcd& targets);

// min ||u_free||^2  s.t.  E [u_free; u_boxed] = g,  |u_boxed| <= box_bound.
// The objective penalizes only the free block; the box applies only to the
// boxed block.
struct BoxQp {
  int dim_free = 0;
  int dim_boxed = 0;
  Eigen::MatrixXd equality_lhs;   // me x (dim_free + dim_boxed)
  Eigen::VectorXd equality_rhs;   // me
  double box_bound = 1.0;
};

struct QpSolution {
  Eigen::VectorXd free_block;
  Eigen::VectorXd boxed_block;   // inside the box exactly
  double objective = 0.0;        // squared norm of the free block
  double equality_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Direct KKT solve first; if the boxed block violates the box, refine with a
// projected ADMM until primal/dual residuals reach tol or max_iter is hit.
QpSolution solve_box_qp(const BoxQp& problem, double tol = 1e-8, int max_iter = 5000);

struct KktResidual {
  double stationarity = 0.0;
  double primal = 0.0;
  double box_violation = 0.0;
};

// Diagnostic KKT residual norms at a candidate solution; equality multipliers
// are recovered by least squares from the free-block stationarity rows.
KktResidual kkt_residual(const BoxQp& problem, const QpSolution& solution);

}  // namespace dwb::qp
