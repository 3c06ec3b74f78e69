#include "dwb/qp_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dwb::qp {

namespace {

// KKT matrix for min ||s||^2 + (rho/2)||x - v||^2 s.t. E [s; x] = g.
// rho = 0 gives the plain unboxed system.
Eigen::MatrixXd kkt_matrix(const BoxQp& p, double rho) {
  const int ns = p.dim_free;
  const int nx = p.dim_boxed;
  const int n = ns + nx;
  const int me = static_cast<int>(p.equality_lhs.rows());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n + me, n + me);
  k.topLeftCorner(ns, ns) = 2.0 * Eigen::MatrixXd::Identity(ns, ns);
  if (nx > 0) {
    k.block(ns, ns, nx, nx) = rho * Eigen::MatrixXd::Identity(nx, nx);
  }
  k.block(0, n, n, me) = p.equality_lhs.transpose();
  k.block(n, 0, me, n) = p.equality_lhs;
  return k;
}

void validate(const BoxQp& p) {
  if (p.dim_free < 0 || p.dim_boxed < 0) throw DomainError("negative block size");
  const int n = p.dim_free + p.dim_boxed;
  if (p.equality_lhs.cols() != n) {
    throw DomainError("equality matrix has " + std::to_string(p.equality_lhs.cols()) +
                      " columns, expected " + std::to_string(n));
  }
  if (p.equality_lhs.rows() != p.equality_rhs.size()) {
    throw DomainError("equality rhs size does not match the row count");
  }
  if (p.dim_boxed > 0 && !(p.box_bound > 0.0)) {
    throw DomainError("box bound must be positive");
  }
}

double honest_residual(const BoxQp& p, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& x) {
  if (p.equality_lhs.rows() == 0) return 0.0;
  Eigen::VectorXd u(s.size() + x.size());
  u << s, x;
  return (p.equality_lhs * u - p.equality_rhs).norm();
}

}  // namespace

Eigen::MatrixXd lift_matrix(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXd out(2 * m.rows(), 2 * m.cols());
  out.topLeftCorner(m.rows(), m.cols()) = m.real();
  out.topRightCorner(m.rows(), m.cols()) = -m.imag();
  out.bottomLeftCorner(m.rows(), m.cols()) = m.imag();
  out.bottomRightCorner(m.rows(), m.cols()) = m.real();
  return out;
}

RealSystem lift_to_real(const Eigen::MatrixXcd& lhs, const Eigen::MatrixXcd& rhs) {
  if (lhs.rows() != rhs.rows()) throw DomainError("lhs/rhs row mismatch");
  RealSystem sys;
  sys.lhs = lift_matrix(lhs);
  sys.rhs.resize(2 * rhs.rows(), rhs.cols());
  sys.rhs.topRows(rhs.rows()) = rhs.real();
  sys.rhs.bottomRows(rhs.rows()) = rhs.imag();
  return sys;
}

Eigen::MatrixXcd unlift(const Eigen::MatrixXd& stacked) {
  if (stacked.rows() % 2 != 0) throw DomainError("stacked matrix needs even rows");
  const Eigen::Index k = stacked.rows() / 2;
  Eigen::MatrixXcd z(k, stacked.cols());
  z.real() = stacked.topRows(k);
  z.imag() = stacked.bottomRows(k);
  return z;
}

Eigen::MatrixXcd least_norm_solve(const Eigen::MatrixXcd& constraint_matrix,
                                  const Eigen::MatrixXcd& targets) {
  return least_norm_solve(LeastNormProblem{constraint_matrix, targets});
}

Eigen::MatrixXcd least_norm_solve(const LeastNormProblem& problem) {
  const Eigen::MatrixXcd& a = problem.constraint_matrix;
  const Eigen::MatrixXcd& d = problem.targets;
  if (a.rows() != d.rows()) throw DomainError("constraint/target row mismatch");
  if (a.rows() > a.cols()) {
    throw DomainError("least-norm system must be under-determined (N <= K)");
  }
  if (a.rows() == 0) {
    return Eigen::MatrixXcd::Zero(a.cols(), d.cols());
  }

  // Rank gate from the Gram spectrum (squared singular values of A).
  const Eigen::MatrixXcd gram = a * a.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
  if (es.info() != Eigen::Success) {
    throw SolverError("eigendecomposition of the Gram matrix failed");
  }
  const Eigen::VectorXd evals = es.eigenvalues().cwiseMax(0.0);
  const double sigma_max = std::sqrt(evals.maxCoeff());
  const double sigma_min = std::sqrt(evals.minCoeff());
  if (!(sigma_min > 1e-10 * sigma_max) || sigma_max == 0.0) {
    throw RankError(
        "constraint matrix is numerically rank-deficient (near-duplicate "
        "bearings produce linearly dependent steering rows)",
        sigma_max > 0.0 ? sigma_max / std::max(sigma_min, 1e-300) : 0.0);
  }

  // A^H = Q R gives the range-space solution S = Q R^{-H} D with the
  // conditioning of A rather than of A A^H; one refinement pass mops up the
  // residual on badly conditioned bearing sets.
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a.adjoint());
  const Eigen::MatrixXcd q =
      qr.householderQ() * Eigen::MatrixXcd::Identity(a.cols(), a.rows());
  const Eigen::MatrixXcd r =
      qr.matrixQR().topRows(a.rows()).triangularView<Eigen::Upper>();
  const auto solve_once = [&](const Eigen::MatrixXcd& rhs) -> Eigen::MatrixXcd {
    return q * r.adjoint().triangularView<Eigen::Lower>().solve(rhs);
  };
  Eigen::MatrixXcd s = solve_once(d);
  s += solve_once(d - a * s);
  return s;
}

QpSolution solve_box_qp(const BoxQp& problem, double tol, int max_iter) {
  validate(problem);
  const int ns = problem.dim_free;
  const int nx = problem.dim_boxed;
  const int n = ns + nx;
  const int me = static_cast<int>(problem.equality_lhs.rows());
  const double b = problem.box_bound;

  QpSolution sol;
  if (me == 0) {
    sol.free_block = Eigen::VectorXd::Zero(ns);
    sol.boxed_block = Eigen::VectorXd::Zero(nx);
    sol.converged = true;
    return sol;
  }

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + me);
  rhs.tail(me) = problem.equality_rhs;

  // Unboxed KKT solve; with the boxed block unpenalized the matrix is
  // singular exactly when the equalities are rank-deficient or the boxed
  // columns fail to pin the boxed block. One refinement pass keeps the
  // solution accurate on badly conditioned bearing sets.
  const Eigen::MatrixXd k0 = kkt_matrix(problem, 0.0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu0(k0);
  if (!lu0.isInvertible()) {
    throw SolverError(
        "KKT system is singular: equality constraints are infeasible or "
        "rank-deficient");
  }
  Eigen::VectorXd full = lu0.solve(rhs);
  full += lu0.solve(rhs - k0 * full);
  Eigen::VectorXd u = full.head(n);
  Eigen::VectorXd s = u.head(ns);
  Eigen::VectorXd x = u.tail(nx);

  if (nx == 0 || x.lpNorm<Eigen::Infinity>() <= b * (1.0 + 1e-12)) {
    sol.free_block = s;
    sol.boxed_block = x.cwiseMax(-b).cwiseMin(b);
    sol.objective = s.squaredNorm();
    sol.equality_residual = honest_residual(problem, s, sol.boxed_block);
    sol.converged = true;
    return sol;
  }

  // Projected ADMM refinement on the split x = z, z in the box.
  double rho = 1.0;
  Eigen::VectorXd z = x.cwiseMax(-b).cwiseMin(b);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(nx);
  Eigen::MatrixXd k_rho = kkt_matrix(problem, rho);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(k_rho);
  bool converged = false;
  int iter = 0;
  const double sqrt_nx = std::sqrt(double(nx));
  while (iter < max_iter) {
    ++iter;
    rhs.segment(ns, nx) = rho * (z - w);
    full = lu.solve(rhs);
    full += lu.solve(rhs - k_rho * full);
    u = full.head(n);
    s = u.head(ns);
    x = u.tail(nx);
    const Eigen::VectorXd z_old = z;
    z = (x + w).cwiseMax(-b).cwiseMin(b);
    w += x - z;
    const double r_primal = (x - z).norm();
    const double r_dual = rho * (z - z_old).norm();
    const double eps_primal =
        sqrt_nx * tol + tol * std::max(x.norm(), z.norm());
    const double eps_dual = sqrt_nx * tol + tol * (rho * w.norm());
    if (r_primal <= eps_primal && r_dual <= eps_dual) {
      converged = true;
      break;
    }
    if (iter % 10 == 0) {
      if (r_primal > 10.0 * r_dual) {
        rho *= 10.0;
        w /= 10.0;
        k_rho = kkt_matrix(problem, rho);
        lu.compute(k_rho);
      } else if (r_dual > 10.0 * r_primal) {
        rho /= 10.0;
        w *= 10.0;
        k_rho = kkt_matrix(problem, rho);
        lu.compute(k_rho);
      }
    }
  }

  sol.free_block = s;
  sol.boxed_block = z;
  sol.objective = s.squaredNorm();
  sol.equality_residual = honest_residual(problem, s, z);
  sol.iterations = iter;
  sol.converged = converged;
  return sol;
}

KktResidual kkt_residual(const BoxQp& problem, const QpSolution& solution) {
  validate(problem);
  const int ns = problem.dim_free;
  const int nx = problem.dim_boxed;
  const int me = static_cast<int>(problem.equality_lhs.rows());
  const double b = problem.box_bound;
  const Eigen::VectorXd& s = solution.free_block;
  const Eigen::VectorXd& x = solution.boxed_block;

  KktResidual r;
  r.primal = honest_residual(problem, s, x);
  if (nx > 0) {
    r.box_violation = (x.cwiseAbs().array() - b).max(0.0).matrix().norm();
  }
  if (me == 0) {
    r.stationarity = 2.0 * s.norm();
    return r;
  }

  const Eigen::MatrixXd es_t = problem.equality_lhs.leftCols(ns).transpose();
  const Eigen::MatrixXd ex_t = problem.equality_lhs.rightCols(nx).transpose();
  const double active_tol = 1e-8 * std::max(1.0, b);
  std::vector<int> inactive;
  for (int i = 0; i < nx; ++i) {
    if (std::abs(x(i)) < b - active_tol) inactive.push_back(i);
  }

  // Multipliers from least squares on the rows without an unknown box
  // multiplier: E_s^T nu = -2 s, and (E_x^T nu)_i = 0 for inactive i.
  Eigen::MatrixXd a_ls(ns + inactive.size(), me);
  Eigen::VectorXd b_ls = Eigen::VectorXd::Zero(ns + inactive.size());
  a_ls.topRows(ns) = es_t;
  b_ls.head(ns) = -2.0 * s;
  for (std::size_t k = 0; k < inactive.size(); ++k) {
    a_ls.row(ns + k) = ex_t.row(inactive[k]);
  }
  const Eigen::VectorXd nu = a_ls.colPivHouseholderQr().solve(b_ls);

  double sq = (es_t * nu + 2.0 * s).squaredNorm();
  if (nx > 0) {
    const Eigen::VectorXd mu = -(ex_t * nu);
    for (int i = 0; i < nx; ++i) {
      const bool upper = x(i) >= b - active_tol;
      const bool lower = x(i) <= -b + active_tol;
      if (upper) {
        sq += std::min(mu(i), 0.0) * std::min(mu(i), 0.0);
      } else if (lower) {
        sq += std::max(mu(i), 0.0) * std::max(mu(i), 0.0);
      } else {
        sq += mu(i) * mu(i);
      }
    }
  }
  r.stationarity = std::sqrt(sq);
  return r;
}

}  // namespace dwb::qp
