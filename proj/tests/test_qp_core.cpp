#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "dwb/qp_core.hpp"
#include "dwb/rng.hpp"
#include "dwb/signal_model.hpp"

using namespace dwb;
using namespace dwb::qp;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

MatrixXcd random_complex(Rng& rng, int rows, int cols) {
  MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.complex_normal();
  return m;
}

// Independent oracle: SVD pseudoinverse solve.
MatrixXcd pinv_solve(const MatrixXcd& a, const MatrixXcd& d) {
  Eigen::JacobiSVD<MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.solve(d);
}

}  // namespace

TEST_CASE("lift and unlift round trip") {
  // (1+0j) z = 2+3j.
  MatrixXcd a(1, 1);
  a << signal::Complex(1.0, 0.0);
  MatrixXcd b(1, 1);
  b << signal::Complex(2.0, 3.0);
  const RealSystem sys = lift_to_real(a, b);
  CHECK(sys.lhs.rows() == 2);
  const VectorXd z = sys.lhs.colPivHouseholderQr().solve(sys.rhs.col(0));
  CHECK(z(0) == doctest::Approx(2.0));
  CHECK(z(1) == doctest::Approx(3.0));

  // A purely real system lifts to a block-diagonal with zero coupling.
  Rng rng(1);
  MatrixXcd ar = random_complex(rng, 3, 3).real().cast<signal::Complex>();
  const MatrixXd lifted = lift_matrix(ar);
  CHECK(lifted.topRightCorner(3, 3).norm() == 0.0);
  CHECK(lifted.bottomLeftCorner(3, 3).norm() == 0.0);

  // Random 3x5 under-determined system: lifted solution satisfies the
  // original complex equations.
  const MatrixXcd a2 = random_complex(rng, 3, 5);
  const MatrixXcd b2 = random_complex(rng, 3, 1);
  const RealSystem sys2 = lift_to_real(a2, b2);
  const MatrixXd sol2 =
      sys2.lhs.completeOrthogonalDecomposition().solve(sys2.rhs);
  const MatrixXcd z2 = unlift(sol2);
  CHECK((a2 * z2 - b2).norm() < 1e-10);
}

TEST_CASE("least norm solve") {
  Rng rng(2);

  // Square identity.
  const MatrixXcd d = random_complex(rng, 4, 6);
  CHECK((least_norm_solve(MatrixXcd::Identity(4, 4), d) - d).norm() < 1e-12);

  // Single steering row: S = conj(a) d^T / N_T.
  signal::ArrayGeometry g{8, 0.5};
  const VectorXcd a = signal::steering_vector(g, 1.1);
  MatrixXcd a_row(1, 8);
  a_row.row(0) = a.transpose();
  const MatrixXcd d_row = random_complex(rng, 1, 5);
  const MatrixXcd s = least_norm_solve(a_row, d_row);
  const MatrixXcd expected = a.conjugate() * d_row / 8.0;
  CHECK((s - expected).norm() < 1e-12 * expected.norm());
  CHECK(s.squaredNorm() == doctest::Approx(d_row.squaredNorm() / 8.0));

  // Duplicated bearings must fail loudly.
  MatrixXcd dup(2, 8);
  dup.row(0) = a.transpose();
  dup.row(1) = a.transpose();
  CHECK_THROWS_AS(least_norm_solve(dup, random_complex(rng, 2, 3)), RankError);

  // Over-determined shapes are rejected.
  CHECK_THROWS_AS(least_norm_solve(random_complex(rng, 5, 3), random_complex(rng, 5, 1)),
                  DomainError);

  // Zero-row system returns the zero solution.
  CHECK(least_norm_solve(MatrixXcd::Zero(0, 4), MatrixXcd::Zero(0, 2)).norm() == 0.0);
}

TEST_CASE("least norm matches the SVD pseudoinverse oracle") {
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    const int rows = 1 + int(rng.uniform_int(4));
    const int cols = rows + 1 + int(rng.uniform_int(5));
    const MatrixXcd a = random_complex(rng, rows, cols);
    const MatrixXcd d = random_complex(rng, rows, 3);
    const MatrixXcd s = least_norm_solve(a, d);
    const MatrixXcd oracle = pinv_solve(a, d);
    CHECK((s - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
    CHECK((a * s - d).norm() < 1e-9 * d.norm());
  }
}

TEST_CASE("least norm optimality against null-space perturbations") {
  Rng rng(4);
  const MatrixXcd a = random_complex(rng, 3, 7);
  const MatrixXcd d = random_complex(rng, 3, 2);
  const MatrixXcd s = least_norm_solve(a, d);

  Eigen::JacobiSVD<MatrixXcd> svd(a, Eigen::ComputeFullV);
  const MatrixXcd null_basis = svd.matrixV().rightCols(4);
  for (int t = 0; t < 20; ++t) {
    const MatrixXcd coeffs = random_complex(rng, 4, 2);
    const MatrixXcd s_alt = s + null_basis * coeffs;
    CHECK((a * s_alt - d).norm() < 1e-9 * d.norm());
    CHECK(s_alt.norm() >= s.norm() - 1e-12);
  }
}

TEST_CASE("box qp inactive box reduces to the KKT solution") {
  Rng rng(5);
  BoxQp p;
  p.dim_free = 4;
  p.dim_boxed = 2;
  p.box_bound = 1e6;
  p.equality_lhs = MatrixXd::NullaryExpr(3, 6, [&](Eigen::Index, Eigen::Index) {
    return rng.normal();
  });
  p.equality_rhs = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.normal(); });
  const QpSolution sol = solve_box_qp(p, 1e-8, 1000);
  CHECK(sol.converged);
  CHECK(sol.iterations == 0);
  CHECK(sol.equality_residual < 1e-10);

  // Same as the unconstrained optimum computed by hand from the KKT system.
  const int n = 6;
  MatrixXd kkt = MatrixXd::Zero(n + 3, n + 3);
  kkt.topLeftCorner(4, 4) = 2.0 * MatrixXd::Identity(4, 4);
  kkt.block(0, n, n, 3) = p.equality_lhs.transpose();
  kkt.block(n, 0, 3, n) = p.equality_lhs;
  VectorXd rhs = VectorXd::Zero(n + 3);
  rhs.tail(3) = p.equality_rhs;
  const VectorXd direct = kkt.fullPivLu().solve(rhs);
  CHECK((sol.free_block - direct.head(4)).norm() < 1e-8);
  CHECK((sol.boxed_block - direct.segment(4, 2)).norm() < 1e-8);
}

TEST_CASE("box qp with no boxed block equals least norm") {
  Rng rng(6);
  const MatrixXcd a = random_complex(rng, 2, 5);
  const MatrixXcd d = random_complex(rng, 2, 1);
  const RealSystem sys = lift_to_real(a, d);

  BoxQp p;
  p.dim_free = 10;
  p.dim_boxed = 0;
  p.equality_lhs = sys.lhs;
  p.equality_rhs = sys.rhs.col(0);
  const QpSolution sol = solve_box_qp(p);
  CHECK(sol.converged);

  MatrixXd stacked(10, 1);
  stacked.col(0) = sol.free_block;
  const MatrixXcd z = unlift(stacked);
  const MatrixXcd oracle = least_norm_solve(a, d);
  CHECK((z - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
}

TEST_CASE("box qp matches a dense grid oracle") {
  Rng rng(1);  // frozen instance with an active box
  BoxQp p;
  p.dim_free = 4;
  p.dim_boxed = 2;
  p.box_bound = 1.0;
  p.equality_lhs.resize(3, 6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 6; ++j) p.equality_lhs(i, j) = rng.normal();
  p.equality_rhs.resize(3);
  for (int i = 0; i < 3; ++i) p.equality_rhs(i) = 2.0 * rng.normal();

  const QpSolution sol = solve_box_qp(p, 1e-10, 20000);
  CHECK(sol.converged);
  CHECK(sol.boxed_block.lpNorm<Eigen::Infinity>() <= 1.0);
  CHECK(sol.boxed_block.lpNorm<Eigen::Infinity>() ==
        doctest::Approx(1.0).epsilon(1e-9));  // box active on this instance

  // 41 x 41 grid over the box, free block solved in closed form per point.
  const MatrixXd es = p.equality_lhs.leftCols(4);
  const MatrixXd ex = p.equality_lhs.rightCols(2);
  double best = 1e300;
  for (int i = 0; i <= 40; ++i) {
    for (int j = 0; j <= 40; ++j) {
      const Eigen::Vector2d x(-1.0 + i * 0.05, -1.0 + j * 0.05);
      const VectorXd rhs = p.equality_rhs - ex * x;
      const VectorXd s = es.transpose() * (es * es.transpose()).ldlt().solve(rhs);
      best = std::min(best, s.squaredNorm());
    }
  }
  CHECK(std::abs(sol.objective - best) < 1e-3);
}

TEST_CASE("relaxation ordering in the box bound") {
  Rng rng(8);
  BoxQp p;
  p.dim_free = 3;
  p.dim_boxed = 3;
  p.equality_lhs = MatrixXd::NullaryExpr(4, 6, [&](Eigen::Index, Eigen::Index) {
    return rng.normal();
  });
  // Feasible for every bound tested: the rhs comes from a point whose boxed
  // block sits inside the smallest box.
  VectorXd feasible(6);
  for (int i = 0; i < 3; ++i) feasible(i) = rng.normal();
  for (int i = 3; i < 6; ++i) feasible(i) = 0.2 * rng.uniform(-1.0, 1.0);
  p.equality_rhs = p.equality_lhs * feasible;
  double prev = -1.0;
  for (double bound : {4.0, 2.0, 1.0, 0.5, 0.25}) {
    p.box_bound = bound;
    const QpSolution sol = solve_box_qp(p, 1e-10, 20000);
    CHECK(sol.converged);
    CHECK(sol.objective >= prev - 1e-8);  // shrinking the box never helps
    prev = sol.objective;
  }
}

TEST_CASE("box qp determinism") {
  Rng rng(9);
  BoxQp p;
  p.dim_free = 4;
  p.dim_boxed = 2;
  p.box_bound = 0.5;
  p.equality_lhs = MatrixXd::NullaryExpr(3, 6, [&](Eigen::Index, Eigen::Index) {
    return rng.normal();
  });
  p.equality_rhs = VectorXd::NullaryExpr(3, [&](Eigen::Index) { return rng.normal(); });
  const QpSolution a = solve_box_qp(p);
  const QpSolution b = solve_box_qp(p);
  CHECK(std::memcmp(a.free_block.data(), b.free_block.data(),
                    sizeof(double) * a.free_block.size()) == 0);
  CHECK(std::memcmp(a.boxed_block.data(), b.boxed_block.data(),
                    sizeof(double) * a.boxed_block.size()) == 0);
  CHECK(a.objective == b.objective);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("kkt residual diagnostics") {
  // min s^2 s.t. s + x = 3, |x| <= 1 has the closed-form solution (2, 1).
  BoxQp p;
  p.dim_free = 1;
  p.dim_boxed = 1;
  p.box_bound = 1.0;
  p.equality_lhs.resize(1, 2);
  p.equality_lhs << 1.0, 1.0;
  p.equality_rhs.resize(1);
  p.equality_rhs << 3.0;

  QpSolution exact;
  exact.free_block = VectorXd::Constant(1, 2.0);
  exact.boxed_block = VectorXd::Constant(1, 1.0);
  const KktResidual r = kkt_residual(p, exact);
  CHECK(r.stationarity < 1e-9);
  CHECK(r.primal < 1e-9);
  CHECK(r.box_violation == 0.0);

  // A primal perturbation shows up as ||E delta||.
  QpSolution perturbed = exact;
  perturbed.free_block(0) += 0.25;
  const KktResidual rp = kkt_residual(p, perturbed);
  CHECK(rp.primal == doctest::Approx(0.25).epsilon(1e-12));

  // The solver's own box-active answer has an exactly feasible box.
  const QpSolution solved = solve_box_qp(p, 1e-10, 5000);
  const KktResidual rs = kkt_residual(p, solved);
  CHECK(rs.box_violation == 0.0);
  CHECK(rs.primal < 1e-8);
  CHECK(rs.stationarity < 1e-6);

  // Infeasible equalities are rejected.
  BoxQp bad = p;
  bad.equality_lhs.resize(2, 2);
  bad.equality_lhs << 1.0, 1.0, 1.0, 1.0;
  bad.equality_rhs.resize(2);
  bad.equality_rhs << 3.0, 4.0;
  CHECK_THROWS_AS(solve_box_qp(bad), SolverError);
}

TEST_CASE("complex round trip through the lifted solver") {
  Rng rng(10);
  for (int t = 0; t < 10; ++t) {
    const MatrixXcd a = random_complex(rng, 3, 6);
    const MatrixXcd d = random_complex(rng, 3, 1);
    const RealSystem sys = lift_to_real(a, d);
    BoxQp p;
    p.dim_free = 12;
    p.dim_boxed = 0;
    p.equality_lhs = sys.lhs;
    p.equality_rhs = sys.rhs.col(0);
    MatrixXd stacked(12, 1);
    stacked.col(0) = solve_box_qp(p).free_block;
    const MatrixXcd z = unlift(stacked);
    const MatrixXcd oracle = pinv_solve(a, d);
    CHECK((z - oracle).norm() < 1e-8 * std::max(1.0, oracle.norm()));
  }
}
