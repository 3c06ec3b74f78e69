#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwb/beamformer.hpp"
#include "dwb/experiments.hpp"
#include "dwb/qp_core.hpp"

using namespace dwb;
using namespace dwb::beam;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double deg(double d) { return d * kPi / 180.0; }

MatrixXcd random_symbols(const signal::QamConstellation& c, Rng& rng, int rows,
                         int cols) {
  MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = c.random_symbol(rng);
  return m;
}

DwbProblem small_problem(std::uint64_t seed, int order = 4) {
  DwbProblem p;
  p.geometry = {8, 0.5};
  p.bearings.comm_angles_rad = {deg(80.0)};
  p.bearings.eve_angles_rad = {deg(60.0)};
  signal::OfdmGrid g;
  g.n_subcarriers = 8;
  g.n_symbols = 4;
  g.cp_len = 2;
  p.grid = g;
  p.constellation = signal::QamConstellation::make(order);
  p.spoof = {30.0, 500.0};
  Rng rng(seed);
  p.comm_symbols = random_symbols(p.constellation, rng, 1, g.n_subcarriers);
  p.tx_snr_db = 10.0;
  return p;
}

}  // namespace

TEST_CASE("power per symbol") {
  CHECK(power_per_symbol(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(power_per_symbol(10.0, 1.0) == doctest::Approx(10.0));
  CHECK(power_per_symbol(10.0, 2.0) == doctest::Approx(20.0));
  CHECK_THROWS_AS(power_per_symbol(10.0, 0.0), DomainError);
}

TEST_CASE("comm symbol scaling and SNR bookkeeping") {
  Rng rng(12);
  const signal::QamConstellation qpsk = signal::QamConstellation::make(4);
  const MatrixXcd x = random_symbols(qpsk, rng, 2, 16);
  CHECK((scale_comm_symbols(x, 1.0) - x).norm() == 0.0);
  const MatrixXcd x4 = scale_comm_symbols(x, 4.0);
  CHECK((x4 - 2.0 * x).norm() < 1e-14);
  CHECK(x4.squaredNorm() == doctest::Approx(4.0 * x.squaredNorm()));

  // QPSK is constant-modulus, so the per-receiver time-domain energy is
  // exactly P_s L and the configured transmit SNR is met exactly.
  DwbProblem p = small_problem(1);
  p.tx_snr_db = 10.0;
  p.noise_var = 1.0;
  const DwbSolution sol = solve_dwb(p);
  const double snr =
      tx_snr_toward(sol.tx_signal, p.geometry, p.bearings.comm_angles_rad[0],
                    p.noise_var);
  CHECK(snr / p.grid.n_subcarriers == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("dwb with no eavesdroppers reduces to multicast least norm") {
  DwbProblem p = small_problem(2);
  p.bearings.eve_angles_rad.clear();
  const DwbSolution sol = solve_dwb(p);

  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const MatrixXcd a_c =
      signal::steering_matrix(p.geometry, p.bearings.comm_angles_rad);
  const MatrixXcd d_c =
      (signal::idft_matrix(p.grid.n_subcarriers) *
       scale_comm_symbols(p.comm_symbols, p_s).transpose())
          .transpose();
  // Closed form: tr(D^H (A A^H)^{-1} D).
  const MatrixXcd gram = a_c * a_c.adjoint();
  const double expected = (d_c.adjoint() * gram.inverse() * d_c).real().trace();
  CHECK(sol.power_w == doctest::Approx(expected).epsilon(1e-9));
  CHECK(sol.relaxed_power_w == doctest::Approx(expected).epsilon(1e-9));

  const NullingSolution nul = solve_nulling(p);
  CHECK((nul.tx_signal - sol.tx_signal).norm() < 1e-10 * sol.tx_signal.norm());
}

TEST_CASE("identity spoof with zero eve symbols coincides with nulling") {
  DwbProblem p = small_problem(3);
  p.spoof = {0.0, 0.0};
  const int n_sub = p.grid.n_subcarriers;

  // Zero deceptive symbols produce a zero time-domain eve target.
  const MatrixXcd d_e =
      signal::deceptive_time_signal(p.grid, p.spoof, MatrixXcd::Zero(1, n_sub), 0);
  CHECK(d_e.norm() == 0.0);

  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const MatrixXcd a_c = signal::steering_matrix(p.geometry, p.bearings.comm_angles_rad);
  const MatrixXcd a_e = signal::steering_matrix(p.geometry, p.bearings.eve_angles_rad);
  const MatrixXcd d_c =
      (signal::idft_matrix(n_sub) * scale_comm_symbols(p.comm_symbols, p_s).transpose())
          .transpose();
  MatrixXcd a_full(2, 8);
  a_full << a_c, a_e;
  MatrixXcd targets(2, n_sub);
  targets << d_c, d_e;
  const MatrixXcd s_fixed = qp::least_norm_solve(a_full, targets);

  const NullingSolution nul = solve_nulling(p);
  CHECK((s_fixed - nul.tx_signal).norm() < 1e-10 * nul.tx_signal.norm());
}

TEST_CASE("tiny instance sandwich against exhaustive enumeration") {
  for (std::uint64_t seed : {100, 101, 102, 103, 104, 105}) {
    Rng rng(seed);
    DwbProblem p;
    p.geometry = {4, 0.5};
    signal::OfdmGrid g;
    g.n_subcarriers = 2;
    g.n_symbols = 4;
    g.cp_len = 1;
    p.grid = g;
    p.constellation = signal::QamConstellation::make(4);
    p.spoof = {17.0, 300.0};
    p.bearings.comm_angles_rad = {rng.uniform(0.2, 2.9)};
    double eve = rng.uniform(0.2, 2.9);
    while (std::abs(eve - p.bearings.comm_angles_rad[0]) < 0.2) {
      eve = rng.uniform(0.2, 2.9);
    }
    p.bearings.eve_angles_rad = {eve};
    p.comm_symbols = random_symbols(p.constellation, rng, 1, 2);
    p.tx_snr_db = -6.0;  // small box keeps the relaxation active
    p.symbol_index = 2;

    const DwbSolution sol = solve_dwb(p);

    const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
    const auto points = p.constellation.with_power(p_s).points();
    const MatrixXcd a_c = signal::steering_matrix(p.geometry, p.bearings.comm_angles_rad);
    const MatrixXcd a_e = signal::steering_matrix(p.geometry, p.bearings.eve_angles_rad);
    MatrixXcd a_full(2, 4);
    a_full << a_c, a_e;
    const MatrixXcd d_c =
        (signal::idft_matrix(2) * scale_comm_symbols(p.comm_symbols, p_s).transpose())
            .transpose();
    double best = 1e300;
    for (const auto& s0 : points) {
      for (const auto& s1 : points) {
        MatrixXcd xe(1, 2);
        xe << s0, s1;
        const MatrixXcd de =
            signal::deceptive_time_signal(p.grid, p.spoof, xe, p.symbol_index);
        MatrixXcd tg(2, 2);
        tg << d_c, de;
        best = std::min(best, qp::least_norm_solve(a_full, tg).squaredNorm());
      }
    }
    CHECK(sol.relaxed_power_w <= best + 1e-7 * std::max(1.0, best));
    CHECK(sol.power_w >= best - 1e-7 * std::max(1.0, best));
  }
}

TEST_CASE("nulling edge cases") {
  DwbProblem p = small_problem(4);

  // Eavesdropper on top of a comm receiver cannot be both served and nulled.
  DwbProblem conflict = p;
  conflict.bearings.eve_angles_rad = {conflict.bearings.comm_angles_rad[0]};
  CHECK_THROWS_AS(solve_nulling(conflict), RankError);
  CHECK_THROWS_AS(solve_dwb(conflict), RankError);

  // Nulling sends nothing toward the eavesdroppers.
  const NullingSolution nul = solve_nulling(p);
  const double snr_eve = tx_snr_toward(nul.tx_signal, p.geometry,
                                       p.bearings.eve_angles_rad[0], 1.0);
  const double snr_comm = tx_snr_toward(nul.tx_signal, p.geometry,
                                        p.bearings.comm_angles_rad[0], 1.0);
  CHECK(snr_eve <= 1e-12 * snr_comm);
}

TEST_CASE("tx power and tx snr") {
  CHECK(tx_power(MatrixXcd::Zero(4, 8)) == 0.0);

  // Unit-norm columns sum to the column count.
  MatrixXcd s = MatrixXcd::Zero(3, 5);
  for (int j = 0; j < 5; ++j) s(j % 3, j) = 1.0;
  CHECK(tx_power(s) == doctest::Approx(5.0));

  Rng rng(13);
  MatrixXcd r(4, 6);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 6; ++j) r(i, j) = rng.complex_normal();
  CHECK(tx_power(r) == doctest::Approx(r.squaredNorm()));

  // Direct formula evaluation at an arbitrary bearing.
  signal::ArrayGeometry g{4, 0.5};
  const VectorXcd a = signal::steering_vector(g, 0.8);
  const double direct = (r.transpose() * a).squaredNorm() / 2.0;
  CHECK(tx_snr_toward(r, g, 0.8, 2.0) == doctest::Approx(direct));

  // A solved problem hits the configured SNR through the equality constraint.
  DwbProblem p = small_problem(5);
  const DwbSolution sol = solve_dwb(p);
  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const double d_energy = p_s * scale_comm_symbols(p.comm_symbols, 1.0).row(0).squaredNorm();
  CHECK(tx_snr_toward(sol.tx_signal, p.geometry, p.bearings.comm_angles_rad[0],
                      p.noise_var) == doctest::Approx(d_energy).epsilon(1e-9));
}

TEST_CASE("relaxed dominance over random topologies") {
  for (int trial = 0; trial < 15; ++trial) {
    Rng rng(derive_seed(77, trial));
    const experiments::Topology topo = experiments::random_topology(rng, 2, 2);
    DwbProblem p;
    p.geometry = {16, 0.5};
    p.bearings = topo.bearings;
    signal::OfdmGrid g;
    g.n_subcarriers = 16;
    g.n_symbols = 4;
    g.cp_len = 4;
    p.grid = g;
    p.constellation = signal::QamConstellation::make(64);
    p.spoof = {30.0, 500.0};
    p.comm_symbols = random_symbols(p.constellation, rng, 2, 16);
    p.tx_snr_db = 10.0;

    const DwbSolution dwb = solve_dwb(p);
    const NullingSolution nul = solve_nulling(p);
    CHECK(dwb.relaxed_power_w <= nul.power_w * (1.0 + 1e-9));
  }
}

TEST_CASE("emitted signal satisfies both constraints after rounding") {
  DwbProblem p = small_problem(6, 64);
  p.tx_snr_db = -3.0;
  const DwbSolution sol = solve_dwb(p);
  CHECK(sol.solver_diag.comm_residual_rel < 1e-8);
  CHECK(sol.solver_diag.eve_residual_rel < 1e-8);

  // Rounded symbols are valid constellation points.
  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const auto scaled = p.constellation.with_power(p_s);
  for (int i = 0; i < sol.deceptive_symbols_rounded.rows(); ++i) {
    for (int j = 0; j < sol.deceptive_symbols_rounded.cols(); ++j) {
      const signal::Complex v = sol.deceptive_symbols_rounded(i, j);
      CHECK(signal::qam_nearest(v, scaled) == v);
    }
  }

  // Without the re-solve the relaxed signal is emitted unchanged.
  DwbProblem keep = p;
  keep.resolve_after_rounding = false;
  const DwbSolution relaxed_out = solve_dwb(keep);
  CHECK(relaxed_out.power_w == doctest::Approx(relaxed_out.relaxed_power_w));
  CHECK(relaxed_out.solver_diag.comm_residual_rel < 1e-8);
}

TEST_CASE("power scales quadratically with the target amplitude") {
  DwbProblem p = small_problem(7);
  const DwbSolution base = solve_dwb(p);
  const NullingSolution base_null = solve_nulling(p);

  DwbProblem scaled = p;
  scaled.tx_snr_db += 10.0 * std::log10(4.0);  // gamma = 2
  const DwbSolution big = solve_dwb(scaled);
  const NullingSolution big_null = solve_nulling(scaled);
  CHECK(big_null.power_w == doctest::Approx(4.0 * base_null.power_w).epsilon(1e-9));
  CHECK(big.relaxed_power_w == doctest::Approx(4.0 * base.relaxed_power_w).epsilon(1e-9));
}

TEST_CASE("per symbol solutions differ only through the spoof phase") {
  DwbProblem p = small_problem(8);
  const DwbSolution sol0 = solve_dwb(p);
  const MatrixXcd x_e = sol0.deceptive_symbols_rounded;

  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const MatrixXcd a_c = signal::steering_matrix(p.geometry, p.bearings.comm_angles_rad);
  const MatrixXcd a_e = signal::steering_matrix(p.geometry, p.bearings.eve_angles_rad);
  MatrixXcd a_full(2, 8);
  a_full << a_c, a_e;
  const MatrixXcd d_c =
      (signal::idft_matrix(p.grid.n_subcarriers) *
       scale_comm_symbols(p.comm_symbols, p_s).transpose())
          .transpose();

  auto solve_at = [&](int m) {
    const MatrixXcd d_e = signal::deceptive_time_signal(p.grid, p.spoof, x_e, m);
    MatrixXcd tg(2, p.grid.n_subcarriers);
    tg << d_c, d_e;
    return qp::least_norm_solve(a_full, tg);
  };
  const MatrixXcd s0 = solve_at(0);
  const MatrixXcd s1 = solve_at(1);
  const MatrixXcd s2 = solve_at(2);

  const double t_l = p.grid.symbol_duration_s();
  const signal::Complex c1 =
      std::polar(1.0, 2.0 * kPi * p.spoof.fake_doppler_hz * 1.0 * t_l);
  const signal::Complex c2 =
      std::polar(1.0, 2.0 * kPi * p.spoof.fake_doppler_hz * 2.0 * t_l);
  // S(m) = S_comm + c_m S_eve, so increments are proportional.
  const MatrixXcd lhs = (s2 - s0);
  const MatrixXcd rhs = (s1 - s0) * ((c2 - 1.0) / (c1 - 1.0));
  CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, lhs.norm()));
}

TEST_CASE("requires more antennas than receivers") {
  DwbProblem p = small_problem(9);
  p.geometry.n_antennas = 2;
  CHECK_THROWS_AS(solve_dwb(p), DomainError);
  CHECK_THROWS_AS(solve_nulling(p), DomainError);
}

TEST_CASE("decomposed relaxation matches a monolithic qp_core solve") {
  Rng rng(55);
  DwbProblem p;
  p.geometry = {5, 0.5};
  signal::OfdmGrid g;
  g.n_subcarriers = 4;
  g.n_symbols = 3;
  g.cp_len = 2;
  p.grid = g;
  p.constellation = signal::QamConstellation::make(4);
  p.spoof = {25.0, 400.0};
  p.bearings.comm_angles_rad = {1.4};
  p.bearings.eve_angles_rad = {1.9};
  p.comm_symbols = random_symbols(p.constellation, rng, 1, 4);
  p.tx_snr_db = -8.0;
  p.symbol_index = 1;
  const DwbSolution sol = solve_dwb(p);

  // Monolithic assembly over vec(S), vec(X_e) with Kronecker-structured
  // equalities, solved through the same qp_core entry point.
  const int n_sub = 4, n_t = 5, n_e = 1, n_c = 1;
  const double p_s = power_per_symbol(p.tx_snr_db, p.noise_var);
  const MatrixXcd a_c = signal::steering_matrix(p.geometry, p.bearings.comm_angles_rad);
  const MatrixXcd a_e = signal::steering_matrix(p.geometry, p.bearings.eve_angles_rad);
  const MatrixXcd fh = signal::idft_matrix(n_sub);
  const VectorXcd sp = signal::spoof_matrix_diag(p.grid, p.spoof, p.symbol_index);
  const MatrixXcd g_mat = fh * sp.asDiagonal();
  const MatrixXcd d_c =
      (fh * scale_comm_symbols(p.comm_symbols, p_s).transpose()).transpose();

  const int n_vars = n_t * n_sub + n_e * n_sub;
  const int n_eq = (n_c + n_e) * n_sub;
  MatrixXcd e = MatrixXcd::Zero(n_eq, n_vars);
  VectorXcd gvec = VectorXcd::Zero(n_eq);
  for (int l = 0; l < n_sub; ++l) {
    e.block(l * n_c, l * n_t, n_c, n_t) = a_c;
    gvec.segment(l * n_c, n_c) = d_c.col(l);
    e.block(n_c * n_sub + l * n_e, l * n_t, n_e, n_t) = a_e;
    for (int n = 0; n < n_sub; ++n) {
      e.block(n_c * n_sub + l * n_e, n_t * n_sub + n * n_e, n_e, n_e) =
          -g_mat(l, n) * MatrixXcd::Identity(n_e, n_e);
    }
  }
  const qp::RealSystem lifted = qp::lift_to_real(e, gvec);
  const int ns = n_t * n_sub, nx = n_e * n_sub;
  Eigen::MatrixXd lhs(lifted.lhs.rows(), lifted.lhs.cols());
  lhs.middleCols(0, ns) = lifted.lhs.middleCols(0, ns);
  lhs.middleCols(ns, ns) = lifted.lhs.middleCols(n_vars, ns);
  lhs.middleCols(2 * ns, nx) = lifted.lhs.middleCols(ns, nx);
  lhs.middleCols(2 * ns + nx, nx) = lifted.lhs.middleCols(n_vars + ns, nx);

  qp::BoxQp big;
  big.dim_free = 2 * ns;
  big.dim_boxed = 2 * nx;
  big.equality_lhs = lhs;
  big.equality_rhs = lifted.rhs.col(0);
  big.box_bound = std::sqrt(p_s);
  const qp::QpSolution qs = qp::solve_box_qp(big, 1e-10, 20000);
  CHECK(qs.converged);
  CHECK(qs.objective == doctest::Approx(sol.relaxed_power_w).epsilon(1e-8));
}
