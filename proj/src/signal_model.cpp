#include "dwb/signal_model.hpp"

#include <cmath>
#include <string>

namespace dwb::signal {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_angle(double angle_rad) {
  if (!(angle_rad >= 0.0 && angle_rad <= kPi)) {
    throw DomainError("bearing angle " + std::to_string(angle_rad) +
                      " rad outside [0, pi]");
  }
}

}  // namespace

void ArrayGeometry::validate() const {
  if (n_antennas < 1) throw DomainError("n_antennas must be >= 1");
  if (!(spacing_over_wavelength > 0.0)) {
    throw DomainError("spacing_over_wavelength must be positive");
  }
}

void Bearings::validate() const {
  for (double a : comm_angles_rad) check_angle(a);
  for (double a : eve_angles_rad) check_angle(a);
  if (comm_angles_rad.empty() && eve_angles_rad.empty()) {
    throw DomainError("at least one bearing is required");
  }
}

void OfdmGrid::validate() const {
  if (n_subcarriers < 1) throw DomainError("n_subcarriers must be >= 1");
  if (!(subcarrier_spacing_hz > 0.0)) {
    throw DomainError("subcarrier_spacing_hz must be positive");
  }
  if (n_symbols < 1) throw DomainError("n_symbols must be >= 1");
  if (!(carrier_hz > 0.0)) throw DomainError("carrier_hz must be positive");
  if (cp_len < 0 || cp_len >= n_subcarriers) {
    throw DomainError("cp_len must satisfy 0 <= cp_len < n_subcarriers");
  }
}

QamConstellation QamConstellation::make(int order, double symbol_power_w) {
  if (order != 4 && order != 16 && order != 64 && order != 256) {
    throw DomainError("QAM order must be one of {4, 16, 64, 256}");
  }
  if (!(symbol_power_w > 0.0)) {
    throw DomainError("symbol_power_w must be positive");
  }
  QamConstellation c;
  c.order_ = order;
  c.symbol_power_w_ = symbol_power_w;
  const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
  // Odd levels +-1, +-3, ... scaled to unit mean symbol energy
  // (E[|x|^2] = 2 (side^2 - 1) / 3 before normalization).
  const double scale = 1.0 / std::sqrt(2.0 * (side * side - 1) / 3.0);
  c.levels_.resize(side);
  for (int i = 0; i < side; ++i) {
    c.levels_[i] = (2 * i - (side - 1)) * scale;
  }
  return c;
}

std::vector<double> QamConstellation::scaled_levels() const {
  std::vector<double> out(levels_);
  const double s = std::sqrt(symbol_power_w_);
  for (double& v : out) v *= s;
  return out;
}

std::vector<Complex> QamConstellation::points() const {
  const auto lv = scaled_levels();
  std::vector<Complex> out;
  out.reserve(lv.size() * lv.size());
  for (double re : lv) {
    for (double im : lv) out.emplace_back(re, im);
  }
  return out;
}

Complex QamConstellation::random_symbol(Rng& rng) const {
  const auto lv = scaled_levels();
  const auto n = lv.size();
  const double re = lv[rng.uniform_int(n)];
  const double im = lv[rng.uniform_int(n)];
  return {re, im};
}

QamConstellation QamConstellation::with_power(double symbol_power_w) const {
  return make(order_, symbol_power_w);
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double angle_rad) {
  geometry.validate();
  check_angle(angle_rad);
  const double step = 2.0 * kPi * geometry.spacing_over_wavelength * std::cos(angle_rad);
  Eigen::VectorXcd a(geometry.n_antennas);
  for (int k = 0; k < geometry.n_antennas; ++k) {
    a(k) = std::polar(1.0, step * k);
  }
  return a;
}

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geometry,
                                 const std::vector<double>& angles_rad) {
  geometry.validate();
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(angles_rad.size()), geometry.n_antennas);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    m.row(i) = steering_vector(geometry, angles_rad[i]).transpose();
  }
  return m;
}

Eigen::MatrixXcd idft_matrix(int n) {
  if (n < 1) throw DomainError("IDFT size must be >= 1");
  const double scale = 1.0 / std::sqrt(double(n));
  Eigen::MatrixXcd f(n, n);
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      // Products nl mod n keep the phase argument small and exact.
      const long long idx = (static_cast<long long>(row) * col) % n;
      f(row, col) = scale * std::polar(1.0, 2.0 * kPi * double(idx) / n);
    }
  }
  return f;
}

Eigen::MatrixXcd dft_matrix(int n) { return idft_matrix(n).adjoint(); }

Complex qam_nearest(Complex value, const QamConstellation& constellation) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw DomainError("qam_nearest requires a finite input");
  }
  const auto lv = constellation.scaled_levels();
  auto nearest_axis = [&lv](double v) {
    double best = lv.front();
    for (double cand : lv) {
      const double dc = std::abs(v - cand);
      const double db = std::abs(v - best);
      if (dc < db ||
          (dc == db && (std::abs(cand) < std::abs(best) ||
                        (std::abs(cand) == std::abs(best) && cand < best)))) {
        best = cand;
      }
    }
    return best;
  };
  return {nearest_axis(value.real()), nearest_axis(value.imag())};
}

Eigen::VectorXcd spoof_matrix_diag(const OfdmGrid& grid, const SpoofProfile& profile,
                                   int symbol_index) {
  grid.validate();
  if (symbol_index < 0 || symbol_index >= grid.n_symbols) {
    throw DomainError("symbol index outside [0, n_symbols)");
  }
  const double doppler_phase = 2.0 * kPi * profile.fake_doppler_hz * symbol_index *
                               grid.symbol_duration_s();
  Eigen::VectorXcd d(grid.n_subcarriers);
  for (int l = 0; l < grid.n_subcarriers; ++l) {
    const double range_phase =
        -2.0 * kPi * grid.subcarrier_hz(l) * profile.fake_range_m / kSpeedOfLight;
    d(l) = std::polar(1.0, range_phase + doppler_phase);
  }
  return d;
}

Eigen::MatrixXcd deceptive_time_signal(const OfdmGrid& grid, const SpoofProfile& profile,
                                       const Eigen::MatrixXcd& eve_symbols,
                                       int symbol_index) {
  if (eve_symbols.cols() != grid.n_subcarriers) {
    throw DomainError("eve symbol matrix must have L columns");
  }
  const Eigen::VectorXcd spoof = spoof_matrix_diag(grid, profile, symbol_index);
  const Eigen::MatrixXcd fh = idft_matrix(grid.n_subcarriers);
  Eigen::MatrixXcd d(eve_symbols.rows(), eve_symbols.cols());
  for (Eigen::Index i = 0; i < eve_symbols.rows(); ++i) {
    const Eigen::VectorXcd spoofed =
        spoof.array() * eve_symbols.row(i).transpose().array();
    d.row(i) = (fh * spoofed).transpose();
  }
  return d;
}

Eigen::MatrixXcd circulant_channel(const std::vector<Complex>& taps, int n) {
  const int q = static_cast<int>(taps.size());
  if (q < 1) throw DomainError("channel needs at least one tap");
  if (q > n) {
    throw DomainError("tap count exceeds the OFDM symbol length; the cyclic "
                      "prefix assumption does not hold");
  }
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    for (int t = 0; t < q; ++t) {
      h((col + t) % n, col) = taps[t];
    }
  }
  return h;
}

Eigen::VectorXcd freq_channel_diag(const ChannelRealization& channel,
                                   const OfdmGrid& grid, int symbol_index) {
  grid.validate();
  if (symbol_index < 0 || symbol_index >= grid.n_symbols) {
    throw DomainError("symbol index outside [0, n_symbols)");
  }
  const int n = grid.n_subcarriers;
  Eigen::VectorXcd d(n);
  if (channel.tap_mode()) {
    // Eigenvalues of the circulant: unnormalized DFT of the padded taps.
    for (int l = 0; l < n; ++l) {
      Complex acc = 0.0;
      for (std::size_t t = 0; t < channel.taps.size(); ++t) {
        acc += channel.taps[t] *
               std::polar(1.0, -2.0 * kPi *
                                   double((static_cast<long long>(l) * t) % n) / n);
      }
      d(l) = acc;
    }
    return d;
  }
  const double doppler_phase = 2.0 * kPi * channel.doppler_hz(grid) * symbol_index *
                               grid.symbol_duration_s();
  for (int l = 0; l < n; ++l) {
    const double range_phase =
        -2.0 * kPi * grid.subcarrier_hz(l) * channel.range_m / kSpeedOfLight;
    d(l) = channel.path_gain * std::polar(1.0, range_phase + doppler_phase);
  }
  return d;
}

Eigen::VectorXcd simulate_rx(const Eigen::MatrixXcd& tx_signal,
                             const Eigen::VectorXcd& steer,
                             const ChannelRealization& channel,
                             const OfdmGrid& grid, int symbol_index,
                             std::uint64_t rng_seed) {
  if (tx_signal.rows() != steer.size()) {
    throw DomainError("tx signal rows must match the steering vector length");
  }
  if (tx_signal.cols() != grid.n_subcarriers) {
    throw DomainError("tx signal must have L columns");
  }
  const Eigen::VectorXcd d = tx_signal.transpose() * steer;
  Eigen::VectorXcd y;
  if (channel.tap_mode()) {
    if (static_cast<int>(channel.taps.size()) > grid.cp_len + 1) {
      throw DomainError("tap count exceeds cp_len + 1");
    }
    y = circulant_channel(channel.taps, grid.n_subcarriers) * d;
  } else {
    const Eigen::MatrixXcd fh = idft_matrix(grid.n_subcarriers);
    const Eigen::VectorXcd diag = freq_channel_diag(channel, grid, symbol_index);
    y = fh * (diag.array() * (fh.adjoint() * d).array()).matrix();
  }
  if (channel.noise_var > 0.0) {
    Rng rng(rng_seed);
    const double axis_sigma = std::sqrt(channel.noise_var / 2.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y(i) += axis_sigma * rng.complex_normal();
    }
  }
  return y;
}

Eigen::VectorXcd ofdm_demod(const Eigen::VectorXcd& time_samples) {
  return dft_matrix(static_cast<int>(time_samples.size())) * time_samples;
}

}  // namespace dwb::signal
