#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "dwb/errors.hpp"
#include "dwb/rng.hpp"

namespace dwb::signal {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

// Uniform linear array: N_T elements at spacing d, expressed as d/lambda.
struct ArrayGeometry {
  int n_antennas = 1;
  double spacing_over_wavelength = 0.5;

  void validate() const;
};

// Bearings of the two receiver groups, radians in [0, pi].
// Either list may be empty, but not both.
struct Bearings {
  std::vector<double> comm_angles_rad;
  std::vector<double> eve_angles_rad;

  int n_comm() const { return static_cast<int>(comm_angles_rad.size()); }
  int n_eve() const { return static_cast<int>(eve_angles_rad.size()); }
  void validate() const;
};

// OFDM numerology. The symbol duration is always derived as 1/spacing so the
// T_L * delta_f == 1 identity holds exactly.
struct OfdmGrid {
  int n_subcarriers = 64;              // L
  double subcarrier_spacing_hz = 312.5e3;  // delta_f
  int n_symbols = 32;                  // M
  double carrier_hz = 5.9e9;           // f_c
  int cp_len = 16;

  double symbol_duration_s() const { return 1.0 / subcarrier_spacing_hz; }
  double sample_rate_hz() const { return n_subcarriers * subcarrier_spacing_hz; }
  double subcarrier_hz(int l) const { return l * subcarrier_spacing_hz; }
  void validate() const;
};

// Square QAM alphabet, unit mean symbol energy before scaling by
// sqrt(symbol_power_w). Levels exclude zero, so elementwise division by
// transmitted symbols is always defined.
class QamConstellation {
 public:
  static QamConstellation make(int order, double symbol_power_w = 1.0);

  int order() const { return order_; }
  double symbol_power_w() const { return symbol_power_w_; }
  // Unit-energy per-axis levels, ascending.
  const std::vector<double>& per_axis_levels() const { return levels_; }
  // Levels after the sqrt(P_s) scaling, ascending.
  std::vector<double> scaled_levels() const;
  // All order() scaled constellation points, axis-major order.
  std::vector<Complex> points() const;
  // Uniform random scaled constellation point.
  Complex random_symbol(Rng& rng) const;
  // Same shape at a different symbol power.
  QamConstellation with_power(double symbol_power_w) const;

 private:
  QamConstellation() = default;
  int order_ = 4;
  double symbol_power_w_ = 1.0;
  std::vector<double> levels_;
};

// Fixed fake range/Doppler pair encoded by the deceiving diagonal.
struct SpoofProfile {
  double fake_range_m = 0.0;    // R_sp, may be negative
  double fake_doppler_hz = 0.0; // f_sp
};

// One receiver's channel. With taps present the channel is the circulant
// built from them (static across symbols); with taps empty it is the
// idealized diagonal synthesized from (path_gain, range, Doppler) and the
// symbol index.
struct ChannelRealization {
  std::vector<Complex> taps;      // empty => idealized diagonal mode
  double path_gain = 1.0;         // beta
  double range_m = 0.0;           // R
  double velocity_mps = 0.0;      // v
  double noise_var = 1.0;         // sigma^2, total per complex sample

  bool tap_mode() const { return !taps.empty(); }
  double doppler_hz(const OfdmGrid& grid) const {
    return velocity_mps * grid.carrier_hz / kSpeedOfLight;
  }
};

// a(theta): element k carries phase 2*pi*(d/lambda)*k*cos(theta).
Eigen::VectorXcd steering_vector(const ArrayGeometry& geometry, double angle_rad);

// Row i = steering_vector(angles[i]); an empty list gives a 0 x N_T matrix.
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geometry,
                                 const std::vector<double>& angles_rad);

// Unitary L x L IDFT matrix F^H, entry (n, l) = exp(j*2*pi*n*l/L)/sqrt(L).
Eigen::MatrixXcd idft_matrix(int n);

// F = (F^H)^H, the matching unitary DFT matrix.
Eigen::MatrixXcd dft_matrix(int n);

// Nearest constellation point, decided independently per axis. Distance ties
// go to the smaller-magnitude level; +/- ties go negative.
Complex qam_nearest(Complex value, const QamConstellation& constellation);

// Diagonal of the deceiving matrix for OFDM symbol m: unit-modulus phase
// ramps for the fake range (across subcarriers) and fake Doppler (across
// symbols).
Eigen::VectorXcd spoof_matrix_diag(const OfdmGrid& grid, const SpoofProfile& profile,
                                   int symbol_index);

// Time-domain target rows toward the eavesdroppers: row i of the result is
// (F^H * diag(spoof) * x_e_row_i)^T for the N_e x L symbol matrix.
Eigen::MatrixXcd deceptive_time_signal(const OfdmGrid& grid, const SpoofProfile& profile,
                                       const Eigen::MatrixXcd& eve_symbols,
                                       int symbol_index);

// Circulant channel matrix whose first column is the zero-padded tap vector.
Eigen::MatrixXcd circulant_channel(const std::vector<Complex>& taps, int n);

// Frequency-domain diagonal channel for symbol m. Idealized mode evaluates
// beta * exp(-j*2*pi*l*df*R/c) * exp(j*2*pi*f_D*m*T_L); tap mode returns the
// eigenvalues of the circulant, i.e. the L-point DFT of the padded taps.
Eigen::VectorXcd freq_channel_diag(const ChannelRealization& channel,
                                   const OfdmGrid& grid, int symbol_index);

// One received OFDM symbol: H_circ * (S^T * steer) + CN(0, sigma^2 I) noise,
// deterministic for a given seed.
Eigen::VectorXcd simulate_rx(const Eigen::MatrixXcd& tx_signal,
                             const Eigen::VectorXcd& steer,
                             const ChannelRealization& channel,
                             const OfdmGrid& grid, int symbol_index,
                             std::uint64_t rng_seed);

// F * y, back to the frequency domain.
Eigen::VectorXcd ofdm_demod(const Eigen::VectorXcd& time_samples);

}  // namespace dwb::signal
