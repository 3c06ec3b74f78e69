#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "dwb/signal_model.hpp"

namespace dwb::radar {

// M demodulated OFDM symbols stacked as columns of an L x M matrix.
struct RxFrame {
  signal::OfdmGrid grid;
  Eigen::MatrixXcd fd_samples;
};

RxFrame collect_frame(const signal::OfdmGrid& grid,
                      const std::vector<Eigen::VectorXcd>& fd_symbols);

enum class Equalization { kNone, kPhaseOnly };

// How the estimator obtains the transmitted symbols before dividing them out:
// known preamble, or blind per-entry decisions.
struct SymbolKnowledge {
  enum class Mode { kKnown, kBlind };

  Mode mode = Mode::kKnown;
  Eigen::MatrixXcd symbols;  // L x M, known mode only
  signal::QamConstellation constellation = signal::QamConstellation::make(4);
  Equalization equalization = Equalization::kNone;

  static SymbolKnowledge known(Eigen::MatrixXcd symbols);
  static SymbolKnowledge blind(signal::QamConstellation constellation,
                               Equalization equalization = Equalization::kNone);
};

// Z = Y ./ X_hat. In noiseless known mode this is exactly the range-Doppler
// phase matrix the transmitter embedded.
Eigen::MatrixXcd remove_symbols(const RxFrame& frame, const SymbolKnowledge& knowledge);

// Per-entry nearest-point decisions, optionally after removing a
// per-subcarrier average phase (fourth-power estimate, pi/2 ambiguity left
// in place).
Eigen::MatrixXcd blind_demod(const RxFrame& frame,
                             const signal::QamConstellation& constellation,
                             Equalization equalization);

// Zero-padded 2D transform magnitudes, P x Q, with centered axes:
// range in [-c/(2 df), c/(2 df)), Doppler in [-1/(2 T_L), 1/(2 T_L)).
struct RangeDopplerMap {
  Eigen::MatrixXd magnitudes;          // P x Q
  std::vector<double> range_axis_m;    // length P, ascending
  std::vector<double> doppler_axis_hz; // length Q, ascending
};

// Transform signs follow the embedded phase model: exp(-j 2 pi l df tau)
// peaks at +tau, exp(+j 2 pi f m T_L) peaks at +f.
RangeDopplerMap range_doppler_map(const Eigen::MatrixXcd& z, const signal::OfdmGrid& grid,
                                  int pad_range = 4, int pad_doppler = 4);

struct PeakEstimate {
  double range_m = 0.0;
  double doppler_hz = 0.0;
  double peak_to_floor_db = 0.0;
};

// Global argmax (ties to the smallest indices) with optional 3-point
// parabolic interpolation per axis.
PeakEstimate find_peak(const RangeDopplerMap& map, bool interpolate = true);

// True when (range, doppler) falls outside the unambiguous window of the
// centered axes and would wrap.
bool aliases(const signal::OfdmGrid& grid, double range_m, double doppler_hz);

// CSV export, header `range_m,doppler_hz,magnitude_db`, row-major over the
// grid, magnitudes normalized to a 0 dB peak.
void write_map_csv(const RangeDopplerMap& map, std::ostream& out);
void write_map_csv(const RangeDopplerMap& map, const std::string& path);

}  // namespace dwb::radar
