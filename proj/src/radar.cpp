#include "dwb/radar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace dwb::radar {

namespace {

constexpr double kPi = 3.14159265358979323846;

using signal::Complex;

// Parabolic vertex offset from three magnitudes around a peak, clamped to
// half a bin.
double parabolic_offset(double lo, double mid, double hi) {
  const double denom = lo + hi - 2.0 * mid;
  if (denom >= 0.0) return 0.0;  // not a strict local max, keep the bin
  double delta = (lo - hi) / (2.0 * denom);
  return std::clamp(delta, -0.5, 0.5);
}

}  // namespace

SymbolKnowledge SymbolKnowledge::known(Eigen::MatrixXcd symbols) {
  SymbolKnowledge k;
  k.mode = Mode::kKnown;
  k.symbols = std::move(symbols);
  return k;
}

SymbolKnowledge SymbolKnowledge::blind(signal::QamConstellation constellation,
                                       Equalization equalization) {
  SymbolKnowledge k;
  k.mode = Mode::kBlind;
  k.constellation = std::move(constellation);
  k.equalization = equalization;
  return k;
}

RxFrame collect_frame(const signal::OfdmGrid& grid,
                      const std::vector<Eigen::VectorXcd>& fd_symbols) {
  grid.validate();
  if (static_cast<int>(fd_symbols.size()) != grid.n_symbols) {
    throw DomainError("expected exactly n_symbols demodulated vectors");
  }
  RxFrame frame;
  frame.grid = grid;
  frame.fd_samples.resize(grid.n_subcarriers, grid.n_symbols);
  for (int m = 0; m < grid.n_symbols; ++m) {
    if (fd_symbols[m].size() != grid.n_subcarriers) {
      throw DomainError("demodulated vector length must equal n_subcarriers");
    }
    frame.fd_samples.col(m) = fd_symbols[m];
  }
  return frame;
}

Eigen::MatrixXcd blind_demod(const RxFrame& frame,
                             const signal::QamConstellation& constellation,
                             Equalization equalization) {
  const Eigen::MatrixXcd& y = frame.fd_samples;
  Eigen::MatrixXcd decisions(y.rows(), y.cols());
  for (Eigen::Index l = 0; l < y.rows(); ++l) {
    Complex rot = 1.0;
    if (equalization == Equalization::kPhaseOnly) {
      // Fourth-power phase estimate per subcarrier; square QAM has a
      // negative-real fourth moment, hence the pi offset. The pi/2
      // ambiguity stays.
      Complex acc = 0.0;
      for (Eigen::Index m = 0; m < y.cols(); ++m) {
        const Complex v = y(l, m);
        acc += v * v * v * v;
      }
      if (std::abs(acc) > 0.0) {
        const double phase = (std::arg(acc) - kPi) / 4.0;
        rot = std::polar(1.0, -phase);
      }
    }
    for (Eigen::Index m = 0; m < y.cols(); ++m) {
      decisions(l, m) = signal::qam_nearest(y(l, m) * rot, constellation);
    }
  }
  return decisions;
}

Eigen::MatrixXcd remove_symbols(const RxFrame& frame, const SymbolKnowledge& knowledge) {
  const Eigen::MatrixXcd& y = frame.fd_samples;
  Eigen::MatrixXcd x_hat;
  if (knowledge.mode == SymbolKnowledge::Mode::kKnown) {
    if (knowledge.symbols.rows() != y.rows() || knowledge.symbols.cols() != y.cols()) {
      throw DomainError("known symbol matrix must be L x M");
    }
    x_hat = knowledge.symbols;
  } else {
    x_hat = blind_demod(frame, knowledge.constellation, knowledge.equalization);
  }
  for (Eigen::Index l = 0; l < x_hat.rows(); ++l) {
    for (Eigen::Index m = 0; m < x_hat.cols(); ++m) {
      if (x_hat(l, m) == Complex(0.0, 0.0)) {
        throw DomainError("zero symbol divisor in symbol removal");
      }
    }
  }
  return y.cwiseQuotient(x_hat);
}

RangeDopplerMap range_doppler_map(const Eigen::MatrixXcd& z, const signal::OfdmGrid& grid,
                                  int pad_range, int pad_doppler) {
  grid.validate();
  if (pad_range < 1 || pad_doppler < 1) throw DomainError("pad factors must be >= 1");
  if (z.rows() != grid.n_subcarriers || z.cols() != grid.n_symbols) {
    throw DomainError("symbol-stripped matrix must be L x M");
  }
  const int n_l = grid.n_subcarriers;
  const int n_m = grid.n_symbols;
  const int p = pad_range * n_l;
  const int q = pad_doppler * n_m;

  // Delay transform: kernel exp(+j 2 pi p l / P) so exp(-j 2 pi l df tau)
  // peaks at positive tau. Doppler transform: kernel exp(-j 2 pi q m / Q) so
  // exp(+j 2 pi f m T_L) peaks at positive f.
  Eigen::MatrixXcd range_kernel(p, n_l);
  for (int r = 0; r < p; ++r) {
    for (int l = 0; l < n_l; ++l) {
      range_kernel(r, l) =
          std::polar(1.0, 2.0 * kPi * double((static_cast<long long>(r) * l) % p) / p);
    }
  }
  Eigen::MatrixXcd doppler_kernel(n_m, q);
  for (int m = 0; m < n_m; ++m) {
    for (int c = 0; c < q; ++c) {
      doppler_kernel(m, c) = std::polar(
          1.0, -2.0 * kPi * double((static_cast<long long>(m) * c) % q) / q);
    }
  }
  const Eigen::MatrixXcd spectrum = range_kernel * z * doppler_kernel;

  // Center both axes so negative delays/Dopplers sit left of zero.
  RangeDopplerMap map;
  map.magnitudes.resize(p, q);
  map.range_axis_m.resize(p);
  map.doppler_axis_hz.resize(q);
  const double range_bin = signal::kSpeedOfLight / (p * grid.subcarrier_spacing_hz);
  const double doppler_bin = 1.0 / (q * grid.symbol_duration_s());
  const int p_half = p / 2;
  const int q_half = q / 2;
  for (int r = 0; r < p; ++r) {
    map.range_axis_m[r] = (r - p_half) * range_bin;
  }
  for (int c = 0; c < q; ++c) {
    map.doppler_axis_hz[c] = (c - q_half) * doppler_bin;
  }
  for (int r = 0; r < p; ++r) {
    const int src_r = (r - p_half + p) % p;
    for (int c = 0; c < q; ++c) {
      const int src_c = (c - q_half + q) % q;
      map.magnitudes(r, c) = std::abs(spectrum(src_r, src_c));
    }
  }
  return map;
}

PeakEstimate find_peak(const RangeDopplerMap& map, bool interpolate) {
  const auto& mag = map.magnitudes;
  if (mag.size() == 0) throw DomainError("empty range-Doppler map");
  Eigen::Index pr = 0;
  Eigen::Index pc = 0;
  double best = -1.0;
  for (Eigen::Index r = 0; r < mag.rows(); ++r) {
    for (Eigen::Index c = 0; c < mag.cols(); ++c) {
      if (mag(r, c) > best) {
        best = mag(r, c);
        pr = r;
        pc = c;
      }
    }
  }

  double dr = 0.0;
  double dc = 0.0;
  if (interpolate) {
    if (pr > 0 && pr + 1 < mag.rows()) {
      dr = parabolic_offset(mag(pr - 1, pc), mag(pr, pc), mag(pr + 1, pc));
    }
    if (pc > 0 && pc + 1 < mag.cols()) {
      dc = parabolic_offset(mag(pr, pc - 1), mag(pr, pc), mag(pr, pc + 1));
    }
  }

  const double range_bin =
      map.range_axis_m.size() > 1 ? map.range_axis_m[1] - map.range_axis_m[0] : 0.0;
  const double doppler_bin = map.doppler_axis_hz.size() > 1
                                 ? map.doppler_axis_hz[1] - map.doppler_axis_hz[0]
                                 : 0.0;
  PeakEstimate peak;
  peak.range_m = map.range_axis_m[pr] + dr * range_bin;
  peak.doppler_hz = map.doppler_axis_hz[pc] + dc * doppler_bin;

  // Median magnitude as the floor reference.
  std::vector<double> values(mag.data(), mag.data() + mag.size());
  const auto mid = values.begin() + values.size() / 2;
  std::nth_element(values.begin(), mid, values.end());
  const double floor = std::max(*mid, 1e-300);
  peak.peak_to_floor_db = 20.0 * std::log10(std::max(best, 1e-300) / floor);
  return peak;
}

bool aliases(const signal::OfdmGrid& grid, double range_m, double doppler_hz) {
  const double range_span = signal::kSpeedOfLight / grid.subcarrier_spacing_hz;
  const double doppler_span = 1.0 / grid.symbol_duration_s();
  return range_m < -range_span / 2.0 || range_m >= range_span / 2.0 ||
         doppler_hz < -doppler_span / 2.0 || doppler_hz >= doppler_span / 2.0;
}

void write_map_csv(const RangeDopplerMap& map, std::ostream& out) {
  out << "range_m,doppler_hz,magnitude_db\n";
  const double peak = std::max(map.magnitudes.maxCoeff(), 1e-300);
  char line[128];
  for (Eigen::Index r = 0; r < map.magnitudes.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.magnitudes.cols(); ++c) {
      const double db = std::max(
          20.0 * std::log10(std::max(map.magnitudes(r, c), 1e-300) / peak), -300.0);
      std::snprintf(line, sizeof(line), "%.9g,%.9g,%.6f\n", map.range_axis_m[r],
                    map.doppler_axis_hz[c], db);
      out << line;
    }
  }
}

void write_map_csv(const RangeDopplerMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_map_csv(map, out);
}

}  // namespace dwb::radar
