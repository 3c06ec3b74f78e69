#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dwb/errors.hpp"

namespace dwb::plot {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
  const double width = 800.0;
  const double height = 560.0;
  const double ml = 72.0, mr = 24.0, mt = 44.0, mb = 58.0;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (double v : s.x) {
      if (std::isfinite(v)) {
        x_min = std::min(x_min, v);
        x_max = std::max(x_max, v);
      }
    }
    for (double v : s.y) {
      if (std::isfinite(v)) {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
    }
  }
  if (!std::isfinite(x_min) || !std::isfinite(y_min)) {
    x_min = 0.0;
    x_max = 1.0;
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= y_min) y_max = y_min + 1.0;
  const double y_pad = 0.05 * (y_max - y_min);
  y_min -= y_pad;
  y_max += y_pad;

  auto sx = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double v) { return mt + ph - (v - y_min) / (y_max - y_min) * ph; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw dwb::IoError("cannot open " + path + " for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"26\" font-family=\"sans-serif\" "
      << "font-size=\"16\" text-anchor=\"middle\">" << title << "</text>\n";

  const int n_xticks = 6;
  const int n_yticks = 6;
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= n_xticks; ++i) {
    const double v = x_min + (x_max - x_min) * i / n_xticks;
    const double px = sx(v);
    out << "<line x1=\"" << px << "\" y1=\"" << mt << "\" x2=\"" << px << "\" y2=\""
        << mt + ph << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
  }
  for (int i = 0; i <= n_yticks; ++i) {
    const double v = y_min + (y_max - y_min) * i / n_yticks;
    const double py = sy(v);
    out << "<line x1=\"" << ml << "\" y1=\"" << py << "\" x2=\"" << ml + pw
        << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  out << "</g>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label
      << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.6\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) out << " ";
      out << fmt(sx(s.x[i])) << "," << fmt(std::clamp(sy(s.y[i]), mt, mt + ph));
      first = false;
    }
    out << "\"/>\n";
    const double ly = mt + 16 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw - 122 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << ml + pw - 116 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace dwb::plot
