#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "steerfair/common.hpp"

namespace steerfair {

/// One bar panel: a titled series of labeled bars.
struct BarPanel {
  std::string title;
  std::vector<std::string> labels;
  std::vector<std::optional<double>> values;  // absent bars are drawn hatched-out
};

/// Writes a row of bar panels as a static SVG figure. Qualitative output:
/// orderings and relative magnitudes, not a pixel-faithful reproduction.
inline void write_bar_figure(const std::filesystem::path& path,
                             const std::vector<BarPanel>& panels) {
  const double panel_w = 260.0, panel_h = 220.0, margin = 44.0, gap = 24.0;
  const double width = margin + panels.size() * (panel_w + gap);
  const double height = panel_h + 2.0 * margin + 30.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open plot file: " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  static const char* palette[] = {"#4878cf", "#ee854a", "#6acc65", "#d65f5f",
                                  "#956cb4", "#8c613c"};

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const BarPanel& panel = panels[p];
    const double x0 = margin + p * (panel_w + gap);
    const double y0 = margin;
    double vmax = 1e-12;
    for (const auto& v : panel.values)
      if (v) vmax = std::max(vmax, std::abs(*v));
    vmax *= 1.1;

    out << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << panel.title << "</text>\n";
    // axes
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\""
        << y0 + panel_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << x0 << "\" y1=\"" << y0 + panel_h << "\" x2=\""
        << x0 + panel_w << "\" y2=\"" << y0 + panel_h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x0 - 4 << "\" y=\"" << y0 + 8
        << "\" text-anchor=\"end\" font-size=\"9\">" << vmax << "</text>\n";

    const std::size_t n = panel.labels.size();
    const double slot = panel_w / std::max<std::size_t>(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double bx = x0 + i * slot + 0.15 * slot;
      const double bw = 0.7 * slot;
      if (panel.values[i]) {
        const double h = std::min(1.0, std::abs(*panel.values[i]) / vmax) * panel_h;
        out << "<rect x=\"" << bx << "\" y=\"" << y0 + panel_h - h << "\" width=\"" << bw
            << "\" height=\"" << h << "\" fill=\"" << palette[i % 6] << "\"/>\n";
      } else {
        out << "<text x=\"" << bx + bw / 2 << "\" y=\"" << y0 + panel_h - 6
            << "\" text-anchor=\"middle\" font-size=\"9\">n/a</text>\n";
      }
      out << "<text x=\"" << bx + bw / 2 << "\" y=\"" << y0 + panel_h + 14
          << "\" text-anchor=\"middle\" font-size=\"9\" transform=\"rotate(30 "
          << bx + bw / 2 << ' ' << y0 + panel_h + 14 << ")\">" << panel.labels[i]
          << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace steerfair
