// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace aet {

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::array<std::uint8_t, 3> color{31, 119, 180};
};

struct PlotOptions {
  std::size_t width = 640;
  std::size_t height = 420;
  /// Fixed y range; ignored when y_min >= y_max.
  double y_min = 0.0;
  double y_max = 1.0;
  bool markers = true;
};

/// Renders line series onto white RGB pixels with axes and numeric ticks.
std::vector<std::uint8_t> render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& options = {});
void write_line_plot_png(const std::string& path, const std::vector<PlotSeries>& series,
                         const PlotOptions& options = {});

}  // namespace aet
