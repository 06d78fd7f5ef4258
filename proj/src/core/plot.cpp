// SPDX-License-Identifier: Apache-2.0
#include "core/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "core/common.hpp"
#include "core/image_io.hpp"

namespace aet {

namespace {

// 3x5 glyphs for 0-9, '.', '-'; bit 2 is the left column.
constexpr std::uint8_t kGlyphs[12][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1}, {7, 4, 7, 1, 7},
    {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}, {0, 0, 0, 0, 2}, {0, 0, 7, 0, 0},
};

struct Canvas {
  std::size_t w, h;
  std::vector<std::uint8_t> px;

  Canvas(std::size_t width, std::size_t height) : w(width), h(height), px(width * height * 3, 255) {}

  void set(long x, long y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) return;
    auto* p = &px[(static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void line(long x0, long y0, long x1, long y1, std::array<std::uint8_t, 3> c) {
    const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
      set(x0, y0, c);
      if (x0 == x1 && y0 == y1) break;
      const long e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void text(long x, long y, const std::string& s, std::array<std::uint8_t, 3> c, int scale = 2) {
    for (char ch : s) {
      int g = -1;
      if (ch >= '0' && ch <= '9') g = ch - '0';
      if (ch == '.') g = 10;
      if (ch == '-') g = 11;
      if (g >= 0) {
        for (int r = 0; r < 5; ++r) {
          for (int col = 0; col < 3; ++col) {
            if (!(kGlyphs[g][r] & (4 >> col))) continue;
            for (int a = 0; a < scale; ++a) {
              for (int b = 0; b < scale; ++b) set(x + col * scale + a, y + r * scale + b, c);
            }
          }
        }
      }
      x += 4 * scale;
    }
  }
};

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> render_line_plot(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  if (options.width < 120 || options.height < 80) fail(ErrorCode::invalid_argument, "plot too small");
  Canvas cv(options.width, options.height);
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) fail(ErrorCode::invalid_argument, "series '" + s.name + "' has ragged x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (options.y_min < options.y_max) y_lo = options.y_min, y_hi = options.y_max;
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) y_hi = y_lo + 1;

  const long left = 70, right = static_cast<long>(options.width) - 20;
  const long top = 20, bottom = static_cast<long>(options.height) - 40;
  const std::array<std::uint8_t, 3> black{0, 0, 0}, grid{220, 220, 220};
  auto px = [&](double x) { return left + std::lround((x - x_lo) / (x_hi - x_lo) * static_cast<double>(right - left)); };
  auto py = [&](double y) { return bottom - std::lround((y - y_lo) / (y_hi - y_lo) * static_cast<double>(bottom - top)); };

  for (int t = 0; t <= 4; ++t) {
    const double yv = y_lo + (y_hi - y_lo) * t / 4.0;
    const double xv = x_lo + (x_hi - x_lo) * t / 4.0;
    cv.line(left, py(yv), right, py(yv), grid);
    cv.line(px(xv), top, px(xv), bottom, grid);
    cv.text(8, py(yv) - 5, tick_label(yv), black);
    const auto xl = tick_label(xv);
    cv.text(px(xv) - static_cast<long>(xl.size()) * 4, bottom + 10, xl, black);
  }
  cv.line(left, top, left, bottom, black);
  cv.line(left, bottom, right, bottom, black);

  for (const auto& s : series) {
    bool have_prev = false;
    long prev_x = 0, prev_y = 0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        have_prev = false;
        continue;
      }
      const long x = px(s.x[i]);
      const long y = py(std::clamp(s.y[i], y_lo, y_hi));
      if (have_prev) {
        cv.line(prev_x, prev_y, x, y, s.color);
        cv.line(prev_x, prev_y + 1, x, y + 1, s.color);
      }
      if (options.markers) {
        for (long a = -2; a <= 2; ++a) {
          for (long b = -2; b <= 2; ++b) cv.set(x + a, y + b, s.color);
        }
      }
      have_prev = true;
      prev_x = x;
      prev_y = y;
    }
  }
  return std::move(cv.px);
}

void write_line_plot_png(const std::string& path, const std::vector<PlotSeries>& series, const PlotOptions& options) {
  write_png_rgb(path, options.width, options.height, render_line_plot(series, options));
}

}  // namespace aet
