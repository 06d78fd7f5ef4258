// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aet {

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // height x width x 3
};

void write_png_rgb(const std::string& path, std::size_t width, std::size_t height,
                   const std::vector<std::uint8_t>& pixels);
/// Reads an 8-bit RGB PNG; other colour types are rejected.
RgbImage read_png_rgb(const std::string& path);

}  // namespace aet
