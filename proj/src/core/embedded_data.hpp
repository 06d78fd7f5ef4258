// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

// Contents of data/db45.txt and data/colormap_bgy256.csv, compiled in.
namespace aet::embedded {
std::string_view db45_text();
std::string_view colormap_text();
}  // namespace aet::embedded
