// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace aet {

/// Stage names accepted by run_stage, in pipeline order.
const std::vector<std::string>& stage_names();

/// Runs one pipeline stage from a flat JSON config and returns a summary of
/// what it wrote. Every stage writes `run.json` (tool, version, stage,
/// config, seed) into its output directory.
nlohmann::json run_stage(const std::string& stage, const nlohmann::json& config);

}  // namespace aet
