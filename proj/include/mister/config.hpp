#pragma once

#include "mister/pipeline.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mister {

/// Parses `key = value` lines with `#` comments. Absent keys keep the
/// defaults of the selected factor; `factor_override` wins over any `factor`
/// line. Unknown keys and malformed values are rejected with their line
/// number, invariant violations with the key they concern.
PipelineConfig parse_config(const std::string& text, std::optional<int> factor_override = std::nullopt);
PipelineConfig load_config(const std::string& path, std::optional<int> factor_override = std::nullopt);

/// Every key with its effective value, one per line; parse_config reads it
/// back to an identical config.
std::string format_config(const PipelineConfig& cfg);

/// All keys accepted by parse_config, in format_config order.
std::vector<std::string> config_keys();

}  // namespace mister
