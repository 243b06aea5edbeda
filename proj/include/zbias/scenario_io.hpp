#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "zbias/scenario.hpp"

namespace zbias {

/// Parse scenario-file text (`key = value` lines, `#` comments).
///
/// The `kind` key selects binary, discrete, potential_outcomes or
/// covariate_family. The returned scenario has passed validate().
/// Throws ParseError on syntax problems and ValidationError on
/// invariant violations.
AnyScenario parse_scenario(std::string_view text);

/// Read and parse a scenario file; throws IoError if it cannot be read.
AnyScenario load_scenario(const std::filesystem::path& path);

/// Render a scenario in the file format accepted by parse_scenario.
/// Numbers use the shortest decimal form that round-trips exactly.
std::string serialize(const AnyScenario& scenario);

/// Shortest round-trip decimal rendering of a double.
std::string format_shortest(double x);

}  // namespace zbias
