#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace tmfrac::cli {

using nlohmann::json;

/// JSON has no infinities: they become the strings "Infinity" / "-Infinity",
/// NaN becomes null.
json number(double x);
/// Inverse of number(); null maps to NaN.
double to_double(const json& j);

json optional_index(const std::optional<std::size_t>& j);

/// "%.17g": shortest form that round-trips and does not depend on locale.
std::string format_double(double x);

/// Reads and parses a JSON artifact. Missing or unparsable files throw MissingArtifact.
json read_artifact(const std::filesystem::path& path);

}  // namespace tmfrac::cli
