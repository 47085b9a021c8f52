#pragma once

#include <filesystem>
#include <string>

#include "tmfrac/model.hpp"

namespace tmfrac {

inline constexpr int kModelFormatVersion = 1;

/// Parse a model document. Structural problems throw ModelError; the result is
/// not validated. Weight lists whose sum is off by at most kWeightTolerance are
/// renormalized.
EnvironmentModel parse_model(const std::string& json_text);

/// parse_model followed by require_valid.
EnvironmentModel model_from_json(const std::string& json_text);

std::string model_to_json(const EnvironmentModel& model, int indent = 2);

EnvironmentModel load_model(const std::filesystem::path& path);
void save_model(const EnvironmentModel& model, const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

/// Write via a temporary sibling file and rename, so readers never see a partial file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tmfrac
