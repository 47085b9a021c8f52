#include "json_util.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "tmfrac/errors.hpp"
#include "tmfrac/model_io.hpp"

namespace tmfrac::cli {

json number(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
    return x;
}

double to_double(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "Infinity") return std::numeric_limits<double>::infinity();
        if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
        throw MissingArtifact("expected a number, found \"" + s + "\"");
    }
    if (!j.is_number()) throw MissingArtifact("expected a number");
    return j.get<double>();
}

json optional_index(const std::optional<std::size_t>& j) {
    if (!j) return "Infinity";
    return *j;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json read_artifact(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const MissingArtifact&) {
        throw;
    } catch (const std::exception& e) {
        throw MissingArtifact(path.string() + ": " + e.what());
    }
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw MissingArtifact(path.string() + " is not valid JSON: " + e.what());
    }
}

}  // namespace tmfrac::cli
