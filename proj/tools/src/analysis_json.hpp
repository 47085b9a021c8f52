#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json_util.hpp"
#include "tmfrac/model.hpp"

namespace tmfrac::cli {

struct AnalyzeOptions {
    std::size_t horizon = 20;
    double tol = 1e-9;
    /// Enables the Monte Carlo fallback when the Phi recursion divides by zero.
    std::optional<std::uint64_t> seed;
    std::size_t replicas = 10000;
    unsigned workers = 1;
};

/// The full analytic report of a model.
json analyze_model(const EnvironmentModel& model, const AnalyzeOptions& options);

/// Cross-checks over an analysis artifact and the optional simulation and
/// dimension artifacts (null when absent).
json cross_checks(const json& analysis, const json& simulation, const json& dimension);

}  // namespace tmfrac::cli
