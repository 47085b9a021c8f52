#pragma once

// Dyadic case: d = 1 and two children per vertex at every generation.

#include <optional>
#include <string>
#include <vector>

#include "tmfrac/model.hpp"

namespace tmfrac {

struct BinaryCaseReport {
    /// eta_j = 1 - nu_{0,j}((0,0)), gamma_j = expected number of state-1 children
    /// of a state-1 vertex, varsigma_j the series part of the upper sigma bound.
    std::vector<double> eta;
    std::vector<double> gamma;
    std::vector<double> varsigma;
    std::optional<std::size_t> j_underline;
    double d_star = 0.0;

    /// 0 when d_* < 0, 1..3 for the matching case, -1 when no case applies.
    int case_id = -1;
    std::optional<std::size_t> j_star;
    /// Known value of P(Theta empty), when the case determines it.
    std::optional<double> probability;
    std::optional<bool> positive;       // P > 0
    std::optional<bool> less_than_one;  // P < 1
    std::string verdict;
};

/// Throws WrongShape unless d = 1 and m_j = 2 for every j.
BinaryCaseReport binary_case(const EnvironmentModel& model, std::size_t table_size = 21);

}  // namespace tmfrac
