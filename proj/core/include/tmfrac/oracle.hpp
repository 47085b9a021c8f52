#pragma once

// Brute-force verifiers for tiny instances. Everything here enumerates every
// outcome of the complete tree without pruning or merging.

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "tmfrac/model.hpp"
#include "tmfrac/tree.hpp"

namespace tmfrac {

struct EnumerationBudget {
    std::size_t max_outcomes = std::size_t{1} << 22;
};

/// E[z^{#S_j}] summed over every assignment of the transition draws up to generation j.
double exact_generating_function(const EnvironmentModel& model, std::size_t j, double z,
                                 EnumerationBudget budget = {});

/// Law of #S_j by the same enumeration.
std::map<std::uint64_t, double> exact_count_distribution(const EnvironmentModel& model, std::size_t j,
                                                         EnumerationBudget budget = {});

/// P(Z_{j,J-j} = 0) for the branching process started by one vertex at
/// generation j, by exact convolution of offspring laws read off the
/// state-1 kernels.
double exact_extinction_by(const EnvironmentModel& model, std::size_t j, std::size_t big_j,
                           EnumerationBudget budget = {});

struct MinCutOutcome {
    double probability = 0.0;
    double value = 0.0;
    /// Minimizing cut; empty when every branch dies before the cut depth.
    std::vector<NodeId> best_cut;
    std::size_t cuts_examined = 0;
    /// Complete tree of the outcome, every vertex above the cut depth expanded.
    SampledTree tree;
};

struct MinCutResult {
    std::vector<MinCutOutcome> outcomes;
    /// value -> probability
    std::map<double, double> distribution;
};

/// Every outcome to depth J and, per outcome, the minimum weight over every
/// cut of the root's surviving subtree. A cut's weight is evaluated below each
/// vertex by summing children in index order.
MinCutResult exact_min_cut(const EnvironmentModel& model, double s, std::size_t big_j,
                           EnumerationBudget budget = {});

}  // namespace tmfrac
