#pragma once

// Monte Carlo engine: survivor processes, flows, martingales, cube
// realizations, box counting and count-level branching simulation.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tmfrac/model.hpp"
#include "tmfrac/tree.hpp"

namespace tmfrac {

/// Z_{u,j}: descendants of u joined to it by an unbroken state-1 path, for
/// j = gen(u) .. depth.
std::vector<std::uint64_t> survivor_process(const SampledTree& tree, NodeId u);

struct FlowEstimate {
    double s = 0.0;
    std::size_t cut_depth = 0;
    double value = 0.0;
    bool is_upper_bound = true;
};

/// Truncated min-cut flow below u with cuts no deeper than `cut_depth`
/// (defaults to the tree depth). Children are summed in index order, then
/// capped at one.
FlowEstimate flow(const SampledTree& tree, double s, NodeId u, std::optional<std::size_t> cut_depth = std::nullopt);

/// Flow values for every cut depth gen(u) .. depth.
std::vector<double> flow_profile(const SampledTree& tree, double s, NodeId u);

/// W_{s,u,j} = Z_{s,u,j} / prod_{l=gen(u)}^{j-1} alpha_{s,l} for j = gen(u) .. depth.
/// Throws UndefinedNormalizer when a normalizing alpha vanishes.
std::vector<double> martingale_series(const SampledTree& tree, const EnvironmentModel& model, double s, NodeId u);

struct CubeSet {
    std::size_t generation = 0;
    int dim = 0;
    std::uint64_t side = 1;  // c_0 ... c_{j-1}
    std::vector<std::vector<std::uint64_t>> cubes;
};

/// Lattice coordinates of the state-1 generation-j cubes. Child slot k maps to
/// its row-major digits, first coordinate most significant.
CubeSet realize_cubes(const SampledTree& tree, const EnvironmentModel& model, std::size_t j);

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // row-major, 0 black, 255 white
};

Image render_2d(const SampledTree& tree, const EnvironmentModel& model, std::size_t j);
std::string to_pgm(const Image& image);

struct DimensionEstimate {
    std::size_t j_min = 0;
    std::size_t j_max = 0;
    std::size_t replicas = 0;
    std::size_t surviving = 0;
    double slope = 0.0;
    double std_error = 0.0;
    std::vector<double> replica_slopes;
    std::vector<double> mean_log_counts;  // over surviving replicas, j_min .. j_max
    std::vector<double> log_sides;        // log(c_0 ... c_{j-1}), j_min .. j_max
    double analytic_d_star = 0.0;
    std::vector<std::vector<std::uint64_t>> counts;  // #S_0 .. #S_depth per replica
};

/// Slope of log #S_j against log(c_0 ... c_{j-1}) over [ceil(depth/2), depth].
/// The counts #S_j are simulated on aggregated populations, which gives them
/// the same law as counting black cubes of sampled trees.
DimensionEstimate box_count(const EnvironmentModel& model, std::size_t depth, std::size_t replicas,
                            std::uint64_t seed, unsigned workers = 1);

struct BranchingSample {
    std::size_t start_generation = 0;
    std::vector<std::uint64_t> trajectory;  // Z_{j,0..N}
    std::vector<double> normed;             // W_{j,0..N}
};

/// Branching process in varying environment with offspring laws nu_{1,j+n},
/// simulated on aggregated counts.
BranchingSample branching_sample(const EnvironmentModel& model, std::size_t j, std::size_t generations,
                                 std::uint64_t seed);

struct FrequencyEstimate {
    std::size_t replicas = 0;
    std::size_t hits = 0;
    double frequency = 0.0;
    double std_error = 0.0;
};

/// Fraction of branching samples extinct by `generations`.
FrequencyEstimate branching_extinction(const EnvironmentModel& model, std::size_t j, std::size_t generations,
                                       std::size_t replicas, std::uint64_t seed, unsigned workers = 1);

struct EmptinessEstimate {
    std::size_t depth = 0;
    FrequencyEstimate estimate;
    /// Phi_J(f_J) - Phi_J(0); NaN when not computable.
    double residual = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/// Frequency of S_J being empty, simulated on aggregated counts.
EmptinessEstimate monte_carlo_emptiness(const EnvironmentModel& model, std::size_t depth, std::size_t replicas,
                                        std::uint64_t seed, unsigned workers = 1);

/// Phi_J(f_J) - Phi_J(0): the mass that can still die out after generation J.
/// NaN when the recursion divides by zero.
double truncation_residual(const EnvironmentModel& model, std::size_t depth);

struct ReplicaRecord {
    std::size_t tree_depth = 0;
    std::vector<std::uint64_t> counts;              // #S_j, j = 0 .. depth
    std::vector<double> flows;                      // flow with cut depth j <= tree_depth
    std::optional<std::vector<double>> martingale;  // W_{s,root,j}, j <= tree_depth
};

/// One replica: the tree is sampled as deep as `tree_budget` vertices allow,
/// and the counts are continued to `depth` on aggregated populations started
/// from the tree's last generation.
ReplicaRecord simulate_replica(const EnvironmentModel& model, std::size_t depth, double s, std::uint64_t seed,
                               std::size_t tree_budget = kDefaultNodeBudget);

/// Seed of replica r in a run seeded with `seed`.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t r);

}  // namespace tmfrac
