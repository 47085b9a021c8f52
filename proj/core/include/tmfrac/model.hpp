#pragma once

// Environment model: the generation-dependent branching factors, ratio laws and
// state-transition kernels of a tree-indexed Markov chain, stored as a finite
// prefix followed by a constant or periodic tail.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tmfrac {

inline constexpr double kWeightTolerance = 1e-12;
inline constexpr std::size_t kMaxMaterializedAtoms = std::size_t{1} << 20;

using StateVector = std::vector<std::uint8_t>;
using RatioVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Ratio laws (distribution of the child contraction-ratio vector)
// ---------------------------------------------------------------------------

struct PointMassRatios {
    RatioVector ratios;
    bool operator==(const PointMassRatios&) const = default;
};

struct WeightedRatios {
    RatioVector ratios;
    double weight = 0.0;
    bool operator==(const WeightedRatios&) const = default;
};

struct DiscreteRatios {
    std::vector<WeightedRatios> atoms;
    bool operator==(const DiscreteRatios&) const = default;
};

/// Finite discrete law on (0,1) used for one coordinate of a ProductRatios law.
struct ScalarLaw {
    std::vector<double> values;
    std::vector<double> weights;
    bool operator==(const ScalarLaw&) const = default;
};

/// Independent coordinates, one ScalarLaw each.
struct ProductRatios {
    std::vector<ScalarLaw> coords;
    bool operator==(const ProductRatios&) const = default;
};

using RatioLaw = std::variant<PointMassRatios, DiscreteRatios, ProductRatios>;

// ---------------------------------------------------------------------------
// Transition laws on {0,1}^m
// ---------------------------------------------------------------------------

/// Every child independently in state 1 with probability p.
struct ProductBernoulli {
    double p = 0.0;
    bool operator==(const ProductBernoulli&) const = default;
};

/// Exactly `count` children in state 1, positions uniform.
struct Microcanonical {
    int count = 0;
    bool operator==(const Microcanonical&) const = default;
};

struct WeightedStates {
    StateVector states;
    double weight = 0.0;
    bool operator==(const WeightedStates&) const = default;
};

struct DiscreteStates {
    std::vector<WeightedStates> atoms;
    bool operator==(const DiscreteStates&) const = default;
};

using TransitionLaw = std::variant<ProductBernoulli, Microcanonical, DiscreteStates>;

// ---------------------------------------------------------------------------
// Joint law of (child states, child ratios)
// ---------------------------------------------------------------------------

struct JointAtom {
    StateVector states;
    RatioVector ratios;
    double weight = 0.0;
    bool operator==(const JointAtom&) const = default;
};

struct JointLaw {
    std::vector<JointAtom> atoms;
    bool operator==(const JointLaw&) const = default;
};

// ---------------------------------------------------------------------------
// Stages and the tail rule
// ---------------------------------------------------------------------------

/// States and ratios independent: ratio law plus one transition law per parent state.
struct SeparatedKernels {
    RatioLaw ratios;
    TransitionLaw from0;
    TransitionLaw from1;
    bool operator==(const SeparatedKernels&) const = default;
};

struct JointKernels {
    JointLaw from0;
    JointLaw from1;
    bool operator==(const JointKernels&) const = default;
};

struct StageSpec {
    int m = 2;
    std::variant<SeparatedKernels, JointKernels> kernels;

    bool is_joint() const { return std::holds_alternative<JointKernels>(kernels); }
    bool operator==(const StageSpec&) const = default;
};

struct ConstantTail {
    StageSpec stage;
    bool operator==(const ConstantTail&) const = default;
};

struct PeriodicTail {
    std::vector<StageSpec> stages;
    bool operator==(const PeriodicTail&) const = default;
};

using TailRule = std::variant<ConstantTail, PeriodicTail>;

// ---------------------------------------------------------------------------
// Optional geometric realization
// ---------------------------------------------------------------------------

/// Cube [0,1]^d cut into c_j^d subcubes at generation j. Side lists follow the
/// prefix/tail layout of the stages.
struct CubeSubdivision {
    std::vector<int> prefix_sides;
    std::vector<int> tail_sides;
    bool operator==(const CubeSubdivision&) const = default;
};

/// Binary splitting of an interval at a random point: children [a, a+Y(b-a)] and [a+Y(b-a), b].
struct IntervalSplit {
    bool operator==(const IntervalSplit&) const = default;
};

using GeometryRule = std::variant<CubeSubdivision, IntervalSplit>;

// ---------------------------------------------------------------------------

struct EnvironmentModel {
    double initial_one_prob = 1.0;
    int ambient_dim = 1;
    std::vector<StageSpec> prefix;
    TailRule tail;
    std::optional<GeometryRule> geometry;

    /// Stage governing generation j (prefix lookup, then the tail).
    const StageSpec& stage(std::size_t j) const;

    std::size_t prefix_length() const { return prefix.size(); }
    std::size_t period() const;

    /// prefix_length() + period(): enough generations to see every distinct stage.
    std::size_t horizon() const { return prefix_length() + period(); }

    /// Subdivision side c_j for cube geometry; throws WrongGeometry otherwise.
    int cube_side(std::size_t j) const;

    bool operator==(const EnvironmentModel&) const = default;
};

struct Violation {
    std::string path;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

ValidationReport validate(const EnvironmentModel& model);

/// Throws ModelError listing every violation when validation fails.
void require_valid(const EnvironmentModel& model);

/// Canonical joint measure of the kernel used from parent state t.
/// Separated stages are materialized as the product measure; refuses with
/// BudgetExceeded above `max_atoms` atoms. Zero-weight atoms are dropped.
JointLaw as_joint(const StageSpec& stage, int t, std::size_t max_atoms = kMaxMaterializedAtoms);

/// Atom list of a transition law on {0,1}^m (zero weights dropped).
std::vector<WeightedStates> state_atoms(const TransitionLaw& law, int m,
                                        std::size_t max_atoms = kMaxMaterializedAtoms);

/// Atom list of a ratio law (zero weights dropped).
std::vector<WeightedRatios> ratio_atoms(const RatioLaw& law,
                                        std::size_t max_atoms = kMaxMaterializedAtoms);

/// True when the state-0 kernel of the stage puts all mass on the zero vector.
bool zero_state_absorbing(const StageSpec& stage);

}  // namespace tmfrac
