#pragma once

// Closed-form quantities of the construction: the Moran-type sums alpha, the
// dimension threshold d_*, the offspring generating functions phi, the
// extinction probabilities f_j, the generating functions Phi_j of #S_j, the
// sigma bounds and the emptiness criteria.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmfrac/model.hpp"
#include "tmfrac/stage_math.hpp"

namespace tmfrac {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kRootTolerance = 1e-9;
inline constexpr double kFixedPointTolerance = 1e-12;
inline constexpr std::size_t kCompositionDepthCap = 10000;

/// Period products whose log lies within this of zero are treated as critical.
inline constexpr double kCriticalLogTolerance = 1e-12;

/// Stage-level data for generations 0 .. horizon-1, built once per model.
class StageTable {
public:
    explicit StageTable(const EnvironmentModel& model);

    const EnvironmentModel& model() const { return *model_; }
    std::size_t prefix_length() const { return prefix_; }
    std::size_t period() const { return period_; }

    /// Slot of generation j in the horizon-sized tables.
    std::size_t slot(std::size_t j) const { return j < prefix_ ? j : prefix_ + (j - prefix_) % period_; }

    const StageSpec& stage(std::size_t j) const { return model_->stage(j); }
    const CountLaw& law(int t, std::size_t j) const { return t == 0 ? law0_[slot(j)] : law1_[slot(j)]; }
    int m(std::size_t j) const { return stage(j).m; }

    /// log(m_0 ... m_{j-1}).
    double log_count(std::size_t j) const;

    /// Generations whose stages cover every stage reachable from j onward:
    /// j .. max(j, L) - 1 followed by one full tail period.
    std::vector<std::size_t> reachable_from(std::size_t j) const;

private:
    const EnvironmentModel* model_;
    std::size_t prefix_;
    std::size_t period_;
    std::vector<CountLaw> law0_;
    std::vector<CountLaw> law1_;
};

double alpha(const EnvironmentModel& model, double s, std::size_t j);

/// Least j0 with alpha_{0,j} > 0 for all j >= j0; nullopt stands for +infinity.
std::optional<std::size_t> j_underline(const EnvironmentModel& model);

struct RhoEvaluation {
    double s = 0.0;
    double value = 0.0;  // -inf when j_underline is infinite
    bool exact = true;
    std::size_t horizon = 0;  // truncation horizon, 0 in exact mode
    std::optional<std::size_t> j_underline;
};

/// Exact mode averages log alpha over one tail period. With a horizon, the
/// running minimum of the partial averages up to that horizon is returned instead.
RhoEvaluation rho(const EnvironmentModel& model, double s, std::optional<std::size_t> horizon = std::nullopt);

struct DStarResult {
    double value = -kInf;
    std::optional<std::size_t> j_underline;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    /// (j, d_j): zero of s -> sum_{n=j_underline}^{j-1} log alpha_{s,n}.
    std::vector<std::pair<std::size_t, double>> d_j;
    std::string d_j_convention;
};

DStarResult d_star(const EnvironmentModel& model, double tol = kRootTolerance, std::size_t d_j_max = 20);

double phi(const EnvironmentModel& model, int t, std::size_t j, double z);
double phi_prime_at_one(const EnvironmentModel& model, int t, std::size_t j);
double phi_second_at_one(const EnvironmentModel& model, int t, std::size_t j);

struct FEntry {
    std::size_t j = 0;
    double f = 0.0;
    double error_bound = 0.0;
};

std::vector<FEntry> f_sequence(const EnvironmentModel& model, std::size_t j_max,
                               std::size_t depth = kCompositionDepthCap, double tol = kFixedPointTolerance);

/// phi_{1,j} o ... o phi_{1,j+n}(0) for n = 0 .. depth-1, evaluated from scratch for each n.
std::vector<double> f_iterates(const EnvironmentModel& model, std::size_t j, std::size_t depth);

/// f_j = 0 exactly, i.e. phi_{1,n}(0) = 0 for every n >= j.
bool f_is_zero(const EnvironmentModel& model, std::size_t j);

/// f_j > 0 for every j.
bool f_positive_everywhere(const EnvironmentModel& model);

/// Phi_j(z) = E[z^{#S_j}] by the downward recursion, in log space.
double phi_big(const EnvironmentModel& model, std::size_t j, double z);
double phi_big(const StageTable& table, std::size_t j, double z);

/// True when some generation-j vertex can be in state 1, i.e. Phi_j(0) < 1.
bool state_one_reachable(const EnvironmentModel& model, std::size_t j);

struct SigmaBounds {
    double lower = 1.0;  // sigma underline
    double upper = kInf;  // sigma overline
    double lower_series = 0.0;
    double upper_series = 0.0;
    double limsup_term = 0.0;
    double liminf_term = 0.0;
};

SigmaBounds sigma_bounds(const EnvironmentModel& model, std::size_t j);
SigmaBounds sigma_bounds(const StageTable& table, std::size_t j);

enum class EmptinessMethod { DimensionNegative, ClosedFormProduct, DecreasingLimit, Undetermined };

std::string to_string(EmptinessMethod m);

struct EmptinessResult {
    double probability = 0.0;
    double error_bound = 0.0;
    EmptinessMethod method = EmptinessMethod::Undetermined;
    std::optional<std::size_t> j_star;
    /// (j, Phi_j(f_j)); NaN where the recursion divides by zero.
    std::vector<std::pair<std::size_t, double>> phi_f_sequence;
    bool division_by_zero = false;
};

enum class EmptinessRoute { Auto, Limit };

EmptinessResult emptiness_probability(const EnvironmentModel& model, std::size_t j_max = 20,
                                      double tol = kFixedPointTolerance, EmptinessRoute route = EmptinessRoute::Auto);

enum class Verdict { Holds, Fails, Inconclusive };

std::string to_string(Verdict v);

struct CriterionVerdict {
    Verdict verdict = Verdict::Inconclusive;
    bool sufficient = false;
    bool necessary = true;
};

/// Positive-probability emptiness test. Throws PreconditionUnmet unless
/// d_* >= 0 and f_j > 0 for every j.
CriterionVerdict classify_positive_empty_probability(const EnvironmentModel& model);

/// Almost-sure emptiness test, same preconditions.
CriterionVerdict classify_almost_surely_empty(const EnvironmentModel& model);

struct VarsigmaResult {
    double value = kInf;
    double bound = 1.0;  // 1 - 1/value
};

/// Upper bound on the probability that the s-flow vanishes. Throws
/// OutOfRange unless 0 < s < d_*.
VarsigmaResult varsigma_s(const EnvironmentModel& model, double s, std::size_t j);

/// Same series without the range check on s.
double varsigma_series(const EnvironmentModel& model, double s, std::size_t j);

/// Root of sum_k r_k^s = 1.
double moran_exponent(const std::vector<double>& ratios, double tol = kRootTolerance);

}  // namespace tmfrac
