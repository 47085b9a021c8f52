#include "tmfrac/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "tmfrac/errors.hpp"
#include "tmfrac/root_finding.hpp"

namespace tmfrac {

namespace {

constexpr double kNegInf = -kInf;
constexpr double kBracketLo = -64.0;
constexpr double kBracketHi = 64.0;

// sum_{n >= j} c_n / prod_{l=j}^{n} g_l together with the lim inf and lim sup
// of 1 / prod_{l=j}^{n} g_l, evaluated exactly over the periodic tail.
struct PeriodicSeries {
    double series = 0.0;
    double liminf = 0.0;
    double limsup = 0.0;
};

PeriodicSeries periodic_series(const StageTable& t, std::size_t j, const std::function<double(std::size_t)>& c,
                               const std::function<double(std::size_t)>& g) {
    const std::size_t L = t.prefix_length();
    const std::size_t P = t.period();
    for (std::size_t n : t.reachable_from(j)) {
        if (g(n) <= 0.0) return {kInf, kInf, kInf};
    }

    double prod = 1.0;
    double sum = 0.0;
    for (std::size_t n = j; n < L; ++n) {
        prod *= g(n);
        sum += c(n) / prod;
    }

    const std::size_t n0 = std::max(j, L);
    double block = 0.0;
    double q = 1.0;
    std::vector<double> partial(P);
    for (std::size_t i = 0; i < P; ++i) {
        q *= g(n0 + i);
        block += c(n0 + i) / q;
        partial[i] = q;
    }
    const double log_g = std::log(q);
    const bool critical = std::abs(log_g) <= kCriticalLogTolerance;

    PeriodicSeries out;
    if (block == 0.0) {
        out.series = sum;
    } else if (critical || q < 1.0) {
        out.series = kInf;
    } else {
        out.series = sum + block / (prod * (1.0 - 1.0 / q));
    }

    if (critical) {
        double lo = kInf;
        double hi = 0.0;
        for (double pp : partial) {
            double v = 1.0 / (prod * pp);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.liminf = lo;
        out.limsup = hi;
    } else if (q > 1.0) {
        out.liminf = out.limsup = 0.0;
    } else {
        out.liminf = out.limsup = kInf;
    }
    return out;
}

bool f_is_zero(const StageTable& t, std::size_t j) {
    for (std::size_t n : t.reachable_from(j)) {
        if (t.law(1, n).can_be_zero()) return false;
    }
    return true;
}

double sigma_gap(const StageTable& t, std::size_t j) {
    auto sb = sigma_bounds(t, j);
    double lower_f = 1.0 - 1.0 / sb.lower;
    double upper_f = sb.upper == kInf ? 1.0 : 1.0 - 1.0 / sb.upper;
    return std::max(0.0, upper_f - lower_f);
}

// M * log(value) where M = exp(log_count), with log(value) == 0 kept exact.
double scaled_log(double log_count, double log_value) {
    if (log_value == 0.0) return 0.0;
    if (log_value == kNegInf) return kNegInf;
    return std::exp(log_count) * log_value;
}

double rho_exact(const StageTable& t, double s) {
    const std::size_t L = t.prefix_length();
    const std::size_t P = t.period();
    double acc = 0.0;
    for (std::size_t i = 0; i < P; ++i) acc += std::log(stage_alpha(t.stage(L + i), s));
    return acc / static_cast<double>(P);
}

struct FTable {
    std::vector<double> f;
    std::vector<double> err;
};

FTable compute_f(const StageTable& t, std::size_t j_max, std::size_t depth, double tol) {
    const std::size_t L = t.prefix_length();
    const std::size_t P = t.period();
    const std::size_t n_total = std::max(j_max + 1, L + P + 1);
    FTable out{std::vector<double>(n_total), std::vector<double>(n_total)};

    std::vector<double> phase(P, 0.0);
    std::vector<double> phase_err(P, 0.0);
    if (f_is_zero(t, L)) {
        // phase stays 0
    } else if (sigma_bounds(t, L).lower == kInf) {
        std::fill(phase.begin(), phase.end(), 1.0);
    } else {
        auto psi = [&](double x) {
            for (std::size_t i = P; i-- > 0;) x = t.law(1, L + i).pgf(x);
            return x;
        };
        double x = 0.0;
        double diff = 0.0;
        double prev_diff = -1.0;
        double ratio = -1.0;
        for (std::size_t compositions = 0;;) {
            double y = psi(x);
            compositions += P;
            diff = y - x;
            x = y;
            if (prev_diff > 0.0) ratio = diff / prev_diff;
            prev_diff = diff;
            if (diff < tol || compositions >= depth) break;
        }
        double estimate = kInf;
        if (diff <= 0.0) {
            estimate = 0.0;
        } else if (ratio >= 0.0 && ratio < 1.0) {
            estimate = std::max(diff, diff * ratio / (1.0 - ratio));
        }
        phase[0] = x;
        phase_err[0] = std::min(estimate, sigma_gap(t, L));
        double next = phase[0];
        double next_err = phase_err[0];
        for (std::size_t r = P; r-- > 1;) {
            const auto& law = t.law(1, L + r);
            phase[r] = law.pgf(next);
            phase_err[r] = std::min(law.pgf_derivative(std::min(1.0, next + next_err)) * next_err, sigma_gap(t, L + r));
            next = phase[r];
            next_err = phase_err[r];
        }
    }

    for (std::size_t j = L; j < n_total; ++j) {
        out.f[j] = phase[(j - L) % P];
        out.err[j] = phase_err[(j - L) % P];
    }
    for (std::size_t j = L; j-- > 0;) {
        if (f_is_zero(t, j)) {
            out.f[j] = 0.0;
            out.err[j] = 0.0;
        } else if (sigma_bounds(t, j).lower == kInf) {
            out.f[j] = 1.0;
            out.err[j] = 0.0;
        } else {
            const auto& law = t.law(1, j);
            out.f[j] = law.pgf(out.f[j + 1]);
            double e = law.pgf_derivative(std::min(1.0, out.f[j + 1] + out.err[j + 1])) * out.err[j + 1];
            out.err[j] = std::min(e, sigma_gap(t, j));
        }
    }
    return out;
}

std::optional<std::size_t> j_underline(const StageTable& t) {
    const std::size_t L = t.prefix_length();
    for (std::size_t i = 0; i < t.period(); ++i) {
        if (!(stage_alpha(t.stage(L + i), 0.0) > 0.0)) return std::nullopt;
    }
    std::size_t j0 = L;
    while (j0 > 0 && stage_alpha(t.stage(j0 - 1), 0.0) > 0.0) --j0;
    return j0;
}

DStarResult d_star(const StageTable& t, double tol, std::size_t d_j_max) {
    DStarResult out;
    out.j_underline = j_underline(t);
    out.d_j_convention =
        "d_j is the zero of s -> sum_{n=j_underline}^{j-1} log alpha_{s,n}; dividing the sum by j or by "
        "j - j_underline does not move the zero";
    if (!out.j_underline) return out;
    const std::size_t ju = *out.j_underline;

    auto r = bisect_decreasing([&](double s) { return rho_exact(t, s); }, kBracketLo, kBracketHi, tol);
    out.value = r.root;
    out.bracket_lo = r.lo;
    out.bracket_hi = r.hi;

    // generations ju .. j-1 grouped by slot, so each evaluation costs one alpha per distinct stage
    std::vector<double> multiplicity(t.prefix_length() + t.period(), 0.0);
    for (std::size_t j = ju + 1; j <= d_j_max; ++j) {
        multiplicity[t.slot(j - 1)] += 1.0;
        auto partial = [&](double s) {
            double acc = 0.0;
            for (std::size_t k = 0; k < multiplicity.size(); ++k) {
                if (multiplicity[k] > 0.0) acc += multiplicity[k] * std::log(stage_alpha(t.stage(k), s));
            }
            return acc;
        };
        out.d_j.emplace_back(j, bisect_decreasing(partial, kBracketLo, kBracketHi, tol).root);
    }
    return out;
}

}  // namespace

StageTable::StageTable(const EnvironmentModel& model)
    : model_(&model), prefix_(model.prefix_length()), period_(model.period()) {
    const std::size_t h = model.horizon();
    for (std::size_t j = 0; j < h; ++j) {
        law0_.push_back(count_law(model.stage(j), 0));
        law1_.push_back(count_law(model.stage(j), 1));
    }
}

double StageTable::log_count(std::size_t j) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < j; ++i) acc += std::log(static_cast<double>(m(i)));
    return acc;
}

std::vector<std::size_t> StageTable::reachable_from(std::size_t j) const {
    std::vector<std::size_t> out;
    for (std::size_t n = j; n < prefix_; ++n) out.push_back(n);
    const std::size_t n0 = std::max(j, prefix_);
    for (std::size_t i = 0; i < period_; ++i) out.push_back(n0 + i);
    return out;
}

double alpha(const EnvironmentModel& model, double s, std::size_t j) { return stage_alpha(model.stage(j), s); }

std::optional<std::size_t> j_underline(const EnvironmentModel& model) { return j_underline(StageTable(model)); }

RhoEvaluation rho(const EnvironmentModel& model, double s, std::optional<std::size_t> horizon) {
    StageTable t(model);
    RhoEvaluation out;
    out.s = s;
    out.j_underline = j_underline(t);
    if (horizon) {
        if (*horizon < model.horizon()) {
            throw OutOfRange("truncated rho needs a horizon of at least " + std::to_string(model.horizon()));
        }
        out.exact = false;
        out.horizon = *horizon;
    }
    if (!out.j_underline) {
        out.value = kNegInf;
        return out;
    }
    if (!horizon) {
        out.value = rho_exact(t, s);
        return out;
    }
    const std::size_t ju = *out.j_underline;
    double acc = 0.0;
    double best = kInf;
    for (std::size_t j = ju + 1; j <= *horizon; ++j) {
        acc += std::log(stage_alpha(t.stage(j - 1), s));
        best = std::min(best, acc / static_cast<double>(j));
    }
    out.value = best;
    return out;
}

DStarResult d_star(const EnvironmentModel& model, double tol, std::size_t d_j_max) {
    return d_star(StageTable(model), tol, d_j_max);
}

double phi(const EnvironmentModel& model, int t, std::size_t j, double z) {
    return count_law(model.stage(j), t).pgf(z);
}

double phi_prime_at_one(const EnvironmentModel& model, int t, std::size_t j) {
    return count_law(model.stage(j), t).mean();
}

double phi_second_at_one(const EnvironmentModel& model, int t, std::size_t j) {
    return count_law(model.stage(j), t).factorial_moment2();
}

std::vector<FEntry> f_sequence(const EnvironmentModel& model, std::size_t j_max, std::size_t depth, double tol) {
    StageTable t(model);
    auto table = compute_f(t, j_max, depth, tol);
    std::vector<FEntry> out;
    for (std::size_t j = 0; j <= j_max; ++j) out.push_back({j, table.f[j], table.err[j]});
    return out;
}

std::vector<double> f_iterates(const EnvironmentModel& model, std::size_t j, std::size_t depth) {
    StageTable t(model);
    std::vector<double> out;
    for (std::size_t n = 0; n < depth; ++n) {
        double x = 0.0;
        for (std::size_t k = j + n + 1; k-- > j;) x = t.law(1, k).pgf(x);
        out.push_back(x);
    }
    return out;
}

bool f_is_zero(const EnvironmentModel& model, std::size_t j) { return f_is_zero(StageTable(model), j); }

bool f_positive_everywhere(const EnvironmentModel& model) {
    StageTable t(model);
    return !f_is_zero(t, t.prefix_length());
}

double phi_big(const StageTable& t, std::size_t j, double z) {
    const auto& model = t.model();
    double lw = z == 0.0 ? kNegInf : std::log(z);
    double acc = 0.0;
    double log_count = t.log_count(j);
    for (std::size_t k = j; k-- > 0;) {
        log_count -= std::log(static_cast<double>(t.m(k)));
        double l0 = t.law(0, k).log_pgf(lw);
        double l1 = t.law(1, k).log_pgf(lw);
        if (l0 == kNegInf) {
            if (l1 == kNegInf) return 0.0;
            throw DivisionByZero("phi_{0," + std::to_string(k) + "} vanishes where phi_{1," + std::to_string(k) +
                                 "} does not");
        }
        acc += scaled_log(std::max(log_count, 0.0), l0);
        if (acc == kNegInf) return 0.0;
        lw = l1 - l0;
    }
    const double p1 = model.initial_one_prob;
    double base = log_add_exp(p1 < 1.0 ? std::log1p(-p1) : kNegInf, p1 > 0.0 ? std::log(p1) + lw : kNegInf);
    return std::exp(acc + base);
}

double phi_big(const EnvironmentModel& model, std::size_t j, double z) { return phi_big(StageTable(model), j, z); }

bool state_one_reachable(const EnvironmentModel& model, std::size_t j) {
    StageTable t(model);
    bool has1 = model.initial_one_prob > 0.0;
    bool has0 = model.initial_one_prob < 1.0;
    for (std::size_t k = 0; k < j; ++k) {
        bool next1 = false;
        bool next0 = false;
        if (has1) {
            next1 = next1 || !t.law(1, k).surely_zero();
            next0 = next0 || t.law(1, k).can_have_zero_child();
        }
        if (has0) {
            next1 = next1 || !t.law(0, k).surely_zero();
            next0 = next0 || t.law(0, k).can_have_zero_child();
        }
        has1 = next1;
        has0 = next0;
    }
    return has1;
}

SigmaBounds sigma_bounds(const StageTable& t, std::size_t j) {
    auto g = [&](std::size_t n) { return t.law(1, n).mean(); };
    auto lower = periodic_series(
        t, j,
        [&](std::size_t n) {
            const auto& law = t.law(1, n);
            return (law.mean() + law.pgf(0.0) - 1.0) / law.mean();
        },
        g);
    auto upper = periodic_series(
        t, j,
        [&](std::size_t n) {
            const auto& law = t.law(1, n);
            return law.factorial_moment2() / law.mean();
        },
        g);
    SigmaBounds out;
    out.lower_series = lower.series;
    out.limsup_term = lower.limsup;
    out.upper_series = upper.series;
    out.liminf_term = upper.liminf;
    out.lower = std::max(1.0, lower.series + lower.limsup);
    out.upper = upper.series + upper.liminf;
    return out;
}

SigmaBounds sigma_bounds(const EnvironmentModel& model, std::size_t j) { return sigma_bounds(StageTable(model), j); }

std::string to_string(EmptinessMethod m) {
    switch (m) {
        case EmptinessMethod::DimensionNegative:
            return "dimension_negative";
        case EmptinessMethod::ClosedFormProduct:
            return "closed_form_product";
        case EmptinessMethod::DecreasingLimit:
            return "phi_f_limit";
        case EmptinessMethod::Undetermined:
            return "undetermined";
    }
    return "undetermined";
}

EmptinessResult emptiness_probability(const EnvironmentModel& model, std::size_t j_max, double tol,
                                      EmptinessRoute route) {
    StageTable t(model);
    const std::size_t L = t.prefix_length();
    EmptinessResult out;

    auto fs = compute_f(t, j_max, kCompositionDepthCap, tol);
    for (std::size_t j = 0; j <= j_max; ++j) {
        double v;
        try {
            v = phi_big(t, j, fs.f[j]);
        } catch (const DivisionByZero&) {
            v = std::nan("");
            out.division_by_zero = true;
        }
        out.phi_f_sequence.emplace_back(j, v);
    }

    auto ds = d_star(t, kRootTolerance, 0);
    if (ds.value < 0.0) {
        out.method = EmptinessMethod::DimensionNegative;
        out.probability = 1.0;
        return out;
    }

    if (route == EmptinessRoute::Auto) {
        std::optional<std::size_t> j_star;
        for (std::size_t j = 0; j <= L; ++j) {
            if (f_is_zero(t, j)) {
                j_star = j;
                break;
            }
        }
        if (j_star) {
            out.j_star = j_star;
            out.method = EmptinessMethod::ClosedFormProduct;
            for (std::size_t i = 0; i < t.period(); ++i) {
                if (t.law(0, L + i).pgf(0.0) < 1.0) {
                    out.probability = 0.0;
                    return out;
                }
            }
            double log_prod = 0.0;
            for (std::size_t j = *j_star; j < L; ++j) {
                log_prod += scaled_log(t.log_count(j), std::log(t.law(0, j).pgf(0.0)));
            }
            if (log_prod == kNegInf) {
                out.probability = 0.0;
                return out;
            }
            try {
                out.probability = phi_big(t, *j_star, 0.0) * std::exp(log_prod);
            } catch (const DivisionByZero&) {
                out.method = EmptinessMethod::Undetermined;
                out.probability = std::nan("");
                out.division_by_zero = true;
            }
            return out;
        }
    }

    out.method = EmptinessMethod::DecreasingLimit;
    double last = out.phi_f_sequence.back().second;
    if (std::isnan(last)) {
        out.method = EmptinessMethod::Undetermined;
        out.probability = last;
        return out;
    }
    out.probability = last;
    if (j_max > 0) {
        double prev = out.phi_f_sequence[j_max - 1].second;
        out.error_bound = std::isnan(prev) ? kInf : std::abs(prev - last);
    }
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds:
            return "holds";
        case Verdict::Fails:
            return "fails";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "inconclusive";
}

namespace {

double require_criterion_preconditions(const StageTable& t) {
    auto ds = d_star(t, kRootTolerance, 0);
    if (!(ds.value >= 0.0)) throw PreconditionUnmet("criterion needs d_* >= 0");
    if (f_is_zero(t, t.prefix_length())) throw PreconditionUnmet("criterion needs f_j > 0 for every j");
    return ds.value;
}

}  // namespace

CriterionVerdict classify_positive_empty_probability(const EnvironmentModel& model) {
    StageTable t(model);
    const double ds = require_criterion_preconditions(t);
    const std::size_t L = t.prefix_length();

    // Tail terms -M_j log phi_{0,j}(1 - 1/sigma_{j+1}) vanish exactly when phi_{0,j}
    // is identically one on [0,1) or sigma_{j+1} is infinite; any nonzero tail term
    // recurs every period with a growing multiplier, so the series diverges.
    auto tail_terms_vanish = [&](bool use_lower) {
        for (std::size_t i = 0; i < t.period(); ++i) {
            std::size_t n = L + i;
            if (t.law(0, n).surely_zero()) continue;
            auto sb = sigma_bounds(t, n + 1);
            if ((use_lower ? sb.lower : sb.upper) != kInf) return false;
        }
        return true;
    };

    CriterionVerdict out;
    out.sufficient = tail_terms_vanish(true);
    bool prefix_finite = true;
    for (std::size_t j = 0; j < L; ++j) {
        auto sb = sigma_bounds(t, j + 1);
        double x = sb.upper == kInf ? 1.0 : 1.0 - 1.0 / sb.upper;
        if (!(t.law(0, j).pgf(x) > 0.0)) prefix_finite = false;
    }
    out.necessary = std::abs(ds) <= kRootTolerance || (prefix_finite && tail_terms_vanish(false));
    if (out.sufficient) {
        out.verdict = Verdict::Holds;
    } else if (!out.necessary) {
        out.verdict = Verdict::Fails;
    } else {
        out.verdict = Verdict::Inconclusive;
    }
    return out;
}

CriterionVerdict classify_almost_surely_empty(const EnvironmentModel& model) {
    StageTable t(model);
    require_criterion_preconditions(t);
    const std::size_t ju = *j_underline(t);

    bool bracket = !state_one_reachable(model, ju);
    for (std::size_t n : t.reachable_from(ju)) {
        if (!t.law(0, n).surely_zero()) bracket = false;
    }
    auto sb = sigma_bounds(t, ju);

    CriterionVerdict out;
    out.sufficient = sb.lower == kInf || bracket;
    out.necessary = sb.upper == kInf || bracket;
    if (out.sufficient) {
        out.verdict = Verdict::Holds;
    } else if (!out.necessary) {
        out.verdict = Verdict::Fails;
    } else {
        out.verdict = Verdict::Inconclusive;
    }
    return out;
}

double varsigma_series(const EnvironmentModel& model, double s, std::size_t j) {
    StageTable t(model);
    auto r = periodic_series(
        t, j, [&](std::size_t n) { return stage_alpha_pair(t.stage(n), s) / stage_alpha(t.stage(n), s); },
        [&](std::size_t n) { return stage_alpha(t.stage(n), s); });
    return r.series;
}

VarsigmaResult varsigma_s(const EnvironmentModel& model, double s, std::size_t j) {
    auto ds = d_star(model, kRootTolerance, 0);
    if (!(s > 0.0 && s < ds.value)) {
        throw OutOfRange("s = " + std::to_string(s) + " lies outside (0, d_*) with d_* = " + std::to_string(ds.value));
    }
    VarsigmaResult out;
    out.value = varsigma_series(model, s, j);
    out.bound = out.value == kInf ? 1.0 : 1.0 - 1.0 / out.value;
    return out;
}

double moran_exponent(const std::vector<double>& ratios, double tol) {
    for (double r : ratios) {
        if (!(r > 0.0 && r < 1.0)) throw OutOfRange("Moran ratios must lie in (0,1)");
    }
    auto f = [&](double s) {
        double acc = 0.0;
        for (double r : ratios) acc += std::pow(r, s);
        return acc - 1.0;
    };
    return bisect_decreasing(f, kBracketLo, kBracketHi, tol).root;
}

}  // namespace tmfrac
