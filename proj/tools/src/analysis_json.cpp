#include "analysis_json.hpp"

#include <cmath>
#include <limits>

#include "tmfrac/analytics.hpp"
#include "tmfrac/binary_case.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/simulator.hpp"

namespace tmfrac::cli {

namespace {

constexpr double kSandwichSlack = 1e-9;
constexpr double kMonotoneSlack = 1e-10;
constexpr double kBoxCountTolerance = 0.15;

json verdict_json(const CriterionVerdict& v) {
    return {{"verdict", to_string(v.verdict)}, {"sufficient_condition", v.sufficient},
            {"necessary_condition", v.necessary}};
}

template <class F>
json criterion(F&& classify) {
    try {
        return verdict_json(classify());
    } catch (const PreconditionUnmet& e) {
        return {{"verdict", "not_applicable"}, {"reason", e.what()}};
    }
}

json binary_json(const EnvironmentModel& model) {
    BinaryCaseReport r;
    try {
        r = binary_case(model);
    } catch (const WrongShape&) {
        return nullptr;
    }
    json out = {{"case", r.case_id}, {"verdict", r.verdict}, {"j_underline", optional_index(r.j_underline)},
                {"d_star", number(r.d_star)}};
    out["j_star"] = r.j_star ? json(*r.j_star) : json(nullptr);
    out["probability"] = r.probability ? number(*r.probability) : json(nullptr);
    out["positive"] = r.positive ? json(*r.positive) : json(nullptr);
    out["less_than_one"] = r.less_than_one ? json(*r.less_than_one) : json(nullptr);
    return out;
}

json skipped(const std::string& why) { return {{"status", "skipped"}, {"reason", why}}; }

const char* status(bool ok) { return ok ? "pass" : "fail"; }

}  // namespace

json analyze_model(const EnvironmentModel& model, const AnalyzeOptions& options) {
    const std::size_t J = options.horizon;
    json out;

    const DStarResult ds = d_star(model, options.tol, J);
    out["d_star"] = number(ds.value);
    out["j_underline"] = optional_index(ds.j_underline);
    out["d_j_convention"] = ds.d_j_convention;
    out["d_j_sequence"] = json::array();
    for (const auto& [j, d] : ds.d_j) out["d_j_sequence"].push_back({{"j", j}, {"d_j", number(d)}});

    out["f_table"] = json::array();
    for (const auto& e : f_sequence(model, J)) {
        out["f_table"].push_back({{"j", e.j}, {"f", number(e.f)}, {"error_bound", number(e.error_bound)}});
    }

    out["sigma_bounds"] = json::array();
    const StageTable table(model);
    for (std::size_t j = 0; j <= J; ++j) {
        const SigmaBounds sb = sigma_bounds(table, j);
        out["sigma_bounds"].push_back({{"j", j}, {"lower", number(sb.lower)}, {"upper", number(sb.upper)}});
    }

    const EmptinessResult em = emptiness_probability(model, J);
    out["phi_f_sequence"] = json::array();
    for (const auto& [j, v] : em.phi_f_sequence) out["phi_f_sequence"].push_back({{"j", j}, {"value", number(v)}});
    json emptiness = {{"probability", number(em.probability)},
                      {"error_bound", number(em.error_bound)},
                      {"method", to_string(em.method)},
                      {"division_by_zero", em.division_by_zero}};
    emptiness["j_star"] = em.j_star ? json(*em.j_star) : json(nullptr);
    emptiness["monte_carlo"] = nullptr;
    if (em.division_by_zero && options.seed) {
        const EmptinessEstimate mc = monte_carlo_emptiness(model, J, options.replicas, *options.seed, options.workers);
        emptiness["monte_carlo"] = {{"depth", mc.depth},
                                    {"replicas", mc.estimate.replicas},
                                    {"frequency", number(mc.estimate.frequency)},
                                    {"std_error", number(mc.estimate.std_error)},
                                    {"bracket", {number(mc.bracket_lo), number(mc.bracket_hi)}}};
        emptiness["method"] = "monte_carlo_fallback";
    }
    out["emptiness"] = emptiness;

    out["classifications"] = {
        {"positive_probability_empty", criterion([&] { return classify_positive_empty_probability(model); })},
        {"almost_surely_empty", criterion([&] { return classify_almost_surely_empty(model); })},
        {"binary_case", binary_json(model)},
    };

    if (ds.value < 0.0) {
        out["dimension"] = {{"status", "empty_almost_surely"}, {"note", "d_* < 0, the limit set is empty a.s."}};
    } else {
        out["dimension"] = {{"status", "dimension_is_d_star_on_nonemptiness"}, {"d_star", number(ds.value)}};
    }
    return out;
}

json cross_checks(const json& analysis, const json& simulation, const json& dimension) {
    json out;
    try {
        // lower/upper sandwich of f_j by the sigma bounds
        bool ok = true;
        json worst = nullptr;
        const auto& f = analysis.at("f_table");
        const auto& sb = analysis.at("sigma_bounds");
        for (std::size_t i = 0; i < f.size() && i < sb.size(); ++i) {
            const double fj = to_double(f[i].at("f"));
            const double err = to_double(f[i].at("error_bound"));
            const double lo = 1.0 - 1.0 / to_double(sb[i].at("lower"));
            const double hi = 1.0 - 1.0 / to_double(sb[i].at("upper"));
            const double slack = kSandwichSlack + (std::isfinite(err) ? err : 0.0);
            if (lo > fj + slack || fj > hi + slack) {
                ok = false;
                worst = {{"j", f[i].at("j")}, {"lower", number(lo)}, {"f", number(fj)}, {"upper", number(hi)}};
            }
        }
        out["f_sandwich"] = {{"status", status(ok)}, {"violation", worst}};

        ok = true;
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& e : analysis.at("phi_f_sequence")) {
            const double v = to_double(e.at("value"));
            if (std::isnan(v)) continue;
            if (v > prev + kMonotoneSlack) ok = false;
            prev = v;
        }
        out["phi_f_monotone"] = {{"status", status(ok)}};

        const double ds = to_double(analysis.at("d_star"));
        const std::string model = analysis.value("model", "");
        auto foreign = [&](const json& a) { return a.value("model", "") != model; };
        if (dimension.is_null()) {
            out["box_count"] = skipped("no dimension artifact");
        } else if (foreign(dimension)) {
            out["box_count"] = skipped("dimension artifact belongs to another model");
        } else if (ds < 0.0) {
            out["box_count"] = skipped("d_* < 0");
        } else {
            const double slope = to_double(dimension.at("slope"));
            out["box_count"] = {{"status", status(std::abs(slope - ds) <= kBoxCountTolerance)},
                                {"slope", number(slope)},
                                {"d_star", number(ds)},
                                {"tolerance", kBoxCountTolerance}};
        }

        if (simulation.is_null()) {
            out["monte_carlo_emptiness"] = skipped("no simulation artifact");
        } else if (foreign(simulation)) {
            out["monte_carlo_emptiness"] = skipped("simulation artifact belongs to another model");
        } else {
            const double p = to_double(analysis.at("emptiness").at("probability"));
            const auto& e = simulation.at("emptiness");
            const double se = to_double(e.at("std_error"));
            const double lo = to_double(e.at("bracket").at(0)) - 3.0 * se;
            const double hi = to_double(e.at("bracket").at(1)) + 3.0 * se;
            out["monte_carlo_emptiness"] = {{"status", status(p >= lo - 1e-12 && p <= hi + 1e-12)},
                                            {"analytic", number(p)},
                                            {"interval", {number(lo), number(hi)}}};
        }
    } catch (const json::exception& e) {
        throw MissingArtifact(std::string("artifact lacks an expected field: ") + e.what());
    }
    return out;
}

}  // namespace tmfrac::cli
