#include "tmfrac/binary_case.hpp"

#include <cmath>

#include "tmfrac/analytics.hpp"
#include "tmfrac/errors.hpp"

namespace tmfrac {

BinaryCaseReport binary_case(const EnvironmentModel& model, std::size_t table_size) {
    if (model.ambient_dim != 1) throw WrongShape("binary case needs d = 1");
    for (std::size_t j = 0; j < model.horizon(); ++j) {
        if (model.stage(j).m != 2) throw WrongShape("binary case needs m_j = 2 at every generation");
    }

    StageTable t(model);
    const std::size_t L = t.prefix_length();
    const std::size_t P = t.period();

    BinaryCaseReport out;
    for (std::size_t j = 0; j < table_size; ++j) {
        out.eta.push_back(1.0 - t.law(0, j).pgf(0.0));
        const auto& law = t.law(1, j);
        out.gamma.push_back(2.0 * law.prob(2) + law.prob(1));
        out.varsigma.push_back(sigma_bounds(t, j).upper_series);
    }

    out.j_underline = j_underline(model);
    if (!out.j_underline) {
        out.d_star = -kInf;
    } else {
        double acc = 0.0;
        for (std::size_t i = 0; i < P; ++i) {
            const auto& law = t.law(1, L + i);
            acc += std::log(2.0 * law.prob(2) + law.prob(1));
        }
        out.d_star = acc / (static_cast<double>(P) * std::log(2.0));
    }

    if (out.d_star < 0.0) {
        out.case_id = 0;
        out.probability = 1.0;
        out.positive = true;
        out.less_than_one = false;
        out.verdict = "d_* < 0: empty with probability one";
        return out;
    }

    bool tail_never_both_off = true;
    bool tail_eta_zero = true;
    for (std::size_t i = 0; i < P; ++i) {
        if (t.law(1, L + i).can_be_zero()) tail_never_both_off = false;
        if (!t.law(0, L + i).surely_zero()) tail_eta_zero = false;
    }

    if (tail_never_both_off) {
        out.case_id = 1;
        std::size_t j_star = L;
        while (j_star > 0 && !t.law(1, j_star - 1).can_be_zero()) --j_star;
        out.j_star = j_star;
        double value;
        if (!tail_eta_zero) {
            value = 0.0;
        } else {
            double log_prod = 0.0;
            for (std::size_t j = j_star; j < L; ++j) {
                double base = t.law(0, j).pgf(0.0);
                if (base == 1.0) continue;
                log_prod += std::ldexp(1.0, static_cast<int>(j)) * std::log(base);
            }
            value = 0.0;
            if (std::isfinite(log_prod)) {
                try {
                    value = phi_big(t, j_star, 0.0) * std::exp(log_prod);
                } catch (const DivisionByZero&) {
                    out.verdict = "extinction-free tail, Phi_{j*}(0) not computable by the recursion";
                    return out;
                }
            }
        }
        out.probability = value;
        out.positive = value > 0.0;
        out.less_than_one = value < 1.0;
        out.verdict = "extinction-free tail, closed-form product";
        return out;
    }

    const std::size_t ju = out.j_underline.value_or(0);
    if (tail_eta_zero) {
        out.case_id = 2;
        out.positive = true;
        double log_g = 0.0;
        for (std::size_t i = 0; i < P; ++i) log_g += std::log(t.law(1, L + i).mean());
        bool product_vanishes = log_g < -kCriticalLogTolerance;
        bool bracket = !state_one_reachable(model, ju);
        for (std::size_t n : t.reachable_from(ju)) {
            if (!t.law(0, n).surely_zero()) bracket = false;
        }
        bool certain = sigma_bounds(t, ju).upper_series == kInf || product_vanishes || bracket;
        out.less_than_one = !certain;
        if (certain) out.probability = 1.0;
        out.verdict = certain ? "summable recoloring, empty with probability one" : "summable recoloring, 0 < P(empty) < 1";
        return out;
    }

    if (out.d_star > kCriticalLogTolerance) {
        out.case_id = 3;
        out.less_than_one = true;
        // sum_j 2^j eta_j / varsigma_{j+1} diverges as soon as one tail term is nonzero.
        bool diverges = false;
        for (std::size_t i = 0; i < P; ++i) {
            std::size_t n = L + i;
            if (t.law(0, n).surely_zero()) continue;
            if (sigma_bounds(t, n + 1).upper_series < kInf) diverges = true;
        }
        out.positive = !diverges;
        if (diverges) out.probability = 0.0;
        out.verdict = diverges ? "non-summable recoloring, empty with probability zero" : "non-summable recoloring, 0 < P(empty) < 1";
        return out;
    }

    out.case_id = -1;
    out.verdict = "no case applies (d_* = 0 with recoloring in the tail)";
    return out;
}

}  // namespace tmfrac
