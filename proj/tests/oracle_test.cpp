#include <gtest/gtest.h>

#include <cmath>

#include "tmfrac/analytics.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/oracle.hpp"
#include "tmfrac/simulator.hpp"
#include "tmfrac/zoo.hpp"
#include "support.hpp"

using namespace tmfrac;

namespace {

auto small_models() { return tmfrac::testing::enumerable_zoo(); }

}  // namespace

TEST(GeneratingFunction, Examples) {
    const double p = 0.7;
    const auto m = zoo::mandelbrot(2, 1, p);
    for (double z : {0.0, 0.25, 0.6}) {
        EXPECT_NEAR(exact_generating_function(m, 1, z), std::pow(1 - p + p * z, 2), 1e-15);
        EXPECT_NEAR(exact_generating_function(m, 0, z), z, 1e-15);
    }
    EXPECT_NEAR(exact_generating_function(m, 3, 1.0), 1.0, 1e-12);
    const auto half = zoo::mandelbrot(2, 1, p, 0.4);
    EXPECT_NEAR(exact_generating_function(half, 0, 0.5), 0.6 + 0.4 * 0.5, 1e-15);
}

TEST(GeneratingFunction, AgreesWithRecursion) {
    std::size_t compared = 0;
    for (const auto& [name, model] : small_models()) {
        for (std::size_t j = 0; j <= 3; ++j) {
            for (double z : {0.0, 0.3, 0.7, 1.0}) {
                double recursion = 0.0;
                try {
                    recursion = phi_big(model, j, z);
                } catch (const DivisionByZero&) {
                    continue;
                }
                EXPECT_NEAR(exact_generating_function(model, j, z), recursion, 1e-12) << name << " j=" << j;
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 100u);
}

TEST(GeneratingFunction, ExistsWhereRecursionDivides) {
    const auto m = zoo::microcanonical(2, {{2, 0, 1}}, {{2, 2, 0}}, 0.5);
    const double v = exact_generating_function(m, 2, 0.3);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
}

TEST(GeneratingFunction, BudgetEnforced) {
    EXPECT_THROW(exact_generating_function(zoo::mandelbrot(2, 2, 0.5), 3, 0.5), BudgetExceeded);
}

TEST(CountDistribution, IsAProbabilityLaw) {
    const auto law = exact_count_distribution(zoo::binary_case2(0.8), 3);
    double total = 0.0;
    for (const auto& [k, p] : law) {
        EXPECT_LE(k, 8u);
        total += p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ExtinctionBy, Examples) {
    const auto mc = zoo::microcanonical(2, {}, {{2, 1, 0}});
    for (std::size_t J = 0; J < 6; ++J) EXPECT_EQ(exact_extinction_by(mc, 0, J), 0.0);
    const auto m = zoo::interval_split(0.8);
    EXPECT_NEAR(exact_extinction_by(m, 0, 1), phi(m, 1, 0, 0.0), 1e-15);
    EXPECT_THROW(exact_extinction_by(m, 3, 2), OutOfRange);
}

TEST(ExtinctionBy, IncreasesTowardF) {
    for (const auto& [name, model] : small_models()) {
        const double f0 = f_sequence(model, 0).front().f;
        double prev = 0.0;
        for (std::size_t J = 1; J <= 12; ++J) {
            const double e = exact_extinction_by(model, 0, J);
            EXPECT_GE(e, prev) << name;
            EXPECT_LE(e, f0 + 1e-12) << name;
            prev = e;
        }
    }
    const auto m = zoo::interval_split(0.8);
    EXPECT_NEAR(exact_extinction_by(m, 0, 12), f_iterates(m, 0, 12).back(), 1e-12);
    EXPECT_THROW(exact_extinction_by(m, 0, 60), BudgetExceeded);
}

TEST(MinCut, MoranIsPointMassAtOne) {
    const auto r = exact_min_cut(zoo::moran({0.5, 0.5}), 1.0, 3);
    ASSERT_EQ(r.distribution.size(), 1u);
    EXPECT_EQ(r.distribution.begin()->first, 1.0);
    EXPECT_NEAR(r.distribution.begin()->second, 1.0, 1e-15);
}

TEST(MinCut, DeadRootIsPointMassAtZero) {
    const auto r = exact_min_cut(zoo::mandelbrot(2, 1, 0.8, 0.0), 1.0, 2);
    ASSERT_EQ(r.distribution.size(), 1u);
    EXPECT_EQ(r.distribution.begin()->first, 0.0);
}

TEST(MinCut, AgreesWithFlowPerOutcome) {
    const auto m = zoo::mandelbrot(2, 1, 0.8);
    const auto r = exact_min_cut(m, 1.0, 2);
    EXPECT_EQ(r.outcomes.size(), 25u);
    double total = 0.0;
    for (const auto& o : r.outcomes) {
        EXPECT_EQ(o.value, flow(o.tree, 1.0, o.tree.root(), 2).value);
        total += o.probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(MinCut, AgreesWithFlowOnZoo) {
    for (const auto& [name, model] : small_models()) {
        for (double s : {0.3, 0.8, 1.5}) {
            for (std::size_t J = 0; J <= 3; ++J) {
                const auto r = exact_min_cut(model, s, J);
                for (const auto& o : r.outcomes) {
                    ASSERT_EQ(o.value, flow(o.tree, s, o.tree.root(), J).value) << name << " s=" << s << " J=" << J;
                }
            }
        }
    }
}
