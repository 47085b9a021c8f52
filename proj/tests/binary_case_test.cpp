#include <gtest/gtest.h>

#include <cmath>

#include "tmfrac/analytics.hpp"
#include "tmfrac/binary_case.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/zoo.hpp"

using namespace tmfrac;

TEST(BinaryCase, RejectsOtherShapes) {
    EXPECT_THROW(binary_case(zoo::mandelbrot(2, 2, 0.5)), WrongShape);
    EXPECT_THROW(binary_case(zoo::moran({0.3, 0.3, 0.3})), WrongShape);
}

TEST(BinaryCase, NegativeDimension) {
    const auto r = binary_case(zoo::mandelbrot(2, 1, 0.3));
    EXPECT_EQ(r.case_id, 0);
    EXPECT_EQ(r.probability, std::optional<double>(1.0));
}

TEST(BinaryCase, ExtinctionFreeTailClosedForm) {
    const auto m = zoo::binary_case1();
    const auto r = binary_case(m);
    EXPECT_EQ(r.case_id, 1);
    ASSERT_TRUE(r.probability.has_value());
    const auto limit = emptiness_probability(m, 20, kFixedPointTolerance, EmptinessRoute::Limit);
    EXPECT_NEAR(*r.probability, limit.probability, 1e-9);
    EXPECT_EQ(r.verdict, "extinction-free tail, closed-form product");
}

TEST(BinaryCase, NoRecoloringReducesToInitialLaw) {
    // Mandelbrot with p = 1 never loses a child and never recolors.
    const auto m = zoo::mandelbrot(2, 1, 1.0, 0.4);
    const auto r = binary_case(m);
    EXPECT_EQ(r.case_id, 1);
    ASSERT_TRUE(r.probability.has_value());
    EXPECT_NEAR(*r.probability, 0.6, 1e-15);
    for (double eta : r.eta) EXPECT_EQ(eta, 0.0);
}

TEST(BinaryCase, SummableRecoloring) {
    const auto r = binary_case(zoo::binary_case2(0.8));
    EXPECT_EQ(r.case_id, 2);
    EXPECT_EQ(r.positive, std::optional<bool>(true));
    EXPECT_EQ(r.less_than_one, std::optional<bool>(true));
    EXPECT_EQ(r.verdict, "summable recoloring, 0 < P(empty) < 1");
}

TEST(BinaryCase, NonSummableRecoloring) {
    const auto m = zoo::binary_case3();
    const auto r = binary_case(m);
    EXPECT_EQ(r.case_id, 3);
    EXPECT_EQ(r.probability, std::optional<double>(0.0));
    EXPECT_EQ(r.verdict, "non-summable recoloring, empty with probability zero");
    EXPECT_NEAR(emptiness_probability(m).probability, 0.0, 1e-9);
}

TEST(BinaryCase, TablesMatchKernels) {
    const auto r = binary_case(zoo::mandelbrot(2, 1, 0.7));
    ASSERT_FALSE(r.gamma.empty());
    for (double g : r.gamma) EXPECT_NEAR(g, 1.4, 1e-15);
    EXPECT_NEAR(r.d_star, 1.0 + std::log(0.7) / std::log(2.0), 1e-8);
}
