#include "tmfrac/zoo.hpp"

#include <cmath>

#include "tmfrac/errors.hpp"

namespace tmfrac::zoo {

namespace {

int power(int c, int d) {
    int m = 1;
    for (int i = 0; i < d; ++i) m *= c;
    return m;
}

PointMassRatios cube_ratios(int c, int d) {
    return PointMassRatios{RatioVector(power(c, d), 1.0 / c)};
}

// Dyadic stage on [0,1] with the given state-1 law and Bernoulli(q) recoloring.
StageSpec dyadic_stage(TransitionLaw from1, double q) {
    return StageSpec{2, SeparatedKernels{cube_ratios(2, 1), ProductBernoulli{q}, std::move(from1)}};
}

EnvironmentModel dyadic_model(std::vector<StageSpec> prefix, StageSpec tail, double initial_one_prob) {
    EnvironmentModel model;
    model.initial_one_prob = initial_one_prob;
    model.ambient_dim = 1;
    std::vector<int> sides(prefix.size(), 2);
    model.prefix = std::move(prefix);
    model.tail = ConstantTail{std::move(tail)};
    model.geometry = CubeSubdivision{sides, {2}};
    return model;
}

}  // namespace

StageSpec bernoulli_stage(int c, int d, double p, double q) {
    return StageSpec{power(c, d), SeparatedKernels{cube_ratios(c, d), ProductBernoulli{q}, ProductBernoulli{p}}};
}

StageSpec microcanonical_stage(int c, int d, int a, int b) {
    return StageSpec{power(c, d), SeparatedKernels{cube_ratios(c, d), Microcanonical{b}, Microcanonical{a}}};
}

EnvironmentModel mandelbrot(int c, int d, double p, double initial_one_prob) {
    return generalized_bernoulli(d, {}, {{c, p, 0.0}}, initial_one_prob);
}

EnvironmentModel generalized_bernoulli(int d, const std::vector<BernoulliStage>& prefix,
                                       const std::vector<BernoulliStage>& tail, double initial_one_prob) {
    if (tail.empty()) throw ModelError("tail must contain at least one stage");
    EnvironmentModel model;
    model.initial_one_prob = initial_one_prob;
    model.ambient_dim = d;
    CubeSubdivision geometry;
    for (const auto& s : prefix) {
        model.prefix.push_back(bernoulli_stage(s.c, d, s.p, s.q));
        geometry.prefix_sides.push_back(s.c);
    }
    if (tail.size() == 1) {
        model.tail = ConstantTail{bernoulli_stage(tail[0].c, d, tail[0].p, tail[0].q)};
    } else {
        PeriodicTail periodic;
        for (const auto& s : tail) periodic.stages.push_back(bernoulli_stage(s.c, d, s.p, s.q));
        model.tail = std::move(periodic);
    }
    for (const auto& s : tail) geometry.tail_sides.push_back(s.c);
    model.geometry = geometry;
    return model;
}

EnvironmentModel microcanonical(int d, const std::vector<MicroStage>& prefix, const std::vector<MicroStage>& tail,
                                double initial_one_prob) {
    if (tail.empty()) throw ModelError("tail must contain at least one stage");
    EnvironmentModel model;
    model.initial_one_prob = initial_one_prob;
    model.ambient_dim = d;
    CubeSubdivision geometry;
    for (const auto& s : prefix) {
        model.prefix.push_back(microcanonical_stage(s.c, d, s.a, s.b));
        geometry.prefix_sides.push_back(s.c);
    }
    if (tail.size() == 1) {
        model.tail = ConstantTail{microcanonical_stage(tail[0].c, d, tail[0].a, tail[0].b)};
    } else {
        PeriodicTail periodic;
        for (const auto& s : tail) periodic.stages.push_back(microcanonical_stage(s.c, d, s.a, s.b));
        model.tail = std::move(periodic);
    }
    for (const auto& s : tail) geometry.tail_sides.push_back(s.c);
    model.geometry = geometry;
    return model;
}

EnvironmentModel interval_split(double p) {
    DiscreteRatios y_law{{{{0.25, 0.75}, 0.25}, {{0.5, 0.5}, 0.5}, {{0.75, 0.25}, 0.25}}};
    EnvironmentModel model;
    model.initial_one_prob = 1.0;
    model.ambient_dim = 1;
    model.tail = ConstantTail{StageSpec{2, SeparatedKernels{y_law, ProductBernoulli{0.0}, ProductBernoulli{p}}}};
    model.geometry = IntervalSplit{};
    return model;
}

EnvironmentModel moran(const RatioVector& ratios) {
    const int m = static_cast<int>(ratios.size());
    EnvironmentModel model;
    model.initial_one_prob = 1.0;
    model.ambient_dim = 1;
    model.tail =
        ConstantTail{StageSpec{m, SeparatedKernels{PointMassRatios{ratios}, ProductBernoulli{0.0}, ProductBernoulli{1.0}}}};
    if (m == 2 && std::abs(ratios[0] + ratios[1] - 1.0) <= 1e-12) model.geometry = IntervalSplit{};
    return model;
}

EnvironmentModel binary_case1() {
    // State-1 parents never lose both children, and recoloring stops after two generations.
    DiscreteStates never_both_off{{{{1, 1}, 0.5}, {{1, 0}, 0.25}, {{0, 1}, 0.25}}};
    return dyadic_model({dyadic_stage(never_both_off, 0.3), dyadic_stage(never_both_off, 0.3)},
                        dyadic_stage(never_both_off, 0.0), 0.5);
}

EnvironmentModel binary_case2(double p) { return dyadic_model({}, dyadic_stage(ProductBernoulli{p}, 0.0), 1.0); }

EnvironmentModel binary_case3() { return dyadic_model({}, dyadic_stage(ProductBernoulli{0.8}, 0.1), 1.0); }

std::vector<std::pair<std::string, EnvironmentModel>> catalog() {
    std::vector<std::pair<std::string, EnvironmentModel>> out;
    out.emplace_back("mandelbrot_p05", mandelbrot(2, 2, 0.5));
    out.emplace_back("mandelbrot_p09", mandelbrot(2, 2, 0.9));
    out.emplace_back("mandelbrot_c3_p04", mandelbrot(3, 2, 0.4));
    out.emplace_back("mandelbrot_p02_subcritical", mandelbrot(2, 2, 0.2));
    out.emplace_back("generalized_bernoulli_periodic",
                     generalized_bernoulli(2, {{3, 0.3, 0.05}}, {{2, 0.9, 0.0}, {3, 0.6, 0.0}}));
    out.emplace_back("micro_a2_b0", microcanonical(2, {}, {{2, 2, 0}}));
    out.emplace_back("micro_a2_b1", microcanonical(2, {}, {{2, 2, 1}}));
    out.emplace_back("micro_recolor_prefix", microcanonical(2, {{2, 0, 1}}, {{2, 2, 0}}, 0.5));
    out.emplace_back("interval_p06", interval_split(0.6));
    out.emplace_back("interval_p08", interval_split(0.8));
    out.emplace_back("interval_p09", interval_split(0.9));
    out.emplace_back("moran_half", moran({0.5, 0.5}));
    out.emplace_back("binary_case1", binary_case1());
    out.emplace_back("binary_case2", binary_case2(0.8));
    out.emplace_back("binary_case2_critical", binary_case2(0.5));
    out.emplace_back("binary_case3", binary_case3());
    return out;
}

}  // namespace tmfrac::zoo
