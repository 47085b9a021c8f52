#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "tmfrac/analytics.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/simulator.hpp"
#include "tmfrac/tree.hpp"
#include "tmfrac/zoo.hpp"

using namespace tmfrac;

namespace {

struct Moments {
    double mean = 0.0;
    double std_error = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    double sum = 0.0, sq = 0.0;
    for (double x : xs) {
        sum += x;
        sq += x * x;
    }
    const double n = static_cast<double>(xs.size());
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1.0);
    return {mean, std::sqrt(std::max(var, 0.0) / n)};
}

EnvironmentModel all_off() {
    auto m = zoo::mandelbrot(2, 2, 0.0, 0.0);
    return m;
}

double chi_square_p_value(const std::vector<std::vector<double>>& table) {
    const std::size_t rows = table.size(), cols = table[0].size();
    std::vector<double> r(rows, 0.0), c(cols, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            r[i] += table[i][k];
            c[k] += table[i][k];
            n += table[i][k];
        }
    }
    double stat = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) {
            const double e = r[i] * c[k] / n;
            stat += (table[i][k] - e) * (table[i][k] - e) / e;
        }
    }
    boost::math::chi_squared dist(static_cast<double>((rows - 1) * (cols - 1)));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace

TEST(SampleTree, AllOnCounts) {
    const auto t = sample_tree(zoo::mandelbrot(2, 2, 1.0), 3, 1);
    EXPECT_EQ(t.survivor_counts(), (std::vector<std::uint64_t>{1, 4, 16, 64}));
    for (const auto& n : t.nodes()) EXPECT_EQ(n.state, 1);
}

TEST(SampleTree, AllOffIsSingleDeadRoot) {
    const auto t = sample_tree(all_off(), 6, 1);
    EXPECT_EQ(t.survivor_counts(), std::vector<std::uint64_t>(7, 0));
    EXPECT_EQ(t.size(), 1u);
    EXPECT_FALSE(t.expanded(t.root()));
}

TEST(SampleTree, Deterministic) {
    const auto m = zoo::generalized_bernoulli(2, {{3, 0.3, 0.05}}, {{2, 0.9, 0.0}, {3, 0.6, 0.0}});
    const auto a = sample_tree(m, 5, 99);
    const auto b = sample_tree(m, 5, 99);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.nodes()[i].state, b.nodes()[i].state);
        EXPECT_EQ(a.nodes()[i].ratio, b.nodes()[i].ratio);
    }
    EXPECT_NE(sample_tree(m, 5, 100).survivor_counts(), std::vector<std::uint64_t>{});
}

TEST(SampleTree, DeeperTreeExtendsShallower) {
    const auto m = zoo::binary_case2(0.8);
    const auto shallow = sample_tree(m, 4, 5);
    const auto deep = sample_tree(m, 7, 5);
    for (NodeId u = 0; u < shallow.size(); ++u) {
        const NodeId v = deep.find(shallow.path(u));
        ASSERT_NE(v, kNoNode);
        EXPECT_EQ(deep.node(v).state, shallow.node(u).state);
        EXPECT_EQ(deep.node(v).ratio, shallow.node(u).ratio);
    }
    const auto cs = shallow.survivor_counts();
    const auto cd = deep.survivor_counts();
    EXPECT_TRUE(std::equal(cs.begin(), cs.end(), cd.begin()));
}

TEST(SampleTree, BudgetExceeded) {
    EXPECT_THROW(sample_tree(zoo::mandelbrot(2, 2, 1.0), 10, 1, 1000), BudgetExceeded);
    const auto capped = sample_tree_capped(zoo::mandelbrot(2, 2, 1.0), 10, 1, 1000);
    EXPECT_EQ(capped.depth(), 4u);
}

TEST(SampleTree, MeanCountMatchesGaltonWatson) {
    const auto m = zoo::mandelbrot(2, 2, 0.5);
    std::vector<double> z;
    for (std::size_t r = 0; r < 10000; ++r) z.push_back(static_cast<double>(sample_tree(m, 8, replica_seed(3, r)).survivor_counts()[8]));
    const auto mo = moments(z);
    EXPECT_NEAR(mo.mean, 256.0, 3.0 * mo.std_error);
}

TEST(SurvivorProcess, Examples) {
    const auto full = sample_tree(zoo::mandelbrot(3, 1, 1.0), 4, 1);
    EXPECT_EQ(survivor_process(full, full.root()), (std::vector<std::uint64_t>{1, 3, 9, 27, 81}));
    EXPECT_EQ(survivor_process(full, full.child(full.root(), 2)), (std::vector<std::uint64_t>{1, 3, 9, 27}));
    const auto dead = sample_tree(zoo::mandelbrot(2, 2, 0.5, 0.0), 3, 1);
    EXPECT_EQ(survivor_process(dead, dead.root()), std::vector<std::uint64_t>(4, 0));
}

TEST(SurvivorProcess, SameLawAsBranchingProcess) {
    const auto m = zoo::mandelbrot(2, 1, 0.75);
    const std::size_t n = 20000;
    std::array<std::array<double, 5>, 2> table{};
    auto bin = [](std::uint64_t z) { return z == 0 ? 0 : z <= 4 ? 1 : z <= 10 ? 2 : z <= 20 ? 3 : 4; };
    for (std::size_t r = 0; r < n; ++r) {
        const auto t = sample_tree(m, 6, replica_seed(11, r));
        table[0][bin(survivor_process(t, t.root())[6])] += 1;
        table[1][bin(branching_sample(m, 0, 6, replica_seed(12, r)).trajectory[6])] += 1;
    }
    std::vector<std::vector<double>> tab;
    for (const auto& row : table) tab.emplace_back(row.begin(), row.end());
    EXPECT_GT(chi_square_p_value(tab), 1e-3);
}

TEST(MarkovProperty, SiblingSubtreesIndependent) {
    const auto m = zoo::binary_case2(0.8);
    std::vector<std::vector<double>> table(3, std::vector<double>(3, 0.0));
    auto bin = [](std::uint64_t z) { return z == 0 ? 0 : z <= 3 ? 1 : 2; };
    for (std::size_t r = 0; r < 100000; ++r) {
        const auto t = sample_tree(m, 4, replica_seed(21, r));
        if (!t.expanded(t.root())) continue;
        const NodeId a = t.child(t.root(), 0), b = t.child(t.root(), 1);
        if (t.node(a).state != 1 || t.node(b).state != 1) continue;
        table[bin(survivor_process(t, a).back())][bin(survivor_process(t, b).back())] += 1;
    }
    EXPECT_GT(chi_square_p_value(table), 1e-3);
}

TEST(Flow, DeadVertexIsZero) {
    const auto t = sample_tree(zoo::mandelbrot(2, 2, 0.5, 0.0), 3, 1);
    EXPECT_EQ(flow(t, 1.0, t.root()).value, 0.0);
}

TEST(Flow, MoranIsOneAtEveryDepth) {
    const auto t = sample_tree(zoo::moran({0.5, 0.5}), 10, 1);
    for (double v : flow_profile(t, 1.0, t.root())) EXPECT_EQ(v, 1.0);
}

TEST(Flow, RejectsNonPositiveExponent) {
    const auto t = sample_tree(zoo::moran({0.5, 0.5}), 2, 1);
    EXPECT_THROW(flow(t, 0.0, t.root()), OutOfRange);
    EXPECT_THROW(flow(t, 1.0, t.root(), 5), OutOfRange);
}

TEST(Flow, NonincreasingInCutDepth) {
    for (const auto& [name, model] : zoo::catalog()) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto t = sample_tree_capped(model, 7, seed, 200000);
            const auto prof = flow_profile(t, 0.5, t.root());
            for (std::size_t j = 1; j < prof.size(); ++j) EXPECT_LE(prof[j], prof[j - 1]) << name;
            for (double v : prof) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
    }
}

TEST(Flow, ZeroIffExtinctByCutDepth) {
    const auto m = zoo::interval_split(0.6);
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto t = sample_tree(m, 4, seed);
        const bool extinct = survivor_process(t, t.root()).back() == 0;
        for (double s : {0.3, 1.0, 2.5}) EXPECT_EQ(flow(t, s, t.root()).value == 0.0, extinct) << seed;
    }
}

TEST(Martingale, ZeroExponentIsNormalizedCount) {
    const auto m = zoo::mandelbrot(2, 2, 0.6);
    const auto t = sample_tree(m, 5, 4);
    const auto w = martingale_series(t, m, 0.0, t.root());
    const auto z = survivor_process(t, t.root());
    double norm = 1.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        EXPECT_NEAR(w[j], static_cast<double>(z[j]) / norm, 1e-12);
        norm *= alpha(m, 0.0, j);
    }
}

TEST(Martingale, DeadRootIsZero) {
    const auto m = zoo::mandelbrot(2, 2, 0.6, 0.0);
    const auto t = sample_tree(m, 4, 1);
    for (double w : martingale_series(t, m, 1.0, t.root())) EXPECT_EQ(w, 0.0);
}

TEST(Martingale, UndefinedNormalizer) {
    const auto m = zoo::mandelbrot(2, 2, 0.0);
    const auto t = sample_tree(m, 3, 1);
    EXPECT_THROW(martingale_series(t, m, 1.0, t.root()), UndefinedNormalizer);
}

TEST(Martingale, MeanIsOne) {
    const auto m = zoo::interval_split(0.8);
    std::vector<double> w;
    for (std::size_t r = 0; r < 4000; ++r) {
        const auto t = sample_tree(m, 6, replica_seed(8, r));
        w.push_back(martingale_series(t, m, 0.5, t.root()).back());
    }
    const auto mo = moments(w);
    EXPECT_NEAR(mo.mean, 1.0, 3.0 * mo.std_error);
}

TEST(Cubes, RootAndFullSubdivision) {
    const auto m = zoo::mandelbrot(2, 2, 1.0);
    const auto t = sample_tree(m, 2, 1);
    const auto c0 = realize_cubes(t, m, 0);
    ASSERT_EQ(c0.cubes.size(), 1u);
    EXPECT_EQ(c0.cubes[0], (std::vector<std::uint64_t>{0, 0}));
    const auto c2 = realize_cubes(t, m, 2);
    EXPECT_EQ(c2.side, 4u);
    std::set<std::vector<std::uint64_t>> cells(c2.cubes.begin(), c2.cubes.end());
    EXPECT_EQ(cells.size(), 16u);
    for (const auto& c : cells) {
        EXPECT_LT(c[0], 4u);
        EXPECT_LT(c[1], 4u);
    }
}

TEST(Cubes, RowMajorDigits) {
    const auto m = zoo::mandelbrot(3, 2, 1.0);
    const auto t = sample_tree(m, 1, 1);
    const auto c = realize_cubes(t, m, 1);
    ASSERT_EQ(c.cubes.size(), 9u);
    EXPECT_EQ(c.cubes[5], (std::vector<std::uint64_t>{1, 2}));
}

TEST(Cubes, WrongGeometry) {
    const auto m = zoo::interval_split(0.8);
    const auto t = sample_tree(m, 2, 1);
    EXPECT_THROW(realize_cubes(t, m, 1), WrongGeometry);
    EXPECT_THROW(render_2d(t, m, 1), WrongGeometry);
}

TEST(Cubes, MeanCountMatchesAlphaProduct) {
    const auto m = zoo::generalized_bernoulli(2, {{3, 0.3, 0.05}}, {{2, 0.9, 0.0}, {3, 0.6, 0.0}}, 0.8);
    std::vector<double> n;
    for (std::size_t r = 0; r < 3000; ++r) {
        const auto t = sample_tree(m, 3, replica_seed(2, r));
        n.push_back(static_cast<double>(realize_cubes(t, m, 3).cubes.size()));
    }
    const auto mo = moments(n);
    // Mean of #S_j from the expected recursion over both parent states.
    double e1 = m.initial_one_prob, e0 = 1.0 - m.initial_one_prob;
    for (std::size_t j = 0; j < 3; ++j) {
        const double mj = m.stage(j).m;
        const double ones = e1 * phi_prime_at_one(m, 1, j) + e0 * phi_prime_at_one(m, 0, j);
        e0 = e0 * mj + e1 * mj - ones;
        e1 = ones;
    }
    EXPECT_NEAR(mo.mean, e1, 3.0 * mo.std_error);
}

TEST(Render, AllOnAndAllOff) {
    const auto on = zoo::mandelbrot(2, 2, 1.0);
    const auto img = render_2d(sample_tree(on, 3, 1), on, 3);
    EXPECT_EQ(img.width, 8u);
    EXPECT_EQ(img.height, 8u);
    EXPECT_TRUE(std::all_of(img.pixels.begin(), img.pixels.end(), [](auto p) { return p == 0; }));
    const auto off = all_off();
    const auto blank = render_2d(sample_tree(off, 3, 1), off, 3);
    EXPECT_TRUE(std::all_of(blank.pixels.begin(), blank.pixels.end(), [](auto p) { return p == 255; }));
}

TEST(Render, PixelsMatchCubes) {
    const auto m = zoo::mandelbrot(2, 2, 0.7);
    const auto t = sample_tree(m, 6, 13);
    const auto img = render_2d(t, m, 6);
    const auto black = std::count(img.pixels.begin(), img.pixels.end(), 0);
    EXPECT_EQ(static_cast<std::size_t>(black), realize_cubes(t, m, 6).cubes.size());
    const auto pgm = to_pgm(img);
    const std::string header = "P5\n64 64\n255\n";
    EXPECT_EQ(pgm.substr(0, header.size()), header);
    EXPECT_EQ(pgm.size(), header.size() + 64 * 64);
}

TEST(BoxCount, FullSubdivisionSlopeIsDimension) {
    const auto est = box_count(zoo::mandelbrot(2, 2, 1.0), 8, 3, 1);
    EXPECT_NEAR(est.slope, 2.0, 1e-12);
    EXPECT_EQ(est.j_min, 4u);
    EXPECT_EQ(est.j_max, 8u);
    EXPECT_EQ(est.counts.size(), 3u);
    EXPECT_EQ(est.counts[0].size(), 9u);
}

TEST(BoxCount, SubcriticalAllExtinct) {
    EXPECT_THROW(box_count(zoo::mandelbrot(2, 2, 0.1), 10, 50, 1), AllExtinct);
}

TEST(BoxCount, RequiresCubeGeometryAndWindow) {
    EXPECT_THROW(box_count(zoo::interval_split(0.8), 10, 5, 1), WrongGeometry);
    EXPECT_THROW(box_count(zoo::mandelbrot(2, 2, 0.9), 4, 5, 1), OutOfRange);
}

TEST(BoxCount, WorkerCountDoesNotMatter) {
    const auto m = zoo::mandelbrot(2, 2, 0.8);
    const auto a = box_count(m, 10, 40, 5, 1);
    const auto b = box_count(m, 10, 40, 5, 4);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_EQ(a.slope, b.slope);
}

TEST(Branching, ExtinctTrajectoryStaysAtZero) {
    const auto m = zoo::mandelbrot(2, 1, 0.5);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto b = branching_sample(m, 0, 30, seed);
        EXPECT_EQ(b.trajectory[0], 1u);
        bool dead = false;
        for (std::size_t n = 0; n < b.trajectory.size(); ++n) {
            if (dead) {
                EXPECT_EQ(b.trajectory[n], 0u);
                EXPECT_EQ(b.normed[n], 0.0);
            }
            dead = dead || b.trajectory[n] == 0;
            if (n > 0) {
                EXPECT_LE(b.trajectory[n], 2 * b.trajectory[n - 1]);
            }
        }
    }
}

TEST(Branching, MeanMatchesProductOfDerivatives) {
    const auto m = zoo::generalized_bernoulli(2, {{3, 0.3, 0.05}}, {{2, 0.9, 0.0}, {3, 0.6, 0.0}});
    const std::size_t N = 5;
    std::vector<double> z;
    for (std::size_t r = 0; r < 10000; ++r) z.push_back(static_cast<double>(branching_sample(m, 1, N, replica_seed(4, r)).trajectory[N]));
    double mean = 1.0;
    for (std::size_t l = 0; l < N; ++l) mean *= phi_prime_at_one(m, 1, 1 + l);
    const auto mo = moments(z);
    EXPECT_NEAR(mo.mean, mean, 3.0 * mo.std_error);
}

TEST(Branching, ExtinctionFrequencyMatchesF) {
    const auto m = zoo::mandelbrot(2, 2, 0.5);
    const auto est = branching_extinction(m, 0, 40, 10000, 17, 2);
    const double f0 = f_sequence(m, 0).front().f;
    EXPECT_NEAR(est.frequency, f0, 3.0 * std::sqrt(f0 * (1 - f0) / 10000));
}

TEST(Emptiness, TrivialModels) {
    EXPECT_EQ(monte_carlo_emptiness(all_off(), 10, 100, 1).estimate.frequency, 1.0);
    EXPECT_EQ(monte_carlo_emptiness(zoo::moran({0.5, 0.5}), 10, 100, 1).estimate.frequency, 0.0);
}

TEST(Emptiness, IntervalModel) {
    const auto est = monte_carlo_emptiness(zoo::interval_split(0.8), 25, 10000, 7, 2);
    const double se = std::sqrt(0.0625 * 0.9375 / 10000);
    EXPECT_NEAR(est.estimate.frequency, 0.0625, 3.0 * se);
    EXPECT_LE(est.bracket_lo, est.bracket_hi);
    EXPECT_GE(est.residual, 0.0);
    EXPECT_LT(est.residual, 1e-3);
}

TEST(Replica, CountsContinueTreeCounts) {
    const auto m = zoo::interval_split(0.9);
    const auto rec = simulate_replica(m, 30, 0.5, 77, 512);
    EXPECT_EQ(rec.counts.size(), 31u);
    EXPECT_LE(rec.tree_depth, 30u);
    EXPECT_EQ(rec.flows.size(), rec.tree_depth + 1);
    ASSERT_TRUE(rec.martingale.has_value());
    const auto t = sample_tree_capped(m, 30, 77, 512);
    const auto c = t.survivor_counts();
    EXPECT_TRUE(std::equal(c.begin(), c.end(), rec.counts.begin()));
}
