#include "tmfrac/simulator.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "sampling.hpp"
#include "tmfrac/analytics.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/parallel.hpp"
#include "tmfrac/rng.hpp"
#include "tmfrac/stage_math.hpp"

namespace tmfrac {

namespace {

constexpr std::uint64_t kReplicaDomain = 0x7265706c69636173ULL;
constexpr std::uint64_t kCountLimit = std::uint64_t{1} << 62;
constexpr std::uint64_t kMaxImageSide = 1u << 14;

void check_vertex(const SampledTree& tree, NodeId u) {
    if (u >= tree.size()) throw OutOfRange("vertex " + std::to_string(u) + " is not stored in the sampled tree");
}

// Total number of ones among the children of n parents whose child count follows `law`.
std::uint64_t draw_ones(const CountLaw& law, std::uint64_t n, CounterRng& rng) {
    if (n == 0) return 0;
    const auto m = static_cast<std::uint64_t>(law.m());
    if (n > kCountLimit / m) {
        throw BudgetExceeded("aggregated population exceeds 2^62 vertices");
    }
    switch (law.kind()) {
        case CountLaw::Kind::Binomial: {
            if (law.p() <= 0.0) return 0;
            if (law.p() >= 1.0) return n * m;
            std::binomial_distribution<std::int64_t> bin(static_cast<std::int64_t>(n * m), law.p());
            return static_cast<std::uint64_t>(bin(rng));
        }
        case CountLaw::Kind::Fixed:
            return n * static_cast<std::uint64_t>(law.count());
        case CountLaw::Kind::Table: {
            // multinomial split of the parents by their number of ones
            const auto& pmf = law.pmf();
            std::uint64_t remaining = n;
            double mass = 1.0;
            std::uint64_t ones = 0;
            for (std::size_t k = 0; k < pmf.size() && remaining > 0; ++k) {
                std::uint64_t nk = remaining;
                if (k + 1 < pmf.size() && mass > 0.0) {
                    const double q = std::clamp(pmf[k] / mass, 0.0, 1.0);
                    if (q < 1.0) {
                        std::binomial_distribution<std::int64_t> bin(static_cast<std::int64_t>(remaining), q);
                        nk = static_cast<std::uint64_t>(bin(rng));
                    }
                }
                ones += nk * k;
                remaining -= nk;
                mass -= pmf[k];
            }
            return ones;
        }
    }
    return 0;
}

// #S_{start+1} .. #S_depth appended to `counts`, simulated on aggregated counts
// of state-1 and live state-0 vertices.
void continue_counts(const StageTable& table, const SamplerTable& samplers, std::size_t start, std::size_t depth,
                     std::uint64_t n0, std::uint64_t n1, CounterRng& rng, std::vector<std::uint64_t>& counts) {
    for (std::size_t j = start; j < depth; ++j) {
        if (samplers.absorbing_from(j)) n0 = 0;
        if (n0 == 0 && n1 == 0) {
            counts.resize(depth + 1, 0);
            break;
        }
        const auto m = static_cast<std::uint64_t>(table.m(j));
        const std::uint64_t ones1 = draw_ones(table.law(1, j), n1, rng);
        const std::uint64_t ones0 = draw_ones(table.law(0, j), n0, rng);
        const std::uint64_t zeros = (n1 * m - ones1) + (n0 * m - ones0);
        n1 = ones1 + ones0;
        n0 = zeros;
        counts.push_back(n1);
    }
}

std::vector<std::uint64_t> simulate_counts(const StageTable& table, const SamplerTable& samplers, std::size_t depth,
                                           double initial_one_prob, CounterRng& rng) {
    std::vector<std::uint64_t> counts;
    const std::uint64_t n1 = rng.uniform() < initial_one_prob ? 1 : 0;
    counts.push_back(n1);
    continue_counts(table, samplers, 0, depth, 1 - n1, n1, rng, counts);
    return counts;
}

FrequencyEstimate frequency(std::size_t replicas, std::size_t hits) {
    FrequencyEstimate out;
    out.replicas = replicas;
    out.hits = hits;
    if (replicas > 0) {
        out.frequency = static_cast<double>(hits) / static_cast<double>(replicas);
        out.std_error = std::sqrt(out.frequency * (1.0 - out.frequency) / static_cast<double>(replicas));
    }
    return out;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

std::uint64_t replica_seed(std::uint64_t seed, std::size_t r) {
    return derive_key(derive_key(seed, kReplicaDomain), static_cast<std::uint64_t>(r));
}

std::vector<std::uint64_t> survivor_process(const SampledTree& tree, NodeId u) {
    check_vertex(tree, u);
    const std::size_t g = tree.generation_of(u);
    std::vector<std::uint64_t> out(tree.depth() - g + 1, 0);
    if (tree.node(u).state == 0) return out;
    std::vector<NodeId> level{u}, next;
    for (std::size_t j = g;; ++j) {
        out[j - g] = level.size();
        if (j == tree.depth() || level.empty()) break;
        next.clear();
        const int m = tree.branching(j);
        for (NodeId v : level) {
            for (int k = 0; k < m; ++k) {
                const NodeId c = tree.child(v, k);
                if (tree.node(c).state == 1) next.push_back(c);
            }
        }
        level.swap(next);
    }
    return out;
}

FlowEstimate flow(const SampledTree& tree, double s, NodeId u, std::optional<std::size_t> cut_depth) {
    check_vertex(tree, u);
    if (!(s > 0.0)) throw OutOfRange("flow exponent must be positive");
    const std::size_t g = tree.generation_of(u);
    const std::size_t cut = cut_depth.value_or(tree.depth());
    if (cut < g || cut > tree.depth()) {
        throw OutOfRange("cut depth " + std::to_string(cut) + " outside [" + std::to_string(g) + ", " +
                         std::to_string(tree.depth()) + "]");
    }
    FlowEstimate out;
    out.s = s;
    out.cut_depth = cut;
    if (tree.node(u).state == 0) return out;

    // values of the cut-depth generation, then upward; only state-1 vertices matter
    std::vector<double> value(tree.size(), 0.0);
    for (std::size_t i = tree.generation_begin(cut); i < tree.generation_end(cut); ++i) {
        value[i] = tree.nodes()[i].state == 1 ? 1.0 : 0.0;
    }
    for (std::size_t j = cut; j-- > g;) {
        const int m = tree.branching(j);
        for (std::size_t i = tree.generation_begin(j); i < tree.generation_end(j); ++i) {
            const auto& n = tree.nodes()[i];
            if (n.state == 0) continue;
            double sum = 0.0;
            for (int k = 0; k < m; ++k) {
                const NodeId c = n.first_child + static_cast<NodeId>(k);
                const auto& cn = tree.nodes()[c];
                if (cn.state == 1) sum += std::pow(cn.ratio, s) * value[c];
            }
            value[i] = std::min(1.0, sum);
        }
    }
    out.value = value[u];
    return out;
}

std::vector<double> flow_profile(const SampledTree& tree, double s, NodeId u) {
    check_vertex(tree, u);
    std::vector<double> out;
    for (std::size_t j = tree.generation_of(u); j <= tree.depth(); ++j) out.push_back(flow(tree, s, u, j).value);
    return out;
}

std::vector<double> martingale_series(const SampledTree& tree, const EnvironmentModel& model, double s, NodeId u) {
    check_vertex(tree, u);
    if (s < 0.0) throw OutOfRange("martingale exponent must be nonnegative");
    const std::size_t g = tree.generation_of(u);
    std::vector<double> out;
    double norm = 1.0;
    std::vector<std::pair<NodeId, double>> level, next;
    if (tree.node(u).state == 1) level.emplace_back(u, 1.0);
    for (std::size_t j = g;; ++j) {
        double z = 0.0;
        for (const auto& [v, w] : level) z += w;
        out.push_back(z / norm);
        if (j == tree.depth()) break;
        const double a = alpha(model, s, j);
        if (!(a > 0.0)) {
            throw UndefinedNormalizer("alpha_{s," + std::to_string(j) + "} vanishes at s = " + std::to_string(s));
        }
        norm *= a;
        next.clear();
        const int m = tree.branching(j);
        for (const auto& [v, w] : level) {
            for (int k = 0; k < m; ++k) {
                const NodeId c = tree.child(v, k);
                const auto& cn = tree.node(c);
                if (cn.state == 1) next.emplace_back(c, w * std::pow(cn.ratio, s));
            }
        }
        level.swap(next);
    }
    return out;
}

CubeSet realize_cubes(const SampledTree& tree, const EnvironmentModel& model, std::size_t j) {
    if (!model.geometry || !std::holds_alternative<CubeSubdivision>(*model.geometry)) {
        throw WrongGeometry("cube realization needs a cube-subdivision geometry");
    }
    if (j > tree.depth()) throw OutOfRange("generation beyond the sampled depth");
    CubeSet out;
    out.generation = j;
    out.dim = model.ambient_dim;
    std::vector<int> sides;
    for (std::size_t g = 0; g < j; ++g) {
        sides.push_back(model.cube_side(g));
        if (out.side > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(sides.back())) {
            throw OutOfRange("cube lattice side overflows 64 bits");
        }
        out.side *= static_cast<std::uint64_t>(sides.back());
    }
    const int d = model.ambient_dim;
    std::vector<std::uint64_t> digit(d);
    for (std::size_t i = tree.generation_begin(j); i < tree.generation_end(j); ++i) {
        if (tree.nodes()[i].state == 0) continue;
        const auto path = tree.path(static_cast<NodeId>(i));
        std::vector<std::uint64_t> coord(d, 0);
        for (std::size_t g = 0; g < path.size(); ++g) {
            const auto c = static_cast<std::uint64_t>(sides[g]);
            auto k = static_cast<std::uint64_t>(path[g]);
            for (int a = d; a-- > 0;) {
                digit[a] = k % c;
                k /= c;
            }
            for (int a = 0; a < d; ++a) coord[a] = coord[a] * c + digit[a];
        }
        out.cubes.push_back(std::move(coord));
    }
    return out;
}

Image render_2d(const SampledTree& tree, const EnvironmentModel& model, std::size_t j) {
    if (model.ambient_dim != 2) throw WrongGeometry("rendering needs a planar model");
    const CubeSet cubes = realize_cubes(tree, model, j);
    if (cubes.side > kMaxImageSide) {
        throw BudgetExceeded("image side " + std::to_string(cubes.side) + " exceeds " + std::to_string(kMaxImageSide));
    }
    Image img;
    img.width = img.height = cubes.side;
    img.pixels.assign(img.width * img.height, 255);
    for (const auto& c : cubes.cubes) img.pixels[c[1] * img.width + c[0]] = 0;
    return img;
}

std::string to_pgm(const Image& image) {
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    out.append(image.pixels.begin(), image.pixels.end());
    return out;
}

DimensionEstimate box_count(const EnvironmentModel& model, std::size_t depth, std::size_t replicas,
                            std::uint64_t seed, unsigned workers) {
    if (!model.geometry || !std::holds_alternative<CubeSubdivision>(*model.geometry)) {
        throw WrongGeometry("box counting needs a cube-subdivision geometry");
    }
    if (replicas == 0) throw OutOfRange("box counting needs at least one replica");
    DimensionEstimate out;
    out.j_min = (depth + 1) / 2;
    out.j_max = depth;
    out.replicas = replicas;
    if (out.j_max + 1 < out.j_min + 4) throw OutOfRange("box-count window needs at least 4 generations");
    const DStarResult ds = d_star(model);
    out.analytic_d_star = ds.value;

    double log_side = 0.0;
    for (std::size_t j = 0; j <= depth; ++j) {
        if (j >= out.j_min) out.log_sides.push_back(log_side);
        if (j < depth) log_side += std::log(static_cast<double>(model.cube_side(j)));
    }

    const StageTable table(model);
    const SamplerTable samplers(model);
    std::vector<std::vector<std::uint64_t>> counts(replicas);
    parallel_for(replicas, workers, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        counts[r] = simulate_counts(table, samplers, depth, model.initial_one_prob, rng);
    });

    const std::size_t w = out.j_max - out.j_min + 1;
    out.mean_log_counts.assign(w, 0.0);
    for (const auto& c : counts) {
        std::vector<double> y;
        for (std::size_t j = out.j_min; j <= out.j_max; ++j) {
            if (c[j] == 0) break;
            y.push_back(std::log(static_cast<double>(c[j])));
        }
        if (y.size() < w) continue;
        out.replica_slopes.push_back(least_squares_slope(out.log_sides, y));
        for (std::size_t i = 0; i < w; ++i) out.mean_log_counts[i] += y[i];
    }
    out.surviving = out.replica_slopes.size();
    if (out.surviving == 0) throw AllExtinct("every replica dies before generation " + std::to_string(out.j_max));
    const double n = static_cast<double>(out.surviving);
    for (double& v : out.mean_log_counts) v /= n;
    double mean = 0.0;
    for (double v : out.replica_slopes) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : out.replica_slopes) var += (v - mean) * (v - mean);
    out.slope = mean;
    out.std_error = out.surviving > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.counts = std::move(counts);
    return out;
}

BranchingSample branching_sample(const EnvironmentModel& model, std::size_t j, std::size_t generations,
                                 std::uint64_t seed) {
    const StageTable table(model);
    CounterRng rng(seed);
    BranchingSample out;
    out.start_generation = j;
    std::uint64_t z = 1;
    double mean = 1.0;
    out.trajectory.push_back(z);
    out.normed.push_back(1.0);
    for (std::size_t n = 0; n < generations; ++n) {
        const CountLaw& law = table.law(1, j + n);
        z = draw_ones(law, z, rng);
        mean *= law.mean();
        out.trajectory.push_back(z);
        out.normed.push_back(mean > 0.0 ? static_cast<double>(z) / mean : 0.0);
    }
    return out;
}

FrequencyEstimate branching_extinction(const EnvironmentModel& model, std::size_t j, std::size_t generations,
                                       std::size_t replicas, std::uint64_t seed, unsigned workers) {
    const StageTable table(model);
    std::vector<std::uint8_t> extinct(replicas, 0);
    parallel_for(replicas, workers, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        std::uint64_t z = 1;
        for (std::size_t n = 0; n < generations && z > 0; ++n) z = draw_ones(table.law(1, j + n), z, rng);
        extinct[r] = z == 0;
    });
    std::size_t hits = 0;
    for (auto e : extinct) hits += e;
    return frequency(replicas, hits);
}

EmptinessEstimate monte_carlo_emptiness(const EnvironmentModel& model, std::size_t depth, std::size_t replicas,
                                        std::uint64_t seed, unsigned workers) {
    const StageTable table(model);
    const SamplerTable samplers(model);
    std::vector<std::uint8_t> empty(replicas, 0);
    parallel_for(replicas, workers, [&](std::size_t r) {
        CounterRng rng(replica_seed(seed, r));
        empty[r] = simulate_counts(table, samplers, depth, model.initial_one_prob, rng).back() == 0;
    });
    std::size_t hits = 0;
    for (auto e : empty) hits += e;

    EmptinessEstimate out;
    out.depth = depth;
    out.estimate = frequency(replicas, hits);
    out.residual = truncation_residual(model, depth);
    out.bracket_lo = out.estimate.frequency;
    out.bracket_hi = std::isnan(out.residual) ? 1.0 : std::min(1.0, out.estimate.frequency + out.residual);
    return out;
}

double truncation_residual(const EnvironmentModel& model, std::size_t depth) {
    try {
        const double f = f_sequence(model, depth).back().f;
        return std::max(0.0, phi_big(model, depth, f) - phi_big(model, depth, 0.0));
    } catch (const DivisionByZero&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

ReplicaRecord simulate_replica(const EnvironmentModel& model, std::size_t depth, double s, std::uint64_t seed,
                               std::size_t tree_budget) {
    const SampledTree tree = sample_tree_capped(model, depth, seed, tree_budget);
    ReplicaRecord out;
    out.tree_depth = tree.depth();
    out.counts = tree.survivor_counts();
    if (tree.depth() < depth) {
        const StageTable table(model);
        const SamplerTable samplers(model);
        std::uint64_t n0 = 0;
        for (std::size_t i = tree.generation_begin(tree.depth()); i < tree.generation_end(tree.depth()); ++i) {
            n0 += tree.nodes()[i].state == 0;
        }
        CounterRng rng(derive_key(seed, 2));
        continue_counts(table, samplers, tree.depth(), depth, n0, out.counts.back(), rng, out.counts);
    }
    out.flows = flow_profile(tree, s, tree.root());
    const auto ju = j_underline(model);
    if (ju && *ju == 0) {
        try {
            out.martingale = martingale_series(tree, model, s, tree.root());
        } catch (const UndefinedNormalizer&) {
            out.martingale.reset();
        }
    }
    return out;
}

}  // namespace tmfrac
