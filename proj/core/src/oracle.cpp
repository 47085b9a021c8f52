#include "tmfrac/oracle.hpp"

#include <cmath>
#include <functional>

#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

struct Atom {
    StateVector states;
    RatioVector ratios;
    double weight = 0.0;
};

// Complete tree skeleton to depth J: generation-major, children contiguous.
struct Skeleton {
    std::vector<TreeNode> nodes;
    std::vector<std::size_t> offsets;
    std::vector<int> branching;
    std::vector<std::size_t> generation;
};

Skeleton complete_skeleton(const EnvironmentModel& model, std::size_t big_j, std::size_t max_nodes) {
    Skeleton sk;
    sk.offsets = {0, 1};
    sk.nodes.resize(1);
    sk.generation = {0};
    for (std::size_t g = 0; g < big_j; ++g) {
        const int m = model.stage(g).m;
        sk.branching.push_back(m);
        const std::size_t begin = sk.offsets[g], end = sk.offsets[g + 1];
        if ((end - begin) * m > max_nodes) throw BudgetExceeded("complete tree too large to enumerate");
        for (std::size_t i = begin; i < end; ++i) {
            sk.nodes[i].first_child = static_cast<NodeId>(sk.nodes.size());
            for (int k = 0; k < m; ++k) {
                TreeNode c;
                c.parent = static_cast<NodeId>(i);
                c.slot = static_cast<std::uint32_t>(k);
                sk.nodes.push_back(c);
                sk.generation.push_back(g + 1);
            }
        }
        sk.offsets.push_back(sk.nodes.size());
    }
    return sk;
}

using AtomTable = std::vector<std::vector<Atom>>;  // [2*g + t]

std::vector<Atom> stage_state_atoms(const StageSpec& st, int t) {
    std::vector<Atom> atoms;
    if (const auto* sep = std::get_if<SeparatedKernels>(&st.kernels)) {
        for (const auto& a : state_atoms(t == 0 ? sep->from0 : sep->from1, st.m)) {
            atoms.push_back({a.states, RatioVector(st.m, 1.0), a.weight});
        }
    } else {
        const auto& jk = std::get<JointKernels>(st.kernels);
        for (const auto& a : (t == 0 ? jk.from0 : jk.from1).atoms) {
            if (a.weight > 0.0) atoms.push_back({a.states, RatioVector(st.m, 1.0), a.weight});
        }
    }
    return atoms;
}

AtomTable state_only_atoms(const EnvironmentModel& model, std::size_t big_j) {
    AtomTable table;
    for (std::size_t g = 0; g < big_j; ++g) {
        for (int t = 0; t < 2; ++t) table.push_back(stage_state_atoms(model.stage(g), t));
    }
    return table;
}

AtomTable joint_atoms(const EnvironmentModel& model, std::size_t big_j, std::size_t max_atoms) {
    AtomTable table;
    for (std::size_t g = 0; g < big_j; ++g) {
        for (int t = 0; t < 2; ++t) {
            std::vector<Atom> atoms;
            for (const auto& a : as_joint(model.stage(g), t, max_atoms).atoms) atoms.push_back({a.states, a.ratios, a.weight});
            table.push_back(std::move(atoms));
        }
    }
    return table;
}

// Calls visit(probability, nodes) once per outcome of the complete tree.
void enumerate(const EnvironmentModel& model, std::size_t big_j, const AtomTable& atoms, std::size_t max_outcomes,
               Skeleton& sk, const std::function<void(double, const std::vector<TreeNode>&)>& visit) {
    const std::size_t internal = sk.offsets[big_j];
    std::size_t count = 0;
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double prob) {
        if (i == internal) {
            if (++count > max_outcomes) {
                throw BudgetExceeded("more than " + std::to_string(max_outcomes) + " outcomes to enumerate");
            }
            visit(prob, sk.nodes);
            return;
        }
        const auto& node = sk.nodes[i];
        const std::size_t g = sk.generation[i];
        for (const Atom& a : atoms[2 * g + node.state]) {
            for (std::size_t k = 0; k < a.states.size(); ++k) {
                auto& c = sk.nodes[node.first_child + k];
                c.state = a.states[k];
                c.ratio = a.ratios[k];
            }
            rec(i + 1, prob * a.weight);
        }
    };
    const double pi = model.initial_one_prob;
    for (int t = 0; t < 2; ++t) {
        const double w = t == 1 ? pi : 1.0 - pi;
        if (w <= 0.0) continue;
        sk.nodes[0].state = static_cast<std::uint8_t>(t);
        rec(0, w);
    }
}

struct Cut {
    double weight = 0.0;
    std::vector<NodeId> vertices;
};

// Every cut of the surviving subtree of v truncated at depth J.
std::vector<Cut> cuts_of(const std::vector<TreeNode>& nodes, const Skeleton& sk, NodeId v, double s,
                         std::size_t big_j, std::size_t max_cuts) {
    std::vector<Cut> out;
    out.push_back({1.0, {v}});
    if (sk.generation[v] == big_j) return out;
    const int m = sk.branching[sk.generation[v]];
    std::vector<NodeId> alive;
    std::vector<std::vector<Cut>> child_cuts;
    for (int k = 0; k < m; ++k) {
        const NodeId c = nodes[v].first_child + static_cast<NodeId>(k);
        if (nodes[c].state == 1) {
            alive.push_back(c);
            child_cuts.push_back(cuts_of(nodes, sk, c, s, big_j, max_cuts));
        }
    }
    std::size_t combos = 1;
    for (const auto& cc : child_cuts) {
        if (combos > max_cuts / cc.size()) throw BudgetExceeded("too many cuts to enumerate");
        combos *= cc.size();
    }
    std::vector<std::size_t> pick(alive.size(), 0);
    for (std::size_t n = 0; n < combos; ++n) {
        Cut cut;
        double sum = 0.0;
        for (std::size_t a = 0; a < alive.size(); ++a) {
            const Cut& sub = child_cuts[a][pick[a]];
            sum += std::pow(nodes[alive[a]].ratio, s) * sub.weight;
            cut.vertices.insert(cut.vertices.end(), sub.vertices.begin(), sub.vertices.end());
        }
        cut.weight = sum;
        out.push_back(std::move(cut));
        for (std::size_t a = alive.size(); a-- > 0;) {
            if (++pick[a] < child_cuts[a].size()) break;
            pick[a] = 0;
        }
    }
    return out;
}

}  // namespace

double exact_generating_function(const EnvironmentModel& model, std::size_t j, double z, EnumerationBudget budget) {
    double total = 0.0;
    for (const auto& [count, prob] : exact_count_distribution(model, j, budget)) {
        total += prob * std::pow(z, static_cast<double>(count));
    }
    return total;
}

std::map<std::uint64_t, double> exact_count_distribution(const EnvironmentModel& model, std::size_t j,
                                                         EnumerationBudget budget) {
    Skeleton sk = complete_skeleton(model, j, budget.max_outcomes);
    const AtomTable atoms = state_only_atoms(model, j);
    std::map<std::uint64_t, double> out;
    enumerate(model, j, atoms, budget.max_outcomes, sk, [&](double prob, const std::vector<TreeNode>& nodes) {
        std::uint64_t ones = 0;
        for (std::size_t i = sk.offsets[j]; i < sk.offsets[j + 1]; ++i) ones += nodes[i].state;
        out[ones] += prob;
    });
    return out;
}

double exact_extinction_by(const EnvironmentModel& model, std::size_t j, std::size_t big_j, EnumerationBudget budget) {
    if (big_j < j) throw OutOfRange("extinction horizon precedes the start generation");
    // pmf of Z_{j,n}, starting from a single vertex
    std::vector<double> law{0.0, 1.0};
    for (std::size_t g = j; g < big_j; ++g) {
        const StageSpec& st = model.stage(g);
        std::vector<double> offspring(st.m + 1, 0.0);
        for (const auto& a : stage_state_atoms(st, 1)) {
            int ones = 0;
            for (auto x : a.states) ones += x;
            offspring[ones] += a.weight;
        }
        const std::size_t max_z = law.size() - 1;
        // the convolution powers cost about max_z^2 * m operations
        const double work = static_cast<double>(max_z) * static_cast<double>(max_z * st.m + 1);
        if (work > 16.0 * static_cast<double>(budget.max_outcomes)) {
            throw BudgetExceeded("offspring convolution too large");
        }
        std::vector<double> next(max_z * st.m + 1, 0.0);
        std::vector<double> power{1.0};  // offspring^{*z}
        for (std::size_t z = 0; z <= max_z; ++z) {
            if (law[z] != 0.0) {
                for (std::size_t k = 0; k < power.size(); ++k) next[k] += law[z] * power[k];
            }
            if (z == max_z) break;
            std::vector<double> conv(power.size() + st.m, 0.0);
            for (std::size_t a = 0; a < power.size(); ++a) {
                for (int b = 0; b <= st.m; ++b) conv[a + b] += power[a] * offspring[b];
            }
            power.swap(conv);
        }
        law.swap(next);
    }
    return law[0];
}

MinCutResult exact_min_cut(const EnvironmentModel& model, double s, std::size_t big_j, EnumerationBudget budget) {
    Skeleton sk = complete_skeleton(model, big_j, budget.max_outcomes);
    const AtomTable atoms = joint_atoms(model, big_j, budget.max_outcomes);
    MinCutResult out;
    enumerate(model, big_j, atoms, budget.max_outcomes, sk, [&](double prob, const std::vector<TreeNode>& nodes) {
        MinCutOutcome o;
        o.probability = prob;
        o.tree = SampledTree(big_j, 0, sk.branching, nodes, sk.offsets);
        if (nodes[0].state == 1) {
            const auto cuts = cuts_of(nodes, sk, 0, s, big_j, budget.max_outcomes);
            o.cuts_examined = cuts.size();
            const Cut* best = &cuts.front();
            for (const auto& c : cuts) {
                if (c.weight < best->weight) best = &c;
            }
            o.value = best->weight;
            o.best_cut = best->vertices;
        }
        out.distribution[o.value] += prob;
        out.outcomes.push_back(std::move(o));
    });
    return out;
}

}  // namespace tmfrac
