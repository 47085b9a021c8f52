#include "tmfrac/tree.hpp"

#include <algorithm>

#include "tmfrac/errors.hpp"
#include "tmfrac/rng.hpp"
#include "sampling.hpp"

namespace tmfrac {

SampledTree::SampledTree(std::size_t depth, std::uint64_t seed, std::vector<int> branching, std::vector<TreeNode> nodes,
                         std::vector<std::size_t> offsets)
    : depth_(depth),
      seed_(seed),
      branching_(std::move(branching)),
      nodes_(std::move(nodes)),
      offsets_(std::move(offsets)) {
    if (offsets_.size() != depth_ + 2 || branching_.size() < depth_) {
        throw Error("sampled tree layout does not match its depth");
    }
    if (nodes_.empty() || offsets_.front() != 0 || offsets_.back() != nodes_.size()) {
        throw Error("sampled tree offsets do not cover the node list");
    }
}

std::size_t SampledTree::generation_of(NodeId u) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(u));
    return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

NodeId SampledTree::child(NodeId u, int k) const {
    const auto& n = node(u);
    if (n.first_child == kNoNode) return kNoNode;
    return n.first_child + static_cast<NodeId>(k);
}

std::vector<std::uint64_t> SampledTree::survivor_counts() const {
    std::vector<std::uint64_t> out(depth_ + 1, 0);
    for (std::size_t j = 0; j <= depth_; ++j) {
        for (std::size_t i = offsets_[j]; i < offsets_[j + 1]; ++i) out[j] += nodes_[i].state;
    }
    return out;
}

std::vector<int> SampledTree::path(NodeId u) const {
    std::vector<int> out;
    for (NodeId v = u; nodes_.at(v).parent != kNoNode; v = nodes_[v].parent) {
        out.push_back(static_cast<int>(nodes_[v].slot));
    }
    std::reverse(out.begin(), out.end());
    return out;
}

NodeId SampledTree::find(const std::vector<int>& p) const {
    NodeId u = root();
    for (int k : p) {
        u = child(u, k);
        if (u == kNoNode) return kNoNode;
    }
    return u;
}

namespace {

SampledTree grow(const EnvironmentModel& model, std::size_t depth, std::uint64_t seed, std::size_t node_budget,
                 bool capped) {
    SamplerTable samplers(model);
    std::vector<int> branching;

    std::vector<TreeNode> nodes;
    std::vector<std::size_t> offsets{0, 1};
    const std::uint64_t root_key = derive_key(seed, 0);
    {
        CounterRng rng(derive_key(seed, 1));
        TreeNode root;
        root.state = rng.uniform() < model.initial_one_prob ? 1 : 0;
        nodes.push_back(root);
    }

    std::vector<std::uint64_t> keys{root_key};
    std::vector<std::uint64_t> next_keys;
    StateVector states;
    RatioVector ratios;
    for (std::size_t j = 0; j < depth; ++j) {
        const auto& sampler = samplers.at(j);
        const bool zero_dead = samplers.absorbing_from(j);
        const int m = sampler.m();
        std::size_t expanded = 0;
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) expanded += nodes[i].state == 1 || !zero_dead;
        if (nodes.size() + expanded * m > node_budget) {
            if (capped) break;
            throw BudgetExceeded("sampled tree exceeds " + std::to_string(node_budget) + " vertices at depth " +
                                 std::to_string(depth) + " (generation " + std::to_string(j + 1) + ")");
        }
        branching.push_back(m);
        next_keys.clear();
        for (std::size_t i = offsets[j]; i < offsets[j + 1]; ++i) {
            const int t = nodes[i].state;
            if (t == 0 && zero_dead) continue;
            const std::uint64_t key = keys[i - offsets[j]];
            CounterRng rng(key);
            sampler.draw(t, rng, states, ratios);
            nodes[i].first_child = static_cast<NodeId>(nodes.size());
            for (int k = 0; k < m; ++k) {
                TreeNode c;
                c.parent = static_cast<NodeId>(i);
                c.slot = static_cast<std::uint32_t>(k);
                c.state = states[k];
                c.ratio = ratios[k];
                nodes.push_back(c);
                next_keys.push_back(derive_key(key, static_cast<std::uint64_t>(k)));
            }
        }
        offsets.push_back(nodes.size());
        keys.swap(next_keys);
    }
    const std::size_t reached = offsets.size() - 2;
    return SampledTree(reached, seed, std::move(branching), std::move(nodes), std::move(offsets));
}

}  // namespace

SampledTree sample_tree(const EnvironmentModel& model, std::size_t depth, std::uint64_t seed, std::size_t node_budget) {
    return grow(model, depth, seed, node_budget, false);
}

SampledTree sample_tree_capped(const EnvironmentModel& model, std::size_t depth, std::uint64_t seed,
                               std::size_t node_budget) {
    return grow(model, depth, seed, node_budget, true);
}

}  // namespace tmfrac
