#pragma once

// One sampled prefix of the random construction.
//
// Storage is generation-major and sparse: a vertex's children are stored
// (contiguously) only when they can contain a state-1 vertex, that is when the
// vertex itself is in state 1 or the state-0 kernel is not absorbing from its
// generation on. Missing subtrees are entirely in state 0.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tmfrac/model.hpp"

namespace tmfrac {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;
inline constexpr std::size_t kDefaultNodeBudget = 100'000'000;

struct TreeNode {
    NodeId parent = kNoNode;
    NodeId first_child = kNoNode;
    std::uint32_t slot = 0;  // index among its siblings
    std::uint8_t state = 0;
    double ratio = 1.0;  // L_u, 1 at the root
};

class SampledTree {
public:
    SampledTree() = default;

    /// `branching[j]` is m_j for j < depth; `offsets` has depth + 2 entries.
    SampledTree(std::size_t depth, std::uint64_t seed, std::vector<int> branching, std::vector<TreeNode> nodes,
                std::vector<std::size_t> offsets);

    std::size_t depth() const { return depth_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return nodes_.size(); }
    NodeId root() const { return 0; }

    const TreeNode& node(NodeId u) const { return nodes_.at(u); }
    const std::vector<TreeNode>& nodes() const { return nodes_; }

    std::size_t generation_begin(std::size_t j) const { return offsets_.at(j); }
    std::size_t generation_end(std::size_t j) const { return offsets_.at(j + 1); }
    std::size_t generation_of(NodeId u) const;
    int branching(std::size_t j) const { return branching_.at(j); }

    bool expanded(NodeId u) const { return node(u).first_child != kNoNode; }
    /// k-th child, or kNoNode when the children are not stored.
    NodeId child(NodeId u, int k) const;

    /// #S_j for j = 0 .. depth: state-1 vertices per generation, whatever their ancestry.
    std::vector<std::uint64_t> survivor_counts() const;

    /// Child slots from the root down to u.
    std::vector<int> path(NodeId u) const;
    /// Vertex at the given path, or kNoNode when it lies in an unstored all-zero subtree.
    NodeId find(const std::vector<int>& path) const;

private:
    std::size_t depth_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<int> branching_;
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> offsets_;
};

/// Deterministic in (model, depth, seed); a deeper tree with the same seed
/// extends a shallower one. Throws BudgetExceeded past `node_budget` vertices.
SampledTree sample_tree(const EnvironmentModel& model, std::size_t depth, std::uint64_t seed,
                        std::size_t node_budget = kDefaultNodeBudget);

/// Same draws as sample_tree, but stops at the deepest generation (at most
/// `depth`) whose vertices fit in `node_budget` instead of throwing.
SampledTree sample_tree_capped(const EnvironmentModel& model, std::size_t depth, std::uint64_t seed,
                               std::size_t node_budget);

}  // namespace tmfrac
