#pragma once

// Helpers shared by the test binaries.

#include <string>
#include <utility>
#include <vector>

#include "tmfrac/model.hpp"
#include "tmfrac/zoo.hpp"

namespace tmfrac::testing {

/// Keeps the first `max_atoms` atoms of every discrete ratio law, renormalized.
inline EnvironmentModel restrict_ratio_atoms(EnvironmentModel model, std::size_t max_atoms) {
    auto restrict_stage = [&](StageSpec& st) {
        auto* sep = std::get_if<SeparatedKernels>(&st.kernels);
        if (!sep) return;
        auto* law = std::get_if<DiscreteRatios>(&sep->ratios);
        if (!law || law->atoms.size() <= max_atoms) return;
        law->atoms.resize(max_atoms);
        double total = 0.0;
        for (const auto& a : law->atoms) total += a.weight;
        for (auto& a : law->atoms) a.weight /= total;
    };
    for (auto& st : model.prefix) restrict_stage(st);
    if (auto* c = std::get_if<ConstantTail>(&model.tail)) restrict_stage(c->stage);
    if (auto* p = std::get_if<PeriodicTail>(&model.tail)) {
        for (auto& st : p->stages) restrict_stage(st);
    }
    return model;
}

/// Zoo models with m_j <= 2 for j < depth, ratio laws cut to two atoms.
inline std::vector<std::pair<std::string, EnvironmentModel>> enumerable_zoo(std::size_t depth = 3) {
    std::vector<std::pair<std::string, EnvironmentModel>> out;
    for (auto& [name, model] : zoo::catalog()) {
        bool small = true;
        for (std::size_t j = 0; j < depth; ++j) small = small && model.stage(j).m <= 2;
        if (small) out.emplace_back(name, restrict_ratio_atoms(model, 2));
    }
    return out;
}

}  // namespace tmfrac::testing
