#pragma once

// Per-stage samplers shared by the tree and count-level simulators.

#include <algorithm>
#include <cstddef>
#include <variant>
#include <vector>

#include "tmfrac/model.hpp"
#include "tmfrac/rng.hpp"

namespace tmfrac {

class DiscreteIndex {
public:
    DiscreteIndex() = default;
    explicit DiscreteIndex(const std::vector<double>& weights) {
        double acc = 0.0;
        for (double w : weights) {
            acc += w;
            cdf_.push_back(acc);
        }
    }

    std::size_t draw(CounterRng& rng) const {
        const double u = rng.uniform() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        // rounding can leave u == back(); zero-weight tails are never chosen
        std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
        if (i >= cdf_.size()) i = cdf_.size() - 1;
        return i;
    }

private:
    std::vector<double> cdf_;
};

class StateSampler {
public:
    StateSampler(const TransitionLaw& law, int m) : m_(m), law_(law) {
        if (const auto* d = std::get_if<DiscreteStates>(&law_)) {
            std::vector<double> w;
            for (const auto& a : d->atoms) w.push_back(a.weight);
            index_ = DiscreteIndex(w);
        }
    }

    void draw(CounterRng& rng, StateVector& out) const {
        out.assign(m_, 0);
        if (const auto* b = std::get_if<ProductBernoulli>(&law_)) {
            for (int k = 0; k < m_; ++k) out[k] = rng.uniform() < b->p ? 1 : 0;
        } else if (const auto* mc = std::get_if<Microcanonical>(&law_)) {
            int need = mc->count;
            for (int k = 0; k < m_ && need > 0; ++k) {
                if (rng.uniform() * (m_ - k) < need) {
                    out[k] = 1;
                    --need;
                }
            }
        } else {
            const auto& atoms = std::get<DiscreteStates>(law_).atoms;
            out = atoms[index_.draw(rng)].states;
        }
    }

private:
    int m_;
    TransitionLaw law_;
    DiscreteIndex index_;
};

class RatioSampler {
public:
    explicit RatioSampler(const RatioLaw& law) : law_(law) {
        if (const auto* d = std::get_if<DiscreteRatios>(&law_)) {
            std::vector<double> w;
            for (const auto& a : d->atoms) w.push_back(a.weight);
            index_ = DiscreteIndex(w);
        } else if (const auto* p = std::get_if<ProductRatios>(&law_)) {
            for (const auto& c : p->coords) coord_index_.emplace_back(c.weights);
        }
    }

    void draw(CounterRng& rng, RatioVector& out) const {
        if (const auto* pm = std::get_if<PointMassRatios>(&law_)) {
            out = pm->ratios;
        } else if (const auto* d = std::get_if<DiscreteRatios>(&law_)) {
            out = d->atoms[index_.draw(rng)].ratios;
        } else {
            const auto& coords = std::get<ProductRatios>(law_).coords;
            out.resize(coords.size());
            for (std::size_t k = 0; k < coords.size(); ++k) out[k] = coords[k].values[coord_index_[k].draw(rng)];
        }
    }

private:
    RatioLaw law_;
    DiscreteIndex index_;
    std::vector<DiscreteIndex> coord_index_;
};

/// Draws (states, ratios) of the children of a vertex at one stage. States
/// come first from the stream, then ratios.
class StageSampler {
public:
    explicit StageSampler(const StageSpec& stage) : m_(stage.m) {
        if (const auto* sep = std::get_if<SeparatedKernels>(&stage.kernels)) {
            states_.emplace_back(sep->from0, stage.m);
            states_.emplace_back(sep->from1, stage.m);
            ratios_.emplace_back(sep->ratios);
        } else {
            const auto& jk = std::get<JointKernels>(stage.kernels);
            joint_[0] = jk.from0;
            joint_[1] = jk.from1;
            for (int t = 0; t < 2; ++t) {
                std::vector<double> w;
                for (const auto& a : joint_[t].atoms) w.push_back(a.weight);
                joint_index_[t] = DiscreteIndex(w);
            }
        }
    }

    int m() const { return m_; }

    void draw(int t, CounterRng& rng, StateVector& states, RatioVector& ratios) const {
        if (!states_.empty()) {
            states_[t].draw(rng, states);
            ratios_.front().draw(rng, ratios);
        } else {
            const auto& a = joint_[t].atoms[joint_index_[t].draw(rng)];
            states = a.states;
            ratios = a.ratios;
        }
    }

private:
    int m_;
    std::vector<StateSampler> states_;
    std::vector<RatioSampler> ratios_;
    JointLaw joint_[2];
    DiscreteIndex joint_index_[2];
};

/// One sampler per distinct stage (prefix plus one tail period).
class SamplerTable {
public:
    explicit SamplerTable(const EnvironmentModel& model)
        : prefix_(model.prefix_length()), period_(model.period()) {
        const std::size_t h = model.horizon();
        std::vector<bool> absorbing;
        for (std::size_t j = 0; j < h; ++j) {
            samplers_.emplace_back(model.stage(j));
            absorbing.push_back(zero_state_absorbing(model.stage(j)));
        }
        bool tail_all = true;
        for (std::size_t j = prefix_; j < h; ++j) tail_all = tail_all && absorbing[j];
        absorbing_from_.assign(h, tail_all);
        for (std::size_t j = prefix_; j-- > 0;) {
            absorbing_from_[j] = absorbing[j] && (j + 1 < prefix_ ? absorbing_from_[j + 1] : tail_all);
        }
    }

    std::size_t slot(std::size_t j) const { return j < prefix_ ? j : prefix_ + (j - prefix_) % period_; }
    const StageSampler& at(std::size_t j) const { return samplers_[slot(j)]; }
    /// State 0 only produces state-0 children at every generation >= j.
    bool absorbing_from(std::size_t j) const { return absorbing_from_[slot(j)]; }

private:
    std::size_t prefix_;
    std::size_t period_;
    std::vector<StageSampler> samplers_;
    std::vector<bool> absorbing_from_;
};

}  // namespace tmfrac
