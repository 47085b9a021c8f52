#include "tmfrac/stage_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::vector<double> pmf_of_atoms(const std::vector<WeightedStates>& atoms, int m) {
    std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
    for (const auto& a : atoms) {
        int ones = static_cast<int>(std::count(a.states.begin(), a.states.end(), 1));
        pmf[ones] += a.weight;
    }
    return pmf;
}

// P(X_k = 1) for every child k.
std::vector<double> one_marginals(const TransitionLaw& law, int m) {
    return std::visit(overloaded{
                          [&](const ProductBernoulli& b) { return std::vector<double>(m, b.p); },
                          [&](const Microcanonical& mc) {
                              return std::vector<double>(m, static_cast<double>(mc.count) / m);
                          },
                          [&](const DiscreteStates& d) {
                              std::vector<double> out(m, 0.0);
                              for (const auto& a : d.atoms) {
                                  for (int k = 0; k < m; ++k) out[k] += a.weight * a.states[k];
                              }
                              return out;
                          },
                      },
                      law);
}

// P(X_k = 1, X_l = 1) for k != l.
std::vector<std::vector<double>> pair_marginals(const TransitionLaw& law, int m) {
    std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
    std::visit(overloaded{
                   [&](const ProductBernoulli& b) {
                       for (auto& row : out) std::fill(row.begin(), row.end(), b.p * b.p);
                   },
                   [&](const Microcanonical& mc) {
                       double v = static_cast<double>(mc.count) * (mc.count - 1) / (static_cast<double>(m) * (m - 1));
                       for (auto& row : out) std::fill(row.begin(), row.end(), v);
                   },
                   [&](const DiscreteStates& d) {
                       for (const auto& a : d.atoms) {
                           for (int k = 0; k < m; ++k) {
                               if (!a.states[k]) continue;
                               for (int l = 0; l < m; ++l) out[k][l] += a.weight * a.states[l];
                           }
                       }
                   },
               },
               law);
    return out;
}

std::vector<double> ratio_moments(const RatioLaw& law, double s, int m) {
    return std::visit(overloaded{
                          [&](const PointMassRatios& pm) {
                              std::vector<double> out(m);
                              for (int k = 0; k < m; ++k) out[k] = std::pow(pm.ratios[k], s);
                              return out;
                          },
                          [&](const DiscreteRatios& d) {
                              std::vector<double> out(m, 0.0);
                              for (const auto& a : d.atoms) {
                                  for (int k = 0; k < m; ++k) out[k] += a.weight * std::pow(a.ratios[k], s);
                              }
                              return out;
                          },
                          [&](const ProductRatios& p) {
                              std::vector<double> out(m, 0.0);
                              for (int k = 0; k < m; ++k) {
                                  const auto& c = p.coords[k];
                                  for (std::size_t i = 0; i < c.values.size(); ++i) {
                                      out[k] += c.weights[i] * std::pow(c.values[i], s);
                                  }
                              }
                              return out;
                          },
                      },
                      law);
}

// E[L_k^s L_l^s] for k != l.
std::vector<std::vector<double>> ratio_pair_moments(const RatioLaw& law, double s, int m) {
    if (const auto* d = std::get_if<DiscreteRatios>(&law)) {
        std::vector<std::vector<double>> out(m, std::vector<double>(m, 0.0));
        for (const auto& a : d->atoms) {
            for (int k = 0; k < m; ++k) {
                double rk = std::pow(a.ratios[k], s);
                for (int l = 0; l < m; ++l) out[k][l] += a.weight * rk * std::pow(a.ratios[l], s);
            }
        }
        return out;
    }
    // Point masses and product laws have independent coordinates.
    auto first = ratio_moments(law, s, m);
    std::vector<std::vector<double>> out(m, std::vector<double>(m));
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) out[k][l] = first[k] * first[l];
    }
    return out;
}

}  // namespace

double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

CountLaw CountLaw::binomial(int m, double p) {
    CountLaw c;
    c.kind_ = Kind::Binomial;
    c.m_ = m;
    c.p_ = p;
    return c;
}

CountLaw CountLaw::fixed(int m, int count) {
    CountLaw c;
    c.kind_ = Kind::Fixed;
    c.m_ = m;
    c.count_ = count;
    return c;
}

CountLaw CountLaw::table(std::vector<double> pmf) {
    if (pmf.empty()) throw ModelError("count law needs at least one entry");
    CountLaw c;
    c.kind_ = Kind::Table;
    c.m_ = static_cast<int>(pmf.size()) - 1;
    c.pmf_ = std::move(pmf);
    return c;
}

double CountLaw::prob(int k) const {
    if (k < 0 || k > m_) return 0.0;
    switch (kind_) {
        case Kind::Binomial: {
            double lc = std::lgamma(m_ + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m_ - k + 1.0);
            double a = k == 0 ? 0.0 : k * std::log(p_);
            double b = k == m_ ? 0.0 : (m_ - k) * std::log1p(-p_);
            return std::exp(lc + a + b);
        }
        case Kind::Fixed:
            return k == count_ ? 1.0 : 0.0;
        case Kind::Table:
            return pmf_[k];
    }
    return 0.0;
}

double CountLaw::pgf(double z) const {
    switch (kind_) {
        case Kind::Binomial:
            return std::pow(1.0 - p_ + p_ * z, m_);
        case Kind::Fixed:
            return count_ == 0 ? 1.0 : std::pow(z, count_);
        case Kind::Table: {
            // exact at z = 1 so that pmf rounding is not amplified by huge exponents
            if (z == 1.0) return 1.0;
            double acc = 0.0;
            for (int k = m_; k >= 0; --k) acc = acc * z + pmf_[k];
            return acc;
        }
    }
    return 0.0;
}

double CountLaw::log_pgf(double log_z) const {
    if (log_z == 0.0) return 0.0;
    switch (kind_) {
        case Kind::Binomial: {
            if (p_ == 0.0) return 0.0;
            double lp = std::log(p_) + log_z;
            double lq = p_ == 1.0 ? kNegInf : std::log1p(-p_);
            double inner = log_add_exp(lq, lp);
            return inner == kNegInf ? kNegInf : m_ * inner;
        }
        case Kind::Fixed:
            return count_ == 0 ? 0.0 : count_ * log_z;
        case Kind::Table: {
            double acc = kNegInf;
            for (int k = 0; k <= m_; ++k) {
                if (pmf_[k] <= 0.0) continue;
                double term = std::log(pmf_[k]) + (k == 0 ? 0.0 : k * log_z);
                acc = log_add_exp(acc, term);
            }
            return acc;
        }
    }
    return kNegInf;
}

double CountLaw::pgf_derivative(double z) const {
    switch (kind_) {
        case Kind::Binomial:
            return m_ * p_ * std::pow(1.0 - p_ + p_ * z, m_ - 1);
        case Kind::Fixed:
            return count_ == 0 ? 0.0 : count_ * std::pow(z, count_ - 1);
        case Kind::Table: {
            double acc = 0.0;
            for (int k = m_; k >= 1; --k) acc = acc * z + k * pmf_[k];
            return acc;
        }
    }
    return 0.0;
}

double CountLaw::mean() const {
    switch (kind_) {
        case Kind::Binomial:
            return m_ * p_;
        case Kind::Fixed:
            return count_;
        case Kind::Table: {
            double acc = 0.0;
            for (int k = 1; k <= m_; ++k) acc += k * pmf_[k];
            return acc;
        }
    }
    return 0.0;
}

double CountLaw::factorial_moment2() const {
    switch (kind_) {
        case Kind::Binomial:
            return static_cast<double>(m_) * (m_ - 1) * p_ * p_;
        case Kind::Fixed:
            return static_cast<double>(count_) * (count_ - 1);
        case Kind::Table: {
            double acc = 0.0;
            for (int k = 2; k <= m_; ++k) acc += static_cast<double>(k) * (k - 1) * pmf_[k];
            return acc;
        }
    }
    return 0.0;
}

bool CountLaw::surely_zero() const {
    switch (kind_) {
        case Kind::Binomial:
            return p_ == 0.0;
        case Kind::Fixed:
            return count_ == 0;
        case Kind::Table:
            return std::abs(pmf_[0] - 1.0) <= kWeightTolerance;
    }
    return false;
}

bool CountLaw::can_be_zero() const {
    switch (kind_) {
        case Kind::Binomial:
            return p_ < 1.0;
        case Kind::Fixed:
            return count_ == 0;
        case Kind::Table:
            return pmf_[0] > 0.0;
    }
    return false;
}

bool CountLaw::can_have_zero_child() const {
    switch (kind_) {
        case Kind::Binomial:
            return p_ < 1.0;
        case Kind::Fixed:
            return count_ < m_;
        case Kind::Table:
            for (int k = 0; k < m_; ++k) {
                if (pmf_[k] > 0.0) return true;
            }
            return false;
    }
    return false;
}

CountLaw count_law(const StageSpec& stage, int t) {
    if (const auto* j = std::get_if<JointKernels>(&stage.kernels)) {
        const auto& law = t == 0 ? j->from0 : j->from1;
        std::vector<WeightedStates> atoms;
        for (const auto& a : law.atoms) atoms.push_back({a.states, a.weight});
        return CountLaw::table(pmf_of_atoms(atoms, stage.m));
    }
    const auto& sep = std::get<SeparatedKernels>(stage.kernels);
    const auto& law = t == 0 ? sep.from0 : sep.from1;
    return std::visit(overloaded{
                          [&](const ProductBernoulli& b) { return CountLaw::binomial(stage.m, b.p); },
                          [&](const Microcanonical& mc) { return CountLaw::fixed(stage.m, mc.count); },
                          [&](const DiscreteStates& d) { return CountLaw::table(pmf_of_atoms(d.atoms, stage.m)); },
                      },
                      law);
}

double stage_alpha(const StageSpec& stage, double s) {
    const int m = stage.m;
    if (const auto* j = std::get_if<JointKernels>(&stage.kernels)) {
        double acc = 0.0;
        for (const auto& a : j->from1.atoms) {
            double inner = 0.0;
            for (int k = 0; k < m; ++k) {
                if (a.states[k]) inner += std::pow(a.ratios[k], s);
            }
            acc += a.weight * inner;
        }
        return acc;
    }
    const auto& sep = std::get<SeparatedKernels>(stage.kernels);
    auto px = one_marginals(sep.from1, m);
    auto lr = ratio_moments(sep.ratios, s, m);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += px[k] * lr[k];
    return acc;
}

double stage_alpha_pair(const StageSpec& stage, double s) {
    const int m = stage.m;
    if (const auto* j = std::get_if<JointKernels>(&stage.kernels)) {
        double acc = 0.0;
        for (const auto& a : j->from1.atoms) {
            double sum = 0.0;
            double sum_sq = 0.0;
            for (int k = 0; k < m; ++k) {
                if (!a.states[k]) continue;
                double r = std::pow(a.ratios[k], s);
                sum += r;
                sum_sq += r * r;
            }
            acc += a.weight * (sum * sum - sum_sq);
        }
        return acc;
    }
    const auto& sep = std::get<SeparatedKernels>(stage.kernels);
    auto pxx = pair_marginals(sep.from1, m);
    auto rr = ratio_pair_moments(sep.ratios, s, m);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        for (int l = 0; l < m; ++l) {
            if (k != l) acc += pxx[k][l] * rr[k][l];
        }
    }
    return acc;
}

}  // namespace tmfrac
