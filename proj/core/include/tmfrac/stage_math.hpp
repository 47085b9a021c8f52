#pragma once

// Per-stage quantities: law of the number of state-1 children, its generating
// function, and the s-weighted moments used for dimension and flow bounds.

#include <vector>

#include "tmfrac/model.hpp"

namespace tmfrac {

/// Law of the number of ones in one draw of a transition kernel.
class CountLaw {
public:
    enum class Kind { Binomial, Fixed, Table };

    static CountLaw binomial(int m, double p);
    static CountLaw fixed(int m, int count);
    static CountLaw table(std::vector<double> pmf);

    Kind kind() const { return kind_; }
    int m() const { return m_; }
    double p() const { return p_; }
    int count() const { return count_; }
    const std::vector<double>& pmf() const { return pmf_; }

    double prob(int k) const;

    /// Generating function z -> E[z^N], z >= 0.
    double pgf(double z) const;
    /// log E[z^N] for z = exp(log_z); log_z may be -inf and z may exceed 1.
    double log_pgf(double log_z) const;
    double pgf_derivative(double z) const;

    double mean() const;
    /// E[N(N-1)], the second derivative of the generating function at 1.
    double factorial_moment2() const;

    /// N = 0 almost surely.
    bool surely_zero() const;
    /// P(N = 0) > 0, decided on the law's parameters rather than numerically.
    bool can_be_zero() const;
    /// P(N < m) > 0: some child can be in state 0.
    bool can_have_zero_child() const;

private:
    Kind kind_ = Kind::Table;
    int m_ = 0;
    double p_ = 0.0;
    int count_ = 0;
    std::vector<double> pmf_;
};

/// Count law of the kernel used from parent state t.
CountLaw count_law(const StageSpec& stage, int t);

/// E[sum_k L_k^s X_k] under the state-1 kernel.
double stage_alpha(const StageSpec& stage, double s);

/// E[sum_{k != l} L_k^s X_k L_l^s X_l] under the state-1 kernel.
double stage_alpha_pair(const StageSpec& stage, double s);

/// log(exp(a) + exp(b)) without overflow; either argument may be -inf.
double log_add_exp(double a, double b);

}  // namespace tmfrac
