#pragma once

// Builders for the bundled example models.

#include <string>
#include <utility>
#include <vector>

#include "tmfrac/model.hpp"

namespace tmfrac::zoo {

/// One cube-subdivision stage: side c, black children with probability p under
/// a black parent and q under a white one.
struct BernoulliStage {
    int c = 2;
    double p = 0.5;
    double q = 0.0;
};

/// Exactly a (black parent) or b (white parent) black children out of c^d.
struct MicroStage {
    int c = 2;
    int a = 1;
    int b = 0;
};

StageSpec bernoulli_stage(int c, int d, double p, double q = 0.0);
StageSpec microcanonical_stage(int c, int d, int a, int b = 0);

EnvironmentModel mandelbrot(int c, int d, double p, double initial_one_prob = 1.0);

EnvironmentModel generalized_bernoulli(int d, const std::vector<BernoulliStage>& prefix,
                                       const std::vector<BernoulliStage>& tail, double initial_one_prob = 1.0);

EnvironmentModel microcanonical(int d, const std::vector<MicroStage>& prefix, const std::vector<MicroStage>& tail,
                                double initial_one_prob = 1.0);

/// Binary splitting of [0,1] at Y with Y in {1/4, 1/2, 3/4} (weights 1/4, 1/2, 1/4);
/// children kept independently with probability p.
EnvironmentModel interval_split(double p);

/// Deterministic construction with every vertex in state 1.
EnvironmentModel moran(const RatioVector& ratios);

/// Dyadic fixtures for the three cases of the binary classification.
EnvironmentModel binary_case1();
EnvironmentModel binary_case2(double p = 0.8);
EnvironmentModel binary_case3();

/// Every bundled model with its file stem.
std::vector<std::pair<std::string, EnvironmentModel>> catalog();

}  // namespace tmfrac::zoo
