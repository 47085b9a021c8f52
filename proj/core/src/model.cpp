#include "tmfrac/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tmfrac/errors.hpp"

namespace tmfrac {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class Checker {
public:
    explicit Checker(std::vector<Violation>& out) : out_(out) {}

    void fail(const std::string& path, const std::string& message) {
        out_.push_back({path, message});
    }

    void ratio(const std::string& path, double r) {
        if (!std::isfinite(r) || r <= 0.0) {
            fail(path, "ratio must be > 0");
        } else if (r >= 1.0) {
            fail(path, "ratio must be < 1");
        }
    }

    void ratio_vector(const std::string& path, const RatioVector& v, int m) {
        if (static_cast<int>(v.size()) != m) {
            fail(path, "ratio vector length " + std::to_string(v.size()) + " != m = " +
                           std::to_string(m));
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            ratio(path + "[" + std::to_string(k) + "]", v[k]);
        }
    }

    void state_vector(const std::string& path, const StateVector& v, int m) {
        if (static_cast<int>(v.size()) != m) {
            fail(path, "state vector length " + std::to_string(v.size()) + " != m = " +
                           std::to_string(m));
        }
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k] > 1) fail(path + "[" + std::to_string(k) + "]", "state must be 0 or 1");
        }
    }

    void weights(const std::string& path, const std::vector<double>& w) {
        if (w.empty()) {
            fail(path, "measure has no atoms");
            return;
        }
        double total = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(w[i]) || w[i] < 0.0) {
                fail(path + "[" + std::to_string(i) + "]", "weight must be a finite nonnegative number");
            }
            total += w[i];
        }
        if (std::abs(total - 1.0) > kWeightTolerance) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "weights sum to " << total << ", not 1";
            fail(path, msg.str());
        }
    }

    void probability(const std::string& path, double p) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) fail(path, "probability must lie in [0,1]");
    }

    void ratio_law(const std::string& path, const RatioLaw& law, int m) {
        std::visit(overloaded{
                       [&](const PointMassRatios& pm) { ratio_vector(path + ".ratios", pm.ratios, m); },
                       [&](const DiscreteRatios& d) {
                           std::vector<double> w;
                           for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                               ratio_vector(path + ".atoms[" + std::to_string(i) + "].ratios",
                                            d.atoms[i].ratios, m);
                               w.push_back(d.atoms[i].weight);
                           }
                           weights(path + ".atoms", w);
                       },
                       [&](const ProductRatios& pr) {
                           if (static_cast<int>(pr.coords.size()) != m) {
                               fail(path + ".coords", "coordinate count != m");
                           }
                           for (std::size_t k = 0; k < pr.coords.size(); ++k) {
                               const auto& c = pr.coords[k];
                               std::string cp = path + ".coords[" + std::to_string(k) + "]";
                               if (c.values.size() != c.weights.size()) {
                                   fail(cp, "values and weights differ in length");
                               }
                               for (std::size_t i = 0; i < c.values.size(); ++i) {
                                   ratio(cp + ".values[" + std::to_string(i) + "]", c.values[i]);
                               }
                               weights(cp + ".weights", c.weights);
                           }
                       },
                   },
                   law);
    }

    void transition_law(const std::string& path, const TransitionLaw& law, int m) {
        std::visit(overloaded{
                       [&](const ProductBernoulli& b) { probability(path + ".p", b.p); },
                       [&](const Microcanonical& mc) {
                           if (mc.count < 0 || mc.count > m) fail(path + ".count", "count must lie in [0, m]");
                       },
                       [&](const DiscreteStates& d) {
                           std::vector<double> w;
                           for (std::size_t i = 0; i < d.atoms.size(); ++i) {
                               state_vector(path + ".atoms[" + std::to_string(i) + "].states",
                                            d.atoms[i].states, m);
                               w.push_back(d.atoms[i].weight);
                           }
                           weights(path + ".atoms", w);
                       },
                   },
                   law);
    }

    void joint_law(const std::string& path, const JointLaw& law, int m) {
        std::vector<double> w;
        for (std::size_t i = 0; i < law.atoms.size(); ++i) {
            std::string ap = path + ".atoms[" + std::to_string(i) + "]";
            state_vector(ap + ".states", law.atoms[i].states, m);
            ratio_vector(ap + ".ratios", law.atoms[i].ratios, m);
            w.push_back(law.atoms[i].weight);
        }
        weights(path + ".atoms", w);
    }

    void stage(const std::string& path, const StageSpec& s) {
        if (s.m < 2) {
            fail(path + ".m", "m must be at least 2");
            return;
        }
        std::visit(overloaded{
                       [&](const SeparatedKernels& k) {
                           ratio_law(path + ".ratios", k.ratios, s.m);
                           transition_law(path + ".trans0", k.from0, s.m);
                           transition_law(path + ".trans1", k.from1, s.m);
                       },
                       [&](const JointKernels& k) {
                           joint_law(path + ".joint0", k.from0, s.m);
                           joint_law(path + ".joint1", k.from1, s.m);
                       },
                   },
                   s.kernels);
    }

private:
    std::vector<Violation>& out_;
};

bool all_ratios_equal(const StageSpec& s, double value) {
    auto close = [value](double r) { return std::abs(r - value) <= 1e-12; };
    auto vec_close = [&](const RatioVector& v) { return std::all_of(v.begin(), v.end(), close); };
    if (const auto* j = std::get_if<JointKernels>(&s.kernels)) {
        for (const auto* law : {&j->from0, &j->from1}) {
            for (const auto& a : law->atoms) {
                if (!vec_close(a.ratios)) return false;
            }
        }
        return true;
    }
    const auto& sep = std::get<SeparatedKernels>(s.kernels);
    if (const auto* pm = std::get_if<PointMassRatios>(&sep.ratios)) return vec_close(pm->ratios);
    return false;
}

bool ratios_split_interval(const StageSpec& s) {
    auto sums_to_one = [](const RatioVector& v) {
        return v.size() == 2 && std::abs(v[0] + v[1] - 1.0) <= 1e-12;
    };
    if (const auto* j = std::get_if<JointKernels>(&s.kernels)) {
        for (const auto* law : {&j->from0, &j->from1}) {
            for (const auto& a : law->atoms) {
                if (!sums_to_one(a.ratios)) return false;
            }
        }
        return true;
    }
    const auto& sep = std::get<SeparatedKernels>(s.kernels);
    return std::visit(overloaded{
                          [&](const PointMassRatios& pm) { return sums_to_one(pm.ratios); },
                          [&](const DiscreteRatios& d) {
                              return std::all_of(d.atoms.begin(), d.atoms.end(),
                                                 [&](const auto& a) { return sums_to_one(a.ratios); });
                          },
                          [&](const ProductRatios&) { return false; },
                      },
                      sep.ratios);
}

std::uint64_t ipow(int base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= static_cast<std::uint64_t>(base);
        if (r > (std::uint64_t{1} << 40)) return r;
    }
    return r;
}

}  // namespace

const StageSpec& EnvironmentModel::stage(std::size_t j) const {
    if (j < prefix.size()) return prefix[j];
    return std::visit(overloaded{
                          [](const ConstantTail& c) -> const StageSpec& { return c.stage; },
                          [&](const PeriodicTail& p) -> const StageSpec& {
                              if (p.stages.empty()) throw ModelError("periodic tail is empty");
                              return p.stages[(j - prefix.size()) % p.stages.size()];
                          },
                      },
                      tail);
}

std::size_t EnvironmentModel::period() const {
    if (const auto* p = std::get_if<PeriodicTail>(&tail)) return p->stages.size();
    return 1;
}

int EnvironmentModel::cube_side(std::size_t j) const {
    const auto* cube = geometry ? std::get_if<CubeSubdivision>(&*geometry) : nullptr;
    if (cube == nullptr) throw WrongGeometry("model has no cube-subdivision geometry");
    if (j < cube->prefix_sides.size()) return cube->prefix_sides[j];
    if (cube->tail_sides.empty()) throw WrongGeometry("cube geometry has no tail sides");
    return cube->tail_sides[(j - prefix.size()) % cube->tail_sides.size()];
}

std::string ValidationReport::to_string() const {
    std::string out;
    for (const auto& v : violations) {
        if (!out.empty()) out += "; ";
        out += v.path + ": " + v.message;
    }
    return out;
}

ValidationReport validate(const EnvironmentModel& model) {
    ValidationReport report;
    Checker check(report.violations);

    check.probability("initial_one_prob", model.initial_one_prob);
    if (model.ambient_dim < 1) check.fail("ambient_dim", "ambient dimension must be positive");

    for (std::size_t j = 0; j < model.prefix.size(); ++j) {
        check.stage("prefix[" + std::to_string(j) + "]", model.prefix[j]);
    }
    std::visit(overloaded{
                   [&](const ConstantTail& c) { check.stage("tail.stage", c.stage); },
                   [&](const PeriodicTail& p) {
                       if (p.stages.empty()) check.fail("tail.stages", "periodic tail must be nonempty");
                       for (std::size_t i = 0; i < p.stages.size(); ++i) {
                           check.stage("tail.stages[" + std::to_string(i) + "]", p.stages[i]);
                       }
                   },
               },
               model.tail);

    if (!report.ok() || !model.geometry) return report;

    std::visit(
        overloaded{
            [&](const CubeSubdivision& cube) {
                if (cube.prefix_sides.size() != model.prefix.size()) {
                    check.fail("geometry.prefix_sides", "one side per prefix stage required");
                    return;
                }
                if (cube.tail_sides.size() != model.period()) {
                    check.fail("geometry.tail_sides", "one side per tail stage required");
                    return;
                }
                for (std::size_t j = 0; j < model.horizon(); ++j) {
                    int c = model.cube_side(j);
                    std::string path = j < model.prefix.size()
                                           ? "prefix[" + std::to_string(j) + "]"
                                           : "tail[" + std::to_string(j - model.prefix.size()) + "]";
                    if (c < 2) {
                        check.fail(path + ".side", "cube side must be at least 2");
                        continue;
                    }
                    const auto& s = model.stage(j);
                    if (ipow(c, model.ambient_dim) != static_cast<std::uint64_t>(s.m)) {
                        check.fail(path + ".m", "m != c^d for cube subdivision");
                    }
                    if (!all_ratios_equal(s, 1.0 / c)) {
                        check.fail(path + ".ratios", "cube subdivision requires point-mass ratios 1/c");
                    }
                }
            },
            [&](const IntervalSplit&) {
                if (model.ambient_dim != 1) check.fail("ambient_dim", "interval splitting requires d = 1");
                for (std::size_t j = 0; j < model.horizon(); ++j) {
                    const auto& s = model.stage(j);
                    std::string path = "stage[" + std::to_string(j) + "]";
                    if (s.m != 2) check.fail(path + ".m", "interval splitting requires m = 2");
                    if (!ratios_split_interval(s)) {
                        check.fail(path + ".ratios", "interval splitting requires ratio atoms (y, 1-y)");
                    }
                }
            },
        },
        *model.geometry);
    return report;
}

void require_valid(const EnvironmentModel& model) {
    auto report = validate(model);
    if (!report.ok()) throw ModelError("invalid model: " + report.to_string());
}

std::vector<WeightedStates> state_atoms(const TransitionLaw& law, int m, std::size_t max_atoms) {
    std::vector<WeightedStates> out;
    std::visit(overloaded{
                   [&](const ProductBernoulli& b) {
                       if (b.p > 0.0 && b.p < 1.0 && m >= 21) {
                           throw BudgetExceeded("product Bernoulli law with m = " + std::to_string(m) +
                                                " exceeds the materialization budget");
                       }
                       std::uint64_t total = std::uint64_t{1} << m;
                       for (std::uint64_t code = 0; code < total; ++code) {
                           WeightedStates a;
                           a.states.resize(m);
                           a.weight = 1.0;
                           for (int k = 0; k < m; ++k) {
                               // Coordinate 0 is the most significant bit so atoms come out in
                               // lexicographic order.
                               std::uint8_t x = (code >> (m - 1 - k)) & 1u;
                               a.states[k] = x;
                               a.weight *= x ? b.p : 1.0 - b.p;
                           }
                           if (a.weight > 0.0) out.push_back(std::move(a));
                           if (out.size() > max_atoms) throw BudgetExceeded("state atom budget exceeded");
                       }
                   },
                   [&](const Microcanonical& mc) {
                       // Enumerate a-subsets in lexicographic order of the indicator vector.
                       StateVector x(m, 0);
                       std::fill(x.end() - mc.count, x.end(), 1);
                       std::vector<StateVector> all;
                       do {
                           all.push_back(x);
                           if (all.size() > max_atoms) throw BudgetExceeded("state atom budget exceeded");
                       } while (std::next_permutation(x.begin(), x.end()));
                       double w = 1.0 / static_cast<double>(all.size());
                       for (auto& v : all) out.push_back({std::move(v), w});
                   },
                   [&](const DiscreteStates& d) {
                       for (const auto& a : d.atoms) {
                           if (a.weight > 0.0) out.push_back(a);
                       }
                   },
               },
               law);
    return out;
}

std::vector<WeightedRatios> ratio_atoms(const RatioLaw& law, std::size_t max_atoms) {
    std::vector<WeightedRatios> out;
    std::visit(overloaded{
                   [&](const PointMassRatios& pm) { out.push_back({pm.ratios, 1.0}); },
                   [&](const DiscreteRatios& d) {
                       for (const auto& a : d.atoms) {
                           if (a.weight > 0.0) out.push_back(a);
                       }
                   },
                   [&](const ProductRatios& pr) {
                       std::size_t total = 1;
                       for (const auto& c : pr.coords) {
                           total *= std::max<std::size_t>(c.values.size(), 1);
                           if (total > max_atoms) throw BudgetExceeded("ratio atom budget exceeded");
                       }
                       out.push_back({{}, 1.0});
                       for (const auto& c : pr.coords) {
                           std::vector<WeightedRatios> next;
                           for (const auto& partial : out) {
                               for (std::size_t i = 0; i < c.values.size(); ++i) {
                                   if (c.weights[i] <= 0.0) continue;
                                   WeightedRatios a = partial;
                                   a.ratios.push_back(c.values[i]);
                                   a.weight *= c.weights[i];
                                   next.push_back(std::move(a));
                               }
                           }
                           out = std::move(next);
                       }
                   },
               },
               law);
    return out;
}

JointLaw as_joint(const StageSpec& stage, int t, std::size_t max_atoms) {
    if (const auto* j = std::get_if<JointKernels>(&stage.kernels)) return t == 0 ? j->from0 : j->from1;
    const auto& sep = std::get<SeparatedKernels>(stage.kernels);
    auto states = state_atoms(t == 0 ? sep.from0 : sep.from1, stage.m, max_atoms);
    auto ratios = ratio_atoms(sep.ratios, max_atoms);
    if (states.size() * ratios.size() > max_atoms) {
        throw BudgetExceeded("joint materialization would need " +
                             std::to_string(states.size() * ratios.size()) + " atoms");
    }
    JointLaw out;
    out.atoms.reserve(states.size() * ratios.size());
    for (const auto& s : states) {
        for (const auto& r : ratios) {
            out.atoms.push_back({s.states, r.ratios, s.weight * r.weight});
        }
    }
    return out;
}

bool zero_state_absorbing(const StageSpec& stage) {
    auto zero_vec = [](const StateVector& v) {
        return std::all_of(v.begin(), v.end(), [](std::uint8_t x) { return x == 0; });
    };
    if (const auto* j = std::get_if<JointKernels>(&stage.kernels)) {
        double mass = 0.0;
        for (const auto& a : j->from0.atoms) {
            if (zero_vec(a.states)) mass += a.weight;
        }
        return std::abs(mass - 1.0) <= kWeightTolerance;
    }
    const auto& sep = std::get<SeparatedKernels>(stage.kernels);
    return std::visit(overloaded{
                          [](const ProductBernoulli& b) { return b.p == 0.0; },
                          [](const Microcanonical& mc) { return mc.count == 0; },
                          [&](const DiscreteStates& d) {
                              double mass = 0.0;
                              for (const auto& a : d.atoms) {
                                  if (zero_vec(a.states)) mass += a.weight;
                              }
                              return std::abs(mass - 1.0) <= kWeightTolerance;
                          },
                      },
                      sep.from0);
}

}  // namespace tmfrac
