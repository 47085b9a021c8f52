// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "support.hpp"
#include "tmfrac/analytics.hpp"
#include "tmfrac/binary_case.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/model_io.hpp"
#include "tmfrac/oracle.hpp"
#include "tmfrac/simulator.hpp"
#include "tmfrac/zoo.hpp"

using namespace tmfrac;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

class Check {
public:
    void require(bool cond, const std::string& what) {
        if (!cond && out_.ok) out_.detail = what;
        out_.ok = out_.ok && cond;
    }
    void note(const std::string& s) {
        if (out_.ok) out_.detail = s;
    }
    Outcome result() const { return out_; }

private:
    Outcome out_;
};

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(10);
    s << x;
    return s.str();
}

bool criterion(const std::string& name, double time_limit, const std::function<void(Check&)>& body) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < time_limit, "runtime " + fmt(secs) + " s exceeds " + fmt(time_limit) + " s");
    const Outcome o = c.result();
    std::cout << (o.ok ? "PASS" : "FAIL") << "  " << name << "  (" << fmt(secs) << " s)";
    if (!o.detail.empty()) std::cout << "  " << o.detail;
    std::cout << std::endl;
    return o.ok;
}

EnvironmentModel zoo_model(const std::string& name) {
    return load_model(fs::path(TMFRAC_ZOO_DIR) / (name + ".json"));
}

double within_se(double estimate, double target, double se) { return std::abs(estimate - target) / se; }

struct Mean {
    double mean = 0.0;
    double se = 0.0;
};

Mean mean_of(const std::vector<double>& xs) {
    double s = 0.0, q = 0.0;
    for (double x : xs) {
        s += x;
        q += x * x;
    }
    const double n = static_cast<double>(xs.size());
    const double m = s / n;
    return {m, std::sqrt(std::max(0.0, (q - n * m * m) / (n - 1.0)) / n)};
}

}  // namespace

int main() {
    bool all = true;

    all &= criterion("dimension formulas", 1.0, [](Check& c) {
        double worst = 0.0;
        for (int d : {1, 2}) {
            for (int cs : {2, 3, 4}) {
                for (double p = 0.05; p <= 1.0; p += 0.05) {
                    const double want = d + std::log(p) / std::log(static_cast<double>(cs));
                    if (want < 0.0) continue;
                    worst = std::max(worst, std::abs(d_star(zoo::mandelbrot(cs, d, p), 1e-10).value - want));
                }
            }
        }
        c.require(worst <= 1e-8, "Mandelbrot grid error " + fmt(worst));
        for (int cs : {2, 3}) {
            for (int a = 1; a <= cs * cs; ++a) {
                const double got = d_star(zoo::microcanonical(2, {}, {{cs, a, 0}}), 1e-10).value;
                c.require(std::abs(got - std::log(a) / std::log(cs)) <= 1e-8,
                          "microcanonical c=" + std::to_string(cs) + " a=" + std::to_string(a));
            }
        }
        const double me = moran_exponent({0.5, 0.5});
        c.require(std::abs(me - 1.0) <= 1e-9, "moran_exponent(1/2,1/2) = " + fmt(me));
        c.note("max Mandelbrot error " + fmt(worst));
    });

    all &= criterion("emptiness probability", 1.0, [](Check& c) {
        for (double p : {0.6, 0.8, 0.9}) {
            const auto m = zoo::interval_split(p);
            const double closed = std::pow(-1.0 + 1.0 / p, 2);
            const double limit = emptiness_probability(m, 20, kFixedPointTolerance, EmptinessRoute::Limit).probability;
            const double autov = emptiness_probability(m).probability;
            c.require(std::abs(limit - closed) <= 1e-9 && std::abs(autov - closed) <= 1e-9,
                      "interval p=" + fmt(p) + ": limit " + fmt(limit) + " vs " + fmt(closed));
        }
        const auto recolor = zoo_model("micro_a2_b1");
        c.require(emptiness_probability(recolor).probability == 0.0, "microcanonical with b > 0 not 0");
        const auto plain = zoo::microcanonical(2, {{2, 0, 0}}, {{2, 2, 0}}, 0.6);
        const auto ju = j_underline(plain);
        c.require(ju.has_value(), "j_underline infinite");
        const double want = phi_big(plain, *ju, 0.0);
        c.require(std::abs(emptiness_probability(plain).probability - want) <= 1e-12,
                  "microcanonical with b = 0 differs from Phi_j(0)");
        const auto zoo_plain = zoo_model("micro_a2_b0");
        c.require(std::abs(emptiness_probability(zoo_plain).probability - phi_big(zoo_plain, 0, 0.0)) <= 1e-12,
                  "micro_a2_b0 differs from Phi_0(0)");
    });

    all &= criterion("f sandwich by sigma bounds", 1.0, [](Check& c) {
        std::size_t checked = 0;
        for (const auto& [name, model] : zoo::catalog()) {
            const auto f = f_sequence(model, 20);
            const StageTable table(model);
            for (std::size_t j = 0; j <= 20; ++j) {
                const auto sb = sigma_bounds(table, j);
                if (!std::isfinite(sb.upper)) continue;
                const double slack = 1e-9 + f[j].error_bound;
                c.require(1.0 - 1.0 / sb.lower <= f[j].f + slack && f[j].f <= 1.0 - 1.0 / sb.upper + slack,
                          name + " j=" + std::to_string(j));
                ++checked;
            }
        }
        c.note(std::to_string(checked) + " (model, j) pairs");
    });

    all &= criterion("Phi_j(f_j) nonincreasing", 1.0, [](Check& c) {
        for (const auto& [name, model] : zoo::catalog()) {
            const auto r = emptiness_probability(model, 20);
            double prev = kInf;
            for (const auto& [j, v] : r.phi_f_sequence) {
                if (std::isnan(v)) continue;
                c.require(v <= prev + 1e-10, name + " j=" + std::to_string(j));
                prev = v;
            }
        }
    });

    all &= criterion("oracle equivalence", 30.0, [](Check& c) {
        std::size_t gf = 0, outcomes = 0;
        for (const auto& [name, model] : testing::enumerable_zoo(3)) {
            for (std::size_t j = 0; j <= 3; ++j) {
                for (double z : {0.0, 0.2, 0.5, 0.8, 1.0}) {
                    double rec = 0.0;
                    try {
                        rec = phi_big(model, j, z);
                    } catch (const DivisionByZero&) {
                        continue;
                    }
                    c.require(std::abs(exact_generating_function(model, j, z) - rec) <= 1e-12,
                              "generating function " + name + " j=" + std::to_string(j));
                    ++gf;
                }
            }
            for (double s : {0.25, 0.5, 1.0, 2.0}) {
                for (std::size_t J = 0; J <= 3; ++J) {
                    for (const auto& o : exact_min_cut(model, s, J).outcomes) {
                        c.require(o.value == flow(o.tree, s, o.tree.root(), J).value,
                                  "min cut " + name + " s=" + fmt(s) + " J=" + std::to_string(J));
                        ++outcomes;
                    }
                }
            }
        }
        c.note(std::to_string(gf) + " generating-function points, " + std::to_string(outcomes) + " cut outcomes");
    });

    all &= criterion("Monte Carlo extinction", 60.0, [](Check& c) {
        std::string detail;
        for (const char* name : {"interval_p08", "mandelbrot_p05"}) {
            const auto m = zoo_model(name);
            const double f0 = f_sequence(m, 0).front().f;
            const auto est = branching_extinction(m, 0, 40, 10000, 2024, 4);
            const double se = std::sqrt(f0 * (1.0 - f0) / 10000.0);
            const double z = within_se(est.frequency, f0, se);
            c.require(z <= 3.0, std::string(name) + ": " + fmt(est.frequency) + " vs " + fmt(f0));
            detail += std::string(name) + " " + fmt(est.frequency) + " vs f_0 " + fmt(f0) + "; ";
        }
        c.note(detail);
    });

    all &= criterion("martingale mean", 60.0, [](Check& c) {
        std::string detail;
        for (const char* name : {"mandelbrot_p05", "interval_p08"}) {
            const auto m = zoo_model(name);
            std::vector<double> w0, w1;
            for (std::size_t r = 0; r < 10000; ++r) {
                const auto t = sample_tree(m, 8, replica_seed(31, r));
                if (t.node(t.root()).state != 1) continue;
                w0.push_back(martingale_series(t, m, 0.0, t.root()).back());
                w1.push_back(martingale_series(t, m, 1.0, t.root()).back());
            }
            for (const auto& [s, w] : {std::pair{0, &w0}, std::pair{1, &w1}}) {
                const Mean mw = mean_of(*w);
                c.require(within_se(mw.mean, 1.0, mw.se) <= 3.0,
                          std::string(name) + " W_" + std::to_string(s) + " mean " + fmt(mw.mean));
                detail += std::string(name) + " W_" + std::to_string(s) + "=" + fmt(mw.mean) + "; ";
            }
        }
        c.note(detail);
    });

    all &= criterion("box-count slope", 120.0, [](Check& c) {
        const auto m = zoo_model("mandelbrot_p09");
        std::size_t replicas = 200;
        DimensionEstimate est = box_count(m, 10, replicas, 99, 4);
        while (est.surviving < 200) {
            replicas += 200 - est.surviving;
            est = box_count(m, 10, replicas, 99, 4);
        }
        c.require(std::abs(est.slope - 1.8480) <= 0.15, "slope " + fmt(est.slope));
        c.note("slope " + fmt(est.slope) + " over " + std::to_string(est.surviving) + " surviving replicas");
    });

    all &= criterion("binary case classification", 10.0, [](Check& c) {
        const auto r1 = binary_case(zoo_model("binary_case1"));
        const auto r2 = binary_case(zoo_model("binary_case2"));
        const auto r3 = binary_case(zoo_model("binary_case3"));
        c.require(r1.case_id == 1, "case (1) fixture gave " + std::to_string(r1.case_id));
        c.require(r2.case_id == 2, "case (2) fixture gave " + std::to_string(r2.case_id));
        c.require(r3.case_id == 3, "case (3) fixture gave " + std::to_string(r3.case_id));
        c.require(r3.probability == std::optional<double>(0.0), "case (3) verdict not P = 0");
        c.require(r2.positive == std::optional<bool>(true) && r2.less_than_one == std::optional<bool>(true),
                  "case (2) verdict not 0 < P < 1");
        const double limit =
            emptiness_probability(zoo_model("binary_case1"), 20, kFixedPointTolerance, EmptinessRoute::Limit)
                .probability;
        c.require(r1.probability.has_value() && std::abs(*r1.probability - limit) <= 1e-9,
                  "case (1) closed form vs limit");
        c.note("case (1) product " + fmt(r1.probability.value_or(NAN)) + " vs limit " + fmt(limit));
    });

    all &= criterion("simulate determinism across workers", 120.0, [](Check& c) {
        const fs::path root = fs::temp_directory_path() / "tmfrac_acceptance";
        fs::remove_all(root);
        const std::string model = (fs::path(TMFRAC_ZOO_DIR) / "interval_p08.json").string();
        std::vector<std::string> csv;
        for (const char* workers : {"1", "8", "8"}) {
            const std::string out = (root / ("w" + std::to_string(csv.size()))).string();
            const std::vector<std::string> args = {"tmfrac", "simulate", "--model", model,   "--depth", "25",
                                                   "--replicas", "10000", "--seed",  "7",    "--workers", workers,
                                                   "--out",      out};
            std::vector<const char*> argv;
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream sink, err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), sink, err);
            c.require(code == 0, "simulate exited " + std::to_string(code) + ": " + err.str());
            csv.push_back(read_text(fs::path(out) / "simulation.csv"));
        }
        c.require(csv[0] == csv[1] && csv[1] == csv[2], "CSV differs between worker counts");
        c.note(std::to_string(csv[0].size()) + " bytes identical for workers 1, 8, 8");
        fs::remove_all(root);
    });

    std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL") << std::endl;
    return all ? 0 : 1;
}
