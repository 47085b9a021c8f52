#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "analysis_json.hpp"
#include "json_util.hpp"
#include "tmfrac/analytics.hpp"
#include "tmfrac/errors.hpp"
#include "tmfrac/model_io.hpp"
#include "tmfrac/oracle.hpp"
#include "tmfrac/parallel.hpp"
#include "tmfrac/simulator.hpp"
#include "tmfrac/zoo.hpp"

namespace tmfrac::cli {

namespace fs = std::filesystem;

namespace {

struct RunConfig {
    std::string model_path;
    std::uint64_t seed = 0;
    std::size_t depth = 0;
    std::size_t replicas = 0;
    std::optional<double> s;
    std::string out_dir = ".";
    double tol = kRootTolerance;
    std::size_t horizon = 20;
    unsigned workers = 1;
    std::size_t tree_budget = 1 << 12;
};

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path artifact(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return fs::path(cfg.out_dir) / name;
}

void emit(std::ostream& out, const json& summary) { out << summary.dump(2) << "\n"; }

double default_s(const EnvironmentModel& model, const RunConfig& cfg) {
    if (cfg.s) return *cfg.s;
    const double ds = d_star(model, cfg.tol).value;
    return ds > 0.0 ? ds / 2.0 : 1.0;
}

json run_analyze(const RunConfig& cfg, bool seeded) {
    const EnvironmentModel model = load_model(cfg.model_path);
    AnalyzeOptions opt;
    opt.horizon = cfg.horizon;
    opt.tol = cfg.tol;
    if (seeded) opt.seed = cfg.seed;
    opt.replicas = cfg.replicas;
    opt.workers = cfg.workers;
    json a = analyze_model(model, opt);
    json doc = {{"command", "analyze"}, {"model", cfg.model_path}, {"horizon", cfg.horizon}};
    doc.update(a);
    write_text_atomic(artifact(cfg, "analysis.json"), doc.dump(2) + "\n");
    return doc;
}

json run_simulate(const RunConfig& cfg) {
    const EnvironmentModel model = load_model(cfg.model_path);
    const double s = default_s(model, cfg);
    std::vector<ReplicaRecord> records(cfg.replicas);
    parallel_for(cfg.replicas, cfg.workers, [&](std::size_t r) {
        records[r] = simulate_replica(model, cfg.depth, s, replica_seed(cfg.seed, r), cfg.tree_budget);
    });

    std::ostringstream csv;
    csv << "replica,generation,count,flow,W\n";
    std::size_t hits = 0;
    std::size_t common_depth = cfg.depth;
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        hits += rec.counts.back() == 0;
        common_depth = std::min(common_depth, rec.tree_depth);
        for (std::size_t j = 0; j < rec.counts.size(); ++j) {
            csv << r << ',' << j << ',' << rec.counts[j] << ',';
            if (j <= rec.tree_depth) csv << format_double(rec.flows[j]);
            csv << ',';
            if (rec.martingale && j <= rec.tree_depth) csv << format_double((*rec.martingale)[j]);
            csv << '\n';
        }
    }
    write_text_atomic(artifact(cfg, "simulation.csv"), csv.str());

    // flow and martingale summaries at the deepest generation every tree reached
    double w_sum = 0.0, w_sq = 0.0;
    std::size_t w_n = 0, flow_zero = 0;
    for (const auto& rec : records) {
        flow_zero += rec.flows[common_depth] == 0.0;
        if (rec.martingale) {
            const double w = (*rec.martingale)[common_depth];
            w_sum += w;
            w_sq += w * w;
            ++w_n;
        }
    }
    const double n = static_cast<double>(cfg.replicas);
    const double freq = cfg.replicas ? static_cast<double>(hits) / n : 0.0;
    const double se = cfg.replicas ? std::sqrt(freq * (1.0 - freq) / n) : 0.0;
    const double residual = truncation_residual(model, cfg.depth);
    json doc = {{"command", "simulate"},
                {"model", cfg.model_path},
                {"depth", cfg.depth},
                {"replicas", cfg.replicas},
                {"seed", cfg.seed},
                {"s", number(s)},
                {"tree_budget", cfg.tree_budget},
                {"emptiness",
                 {{"hits", hits},
                  {"frequency", number(freq)},
                  {"std_error", number(se)},
                  {"residual", number(residual)},
                  {"bracket", {number(freq), number(std::isnan(residual) ? 1.0 : std::min(1.0, freq + residual))}},
                  {"note", "frequency of an empty generation at the final depth; lower end of the bracket"}}},
                {"flow", {{"generation", common_depth}, {"zero_frequency", number(cfg.replicas ? flow_zero / n : 0.0)}}}};
    if (w_n > 0) {
        const double mean = w_sum / static_cast<double>(w_n);
        const double var = w_n > 1 ? (w_sq - w_n * mean * mean) / static_cast<double>(w_n - 1) : 0.0;
        doc["martingale"] = {{"generation", common_depth},
                             {"samples", w_n},
                             {"mean", number(mean)},
                             {"std_error", number(std::sqrt(std::max(0.0, var) / static_cast<double>(w_n)))}};
    } else {
        doc["martingale"] = nullptr;
    }
    write_text_atomic(artifact(cfg, "simulation.json"), doc.dump(2) + "\n");
    return doc;
}

json run_estimate_dim(const RunConfig& cfg) {
    const EnvironmentModel model = load_model(cfg.model_path);
    const DimensionEstimate est = box_count(model, cfg.depth, cfg.replicas, cfg.seed, cfg.workers);
    std::ostringstream csv;
    csv << "replica,generation,count\n";
    for (std::size_t r = 0; r < est.counts.size(); ++r) {
        for (std::size_t j = 0; j < est.counts[r].size(); ++j) csv << r << ',' << j << ',' << est.counts[r][j] << '\n';
    }
    write_text_atomic(artifact(cfg, "dimension.csv"), csv.str());
    json doc = {{"command", "estimate-dim"},
                {"model", cfg.model_path},
                {"seed", cfg.seed},
                {"window", {est.j_min, est.j_max}},
                {"replicas", est.replicas},
                {"surviving", est.surviving},
                {"slope", number(est.slope)},
                {"std_error", number(est.std_error)},
                {"confidence_95", {number(est.slope - 1.96 * est.std_error), number(est.slope + 1.96 * est.std_error)}},
                {"analytic_d_star", number(est.analytic_d_star)},
                {"mean_log_counts", est.mean_log_counts},
                {"log_sides", est.log_sides}};
    write_text_atomic(artifact(cfg, "dimension.json"), doc.dump(2) + "\n");
    return doc;
}

json run_render(const RunConfig& cfg) {
    const EnvironmentModel model = load_model(cfg.model_path);
    const SampledTree tree = sample_tree(model, cfg.depth, cfg.seed);
    const Image img = render_2d(tree, model, cfg.depth);
    const fs::path path = artifact(cfg, "render.pgm");
    write_text_atomic(path, to_pgm(img));
    std::size_t black = 0;
    for (auto p : img.pixels) black += p == 0;
    return {{"command", "render"}, {"model", cfg.model_path}, {"seed", cfg.seed}, {"path", path.string()},
            {"width", img.width},  {"height", img.height},       {"black_pixels", black}};
}

json run_report(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    const json analysis = read_artifact(dir / "analysis.json");
    const json simulation = fs::exists(dir / "simulation.json") ? read_artifact(dir / "simulation.json") : json(nullptr);
    const json dimension = fs::exists(dir / "dimension.json") ? read_artifact(dir / "dimension.json") : json(nullptr);
    json doc = {{"command", "report"},
                {"model", cfg.model_path.empty() ? analysis.value("model", "") : cfg.model_path},
                {"analysis", analysis},
                {"simulation", simulation},
                {"dimension", dimension},
                {"cross_checks", cross_checks(analysis, simulation, dimension)}};
    if (!analysis.contains("dimension")) throw MissingArtifact("analysis artifact lacks the dimension section");
    doc["dimension_status"] = analysis["dimension"];
    write_text_atomic(artifact(cfg, "report.json"), doc.dump(2) + "\n");
    return doc;
}

json run_oracle(const RunConfig& cfg) {
    const EnvironmentModel model = load_model(cfg.model_path);
    json doc = {{"command", "oracle"}, {"model", cfg.model_path}, {"depth", cfg.depth}};
    doc["generating_function"] = json::array();
    for (std::size_t j = 0; j <= cfg.depth; ++j) {
        for (double z : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double exact = exact_generating_function(model, j, z);
            double rec = std::nan("");
            try {
                rec = phi_big(model, j, z);
            } catch (const DivisionByZero&) {
            }
            doc["generating_function"].push_back(
                {{"j", j}, {"z", z}, {"enumerated", number(exact)}, {"recursion", number(rec)}});
        }
    }
    doc["extinction_by"] = json::array();
    for (std::size_t J = 0; J <= cfg.depth; ++J) {
        doc["extinction_by"].push_back({{"J", J}, {"probability", number(exact_extinction_by(model, 0, J))}});
    }
    const double s = default_s(model, cfg);
    const MinCutResult mc = exact_min_cut(model, s, cfg.depth);
    std::size_t agree = 0;
    for (const auto& o : mc.outcomes) agree += flow(o.tree, s, o.tree.root()).value == o.value;
    json dist = json::array();
    for (const auto& [v, p] : mc.distribution) dist.push_back({{"value", number(v)}, {"probability", number(p)}});
    doc["min_cut"] = {{"s", s}, {"outcomes", mc.outcomes.size()}, {"agreeing_with_flow", agree}, {"distribution", dist}};
    return doc;
}

json run_zoo(const RunConfig& cfg) {
    json written = json::array();
    for (const auto& [name, model] : zoo::catalog()) {
        const fs::path path = artifact(cfg, name + ".json");
        save_model(model, path);
        written.push_back(path.string());
    }
    return {{"command", "zoo"}, {"written", written}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random fractals driven by tree-indexed Markov chains", "tmfrac"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    RunConfig cfg;
    cfg.workers = default_workers();

    auto model_opt = [&](CLI::App* sub) { sub->add_option("--model", cfg.model_path, "Model JSON file")->required(); };
    auto out_opt = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out_dir, "Artifact directory")->capture_default_str();
    };
    auto seed_opt = [&](CLI::App* sub, bool required) {
        auto* o = sub->add_option("--seed", cfg.seed, "64-bit seed");
        if (required) o->required();
        return o;
    };
    auto workers_opt = [&](CLI::App* sub) {
        sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
    };

    auto* analyze = app.add_subcommand("analyze", "Analytic report: d_*, f_j, Phi_j(f_j), sigma bounds, criteria");
    model_opt(analyze);
    out_opt(analyze);
    auto* analyze_seed = seed_opt(analyze, false);
    analyze->add_option("--tol", cfg.tol, "Root tolerance for d_*")->capture_default_str();
    analyze->add_option("--horizon", cfg.horizon, "Generations tabulated")->capture_default_str();
    cfg.replicas = 10000;
    analyze->add_option("--replicas", cfg.replicas, "Replicas for the Monte Carlo fallback")->capture_default_str();
    workers_opt(analyze);

    auto* simulate = app.add_subcommand("simulate", "Sample trees: counts, flows, martingale, emptiness frequency");
    model_opt(simulate);
    out_opt(simulate);
    seed_opt(simulate, true);
    simulate->add_option("--depth", cfg.depth, "Generations")->required();
    simulate->add_option("--replicas", cfg.replicas, "Replicas")->required();
    simulate->add_option("--s", cfg.s, "Exponent for flows and the martingale (default d_*/2, or 1)");
    simulate->add_option("--tree-budget", cfg.tree_budget, "Vertices stored per replica tree")->capture_default_str();
    workers_opt(simulate);

    auto* estimate = app.add_subcommand("estimate-dim", "Box-counting slope against d_*");
    model_opt(estimate);
    out_opt(estimate);
    seed_opt(estimate, true);
    estimate->add_option("--depth", cfg.depth, "Generations")->required();
    estimate->add_option("--replicas", cfg.replicas, "Replicas")->required();
    workers_opt(estimate);

    auto* render = app.add_subcommand("render", "PGM image of one planar realization");
    model_opt(render);
    out_opt(render);
    seed_opt(render, true);
    render->add_option("--depth", cfg.depth, "Generation drawn")->required();

    auto* report = app.add_subcommand("report", "Merge artifacts of --out and run the cross-checks");
    report->add_option("--model", cfg.model_path, "Model JSON file");
    out_opt(report);

    auto* oracle = app.add_subcommand("oracle", "Brute-force enumeration on a tiny model");
    oracle->group("");
    model_opt(oracle);
    oracle->add_option("--depth", cfg.depth, "Enumeration depth")->required();
    oracle->add_option("--s", cfg.s, "Flow exponent");

    auto* zoo_cmd = app.add_subcommand("zoo", "Write the bundled example models");
    zoo_cmd->group("");
    out_opt(zoo_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help("", CLI::AppFormatMode::All);
        return kExitUsage;
    }

    try {
        json summary;
        if (*analyze) summary = run_analyze(cfg, analyze_seed->count() > 0);
        else if (*simulate) summary = run_simulate(cfg);
        else if (*estimate) summary = run_estimate_dim(cfg);
        else if (*render) summary = run_render(cfg);
        else if (*report) summary = run_report(cfg);
        else if (*oracle) summary = run_oracle(cfg);
        else summary = run_zoo(cfg);
        emit(out, summary);
        return kExitOk;
    } catch (const BudgetExceeded& e) {
        err << json{{"error", "budget"}, {"message", e.what()}}.dump() << "\n";
        return kExitBudget;
    } catch (const ModelError& e) {
        err << json{{"error", "validation"}, {"message", e.what()}}.dump() << "\n";
        return kExitInvalid;
    } catch (const MissingArtifact& e) {
        err << json{{"error", "missing_artifact"}, {"message", e.what()}}.dump() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << json{{"error", "failed"}, {"message", e.what()}}.dump() << "\n";
        return kExitInvalid;
    }
}

}  // namespace tmfrac::cli
