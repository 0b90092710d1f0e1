// Command-line front end: simulate, analyze, report, run, export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdsim/experiment.hpp"
#include "crowdsim/io.hpp"

namespace {

using namespace crowd;
namespace ex = crowd::experiment;

struct Options {
    std::vector<std::string> models;
    std::vector<std::size_t> agents;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::string scene;
    std::string out;
    std::string in;
    bool force = false;
    bool full = false;
    std::size_t workers = 0;
    std::size_t bins = ex::kDefaultBins;
    std::string zoned_mode = "mean";
};

std::vector<ModelKind> to_models(const std::vector<std::string>& names) {
    if (names.empty()) {
        return {std::begin(kAllModels), std::end(kAllModels)};
    }
    std::vector<ModelKind> out;
    for (const auto& n : names) {
        out.push_back(parse_model(n));
    }
    return out;
}

ex::ExperimentPlan to_plan(const Options& o) {
    auto plan = o.full ? ex::ExperimentPlan::full() : ex::ExperimentPlan::desk();
    plan.models = to_models(o.models);
    if (!o.agents.empty()) {
        plan.agent_counts = o.agents;
    }
    plan.runs_per_cell = o.runs.value_or(plan.runs_per_cell);
    plan.base_seed = o.seed.value_or(plan.base_seed);
    if (!o.scene.empty()) {
        plan.scene = load_scene(o.scene);
    }
    if (!o.out.empty()) {
        plan.output_directory = o.out;
    }
    plan.force = o.force;
    plan.workers = o.workers;
    plan.n_bins = o.bins;
    plan.zoned_mode = ex::parse_zoned_mode(o.zoned_mode);
    return plan;
}

ex::AnalysisOptions to_analysis(const Options& o) {
    return {to_models(o.models), o.bins, ex::parse_zoned_mode(o.zoned_mode)};
}

void add_plan_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("--model", o.models, "Models to simulate (lattice, social-force, orca)")
        ->delimiter(',');
    cmd.add_option("--agents", o.agents, "Agent counts, e.g. 50,100,200")->delimiter(',');
    cmd.add_option("--runs", o.runs, "Runs per (model, N) cell");
    cmd.add_option("--seed", o.seed, "Base seed for per-run seed derivation");
    cmd.add_option("--scene", o.scene, "Scene file (key = value)")->check(CLI::ExistingFile);
    cmd.add_option("--out", o.out, "Output directory");
    cmd.add_flag("--force", o.force, "Regenerate cells whose output is partial or stale");
    cmd.add_flag("--full", o.full, "Full sweep: N = 50..1000, 100 runs");
    cmd.add_option("--workers", o.workers,
                   std::string("Worker threads (default: $") + ex::kWorkersEnv +
                       ", else all cores)");
    cmd.add_option("--bins", o.bins, "Histogram bins per observable");
}

void add_analysis_flags(CLI::App& cmd, Options& o) {
    cmd.add_option("--in", o.in, "Artifact directory")->required()->check(CLI::ExistingDirectory);
    cmd.add_option("--agents", o.agents, "Agent counts to analyze")->required()->delimiter(',');
    cmd.add_option("--model", o.models, "Models to compare (default: all three)")->delimiter(',');
    cmd.add_option("--bins", o.bins, "Histogram bins per observable");
    cmd.add_option("--zoned-mode", o.zoned_mode, "mean or per-zone")
        ->check(CLI::IsMember({"mean", "per-zone"}));
}

void print_analysis(const ex::AnalysisResult& r) {
    std::printf("N = %zu\n", r.n_agents);
    for (const auto& d : r.matrices) {
        std::printf("  %s:", d.observable.c_str());
        for (std::size_t i = 0; i < d.labels.size(); ++i) {
            for (std::size_t j = i + 1; j < d.labels.size(); ++j) {
                std::printf("  %s/%s=%.4f", d.labels[i].c_str(), d.labels[j].c_str(),
                            d.values(i, j));
            }
        }
        std::printf("\n");
    }
    if (r.compromise) {
        std::printf("  tau = %.4f\n", r.compromise->quality);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Crowd evacuation model comparison"};
    app.set_config("--config", "", "INI/TOML file holding any flag; command-line flags win");
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand("simulate", "Simulate every (model, N) cell of a plan");
    add_plan_flags(*simulate, o);
    simulate->add_option("--zoned-mode", o.zoned_mode, "mean or per-zone")
        ->check(CLI::IsMember({"mean", "per-zone"}));

    auto* run = app.add_subcommand("run", "simulate, then analyze and report every N");
    add_plan_flags(*run, o);
    run->add_option("--zoned-mode", o.zoned_mode, "mean or per-zone")
        ->check(CLI::IsMember({"mean", "per-zone"}));

    auto* analyze = app.add_subcommand("analyze", "Distance matrices and compromise analysis");
    add_analysis_flags(*analyze, o);

    auto* report = app.add_subcommand("report", "Plot-data files");
    add_analysis_flags(*report, o);

    std::string traj;
    std::string text_out;
    auto* exp = app.add_subcommand("export", "Trajectory file to comma-separated text");
    exp->add_option("--in", traj, "Trajectory file")->required()->check(CLI::ExistingFile);
    exp->add_option("--out", text_out, "Text file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const auto plan = to_plan(o);
            const auto done = ex::simulate(plan);
            std::printf("simulated %zu cell(s) under %s\n", done,
                        plan.output_directory.string().c_str());
        } else if (run->parsed()) {
            const auto plan = to_plan(o);
            ex::run_experiment(plan);
            std::printf("artifacts written under %s\n", plan.output_directory.string().c_str());
        } else if (analyze->parsed()) {
            for (const auto n : o.agents) {
                print_analysis(ex::analyze(o.in, n, to_analysis(o)));
            }
        } else if (report->parsed()) {
            for (const auto n : o.agents) {
                ex::report(o.in, n, to_analysis(o));
                std::printf("plot data written to %s\n",
                            ex::report_directory(o.in, n).string().c_str());
            }
        } else if (exp->parsed()) {
            const auto log = io::load_trajectory(traj);
            if (text_out.empty()) {
                io::export_text(log, std::cout);
            } else {
                std::ofstream out(text_out);
                io::export_text(log, out);
            }
        }
    } catch (const distatis::DegenerateTable& e) {
        std::fprintf(stderr, "error: observable '%s': %s\n", e.observable.c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
