#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdsim/distatis.hpp"
#include "crowdsim/divergence.hpp"
#include "crowdsim/observables.hpp"
#include "crowdsim/scene.hpp"
#include "crowdsim/trajectory.hpp"

namespace crowd::experiment {

enum class ZonedMode { mean, per_zone };

std::string_view zoned_mode_name(ZonedMode m);
ZonedMode parse_zoned_mode(std::string_view name);

/// Default bin count per observable histogram.
inline constexpr std::size_t kDefaultBins = 100;

/// Environment variable consulted when no worker count is given.
inline constexpr const char* kWorkersEnv = "CROWDSIM_WORKERS";

struct ExperimentPlan {
    std::vector<ModelKind> models{std::begin(kAllModels), std::end(kAllModels)};
    std::vector<std::size_t> agent_counts{50, 100, 200};
    std::size_t runs_per_cell = 20;
    std::uint64_t base_seed = 20190101;
    SceneConfig scene;
    std::filesystem::path output_directory = "crowdsim-out";
    std::size_t n_bins = kDefaultBins;
    ZonedMode zoned_mode = ZonedMode::mean;
    std::size_t workers = 0;  ///< 0: environment, then hardware concurrency
    bool force = false;

    /// Three models at N = 50, 100, 200 with 20 runs each.
    static ExperimentPlan desk();
    /// Three models at N = 50 ... 1000 with 100 runs each.
    static ExperimentPlan full();

    void validate() const;
};

/// Thrown when a cell holds output that does not match the plan and the plan
/// does not force regeneration.
class OutputConflict : public std::runtime_error {
public:
    OutputConflict(std::vector<std::filesystem::path> paths, const std::string& what)
        : std::runtime_error(what), conflicts(std::move(paths)) {}
    std::vector<std::filesystem::path> conflicts;
};

/// Thrown by the analysis stage when a model's runs are missing.
class MissingInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t resolve_workers(std::size_t requested);

TrajectoryLog simulate_run(ModelKind model, const SceneConfig& scene, std::uint64_t seed);

/// Seed of run `run` in cell (model, n_agents).
std::uint64_t run_seed(std::uint64_t base_seed, ModelKind model, std::size_t n_agents,
                       std::size_t run);

// Artifact tree:
//   plan.txt                                   plan and scene
//   <model>/N<n>/runs/run_<k>.traj|.manifest   per run
//   <model>/N<n>/observables/<observable>.csv  per cell
//   <model>/N<n>/summary.txt                   per cell
//   analysis/N<n>/distance_<observable>.csv    per N
//   analysis/N<n>/distatis.txt                 per N
//   report/N<n>/...                            plot data
std::filesystem::path cell_directory(const std::filesystem::path& root, ModelKind model,
                                     std::size_t n_agents);
std::filesystem::path analysis_directory(const std::filesystem::path& root, std::size_t n_agents);
std::filesystem::path report_directory(const std::filesystem::path& root, std::size_t n_agents);
std::string run_stem(std::size_t run);

/// Simulates every (model, N) cell of the plan. Complete cells are skipped;
/// cells with partial or mismatched output raise OutputConflict unless forced.
/// Returns the number of cells simulated.
std::size_t simulate(const ExperimentPlan& plan);

/// Pooled observables of one cell, read from its trajectory files in run order.
obs::ObservableSet load_cell(const std::filesystem::path& root, ModelKind model,
                             std::size_t n_agents);

struct AnalysisOptions {
    std::vector<ModelKind> models{std::begin(kAllModels), std::end(kAllModels)};
    std::size_t n_bins = kDefaultBins;
    ZonedMode zoned_mode = ZonedMode::mean;
};

struct AnalysisResult {
    std::size_t n_agents = 0;
    std::vector<std::string> labels;
    std::vector<stats::DistanceMatrix> matrices;
    std::optional<distatis::CompromiseResult> compromise;  ///< present with >= 2 models
};

/// Distance matrices for the six observables and, with at least two models, the
/// compromise analysis. Per-zone mode replaces the zoned table with one table per
/// zone that holds samples of at least one model.
AnalysisResult compare(std::span<const obs::ObservableSet> sets, std::vector<std::string> labels,
                       std::size_t n_agents, std::size_t n_bins, ZonedMode zoned_mode);

/// Loads the requested models at `n_agents`, compares them and writes the
/// distance matrices and report under analysis/N<n>.
AnalysisResult analyze(const std::filesystem::path& root, std::size_t n_agents,
                       const AnalysisOptions& options);

/// Writes plot data under report/N<n>: shared-range histograms, zoned
/// histograms, density grids, flow-rate series and projection coordinates.
void report(const std::filesystem::path& root, std::size_t n_agents,
            const AnalysisOptions& options);

/// simulate, then analyze and report every N when the plan has two or more models.
void run_experiment(const ExperimentPlan& plan);

std::string to_text(const ExperimentPlan& plan);

}  // namespace crowd::experiment
