#include "crowdsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "crowdsim/io.hpp"
#include "crowdsim/lattice.hpp"
#include "crowdsim/orca.hpp"
#include "crowdsim/rng.hpp"
#include "crowdsim/social_force.hpp"

namespace crowd::experiment {

namespace fs = std::filesystem;

std::string_view zoned_mode_name(ZonedMode m) {
    return m == ZonedMode::mean ? "mean" : "per-zone";
}

ZonedMode parse_zoned_mode(std::string_view name) {
    if (name == "mean") {
        return ZonedMode::mean;
    }
    if (name == "per-zone") {
        return ZonedMode::per_zone;
    }
    throw std::invalid_argument("unknown zoned mode '" + std::string(name) +
                                "' (expected mean or per-zone)");
}

ExperimentPlan ExperimentPlan::desk() { return {}; }

ExperimentPlan ExperimentPlan::full() {
    ExperimentPlan p;
    p.agent_counts = {50, 100, 150, 200, 300, 500, 1000};
    p.runs_per_cell = 100;
    return p;
}

void ExperimentPlan::validate() const {
    if (models.empty()) {
        throw std::invalid_argument("plan needs at least one model");
    }
    if (agent_counts.empty()) {
        throw std::invalid_argument("plan needs at least one agent count");
    }
    if (runs_per_cell < 1) {
        throw std::invalid_argument("runs per cell must be at least 1");
    }
    if (n_bins < 1) {
        throw std::invalid_argument("bin count must be at least 1");
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
        for (std::size_t j = i + 1; j < models.size(); ++j) {
            if (models[i] == models[j]) {
                throw std::invalid_argument("model '" + std::string(model_name(models[i])) +
                                            "' listed twice");
            }
        }
    }
    for (const auto n : agent_counts) {
        SceneConfig s = scene;
        s.n_agents = n;
        s.validate();
    }
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv(kWorkersEnv); env && *env) {
        std::size_t n = 0;
        const auto* end = env + std::char_traits<char>::length(env);
        const auto res = std::from_chars(env, end, n);
        if (res.ec != std::errc{} || res.ptr != end || n == 0) {
            throw std::invalid_argument(std::string(kWorkersEnv) +
                                        " must be a positive integer, got '" + env + "'");
        }
        return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

TrajectoryLog simulate_run(ModelKind model, const SceneConfig& scene, std::uint64_t seed) {
    switch (model) {
        case ModelKind::lattice: return lattice::run_lattice(scene, seed);
        case ModelKind::social_force: return social_force::run_social_force(scene, seed);
        case ModelKind::orca: return orca::run_orca(scene, seed);
    }
    throw std::invalid_argument("unknown model");
}

std::uint64_t run_seed(std::uint64_t base_seed, ModelKind model, std::size_t n_agents,
                       std::size_t run) {
    return derive_run_seed(base_seed, model_name(model), n_agents, run);
}

fs::path cell_directory(const fs::path& root, ModelKind model, std::size_t n_agents) {
    return root / std::string(model_name(model)) / ("N" + std::to_string(n_agents));
}

fs::path analysis_directory(const fs::path& root, std::size_t n_agents) {
    return root / "analysis" / ("N" + std::to_string(n_agents));
}

fs::path report_directory(const fs::path& root, std::size_t n_agents) {
    return root / "report" / ("N" + std::to_string(n_agents));
}

std::string run_stem(std::size_t run) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%04zu", run);
    return buf;
}

namespace {

constexpr obs::Observable kScalarObservables[] = {
    obs::Observable::evacuation_time, obs::Observable::total_distance,
    obs::Observable::inconvenience, obs::Observable::flow_rate};

std::string name_of(obs::Observable o) { return std::string(obs::observable_name(o)); }

std::string csv_name(obs::Observable o) { return name_of(o) + ".csv"; }

SceneConfig cell_scene(const SceneConfig& base, std::size_t n_agents) {
    SceneConfig s = base;
    s.n_agents = n_agents;
    return s;
}

std::vector<std::string> labels_of(std::span<const ModelKind> models) {
    std::vector<std::string> out;
    for (const auto m : models) {
        out.emplace_back(model_name(m));
    }
    return out;
}

/// Files a finished cell must hold.
std::vector<fs::path> expected_files(const fs::path& cell, std::size_t runs) {
    std::vector<fs::path> out;
    for (std::size_t k = 0; k < runs; ++k) {
        out.push_back(cell / "runs" / (run_stem(k) + ".traj"));
        out.push_back(cell / "runs" / (run_stem(k) + ".manifest"));
    }
    for (const auto o : obs::kAllObservables) {
        out.push_back(cell / "observables" / csv_name(o));
    }
    out.push_back(cell / "summary.txt");
    return out;
}

std::vector<fs::path> list_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (fs::exists(dir)) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (e.is_regular_file()) {
                out.push_back(e.path());
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Files in `cell` that keep it from counting as a finished cell of `plan`.
/// Empty means the cell is complete.
std::vector<fs::path> cell_conflicts(const ExperimentPlan& plan, ModelKind model,
                                     std::size_t n_agents, const fs::path& cell) {
    const auto expected = expected_files(cell, plan.runs_per_cell);
    std::vector<fs::path> conflicts;
    for (const auto& p : expected) {
        if (!fs::exists(p)) {
            conflicts.push_back(p);
        }
    }
    for (const auto& p : list_files(cell)) {
        if (std::find(expected.begin(), expected.end(), p) == expected.end()) {
            conflicts.push_back(p);
        }
    }
    const std::uint64_t hash = config_hash(cell_scene(plan.scene, n_agents));
    for (std::size_t k = 0; k < plan.runs_per_cell; ++k) {
        const auto path = cell / "runs" / (run_stem(k) + ".manifest");
        if (!fs::exists(path)) {
            continue;
        }
        try {
            const auto m = io::manifest_from_text(io::read_file(path));
            if (m.model != model || m.n_agents != n_agents || m.run_index != k ||
                m.seed != run_seed(plan.base_seed, model, n_agents, k) ||
                m.config_hash != hash) {
                conflicts.push_back(path);
            }
        } catch (const std::exception&) {
            conflicts.push_back(path);
        }
    }
    std::sort(conflicts.begin(), conflicts.end());
    return conflicts;
}

/// Runs `task(i)` for i in [0, n) on up to `workers` threads and rethrows the
/// first failure in index order.
template <class Task>
void parallel_for(std::size_t n, std::size_t workers, Task task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(workers, n);
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string cell_summary(const obs::ObservableSet& set) {
    std::ostringstream out;
    const auto flow = set.mean_flow();
    double t_max = 0.0;
    for (const double t : set.evacuation_times) {
        t_max = std::max(t_max, t);
    }
    out << "runs = " << set.runs << '\n'
        << "evacuated = " << set.evacuation_times.size() << '\n'
        << "unevacuated = " << set.unevacuated << '\n'
        << "max_evacuation_time = " << io::fmt(t_max) << '\n'
        << "plateau_flow = " << io::fmt(obs::plateau_flow(flow)) << '\n';
    return out.str();
}

void write_cell_observables(const fs::path& cell, ModelKind model, std::size_t n_agents,
                            const obs::ObservableSet& set, std::size_t n_bins) {
    const auto model_label = model_name(model);
    for (const auto o : kScalarObservables) {
        std::ostringstream out;
        io::write_histogram_header(out);
        io::write_histogram_rows(out, obs::observable_name(o), model_label, n_agents,
                                 stats::make_histogram(set.samples(o), n_bins));
        io::write_file_atomic(cell / "observables" / csv_name(o), out.str());
    }
    {
        std::ostringstream out;
        io::write_histogram_header(out, true);
        for (std::size_t z = 0; z < set.zoned_times.size(); ++z) {
            if (!set.zoned_times[z].empty()) {
                io::write_histogram_rows(out, "zoned_evacuation_time", model_label, n_agents,
                                         stats::make_histogram(set.zoned_times[z], n_bins), z + 1);
            }
        }
        io::write_file_atomic(cell / "observables" / csv_name(obs::Observable::zoned_evacuation_time),
                              out.str());
    }
    {
        std::ostringstream out;
        io::write_density_grid(out, set.density.counts());
        io::write_file_atomic(cell / "observables" / csv_name(obs::Observable::passage_density),
                              out.str());
    }
    io::write_file_atomic(cell / "summary.txt", cell_summary(set));
}

void simulate_cell(const ExperimentPlan& plan, ModelKind model, std::size_t n_agents,
                   const fs::path& cell, std::size_t workers) {
    const SceneConfig scene = cell_scene(plan.scene, n_agents);
    const std::uint64_t hash = config_hash(scene);
    std::vector<obs::RunObservables> results(plan.runs_per_cell);
    parallel_for(plan.runs_per_cell, workers, [&](std::size_t k) {
        const std::uint64_t seed = run_seed(plan.base_seed, model, n_agents, k);
        TrajectoryLog log = simulate_run(model, scene, seed);
        log.run_id = k;
        const std::string stem = run_stem(k);
        io::save_trajectory(log, cell / "runs" / (stem + ".traj"));
        io::RunManifest m;
        m.model = model;
        m.n_agents = n_agents;
        m.run_index = k;
        m.base_seed = plan.base_seed;
        m.seed = seed;
        m.config_hash = hash;
        m.trajectory = stem + ".traj";
        m.frames = log.frame_count();
        m.evacuated = log.evacuated_count();
        m.unevacuated = log.n_agents - m.evacuated;
        io::write_file_atomic(cell / "runs" / (stem + ".manifest"), io::to_text(m));
        results[k] = obs::summarize(log);
    });
    obs::ObservableSet set;
    for (const auto& r : results) {
        set.add(r);
    }
    write_cell_observables(cell, model, n_agents, set, plan.n_bins);
}

stats::DistanceMatrix zone_matrix(std::string observable, std::vector<std::string> labels,
                                  std::span<const obs::ObservableSet> sets, std::size_t zone,
                                  std::size_t n_bins) {
    const std::size_t n = sets.size();
    stats::DistanceMatrix d{std::move(observable), std::move(labels), Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = stats::zone_divergence(sets[i].zoned_times[zone],
                                                    sets[j].zoned_times[zone], n_bins)
                                 .value_or(0.0);
            d.values(i, j) = v;
            d.values(j, i) = v;
        }
    }
    return d;
}

/// Equal-width edges over the pooled range of every non-empty sample set.
std::vector<double> pooled_edges(std::span<const std::vector<double>* const> sets,
                                 std::size_t n_bins) {
    bool any = false;
    double lo = 0.0;
    double hi = 0.0;
    for (const auto* s : sets) {
        for (const double x : *s) {
            lo = any ? std::min(lo, x) : x;
            hi = any ? std::max(hi, x) : x;
            any = true;
        }
    }
    return stats::equal_width_edges(lo, any ? hi : 1.0, n_bins);
}

std::vector<obs::ObservableSet> load_sets(const fs::path& root, std::size_t n_agents,
                                          const AnalysisOptions& options) {
    if (options.models.empty()) {
        throw std::invalid_argument("analysis needs at least one model");
    }
    std::vector<obs::ObservableSet> sets;
    for (const auto m : options.models) {
        sets.push_back(load_cell(root, m, n_agents));
    }
    return sets;
}

}  // namespace

std::size_t simulate(const ExperimentPlan& plan) {
    plan.validate();
    const std::size_t workers = resolve_workers(plan.workers);
    struct Pending {
        ModelKind model;
        std::size_t n;
        fs::path cell;
    };
    std::vector<Pending> todo;
    std::vector<fs::path> conflicts;
    for (const auto n : plan.agent_counts) {
        for (const auto m : plan.models) {
            const auto cell = cell_directory(plan.output_directory, m, n);
            if (!fs::exists(cell)) {
                todo.push_back({m, n, cell});
                continue;
            }
            auto c = cell_conflicts(plan, m, n, cell);
            if (c.empty() && !plan.force) {
                continue;
            }
            if (!c.empty() && !plan.force) {
                conflicts.insert(conflicts.end(), c.begin(), c.end());
                continue;
            }
            todo.push_back({m, n, cell});
        }
    }
    if (!conflicts.empty()) {
        std::string msg = "existing output does not match the plan (use --force to regenerate):";
        for (const auto& p : conflicts) {
            msg += "\n  " + p.string();
        }
        throw OutputConflict(std::move(conflicts), msg);
    }
    for (const auto& p : todo) {
        fs::remove_all(p.cell);
        simulate_cell(plan, p.model, p.n, p.cell, workers);
    }
    return todo.size();
}

obs::ObservableSet load_cell(const fs::path& root, ModelKind model, std::size_t n_agents) {
    const auto runs = cell_directory(root, model, n_agents) / "runs";
    std::vector<fs::path> manifests;
    if (fs::exists(runs)) {
        for (const auto& e : fs::directory_iterator(runs)) {
            if (e.path().extension() == ".manifest") {
                manifests.push_back(e.path());
            }
        }
    }
    if (manifests.empty()) {
        throw MissingInput("no runs of model '" + std::string(model_name(model)) + "' at N=" +
                           std::to_string(n_agents) + " under " + root.string());
    }
    std::sort(manifests.begin(), manifests.end());
    obs::ObservableSet set;
    for (std::size_t k = 0; k < manifests.size(); ++k) {
        const auto m = io::manifest_from_text(io::read_file(manifests[k]));
        if (m.model != model || m.n_agents != n_agents || m.run_index != k) {
            throw io::FormatError(manifests[k].string() + " does not describe run " +
                                  std::to_string(k) + " of this cell");
        }
        const auto log = io::load_trajectory(runs / m.trajectory);
        if (log.model != model || log.n_agents != n_agents ||
            config_hash(log.scene) != m.config_hash) {
            throw io::FormatError(m.trajectory + " disagrees with its manifest");
        }
        set.add(obs::summarize(log));
    }
    return set;
}

AnalysisResult compare(std::span<const obs::ObservableSet> sets, std::vector<std::string> labels,
                       std::size_t n_agents, std::size_t n_bins, ZonedMode zoned_mode) {
    if (sets.size() != labels.size()) {
        throw std::invalid_argument("one label per observable set required");
    }
    AnalysisResult r;
    r.n_agents = n_agents;
    r.labels = labels;
    auto scalar = [&](obs::Observable o) {
        std::vector<std::vector<double>> samples;
        for (const auto& s : sets) {
            samples.push_back(s.samples(o));
        }
        return stats::distance_matrix(name_of(o), labels, samples, n_bins);
    };

    r.matrices.push_back(scalar(obs::Observable::evacuation_time));
    if (zoned_mode == ZonedMode::mean) {
        std::vector<std::vector<std::vector<double>>> zones;
        for (const auto& s : sets) {
            zones.push_back(s.zoned_times);
        }
        r.matrices.push_back(stats::zoned_distance_matrix(
            name_of(obs::Observable::zoned_evacuation_time), labels, zones, n_bins));
    } else {
        for (std::size_t z = 0; z < obs::kZoneRadii.size(); ++z) {
            const bool populated = std::any_of(sets.begin(), sets.end(), [z](const auto& s) {
                return !s.zoned_times[z].empty();
            });
            if (!populated) {
                continue;
            }
            r.matrices.push_back(zone_matrix(name_of(obs::Observable::zoned_evacuation_time) +
                                                 "_zone" + std::to_string(z + 1),
                                             labels, sets, z, n_bins));
        }
    }
    {
        std::vector<std::vector<double>> maps;
        for (const auto& s : sets) {
            maps.push_back(s.density.normalized());
        }
        r.matrices.push_back(stats::distance_matrix_from_distributions(
            name_of(obs::Observable::passage_density), labels, maps));
    }
    r.matrices.push_back(scalar(obs::Observable::total_distance));
    r.matrices.push_back(scalar(obs::Observable::inconvenience));
    r.matrices.push_back(scalar(obs::Observable::flow_rate));

    if (sets.size() >= 2) {
        r.compromise = distatis::analyze(r.matrices);
    }
    return r;
}

AnalysisResult analyze(const fs::path& root, std::size_t n_agents,
                       const AnalysisOptions& options) {
    const auto sets = load_sets(root, n_agents, options);
    auto result =
        compare(sets, labels_of(options.models), n_agents, options.n_bins, options.zoned_mode);

    const auto dir = analysis_directory(root, n_agents);
    for (const auto& d : result.matrices) {
        std::ostringstream out;
        io::write_distance_matrix(out, d);
        io::write_file_atomic(dir / ("distance_" + d.observable + ".csv"), out.str());
    }
    if (result.compromise) {
        std::ostringstream out;
        out << "# N = " << n_agents << '\n'
            << "# bins = " << options.n_bins << '\n'
            << "# zoned_mode = " << zoned_mode_name(options.zoned_mode) << '\n';
        for (std::size_t i = 0; i < sets.size(); ++i) {
            out << "# runs " << result.labels[i] << " = " << sets[i].runs << '\n'
                << "# unevacuated " << result.labels[i] << " = " << sets[i].unevacuated << '\n';
        }
        out << distatis::format_report(*result.compromise, result.labels);
        io::write_file_atomic(dir / "distatis.txt", out.str());
    }
    return result;
}

void report(const fs::path& root, std::size_t n_agents, const AnalysisOptions& options) {
    const auto sets = load_sets(root, n_agents, options);
    const auto labels = labels_of(options.models);
    const auto dir = report_directory(root, n_agents);

    for (const auto o : kScalarObservables) {
        std::vector<const std::vector<double>*> samples;
        for (const auto& s : sets) {
            samples.push_back(&s.samples(o));
        }
        const auto edges = pooled_edges(samples, options.n_bins);
        std::ostringstream out;
        io::write_histogram_header(out);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            io::write_histogram_rows(out, obs::observable_name(o), labels[i], n_agents,
                                     stats::bin_samples(*samples[i], edges));
        }
        io::write_file_atomic(dir / ("histogram_" + name_of(o) + ".csv"), out.str());
    }
    {
        std::ostringstream out;
        io::write_histogram_header(out, true);
        for (std::size_t z = 0; z < obs::kZoneRadii.size(); ++z) {
            std::vector<const std::vector<double>*> samples;
            for (const auto& s : sets) {
                samples.push_back(&s.zoned_times[z]);
            }
            const auto edges = pooled_edges(samples, options.n_bins);
            for (std::size_t i = 0; i < sets.size(); ++i) {
                io::write_histogram_rows(out, "zoned_evacuation_time", labels[i], n_agents,
                                         stats::bin_samples(*samples[i], edges), z + 1);
            }
        }
        io::write_file_atomic(dir / "histogram_zoned_evacuation_time.csv", out.str());
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        std::ostringstream out;
        io::write_density_grid(out, sets[i].density.normalized());
        io::write_file_atomic(dir / ("density_" + labels[i] + ".csv"), out.str());
    }
    {
        std::vector<std::vector<double>> flows;
        std::size_t len = 0;
        for (const auto& s : sets) {
            flows.push_back(s.mean_flow());
            len = std::max(len, flows.back().size());
        }
        std::ostringstream out;
        out << "second";
        for (const auto& l : labels) {
            out << ',' << l;
        }
        out << '\n';
        for (std::size_t k = 0; k < len; ++k) {
            out << k;
            for (const auto& f : flows) {
                out << ',' << io::fmt(k < f.size() ? f[k] : 0.0);
            }
            out << '\n';
        }
        io::write_file_atomic(dir / "flow_series.csv", out.str());

        std::ostringstream plateau;
        plateau << "model,plateau_flow\n";
        for (std::size_t i = 0; i < sets.size(); ++i) {
            plateau << labels[i] << ',' << io::fmt(obs::plateau_flow(flows[i])) << '\n';
        }
        io::write_file_atomic(dir / "flow_plateau.csv", plateau.str());
    }
    if (sets.size() >= 2) {
        const auto result =
            compare(sets, labels, n_agents, options.n_bins, options.zoned_mode);
        const auto& c = *result.compromise;
        std::ostringstream out;
        out << "table,model";
        for (std::size_t a = 0; a < c.kept_axes; ++a) {
            out << ",axis" << a + 1;
        }
        out << '\n';
        auto rows = [&](const std::string& table, const Matrix& m) {
            for (std::size_t i = 0; i < labels.size(); ++i) {
                out << table << ',' << labels[i];
                for (std::size_t a = 0; a < c.kept_axes; ++a) {
                    out << ',' << io::fmt(m(i, a));
                }
                out << '\n';
            }
        };
        rows("compromise", c.factor_scores);
        for (std::size_t k = 0; k < c.table_scores.size(); ++k) {
            rows(c.observables[k], c.table_scores[k]);
        }
        io::write_file_atomic(dir / "projections.csv", out.str());
    }
}

std::string to_text(const ExperimentPlan& plan) {
    std::ostringstream out;
    out << "models = ";
    for (std::size_t i = 0; i < plan.models.size(); ++i) {
        out << (i ? "," : "") << model_name(plan.models[i]);
    }
    out << "\nagent_counts = ";
    for (std::size_t i = 0; i < plan.agent_counts.size(); ++i) {
        out << (i ? "," : "") << plan.agent_counts[i];
    }
    out << "\nruns_per_cell = " << plan.runs_per_cell << '\n'
        << "base_seed = " << plan.base_seed << '\n'
        << "bins = " << plan.n_bins << '\n'
        << "zoned_mode = " << zoned_mode_name(plan.zoned_mode) << '\n'
        << "seed_derivation = mix64 chain over (base_seed, fnv1a(model), N, run)\n"
        << "# scene\n"
        << crowd::to_text(plan.scene);
    return out.str();
}

void run_experiment(const ExperimentPlan& plan) {
    simulate(plan);
    io::write_file_atomic(plan.output_directory / "plan.txt", to_text(plan));
    if (plan.models.size() < 2) {
        return;
    }
    const AnalysisOptions options{plan.models, plan.n_bins, plan.zoned_mode};
    for (const auto n : plan.agent_counts) {
        analyze(plan.output_directory, n, options);
        report(plan.output_directory, n, options);
    }
}

}  // namespace crowd::experiment
