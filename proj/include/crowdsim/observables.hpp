#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "crowdsim/divergence.hpp"
#include "crowdsim/trajectory.hpp"

namespace crowd::obs {

enum class Observable {
    evacuation_time,
    zoned_evacuation_time,
    passage_density,
    total_distance,
    inconvenience,
    flow_rate,
};

inline constexpr std::array<Observable, 6> kAllObservables{
    Observable::evacuation_time, Observable::zoned_evacuation_time, Observable::passage_density,
    Observable::total_distance,  Observable::inconvenience,         Observable::flow_rate};

std::string_view observable_name(Observable o);
Observable parse_observable(std::string_view name);

/// Outer radii of the six zones around the exit center, meters.
inline constexpr std::array<double, 6> kZoneRadii{5.0, 10.0, 15.0, 20.0, 25.0, 30.0};

/// Passage grid resolution per axis.
inline constexpr std::size_t kDensityCells = 100;

/// Samples of T_i for evacuated agents, in agent order.
std::vector<double> evacuation_times(const TrajectoryLog& log);

std::size_t unevacuated_count(const TrajectoryLog& log);

/// Smallest k with distance <= radii[k]. Throws std::out_of_range beyond the last.
std::size_t zone_index(double distance, std::span<const double> radii);

/// T_i of evacuated agents grouped by the zone of their starting position.
std::vector<std::vector<double>> zoned_evacuation_times(
    const TrajectoryLog& log, std::span<const double> radii = kZoneRadii);

/// D_i = sum of frame-to-frame displacements up to the exit crossing.
std::vector<double> total_distances(const TrajectoryLog& log);

/// Shortest admissible exit path from `start`: Euclidean distance to the exit
/// segment for continuous models, Manhattan distance to the nearest exit cell
/// center for the lattice model.
double shortest_exit_distance(const TrajectoryLog& log, Vec2 start);

/// I_i = D_i / D_min for evacuated agents.
std::vector<double> inconveniences(const TrajectoryLog& log);

/// Exits per 1-second window [k, k+1) for one run, up to the last exit.
std::vector<double> exits_per_second(const TrajectoryLog& log);

/// Visit counts on a kDensityCells x kDensityCells grid over the room. Row 0
/// is the exit-wall side (y = 0), column 0 is x = 0. Positions beyond the room
/// are clamped into the edge cells.
class PassageDensityMap {
public:
    PassageDensityMap() : counts_(kDensityCells * kDensityCells, 0.0) {}

    /// Adds one count per present agent per frame.
    void add(const TrajectoryLog& log);
    void merge(const PassageDensityMap& other);

    double at(std::size_t row, std::size_t col) const { return counts_[row * kDensityCells + col]; }
    double total() const;
    std::span<const double> counts() const { return counts_; }

    /// Counts scaled to sum to 1 (all zero if empty).
    std::vector<double> normalized() const;

private:
    std::vector<double> counts_;
};

/// Everything one run contributes to the six observables.
struct RunObservables {
    std::vector<double> evacuation_times;
    std::vector<std::vector<double>> zoned_times;
    std::vector<double> total_distances;
    std::vector<double> inconveniences;
    std::vector<double> exits_per_second;
    std::size_t unevacuated = 0;
    PassageDensityMap density;
};

RunObservables summarize(const TrajectoryLog& log);

/// Pooled observables for one (model, N) cell. Merge runs in run order for
/// reproducible pooling.
struct ObservableSet {
    std::size_t runs = 0;
    std::vector<double> evacuation_times;
    std::vector<std::vector<double>> zoned_times =
        std::vector<std::vector<double>>(kZoneRadii.size());
    std::vector<double> total_distances;
    std::vector<double> inconveniences;
    std::vector<double> flow_samples;  ///< per-run per-second exit counts
    std::vector<double> flow_sum;      ///< per-second exit counts summed over runs
    std::size_t unevacuated = 0;
    PassageDensityMap density;

    void add(const RunObservables& run);

    /// Mean exits per second, averaged over runs.
    std::vector<double> mean_flow() const;

    /// Samples for a scalar-valued observable (not zoned, not density).
    const std::vector<double>& samples(Observable o) const;
};

/// Congestion flow level of a flow series: the middle 60% of the exits
/// (from 20% to 80% cumulative) divided by the time they took, interpolated
/// within 1-second windows.
double plateau_flow(std::span<const double> flow);

/// Named binned distribution for output.
struct ObservableDistribution {
    Observable observable;
    ModelKind model;
    std::size_t n_agents = 0;
    std::vector<double> samples;
    stats::Histogram histogram;
};

ObservableDistribution make_distribution(Observable o, ModelKind model, std::size_t n_agents,
                                         std::vector<double> samples, std::size_t n_bins);

}  // namespace crowd::obs
