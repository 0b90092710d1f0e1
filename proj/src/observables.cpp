#include "crowdsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "crowdsim/lattice.hpp"

namespace crowd::obs {

std::string_view observable_name(Observable o) {
    switch (o) {
        case Observable::evacuation_time: return "evacuation_time";
        case Observable::zoned_evacuation_time: return "zoned_evacuation_time";
        case Observable::passage_density: return "passage_density";
        case Observable::total_distance: return "total_distance";
        case Observable::inconvenience: return "inconvenience";
        case Observable::flow_rate: return "flow_rate";
    }
    return "unknown";
}

Observable parse_observable(std::string_view name) {
    for (const auto o : kAllObservables) {
        if (observable_name(o) == name) {
            return o;
        }
    }
    throw std::invalid_argument("unknown observable '" + std::string(name) + "'");
}

std::vector<double> evacuation_times(const TrajectoryLog& log) {
    std::vector<double> out;
    for (const auto& t : log.evacuated_at) {
        if (t) {
            out.push_back(*t);
        }
    }
    return out;
}

std::size_t unevacuated_count(const TrajectoryLog& log) {
    return log.n_agents - log.evacuated_count();
}

std::size_t zone_index(double distance, std::span<const double> radii) {
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (distance <= radii[k]) {
            return k;
        }
    }
    throw std::out_of_range("starting distance " + std::to_string(distance) +
                            " m lies beyond the outermost zone");
}

std::vector<std::vector<double>> zoned_evacuation_times(const TrajectoryLog& log,
                                                        std::span<const double> radii) {
    std::vector<std::vector<double>> zones(radii.size());
    if (log.frame_count() == 0) {
        return zones;
    }
    const Vec2 exit = log.scene.exit_center();
    for (std::size_t a = 0; a < log.n_agents; ++a) {
        if (const auto& t = log.evacuated_at[a]) {
            zones[zone_index(norm(log.position(0, a) - exit), radii)].push_back(*t);
        }
    }
    return zones;
}

namespace {

double path_length(const TrajectoryLog& log, std::size_t agent) {
    double d = 0.0;
    for (std::size_t f = 0; f + 1 < log.frame_count() && log.present(f + 1, agent); ++f) {
        d += norm(log.position(f + 1, agent) - log.position(f, agent));
    }
    return d;
}

double as_logged(double v) { return static_cast<double>(static_cast<float>(v)); }

}  // namespace

std::vector<double> total_distances(const TrajectoryLog& log) {
    std::vector<double> out;
    for (std::size_t a = 0; a < log.n_agents; ++a) {
        if (log.evacuated_at[a]) {
            out.push_back(path_length(log, a));
        }
    }
    return out;
}

double shortest_exit_distance(const TrajectoryLog& log, Vec2 start) {
    if (log.model != ModelKind::lattice) {
        return norm(start - log.scene.nearest_exit_point(start));
    }
    const lattice::LatticeGrid grid(log.scene);
    const int first = grid.exit_first_col();
    const int last = first + grid.exit_col_count() - 1;
    const double x_lo = as_logged(grid.center({first, -1}).x);
    const double x_hi = as_logged(grid.center({last, -1}).x);
    const double y_exit = as_logged(grid.center({first, -1}).y);
    const double x_target = std::clamp(start.x, x_lo, x_hi);
    return std::fabs(start.x - x_target) + std::fabs(start.y - y_exit);
}

std::vector<double> inconveniences(const TrajectoryLog& log) {
    std::vector<double> out;
    for (std::size_t a = 0; a < log.n_agents; ++a) {
        if (log.evacuated_at[a]) {
            const double d_min = shortest_exit_distance(log, log.position(0, a));
            if (!(d_min > 0.0)) {
                throw std::domain_error("agent starts on the exit; inconvenience undefined");
            }
            out.push_back(path_length(log, a) / d_min);
        }
    }
    return out;
}

std::vector<double> exits_per_second(const TrajectoryLog& log) {
    std::vector<double> flow;
    for (const auto& t : log.evacuated_at) {
        if (!t) {
            continue;
        }
        const auto window = static_cast<std::size_t>(std::floor(*t));
        if (flow.size() <= window) {
            flow.resize(window + 1, 0.0);
        }
        flow[window] += 1.0;
    }
    return flow;
}

void PassageDensityMap::add(const TrajectoryLog& log) {
    const double cw = log.scene.room_width / static_cast<double>(kDensityCells);
    const double ch = log.scene.room_depth / static_cast<double>(kDensityCells);
    auto cell = [](double v, double size) {
        if (!(v > 0.0)) {
            return std::size_t{0};
        }
        return std::min(static_cast<std::size_t>(v / size), kDensityCells - 1);
    };
    for (std::size_t f = 0; f < log.frame_count(); ++f) {
        for (std::size_t a = 0; a < log.n_agents; ++a) {
            if (log.present(f, a)) {
                const Vec2 p = log.position(f, a);
                counts_[cell(p.y, ch) * kDensityCells + cell(p.x, cw)] += 1.0;
            }
        }
    }
}

void PassageDensityMap::merge(const PassageDensityMap& other) {
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        counts_[i] += other.counts_[i];
    }
}

double PassageDensityMap::total() const {
    double s = 0.0;
    for (const double c : counts_) {
        s += c;
    }
    return s;
}

std::vector<double> PassageDensityMap::normalized() const {
    std::vector<double> out(counts_.size(), 0.0);
    const double t = total();
    if (t > 0.0) {
        for (std::size_t i = 0; i < counts_.size(); ++i) {
            out[i] = counts_[i] / t;
        }
    }
    return out;
}

RunObservables summarize(const TrajectoryLog& log) {
    RunObservables r;
    r.evacuation_times = evacuation_times(log);
    r.zoned_times = zoned_evacuation_times(log);
    r.total_distances = total_distances(log);
    r.inconveniences = inconveniences(log);
    r.exits_per_second = exits_per_second(log);
    r.unevacuated = unevacuated_count(log);
    r.density.add(log);
    return r;
}

void ObservableSet::add(const RunObservables& run) {
    auto append = [](std::vector<double>& dst, const std::vector<double>& src) {
        dst.insert(dst.end(), src.begin(), src.end());
    };
    ++runs;
    append(evacuation_times, run.evacuation_times);
    for (std::size_t z = 0; z < run.zoned_times.size() && z < zoned_times.size(); ++z) {
        append(zoned_times[z], run.zoned_times[z]);
    }
    append(total_distances, run.total_distances);
    append(inconveniences, run.inconveniences);
    append(flow_samples, run.exits_per_second);
    if (flow_sum.size() < run.exits_per_second.size()) {
        flow_sum.resize(run.exits_per_second.size(), 0.0);
    }
    for (std::size_t k = 0; k < run.exits_per_second.size(); ++k) {
        flow_sum[k] += run.exits_per_second[k];
    }
    unevacuated += run.unevacuated;
    density.merge(run.density);
}

std::vector<double> ObservableSet::mean_flow() const {
    std::vector<double> out = flow_sum;
    if (runs > 0) {
        for (auto& v : out) {
            v /= static_cast<double>(runs);
        }
    }
    return out;
}

const std::vector<double>& ObservableSet::samples(Observable o) const {
    switch (o) {
        case Observable::evacuation_time: return evacuation_times;
        case Observable::total_distance: return total_distances;
        case Observable::inconvenience: return inconveniences;
        case Observable::flow_rate: return flow_samples;
        default: break;
    }
    throw std::invalid_argument("observable '" + std::string(observable_name(o)) +
                                "' has no flat sample set");
}

double plateau_flow(std::span<const double> flow) {
    double total = 0.0;
    for (const double f : flow) {
        total += f;
    }
    if (total <= 0.0) {
        return 0.0;
    }
    auto crossing = [&](double target) {
        double acc = 0.0;
        for (std::size_t k = 0; k < flow.size(); ++k) {
            if (flow[k] > 0.0 && acc + flow[k] >= target) {
                return static_cast<double>(k) + (target - acc) / flow[k];
            }
            acc += flow[k];
        }
        return static_cast<double>(flow.size());
    };
    const double t20 = crossing(0.2 * total);
    const double t80 = crossing(0.8 * total);
    return t80 > t20 ? 0.6 * total / (t80 - t20) : 0.0;
}

ObservableDistribution make_distribution(Observable o, ModelKind model, std::size_t n_agents,
                                         std::vector<double> samples, std::size_t n_bins) {
    ObservableDistribution d{o, model, n_agents, std::move(samples), {}};
    d.histogram = stats::make_histogram(d.samples, n_bins);
    return d;
}

}  // namespace crowd::obs
