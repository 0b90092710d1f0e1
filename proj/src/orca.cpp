#include "crowdsim/orca.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "crowdsim/run_loop.hpp"

namespace crowd::orca {

namespace {

constexpr double kParallelEps = 1e-12;

/// Optimizes along line `k` subject to lines [0, k) and the speed disc.
/// With `direction_opt`, `target` is a unit direction to push as far as possible.
bool solve_on_line(std::span<const OrcaLine> lines, std::size_t k, double radius, Vec2 target,
                   bool direction_opt, Vec2& result) {
    const OrcaLine& line = lines[k];
    const double dp = dot(line.point, line.direction);
    const double disc = dp * dp + radius * radius - abs_sq(line.point);
    if (disc < 0.0) {
        return false;
    }
    const double root = std::sqrt(disc);
    double t_left = -dp - root;
    double t_right = -dp + root;

    for (std::size_t i = 0; i < k; ++i) {
        const double denom = det(line.direction, lines[i].direction);
        const double numer = det(lines[i].direction, line.point - lines[i].point);
        if (std::fabs(denom) <= kParallelEps) {
            if (numer < 0.0) {
                return false;
            }
            continue;
        }
        const double t = numer / denom;
        if (denom >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) {
            return false;
        }
    }

    if (direction_opt) {
        result = line.point + line.direction * (dot(target, line.direction) > 0.0 ? t_right : t_left);
    } else {
        const double t = std::clamp(dot(line.direction, target - line.point), t_left, t_right);
        result = line.point + line.direction * t;
    }
    return true;
}

/// Incremental 2D program. Returns the index of the first line that cannot be
/// satisfied, or lines.size() on success.
std::size_t solve_lines(std::span<const OrcaLine> lines, double radius, Vec2 target,
                        bool direction_opt, Vec2& result) {
    if (direction_opt) {
        result = target * radius;
    } else if (abs_sq(target) > radius * radius) {
        result = normalized(target) * radius;
    } else {
        result = target;
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (violation(lines[i], result) > 0.0) {
            const Vec2 previous = result;
            if (!solve_on_line(lines, i, radius, target, direction_opt, result)) {
                result = previous;
                return i;
            }
        }
    }
    return lines.size();
}

/// Minimizes the maximum violation of soft lines from `begin` on, keeping the
/// first `n_hard` lines satisfied.
void solve_least_violation(std::span<const OrcaLine> lines, std::size_t n_hard,
                           std::size_t begin, double radius, Vec2& result) {
    double distance = 0.0;
    std::vector<OrcaLine> projected;
    for (std::size_t i = begin; i < lines.size(); ++i) {
        if (violation(lines[i], result) <= distance) {
            continue;
        }
        projected.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(n_hard));
        for (std::size_t j = n_hard; j < i; ++j) {
            OrcaLine bisector;
            const double d = det(lines[i].direction, lines[j].direction);
            if (std::fabs(d) <= kParallelEps) {
                if (dot(lines[i].direction, lines[j].direction) > 0.0) {
                    continue;
                }
                bisector.point = (lines[i].point + lines[j].point) * 0.5;
            } else {
                bisector.point =
                    lines[i].point +
                    lines[i].direction *
                        (det(lines[j].direction, lines[i].point - lines[j].point) / d);
            }
            bisector.direction = normalized(lines[j].direction - lines[i].direction);
            projected.push_back(bisector);
        }
        const Vec2 previous = result;
        if (solve_lines(projected, radius, perp(lines[i].direction), true, result) <
            projected.size()) {
            // Only floating-point error can land here; keep the last good point.
            result = previous;
        }
        distance = violation(lines[i], result);
    }
}

}  // namespace

void OrcaParams::validate() const {
    if (!(tau_agent > 0 && tau_obstacle > 0 && neighbor_distance > 0)) {
        throw std::invalid_argument("ORCA horizons and neighbor distance must be positive");
    }
}

OrcaLine orca_line_agent(const Disc& self, const Disc& other, double tau, double dt) {
    const Vec2 rel_pos = other.position - self.position;
    const Vec2 rel_vel = self.velocity - other.velocity;
    const double dist_sq = abs_sq(rel_pos);
    if (dist_sq == 0.0) {
        throw std::domain_error("coincident agent centers");
    }
    const double r = self.radius + other.radius;
    const double r_sq = r * r;

    OrcaLine line;
    Vec2 u;
    if (dist_sq > r_sq) {
        const double inv_tau = 1.0 / tau;
        // Relative velocity measured from the center of the cut-off disc.
        const Vec2 w = rel_vel - rel_pos * inv_tau;
        const double w_len_sq = abs_sq(w);
        const double dot1 = dot(w, rel_pos);
        if (dot1 < 0.0 && dot1 * dot1 > r_sq * w_len_sq) {
            // Closest boundary point is on the cut-off circle.
            const double w_len = std::sqrt(w_len_sq);
            const Vec2 unit_w = w / w_len;
            line.direction = {unit_w.y, -unit_w.x};
            u = unit_w * (r * inv_tau - w_len);
        } else {
            // Closest boundary point is on one of the legs.
            const double leg = std::sqrt(dist_sq - r_sq);
            if (det(rel_pos, w) > 0.0) {
                line.direction = Vec2{rel_pos.x * leg - rel_pos.y * r,
                                      rel_pos.x * r + rel_pos.y * leg} / dist_sq;
            } else {
                line.direction = -Vec2{rel_pos.x * leg + rel_pos.y * r,
                                       -rel_pos.x * r + rel_pos.y * leg} / dist_sq;
            }
            u = line.direction * dot(rel_vel, line.direction) - rel_vel;
        }
    } else {
        // Already overlapping: resolve within one time step.
        const double inv_dt = 1.0 / dt;
        const Vec2 w = rel_vel - rel_pos * inv_dt;
        const double w_len = norm(w);
        const Vec2 unit_w = w_len > 0.0 ? w / w_len : -rel_pos / std::sqrt(dist_sq);
        line.direction = {unit_w.y, -unit_w.x};
        u = unit_w * (r * inv_dt - w_len);
    }
    line.point = self.velocity + u * 0.5;
    return line;
}

std::vector<OrcaLine> orca_lines_wall(const Disc& self, const Segment& wall,
                                      double tau_obstacle, double max_speed) {
    const Vec2 diff = self.position - closest_point(wall, self.position);
    const double d = norm(diff);
    const double gap = d - self.radius;
    if (gap > tau_obstacle * max_speed || d == 0.0) {
        return {};
    }
    const Vec2 n = diff / d;
    // Permitted: dot(v, n) >= -gap / tau_obstacle.
    return {OrcaLine{n * (-gap / tau_obstacle), Vec2{n.y, -n.x}}};
}

Vec2 solve_velocity(std::span<const OrcaLine> lines, std::size_t n_obstacle_lines,
                    Vec2 preferred, double max_speed) {
    Vec2 result;
    const std::size_t failed = solve_lines(lines, max_speed, preferred, false, result);
    if (failed < lines.size()) {
        solve_least_violation(lines, std::min(n_obstacle_lines, lines.size()),
                              failed, max_speed, result);
    }
    return result;
}

Engine::Engine(const SceneConfig& scene, const OrcaParams& params)
    : scene_(scene),
      params_(params),
      walls_(scene.walls()),
      grid_(scene.room_width, scene.room_depth, params.neighbor_distance) {
    scene_.validate();
    params_.validate();
}

std::vector<OrcaLine> Engine::constraints(std::span<const AgentState> agents, std::size_t i,
                                          double dt, std::size_t& n_obstacle_lines) const {
    const auto& self = agents[i];
    const Disc me{self.position, self.velocity, scene_.agent_radius};
    std::vector<OrcaLine> lines;
    for (const auto& wall : walls_) {
        for (const auto& l : orca_lines_wall(me, wall, params_.tau_obstacle, scene_.max_speed)) {
            lines.push_back(l);
        }
    }
    n_obstacle_lines = lines.size();

    struct Candidate {
        double dist_sq;
        std::size_t index;
    };
    std::vector<Candidate> near;
    const double range_sq = params_.neighbor_distance * params_.neighbor_distance;
    grid_.for_each_candidate(self.position, params_.neighbor_distance, [&](std::size_t j) {
        if (j == i) {
            return;
        }
        const double d_sq = abs_sq(agents[j].position - self.position);
        if (d_sq < range_sq) {
            near.push_back({d_sq, j});
        }
    });
    const auto by_distance = [](const Candidate& a, const Candidate& b) {
        return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index);
    };
    const std::size_t keep = std::min(near.size(), params_.max_neighbors);
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(keep), near.end(),
                      by_distance);
    near.resize(keep);

    for (const auto& c : near) {
        const auto& other = agents[c.index];
        lines.push_back(orca_line_agent(me, {other.position, other.velocity, scene_.agent_radius},
                                        params_.tau_agent, dt));
    }
    return lines;
}

void Engine::step(std::vector<AgentState>& agents, double dt) {
    positions_.resize(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        positions_[i] = agents[i].position;
    }
    grid_.rebuild(positions_, [&](std::size_t i) { return !agents[i].evacuated_at; });

    next_velocity_.assign(agents.size(), Vec2{});
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].evacuated_at) {
            continue;
        }
        std::size_t n_obstacle = 0;
        const auto lines = constraints(agents, i, dt, n_obstacle);
        const Vec2 preferred = exit_direction(scene_, agents[i].position) * scene_.preferred_speed;
        next_velocity_[i] = solve_velocity(lines, n_obstacle, preferred, scene_.max_speed);
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].evacuated_at) {
            continue;
        }
        agents[i].velocity = next_velocity_[i];
        agents[i].position += next_velocity_[i] * dt;
    }
}

TrajectoryLog run_orca(const SceneConfig& scene, std::uint64_t seed, const OrcaParams& params) {
    Engine engine(scene, params);
    return run_continuous(ModelKind::orca, scene, seed, engine);
}

}  // namespace crowd::orca
