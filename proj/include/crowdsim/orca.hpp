#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crowdsim/scene.hpp"
#include "crowdsim/spatial_grid.hpp"
#include "crowdsim/trajectory.hpp"

// Optimal reciprocal collision avoidance (RVO2 style): one half-plane per
// neighbor in velocity space, then a 2D linear program for the permitted
// velocity closest to the preferred one.

namespace crowd::orca {

/// Half-plane boundary in velocity space. Permitted velocities v satisfy
/// det(direction, point - v) <= 0, i.e. they lie on the left of `direction`.
struct OrcaLine {
    Vec2 point;
    Vec2 direction;
};

/// Signed distance by which `v` violates `line` (positive outside).
inline double violation(const OrcaLine& line, Vec2 v) { return det(line.direction, line.point - v); }

struct OrcaParams {
    double tau_agent = 0.5;
    double tau_obstacle = 0.05;
    double neighbor_distance = 5.0;
    std::size_t max_neighbors = 16;

    void validate() const;
};

/// A moving disc: position, current velocity, radius.
struct Disc {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.0;
};

/// Reciprocal half-plane for `self` against `other` over horizon `tau`.
/// Overlapping discs use the one-step escape construction with horizon `dt`.
/// Throws std::domain_error for coincident centers.
OrcaLine orca_line_agent(const Disc& self, const Disc& other, double tau, double dt);

/// Constraint keeping `self` out of `wall` for `tau_obstacle`: the segment lies
/// behind the tangent through its closest point, so bounding the approach speed
/// along that normal is sufficient. Empty when the wall cannot be reached
/// within the horizon at `max_speed`.
std::vector<OrcaLine> orca_lines_wall(const Disc& self, const Segment& wall,
                                      double tau_obstacle, double max_speed);

/// Velocity inside every half-plane and the disc of radius `max_speed` closest
/// to `preferred`. The first `n_obstacle_lines` lines are hard; if the whole
/// set is infeasible the result minimizes the largest violation of the
/// remaining lines while keeping the hard ones.
Vec2 solve_velocity(std::span<const OrcaLine> lines, std::size_t n_obstacle_lines,
                    Vec2 preferred, double max_speed);

inline Vec2 solve_velocity(std::span<const OrcaLine> lines, Vec2 preferred, double max_speed) {
    return solve_velocity(lines, 0, preferred, max_speed);
}

class Engine {
public:
    Engine(const SceneConfig& scene, const OrcaParams& params);

    /// Synchronous update: all new velocities come from the previous state.
    void step(std::vector<AgentState>& agents, double dt);

    /// Wall lines followed by agent lines for agent `i` (grid must be fresh).
    std::vector<OrcaLine> constraints(std::span<const AgentState> agents, std::size_t i,
                                      double dt, std::size_t& n_obstacle_lines) const;

private:
    SceneConfig scene_;
    OrcaParams params_;
    std::vector<Segment> walls_;
    SpatialGrid grid_;
    std::vector<Vec2> positions_;
    std::vector<Vec2> next_velocity_;
};

TrajectoryLog run_orca(const SceneConfig& scene, std::uint64_t seed,
                       const OrcaParams& params = {});

}  // namespace crowd::orca
