#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowdsim/scene.hpp"
#include "crowdsim/spatial_grid.hpp"
#include "crowdsim/trajectory.hpp"

// Helbing-Molnar-Farkas-Vicsek social force model with herding.

namespace crowd::social_force {

struct ForceParams {
    double A = 2000.0;        ///< repulsion strength, N
    double B = 0.08;          ///< repulsion fall-off length, m
    double k = 12000.0;       ///< body compression constant, kg/s^2
    double kappa = 24000.0;   ///< sliding friction constant, kg/(m s)
    double tau = 1.0;         ///< relaxation time, s
    double herding = 0.2;     ///< weight p of the neighbors' mean velocity
    double neighborhood_radius = 2.0;  ///< center distance defining <v_j>, m
    double cutoff = 2.0;      ///< pair and wall forces ignored beyond this surface gap, m

    void validate() const;
};

/// eta(x) = max(x, 0).
constexpr double contact(double x) { return x > 0.0 ? x : 0.0; }

/// v0 = (1 - p) V0 e + p <v_j>; without neighbors, v0 = V0 e.
Vec2 desired_velocity(Vec2 exit_direction, std::span<const Vec2> neighbor_velocities,
                      double preferred_speed, const ForceParams& params);

/// Restoring force -m (v - v0) / tau.
Vec2 driving_force(Vec2 velocity, std::span<const Vec2> neighbor_velocities,
                   Vec2 exit_direction, double mass, double preferred_speed,
                   const ForceParams& params);

/// Force on agent i from agent j: exponential repulsion plus body compression
/// along n_ij and sliding friction along t_ij. `radius_sum` is R_i + R_j.
/// Throws std::domain_error when the centers coincide.
Vec2 agent_repulsion(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j, double radius_sum,
                     const ForceParams& params);

/// Force on an agent from a wall segment. Throws std::domain_error when the
/// center lies on the wall.
Vec2 wall_force(Vec2 pos, Vec2 vel, double radius, const Segment& wall,
                const ForceParams& params);

/// Advances a crowd by explicit semi-implicit Euler steps.
class Engine {
public:
    Engine(const SceneConfig& scene, const ForceParams& params);

    /// Forces are computed from the state at the start of the step; velocities
    /// are then updated, clamped to max_speed, and positions advanced.
    void step(std::vector<AgentState>& agents, double dt);

    /// Indexes the current positions for neighbor queries.
    void rebuild_grid(std::span<const AgentState> agents);

    /// Total force on agent `i` given the current state (grid must be fresh).
    Vec2 total_force(std::span<const AgentState> agents, std::size_t i) const;

private:

    SceneConfig scene_;
    ForceParams params_;
    std::vector<Segment> walls_;
    SpatialGrid grid_;
    std::vector<Vec2> positions_;
    std::vector<Vec2> next_velocity_;
};

TrajectoryLog run_social_force(const SceneConfig& scene, std::uint64_t seed,
                               const ForceParams& params = {});

}  // namespace crowd::social_force
