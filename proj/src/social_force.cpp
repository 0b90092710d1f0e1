#include "crowdsim/social_force.hpp"

#include <cmath>
#include <stdexcept>

#include "crowdsim/run_loop.hpp"

namespace crowd::social_force {

void ForceParams::validate() const {
    if (!(A > 0 && B > 0 && k > 0 && kappa > 0 && tau > 0 && neighborhood_radius > 0 &&
          cutoff > 0)) {
        throw std::invalid_argument("social force parameters must be positive");
    }
    if (!(herding >= 0.0 && herding <= 1.0)) {
        throw std::invalid_argument("herding weight must lie in [0, 1]");
    }
}

Vec2 desired_velocity(Vec2 exit_direction, std::span<const Vec2> neighbor_velocities,
                      double preferred_speed, const ForceParams& params) {
    if (neighbor_velocities.empty()) {
        return exit_direction * preferred_speed;
    }
    Vec2 mean;
    for (const auto& v : neighbor_velocities) {
        mean += v;
    }
    mean = mean / static_cast<double>(neighbor_velocities.size());
    return exit_direction * ((1.0 - params.herding) * preferred_speed) + mean * params.herding;
}

Vec2 driving_force(Vec2 velocity, std::span<const Vec2> neighbor_velocities,
                   Vec2 exit_direction, double mass, double preferred_speed,
                   const ForceParams& params) {
    const Vec2 v0 = desired_velocity(exit_direction, neighbor_velocities, preferred_speed, params);
    return (v0 - velocity) * (mass / params.tau);
}

Vec2 agent_repulsion(Vec2 pos_i, Vec2 vel_i, Vec2 pos_j, Vec2 vel_j, double radius_sum,
                     const ForceParams& params) {
    const Vec2 diff = pos_i - pos_j;
    const double d = norm(diff);
    if (d == 0.0) {
        throw std::domain_error("coincident agent centers");
    }
    const Vec2 n = diff / d;
    const Vec2 t{-n.y, n.x};
    const double overlap = contact(radius_sum - d);
    const double normal = params.A * std::exp((radius_sum - d) / params.B) + params.k * overlap;
    const double tangential_dv = dot(vel_j - vel_i, t);
    return n * normal + t * (params.kappa * overlap * tangential_dv);
}

Vec2 wall_force(Vec2 pos, Vec2 vel, double radius, const Segment& wall,
                const ForceParams& params) {
    const Vec2 diff = pos - closest_point(wall, pos);
    const double d = norm(diff);
    if (d == 0.0) {
        throw std::domain_error("agent center lies on a wall");
    }
    const Vec2 n = diff / d;
    const Vec2 t{-n.y, n.x};
    const double overlap = contact(radius - d);
    const double normal = params.A * std::exp((radius - d) / params.B) + params.k * overlap;
    return n * normal - t * (params.kappa * overlap * dot(vel, t));
}

Engine::Engine(const SceneConfig& scene, const ForceParams& params)
    : scene_(scene),
      params_(params),
      walls_(scene.walls()),
      grid_(scene.room_width, scene.room_depth,
            std::max(params.neighborhood_radius, 2.0 * scene.agent_radius + params.cutoff)) {
    scene_.validate();
    params_.validate();
}

void Engine::rebuild_grid(std::span<const AgentState> agents) {
    positions_.resize(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        positions_[i] = agents[i].position;
    }
    grid_.rebuild(positions_, [&](std::size_t i) { return !agents[i].evacuated_at; });
}

Vec2 Engine::total_force(std::span<const AgentState> agents, std::size_t i) const {
    const auto& self = agents[i];
    const double r = scene_.agent_radius;
    const double radius_sum = 2.0 * r;
    const double pair_range = radius_sum + params_.cutoff;
    const double herd_sq = params_.neighborhood_radius * params_.neighborhood_radius;
    const double range = std::max(pair_range, params_.neighborhood_radius);

    Vec2 interaction;
    Vec2 herd_sum;
    std::size_t herd_count = 0;
    grid_.for_each_candidate(self.position, range, [&](std::size_t j) {
        if (j == i) {
            return;
        }
        const auto& other = agents[j];
        const double dist_sq = abs_sq(self.position - other.position);
        if (dist_sq <= herd_sq) {
            herd_sum += other.velocity;
            ++herd_count;
        }
        if (dist_sq <= pair_range * pair_range) {
            interaction += agent_repulsion(self.position, self.velocity, other.position,
                                           other.velocity, radius_sum, params_);
        }
    });

    for (const auto& wall : walls_) {
        const Vec2 q = closest_point(wall, self.position);
        if (abs_sq(self.position - q) <= (r + params_.cutoff) * (r + params_.cutoff)) {
            interaction += wall_force(self.position, self.velocity, r, wall, params_);
        }
    }

    // The herding term only needs the neighborhood mean, passed as a single sample.
    const Vec2 mean = herd_count > 0 ? herd_sum / static_cast<double>(herd_count) : Vec2{};
    const std::span<const Vec2> herd(&mean, herd_count > 0 ? 1 : 0);
    const Vec2 drive = driving_force(self.velocity, herd, exit_direction(scene_, self.position),
                                     scene_.agent_mass, scene_.preferred_speed, params_);
    return drive + interaction;
}

void Engine::step(std::vector<AgentState>& agents, double dt) {
    rebuild_grid(agents);
    next_velocity_.assign(agents.size(), Vec2{});
    const double vmax = scene_.max_speed;
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].evacuated_at) {
            continue;
        }
        Vec2 v = agents[i].velocity + total_force(agents, i) * (dt / scene_.agent_mass);
        const double speed = norm(v);
        if (speed > vmax) {
            v = v * (vmax / speed);
        }
        next_velocity_[i] = v;
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
        if (agents[i].evacuated_at) {
            continue;
        }
        agents[i].velocity = next_velocity_[i];
        agents[i].position += next_velocity_[i] * dt;
    }
}

TrajectoryLog run_social_force(const SceneConfig& scene, std::uint64_t seed,
                               const ForceParams& params) {
    Engine engine(scene, params);
    return run_continuous(ModelKind::social_force, scene, seed, engine);
}

}  // namespace crowd::social_force
