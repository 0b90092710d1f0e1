#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "crowdsim/scene.hpp"
#include "crowdsim/trajectory.hpp"

namespace crowd {

/// Shared driver for the continuous engines. `engine.step(agents, dt)` must
/// advance every agent without an evacuation time; the loop then marks agents
/// that crossed the exit and records the frame.
template <class Engine>
TrajectoryLog run_continuous(ModelKind kind, const SceneConfig& scene,
                             std::vector<AgentState> agents, Engine& engine) {
    const double dt = scene.time_step;

    TrajectoryLog log;
    log.model = kind;
    log.scene = scene;
    log.dt = dt;
    log.scene.n_agents = agents.size();
    log.n_agents = agents.size();
    log.append_frame(agents, 0.0);

    std::size_t remaining = agents.size();
    const auto max_steps =
        static_cast<std::size_t>(std::floor(scene.max_sim_time / dt + 1e-9));
    for (std::size_t step = 1; step <= max_steps && remaining > 0; ++step) {
        const double t = static_cast<double>(step) * dt;
        engine.step(agents, dt);
        for (auto& a : agents) {
            if (!a.evacuated_at && beyond_exit(a.position, scene)) {
                a.evacuated_at = t;
                --remaining;
            }
        }
        log.append_frame(agents, t);
    }

    log.evacuated_at.reserve(agents.size());
    for (const auto& a : agents) {
        log.evacuated_at.push_back(a.evacuated_at);
    }
    return log;
}

template <class Engine>
TrajectoryLog run_continuous(ModelKind kind, const SceneConfig& scene, std::uint64_t seed,
                             Engine& engine) {
    return run_continuous(kind, scene, init_scene(scene, seed), engine);
}

/// Unit vector from `p` to the nearest point of the exit opening inset by one
/// agent radius from each jamb; straight down when `p` already sits on it.
/// Aiming at the bare jamb tip would pin an agent whose center is just outside
/// the span against the tip with no sideways component.
inline Vec2 exit_direction(const SceneConfig& scene, Vec2 p) {
    const double inset = std::min(scene.agent_radius, 0.5 * scene.exit_width);
    const Segment usable{{scene.exit_left() + inset, 0.0}, {scene.exit_right() - inset, 0.0}};
    const Vec2 d = closest_point(usable, p) - p;
    const double n = norm(d);
    return n > 1e-12 ? d / n : Vec2{0.0, -1.0};
}

}  // namespace crowd
