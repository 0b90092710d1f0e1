#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "crowdsim/scene.hpp"

namespace crowd {

/// Positions of every agent at every recorded frame of one run.
///
/// Frame 0 holds the initial placement and frame k the state after k steps.
/// Positions are stored as 32-bit floats, exactly as they are persisted, so
/// anything computed from an in-memory log matches what is computed from disk.
/// An agent is recorded in the frame where it crosses the exit and is absent
/// (NaN) from every later frame.
struct TrajectoryLog {
    std::uint64_t run_id = 0;
    ModelKind model = ModelKind::social_force;
    SceneConfig scene;
    double dt = 0.0;
    std::size_t n_agents = 0;
    std::vector<float> xy;  ///< frame-major, agent-minor (x, y) pairs
    std::vector<std::optional<double>> evacuated_at;

    std::size_t frames = 0;

    std::size_t frame_count() const { return frames; }
    std::size_t step_count() const { return frames == 0 ? 0 : frames - 1; }

    bool present(std::size_t frame, std::size_t agent) const {
        return !std::isnan(xy[2 * (frame * n_agents + agent)]);
    }

    Vec2 position(std::size_t frame, std::size_t agent) const {
        const std::size_t i = 2 * (frame * n_agents + agent);
        return {static_cast<double>(xy[i]), static_cast<double>(xy[i + 1])};
    }

    std::size_t evacuated_count() const;

    /// Appends the frame at `time`; agents whose evacuation time is earlier
    /// than `time` are written as absent. Engines compute both times as
    /// `frame * dt`, so the comparison is exact.
    void append_frame(std::span<const AgentState> agents, double time);

    /// Bitwise comparison (NaN payloads compare equal).
    bool operator==(const TrajectoryLog&) const;
};

}  // namespace crowd
