#include "crowdsim/trajectory.hpp"

#include <algorithm>
#include <cstring>

namespace crowd {

std::size_t TrajectoryLog::evacuated_count() const {
    return static_cast<std::size_t>(
        std::count_if(evacuated_at.begin(), evacuated_at.end(),
                      [](const auto& t) { return t.has_value(); }));
}

void TrajectoryLog::append_frame(std::span<const AgentState> agents, double time) {
    constexpr float nan = std::numeric_limits<float>::quiet_NaN();
    for (const auto& a : agents) {
        if (a.evacuated_at && *a.evacuated_at < time) {
            xy.push_back(nan);
            xy.push_back(nan);
        } else {
            xy.push_back(static_cast<float>(a.position.x));
            xy.push_back(static_cast<float>(a.position.y));
        }
    }
    ++frames;
}

bool TrajectoryLog::operator==(const TrajectoryLog& o) const {
    if (run_id != o.run_id || model != o.model || !(scene == o.scene) || dt != o.dt ||
        n_agents != o.n_agents || frames != o.frames || evacuated_at != o.evacuated_at ||
        xy.size() != o.xy.size()) {
        return false;
    }
    return xy.empty() || std::memcmp(xy.data(), o.xy.data(), xy.size() * sizeof(float)) == 0;
}

}  // namespace crowd
