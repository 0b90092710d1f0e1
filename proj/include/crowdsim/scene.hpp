#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsim/vec2.hpp"

namespace crowd {

enum class ModelKind : std::uint32_t { lattice = 0, social_force = 1, orca = 2 };

inline constexpr ModelKind kAllModels[] = {ModelKind::lattice, ModelKind::social_force,
                                           ModelKind::orca};

std::string_view model_name(ModelKind kind);

/// Accepts "lattice", "social-force", "orca". Throws std::invalid_argument otherwise.
ModelKind parse_model(std::string_view name);

/// Room, exit, agent and clock settings shared by every engine.
///
/// Frame: the exit wall lies on y = 0 and the room occupies
/// [0, room_width] x [0, room_depth]. Moving toward the exit means moving in -y.
struct SceneConfig {
    double room_width = 30.0;
    double room_depth = 25.0;
    double exit_width = 1.2;
    double exit_center_offset = 15.0;  ///< x of the exit center along the exit wall
    double agent_radius = 0.15;
    double agent_mass = 60.0;
    double preferred_speed = 1.3;
    double max_speed = 2.6;
    std::size_t n_agents = 0;
    double time_step = 0.05;
    double max_sim_time = 1000.0;
    std::uint64_t rng_seed = 0;
    double lattice_cell_size = 0.30;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;

    double exit_left() const { return exit_center_offset - 0.5 * exit_width; }
    double exit_right() const { return exit_center_offset + 0.5 * exit_width; }
    Vec2 exit_center() const { return {exit_center_offset, 0.0}; }
    Segment exit_segment() const { return {{exit_left(), 0.0}, {exit_right(), 0.0}}; }
    double area() const { return room_width * room_depth; }

    /// The four walls as segments, the exit wall split in two around the opening.
    std::vector<Segment> walls() const;

    Vec2 nearest_exit_point(Vec2 p) const { return closest_point(exit_segment(), p); }

    bool operator==(const SceneConfig&) const = default;
};

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Parsed `key = value` text. Blank lines and `#` comments are ignored.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text);

/// Canonical text form, one `key = value` per line in fixed order. Doubles are
/// written with enough digits to round-trip.
std::string to_text(const SceneConfig& config);

/// Applies recognized keys from `kv` onto `config`, erasing them from `kv`.
/// Unrecognized keys are left in place for the caller.
void apply_scene_keys(SceneConfig& config, KeyValues& kv);

/// Parses a scene file. Unknown keys are an error.
SceneConfig scene_from_text(std::string_view text);

SceneConfig load_scene(const std::filesystem::path& path);
void save_scene(const SceneConfig& config, const std::filesystem::path& path);

std::uint64_t config_hash(const SceneConfig& config);

struct AgentState {
    std::size_t id = 0;
    Vec2 position;
    Vec2 velocity;
    std::optional<double> evacuated_at;
};

/// Thrown when rejection sampling cannot place every agent.
class PlacementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maximum rejection-sampling draws before init_scene gives up.
inline constexpr std::size_t kMaxPlacementAttempts = 1'000'000;

/// Uniform random non-overlapping placement of `config.n_agents` agents, none
/// touching a wall. Deterministic in `seed`.
std::vector<AgentState> init_scene(const SceneConfig& config, std::uint64_t seed);

/// True once the center has crossed the exit plane inside the exit span, or
/// the agent already carries an evacuation time.
bool is_evacuated(const AgentState& agent, const SceneConfig& scene);

/// Whether a position lies beyond y = 0 within the exit span.
bool beyond_exit(Vec2 p, const SceneConfig& scene);

}  // namespace crowd
