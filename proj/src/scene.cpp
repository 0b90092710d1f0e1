#include "crowdsim/scene.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "crowdsim/rng.hpp"

namespace crowd {

std::string_view model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::lattice: return "lattice";
        case ModelKind::social_force: return "social-force";
        case ModelKind::orca: return "orca";
    }
    return "unknown";
}

ModelKind parse_model(std::string_view name) {
    for (const auto kind : kAllModels) {
        if (model_name(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown model '" + std::string(name) +
                                "' (expected lattice, social-force or orca)");
}

void SceneConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw std::invalid_argument(std::string("invalid scene: ") + what);
        }
    };
    require(room_width > 0.0 && room_depth > 0.0, "room dimensions must be positive");
    require(exit_width > 0.0 && exit_width < room_width, "need 0 < exit_width < room_width");
    require(exit_left() >= 0.0 && exit_right() <= room_width, "exit must lie on the exit wall");
    require(agent_radius > 0.0 && 2.0 * agent_radius < exit_width,
            "need 0 < 2*agent_radius < exit_width");
    require(agent_mass > 0.0, "agent_mass must be positive");
    require(preferred_speed > 0.0 && preferred_speed <= max_speed,
            "need 0 < preferred_speed <= max_speed");
    require(time_step > 0.0, "time_step must be positive");
    require(max_sim_time > 0.0, "max_sim_time must be positive");
    require(lattice_cell_size > 0.0 && lattice_cell_size <= exit_width,
            "need 0 < lattice_cell_size <= exit_width");
    require(static_cast<double>(n_agents) * std::numbers::pi * agent_radius * agent_radius <
                area(),
            "agents do not fit in the room");
}

std::vector<Segment> SceneConfig::walls() const {
    const Vec2 bl{0.0, 0.0};
    const Vec2 br{room_width, 0.0};
    const Vec2 tl{0.0, room_depth};
    const Vec2 tr{room_width, room_depth};
    return {
        {bl, {exit_left(), 0.0}},
        {{exit_right(), 0.0}, br},
        {br, tr},
        {tr, tl},
        {tl, bl},
    };
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (res.ec != std::errc{} || res.ptr != end) {
        throw std::invalid_argument("bad value for '" + key + "': '" + value + "'");
    }
    return out;
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    return kv;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string to_text(const SceneConfig& c) {
    std::ostringstream out;
    out << "room_width = " << format_double(c.room_width) << '\n'
        << "room_depth = " << format_double(c.room_depth) << '\n'
        << "exit_width = " << format_double(c.exit_width) << '\n'
        << "exit_center_offset = " << format_double(c.exit_center_offset) << '\n'
        << "agent_radius = " << format_double(c.agent_radius) << '\n'
        << "agent_mass = " << format_double(c.agent_mass) << '\n'
        << "preferred_speed = " << format_double(c.preferred_speed) << '\n'
        << "max_speed = " << format_double(c.max_speed) << '\n'
        << "n_agents = " << c.n_agents << '\n'
        << "time_step = " << format_double(c.time_step) << '\n'
        << "max_sim_time = " << format_double(c.max_sim_time) << '\n'
        << "rng_seed = " << c.rng_seed << '\n'
        << "lattice_cell_size = " << format_double(c.lattice_cell_size) << '\n';
    return out.str();
}

void apply_scene_keys(SceneConfig& c, KeyValues& kv) {
    auto take_double = [&kv](const char* key, double& field) {
        if (const auto it = kv.find(key); it != kv.end()) {
            field = parse_number<double>(it->first, it->second);
            kv.erase(it);
        }
    };
    auto take_u64 = [&kv](const char* key, auto& field) {
        if (const auto it = kv.find(key); it != kv.end()) {
            field = parse_number<std::remove_reference_t<decltype(field)>>(it->first,
                                                                           it->second);
            kv.erase(it);
        }
    };
    take_double("room_width", c.room_width);
    take_double("room_depth", c.room_depth);
    take_double("exit_width", c.exit_width);
    take_double("exit_center_offset", c.exit_center_offset);
    take_double("agent_radius", c.agent_radius);
    take_double("agent_mass", c.agent_mass);
    take_double("preferred_speed", c.preferred_speed);
    take_double("max_speed", c.max_speed);
    take_u64("n_agents", c.n_agents);
    take_double("time_step", c.time_step);
    take_double("max_sim_time", c.max_sim_time);
    take_u64("rng_seed", c.rng_seed);
    take_double("lattice_cell_size", c.lattice_cell_size);
}

SceneConfig scene_from_text(std::string_view text) {
    auto kv = parse_key_values(text);
    SceneConfig config;
    apply_scene_keys(config, kv);
    if (!kv.empty()) {
        throw std::invalid_argument("unknown scene key '" + kv.begin()->first + "'");
    }
    return config;
}

SceneConfig load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scene file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return scene_from_text(buf.str());
}

void save_scene(const SceneConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write scene file " + path.string());
    }
    out << to_text(config);
}

std::uint64_t config_hash(const SceneConfig& config) { return fnv1a(to_text(config)); }

std::vector<AgentState> init_scene(const SceneConfig& config, std::uint64_t seed) {
    config.validate();
    const double r = config.agent_radius;
    const double min_dist_sq = 4.0 * r * r;
    Rng rng(seed);

    std::vector<AgentState> agents;
    agents.reserve(config.n_agents);
    std::size_t attempts = 0;
    while (agents.size() < config.n_agents) {
        if (++attempts > kMaxPlacementAttempts) {
            throw PlacementError("placed only " + std::to_string(agents.size()) + " of " +
                                 std::to_string(config.n_agents) + " agents after " +
                                 std::to_string(kMaxPlacementAttempts) +
                                 " attempts; density too high");
        }
        const Vec2 p{rng.uniform(r, config.room_width - r), rng.uniform(r, config.room_depth - r)};
        bool clear = true;
        for (const auto& a : agents) {
            if (abs_sq(a.position - p) < min_dist_sq) {
                clear = false;
                break;
            }
        }
        if (clear) {
            agents.push_back({agents.size(), p, {}, std::nullopt});
        }
    }
    return agents;
}

bool beyond_exit(Vec2 p, const SceneConfig& scene) {
    return p.y < 0.0 && p.x >= scene.exit_left() && p.x <= scene.exit_right();
}

bool is_evacuated(const AgentState& agent, const SceneConfig& scene) {
    return agent.evacuated_at.has_value() || beyond_exit(agent.position, scene);
}

}  // namespace crowd
