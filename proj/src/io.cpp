#include "crowdsim/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace crowd::io {

static_assert(std::endian::native == std::endian::little,
              "trajectory files are written in host byte order, which must be little-endian");

namespace {

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof value)) {
        throw FormatError("truncated trajectory file");
    }
    return value;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

template <class T>
T number(const KeyValues& kv, std::string_view key, int base = 10) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        throw FormatError("manifest is missing '" + std::string(key) + "'");
    }
    T out{};
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out, base);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw FormatError("manifest field '" + std::string(key) + "' is not a number: " + s);
    }
    return out;
}

}  // namespace

std::string fmt(double v) { return format_double(v); }

void write_trajectory(const TrajectoryLog& log, std::ostream& out) {
    const std::string scene = crowd::to_text(log.scene);
    out.write(kTrajectoryMagic.data(), static_cast<std::streamsize>(kTrajectoryMagic.size()));
    put<std::uint32_t>(out, kTrajectoryVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(log.model));
    put<std::uint64_t>(out, log.run_id);
    put<std::uint64_t>(out, log.n_agents);
    put<std::uint64_t>(out, log.frames);
    put<double>(out, log.dt);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(scene.size()));
    out.write(scene.data(), static_cast<std::streamsize>(scene.size()));
    for (const auto& t : log.evacuated_at) {
        put<double>(out, t.value_or(std::numeric_limits<double>::quiet_NaN()));
    }
    out.write(reinterpret_cast<const char*>(log.xy.data()),
              static_cast<std::streamsize>(log.xy.size() * sizeof(float)));
    if (!out) {
        throw std::runtime_error("failed to write trajectory");
    }
}

TrajectoryLog read_trajectory(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) ||
        std::string_view(magic, sizeof magic) != kTrajectoryMagic) {
        throw FormatError("not a trajectory file (bad magic)");
    }
    if (const auto version = get<std::uint32_t>(in); version != kTrajectoryVersion) {
        throw FormatError("unsupported trajectory version " + std::to_string(version));
    }
    TrajectoryLog log;
    const auto model = get<std::uint32_t>(in);
    if (model > static_cast<std::uint32_t>(ModelKind::orca)) {
        throw FormatError("unknown model code " + std::to_string(model));
    }
    log.model = static_cast<ModelKind>(model);
    log.run_id = get<std::uint64_t>(in);
    log.n_agents = get<std::uint64_t>(in);
    log.frames = get<std::uint64_t>(in);
    log.dt = get<double>(in);
    std::string scene(get<std::uint32_t>(in), '\0');
    if (!in.read(scene.data(), static_cast<std::streamsize>(scene.size()))) {
        throw FormatError("truncated scene text");
    }
    log.scene = scene_from_text(scene);
    if (log.scene.n_agents != log.n_agents) {
        throw FormatError("agent count disagrees with embedded scene");
    }
    log.evacuated_at.reserve(log.n_agents);
    for (std::size_t a = 0; a < log.n_agents; ++a) {
        const double t = get<double>(in);
        log.evacuated_at.push_back(std::isnan(t) ? std::nullopt : std::optional<double>(t));
    }
    log.xy.resize(2 * log.frames * log.n_agents);
    if (!in.read(reinterpret_cast<char*>(log.xy.data()),
                 static_cast<std::streamsize>(log.xy.size() * sizeof(float)))) {
        throw FormatError("truncated position frames");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after position frames");
    }
    return log;
}

void save_trajectory(const TrajectoryLog& log, const std::filesystem::path& path) {
    std::ostringstream buf(std::ios::binary);
    write_trajectory(log, buf);
    write_file_atomic(path, buf.str());
}

TrajectoryLog load_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    try {
        return read_trajectory(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void export_text(const TrajectoryLog& log, std::ostream& out) {
    char buf[64];
    auto g9 = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    out << "# run_id = " << log.run_id << '\n'
        << "# model = " << model_name(log.model) << '\n'
        << "# n_agents = " << log.n_agents << '\n'
        << "# frames = " << log.frames << '\n'
        << "# dt = " << fmt(log.dt) << '\n';
    for (std::size_t a = 0; a < log.n_agents; ++a) {
        out << "# evacuated_at " << a << " = "
            << (log.evacuated_at[a] ? fmt(*log.evacuated_at[a]) : std::string("none")) << '\n';
    }
    out << "frame,agent,x,y\n";
    for (std::size_t f = 0; f < log.frames; ++f) {
        for (std::size_t a = 0; a < log.n_agents; ++a) {
            if (log.present(f, a)) {
                const std::size_t i = 2 * (f * log.n_agents + a);
                out << f << ',' << a << ',' << g9(log.xy[i]) << ',' << g9(log.xy[i + 1]) << '\n';
            }
        }
    }
}

std::string to_text(const RunManifest& m) {
    std::ostringstream out;
    out << "model = " << model_name(m.model) << '\n'
        << "n_agents = " << m.n_agents << '\n'
        << "run_index = " << m.run_index << '\n'
        << "base_seed = " << m.base_seed << '\n'
        << "seed = " << m.seed << '\n'
        << "config_hash = " << hex(m.config_hash) << '\n'
        << "trajectory = " << m.trajectory << '\n'
        << "frames = " << m.frames << '\n'
        << "evacuated = " << m.evacuated << '\n'
        << "unevacuated = " << m.unevacuated << '\n';
    return out.str();
}

RunManifest manifest_from_text(std::string_view text) {
    const KeyValues kv = parse_key_values(text);
    RunManifest m;
    const auto model = kv.find("model");
    if (model == kv.end()) {
        throw FormatError("manifest is missing 'model'");
    }
    m.model = parse_model(model->second);
    m.n_agents = number<std::size_t>(kv, "n_agents");
    m.run_index = number<std::size_t>(kv, "run_index");
    m.base_seed = number<std::uint64_t>(kv, "base_seed");
    m.seed = number<std::uint64_t>(kv, "seed");
    m.config_hash = number<std::uint64_t>(kv, "config_hash", 16);
    const auto traj = kv.find("trajectory");
    if (traj == kv.end()) {
        throw FormatError("manifest is missing 'trajectory'");
    }
    m.trajectory = traj->second;
    m.frames = number<std::size_t>(kv, "frames");
    m.evacuated = number<std::size_t>(kv, "evacuated");
    m.unevacuated = number<std::size_t>(kv, "unevacuated");
    return m;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out.flush()) {
            throw std::runtime_error("failed to write " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_histogram_header(std::ostream& out, bool zoned) {
    out << (zoned ? "zone," : "") << "observable,model,N,bin_left,bin_right,mass\n";
}

void write_histogram_rows(std::ostream& out, std::string_view observable, std::string_view model,
                          std::size_t n_agents, const stats::Histogram& h,
                          std::optional<std::size_t> zone) {
    for (std::size_t b = 0; b < h.mass.size(); ++b) {
        if (zone) {
            out << *zone << ',';
        }
        out << observable << ',' << model << ',' << n_agents << ',' << fmt(h.edges[b]) << ','
            << fmt(h.edges[b + 1]) << ',' << fmt(h.mass[b]) << '\n';
    }
}

void write_density_grid(std::ostream& out, std::span<const double> cells) {
    const std::size_t n = obs::kDensityCells;
    if (cells.size() != n * n) {
        throw std::invalid_argument("density grid must have 100 x 100 cells");
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            out << (c ? "," : "") << fmt(cells[r * n + c]);
        }
        out << '\n';
    }
}

void write_distance_matrix(std::ostream& out, const stats::DistanceMatrix& d) {
    out << d.observable;
    for (const auto& l : d.labels) {
        out << ',' << l;
    }
    out << '\n';
    for (std::size_t i = 0; i < d.labels.size(); ++i) {
        out << d.labels[i];
        for (std::size_t j = 0; j < d.labels.size(); ++j) {
            out << ',' << fmt(d.values(i, j));
        }
        out << '\n';
    }
}

}  // namespace crowd::io
