#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "crowdsim/divergence.hpp"
#include "crowdsim/observables.hpp"
#include "crowdsim/trajectory.hpp"

namespace crowd::io {

/// Trajectory file layout, all fields little-endian:
///
///   char[8]  magic "CRWDTRJ1"
///   u32      format version (1)
///   u32      model (0 lattice, 1 social-force, 2 orca)
///   u64      run id
///   u64      agent count N
///   u64      frame count F
///   f64      time step
///   u32      scene text length L, then L bytes of scene text
///   f64[N]   evacuation time per agent, NaN if never evacuated
///   f32[F*N*2]  (x, y) per agent per frame, NaN for absent agents
inline constexpr std::string_view kTrajectoryMagic = "CRWDTRJ1";
inline constexpr std::uint32_t kTrajectoryVersion = 1;

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_trajectory(const TrajectoryLog& log, std::ostream& out);
TrajectoryLog read_trajectory(std::istream& in);

void save_trajectory(const TrajectoryLog& log, const std::filesystem::path& path);
TrajectoryLog load_trajectory(const std::filesystem::path& path);

/// Comma-separated export: a `#` header with run metadata and per-agent
/// evacuation times, then one `frame,agent,x,y` row per present agent. Floats
/// are written with 9 significant digits, enough to round-trip a float32.
void export_text(const TrajectoryLog& log, std::ostream& out);

/// Per-run record stored next to each trajectory file.
struct RunManifest {
    ModelKind model = ModelKind::social_force;
    std::size_t n_agents = 0;
    std::size_t run_index = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    std::string trajectory;  ///< file name relative to the manifest
    std::size_t frames = 0;
    std::size_t evacuated = 0;
    std::size_t unevacuated = 0;

    bool operator==(const RunManifest&) const = default;
};

std::string to_text(const RunManifest& m);
RunManifest manifest_from_text(std::string_view text);

/// Writes through a sibling temporary file and renames it into place, so a
/// path either holds complete content or does not exist.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Header line for histogram rows, with a leading zone column if `zoned`.
void write_histogram_header(std::ostream& out, bool zoned = false);

/// Rows `[zone,]observable,model,N,bin_left,bin_right,mass`, one per bin.
void write_histogram_rows(std::ostream& out, std::string_view observable, std::string_view model,
                          std::size_t n_agents, const stats::Histogram& h,
                          std::optional<std::size_t> zone = std::nullopt);

/// 100 rows of 100 comma-separated values; row 0 is the exit-wall side (y
/// nearest 0) and column 0 is x nearest 0.
void write_density_grid(std::ostream& out, std::span<const double> cells);

/// Labeled square table: header row of labels, then `label,v0,v1,...`.
void write_distance_matrix(std::ostream& out, const stats::DistanceMatrix& d);

/// Shortest round-trip decimal form.
std::string fmt(double v);

}  // namespace crowd::io
