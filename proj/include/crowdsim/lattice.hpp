#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "crowdsim/rng.hpp"
#include "crowdsim/scene.hpp"
#include "crowdsim/trajectory.hpp"

// Biased random walk lattice gas (Tajima-Nagatani): square cells, one walker
// per cell, von Neumann moves, and no step directly away from the exit.

namespace crowd::lattice {

enum class Move : std::uint8_t { toward_exit = 0, left = 1, right = 2, stay = 3 };

/// Grid coordinate. Row 0 touches the exit wall; the exit cells sit on the
/// virtual row -1 beyond it. Column 0 is at x = 0.
struct Cell {
    int col = 0;
    int row = 0;
    bool operator==(const Cell&) const = default;
};

struct DriftParams {
    double drift = 0.7;  ///< biased share D in [0, 1]
};

/// Which of the three permissible moves are unavailable (wall or occupied).
struct Blocked {
    bool toward_exit = false;
    bool left = false;
    bool right = false;

    int count_open() const { return !toward_exit + !left + !right; }
};

/// Probability of each move, indexed by Move.
struct MoveProbabilities {
    std::array<double, 4> p{};

    double operator[](Move m) const { return p[static_cast<std::size_t>(m)]; }
    double sum() const { return p[0] + p[1] + p[2] + p[3]; }
};

/// Each open direction receives (1 - D)/n with n the number of open
/// directions, plus its drift share D * e_y/(e_x + e_y) toward the exit or
/// D * e_x/(e_x + e_y) laterally toward the target column. Drift aimed at a
/// blocked direction stays put. Throws std::invalid_argument if D is outside
/// [0, 1].
MoveProbabilities step_probabilities(Cell walker, Cell exit_target, Blocked blocked,
                                     double drift);

class LatticeGrid {
public:
    explicit LatticeGrid(const SceneConfig& scene);

    double cell_size() const { return cell_size_; }
    int cols() const { return cols_; }
    int rows() const { return rows_; }
    int exit_first_col() const { return exit_first_; }
    int exit_col_count() const { return exit_count_; }

    bool in_room(Cell c) const { return c.col >= 0 && c.col < cols_ && c.row >= 0 && c.row < rows_; }
    bool is_exit_cell(Cell c) const {
        return c.row == -1 && c.col >= exit_first_ && c.col < exit_first_ + exit_count_;
    }

    /// Walker id occupying `c`, if any.
    std::optional<std::size_t> at(Cell c) const;

    /// Puts walker `id` on the empty in-room cell `c`.
    void place(std::size_t id, Cell c);

    /// Current cell of walker `id`, or nullopt once it has left.
    std::optional<Cell> cell_of(std::size_t id) const { return walkers_.at(id); }

    std::size_t walker_count() const { return walkers_.size(); }
    std::size_t active_count() const { return active_; }

    /// Nearest exit cell (row -1) to `from`, column-wise.
    Cell exit_target(Cell from) const;

    Blocked blocked(Cell c) const;

    /// Cell center in room coordinates. Exit cells map below y = 0.
    Vec2 center(Cell c) const;

    /// Applies `m` for walker `id`; moving onto an exit cell removes the walker.
    /// Returns true when the walker left the room.
    bool apply(std::size_t id, Move m);

    /// No cell holds two walkers and every walker's cell points back to it.
    bool consistent() const;

private:
    std::size_t index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(c.col);
    }

    double cell_size_;
    int cols_;
    int rows_;
    int exit_first_;
    int exit_count_;
    std::vector<std::size_t> occupancy_;  // walker id + 1, 0 when empty
    std::vector<std::optional<Cell>> walkers_;
    std::size_t active_ = 0;
};

/// Seconds per lattice step: one cell at the preferred speed.
inline double lattice_time_step(const SceneConfig& scene) {
    return scene.lattice_cell_size / scene.preferred_speed;
}

/// Samples one move from `probs`, never returning a zero-probability move.
Move sample_move(const MoveProbabilities& probs, Rng& rng);

/// One random-sequential sweep: walkers are visited in shuffled order and each
/// move is applied immediately. Returns the ids that left, in the order they left.
std::vector<std::size_t> lattice_step(LatticeGrid& grid, Rng& rng, const DriftParams& params);

/// `n` distinct uniformly chosen cells.
std::vector<Cell> random_cells(const LatticeGrid& grid, std::size_t n, Rng& rng);

/// Full run on the scene's room. Positions are logged at cell centers.
TrajectoryLog run_lattice(const SceneConfig& scene, std::uint64_t seed,
                          const DriftParams& params = {});

}  // namespace crowd::lattice
