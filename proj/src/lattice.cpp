#include "crowdsim/lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace crowd::lattice {

MoveProbabilities step_probabilities(Cell walker, Cell exit_target, Blocked blocked,
                                     double drift) {
    if (!(drift >= 0.0 && drift <= 1.0)) {
        throw std::invalid_argument("drift must lie in [0, 1]");
    }
    MoveProbabilities out;
    auto& p = out.p;
    const int n_open = blocked.count_open();
    if (n_open == 0) {
        p[3] = 1.0;
        return out;
    }

    const double e_y = std::abs(walker.row - exit_target.row);
    const double e_x = std::abs(exit_target.col - walker.col);
    double drift_toward = drift;
    double drift_lateral = 0.0;
    if (e_x + e_y > 0.0) {
        drift_toward = drift * e_y / (e_x + e_y);
        drift_lateral = drift * e_x / (e_x + e_y);
    }
    const bool lateral_is_left = exit_target.col < walker.col;

    const double unbiased = (1.0 - drift) / n_open;
    double stay = 0.0;
    auto assign = [&](Move m, bool is_blocked, double drift_share) {
        if (is_blocked) {
            stay += drift_share;
        } else {
            p[static_cast<std::size_t>(m)] = unbiased + drift_share;
        }
    };
    assign(Move::toward_exit, blocked.toward_exit, drift_toward);
    assign(Move::left, blocked.left, lateral_is_left ? drift_lateral : 0.0);
    assign(Move::right, blocked.right, lateral_is_left ? 0.0 : drift_lateral);
    p[3] = stay;
    return out;
}

LatticeGrid::LatticeGrid(const SceneConfig& scene)
    : cell_size_(scene.lattice_cell_size),
      cols_(static_cast<int>(std::floor(scene.room_width / scene.lattice_cell_size + 1e-9))),
      rows_(static_cast<int>(std::floor(scene.room_depth / scene.lattice_cell_size + 1e-9))),
      exit_first_(static_cast<int>(std::lround(scene.exit_left() / scene.lattice_cell_size))),
      exit_count_(static_cast<int>(std::lround(scene.exit_width / scene.lattice_cell_size))) {
    if (cols_ < 1 || rows_ < 1) {
        throw std::invalid_argument("lattice cell size exceeds the room");
    }
    if (exit_count_ < 1 || exit_first_ < 0 || exit_first_ + exit_count_ > cols_) {
        throw std::invalid_argument("exit does not map onto lattice columns");
    }
    occupancy_.assign(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_), 0);
}

std::optional<std::size_t> LatticeGrid::at(Cell c) const {
    if (!in_room(c)) {
        return std::nullopt;
    }
    const auto v = occupancy_[index(c)];
    return v == 0 ? std::nullopt : std::optional<std::size_t>(v - 1);
}

void LatticeGrid::place(std::size_t id, Cell c) {
    if (!in_room(c) || occupancy_[index(c)] != 0) {
        throw std::invalid_argument("cannot place walker on an occupied or outside cell");
    }
    if (walkers_.size() <= id) {
        walkers_.resize(id + 1);
    }
    if (walkers_[id]) {
        throw std::invalid_argument("walker already placed");
    }
    walkers_[id] = c;
    occupancy_[index(c)] = id + 1;
    ++active_;
}

Cell LatticeGrid::exit_target(Cell from) const {
    const int col = std::clamp(from.col, exit_first_, exit_first_ + exit_count_ - 1);
    return {col, -1};
}

Blocked LatticeGrid::blocked(Cell c) const {
    auto closed = [this](Cell n) {
        if (is_exit_cell(n)) {
            return false;
        }
        return !in_room(n) || occupancy_[index(n)] != 0;
    };
    return {closed({c.col, c.row - 1}), closed({c.col - 1, c.row}), closed({c.col + 1, c.row})};
}

Vec2 LatticeGrid::center(Cell c) const {
    return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_};
}

bool LatticeGrid::apply(std::size_t id, Move m) {
    auto& slot = walkers_.at(id);
    if (!slot || m == Move::stay) {
        return false;
    }
    const Cell from = *slot;
    Cell to = from;
    switch (m) {
        case Move::toward_exit: --to.row; break;
        case Move::left: --to.col; break;
        case Move::right: ++to.col; break;
        case Move::stay: break;
    }
    occupancy_[index(from)] = 0;
    if (is_exit_cell(to)) {
        slot.reset();
        --active_;
        return true;
    }
    if (!in_room(to) || occupancy_[index(to)] != 0) {
        occupancy_[index(from)] = id + 1;
        throw std::logic_error("lattice move into a blocked cell");
    }
    occupancy_[index(to)] = id + 1;
    slot = to;
    return false;
}

bool LatticeGrid::consistent() const {
    std::size_t occupied = 0;
    for (std::size_t i = 0; i < occupancy_.size(); ++i) {
        if (occupancy_[i] == 0) {
            continue;
        }
        ++occupied;
        const auto& w = walkers_[occupancy_[i] - 1];
        if (!w || index(*w) != i) {
            return false;
        }
    }
    return occupied == active_;
}

Move sample_move(const MoveProbabilities& probs, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_open = 3;
    for (std::size_t k = 0; k < 4; ++k) {
        if (probs.p[k] <= 0.0) {
            continue;
        }
        last_open = k;
        acc += probs.p[k];
        if (u < acc) {
            return static_cast<Move>(k);
        }
    }
    return static_cast<Move>(last_open);
}

std::vector<std::size_t> lattice_step(LatticeGrid& grid, Rng& rng, const DriftParams& params) {
    std::vector<std::size_t> order;
    order.reserve(grid.active_count());
    for (std::size_t id = 0; id < grid.walker_count(); ++id) {
        if (grid.cell_of(id)) {
            order.push_back(id);
        }
    }
    rng.shuffle(order.begin(), order.end());

    std::vector<std::size_t> left_room;
    for (const auto id : order) {
        const Cell c = *grid.cell_of(id);
        const auto probs =
            step_probabilities(c, grid.exit_target(c), grid.blocked(c), params.drift);
        if (grid.apply(id, sample_move(probs, rng))) {
            left_room.push_back(id);
        }
    }
    return left_room;
}

std::vector<Cell> random_cells(const LatticeGrid& grid, std::size_t n, Rng& rng) {
    const auto total = static_cast<std::size_t>(grid.cols()) * static_cast<std::size_t>(grid.rows());
    if (n > total) {
        throw PlacementError("more walkers than lattice cells");
    }
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<Cell> cells;
    cells.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + rng.below(total - i);
        std::swap(idx[i], idx[j]);
        cells.push_back({static_cast<int>(idx[i] % static_cast<std::size_t>(grid.cols())),
                         static_cast<int>(idx[i] / static_cast<std::size_t>(grid.cols()))});
    }
    return cells;
}

TrajectoryLog run_lattice(const SceneConfig& scene, std::uint64_t seed,
                          const DriftParams& params) {
    scene.validate();
    LatticeGrid grid(scene);
    Rng rng(seed);
    const double dt = lattice_time_step(scene);

    std::vector<AgentState> agents(scene.n_agents);
    const auto cells = random_cells(grid, scene.n_agents, rng);
    for (std::size_t i = 0; i < agents.size(); ++i) {
        agents[i].id = i;
        agents[i].position = grid.center(cells[i]);
        grid.place(i, cells[i]);
    }

    TrajectoryLog log;
    log.model = ModelKind::lattice;
    log.scene = scene;
    log.dt = dt;
    log.n_agents = scene.n_agents;
    log.append_frame(agents, 0.0);

    const auto max_steps = static_cast<std::size_t>(std::floor(scene.max_sim_time / dt + 1e-9));
    for (std::size_t step = 1; step <= max_steps && grid.active_count() > 0; ++step) {
        const double t = static_cast<double>(step) * dt;
        for (const auto id : lattice_step(grid, rng, params)) {
            auto& a = agents[id];
            const Cell last{static_cast<int>(std::floor(a.position.x / grid.cell_size())), 0};
            a.position = grid.center(grid.exit_target(last));
            a.evacuated_at = t;
        }
        for (auto& a : agents) {
            if (const auto c = grid.cell_of(a.id)) {
                a.position = grid.center(*c);
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

}  // namespace crowd::lattice
