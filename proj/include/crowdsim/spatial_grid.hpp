#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "crowdsim/vec2.hpp"

namespace crowd {

/// Uniform bucket grid over a rectangle, rebuilt from scratch each step.
///
/// Buckets are filled by a counting sort over point indices, so every bucket
/// lists its points in ascending index order and queries visit candidates in a
/// fixed order independent of history. Points outside the rectangle are
/// clamped into the border cells.
class SpatialGrid {
public:
    SpatialGrid(double width, double height, double cell_size)
        : cell_size_(cell_size),
          cols_(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(width / cell_size)))),
          rows_(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(height / cell_size)))),
          start_(cols_ * rows_ + 1, 0) {}

    /// Indexes `points[i]` for every i with `active[i]` true.
    template <class IsActive>
    void rebuild(std::span<const Vec2> points, IsActive&& active) {
        std::fill(start_.begin(), start_.end(), 0);
        cell_of_.assign(points.size(), kNone);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (active(i)) {
                cell_of_[i] = cell_index(points[i]);
                ++start_[cell_of_[i] + 1];
            }
        }
        for (std::size_t c = 1; c < start_.size(); ++c) {
            start_[c] += start_[c - 1];
        }
        entries_.resize(start_.back());
        fill_.assign(start_.begin(), start_.end() - 1);
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (cell_of_[i] != kNone) {
                entries_[fill_[cell_of_[i]]++] = i;
            }
        }
    }

    /// Calls `fn(j)` for every indexed point in cells overlapping the square of
    /// half-width `radius` around `p`. Callers apply the exact distance test.
    template <class Fn>
    void for_each_candidate(Vec2 p, double radius, Fn&& fn) const {
        const auto [c0, r0] = coords(p - Vec2{radius, radius});
        const auto [c1, r1] = coords(p + Vec2{radius, radius});
        for (std::size_t r = r0; r <= r1; ++r) {
            for (std::size_t c = c0; c <= c1; ++c) {
                const std::size_t cell = r * cols_ + c;
                for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) {
                    fn(entries_[k]);
                }
            }
        }
    }

    std::size_t cols() const { return cols_; }
    std::size_t rows() const { return rows_; }

private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    std::pair<std::size_t, std::size_t> coords(Vec2 p) const {
        auto clampi = [](double v, std::size_t n) {
            if (!(v > 0.0)) {
                return std::size_t{0};
            }
            const auto i = static_cast<std::size_t>(v);
            return std::min(i, n - 1);
        };
        return {clampi(p.x / cell_size_, cols_), clampi(p.y / cell_size_, rows_)};
    }

    std::size_t cell_index(Vec2 p) const {
        const auto [c, r] = coords(p);
        return r * cols_ + c;
    }

    double cell_size_;
    std::size_t cols_;
    std::size_t rows_;
    std::vector<std::size_t> start_;
    std::vector<std::size_t> fill_;
    std::vector<std::size_t> cell_of_;
    std::vector<std::size_t> entries_;
};

}  // namespace crowd
