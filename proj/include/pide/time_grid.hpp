#pragma once

#include <cstddef>
#include <vector>

namespace pide {

/// Strictly increasing time points t_0 < t_1 < ... < t_M.
struct TimeGrid {
    std::vector<double> points;

    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> pts);

    static TimeGrid uniform(double t0, double t1, std::size_t steps);

    double start() const { return points.front(); }
    double end() const { return points.back(); }
    std::size_t steps() const { return points.size() - 1; }

    /// Step length Delta t_m = t_m - t_{m-1}, m in [1, steps()].
    double dt(std::size_t m) const { return points[m] - points[m - 1]; }

    /// Index of the grid point equal to t (within 1e-12 absolute), or npos.
    std::size_t index_of(double t) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

}  // namespace pide
