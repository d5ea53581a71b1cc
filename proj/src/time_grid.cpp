#include "pide/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace pide {

TimeGrid::TimeGrid(std::vector<double> pts) : points(std::move(pts)) {
    if (points.size() < 2) throw std::invalid_argument("TimeGrid: need at least two points");
    for (std::size_t m = 1; m < points.size(); ++m)
        if (!(points[m] > points[m - 1]))
            throw std::invalid_argument("TimeGrid: points must be strictly increasing");
}

TimeGrid TimeGrid::uniform(double t0, double t1, std::size_t steps) {
    if (steps == 0 || !(t1 > t0)) throw std::invalid_argument("TimeGrid::uniform: need t1 > t0 and steps >= 1");
    std::vector<double> pts(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m)
        pts[m] = t0 + (t1 - t0) * static_cast<double>(m) / static_cast<double>(steps);
    pts.back() = t1;
    return TimeGrid(std::move(pts));
}

std::size_t TimeGrid::index_of(double t) const {
    for (std::size_t m = 0; m < points.size(); ++m)
        if (std::abs(points[m] - t) <= 1e-12) return m;
    return npos;
}

}  // namespace pide
