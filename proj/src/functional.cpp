#include "pide/functional.hpp"

#include <cmath>

namespace pide {

std::vector<double> pathwise_functional(const PathBatch& batch, const ScalarField& discount,
                                        const ScalarField& running, const ScalarField& boundary) {
    const TimeGrid& grid = batch.grid();
    std::vector<double> y(batch.paths());

    for (std::size_t k = 0; k < batch.paths(); ++k) {
        const std::size_t stop = batch.stop_index(k);
        double riemann_r = 0.0;  // integral of r up to the current grid point
        double acc = 0.0;
        for (std::size_t m = 0; m < stop; ++m) {
            const double t = grid.points[m];
            auto x = batch.state(k, m);
            if (running) acc += std::exp(-riemann_r) * running(t, x) * grid.dt(m + 1);
            if (discount) riemann_r += discount(t, x) * grid.dt(m + 1);
        }
        acc += std::exp(-riemann_r) * boundary(grid.points[stop], batch.state(k, stop));
        if (std::isnan(acc)) throw SimulationError(k, stop, "NaN pathwise functional");
        y[k] = acc;
    }
    return y;
}

}  // namespace pide
