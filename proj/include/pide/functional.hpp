#pragma once

#include <vector>

#include "pide/simulate.hpp"

namespace pide {

/// Discounted path functional behind the probabilistic solution formula:
///   Y = sum_{m : t_m < T ∧ τ} e^{-R_m} c(t_m, X_m) Δt_{m+1} + e^{-R_stop} g(t_stop, X_stop)
/// with R the left-endpoint Riemann sum of the discount rate r along the
/// path and t_stop = T ∧ τ on the grid. For exited paths g is evaluated at
/// the first grid point outside the domain and the state there.
/// Null r or c mean identically zero. A NaN value raises a SimulationError
/// identifying the path.
std::vector<double> pathwise_functional(const PathBatch& batch, const ScalarField& discount,
                                        const ScalarField& running, const ScalarField& boundary);

}  // namespace pide
