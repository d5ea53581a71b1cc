#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pide {

/// Axis-aligned box, lo[i] <= x[i] <= hi[i].
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const { return lo.size(); }
    bool contains(std::span<const double> x) const;
    double width(std::size_t i) const { return hi[i] - lo[i]; }
    Box inflated(std::span<const double> margin) const;
};

using ScalarField = std::function<double(double t, std::span<const double> x)>;
using VectorField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Writes the d x d diffusion matrix sigma(t,x), row-major.
using MatrixField = std::function<void(double t, std::span<const double> x, std::span<double> out)>;
/// Maps an (aggregated) mark vector to a state-space displacement; marks are
/// the per-coordinate Gamma draws of one jump component.
using LoadingFn =
    std::function<void(double t, std::span<const double> x, std::span<const double> marks, std::span<double> out)>;
/// State projection applied after every Euler step (e.g. intensity floors).
using ProjectionFn = std::function<void(double t, std::span<double> x)>;

struct MarkLaw {
    double shape;  // Gamma shape alpha > 0
    double rate;   // Gamma rate beta > 0 (mean shape/rate)

    double mean() const { return shape / rate; }
    double second_moment() const { return shape * (shape + 1.0) / (rate * rate); }
};

/// One finite-activity jump driver. Events arrive at the given intensity;
/// each event carries an independent Gamma mark per entry of `marks`
/// (the common-shock case uses several), mapped into state space by
/// `loading`. Compensated components subtract the mean displacement drift
/// so the jump part is a martingale.
struct JumpComponent {
    double intensity = 0.0;
    /// Optional state-dependent rate, evaluated at the left endpoint of each
    /// step and floored at zero. Overrides `intensity` when set.
    ScalarField intensity_fn;
    std::vector<MarkLaw> marks;
    LoadingFn loading;
    bool compensated = false;

    double rate_at(double t, std::span<const double> x) const;
    void validate() const;
};

/// Drift/diffusion/jump specification of the state SDE.
struct ModelSpec {
    std::size_t dim = 0;
    VectorField drift;        // null means zero drift
    MatrixField diffusion;    // null means zero diffusion
    std::vector<JumpComponent> jumps;
    ProjectionFn post_step;   // optional

    void validate() const;
};

/// Open set D with a bounding box for the sampling region A.
struct Domain {
    std::function<bool(std::span<const double> x)> membership;
    Box bounding_box;
    bool whole_space = false;

    bool contains(std::span<const double> x) const { return whole_space || membership(x); }

    static Domain all_of(std::size_t dim);
};

// Convenience builders used throughout the case studies.
VectorField constant_drift(std::vector<double> b);
MatrixField constant_diagonal_diffusion(std::vector<double> sigma);
MatrixField diagonal_diffusion(std::function<void(double, std::span<const double>, std::span<double>)> diag);

}  // namespace pide
