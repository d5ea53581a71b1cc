#include "pide/model.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace pide {

bool Box::contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
}

Box Box::inflated(std::span<const double> margin) const {
    Box out = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        out.lo[i] -= margin[i];
        out.hi[i] += margin[i];
    }
    return out;
}

double JumpComponent::rate_at(double t, std::span<const double> x) const {
    const double lam = intensity_fn ? intensity_fn(t, x) : intensity;
    return std::max(0.0, lam);
}

void JumpComponent::validate() const {
    if (!intensity_fn && intensity < 0.0)
        throw std::invalid_argument("JumpComponent: intensity must be >= 0");
    if (marks.empty()) throw std::invalid_argument("JumpComponent: needs at least one mark law");
    for (const auto& m : marks)
        if (!(m.shape > 0.0) || !(m.rate > 0.0))
            throw std::invalid_argument("JumpComponent: mark law needs shape > 0 and rate > 0");
    if (!loading) throw std::invalid_argument("JumpComponent: loading not set");
}

void ModelSpec::validate() const {
    if (dim == 0) throw std::invalid_argument("ModelSpec: dim must be >= 1");
    for (const auto& j : jumps) j.validate();
}

Domain Domain::all_of(std::size_t dim) {
    Domain d;
    d.whole_space = true;
    d.membership = [](std::span<const double>) { return true; };
    d.bounding_box = Box{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    return d;
}

VectorField constant_drift(std::vector<double> b) {
    return [b = std::move(b)](double, std::span<const double>, std::span<double> out) {
        std::copy(b.begin(), b.end(), out.begin());
    };
}

MatrixField constant_diagonal_diffusion(std::vector<double> sigma) {
    return [sigma = std::move(sigma)](double, std::span<const double>, std::span<double> out) {
        const std::size_t d = sigma.size();
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) out[i * d + i] = sigma[i];
    };
}

MatrixField diagonal_diffusion(std::function<void(double, std::span<const double>, std::span<double>)> diag) {
    return [diag = std::move(diag)](double t, std::span<const double> x, std::span<double> out) {
        const std::size_t d = x.size();
        std::array<double, 16> tmp{};  // stack scratch keeps the callback re-entrant
        if (d > tmp.size()) throw std::invalid_argument("diagonal_diffusion: dim > 16 unsupported");
        diag(t, x, std::span<double>(tmp.data(), d));
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i) out[i * d + i] = tmp[i];
    };
}

}  // namespace pide
