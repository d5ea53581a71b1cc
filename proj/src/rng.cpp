#include "pide/rng.hpp"

#include <stdexcept>
#include <string>

namespace pide {

std::vector<double> sample_gamma(double shape, double rate, std::size_t count, RngEngine& rng) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("sample_gamma: requires shape > 0 and rate > 0, got shape=" +
                                    std::to_string(shape) + " rate=" + std::to_string(rate));
    std::gamma_distribution<double> dist(shape, 1.0 / rate);
    std::vector<double> out(count);
    for (auto& v : out) v = dist(rng);
    return out;
}

long sample_poisson_count(double intensity, double dt, RngEngine& rng) {
    if (intensity < 0.0) throw std::invalid_argument("sample_poisson_count: intensity must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("sample_poisson_count: dt must be > 0");
    const double mean = intensity * dt;
    if (mean <= 0.0) return 0;
    std::poisson_distribution<long> dist(mean);
    return dist(rng);
}

}  // namespace pide
