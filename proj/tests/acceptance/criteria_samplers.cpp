// Criterion 2: sampler statistics at 1e5 draws plus the Gamma convolution
// Kolmogorov-Smirnov check.

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acceptance.hpp"
#include "pide/rng.hpp"
#include "pide/simulate.hpp"

namespace acceptance {

using namespace pide;

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(v.size() - 1);
    return m;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

CriterionResult criterion_sampler_statistics() {
    const std::size_t n = 100000;
    std::ostringstream detail;
    bool pass = true;

    {  // Gamma(3, 1): mean 3 (sd sqrt 3), variance 3 (sd of s^2 from mu4 = 45)
        RngEngine rng = make_stream(0x5A11ull, 2);
        const Moments m = moments(sample_gamma(3.0, 1.0, n, rng));
        const double se_mean = std::sqrt(3.0 / n), se_var = std::sqrt(36.0 / n);
        pass = pass && std::abs(m.mean - 3.0) < 3.0 * se_mean && std::abs(m.variance - 3.0) < 3.0 * se_var;
        detail << "gamma(3,1) mean " << m.mean << " var " << m.variance << "; ";
    }

    {  // compound Poisson over [0,1]: intensity 3, Gamma(2,1) marks
        ModelSpec model;
        model.dim = 1;
        JumpComponent j;
        j.intensity = 3.0;
        j.marks = {MarkLaw{2.0, 1.0}};
        j.loading = [](double, std::span<const double>, std::span<const double> marks, std::span<double> out) {
            out[0] = marks[0];
        };
        model.jumps = {j};
        PathBatch batch = simulate_paths(model, Domain::all_of(1), point_sampler({0.0}),
                                         TimeGrid::uniform(0.0, 1.0, 20), n, 0x5A12ull);
        std::vector<double> sums(n);
        for (std::size_t k = 0; k < n; ++k) sums[k] = batch.state(k, 20)[0];
        const Moments m = moments(sums);
        // mean 6, variance 18; sd of the sample variance from mu4 = 360 + 3*324
        const double se_mean = std::sqrt(18.0 / n);
        const double se_var = std::sqrt((360.0 + 2.0 * 18.0 * 18.0) / static_cast<double>(n));
        pass = pass && std::abs(m.mean - 6.0) < 3.0 * se_mean && std::abs(m.variance - 18.0) < 3.0 * se_var;
        detail << "compound-poisson mean " << m.mean << " var " << m.variance << "; ";
    }

    {  // convolution closure: 4 x Gamma(0.5, 2) against Gamma(2, 2)
        RngEngine rng = make_stream(0x5A13ull, 3);
        const std::size_t m = 10000;
        std::vector<double> sums(m);
        for (auto& s : sums) {
            s = 0.0;
            for (int i = 0; i < 4; ++i) s += sample_gamma_one(0.5, 2.0, rng);
        }
        const std::vector<double> direct = sample_gamma(2.0, 2.0, m, rng);
        const double d = ks_statistic(sums, direct);
        const double critical = 1.628 * std::sqrt(2.0 / static_cast<double>(m));
        pass = pass && d < critical;
        detail << "convolution KS " << d << " < " << critical << " (1% level)";
    }

    return {2, pass, "sampler statistics: " + detail.str()};
}

}  // namespace acceptance
