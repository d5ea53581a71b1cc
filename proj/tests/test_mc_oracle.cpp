#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "pide/mc_oracle.hpp"

using namespace pide;

namespace {

LinearProblem deterministic_problem() {
    LinearProblem p;
    p.model.dim = 1;
    p.model.drift = constant_drift({2.0});
    p.domain = Domain::all_of(1);
    p.horizon = 1.0;
    p.boundary = [](double, std::span<const double> x) { return x[0]; };
    p.region = Box{{0.0}, {1.0}};
    return p;
}

LinearProblem brownian_problem() {
    LinearProblem p;
    p.model.dim = 1;
    p.model.diffusion = constant_diagonal_diffusion({1.0});
    p.domain = Domain::all_of(1);
    p.horizon = 1.0;
    p.boundary = [](double, std::span<const double> x) { return x[0]; };
    p.region = Box{{-1.0}, {1.0}};
    return p;
}

}  // namespace

TEST_CASE("deterministic dynamics give an exact estimate with zero stderr") {
    const LinearProblem p = deterministic_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 10);
    const McEstimate e = mc_estimate(p, 0.0, std::vector<double>{0.5}, grid, 100, 42);
    CHECK(e.estimate == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(e.std_error == 0.0);
    CHECK(e.n_paths == 100);
}

TEST_CASE("martingale point estimate covers the truth") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 20);
    const McEstimate e = mc_estimate(p, 0.0, std::vector<double>{0.7}, grid, 20000, 7);
    CHECK(std::abs(e.estimate - 0.7) < 3.0 * e.std_error);
    CHECK(e.std_error == doctest::Approx(1.0 / std::sqrt(20000.0)).epsilon(0.1));
}

TEST_CASE("estimates are chunk-invariant and seed-reproducible") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    const McEstimate a = mc_estimate(p, 0.0, std::vector<double>{0.1}, grid, 5000, 11, 1);
    const McEstimate b = mc_estimate(p, 0.0, std::vector<double>{0.1}, grid, 5000, 11, 4);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("grids of points use independent per-point seeds") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    CHECK(mc_grid(p, {}, grid, 100, 1).empty());

    const auto estimates = mc_grid(p, {{0.2}, {0.2}, {0.4}}, grid, 2000, 5);
    CHECK(estimates.size() == 3);
    // same point, different per-point stream: estimates differ but agree
    CHECK(estimates[0].estimate != estimates[1].estimate);
    CHECK(std::abs(estimates[0].estimate - estimates[1].estimate) <
          3.0 * std::hypot(estimates[0].std_error, estimates[1].std_error));
}

TEST_CASE("quadrupling the paths roughly halves the standard error") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    const McEstimate small = mc_estimate(p, 0.0, std::vector<double>{0.0}, grid, 4000, 3);
    const McEstimate big = mc_estimate(p, 0.0, std::vector<double>{0.0}, grid, 16000, 3);
    CHECK(big.std_error == doctest::Approx(0.5 * small.std_error).epsilon(0.2));
}

TEST_CASE("cache round-trips estimates bit-exactly and counts hits") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 8);
    const auto dir = std::filesystem::temp_directory_path() / "pide_mc_cache_test";
    std::filesystem::remove_all(dir);
    McCache cache(dir);

    const McEstimate fresh =
        mc_estimate_cached(p, "unit-test", 0.0, std::vector<double>{0.3}, grid, 3000, 9, &cache);
    CHECK(cache.misses() == 1);
    const McEstimate warm =
        mc_estimate_cached(p, "unit-test", 0.0, std::vector<double>{0.3}, grid, 3000, 9, &cache);
    CHECK(cache.hits() == 1);
    CHECK(warm.estimate == fresh.estimate);
    CHECK(warm.std_error == fresh.std_error);
    CHECK(warm.n_paths == fresh.n_paths);

    // different tag or parameters miss
    mc_estimate_cached(p, "other-problem", 0.0, std::vector<double>{0.3}, grid, 3000, 9, &cache);
    CHECK(cache.misses() == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("oracle validates its inputs") {
    const LinearProblem p = brownian_problem();
    const TimeGrid grid = TimeGrid::uniform(0.5, 1.0, 8);
    CHECK_THROWS_AS(mc_estimate(p, 0.0, std::vector<double>{0.0}, grid, 100, 1), std::invalid_argument);
    CHECK_THROWS_AS(
        mc_estimate(p, 0.5, std::vector<double>{0.0}, grid, 1, 1), std::invalid_argument);
}
