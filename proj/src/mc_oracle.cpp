#include "pide/mc_oracle.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pide/csv.hpp"

namespace pide {

namespace {
constexpr std::size_t kChunk = 1 << 15;  // fixed so chunking never affects draws
}

McEstimate mc_estimate(const LinearProblem& p, double t, std::span<const double> x, const TimeGrid& grid,
                       std::size_t n_paths, std::uint64_t seed, int n_threads) {
    if (n_paths < 2) throw std::invalid_argument("mc_estimate: n_paths must be >= 2");
    if (std::abs(grid.start() - t) > 1e-12 || std::abs(grid.end() - p.horizon) > 1e-12)
        throw std::invalid_argument("mc_estimate: grid must span [t, horizon]");

    const InitSampler at_point = point_sampler(std::vector<double>(x.begin(), x.end()));
    long double sum = 0.0L, sumsq = 0.0L;
    for (std::size_t done = 0; done < n_paths; done += kChunk) {
        const std::size_t count = std::min(kChunk, n_paths - done);
        PathBatch batch = simulate_paths(p.model, p.domain, at_point, grid, count, seed, n_threads, done);
        const std::vector<double> y = pathwise_functional(batch, p.discount, p.running, p.boundary);
        for (double v : y) {
            sum += v;
            sumsq += static_cast<long double>(v) * v;
        }
    }
    const long double n = static_cast<long double>(n_paths);
    McEstimate e;
    e.t = t;
    e.x.assign(x.begin(), x.end());
    e.estimate = static_cast<double>(sum / n);
    const long double var = (sumsq - sum * sum / n) / (n - 1.0L);
    e.std_error = std::sqrt(std::max(0.0, static_cast<double>(var)) / static_cast<double>(n_paths));
    e.n_paths = n_paths;
    e.seed = seed;
    return e;
}

std::vector<McEstimate> mc_grid(const LinearProblem& p, const std::vector<std::vector<double>>& points,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                int n_threads) {
    std::vector<McEstimate> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        out.push_back(mc_estimate(p, grid.start(), points[i], grid, n_paths,
                                  mix_seed({seed, 0x9017ull, i}), n_threads));
    return out;
}

McCache::McCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::string McCache::make_key(const std::string& problem_tag, double t, std::span<const double> x,
                              const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    std::ostringstream os;
    os << problem_tag << "|t=" << format_double(t) << "|x=";
    for (double v : x) os << format_double(v) << ';';
    os << "|grid=" << grid.steps() << ':' << format_double(grid.start()) << ':' << format_double(grid.end());
    os << "|n=" << n_paths << "|seed=" << seed;
    return os.str();
}

std::optional<McEstimate> McCache::lookup(const std::string& key) const {
    const auto file = dir_ / (std::to_string(hash_bytes(key)) + ".mc");
    std::ifstream is(file);
    if (!is) {
        ++misses_;
        return std::nullopt;
    }
    std::string stored_key;
    std::getline(is, stored_key);
    if (stored_key != key) {  // hash collision or stale file
        ++misses_;
        return std::nullopt;
    }
    McEstimate e;
    std::string tok;
    auto read_double = [&is, &tok]() {  // hexfloat fields; strtod handles %a output
        is >> tok;
        return std::strtod(tok.c_str(), nullptr);
    };
    e.t = read_double();
    std::size_t dim = 0;
    is >> dim;
    e.x.resize(dim);
    for (auto& v : e.x) v = read_double();
    e.estimate = read_double();
    e.std_error = read_double();
    is >> e.n_paths >> e.seed;
    if (!is) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return e;
}

void McCache::store(const std::string& key, const McEstimate& e) const {
    const auto file = dir_ / (std::to_string(hash_bytes(key)) + ".mc");
    std::ofstream os(file);
    if (!os) throw std::runtime_error("mc cache: cannot write " + file.string());
    char buf[48];
    auto hex = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%a", v);
        return std::string(buf);
    };
    os << key << '\n' << hex(e.t) << ' ' << e.x.size();
    for (double v : e.x) os << ' ' << hex(v);
    os << ' ' << hex(e.estimate) << ' ' << hex(e.std_error) << ' ' << e.n_paths << ' ' << e.seed << '\n';
}

McEstimate mc_estimate_cached(const LinearProblem& p, const std::string& problem_tag, double t,
                              std::span<const double> x, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, const McCache* cache, int n_threads) {
    if (!cache) return mc_estimate(p, t, x, grid, n_paths, seed, n_threads);
    const std::string key = McCache::make_key(problem_tag, t, x, grid, n_paths, seed);
    if (auto hit = cache->lookup(key)) return *hit;
    McEstimate e = mc_estimate(p, t, x, grid, n_paths, seed, n_threads);
    cache->store(key, e);
    return e;
}

}  // namespace pide
