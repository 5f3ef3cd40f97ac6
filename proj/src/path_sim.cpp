#include "levylab/path_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "levylab/quadrature.hpp"
#include "levylab/rng.hpp"

namespace levylab {

Path::Path(std::shared_ptr<const LevyTriplet> triplet, double horizon,
           std::vector<double> grid_times, std::vector<double> brownian_values,
           std::vector<Jump> jumps)
    : triplet_(std::move(triplet)),
      horizon_(horizon),
      grid_times_(std::move(grid_times)),
      brownian_(std::move(brownian_values)),
      jumps_(std::move(jumps)) {
    if (!(horizon_ > 0.0)) throw std::invalid_argument("Path: horizon must be > 0");
    if (grid_times_.size() != brownian_.size() || grid_times_.size() < 2 ||
        grid_times_.front() != 0.0 || grid_times_.back() != horizon_)
        throw std::invalid_argument("Path: malformed grid");
    for (std::size_t i = 1; i < grid_times_.size(); ++i)
        if (!(grid_times_[i - 1] < grid_times_[i]))
            throw std::invalid_argument("Path: grid times must be strictly increasing");
    for (std::size_t i = 1; i < jumps_.size(); ++i)
        if (!(jumps_[i - 1].time < jumps_[i].time))
            throw std::invalid_argument("Path: jump times must be strictly increasing");
    jump_prefix_.resize(jumps_.size() + 1, 0.0);
    for (std::size_t i = 0; i < jumps_.size(); ++i)
        jump_prefix_[i + 1] = jump_prefix_[i] + jumps_[i].size;
}

std::size_t Path::grid_index(double t) const {
    auto it = std::lower_bound(grid_times_.begin(), grid_times_.end(), t);
    if (it == grid_times_.end() || *it != t)
        throw std::invalid_argument("Path: time " + std::to_string(t) + " not on grid");
    return static_cast<std::size_t>(it - grid_times_.begin());
}

bool Path::has_grid_time(double t) const {
    return std::binary_search(grid_times_.begin(), grid_times_.end(), t);
}

double Path::brownian(double t) const { return brownian_[grid_index(t)]; }

double Path::jump_sum(double t) const {
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                               [](double v, const Jump& j) { return v < j.time; });
    return jump_prefix_[static_cast<std::size_t>(it - jumps_.begin())];
}

double Path::value(double t) const {
    return triplet_->drift() * t + triplet_->sigma() * brownian(t) + jump_sum(t);
}

double Path::increment(double s, double t) const {
    if (!(s < t)) throw std::invalid_argument("Path::increment: need s < t");
    return value(t) - value(s);
}

Path simulate_path(const std::shared_ptr<const LevyTriplet>& triplet, double horizon,
                   std::span<const double> required_times, std::uint64_t replicate_index,
                   std::uint64_t master_seed) {
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate_path: horizon must be > 0");
    for (double t : required_times)
        if (!(0.0 <= t && t <= horizon))
            throw std::invalid_argument("simulate_path: required time outside [0, H]");

    std::mt19937_64 eng = replicate_engine(master_seed, replicate_index);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double lambda = triplet->nu().total_mass();
    std::poisson_distribution<long> pois(lambda * horizon);
    const long k = pois(eng);

    // Jump times uniform on (0, H]; collisions (probability zero, finite
    // precision) are re-drawn to keep them distinct.
    std::vector<double> jump_times;
    jump_times.reserve(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) {
        double tau;
        bool fresh;
        do {
            tau = horizon - unit(eng) * horizon;
            fresh = std::find(jump_times.begin(), jump_times.end(), tau) == jump_times.end();
        } while (!fresh || tau == 0.0);
        jump_times.push_back(tau);
    }
    std::vector<Jump> jumps(static_cast<std::size_t>(k));
    for (long i = 0; i < k; ++i) {
        jumps[static_cast<std::size_t>(i)] = {jump_times[static_cast<std::size_t>(i)],
                                              triplet->nu().sample_size(unit(eng))};
    }
    std::sort(jumps.begin(), jumps.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });

    std::vector<double> grid;
    grid.reserve(required_times.size() + jumps.size() + 2);
    grid.push_back(0.0);
    grid.push_back(horizon);
    grid.insert(grid.end(), required_times.begin(), required_times.end());
    for (const auto& j : jumps) grid.push_back(j.time);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> w(grid.size(), 0.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 1; i < grid.size(); ++i)
        w[i] = w[i - 1] + std::sqrt(grid[i] - grid[i - 1]) * gauss(eng);

    return Path(triplet, horizon, std::move(grid), std::move(w), std::move(jumps));
}

Path simulate_path(const LevyTriplet& triplet, double horizon,
                   std::span<const double> required_times, std::uint64_t replicate_index,
                   std::uint64_t master_seed) {
    return simulate_path(std::make_shared<const LevyTriplet>(triplet), horizon,
                         required_times, replicate_index, master_seed);
}

double increment(const Path& path, double s, double t) { return path.increment(s, t); }

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LEVYLAB_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp<unsigned>(hc == 0 ? 1 : hc, 1, 16));
}

std::vector<MCEstimate> mc_run_vec(
    const std::function<void(const Path&, std::span<double>)>& estimator,
    std::size_t dimension, std::uint64_t n, std::uint64_t master_seed,
    const LevyTriplet& triplet, double horizon, std::span<const double> required_times,
    int threads) {
    if (n < 2) throw std::invalid_argument("mc_run: need n >= 2");
    if (dimension == 0) throw std::invalid_argument("mc_run: dimension must be >= 1");

    auto shared = std::make_shared<const LevyTriplet>(triplet);
    std::vector<double> req(required_times.begin(), required_times.end());
    std::vector<double> values(n * dimension);

    const int nthreads = std::min<std::uint64_t>(resolve_threads(threads), n);
    std::vector<std::uint64_t> bad(static_cast<std::size_t>(nthreads), n);
    auto worker = [&](int tid) {
        const std::uint64_t lo = n * static_cast<std::uint64_t>(tid) /
                                 static_cast<std::uint64_t>(nthreads);
        const std::uint64_t hi = n * (static_cast<std::uint64_t>(tid) + 1) /
                                 static_cast<std::uint64_t>(nthreads);
        for (std::uint64_t i = lo; i < hi; ++i) {
            Path p = simulate_path(shared, horizon, req, i, master_seed);
            std::span<double> out(values.data() + i * dimension, dimension);
            estimator(p, out);
            for (double v : out) {
                if (!std::isfinite(v)) {
                    bad[static_cast<std::size_t>(tid)] =
                        std::min(bad[static_cast<std::size_t>(tid)], i);
                    return;
                }
            }
        }
    };
    if (nthreads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }
    const std::uint64_t first_bad = *std::min_element(bad.begin(), bad.end());
    if (first_bad < n)
        throw std::runtime_error("mc_run: estimator returned non-finite value at replicate " +
                                 std::to_string(first_bad));

    std::vector<MCEstimate> out(dimension);
    std::vector<double> col(n), dev(n);
    for (std::size_t d = 0; d < dimension; ++d) {
        for (std::uint64_t i = 0; i < n; ++i) col[i] = values[i * dimension + d];
        const double mean = pairwise_sum(col.data(), n) / static_cast<double>(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            const double x = col[i] - mean;
            dev[i] = x * x;
        }
        const double var =
            pairwise_sum(dev.data(), n) / static_cast<double>(n - 1);
        out[d] = MCEstimate{mean, std::sqrt(var / static_cast<double>(n)), n, master_seed};
    }
    return out;
}

MCEstimate mc_run(const std::function<double(const Path&)>& estimator, std::uint64_t n,
                  std::uint64_t master_seed, const LevyTriplet& triplet, double horizon,
                  std::span<const double> required_times, int threads) {
    auto vec = mc_run_vec(
        [&](const Path& p, std::span<double> out) { out[0] = estimator(p); }, 1, n,
        master_seed, triplet, horizon, required_times, threads);
    return vec[0];
}

}  // namespace levylab
