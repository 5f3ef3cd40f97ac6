#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "levylab/levy_model.hpp"

namespace levylab {

struct Jump {
    double time;  // in (0, H]
    double size;  // != 0
};

/// One simulated trajectory: Brownian values on a finite grid plus an
/// explicit sorted jump list. X(t) is exact at every grid time.
class Path {
  public:
    Path(std::shared_ptr<const LevyTriplet> triplet, double horizon,
         std::vector<double> grid_times, std::vector<double> brownian_values,
         std::vector<Jump> jumps);

    double horizon() const { return horizon_; }
    const LevyTriplet& triplet() const { return *triplet_; }
    std::span<const double> grid_times() const { return grid_times_; }
    std::span<const Jump> jumps() const { return jumps_; }

    bool has_grid_time(double t) const;
    /// W(t); t must be a grid time.
    double brownian(double t) const;
    /// Sum of jump sizes with jump time <= t.
    double jump_sum(double t) const;
    /// X(t) = b*t + sigma*W(t) + jump_sum(t); t must be a grid time.
    double value(double t) const;
    /// X(t) - X(s) for grid times s < t.
    double increment(double s, double t) const;

  private:
    std::size_t grid_index(double t) const;

    std::shared_ptr<const LevyTriplet> triplet_;
    double horizon_;
    std::vector<double> grid_times_;
    std::vector<double> brownian_;
    std::vector<Jump> jumps_;
    std::vector<double> jump_prefix_;
};

/// Uniform return type of every Monte Carlo quantity.
struct MCEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

/// Simulates one path as a pure function of (master_seed, replicate_index).
/// The Brownian grid is the union of required_times, the jump times, 0 and H.
Path simulate_path(const std::shared_ptr<const LevyTriplet>& triplet, double horizon,
                   std::span<const double> required_times, std::uint64_t replicate_index,
                   std::uint64_t master_seed);

Path simulate_path(const LevyTriplet& triplet, double horizon,
                   std::span<const double> required_times, std::uint64_t replicate_index,
                   std::uint64_t master_seed);

/// X(t) - X(s); wrapper over Path::increment.
double increment(const Path& path, double s, double t);

/// Thread count resolution: explicit argument > 0 wins, else LEVYLAB_THREADS,
/// else hardware concurrency (clamped to [1, 16]).
int resolve_threads(int requested = 0);

/// Runs `estimator` over n independent replicates and reduces per component
/// with a fixed pairwise tree, so the result does not depend on the degree of
/// parallelism. Estimators must be pure; a non-finite value aborts with the
/// smallest offending replicate index in the message.
std::vector<MCEstimate> mc_run_vec(
    const std::function<void(const Path&, std::span<double>)>& estimator,
    std::size_t dimension, std::uint64_t n, std::uint64_t master_seed,
    const LevyTriplet& triplet, double horizon, std::span<const double> required_times,
    int threads = 0);

MCEstimate mc_run(const std::function<double(const Path&)>& estimator, std::uint64_t n,
                  std::uint64_t master_seed, const LevyTriplet& triplet, double horizon,
                  std::span<const double> required_times, int threads = 0);

}  // namespace levylab
