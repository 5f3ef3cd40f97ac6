#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "levylab/chaos_oracle.hpp"
#include "levylab/malliavin.hpp"

namespace levylab {

/// Partition of (s, u] with s = p_0 < ... < p_k = u.
struct Partition {
    double s = 0.0, u = 0.0;
    std::vector<double> points;

    static Partition uniform(double s, double u, int cells);
    double mesh() const;
    std::size_t cells() const { return points.size() - 1; }
};

/// Smooth approximation of 1_A for A = (a, b]: phi = 1 on the inner compact
/// C = [a+w, b-w], supp phi inside the open U around A, cubic ramps of width
/// w, with slack = mu(U \ C) >= ||1_A - phi||^2_{L2(mu)} computed from the
/// ramp regions (a, a+w) and (b-w, b].
struct SmoothIndicator {
    double a = 0.0, b = 0.0, w = 0.0;
    Profile profile;
    double c_lo = 0.0, c_hi = 0.0;
    double u_lo = 0.0, u_hi = 0.0;
    double slack = 0.0;
};

SmoothIndicator make_smooth_indicator(const LevyTriplet& triplet, double a, double b,
                                      double ramp_width);
/// Shrinks the ramp until the slack is <= max_slack.
SmoothIndicator indicator_for_slack(const LevyTriplet& triplet, double a, double b,
                                    double max_slack);

/// Plateau cutoff: beta_N = 1 on [-N, N], supported in [-N-2, N+2],
/// |beta_N'| <= 1; alpha_N(x_0..x_n) = prod beta_N(x_i - x_{i-1}), x_{-1} = 0.
class CutoffFn {
  public:
    explicit CutoffFn(int level);

    int level() const { return level_; }
    double beta(double x) const;
    double beta_deriv(double x) const;
    double alpha(std::span<const double> y) const;
    /// Multiplies F by alpha_N over F's own coordinates; the result is a
    /// compactly supported smooth functional.
    SmoothFunctional apply(const SmoothFunctional& F) const;

  private:
    int level_;
};

/// G-square-n of the first-chaos approximation: the centered partition sum
/// sum_j psi(X_{t_j} - X_{t_{j-1}}) - E[...] with psi(x) = x phi(x). Carries
/// both the generic smooth-functional form and a specialized fast evaluator.
struct BuiltGn {
    SmoothFunctional functional;
    PathFunctional fast;
    double expectation = 0.0;
    double expectation_stderr = 0.0;  // 0 when the conditioning series applies
    Partition partition;
    Profile profile;
    double s = 0.0, u = 0.0;
};

/// Exact E[sum_j psi(increment_j)] for atomic nu by conditioning on per-atom
/// jump counts (series truncated at relative 1e-12), Gaussian part by
/// quadrature. Density nu falls back to an independent MC estimate with
/// recorded stderr.
BuiltGn build_Gn(const LevyTriplet& triplet, const Profile& phi, double s, double u,
                 const Partition& pi, std::uint64_t expectation_seed = 0x5eedULL,
                 std::uint64_t expectation_reps = 200000);

/// Monte Carlo estimate of E|Fa - Fb|^2 + E int |DFa - DFb|^2 dm. The
/// stderr of any embedded MC constant is propagated by the delta method.
MCEstimate d12_distance_sq(const PathFunctional& fa, const PathFunctional& fb,
                           const LevyTriplet& triplet, double horizon,
                           std::uint64_t n_reps, std::uint64_t seed, int threads = 0);

/// The two error integrals in the first-chaos approximation bound, with the
/// stated dominating constants checked pathwise.
struct Lemma4ErrorTerms {
    MCEstimate zero_part;  // 2 sigma^2 E int sum 1(t) [phi(0) - psi'(DX_j)]^2 dt
    MCEstimate jump_part;  // 2 E int sum 1(t) [psi(DX_j+x)-psi(DX_j)-psi(x)]^2 dt dnu
    double zero_bound_sq = 0.0;   // (||phi|| + ||psi'||)^2
    double jump_bound_sq = 0.0;   // (||psi'|| + ||phi|| + 3||psi||)^2
    double max_zero_ratio = 0.0;  // observed [..]^2 / bound
    double max_jump_ratio = 0.0;  // observed [..]^2 / (bound (|x| ^ 1)^2)
};

Lemma4ErrorTerms lemma4_error_terms(const LevyTriplet& triplet, const Profile& phi,
                                    double s, double u, const Partition& pi,
                                    double horizon, std::uint64_t n_reps,
                                    std::uint64_t seed, int threads = 0);

/// Exact D12 distance between I_1(1_(s,u] phi) and its partition sum for the
/// pure-jump single-atom case (sigma = 0, drift = 0): per-cell Poisson
/// conditioning, series truncated below 1e-18 probability.
double lemma4_pure_jump_oracle(const LevyTriplet& triplet, const Profile& phi, double s,
                               double u, int cells);

/// Split of the shared-time product into the distinct-index part S1 (a list
/// of time-disjoint tensor kernels) and the norm of the remainder S2.
struct Disjointified {
    std::vector<TensorKernel> s1;
    double s2_norm = 0.0;
    double c = 0.0;  // (n+1) mu(A_1)...mu(A_n) |T_{m+1}|...|T_n|
    std::vector<double> cell_edges;
};

Disjointified disjointify(const LevyTriplet& triplet, double t_lo, double t_hi,
                          std::span<const std::pair<double, double>> a_intervals,
                          std::span<const Rect> tail, int N);

/// Smoothing + partition + cutoff pipeline approximating a product of
/// M(T_i x A_i) by a compactly supported smooth functional.
struct PipelineResult {
    SmoothFunctional approximant;
    MCEstimate distance;            // D12 distance^2 of approximant to target
    MCEstimate smoothing_distance;  // D12 distance^2 of smooth-kernel product to target
    double tensor_l2_error = 0.0;   // ||1_tensor A - tensor phi||^2_{L2(mu^N)}
    double smoothing_bound = 0.0;   // (N+1)! prod |T_i| * tensor_l2_error
    std::vector<double> slacks;
};

PipelineResult theorem1_pipeline(const LevyTriplet& triplet, const std::vector<Rect>& target,
                                 double delta, double mesh, int cutoff, double horizon,
                                 std::uint64_t n_reps, std::uint64_t seed,
                                 int threads = 0);

/// Pathwise checks behind the product form of the derivative for factors
/// over disjoint time intervals.
struct IndependenceReport {
    double max_cross_term = 0.0;            // sup |x DG_i DG_j|, exact zero expected
    double max_product_rule_residual = 0.0; // relative residual of the product rule
    MCEstimate factor_product_mean;         // E[G_1 G_2], centered factors
    bool pass = false;
};

IndependenceReport product_independence_check(const LevyTriplet& triplet,
                                              const std::vector<BuiltGn>& factors,
                                              double horizon, std::uint64_t n_paths,
                                              std::uint64_t seed, int threads = 0);

}  // namespace levylab
