#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "levylab/chaos_oracle.hpp"
#include "levylab/path_sim.hpp"
#include "levylab/random_measure.hpp"

namespace levylab {

enum class Smoothness {
    CompactSupportSmooth,  // bona fide smooth random variable with declared support box
    C1Extended             // evaluation-only extension to C^1 functions
};

/// F = f(X_{t_1}, ..., X_{t_n}) with an explicit gradient. The gradient is
/// validated against central finite differences at construction.
class SmoothFunctional {
  public:
    using Fn = std::function<double(std::span<const double>)>;
    using Grad = std::function<void(std::span<const double>, std::span<double>)>;
    using Box = std::vector<std::pair<double, double>>;

    SmoothFunctional(std::vector<double> times, Fn f, Grad grad, Smoothness cls,
                     std::optional<Box> support_box = std::nullopt);

    const std::vector<double>& times() const { return times_; }
    std::size_t arity() const { return times_.size(); }
    Smoothness smoothness() const { return cls_; }
    const std::optional<Box>& support_box() const { return box_; }

    double eval(std::span<const double> y) const { return f_(y); }
    void grad(std::span<const double> y, std::span<double> out) const { grad_(y, out); }
    /// Evaluates on a path; every t_i must be on the path grid.
    double eval_on(const Path& path) const;
    std::vector<double> gather(const Path& path) const;

  private:
    std::vector<double> times_;
    Fn f_;
    Grad grad_;
    Smoothness cls_;
    std::optional<Box> box_;
};

/// The derivative field D_{t,x}F of a smooth functional on one path:
/// piecewise constant in t with breakpoints at the functional times, zero for
/// t past the last time. Caches path values, the gradient and its suffix
/// sums, so the x = 0 branch is O(log n) per query.
class DerivField {
  public:
    DerivField(const SmoothFunctional& F, const Path& path);

    double value() const { return f0_; }
    double operator()(double t, double x) const;

  private:
    const SmoothFunctional* F_;
    std::vector<double> y_;
    std::vector<double> grad_;
    std::vector<double> grad_suffix_;
    double f0_;
    mutable std::vector<double> shift_buf_;
};

/// D_{t,x}F: the gradient field on the size-axis atom {0}, the increment
/// quotient off it.
double eval_D(const SmoothFunctional& F, const Path& path, double t, double x);

// --- generic pathwise functionals with derivative fields -------------------

/// Per-path bound state of a functional: its value and its derivative field.
struct PathEvaluator {
    double value = 0.0;
    std::function<double(double t, double x)> deriv;
};

/// A functional together with its derivative field, evaluable per path.
/// Representations: smooth functionals, first integrals of separable kernels,
/// elementary tensors, products of M(rect) factors.
struct PathFunctional {
    std::function<PathEvaluator(const Path&)> bind;
    std::vector<double> t_breakpoints;   // deriv piecewise constant between them
    std::vector<double> required_times;  // must be on every path grid
    double aux_stderr = 0.0;             // stderr of any embedded MC constant
};

PathFunctional from_smooth(SmoothFunctional F);
PathFunctional from_separable(SeparableKernel k);
PathFunctional from_tensor(TensorKernel tk);
PathFunctional from_rect_product(std::vector<Rect> rects);
/// Product of first integrals of separable kernels over disjoint intervals.
PathFunctional from_separable_product(std::vector<SeparableKernel> ks);
PathFunctional difference(PathFunctional a, PathFunctional b);

/// int |D|^2 dm over the breakpoint partition, exact in t (the field is
/// piecewise constant); the x-part keeps the Gaussian atom and/or the jump
/// atoms according to the flavor. Density measures are integrated in x by
/// quadrature.
double d12_m_integral(const LevyTriplet& triplet, const PathEvaluator& ev,
                      std::span<const double> breakpoints, NormFlavor flavor);

/// Monte Carlo estimate of |F|^2 + the flavor's m-integral of |DF|^2.
MCEstimate d12_norm_sq_mc(const SmoothFunctional& F, const LevyTriplet& triplet,
                          double horizon, std::uint64_t n_reps, std::uint64_t seed,
                          NormFlavor flavor, int threads = 0);
MCEstimate d12_norm_sq_mc(const PathFunctional& F, const LevyTriplet& triplet,
                          double horizon, std::uint64_t n_reps, std::uint64_t seed,
                          NormFlavor flavor, int threads = 0);

// --- algebra on smooth functionals ------------------------------------------

/// Pointwise product over the merged time set; gradient by the product rule.
SmoothFunctional product(const SmoothFunctional& F, const SmoothFunctional& G);

/// F - c (same gradient); compactness is lost for c != 0.
SmoothFunctional shifted(const SmoothFunctional& F, double c);

/// lhs = D(F G) evaluated on the product functional, rhs = G DF + F DG + x DF DG.
std::pair<double, double> product_rule_check(const SmoothFunctional& F,
                                             const SmoothFunctional& G, const Path& path,
                                             double t, double x);

// --- Lipschitz functions -----------------------------------------------------

/// Lipschitz map with declared constant; the constant is spot-checked on
/// random pairs at construction. `deriv` may be absent.
struct LipschitzFn {
    std::function<double(double)> fn;
    double lipschitz;
    std::function<double(double)> deriv;

    LipschitzFn(std::function<double(double)> fn, double lipschitz,
                std::function<double(double)> deriv = nullptr);
};

/// g(F + x D_{t,x}F) - g(F)) / x for x != 0.
double chain_rule_jump(const LipschitzFn& g, const SmoothFunctional& F, const Path& path,
                       double t, double x);

/// g'(F) D_{t,0}F for continuously differentiable g; asserts |g'(F)| <= L + 1e-12.
double chain_rule_zero(const LipschitzFn& g, const SmoothFunctional& F, const Path& path,
                       double t);

/// g composed with F; the gradient is g'(F) grad F. Compact support survives
/// exactly when g(0) = 0.
SmoothFunctional compose(const LipschitzFn& g, const SmoothFunctional& F);

/// g * psi_N with psi_N(x) = N psi(N x) and psi the normalized
/// exp(-1/(1-x^2)) bump; smooth, ||g_N'|| <= L_g, ||g_N - g|| <= L_g / N.
LipschitzFn mollify(const LipschitzFn& g, int N);

}  // namespace levylab
