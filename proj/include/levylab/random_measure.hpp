#pragma once

#include <vector>

#include "levylab/levy_model.hpp"
#include "levylab/path_sim.hpp"
#include "levylab/smooth_functions.hpp"

namespace levylab {

/// Linear combination of indicators of pairwise disjoint rectangles.
class StepKernel {
  public:
    struct Term {
        double coefficient;
        Rect rect;
    };

    explicit StepKernel(std::vector<Term> terms);
    static StepKernel indicator(const Rect& r, double coefficient = 1.0);

    const std::vector<Term>& terms() const { return terms_; }
    /// Pointwise kernel value at (t, x), half-open rectangle semantics.
    double point_value(double t, double x) const;
    /// ||k||^2 in L2(m) = sum c^2 m(rect).
    double l2_norm_sq(const LevyTriplet& triplet) const;
    /// Time interval endpoints of all rectangles, sorted.
    std::vector<double> time_endpoints() const;
    double time_lo() const;
    double time_hi() const;

  private:
    std::vector<Term> terms_;
};

/// Kernel 1_(s,u] (x) phi with a smooth compactly supported profile phi.
struct SeparableKernel {
    double s, u;  // time interval (s, u]
    Profile profile;

    SeparableKernel(double s, double u, Profile profile);
};

/// Tensor product of step kernels whose time supports are pairwise disjoint,
/// so the multiple integral is the product of the first integrals.
class TensorKernel {
  public:
    explicit TensorKernel(std::vector<StepKernel> factors);

    const std::vector<StepKernel>& factors() const { return factors_; }
    std::size_t order() const { return factors_.size(); }
    std::vector<double> time_endpoints() const;

  private:
    std::vector<StepKernel> factors_;
};

/// M(r) on a path: the Brownian part on the size-axis atom {0}, the raw jump
/// sum over the rectangle, minus the compensator (t_hi-t_lo) int_(x_lo,x_hi] x dnu.
double eval_M(const Path& path, const Rect& r);

/// First integrals I_1.
double eval_I1(const Path& path, const StepKernel& k);
double eval_I1(const Path& path, const SeparableKernel& k);

/// I_N of a time-disjoint elementary tensor = product of the factor I_1's.
double eval_IN(const Path& path, const TensorKernel& tk);

/// Chaos derivative of an elementary tensor at (t, x):
/// sum_i k_i(t,x) prod_{j != i} I_1(k_j).
double derivative_of_elementary(const Path& path, const TensorKernel& tk, double t,
                                double x);

/// Pathwise value and derivative of a product of M(rect) factors, rectangles
/// not necessarily time-disjoint; the derivative folds the product rule
/// D(FG) = G DF + F DG + x DF DG over the factors.
double eval_rect_product(const Path& path, std::span<const Rect> rects);
double derivative_of_rect_product(const Path& path, std::span<const Rect> rects, double t,
                                  double x);

}  // namespace levylab
