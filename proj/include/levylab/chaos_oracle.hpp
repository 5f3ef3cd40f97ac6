#pragma once

#include <vector>

#include "levylab/levy_model.hpp"

namespace levylab {

/// Which part of the D_{1,2} norm to take: the full norm, or the seminorm
/// restricted to the Gaussian atom {0} / to the jump part R_0 in the first
/// tensor coordinate.
enum class NormFlavor { Full, ZeroPart, JumpPart };

/// c * I_n(1_{B_1 x ... x B_n}); rectangles need not be disjoint.
struct ElementaryChaos {
    std::vector<Rect> rects;
    double coefficient = 1.0;

    std::size_t order() const { return rects.size(); }
};

/// Finite sum of elementary chaos terms, possibly of mixed order.
using ChaosSum = std::vector<ElementaryChaos>;

/// Permanent by Ryser's formula with Gray-code updates; n <= 12.
double permanent(const std::vector<double>& matrix, std::size_t n);

/// E[I_n(f) I_m(g)] = 0 for n != m, else c1 c2 perm(G) with
/// G_ij = m(B_i intersect B'_j).
double inner_product(const LevyTriplet& triplet, const ElementaryChaos& a,
                     const ElementaryChaos& b);

/// Polarized derivative-part inner product with the first tensor coordinate
/// restricted to the Gaussian atom (ZeroPart) or to R_0 (JumpPart); equals
/// the unrestricted inner product for Full. Symmetrized kernels make the
/// restricted coordinate immaterial; `restricted_coordinate_invariant_check`
/// recomputes by a direct permutation-pair sum over any coordinate.
double restricted_inner_product(const LevyTriplet& triplet, const ElementaryChaos& a,
                                const ElementaryChaos& b, NormFlavor flavor);

/// Direct O(n!^2) evaluation restricting coordinate `coord` (0-based); for
/// tests of the coordinate-invariance claim, small n only.
double restricted_inner_product_direct(const LevyTriplet& triplet, const ElementaryChaos& a,
                                       const ElementaryChaos& b, NormFlavor flavor,
                                       std::size_t coord);

/// L2 norm squared of a chaos sum.
double l2_norm_sq(const LevyTriplet& triplet, const ChaosSum& sum);

/// D_{1,2}-type norm squared of a chaos sum under the requested flavor:
/// Full -> sum over matching-order pairs of (n+1) <.,.>;
/// ZeroPart/JumpPart -> L2 part plus n times the restricted inner products.
double d12_norm_sq(const LevyTriplet& triplet, const ChaosSum& sum, NormFlavor flavor);

/// Closed form c |T|^m (1 - (1 - 1/N)...(1 - (m-1)/N)) for the norm of the
/// non-distinct-index remainder when an m-fold shared time interval of length
/// T_len is split into N equal cells. The caller supplies the constant
/// c = (n+1) mu(A_1)...mu(A_n) |T_{m+1}|...|T_n|.
double s2_norm_formula(int m, int N, double T_len, double c);

/// Brute-force enumeration of the same norm over all non-distinct index
/// tuples; N^m <= 1e6. Must agree with the formula to ~1e-14 relative.
struct SharedTimeProduct {
    double t_lo, t_hi;                          // shared interval T
    std::vector<std::pair<double, double>> a;   // A_1..A_m, pairwise disjoint, mu(A_i) > 0
    std::vector<Rect> tail;                     // T_k x A_k, times disjoint from T
};

double s2_norm_direct(const LevyTriplet& triplet, const SharedTimeProduct& spec, int N);

}  // namespace levylab
