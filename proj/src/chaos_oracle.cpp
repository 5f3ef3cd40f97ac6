#include "levylab/chaos_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace levylab {

namespace {

constexpr std::size_t kMaxOrder = 12;

double factorial(std::size_t n) {
    double f = 1.0;
    for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
    return f;
}

// m restricted to the Gaussian atom / to the jump part, on a rectangle.
double m_measure_part(const LevyTriplet& tr, const Rect& r, NormFlavor flavor) {
    switch (flavor) {
        case NormFlavor::Full:
            return m_measure(tr, r);
        case NormFlavor::ZeroPart:
            return r.contains_zero() ? r.time_length() * tr.sigma() * tr.sigma() : 0.0;
        case NormFlavor::JumpPart:
            return r.time_length() * tr.nu().x2_mass(r.x_lo, r.x_hi);
    }
    return 0.0;
}

double m_intersection_part(const LevyTriplet& tr, const Rect& a, const Rect& b,
                           NormFlavor flavor) {
    auto r = intersect(a, b);
    return r ? m_measure_part(tr, *r, flavor) : 0.0;
}

}  // namespace

double permanent(const std::vector<double>& matrix, std::size_t n) {
    if (n > kMaxOrder)
        throw std::invalid_argument("permanent: order > 12 rejected");
    if (matrix.size() != n * n)
        throw std::invalid_argument("permanent: matrix size mismatch");
    if (n == 0) return 1.0;
    std::vector<double> rowsum(n, 0.0);
    double total = 0.0;
    std::uint64_t gray = 0;
    int popcount = 0;
    const std::uint64_t limit = 1ULL << n;
    for (std::uint64_t k = 1; k < limit; ++k) {
        const std::uint64_t g = k ^ (k >> 1);
        const std::uint64_t diff = g ^ gray;
        const int j = std::countr_zero(diff);
        if (g & diff) {
            for (std::size_t i = 0; i < n; ++i) rowsum[i] += matrix[i * n + j];
            ++popcount;
        } else {
            for (std::size_t i = 0; i < n; ++i) rowsum[i] -= matrix[i * n + j];
            --popcount;
        }
        gray = g;
        double prod = 1.0;
        for (std::size_t i = 0; i < n; ++i) prod *= rowsum[i];
        total += ((static_cast<int>(n) - popcount) % 2 != 0) ? -prod : prod;
    }
    return total;
}

double inner_product(const LevyTriplet& triplet, const ElementaryChaos& a,
                     const ElementaryChaos& b) {
    if (a.order() == 0 || b.order() == 0)
        throw std::invalid_argument("inner_product: order must be >= 1");
    if (a.order() != b.order()) return 0.0;
    const std::size_t n = a.order();
    if (n > kMaxOrder) throw std::invalid_argument("inner_product: order > 12 rejected");
    std::vector<double> gram(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i * n + j] = m_measure_intersection(triplet, a.rects[i], b.rects[j]);
    return a.coefficient * b.coefficient * permanent(gram, n);
}

double restricted_inner_product(const LevyTriplet& triplet, const ElementaryChaos& a,
                                const ElementaryChaos& b, NormFlavor flavor) {
    if (a.order() != b.order()) return 0.0;
    const std::size_t n = a.order();
    if (n > kMaxOrder)
        throw std::invalid_argument("restricted_inner_product: order > 12 rejected");
    if (flavor == NormFlavor::Full) return inner_product(triplet, a, b);
    std::vector<double> gram(n * n), restricted(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            gram[i * n + j] = m_measure_intersection(triplet, a.rects[i], b.rects[j]);
            restricted[i * n + j] =
                m_intersection_part(triplet, a.rects[i], b.rects[j], flavor);
        }
    // Averaging the row-substituted permanents realizes the restriction of one
    // (any) coordinate of the symmetrized kernels.
    double acc = 0.0;
    std::vector<double> work(n * n);
    for (std::size_t k = 0; k < n; ++k) {
        work = gram;
        for (std::size_t j = 0; j < n; ++j) work[k * n + j] = restricted[k * n + j];
        acc += permanent(work, n);
    }
    return a.coefficient * b.coefficient * acc / static_cast<double>(n);
}

double restricted_inner_product_direct(const LevyTriplet& triplet, const ElementaryChaos& a,
                                       const ElementaryChaos& b, NormFlavor flavor,
                                       std::size_t coord) {
    if (a.order() != b.order()) return 0.0;
    const std::size_t n = a.order();
    if (n > 6)
        throw std::invalid_argument("restricted_inner_product_direct: n too large");
    if (coord >= n) throw std::invalid_argument("restricted_inner_product_direct: bad coord");
    std::vector<std::size_t> pi(n), tau(n);
    std::iota(pi.begin(), pi.end(), 0);
    double acc = 0.0;
    do {
        std::iota(tau.begin(), tau.end(), 0);
        do {
            double prod = 1.0;
            for (std::size_t i = 0; i < n && prod != 0.0; ++i) {
                const Rect& ra = a.rects[pi[i]];
                const Rect& rb = b.rects[tau[i]];
                prod *= (i == coord) ? m_intersection_part(triplet, ra, rb, flavor)
                                     : m_measure_intersection(triplet, ra, rb);
            }
            acc += prod;
        } while (std::next_permutation(tau.begin(), tau.end()));
    } while (std::next_permutation(pi.begin(), pi.end()));
    // n! <f~ 1, g~ 1> with f~ = (1/n!) sum_pi, g~ = (1/n!) sum_tau.
    return a.coefficient * b.coefficient * acc / factorial(n);
}

double l2_norm_sq(const LevyTriplet& triplet, const ChaosSum& sum) {
    double acc = 0.0;
    for (const auto& a : sum)
        for (const auto& b : sum) acc += inner_product(triplet, a, b);
    return acc;
}

double d12_norm_sq(const LevyTriplet& triplet, const ChaosSum& sum, NormFlavor flavor) {
    double acc = 0.0;
    for (const auto& a : sum) {
        for (const auto& b : sum) {
            if (a.order() != b.order()) continue;
            const double n = static_cast<double>(a.order());
            const double ip = inner_product(triplet, a, b);
            if (flavor == NormFlavor::Full) {
                acc += (n + 1.0) * ip;
            } else {
                acc += ip + n * restricted_inner_product(triplet, a, b, flavor);
            }
        }
    }
    return acc;
}

double s2_norm_formula(int m, int N, double T_len, double c) {
    if (m < 1) throw std::invalid_argument("s2_norm_formula: need m >= 1");
    if (m > N) throw std::invalid_argument("s2_norm_formula: need m <= N");
    double distinct_fraction = 1.0;
    for (int i = 1; i < m; ++i)
        distinct_fraction *= 1.0 - static_cast<double>(i) / static_cast<double>(N);
    return c * std::pow(T_len, m) * (1.0 - distinct_fraction);
}

double s2_norm_direct(const LevyTriplet& triplet, const SharedTimeProduct& spec, int N) {
    const int m = static_cast<int>(spec.a.size());
    if (m < 1) throw std::invalid_argument("s2_norm_direct: need m >= 1");
    if (N < 1) throw std::invalid_argument("s2_norm_direct: need N >= 1");
    // N < m is allowed: every tuple is then non-distinct and the sum is the
    // full product norm.
    if (std::pow(static_cast<double>(N), m) > 1e6)
        throw std::invalid_argument("s2_norm_direct: enumeration bound N^m <= 1e6 exceeded");
    for (int i = 0; i < m; ++i) {
        if (!(mu_measure(triplet, spec.a[i].first, spec.a[i].second) > 0.0))
            throw std::invalid_argument("s2_norm_direct: mu(A_i) must be positive");
        for (int j = i + 1; j < m; ++j)
            if (spec.a[i].first < spec.a[j].second && spec.a[j].first < spec.a[i].second)
                throw std::invalid_argument("s2_norm_direct: A intervals must be disjoint");
    }

    const double len = spec.t_hi - spec.t_lo;
    std::vector<double> cell_edges(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j)
        cell_edges[static_cast<std::size_t>(j)] = spec.t_lo + len * j / N;

    // m(E_j x A_i) precomputed per (cell, factor)
    std::vector<double> cell_m(static_cast<std::size_t>(N) * m);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < m; ++i) {
            Rect r(cell_edges[static_cast<std::size_t>(j)],
                   cell_edges[static_cast<std::size_t>(j) + 1], spec.a[static_cast<std::size_t>(i)].first,
                   spec.a[static_cast<std::size_t>(i)].second);
            cell_m[static_cast<std::size_t>(j) * m + i] = m_measure(triplet, r);
        }

    double tail_product = 1.0;
    for (const auto& r : spec.tail) tail_product *= m_measure(triplet, r);

    const std::size_t n = static_cast<std::size_t>(m) + spec.tail.size();
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    double acc = 0.0;
    while (true) {
        bool distinct = true;
        for (int i = 0; i < m && distinct; ++i)
            for (int j = i + 1; j < m; ++j)
                if (idx[static_cast<std::size_t>(i)] == idx[static_cast<std::size_t>(j)]) {
                    distinct = false;
                    break;
                }
        if (!distinct) {
            double prod = 1.0;
            for (int i = 0; i < m; ++i)
                prod *= cell_m[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]) * m + i];
            acc += prod;
        }
        int pos = m - 1;
        while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == N)
            idx[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
    }
    return (static_cast<double>(n) + 1.0) * acc * tail_product;
}

}  // namespace levylab
