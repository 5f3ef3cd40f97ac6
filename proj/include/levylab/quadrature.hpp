#pragma once

#include <functional>
#include <vector>

namespace levylab {

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

// Nodes/weights of the n-point Gauss-Legendre rule, cached per order.
const GaussLegendreRule& gauss_legendre(int order);

// Composite Gauss-Legendre over [a, b] with `panels` equal panels.
double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order = 8);

// Integrates with `panels` and `2*panels` and fails if the two disagree by
// more than `rel_tol` relatively. Returns the finer value.
double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         int panels, double rel_tol = 1e-10, int order = 8);

// E[f(mean + sd*Z)], Z standard normal, by quadrature over [-8.5, 8.5] sd.
// Intended for bounded smooth f; tail mass beyond the window is ~1e-17.
double gaussian_expectation(const std::function<double(double)>& f, double mean,
                            double sd, int panels = 48);

// Deterministic pairwise sum of values[first, last); stable under threading
// because the reduction tree depends only on the index range.
double pairwise_sum(const double* values, std::size_t count);

}  // namespace levylab
