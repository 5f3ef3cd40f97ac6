#include "levylab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace levylab {

namespace {

GaussLegendreRule compute_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
    static std::map<int, GaussLegendreRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_rule(order)).first;
    return it->second;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int panels, int order) {
    if (panels < 1) throw std::invalid_argument("integrate: panels must be >= 1");
    if (!(a <= b)) throw std::invalid_argument("integrate: need a <= b");
    if (a == b) return 0.0;
    const GaussLegendreRule& rule = gauss_legendre(order);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
        total += 0.5 * h * acc;
    }
    return total;
}

double integrate_checked(const std::function<double(double)>& f, double a, double b,
                         int panels, double rel_tol, int order) {
    const double coarse = integrate(f, a, b, panels, order);
    const double fine = integrate(f, a, b, 2 * panels, order);
    if (!std::isfinite(fine))
        throw std::runtime_error("integrate_checked: non-finite quadrature result");
    if (std::abs(fine - coarse) > rel_tol * (1.0 + std::abs(fine)))
        throw std::runtime_error("integrate_checked: panel doubling disagreement");
    return fine;
}

double gaussian_expectation(const std::function<double(double)>& f, double mean,
                            double sd, int panels) {
    if (sd == 0.0) return f(mean);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto integrand = [&](double z) { return f(mean + sd * z) * norm * std::exp(-0.5 * z * z); };
    return integrate(integrand, -8.5, 8.5, panels);
}

double pairwise_sum(const double* values, std::size_t count) {
    if (count == 0) return 0.0;
    if (count <= 8) {
        double s = values[0];
        for (std::size_t i = 1; i < count; ++i) s += values[i];
        return s;
    }
    const std::size_t half = count / 2;
    return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

}  // namespace levylab
