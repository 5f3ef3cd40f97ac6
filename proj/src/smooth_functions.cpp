#include "levylab/smooth_functions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace levylab {

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

double smoothstep_deriv(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 6.0 * t * (1.0 - t);
}

Profile bump_profile(double lo, double hi, double height) {
    if (!(lo < hi)) throw std::invalid_argument("bump_profile: need lo < hi");
    if (!(height > 0.0)) throw std::invalid_argument("bump_profile: need height > 0");
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Profile p;
    p.lo = lo;
    p.hi = hi;
    p.value = [=](double x) {
        if (x <= lo || x > hi) return 0.0;
        return x <= mid ? height * smoothstep((x - lo) / half)
                        : height * smoothstep((hi - x) / half);
    };
    p.deriv = [=](double x) {
        if (x <= lo || x > hi) return 0.0;
        return x <= mid ? height * smoothstep_deriv((x - lo) / half) / half
                        : -height * smoothstep_deriv((hi - x) / half) / half;
    };
    p.sup = height;
    p.sup_deriv = 1.5 * height / half;
    const double xmax = std::max(std::abs(lo), std::abs(hi));
    p.psi_sup = xmax * p.sup;
    p.psi_sup_deriv = p.sup + xmax * p.sup_deriv;
    return p;
}

Profile indicator_profile(double a, double b, double ramp_width) {
    if (!(a < b)) throw std::invalid_argument("indicator_profile: need a < b");
    if (!(ramp_width > 0.0) || !(2.0 * ramp_width < b - a))
        throw std::invalid_argument("indicator_profile: need 0 < 2w < b - a");
    const double w = ramp_width;
    Profile p;
    p.lo = a;
    p.hi = b;
    p.value = [=](double x) {
        if (x <= a || x >= b) return 0.0;
        if (x < a + w) return smoothstep((x - a) / w);
        if (x > b - w) return smoothstep((b - x) / w);
        return 1.0;
    };
    p.deriv = [=](double x) {
        if (x <= a || x >= b) return 0.0;
        if (x < a + w) return smoothstep_deriv((x - a) / w) / w;
        if (x > b - w) return -smoothstep_deriv((b - x) / w) / w;
        return 0.0;
    };
    p.sup = 1.0;
    p.sup_deriv = 1.5 / w;
    const double xmax = std::max(std::abs(a), std::abs(b));
    p.psi_sup = xmax;
    p.psi_sup_deriv = 1.0 + xmax * p.sup_deriv;
    return p;
}

}  // namespace levylab
