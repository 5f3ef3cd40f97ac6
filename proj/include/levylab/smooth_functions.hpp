#pragma once

#include <functional>

namespace levylab {

/// Cubic smoothstep s(t) = 3t^2 - 2t^3 clamped to [0, 1]; s'(0) = s'(1) = 0,
/// max slope 3/2 at t = 1/2.
double smoothstep(double t);
double smoothstep_deriv(double t);

/// A C^1 profile with analytic derivative, declared sup-norm upper bounds and
/// compact support [lo, hi]. The declared norms are true upper bounds, so
/// inequalities stated in terms of them hold pathwise.
struct Profile {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    double lo = 0.0, hi = 0.0;    // support interval
    double sup = 0.0;             // >= ||phi||_inf
    double sup_deriv = 0.0;       // >= ||phi'||_inf
    double psi_sup = 0.0;         // >= ||x phi(x)||_inf
    double psi_sup_deriv = 0.0;   // >= ||(x phi)'||_inf

    double psi(double x) const { return x * value(x); }
    double psi_deriv(double x) const { return value(x) + x * deriv(x); }
};

/// Smooth bump supported in (lo, hi], rising to `height` at the midpoint.
Profile bump_profile(double lo, double hi, double height);

/// Smooth approximation of the indicator of A = (a, b]: equals 1 on the
/// inner compact C = [a+w, b-w], vanishes off (a, b), cubic ramps of width w.
Profile indicator_profile(double a, double b, double ramp_width);

}  // namespace levylab
