#include "levylab/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "levylab/quadrature.hpp"

namespace levylab {

JumpMeasure JumpMeasure::from_atoms(std::vector<JumpAtom> atoms) {
    if (atoms.empty())
        throw std::invalid_argument("JumpMeasure: need at least one atom");
    for (const auto& a : atoms) {
        if (a.position == 0.0)
            throw std::invalid_argument("JumpMeasure: atom at 0 not allowed");
        if (!(a.intensity > 0.0) || !std::isfinite(a.intensity))
            throw std::invalid_argument("JumpMeasure: atom intensity must be positive");
        if (!std::isfinite(a.position))
            throw std::invalid_argument("JumpMeasure: atom position must be finite");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const JumpAtom& l, const JumpAtom& r) { return l.position < r.position; });
    for (std::size_t i = 1; i < atoms.size(); ++i)
        if (atoms[i].position == atoms[i - 1].position)
            throw std::invalid_argument("JumpMeasure: duplicate atom position");

    JumpMeasure m;
    m.atoms_ = std::move(atoms);
    for (const auto& a : m.atoms_) {
        m.total_mass_ += a.intensity;
        m.second_moment_ += a.intensity * a.position * a.position;
    }
    return m;
}

JumpMeasure JumpMeasure::from_density(std::function<double(double)> density, double x_lo,
                                      double x_hi, int panels) {
    if (!density) throw std::invalid_argument("JumpMeasure: null density");
    if (!(x_lo < x_hi)) throw std::invalid_argument("JumpMeasure: need x_lo < x_hi");
    if (!(x_hi < 0.0 || x_lo > 0.0))
        throw std::invalid_argument("JumpMeasure: density support must exclude a neighborhood of 0");
    if (panels < 1) throw std::invalid_argument("JumpMeasure: panels must be >= 1");

    JumpMeasure m;
    m.density_ = std::move(density);
    m.x_lo_ = x_lo;
    m.x_hi_ = x_hi;
    m.panels_ = panels;
    m.total_mass_ = integrate_checked(m.density_, x_lo, x_hi, panels);
    m.second_moment_ = integrate_checked(
        [&](double x) { return x * x * m.density_(x); }, x_lo, x_hi, panels);
    if (!std::isfinite(m.total_mass_) || !(m.total_mass_ > 0.0))
        throw std::invalid_argument("JumpMeasure: density mass must be finite and positive");
    if (!std::isfinite(m.second_moment_))
        throw std::invalid_argument("JumpMeasure: second moment not finite");

    // CDF table for size sampling; linear inverse between knots.
    const int cells = 2048;
    m.cdf_grid_.resize(cells + 1);
    m.cdf_values_.resize(cells + 1);
    const double h = (x_hi - x_lo) / cells;
    m.cdf_grid_[0] = x_lo;
    m.cdf_values_[0] = 0.0;
    for (int i = 1; i <= cells; ++i) {
        m.cdf_grid_[i] = x_lo + i * h;
        m.cdf_values_[i] = m.cdf_values_[i - 1] +
                           integrate(m.density_, m.cdf_grid_[i - 1], m.cdf_grid_[i], 1, 4);
    }
    for (auto& v : m.cdf_values_) v /= m.cdf_values_.back();
    return m;
}

double JumpMeasure::mass(double a, double b) const {
    if (!(a < b)) throw std::invalid_argument("JumpMeasure::mass: need a < b");
    if (is_atomic()) {
        double s = 0.0;
        for (const auto& at : atoms_)
            if (a < at.position && at.position <= b) s += at.intensity;
        return s;
    }
    const double lo = std::max(a, x_lo_), hi = std::min(b, x_hi_);
    if (lo >= hi) return 0.0;
    return integrate_checked(density_, lo, hi, panels_);
}

double JumpMeasure::first_moment(double a, double b) const {
    if (!(a < b)) throw std::invalid_argument("JumpMeasure::first_moment: need a < b");
    if (is_atomic()) {
        double s = 0.0;
        for (const auto& at : atoms_)
            if (a < at.position && at.position <= b) s += at.intensity * at.position;
        return s;
    }
    const double lo = std::max(a, x_lo_), hi = std::min(b, x_hi_);
    if (lo >= hi) return 0.0;
    return integrate_checked([&](double x) { return x * density_(x); }, lo, hi, panels_);
}

double JumpMeasure::x2_mass(double a, double b) const {
    if (!(a < b)) throw std::invalid_argument("JumpMeasure::x2_mass: need a < b");
    if (is_atomic()) {
        double s = 0.0;
        for (const auto& at : atoms_)
            if (a < at.position && at.position <= b) s += at.intensity * at.position * at.position;
        return s;
    }
    const double lo = std::max(a, x_lo_), hi = std::min(b, x_hi_);
    if (lo >= hi) return 0.0;
    return integrate_checked([&](double x) { return x * x * density_(x); }, lo, hi, panels_);
}

double JumpMeasure::integral(const std::function<double(double)>& h) const {
    if (is_atomic()) {
        double s = 0.0;
        for (const auto& at : atoms_) s += at.intensity * h(at.position);
        if (!std::isfinite(s)) throw std::runtime_error("nu integral: non-finite result");
        return s;
    }
    return integrate_checked([&](double x) { return h(x) * density_(x); }, x_lo_, x_hi_,
                             panels_);
}

double JumpMeasure::integral(const std::function<double(double)>& h, double a, double b) const {
    if (!(a < b)) throw std::invalid_argument("JumpMeasure::integral: need a < b");
    if (is_atomic()) {
        double s = 0.0;
        for (const auto& at : atoms_)
            if (a < at.position && at.position <= b) s += at.intensity * h(at.position);
        return s;
    }
    const double lo = std::max(a, x_lo_), hi = std::min(b, x_hi_);
    if (lo >= hi) return 0.0;
    return integrate_checked([&](double x) { return h(x) * density_(x); }, lo, hi, panels_);
}

double JumpMeasure::sample_size(double u) const {
    if (is_atomic()) {
        double target = u * total_mass_;
        double acc = 0.0;
        for (const auto& at : atoms_) {
            acc += at.intensity;
            if (target < acc) return at.position;
        }
        return atoms_.back().position;
    }
    auto it = std::upper_bound(cdf_values_.begin(), cdf_values_.end(), u);
    std::size_t i = static_cast<std::size_t>(
        std::clamp<std::ptrdiff_t>(it - cdf_values_.begin(), 1,
                                   static_cast<std::ptrdiff_t>(cdf_values_.size() - 1)));
    const double c0 = cdf_values_[i - 1], c1 = cdf_values_[i];
    const double frac = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
    return cdf_grid_[i - 1] + frac * (cdf_grid_[i] - cdf_grid_[i - 1]);
}

LevyTriplet::LevyTriplet(double drift, double sigma, JumpMeasure nu)
    : drift_(drift), sigma_(sigma), nu_(std::move(nu)) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("LevyTriplet: sigma must be >= 0");
    if (!std::isfinite(drift)) throw std::invalid_argument("LevyTriplet: drift must be finite");
    if (!(nu_.total_mass() > 0.0))
        throw std::invalid_argument("LevyTriplet: jump measure must have positive mass");
}

double LevyTriplet::gamma_truncated() const {
    if (nu_.is_atomic()) {
        double s = 0.0;
        for (const auto& at : nu_.atoms())
            if (std::abs(at.position) <= 1.0) s += at.intensity * at.position;
        return drift_ + s;
    }
    return drift_ + nu_.first_moment(std::nextafter(-1.0, -2.0), 1.0);
}

Rect::Rect(double t_lo_, double t_hi_, double x_lo_, double x_hi_)
    : t_lo(t_lo_), t_hi(t_hi_), x_lo(x_lo_), x_hi(x_hi_) {
    if (!(0.0 <= t_lo && t_lo < t_hi))
        throw std::invalid_argument("Rect: need 0 <= t_lo < t_hi");
    if (!(x_lo < x_hi)) throw std::invalid_argument("Rect: need x_lo < x_hi");
}

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
    const double t_lo = std::max(a.t_lo, b.t_lo);
    const double t_hi = std::min(a.t_hi, b.t_hi);
    const double x_lo = std::max(a.x_lo, b.x_lo);
    const double x_hi = std::min(a.x_hi, b.x_hi);
    if (t_lo >= t_hi || x_lo >= x_hi) return std::nullopt;
    return Rect(t_lo, t_hi, x_lo, x_hi);
}

double mu_measure(const LevyTriplet& triplet, double a, double b) {
    if (!(a < b)) throw std::invalid_argument("mu_measure: need a < b");
    double v = triplet.nu().x2_mass(a, b);
    if (a < 0.0 && 0.0 <= b) v += triplet.sigma() * triplet.sigma();
    if (!std::isfinite(v)) throw std::runtime_error("mu_measure: non-finite result");
    return v;
}

double m_measure(const LevyTriplet& triplet, const Rect& r) {
    return r.time_length() * mu_measure(triplet, r.x_lo, r.x_hi);
}

double m_measure_intersection(const LevyTriplet& triplet, const Rect& a, const Rect& b) {
    auto r = intersect(a, b);
    return r ? m_measure(triplet, *r) : 0.0;
}

double nu_integral(const LevyTriplet& triplet, const std::function<double(double)>& h) {
    return triplet.nu().integral(h);
}

}  // namespace levylab
