#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace levylab {

/// One atom of a finite-activity jump measure: intensity*delta_{position}.
struct JumpAtom {
    double position;   // != 0
    double intensity;  // > 0
};

/// Finite-activity jump measure nu, either purely atomic or given by a
/// density on a compact interval bounded away from 0. Total mass and the
/// second moment are finite by construction; density integrals are composite
/// Gauss-Legendre validated by panel doubling.
class JumpMeasure {
  public:
    static JumpMeasure from_atoms(std::vector<JumpAtom> atoms);
    static JumpMeasure from_density(std::function<double(double)> density, double x_lo,
                                    double x_hi, int panels);

    bool is_atomic() const { return density_ == nullptr; }
    const std::vector<JumpAtom>& atoms() const { return atoms_; }

    double total_mass() const { return total_mass_; }      // nu(R)
    double second_moment() const { return second_moment_; }  // int x^2 dnu

    /// nu((a, b]).
    double mass(double a, double b) const;
    /// int_(a,b] x dnu.
    double first_moment(double a, double b) const;
    /// int_(a,b] x^2 dnu.
    double x2_mass(double a, double b) const;
    /// int h dnu; exact for atoms, panel-doubling-checked quadrature otherwise.
    double integral(const std::function<double(double)>& h) const;
    double integral(const std::function<double(double)>& h, double a, double b) const;

    // Density access for quadrature-based callers; only valid when !is_atomic().
    double density_at(double x) const { return density_(x); }
    double support_lo() const { return x_lo_; }
    double support_hi() const { return x_hi_; }
    int panels() const { return panels_; }

    /// Draws one jump size from nu / nu(R); `u` uniform on [0, 1).
    double sample_size(double u) const;

  private:
    JumpMeasure() = default;

    std::vector<JumpAtom> atoms_;
    std::function<double(double)> density_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
    int panels_ = 0;
    double total_mass_ = 0.0;
    double second_moment_ = 0.0;
    // Tabulated CDF for density sampling (piecewise linear inverse).
    std::vector<double> cdf_grid_;
    std::vector<double> cdf_values_;
};

/// Levy process model: X_t = b*t + sigma*W_t + sum of jumps. The drift b is
/// the genuine linear drift of the finite-activity decomposition; the
/// conventional characteristic gamma under the standard truncation is
/// gamma = b + int_{|x|<=1} x dnu.
class LevyTriplet {
  public:
    LevyTriplet(double drift, double sigma, JumpMeasure nu);

    double drift() const { return drift_; }
    double sigma() const { return sigma_; }
    const JumpMeasure& nu() const { return nu_; }

    /// gamma = b + int_{|x|<=1} x dnu (standard truncation convention).
    double gamma_truncated() const;

  private:
    double drift_;
    double sigma_;
    JumpMeasure nu_;
};

/// Half-open rectangle (t_lo, t_hi] x (x_lo, x_hi] in time-size space.
struct Rect {
    double t_lo, t_hi;
    double x_lo, x_hi;

    Rect(double t_lo, double t_hi, double x_lo, double x_hi);

    bool contains_zero() const { return x_lo < 0.0 && 0.0 <= x_hi; }
    double time_length() const { return t_hi - t_lo; }
    bool contains(double t, double x) const {
        return t_lo < t && t <= t_hi && x_lo < x && x <= x_hi;
    }
};

/// Intersection of two rectangles, empty -> nullopt.
std::optional<Rect> intersect(const Rect& a, const Rect& b);

/// mu((a, b]) = sigma^2 * 1{a < 0 <= b} + int_(a,b] x^2 dnu.
double mu_measure(const LevyTriplet& triplet, double a, double b);

/// m(r) = (t_hi - t_lo) * mu((x_lo, x_hi]).
double m_measure(const LevyTriplet& triplet, const Rect& r);

/// m of the intersection, 0 when empty.
double m_measure_intersection(const LevyTriplet& triplet, const Rect& a, const Rect& b);

/// int h dnu.
double nu_integral(const LevyTriplet& triplet, const std::function<double(double)>& h);

}  // namespace levylab
