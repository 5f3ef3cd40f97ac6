#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "levylab/levy_model.hpp"

using namespace levylab;

namespace {

LevyTriplet standard_triplet(double sigma = 1.0) {
    return LevyTriplet(0.0, sigma,
                       JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
}

}  // namespace

TEST_SUITE("levy_model") {

TEST_CASE("mu_measure: gaussian atom only") {
    LevyTriplet tr = standard_triplet(1.0);
    // no nu-mass in (-0.4, 0.4]
    CHECK(mu_measure(tr, -0.4, 0.4) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("mu_measure: single atom arithmetic") {
    LevyTriplet tr(0.0, 0.0, JumpMeasure::from_atoms({{1.0, 2.0}}));
    CHECK(mu_measure(tr, 0.5, 1.5) == doctest::Approx(2.0).epsilon(1e-15));
    // shifting the interval to exclude the atom drops everything
    CHECK(mu_measure(tr, 1.5, 2.5) == 0.0);
}

TEST_CASE("mu_measure: uniform density closed form") {
    // nu = 3 * uniform(1, 2]: int x^2 dnu = 3 (8 - 1) / 3 = 7
    auto nu = JumpMeasure::from_density([](double) { return 3.0; }, 1.0, 2.0, 16);
    LevyTriplet tr(0.0, 0.0, std::move(nu));
    CHECK(mu_measure(tr, 1.0, 2.0) == doctest::Approx(7.0).epsilon(1e-12));
}

TEST_CASE("mu_measure: interval containing zero picks up sigma^2") {
    LevyTriplet tr = standard_triplet(2.0);
    const double with_zero = mu_measure(tr, -0.25, 0.25);
    const double without = mu_measure(tr, 0.001, 0.25);
    CHECK(with_zero - without == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("nu_integral: atoms exact") {
    LevyTriplet tr(0.0, 0.0, JumpMeasure::from_atoms({{1.0, 2.0}}));
    CHECK(nu_integral(tr, [](double x) { return x * 0.7; }) ==
          doctest::Approx(1.4).epsilon(1e-15));
    LevyTriplet tr2(0.0, 0.0, JumpMeasure::from_atoms({{1.0, 2.0}, {-1.0, 1.0}}));
    CHECK(nu_integral(tr2, [](double x) { return x * x; }) ==
          doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("nu_integral: density closed form and panel doubling") {
    auto nu = JumpMeasure::from_density([](double) { return 3.0; }, 1.0, 2.0, 8);
    LevyTriplet tr(0.0, 0.0, std::move(nu));
    CHECK(nu_integral(tr, [](double x) { return x; }) ==
          doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("nu_integral: atoms unaffected by quadrature settings") {
    auto a = JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}});
    auto h = [](double x) { return std::sin(3.0 * x) + x * x; };
    const double v = a.integral(h);
    CHECK(v == a.integral(h));  // bit-identical: no quadrature involved
}

TEST_CASE("m_measure: product of length and mu") {
    LevyTriplet tr = standard_triplet(1.0);
    Rect r(0.0, 2.0, -0.4, 0.4);
    CHECK(m_measure(tr, r) == doctest::Approx(2.0).epsilon(1e-15));
    LevyTriplet tr2(0.0, 0.0, JumpMeasure::from_atoms({{1.0, 2.0}}));
    CHECK(m_measure(tr2, Rect(1.0, 3.0, 0.5, 1.5)) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("m_measure: empty intersection is zero") {
    LevyTriplet tr = standard_triplet();
    Rect r1(0.0, 1.0, 0.0, 1.0), r2(2.0, 3.0, 0.0, 1.0);
    CHECK(m_measure_intersection(tr, r1, r2) == 0.0);
}

TEST_CASE("m_measure: finite additivity and monotonicity on random grids") {
    LevyTriplet tr = standard_triplet(0.7);
    std::mt19937_64 eng(42);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        double t0 = 3.0 * U(eng), t1 = t0 + 0.1 + U(eng);
        double x0 = -2.0 + 2.0 * U(eng), x1 = x0 + 0.1 + 2.0 * U(eng);
        Rect whole(t0, t1, x0, x1);
        // split into a 2x2 grid of disjoint half-open cells
        const double tm = 0.5 * (t0 + t1), xm = 0.5 * (x0 + x1);
        double sum = 0.0;
        sum += m_measure(tr, Rect(t0, tm, x0, xm));
        sum += m_measure(tr, Rect(tm, t1, x0, xm));
        sum += m_measure(tr, Rect(t0, tm, xm, x1));
        sum += m_measure(tr, Rect(tm, t1, xm, x1));
        CHECK(sum == doctest::Approx(m_measure(tr, whole)).epsilon(1e-12));
        // monotone under inclusion
        CHECK(m_measure(tr, Rect(t0, tm, x0, xm)) <= m_measure(tr, whole) + 1e-15);
    }
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(JumpMeasure::from_atoms({}), std::invalid_argument);
    CHECK_THROWS_AS(JumpMeasure::from_atoms({{0.0, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(JumpMeasure::from_atoms({{1.0, -2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(JumpMeasure::from_density([](double) { return 1.0; }, -1.0, 1.0, 8),
                    std::invalid_argument);
    CHECK_THROWS_AS(LevyTriplet(0.0, -1.0, JumpMeasure::from_atoms({{1.0, 1.0}})),
                    std::invalid_argument);
    CHECK_THROWS_AS(Rect(1.0, 0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Rect(0.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("rect: derived zero flag and intersection") {
    Rect r(0.0, 1.0, -0.5, 0.0);
    CHECK(r.contains_zero());  // half-open: x in (-0.5, 0]
    Rect r2(0.0, 1.0, 0.0, 1.0);
    CHECK_FALSE(r2.contains_zero());
    auto inter = intersect(Rect(0.0, 2.0, -1.0, 1.0), Rect(1.0, 3.0, 0.0, 2.0));
    REQUIRE(inter.has_value());
    CHECK(inter->t_lo == 1.0);
    CHECK(inter->t_hi == 2.0);
    CHECK(inter->x_lo == 0.0);
    CHECK(inter->x_hi == 1.0);
}

TEST_CASE("gamma conversion under the standard truncation") {
    LevyTriplet tr(0.25, 1.0, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}, {3.0, 5.0}}));
    // atoms with |x| <= 1: 1.0 * 2.0 + (-0.5) * 1.0 = 1.5
    CHECK(tr.gamma_truncated() == doctest::Approx(0.25 + 1.5).epsilon(1e-15));
}

}  // TEST_SUITE
