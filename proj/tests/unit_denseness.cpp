#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "levylab/denseness.hpp"

using namespace levylab;

namespace {

LevyTriplet standard_triplet(double sigma = 1.0) {
    return LevyTriplet(0.0, sigma, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
}

LevyTriplet pure_jump(double lambda) {
    return LevyTriplet(0.0, 0.0, JumpMeasure::from_atoms({{1.0, lambda}}));
}

}  // namespace

TEST_SUITE("denseness") {

TEST_CASE("partition: uniform endpoints and mesh") {
    Partition p = Partition::uniform(0.5, 1.5, 4);
    CHECK(p.points.size() == 5);
    CHECK(p.points.front() == 0.5);
    CHECK(p.points.back() == 1.5);
    CHECK(p.mesh() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(Partition::uniform(1.0, 0.5, 4), std::invalid_argument);
}

TEST_CASE("smooth indicator: sandwich 1_C <= phi <= 1_U on a dense grid") {
    LevyTriplet tr = standard_triplet();
    SmoothIndicator si = make_smooth_indicator(tr, 0.5, 1.5, 0.2);
    for (int i = 0; i <= 4000; ++i) {
        const double x = -1.0 + 3.0 * i / 4000.0;
        const double v = si.profile.value(x);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        if (si.c_lo <= x && x <= si.c_hi) CHECK(v == 1.0);
        if (x <= si.u_lo || x >= si.u_hi) CHECK(v == 0.0);
    }
}

TEST_CASE("smooth indicator: slack counts exactly the ramp mass") {
    LevyTriplet tr = standard_triplet(1.0);
    // atoms at 1 and -0.5; A = (0.5, 1.5] with w = 0.2 leaves both ramps empty
    CHECK(make_smooth_indicator(tr, 0.5, 1.5, 0.2).slack == 0.0);
    // w = 0.45: rise (0.5, 0.95), fall (1.05, 1.5) - atom at 1 still outside
    CHECK(make_smooth_indicator(tr, 0.5, 1.5, 0.45).slack == 0.0);
    // A = (-1, -0.25], w = 0.3: fall ramp (-0.55, -0.25] catches the atom at -0.5
    CHECK(make_smooth_indicator(tr, -1.0, -0.25, 0.3).slack ==
          doctest::Approx(0.25).epsilon(1e-14));
    // gaussian atom: A = (-0.4, 0.6], w = 0.45: rise (-0.4, 0.05) contains 0
    CHECK(make_smooth_indicator(tr, -0.4, 0.6, 0.45).slack ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("indicator_for_slack: shrinks the ramp until the request is met") {
    LevyTriplet tr = standard_triplet();
    SmoothIndicator si = indicator_for_slack(tr, -1.0, -0.25, 0.01);
    CHECK(si.slack <= 0.01);
    CHECK(si.profile.value(-0.5) == 1.0);  // atom safely on the plateau
}

TEST_CASE("cutoff: beta properties on a grid") {
    CutoffFn cut(3);
    double max_slope = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double x = -6.0 + 12.0 * i / 10000.0;
        const double b = cut.beta(x);
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
        if (std::abs(x) <= 3.0) CHECK(b == 1.0);
        if (std::abs(x) >= 5.0) CHECK(b == 0.0);
        max_slope = std::max(max_slope, std::abs(cut.beta_deriv(x)));
    }
    CHECK(max_slope <= 1.0);
}

TEST_CASE("cutoff: alpha is 1 on bounded paths and apply matches f * alpha") {
    LevyTriplet tr = standard_triplet();
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    BuiltGn gn = build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, 4));
    CutoffFn big(50), small(1);
    SmoothFunctional cut_big = big.apply(gn.functional);
    SmoothFunctional cut_small = small.apply(gn.functional);
    for (std::uint64_t i = 0; i < 30; ++i) {
        Path p = simulate_path(tr, 1.0, gn.fast.required_times, i, 61);
        const double raw = gn.functional.eval_on(p);
        CHECK(cut_big.eval_on(p) == raw);  // alpha = 1 pathwise at a huge level
        std::vector<double> y(gn.functional.times().size());
        for (std::size_t k = 0; k < y.size(); ++k) y[k] = p.value(gn.functional.times()[k]);
        CHECK(cut_small.eval_on(p) ==
              doctest::Approx(raw * small.alpha(y)).epsilon(1e-14));
    }
}

TEST_CASE("build_Gn: pure-jump hand evaluation on single-jump cells") {
    const double lambda = 2.0;
    LevyTriplet tr = pure_jump(lambda);
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    BuiltGn gn = build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, 4));
    CHECK(gn.expectation_stderr == 0.0);
    // E sum psi = cells * 0.7 * (lambda h) e^{-lambda h}
    const double h = 0.25;
    const double expected = 4.0 * 0.7 * lambda * h * std::exp(-lambda * h);
    CHECK(gn.expectation == doctest::Approx(expected).epsilon(1e-12));
    for (std::uint64_t i = 0; i < 40; ++i) {
        Path p = simulate_path(tr, 1.0, gn.fast.required_times, i, 67);
        // per-cell counts
        bool single = true;
        double count = 0.0;
        for (std::size_t j = 1; j < gn.partition.points.size(); ++j) {
            double c = 0.0;
            for (const auto& jp : p.jumps())
                if (gn.partition.points[j - 1] < jp.time &&
                    jp.time <= gn.partition.points[j])
                    c += 1.0;
            if (c > 1.5) single = false;
            count += c > 0.5 ? 1.0 : 0.0;
        }
        if (single)
            CHECK(gn.functional.eval_on(p) ==
                  doctest::Approx(0.7 * count - gn.expectation).epsilon(1e-12));
    }
}

TEST_CASE("build_Gn: no-jump flat path gives the negated expectation") {
    LevyTriplet tr = pure_jump(1.0);
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    BuiltGn gn = build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, 4));
    auto shared = std::make_shared<const LevyTriplet>(tr);
    Path flat(shared, 1.0, gn.partition.points,
              std::vector<double>(gn.partition.points.size(), 0.0), {});
    CHECK(gn.functional.eval_on(flat) == doctest::Approx(-gn.expectation).epsilon(1e-15));
    PathEvaluator ev = gn.fast.bind(flat);
    CHECK(ev.value == doctest::Approx(-gn.expectation).epsilon(1e-15));
}

TEST_CASE("build_Gn: fast evaluator agrees with the smooth functional") {
    LevyTriplet tr(0.1, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}}));
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    BuiltGn gn = build_Gn(tr, phi, 0.25, 1.25, Partition::uniform(0.25, 1.25, 8));
    PathFunctional generic = from_smooth(gn.functional);
    for (std::uint64_t i = 0; i < 25; ++i) {
        Path p = simulate_path(tr, 1.5, gn.fast.required_times, i, 71);
        PathEvaluator fast = gn.fast.bind(p);
        PathEvaluator slow = generic.bind(p);
        CHECK(std::abs(fast.value - slow.value) <= 1e-12 * (1.0 + std::abs(slow.value)));
        for (double t : {0.1, 0.3, 0.6, 1.0, 1.25, 1.4}) {
            for (double x : {0.0, 1.0, 0.4}) {
                const double a = fast.deriv(t, x);
                const double b = slow.deriv(t, x);
                CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
            }
        }
    }
}

TEST_CASE("build_Gn: gaussian part of the expectation via quadrature") {
    // sigma > 0, no reachable jumps inside the bump: E psi(DX) is a pure
    // gaussian integral; compare against a dense direct quadrature here
    LevyTriplet tr(0.0, 1.0, JumpMeasure::from_atoms({{10.0, 0.5}}));
    Profile phi = bump_profile(-0.5, 0.5, 1.0);
    BuiltGn gn = build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, 1));
    const double sd = 1.0;
    // P(no jump) E psi(sd Z) + P(one jump) E psi(10 + sd Z) (second term is 0)
    const double p0 = std::exp(-0.5);
    double acc = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = -8.0 + 16.0 * (i + 0.5) / n;
        acc += phi.psi(sd * z) * std::exp(-0.5 * z * z) * (16.0 / n);
    }
    acc /= std::sqrt(2.0 * 3.14159265358979323846);
    CHECK(gn.expectation == doctest::Approx(p0 * acc).epsilon(1e-6));
}

TEST_CASE("d12_distance_sq: identical functionals give zero with zero stderr") {
    LevyTriplet tr = standard_triplet();
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    PathFunctional g = from_separable(SeparableKernel(0.0, 1.0, phi));
    MCEstimate d = d12_distance_sq(g, g, tr, 1.0, 500, 77);
    CHECK(d.mean == 0.0);
    CHECK(d.stderr_ == 0.0);
}

TEST_CASE("lemma4 pure-jump oracle matches the closed form") {
    const double lambda = 2.0, h = 0.25;
    const int cells = 4;
    LevyTriplet tr = pure_jump(lambda);
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    const double p0 = std::exp(-lambda * h);
    const double p1 = lambda * h * p0;
    const double ez = 0.7 * (lambda * h - p1);
    const double ez2 = 0.49 * (lambda * h + lambda * h * lambda * h - p1);
    const double var_z = ez2 - ez * ez;
    const double edd2 = 0.49 * (3.0 * p1 + 1.0 - p0);
    const double expected = cells * var_z + lambda * 1.0 * edd2;
    CHECK(lemma4_pure_jump_oracle(tr, phi, 0.0, 1.0, cells) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("lemma4: measured distance matches the pure-jump oracle") {
    LevyTriplet tr = pure_jump(2.0);
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    PathFunctional target = from_separable(SeparableKernel(0.0, 1.0, phi));
    for (int cells : {4, 16}) {
        BuiltGn gn = build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, cells));
        MCEstimate d = d12_distance_sq(target, gn.fast, tr, 1.0, 60000, 83);
        const double oracle = lemma4_pure_jump_oracle(tr, phi, 0.0, 1.0, cells);
        CHECK(std::abs(d.mean - oracle) <= 4.0 * d.stderr_);
    }
}

TEST_CASE("lemma4_error_terms: zero part vanishes identically when sigma = 0") {
    LevyTriplet tr = pure_jump(2.0);
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    Lemma4ErrorTerms t = lemma4_error_terms(tr, phi, 0.0, 1.0,
                                            Partition::uniform(0.0, 1.0, 4), 1.0, 2000,
                                            91);
    CHECK(t.zero_part.mean == 0.0);
    CHECK(t.zero_part.stderr_ == 0.0);
    CHECK(t.jump_part.mean > 0.0);
    CHECK(t.max_jump_ratio <= 1.0);
}

TEST_CASE("lemma4_error_terms: domination holds with sigma > 0") {
    LevyTriplet tr(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}}));
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    Lemma4ErrorTerms t = lemma4_error_terms(tr, phi, 0.0, 1.0,
                                            Partition::uniform(0.0, 1.0, 8), 1.0, 5000,
                                            97);
    CHECK(t.max_zero_ratio <= 1.0);
    CHECK(t.max_jump_ratio <= 1.0);
    CHECK(t.zero_part.mean > 0.0);
}

TEST_CASE("disjointify: m=2 N=2 structure and norm") {
    LevyTriplet tr = standard_triplet();
    std::vector<std::pair<double, double>> a{{0.5, 1.5}, {-0.75, -0.25}};
    Disjointified d = disjointify(tr, 0.0, 1.0, a, {}, 2);
    CHECK(d.s1.size() == 2);  // ordered distinct pairs (1,2) and (2,1)
    const double mu1 = mu_measure(tr, 0.5, 1.5), mu2 = mu_measure(tr, -0.75, -0.25);
    CHECK(d.s2_norm == doctest::Approx(3.0 * mu1 * mu2 * 0.5).epsilon(1e-13));
    // N = 1: no distinct tuples remain
    Disjointified d1 = disjointify(tr, 0.0, 1.0, a, {}, 1);
    CHECK(d1.s1.empty());
    CHECK(d1.s2_norm == doctest::Approx(3.0 * mu1 * mu2).epsilon(1e-13));
}

TEST_CASE("theorem1_pipeline: smoke on a single-factor target") {
    LevyTriplet tr(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}, {-0.5, 1.0}}));
    std::vector<Rect> target{Rect(0.0, 1.0, 0.5, 1.5)};
    PipelineResult pr =
        theorem1_pipeline(tr, target, 0.01, 0.25, 8, 1.0, 20000, 103);
    CHECK(pr.distance.mean >= 0.0);
    CHECK(pr.slacks.size() == 1);
    CHECK(pr.slacks[0] <= 0.01);
    CHECK(pr.tensor_l2_error == 0.0);  // atoms sit on the plateau
    CHECK(pr.smoothing_bound == 0.0);
    CHECK(pr.smoothing_distance.mean <= pr.smoothing_bound +
                                            4.0 * pr.smoothing_distance.stderr_);
    CHECK(pr.approximant.smoothness() == Smoothness::CompactSupportSmooth);
}

TEST_CASE("product_independence_check: disjoint factors pass") {
    LevyTriplet tr(0.0, 0.5, JumpMeasure::from_atoms({{1.0, 2.0}}));
    Profile phi = bump_profile(0.5, 1.5, 0.7);
    std::vector<BuiltGn> gs;
    gs.push_back(build_Gn(tr, phi, 0.0, 1.0, Partition::uniform(0.0, 1.0, 4)));
    gs.push_back(build_Gn(tr, phi, 1.0, 2.0, Partition::uniform(1.0, 2.0, 4)));
    IndependenceReport rep = product_independence_check(tr, gs, 2.0, 20000, 107);
    CHECK(rep.max_cross_term == 0.0);
    CHECK(rep.max_product_rule_residual <= 1e-12);
    CHECK(std::abs(rep.factor_product_mean.mean) <=
          4.0 * rep.factor_product_mean.stderr_);
    CHECK(rep.pass);
}

}  // TEST_SUITE
