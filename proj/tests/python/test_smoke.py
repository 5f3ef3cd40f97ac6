import math

import pytest

import levylab as ll


@pytest.fixture()
def triplet():
    return ll.triplet_from_atoms(0.0, 1.0, [(1.0, 2.0), (-0.5, 1.0)])


def test_measures(triplet):
    # gaussian atom only
    assert ll.mu_measure(triplet, -0.4, 0.4) == pytest.approx(1.0, abs=1e-14)
    # atoms: 1^2 * 2 inside (0.5, 1.5]
    assert ll.mu_measure(triplet, 0.5, 1.5) == pytest.approx(2.0, abs=1e-14)
    r = ll.Rect(0.0, 2.0, -0.4, 0.4)
    assert ll.m_measure(triplet, r) == pytest.approx(2.0, abs=1e-14)
    assert r.contains_zero
    # uniform density: 3 * int_1^2 x^2 dx = 7
    dens = ll.triplet_from_uniform_density(0.0, 0.0, 3.0, 1.0, 2.0)
    assert ll.mu_measure(dens, 1.0, 2.0) == pytest.approx(7.0, rel=1e-10)
    assert ll.nu_integral(dens, lambda x: x) == pytest.approx(4.5, rel=1e-10)


def test_path_simulation_is_deterministic(triplet):
    a = ll.simulate_path(triplet, 2.0, [0.5, 1.0], 3, 42)
    b = ll.simulate_path(triplet, 2.0, [0.5, 1.0], 3, 42)
    assert a.value(1.0) == b.value(1.0)
    assert len(a.jumps) == len(b.jumps)
    assert a.increment(0.0, 1.0) + a.increment(1.0, 2.0) == pytest.approx(
        a.increment(0.0, 2.0), abs=1e-12
    )


def test_eval_m_pure_jump_hand_value():
    tr = ll.triplet_from_atoms(0.0, 0.0, [(1.0, 2.0)])
    p = ll.simulate_path(tr, 1.0, [], 0, 7)
    k = sum(1 for j in p.jumps if j.time <= 1.0)
    assert ll.eval_M(p, ll.Rect(0.0, 1.0, 0.5, 1.5)) == pytest.approx(k - 2.0, abs=1e-12)


def test_chaos_oracle(triplet):
    b1 = ll.Rect(0.0, 1.0, 0.5, 1.5)
    b2 = ll.Rect(1.0, 2.0, -1.0, 0.0)
    e = ll.ElementaryChaos([b1, b2], 1.0)
    target = ll.m_measure(triplet, b1) * ll.m_measure(triplet, b2)
    assert ll.inner_product(triplet, e, e) == pytest.approx(target, rel=1e-13)
    assert ll.d12_norm_sq(triplet, [e], ll.NormFlavor.FULL) == pytest.approx(
        3.0 * target, rel=1e-13
    )
    full = ll.d12_norm_sq(triplet, [e], ll.NormFlavor.FULL)
    zero = ll.d12_norm_sq(triplet, [e], ll.NormFlavor.ZERO_PART)
    jump = ll.d12_norm_sq(triplet, [e], ll.NormFlavor.JUMP_PART)
    l2 = ll.l2_norm_sq(triplet, [e])
    assert full == pytest.approx(zero + jump - l2, rel=1e-12)


def test_s2_norm(triplet):
    assert ll.s2_norm_formula(2, 2, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    a = [(0.75, 1.25), (-0.75, -0.25)]
    c = 3.0 * ll.mu_measure(triplet, *a[0]) * ll.mu_measure(triplet, *a[1])
    direct = ll.s2_norm_direct(triplet, 0.0, 1.0, a, [], 4)
    assert direct == pytest.approx(ll.s2_norm_formula(2, 4, 1.0, c), rel=1e-13)


def test_derivatives_and_gn():
    tr = ll.triplet_from_atoms(0.0, 0.0, [(1.0, 2.0)])
    phi = ll.bump_profile(0.5, 1.5, 0.7)
    assert phi(1.0) == pytest.approx(0.7, abs=1e-14)
    gn = ll.build_gn(tr, phi, 0.0, 1.0, 4)
    assert gn.expectation_stderr == 0.0
    expected = 4 * 0.7 * 0.5 * math.exp(-0.5)
    assert gn.expectation == pytest.approx(expected, rel=1e-10)
    oracle = ll.lemma4_pure_jump_oracle(tr, phi, 0.0, 1.0, 4)
    d = ll.lemma4_distance(tr, phi, 0.0, 1.0, 4, 1.0, 20000, 11)
    assert abs(d.mean - oracle) <= 4.0 * d.stderr


def test_mollifier_bounds():
    g = ll.LipschitzFn(lambda y: abs(y), 1.0)
    gn = ll.mollify(g, 8)
    grid = [(-2.0 + 4.0 * i / 400) for i in range(401)]
    assert max(abs(gn(y) - abs(y)) for y in grid) <= 1.0 / 8 + 1e-12
    assert max(abs(gn.deriv_at(y)) for y in grid) <= 1.0 + 1e-12


def test_run_experiment_rows():
    config = """
experiment = verify-isometry
seed = 99
reps = 20000
horizon = 3.0

[triplet]
sigma = 1.0
atoms = 1.0:2.0 -0.5:1.0

[params]
pairs = 3
"""
    rows = ll.run_experiment(config)
    assert len(rows) == 3
    assert all(r["pass"] for r in rows)
    names = [name for name, _ in ll.experiment_catalog()]
    assert len(names) == 11
    assert "theorem1-pipeline" in names
