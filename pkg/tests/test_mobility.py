"""Reduced-model checks: the condensed (V, G) pair on the parameter plane."""

import numpy as np
import pytest

from swimopt import geometry, mobility

CPP = 10


@pytest.fixture(scope="module")
def three_sphere():
    return geometry.make_family("three_sphere", 0.05, controls_per_patch=CPP)


@pytest.fixture(scope="module")
def stick_donut():
    # the rod meridian needs a few more controls than the spheres do
    return geometry.make_family("stick_donut", geometry.equivalent_radius(0.05),
                                controls_per_patch=12)


def _interior_points(family, count, seed):
    rng = np.random.default_rng(seed)
    span = family.upper - family.lower
    return family.lower + span * rng.uniform(0.15, 0.85, (count, family.n_params))


def test_power_metric_spd_three_sphere(three_sphere):
    for xi in _interior_points(three_sphere, 6, 1):
        g = mobility.reduced_model(three_sphere, xi).G
        np.testing.assert_allclose(g, g.T, atol=1e-14 * np.max(np.abs(g)))
        assert np.linalg.eigvalsh(g)[0] > 0.0


def test_power_metric_spd_stick_donut(stick_donut):
    for xi in _interior_points(stick_donut, 6, 2):
        g = mobility.reduced_model(stick_donut, xi).G
        np.testing.assert_allclose(g, g.T, atol=1e-14 * np.max(np.abs(g)))
        assert np.linalg.eigvalsh(g)[0] > 0.0


def test_axial_drag_positive(three_sphere, stick_donut):
    for fam in (three_sphere, stick_donut):
        xi = 0.5 * (fam.lower + fam.upper)
        assert mobility.reduced_model(fam, xi).axial_drag > 0.0


@pytest.mark.parametrize("name", ["three_sphere", "stick_donut"])
def test_translation_leaves_model_invariant(name, three_sphere, stick_donut):
    # swimming speed and dissipation cannot depend on where the body sits
    fam = three_sphere if name == "three_sphere" else stick_donut
    xi = fam.lower + 0.4 * (fam.upper - fam.lower)
    a = mobility.reduced_model(fam, xi, phi=0.0)
    b = mobility.reduced_model(fam, xi, phi=0.7)
    np.testing.assert_allclose(b.V, a.V, atol=1e-10 * np.max(np.abs(a.V)))
    np.testing.assert_allclose(b.G, a.G, atol=1e-10 * np.max(np.abs(a.G)))


def test_three_sphere_mirror_antisymmetry(three_sphere):
    # swapping the two gaps mirrors the body end for end
    xi = np.array([0.11, 0.23])
    a = mobility.reduced_model(three_sphere, xi)
    b = mobility.reduced_model(three_sphere, xi[::-1])
    assert a.V[0] == pytest.approx(-b.V[1], rel=1e-10)
    assert a.V[1] == pytest.approx(-b.V[0], rel=1e-10)
    assert a.G[0, 0] == pytest.approx(b.G[1, 1], rel=1e-10)
    assert a.G[0, 1] == pytest.approx(b.G[1, 0], rel=1e-10)


def test_dissipation_positive_along_random_rates(three_sphere):
    rng = np.random.default_rng(7)
    xi = np.array([0.1, 0.2])
    g = mobility.reduced_model(three_sphere, xi).G
    for _ in range(20):
        rate = rng.standard_normal(2)
        assert rate @ g @ rate > 0.0


def test_viscosity_scales_power_not_speed(three_sphere):
    xi = np.array([0.15, 0.1])
    a = mobility.reduced_model(three_sphere, xi, viscosity=1.0)
    b = mobility.reduced_model(three_sphere, xi, viscosity=2.5)
    np.testing.assert_allclose(b.V, a.V, rtol=1e-12)
    np.testing.assert_allclose(b.G, 2.5 * a.G, rtol=1e-12)
    assert b.axial_drag == pytest.approx(2.5 * a.axial_drag, rel=1e-12)


def test_evaluator_memoizes(three_sphere):
    ev = mobility.ReducedEvaluator(three_sphere)
    xi = np.array([0.12, 0.18])
    first = ev(xi)
    assert ev.solve_count == 1
    again = ev(xi.copy())
    assert again is first
    assert ev.solve_count == 1
    # keys round at the 12th decimal, so noise-level changes share a solve
    assert ev(xi + 1e-14) is first
    assert ev.solve_count == 1
    ev(xi + 1e-3)
    assert ev.solve_count == 2
