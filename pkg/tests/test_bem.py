"""Single-layer operator assembly against independent oracles.

The kernel is checked against brute-force azimuthal quadrature of the 3D
Stokeslet, the assembled operator against the Stokes drag law for a sphere
and the bispherical-coordinate series for two spheres moving along their
common axis.
"""

import numpy as np
import pytest

from swimopt import _kernels, bem, bspline, geometry


def brute_ring(target, source, n=100_000):
    """Azimuthal trapezoid of the 3D Stokeslet, projected on (x, sigma)."""
    x0, s0 = target
    x1, s1 = source
    th = 2.0 * np.pi * np.arange(n) / n
    r = np.stack([np.full(n, x0 - x1),
                  s0 - s1 * np.cos(th),
                  -s1 * np.sin(th)], axis=1)
    d = np.linalg.norm(r, axis=1)
    eye_part = 1.0 / d
    out = np.empty((2, 2))
    # unit force along x, response along x / target radial (y at theta=0)
    gxx = eye_part + r[:, 0] ** 2 / d ** 3
    gyx = r[:, 1] * r[:, 0] / d ** 3
    # unit force along the source radial direction (cos th, sin th)
    fr = r[:, 1] * np.cos(th) + r[:, 2] * np.sin(th)
    gxr = eye_part * 0.0 + r[:, 0] * fr / d ** 3
    gyr = eye_part * np.cos(th) + r[:, 1] * fr / d ** 3
    h = 2.0 * np.pi / n
    out[0, 0] = gxx.sum() * h
    out[0, 1] = gxr.sum() * h
    out[1, 0] = gyx.sum() * h
    out[1, 1] = gyr.sum() * h
    return out


@pytest.mark.parametrize("target,source", [
    ((0.0, 1.0), (0.0, 2.0)),
    ((0.5, 0.8), (-0.3, 1.1)),
    ((0.0, 1.0), (0.05, 1.05)),
])
def test_ring_kernel_vs_azimuthal_quadrature(target, source):
    ker = bem.ring_stokeslet(np.array(target), np.array(source))
    ref = brute_ring(target, source)
    np.testing.assert_allclose(ker, ref, rtol=1e-9, atol=1e-12)


def test_ring_kernel_translation_invariance():
    t = np.array([0.3, 1.2])
    s = np.array([-0.4, 0.7])
    shift = np.array([5.0, 0.0])
    np.testing.assert_allclose(bem.ring_stokeslet(t + shift, s + shift),
                               bem.ring_stokeslet(t, s), rtol=1e-12)


def test_ring_kernel_scales_as_inverse_length():
    t = np.array([0.3, 1.2])
    s = np.array([-0.4, 0.7])
    np.testing.assert_allclose(bem.ring_stokeslet(2.0 * t, 2.0 * s),
                               0.5 * bem.ring_stokeslet(t, s), rtol=1e-13)


def test_ring_kernel_batched_matches_compiled():
    rng = np.random.default_rng(5)
    tx = rng.uniform(-1.0, 1.0, 40)
    ts = rng.uniform(0.2, 2.0, 40)
    sx = rng.uniform(-1.0, 1.0, 40)
    ss = rng.uniform(0.2, 2.0, 40)
    out = np.empty((40, 4))
    _kernels.ring_components(tx, ts, sx, ss, out)
    ref = bem.ring_stokeslet(np.stack([tx, ts], axis=-1),
                             np.stack([sx, ss], axis=-1))
    np.testing.assert_allclose(out.reshape(40, 2, 2), ref, rtol=1e-12)


@pytest.fixture(scope="module")
def sphere_op():
    curve = geometry.sphere_generator(1.0, 15)
    return bem.assemble(curve, 1.0)


def test_single_layer_symmetric(sphere_op):
    a = sphere_op.single_layer
    assert np.max(np.abs(a - a.T)) <= 1e-10 * np.max(np.abs(a))


def test_single_layer_positive_semidefinite(sphere_op):
    w = np.linalg.eigvalsh(sphere_op.single_layer)
    assert w[-1] > 0.0
    assert w[0] >= -1e-12 * w[-1]


def test_mass_matrix_spd(sphere_op):
    m = sphere_op.mass
    assert np.max(np.abs(m - m.T)) <= 1e-12 * np.max(np.abs(m))
    assert np.linalg.eigvalsh(m)[0] > 0.0


def test_sphere_drag(sphere_op):
    v = np.zeros(sphere_op.n_funcs * 2)
    v[0::2] = 1.0
    f = sphere_op.traction_for_velocity(v)
    drag = sphere_op.axial_force(f)
    assert drag == pytest.approx(6.0 * np.pi, rel=5e-3)


def test_sphere_drag_refinement_monotone():
    errs = []
    for n in (10, 15, 20, 30):
        curve = geometry.sphere_generator(1.0, n)
        op = bem.assemble(curve, 1.0)
        v = np.zeros(op.n_funcs * 2)
        v[0::2] = 1.0
        drag = op.axial_force(op.traction_for_velocity(v))
        errs.append(abs(drag - 6.0 * np.pi) / (6.0 * np.pi))
    assert all(b < a for a, b in zip(errs, errs[1:])), errs


def test_dissipation_nonnegative(sphere_op):
    rng = np.random.default_rng(11)
    for _ in range(100):
        v = rng.standard_normal(sphere_op.n_funcs * 2)
        f = sphere_op.traction_for_velocity(v)
        assert sphere_op.inner(v, f) >= 0.0


def test_solve_linearity(sphere_op):
    rng = np.random.default_rng(3)
    f1 = rng.standard_normal(sphere_op.n_funcs * 2)
    f2 = rng.standard_normal(sphere_op.n_funcs * 2)
    lhs = sphere_op.velocity_for_traction(f1 + f2)
    rhs = (sphere_op.velocity_for_traction(f1)
           + sphere_op.velocity_for_traction(f2))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12 * np.max(np.abs(lhs)))
    assert np.all(sphere_op.velocity_for_traction(np.zeros_like(f1)) == 0.0)


def test_normal_field_near_null():
    # single layer of the outward normal vanishes for a closed body; the
    # discrete residual must shrink roughly 4x when controls double
    res = []
    for n in (15, 30):
        curve = geometry.sphere_generator(1.0, n)
        op = bem.assemble(curve, 1.0)
        nh = op.normal_fields[0].reshape(-1)
        r = np.linalg.norm(op.single_layer @ nh)
        res.append(r / (np.linalg.norm(op.single_layer, 2) * np.linalg.norm(nh)))
    assert res[0] <= 1e-4
    assert res[0] / res[1] >= 2.5


def test_normal_velocity_small(sphere_op):
    # nd_map of the normal field: velocity below discretization error
    nh = sphere_op.normal_fields[0].reshape(-1)
    v = sphere_op.velocity_for_traction(nh)
    assert np.max(np.abs(v)) <= 5e-3 * np.max(np.abs(nh))


def test_translation_invariance():
    base = geometry.sphere_generator(1.0, 12)
    shifted = geometry.GeneratorCurve(base.basis,
                                      base.coeffs + [10.0, 0.0],
                                      base.closed_patches)
    op0 = bem.assemble(base, 1.0)
    op1 = bem.assemble(shifted, 1.0)
    v = np.zeros(op0.n_funcs * 2)
    v[0::2] = 1.0
    f0 = op0.traction_for_velocity(v)
    f1 = op1.traction_for_velocity(v)
    np.testing.assert_allclose(f1, f0, atol=1e-10 * np.max(np.abs(f0)))


def test_viscosity_scaling():
    curve = geometry.sphere_generator(1.0, 12)
    v = None
    drags = []
    for eta in (1.0, 3.5):
        op = bem.assemble(curve, eta)
        if v is None:
            v = np.zeros(op.n_funcs * 2)
            v[0::2] = 1.0
        drags.append(op.axial_force(op.traction_for_velocity(v)))
    assert drags[1] == pytest.approx(3.5 * drags[0], rel=1e-12)


def stimson_jeffery_factor(alpha, terms=2000):
    """Drag correction per sphere for two equal spheres moving along their
    line of centres at equal speed, from the exact bispherical series."""
    s = 0.0
    sh_a2 = np.sinh(alpha) ** 2
    sh_2a = np.sinh(2.0 * alpha)
    for n in range(1, terms + 1):
        k = n * (n + 1) / ((2 * n - 1) * (2 * n + 3))
        arg = (2 * n + 1) * alpha
        if arg > 350.0:
            break
        num = 2.0 * np.cosh(arg) - 2.0 - (2 * n + 1) ** 2 * sh_a2
        den = 2.0 * np.sinh(arg) + (2 * n + 1) * sh_2a
        term = k * (1.0 - num / den)
        s += term
        if abs(term) < 1e-17 * abs(s):
            break
    return (4.0 / 3.0) * np.sinh(alpha) * s


def two_sphere_curve(d, cpp):
    basis = bspline.build_basis(cpp, patch_breaks=(0.5,))
    one = geometry.sphere_generator(1.0, cpp)
    nfun = one.coeffs.shape[0]
    coeffs = np.zeros((basis.n_funcs, 2))
    coeffs[:nfun] = one.coeffs + [-d / 2.0, 0.0]
    coeffs[nfun:] = one.coeffs + [+d / 2.0, 0.0]
    return geometry.GeneratorCurve(basis, coeffs, (False, False))


def test_series_oracle_sanity():
    assert stimson_jeffery_factor(6.0) == pytest.approx(1.0, abs=5e-3)
    assert stimson_jeffery_factor(0.05) == pytest.approx(0.6449, abs=1e-3)


@pytest.mark.parametrize("gap", [4.0, 1.0, 0.2])
def test_two_sphere_axial_drag(gap):
    # validates sphere-sphere hydrodynamic interaction, including the
    # near-contact regime optimal strokes exploit
    d = 2.0 + gap
    lam = stimson_jeffery_factor(np.arccosh(d / 2.0))
    curve = two_sphere_curve(d, 20)
    op = bem.assemble(curve, 1.0)
    v = np.zeros(op.n_funcs * 2)
    v[0::2] = 1.0
    total = op.axial_force(op.traction_for_velocity(v))
    assert total / (12.0 * np.pi) == pytest.approx(lam, rel=1e-4)


def test_under_resolved_geometry_raises():
    # a rod meridian fit this coarse wobbles below the axis; assembly must
    # flag it instead of producing silent NaNs
    fam = geometry.make_family("stick_donut", geometry.equivalent_radius(0.05),
                               controls_per_patch=10)
    with pytest.raises(ValueError, match="too coarse"):
        bem.assemble(fam.curve(np.array([0.5, 0.5])), 1.0)


def test_touching_configuration_either_solves_or_reports():
    fam = geometry.ThreeSphereFamily(controls_per_patch=12)
    curve = fam.curve(np.array([1e-3, 1e-3]))
    op = bem.assemble(curve, 1.0)
    v = np.zeros(op.n_funcs * 2)
    v[0::2] = 1.0
    try:
        f = op.traction_for_velocity(v)
    except ArithmeticError:
        return
    drag = op.axial_force(f)
    assert np.isfinite(drag) and drag > 0.0
