"""Axisymmetric swimmer geometries.

A shape family maps a small parameter vector ``xi`` plus an axial position
``phi`` to a generator curve in the (x, sigma) half plane, discretized on a
fixed B-spline basis. Patches are traversed left to right over the top, so
the outward normal is (-tau_sigma, tau_x) / |tau|. Lengths are millimetres.

Two families are provided: three collinear spheres whose gaps are the two
shape parameters, and a rod with a coaxial ring whose axial position and
cross-section aspect are the parameters. Both keep the volume of every body
fixed along any parameter path.
"""

from dataclasses import dataclass

import numpy as np

from . import bspline

# boundary samples per spline coefficient when fitting a patch
SAMPLE_FACTOR = 10

_FD_STEP = 1e-6


@dataclass(frozen=True)
class GeneratorCurve:
    """A meridian curve on a spline basis; coeffs[:, 0] is x, [:, 1] sigma."""

    basis: bspline.BasisSet
    coeffs: np.ndarray
    closed_patches: tuple

    def evaluate(self, t, order=0):
        return bspline.eval_curve(self.basis, self.coeffs, t, order)

    def unit_tangent(self, t):
        d = bspline.eval_curve(self.basis, self.coeffs, t, 1)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def outward_normal(self, t):
        tau = self.unit_tangent(t)
        return np.stack([-tau[..., 1], tau[..., 0]], axis=-1)


def enclosed_volume(curve):
    """Total volume of revolution enclosed by the generator patches."""
    basis = curve.basis
    total = 0.0
    t0, w0 = np.polynomial.legendre.leggauss(8)
    for a, b in basis.spans:
        t = 0.5 * (b - a) * (t0 + 1.0) + a
        w = 0.5 * (b - a) * w0
        xy = bspline.eval_curve(basis, curve.coeffs, t)
        d = bspline.eval_curve(basis, curve.coeffs, t, 1)
        total += np.sum(w * xy[:, 1] ** 2 * d[:, 0])
    return np.pi * total


def patch_function_range(basis, patch):
    """Half-open index range of the basis functions supported on a patch."""
    idx = np.nonzero(basis.func_patch == patch)[0]
    return int(idx[0]), int(idx[-1]) + 1


class _PatchFitter:
    """Least-squares projection of a parametric arc onto one patch's basis.

    mode 'cap' pins both endpoint coefficients to the exact curve endpoints
    (used for arcs that start and end on the axis); mode 'closed' shares the
    first and last coefficient so the loop closes exactly.

    Cap arcs are sampled through a smoothstep reparametrization whose speed
    vanishes at the patch ends. The radius then leaves the axis quadratically
    in the spline parameter, so assembly integrands (which carry half powers
    of the radius) stay smooth and quadrature converges at full order.
    """

    def __init__(self, basis, patch, mode):
        lo, hi = basis.patch_bounds[patch], basis.patch_bounds[patch + 1]
        f_lo, f_hi = patch_function_range(basis, patch)
        n = f_hi - f_lo
        u = np.linspace(0.0, 1.0, SAMPLE_FACTOR * n + 2)[1:-1]
        if mode == "cap":
            # cluster collocation toward the ends; keeps the flat-ended
            # reparametrized arc from being fit with a negative-radius dip
            u = 0.5 - 0.5 * np.cos(np.pi * u)
        ts = lo + (hi - lo) * u
        design = bspline.basis_matrix(basis, ts)[:, f_lo:f_hi]
        self.mode = mode
        self.bounds = (lo, hi)
        self.funcs = (f_lo, f_hi)
        if mode == "cap":
            u = (ts - lo) / (hi - lo)
            ts = lo + (hi - lo) * u * u * (3.0 - 2.0 * u)
        self.ts = ts
        if mode == "cap":
            self._edge = design[:, [0, -1]]
            self._pinv = np.linalg.pinv(design[:, 1:-1])
        elif mode == "closed":
            merged = design[:, :-1].copy()
            merged[:, 0] += design[:, -1]
            self._pinv = np.linalg.pinv(merged)
        else:
            raise ValueError(f"unknown fit mode {mode!r}")

    def fit(self, arc):
        """arc(ts) -> (n_samples, 2); returns this patch's coefficient block."""
        vals = arc(self.ts)
        if self.mode == "cap":
            ends = np.stack([arc(np.array([self.bounds[0]]))[0],
                             arc(np.array([self.bounds[1]]))[0]])
            inner = self._pinv @ (vals - self._edge @ ends)
            return np.concatenate([ends[:1], inner, ends[1:]])
        sol = self._pinv @ vals
        return np.concatenate([sol, sol[:1]])


class ShapeFamily:
    """Parametrized geometry: box-bounded xi, spline curves, velocity fields."""

    name = ""

    def __init__(self, basis, lower, upper, closed_patches):
        self.basis = basis
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.closed_patches = tuple(closed_patches)

    @property
    def n_params(self):
        return self.lower.size

    def curve(self, xi, phi=0.0):
        return GeneratorCurve(self.basis, self.coefficients(xi, phi),
                              self.closed_patches)

    def coefficients(self, xi, phi=0.0):
        raise NotImplementedError

    def shape_velocity_fields(self, xi):
        """d(coefficients)/d(xi_i) at fixed phi, stacked (n_params, M, 2)."""
        raise NotImplementedError

    def axis_field(self):
        """Coefficients of the unit axial vector field."""
        e = np.zeros((self.basis.n_funcs, 2))
        e[:, 0] = 1.0
        return e


class ThreeSphereFamily(ShapeFamily):
    """Three collinear spheres of radius a; xi are the two surface gaps.

    The middle sphere is the reference body, phi its centre. The outer
    spheres sit at gap xi[0] to the left and xi[1] to the right, so the
    shape velocity fields are rigid translations of the outer spheres.
    """

    name = "three_sphere"

    def __init__(self, sphere_radius=0.05, controls_per_patch=15):
        basis = bspline.build_basis(controls_per_patch,
                                    patch_breaks=(1.0 / 3.0, 2.0 / 3.0))
        a = float(sphere_radius)
        super().__init__(basis, [0.0, 0.0], [6.0 * a, 6.0 * a],
                         (False, False, False))
        self.sphere_radius = a

        # reference configuration: xi = 0, phi = 0, spheres touching
        coeffs = np.zeros((basis.n_funcs, 2))
        masks = []
        for p, centre in enumerate([-2.0 * a, 0.0, 2.0 * a]):
            fitter = _PatchFitter(basis, p, "cap")
            lo = fitter.bounds[0]

            def f(ts, c=centre, lo=lo):
                u = 3.0 * np.pi * (ts - lo)
                return np.stack([c - a * np.cos(u), a * np.sin(u)], axis=-1)

            f_lo, f_hi = fitter.funcs
            coeffs[f_lo:f_hi] = fitter.fit(f)
            m = np.zeros(basis.n_funcs)
            m[f_lo:f_hi] = 1.0
            masks.append(m)
        self._base = coeffs
        d1 = np.zeros_like(coeffs)
        d1[:, 0] = -masks[0]
        d2 = np.zeros_like(coeffs)
        d2[:, 0] = masks[2]
        self._d_xi = np.stack([d1, d2])

    def coefficients(self, xi, phi=0.0):
        c = self._base + xi[0] * self._d_xi[0] + xi[1] * self._d_xi[1]
        return c + phi * self.axis_field()

    def shape_velocity_fields(self, xi):
        return self._d_xi


def equivalent_radius(sphere_radius):
    """Rod radius matching the total volume of three spheres of that radius."""
    return float(sphere_radius) * (12.0 / 38.0) ** (1.0 / 3.0)


class StickDonutFamily(ShapeFamily):
    """A rod (capped cylinder) with a coaxial elliptic ring around it.

    xi[0] slides the ring along the rod (0 = left end, 1 = right end of its
    travel), xi[1] morphs the ring cross-section from axially long to thin.
    The ring volume is held fixed by solving for the radial semi-axis, and
    its inner edge keeps a constant clearance from the rod surface.
    """

    name = "stick_donut"

    def __init__(self, rod_radius=None, controls_per_patch=15):
        basis = bspline.build_basis(controls_per_patch, patch_breaks=(0.5,))
        r0 = equivalent_radius(0.05) if rod_radius is None else float(rod_radius)
        super().__init__(basis, [0.0, 0.0], [1.0, 1.0], (False, True))
        self.rod_radius = r0

        self._rod_fit = _PatchFitter(basis, 0, "cap")
        self._ring_fit = _PatchFitter(basis, 1, "closed")
        self._rod_funcs = patch_function_range(basis, 0)
        self._ring_funcs = patch_function_range(basis, 1)

        arc_len = 5.0 + np.pi  # rod generator length in rod radii

        def rod_arc(ts):
            lo, hi = self._rod_fit.bounds
            l = (ts - lo) / (hi - lo) * arc_len
            x = np.where(l < 0.5 * np.pi, 1.0 - np.cos(l),
                         np.where(l < 0.5 * np.pi + 5.0, 1.0 + (l - 0.5 * np.pi),
                                  6.0 + np.sin(l - 0.5 * np.pi - 5.0)))
            s = np.where(l < 0.5 * np.pi, np.sin(l),
                         np.where(l < 0.5 * np.pi + 5.0, 1.0,
                                  np.cos(l - 0.5 * np.pi - 5.0)))
            return r0 * np.stack([x - 3.5, s], axis=-1)

        self._rod_base = self._rod_fit.fit(rod_arc)

    def _ring_semi_axes(self, aspect):
        """Axial and radial semi-axes at aspect xi[1], volume held fixed.

        The ring's inner edge sits at a fixed 1.5 rod radii from the axis,
        half a rod radius clear of the rod surface; tightening this channel
        is what makes the sliding ring an effective pump.
        """
        r0 = self.rod_radius
        r1 = 2.5 * r0 * (1.0 - aspect) + 0.2 * r0 * aspect
        # sigma_c = r2 + 1.5 r0, so Pappus gives
        # 2 pi^2 r1 r2^2 + 3 pi^2 r0 r1 r2 = (19/3) pi r0^3
        a_q = 2.0 * np.pi ** 2 * r1
        b_q = 3.0 * np.pi ** 2 * r0 * r1
        c_q = -(19.0 / 3.0) * np.pi * r0 ** 3
        r2 = (-b_q + np.sqrt(b_q * b_q - 4.0 * a_q * c_q)) / (2.0 * a_q)
        return r1, r2

    def _ring_block(self, aspect):
        """Ring patch coefficients for a ring centred at x = 0."""
        r1, r2 = self._ring_semi_axes(aspect)
        s_c = r2 + 1.5 * self.rod_radius
        lo, hi = self._ring_fit.bounds

        def arc(ts):
            u = 2.0 * np.pi * (ts - lo) / (hi - lo)
            return np.stack([r1 * np.cos(u), s_c - r2 * np.sin(u)], axis=-1)

        return self._ring_fit.fit(arc)

    def coefficients(self, xi, phi=0.0):
        r0 = self.rod_radius
        c = np.zeros((self.basis.n_funcs, 2))
        c[slice(*self._rod_funcs)] = self._rod_base
        block = self._ring_block(xi[1])
        block = block + [(xi[0] - 0.5) * 5.0 * r0, 0.0]
        c[slice(*self._ring_funcs)] = block
        return c + (7.0 * r0 * phi) * self.axis_field()

    def shape_velocity_fields(self, xi):
        m = self.basis.n_funcs
        z1 = np.zeros((m, 2))
        z1[slice(*self._ring_funcs), 0] = 5.0 * self.rod_radius
        z2 = np.zeros((m, 2))
        step = _FD_STEP
        z2[slice(*self._ring_funcs)] = (self._ring_block(xi[1] + step)
                                        - self._ring_block(xi[1] - step)) / (2 * step)
        return np.stack([z1, z2])


def sphere_generator(radius, n_controls):
    """Single-sphere meridian, used for drag checks."""
    basis = bspline.build_basis(n_controls)
    fitter = _PatchFitter(basis, 0, "cap")
    r = float(radius)

    def arc(ts):
        return np.stack([-r * np.cos(np.pi * ts), r * np.sin(np.pi * ts)],
                        axis=-1)

    return GeneratorCurve(basis, fitter.fit(arc), (False,))


def make_family(name, length_scale_mm, controls_per_patch=15):
    if name == "three_sphere":
        return ThreeSphereFamily(length_scale_mm, controls_per_patch)
    if name == "stick_donut":
        return StickDonutFamily(length_scale_mm, controls_per_patch)
    raise ValueError(f"unknown shape family {name!r}")
