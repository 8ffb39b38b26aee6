"""Periodic shape trajectories and their energy and displacement functionals.

A stroke is a spline path xi(t) over one period, either on a periodic basis
(free mode, smooth across the seam) or on a clamped basis whose two end
control points coincide (fixed-start mode). Energy and net displacement are
Gauss quadratures of the reduced model along the path,

    E = int xi_dot^T G(xi) xi_dot dt        (pJ)
    C = int V(xi) . xi_dot dt               (mm)

and their gradients with respect to the control points come from central
differences of (V, G) in the shape parameters at each quadrature node.
"""

import numpy as np

from . import bspline, mobility, quadrature

# finite-difference step for d(V, G)/d(xi), as a fraction of the box width
FD_FRACTION = 1e-6


def time_basis(n_controls, period, periodic=True):
    return bspline.build_basis(n_controls, periodic=periodic,
                               domain=(0.0, float(period)))


class StrokeEvaluator:
    """Quadrature-discretized functionals of strokes for one shape family.

    Control points live in the family's parameter box, so by the convex-hull
    property the whole path does too. Reduced-model solves are memoized per
    configuration, which makes repeated evaluations along a line search and
    the finite-difference gradient pass share work.
    """

    def __init__(self, family, path_basis, viscosity=1.0):
        self.family = family
        self.basis = path_basis
        self.reduced = mobility.ReducedEvaluator(family, viscosity)
        nodes = []
        weights = []
        for a, b in path_basis.spans:
            t, w = quadrature.gauss_panel(a, b)
            nodes.append(t)
            weights.append(w)
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.psi = bspline.basis_matrix(path_basis, self.nodes)
        self.psi_dot = bspline.basis_matrix(path_basis, self.nodes, order=1)
        self.fd_step = FD_FRACTION * (family.upper - family.lower)

    @property
    def n_controls(self):
        return self.basis.n_funcs

    def path_states(self, coeffs):
        """xi and xi_dot at the quadrature nodes; coeffs is (Q, n_params)."""
        return self.psi @ coeffs, self.psi_dot @ coeffs

    def functionals(self, coeffs):
        """(energy, displacement) of the stroke."""
        xis, xidots = self.path_states(coeffs)
        energy = 0.0
        travel = 0.0
        for k, w in enumerate(self.weights):
            rm = self.reduced(xis[k])
            xd = xidots[k]
            energy += w * float(xd @ rm.G @ xd)
            travel += w * float(rm.V @ xd)
        return energy, travel

    def _model_derivatives(self, xi):
        """Central differences of (V, G), one-sided where a bound is active."""
        n = xi.size
        d_v = np.empty((n, n))
        d_g = np.empty((n, n, n))
        for i in range(n):
            xp = xi.copy()
            xm = xi.copy()
            xp[i] += self.fd_step[i]
            xm[i] -= self.fd_step[i]
            if xp[i] > self.family.upper[i]:
                xp[i] = xi[i]
            if xm[i] < self.family.lower[i]:
                xm[i] = xi[i]
            rp = self.reduced(xp)
            rm = self.reduced(xm)
            span = xp[i] - xm[i]
            d_v[i] = (rp.V - rm.V) / span
            d_g[i] = (rp.G - rm.G) / span
        return d_v, d_g

    def functionals_with_gradients(self, coeffs):
        """(E, C, dE/dcoeffs, dC/dcoeffs), gradients shaped like coeffs."""
        xis, xidots = self.path_states(coeffs)
        n = self.family.n_params
        energy = 0.0
        travel = 0.0
        g_e = np.zeros_like(coeffs)
        g_c = np.zeros_like(coeffs)
        for k, w in enumerate(self.weights):
            xi = xis[k]
            xd = xidots[k]
            rm = self.reduced(xi)
            energy += w * float(xd @ rm.G @ xd)
            travel += w * float(rm.V @ xd)
            d_v, d_g = self._model_derivatives(xi)
            quad = np.array([xd @ d_g[i] @ xd for i in range(n)])
            g_e += w * (np.outer(self.psi[k], quad)
                        + 2.0 * np.outer(self.psi_dot[k], rm.G @ xd))
            g_c += w * (np.outer(self.psi[k], d_v @ xd)
                        + np.outer(self.psi_dot[k], rm.V))
        return energy, travel, g_e, g_c

    def axial_speed(self, coeffs, ts):
        """Instantaneous swimming speed V(xi(t)) . xi_dot(t) at given times."""
        xs = bspline.basis_matrix(self.basis, ts) @ coeffs
        xds = bspline.basis_matrix(self.basis, ts, order=1) @ coeffs
        return np.array([float(self.reduced(x).V @ xd)
                         for x, xd in zip(xs, xds)])


class StrokeProblem:
    """Flattened NLP view of a stroke optimization.

    Variables are the control points in row-major order; the constraint is
    displacement minus its target. In fixed-start mode the first and last
    control points are frozen at the prescribed shape.
    """

    def __init__(self, evaluator, target_displacement, start_shape=None):
        self.evaluator = evaluator
        self.target = float(target_displacement)
        q = evaluator.n_controls
        n = evaluator.family.n_params
        self.shape = (q, n)
        self.lower = np.tile(evaluator.family.lower, q)
        self.upper = np.tile(evaluator.family.upper, q)
        self.fixed = np.zeros(q * n, dtype=bool)
        if start_shape is not None:
            if evaluator.basis.periodic:
                raise ValueError("fixed-start strokes need a clamped basis")
            self.fixed[:n] = True
            self.fixed[-n:] = True
            self.start_shape = np.asarray(start_shape, dtype=float)
        else:
            self.start_shape = None

    def pack(self, coeffs):
        return np.asarray(coeffs, dtype=float).ravel()

    def unpack(self, x):
        return x.reshape(self.shape)

    def values(self, x):
        e, c = self.evaluator.functionals(self.unpack(x))
        return e, c - self.target

    def gradients(self, x):
        _, _, g_e, g_c = self.evaluator.functionals_with_gradients(self.unpack(x))
        return g_e.ravel(), g_c.ravel()

    def as_nlp(self):
        from . import sqp
        return sqp.NlpProblem(values=self.values, gradients=self.gradients,
                              lower=self.lower, upper=self.upper,
                              fixed=self.fixed)


def free_initial_stroke(evaluator, target_displacement, seed=0,
                        amplitude=0.2, jitter=0.05):
    """Loop placed and sized so its displacement is already near the target.

    The displacement gained per loop is a circulation and can change sign
    across the parameter box, so a loop centred blindly may sit in a weak
    or wrong-signed region and strand the optimizer there. Small trial
    loops on a coarse grid find the strongest region first; the loop is
    oriented to push the right way and then grown or shrunk (secant on
    the scale factor) until its displacement is close to the target.
    """
    fam = evaluator.family
    q = evaluator.n_controls
    half = 0.5 * (fam.upper - fam.lower)
    theta = 2.0 * np.pi * np.arange(q) / q
    ring = np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def loop(centre, s, flip):
        pts = ring.copy()
        if flip:
            pts[:, 1] = -pts[:, 1]
        return centre + s * half * pts

    best = None
    for f1 in (0.3, 0.5, 0.7):
        for f2 in (0.3, 0.5, 0.7):
            centre = fam.lower + np.array([f1, f2]) * (fam.upper - fam.lower)
            _, c = evaluator.functionals(loop(centre, amplitude, False))
            if best is None or abs(c) > abs(best[1]):
                best = (centre, c)
    centre, c0 = best
    flip = target_displacement != 0.0 and c0 * target_displacement < 0.0
    if flip:
        c0 = -c0

    # largest in-box scale about this centre, with a small safety margin
    room = np.minimum(centre - fam.lower, fam.upper - centre)
    s_max = float(np.min((room - 0.02 * (fam.upper - fam.lower)) / half))
    s = amplitude
    if target_displacement != 0.0 and c0 != 0.0:
        # displacement grows roughly with enclosed area, so sqrt scaling
        # gives a good opening move; a few secant steps do the rest
        s_prev, c_prev = s, c0 - target_displacement
        s = float(np.clip(s * np.sqrt(abs(target_displacement / c0)),
                          0.02, s_max))
        for _ in range(6):
            if abs(s - s_prev) < 1e-3:
                break
            _, c = evaluator.functionals(loop(centre, s, flip))
            g = c - target_displacement
            if abs(g) <= 0.1 * abs(target_displacement) or g == c_prev:
                break
            s, s_prev, c_prev = (
                float(np.clip(s - g * (s - s_prev) / (g - c_prev),
                              0.02, s_max)), s, g)

    coeffs = loop(centre, s, flip)
    rng = np.random.default_rng(seed)
    coeffs += jitter * s * half * rng.standard_normal(coeffs.shape)
    return np.clip(coeffs, fam.lower, fam.upper)


def pinned_initial_stroke(evaluator, target_displacement, start_shape,
                          seed=0, radius_fraction=0.2, jitter=0.05):
    """Circular loop through the prescribed start shape, heading inward."""
    fam = evaluator.family
    q = evaluator.n_controls
    xi0 = np.asarray(start_shape, dtype=float)
    r = radius_fraction * 0.5 * float(np.min(fam.upper - fam.lower))
    inward = np.ones(xi0.size) / np.sqrt(xi0.size)
    centre = xi0 - r * inward
    theta = 2.0 * np.pi * np.arange(q) / (q - 1)
    coeffs = centre + r * np.stack(
        [np.cos(theta + 0.25 * np.pi), np.sin(theta + 0.25 * np.pi)], axis=-1)
    coeffs[0] = xi0
    coeffs[-1] = xi0
    _, travel = evaluator.functionals(np.clip(coeffs, fam.lower, fam.upper))
    if travel * target_displacement < 0.0:
        coeffs = coeffs[::-1].copy()
    rng = np.random.default_rng(seed)
    coeffs[1:-1] += jitter * r * rng.standard_normal((q - 2, coeffs.shape[1]))
    coeffs = np.clip(coeffs, fam.lower, fam.upper)
    coeffs[0] = xi0
    coeffs[-1] = xi0
    return coeffs
