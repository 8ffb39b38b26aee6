"""Reduced swimming model on the shape-parameter plane.

For a configuration xi, shape motion at rate xi_dot drags the swimmer along
its axis at phi_dot = V(xi) . xi_dot (force-free swimming), and dissipates
power xi_dot^T G(xi) xi_dot. Both come from N + 1 boundary solves: one per
shape velocity field and one for rigid axial translation. G is symmetric
positive definite away from degenerate geometries.
"""

import numpy as np

from . import bem


class ReducedModel:
    """Axial speed map V (n_params,) and power metric G (n_params, n_params)."""

    __slots__ = ("V", "G", "axial_drag")

    def __init__(self, V, G, axial_drag):
        self.V = V
        self.G = G
        self.axial_drag = axial_drag


def reduced_model(family, xi, viscosity=1.0, phi=0.0):
    """Solve one configuration and condense it to (V, G)."""
    xi = np.asarray(xi, dtype=float)
    op = bem.assemble(family.curve(xi, phi), viscosity)
    e = family.axis_field()
    zetas = family.shape_velocity_fields(xi)

    f_e = op.traction_for_velocity(e)
    m_bar = op.inner(f_e, e)
    if not m_bar > 0.0:
        raise ArithmeticError(
            f"axial drag coefficient {m_bar!r} is not positive; "
            "the configuration is degenerate")

    n = len(zetas)
    f_z = [op.traction_for_velocity(z) for z in zetas]
    thrust = np.array([op.inner(f, e) for f in f_z])
    V = -thrust / m_bar

    # swimming fields w_i = zeta_i + V_i e are force-free by construction
    G = np.empty((n, n))
    for i in range(n):
        f_w = f_z[i] + V[i] * f_e
        for j in range(n):
            G[i, j] = op.inner(f_w, zetas[j] + V[j] * e)
    G = 0.5 * (G + G.T)
    return ReducedModel(V, G, m_bar)


class ReducedEvaluator:
    """Memoized xi -> ReducedModel for one family and viscosity."""

    def __init__(self, family, viscosity=1.0):
        self.family = family
        self.viscosity = viscosity
        self._cache = {}
        self.solve_count = 0

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        key = np.round(xi, 12).tobytes()
        hit = self._cache.get(key)
        if hit is None:
            hit = reduced_model(self.family, xi, self.viscosity)
            self._cache[key] = hit
            self.solve_count += 1
        return hit
