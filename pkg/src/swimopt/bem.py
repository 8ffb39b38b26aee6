"""Boundary-element discretization of the axisymmetric single-layer flow map.

The surface velocity u and the force density f the swimmer exerts on the
fluid are related by u(x) = (1/8 pi eta) * integral of the Stokeslet against
f over the surface. Both fields live on the generator's spline basis; testing
against the same basis gives the Galerkin pair

    mass:          M[(i,a),(j,b)] = delta_ab * 2 pi * int B_i B_j sigma J ds
    single layer:  A[(i,a),(j,b)] = 1/(4 eta) * int int B_i S_ab B_j
                                    (sigma J) (sigma J) dq ds

so that M v = A f. A is symmetric positive semidefinite; each closed body
contributes one near-null direction (uniform inflation), removed by a rank-one
deflation per body before factorizing.

Quadrature: 8-point Gauss per panel pair, a log-splitting rule on the self
pair, and corner-graded composite Gauss on pairs sharing a panel endpoint
(including the seam pair of a closed patch).
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import _kernels, bspline, elliptic, quadrature

# composite-rule breakpoints, as fractions of panel length from the shared corner
_GRADE_EDGES = (0.0, 1.0 / 16.0, 1.0 / 4.0, 1.0)


def ring_stokeslet(target, source):
    """Azimuthally integrated Stokeslet between generator points.

    target, source: (..., 2) arrays of (x, sigma) with sigma > 0. Returns the
    (..., 2, 2) matrix coupling axial and radial components; units 1/length.
    """
    t = np.asarray(target, dtype=float)
    s = np.asarray(source, dtype=float)
    x0, x1 = np.broadcast_arrays(t[..., 0], s[..., 0])
    s0, s1 = np.broadcast_arrays(t[..., 1], s[..., 1])
    dx = x1 - x0
    b = s0 * s0 - s1 * s1
    r2 = dx * dx + (s1 - s0) ** 2
    big_r2 = dx * dx + (s1 + s0) ** 2
    m = np.minimum(4.0 * s1 * s0 / big_r2, _kernels.M_CAP)
    k = np.sqrt(m)
    ek = elliptic.complete_K(k)
    ee = elliptic.complete_E(k)
    f = np.sqrt(s1 / s0) / s1
    e_r2 = ee / r2
    sxx = 2.0 * k * f * (ek + dx * dx * e_r2)
    sxs = k * dx / s1 * f * (ek - (b + dx * dx) * e_r2)
    ssx = -k * dx / s0 * f * (ek + (b - dx * dx) * e_r2)
    sss = k / (s0 * s1) * f * ((s0 * s0 + s1 * s1 + 2.0 * dx * dx) * ek
                               - (2.0 * dx ** 4
                                  + 3.0 * dx * dx * (s0 * s0 + s1 * s1)
                                  + b * b) * e_r2)
    return np.stack([np.stack([sxx, sxs], axis=-1),
                     np.stack([ssx, sss], axis=-1)], axis=-2)


def _basis_table(basis, ts):
    """Values and first derivatives of the active quartet at each parameter."""
    n = ts.size
    vals = np.empty((n, 4))
    ders = np.empty((n, 4))
    for i, t in enumerate(ts.ravel()):
        _, tab = bspline.active_values(basis, float(t), order=1)
        vals[i] = tab[0]
        ders[i] = tab[1]
    return vals, ders


class BemTables:
    """Geometry-independent node tables for one spline basis.

    All parameter positions, basis values, and base quadrature weights are
    fixed by the basis; per configuration only the surface measure sigma * J
    is folded in. Self-pair inner nodes are laid out per outer node as
    [left Gauss, left log, right Gauss, right log].
    """

    def __init__(self, basis, closed_patches):
        if basis.periodic:
            raise ValueError("geometry bases must be clamped")
        self.basis = basis
        spans = basis.spans
        P = len(spans)
        self.n_panels = P
        self.f0 = np.ascontiguousarray(basis.span_funcs[:, 0], dtype=np.int64)

        gx, gw = quadrature.GAUSS_X, quadrature.GAUSS_W
        lx, lw = quadrature.GAUSS_LOG_X, quadrature.GAUSS_LOG_W
        ng, nl = gx.size, lx.size
        h = spans[:, 1] - spans[:, 0]

        self.reg_t = spans[:, :1] + h[:, None] * gx
        self.reg_gwh = np.broadcast_to(gw, (P, ng)) * h[:, None]

        # self-pair inner nodes around each outer node, laid out per side as
        # [Gauss, log]; log nodes carry zero smooth weight
        t_o = self.reg_t
        h_l = t_o - spans[:, :1]
        h_r = spans[:, 1:] - t_o
        side = ng + nl
        st = np.empty((P, ng, 2 * side))
        ws = np.zeros((P, ng, 2 * side))
        wd = np.empty((P, ng, 2 * side))
        log_gx = -np.log(gx)
        for sgn, hs, base in ((-1.0, h_l, 0), (1.0, h_r, side)):
            st[..., base:base + ng] = t_o[..., None] + sgn * hs[..., None] * gx
            ws[..., base:base + ng] = hs[..., None] * gw
            wd[..., base:base + ng] = hs[..., None] * gw * log_gx
            st[..., base + ng:base + side] = t_o[..., None] + sgn * hs[..., None] * lx
            wd[..., base + ng:base + side] = -hs[..., None] * lw
        self.self_t = st
        self.self_wS = ws
        self.self_wD = wd

        # corner-graded composite nodes, toward each panel end
        e = np.asarray(_GRADE_EDGES)
        seg_lo, seg_len = e[:-1], np.diff(e)
        to_corner = (seg_lo[:, None] + seg_len[:, None] * gx).ravel()
        wt_corner = (seg_len[:, None] * gw).ravel()
        self.adjR_t = spans[:, 1:] - h[:, None] * to_corner
        self.adjL_t = spans[:, :1] + h[:, None] * to_corner
        self.adj_gwh = h[:, None] * wt_corner

        def tab(ts):
            v, d = _basis_table(basis, ts.ravel())
            return (np.ascontiguousarray(v.reshape(ts.shape + (4,))),
                    np.ascontiguousarray(d.reshape(ts.shape + (4,))))

        self.reg_B, self.reg_Bd = tab(self.reg_t)
        self.self_B, self.self_Bd = tab(self.self_t)
        self.adjR_B, self.adjR_Bd = tab(self.adjR_t)
        self.adjL_B, self.adjL_Bd = tab(self.adjL_t)

        # pair rule selector: 0 separated, 1 self, 2/3 shared endpoint
        kind = np.zeros((P, P), dtype=np.int8)
        np.fill_diagonal(kind, 1)
        for patch in range(basis.n_patches):
            members = np.nonzero(basis.span_patch == patch)[0]
            for p, q in zip(members[:-1], members[1:]):
                kind[p, q] = 2
            if closed_patches[patch]:
                if len(members) < 3:
                    raise ValueError("closed patches need at least 3 panels")
                kind[members[0], members[-1]] = 3
        self.kind = kind

        # per-patch least-squares operators for fitting nodal normal vectors
        self.patch_rows = []
        self.patch_funcs = []
        self.patch_pinv = []
        flat_B = self.reg_B.reshape(P * ng, 4)
        for patch in range(basis.n_patches):
            members = np.nonzero(basis.span_patch == patch)[0]
            f_lo = int(self.f0[members[0]])
            f_hi = int(self.f0[members[-1]]) + 4
            rows = np.concatenate([np.arange(p * ng, p * ng + ng) for p in members])
            design = np.zeros((rows.size, f_hi - f_lo))
            for r, p in enumerate(np.repeat(members, ng)):
                design[r, self.f0[p] - f_lo:self.f0[p] - f_lo + 4] = flat_B[rows[r]]
            self.patch_rows.append(rows)
            self.patch_funcs.append((f_lo, f_hi))
            self.patch_pinv.append(np.linalg.pinv(design))


_TABLE_CACHE = {}


def tables_for(basis, closed_patches):
    key = (id(basis), tuple(closed_patches))
    hit = _TABLE_CACHE.get(key)
    if hit is not None and hit[0] is basis:
        return hit[1]
    tables = BemTables(basis, closed_patches)
    _TABLE_CACHE[key] = (basis, tables)
    return tables


def _curve_nodes(tables, coeffs, B, Bd):
    """Positions, derivatives, and surface factor sigma * J at tabulated nodes."""
    panel_coeffs = coeffs[tables.basis.span_funcs]  # (P, 4, 2)
    lead = B.shape[:-1]
    flat_B = B.reshape(tables.n_panels, -1, 4)
    flat_Bd = Bd.reshape(tables.n_panels, -1, 4)
    xy = np.matmul(flat_B, panel_coeffs).reshape(lead + (2,))
    d = np.matmul(flat_Bd, panel_coeffs).reshape(lead + (2,))
    jac = np.hypot(d[..., 0], d[..., 1])
    return xy, d, jac, xy[..., 1] * jac


class BoundaryOperator:
    """Assembled Galerkin pair on one configuration, with cached factors."""

    def __init__(self, curve, viscosity, single_layer, mass, normal_fields):
        self.curve = curve
        self.viscosity = viscosity
        self.single_layer = single_layer
        self.mass = mass
        self.normal_fields = normal_fields  # (n_bodies, M, 2), unit normals
        self._defl_cho = None
        self._mass_cho = None

    @property
    def n_funcs(self):
        return self.mass.shape[0] // 2

    def _deflated(self):
        if self._defl_cho is None:
            a = self.single_layer
            beta = np.trace(a) / a.shape[0]
            a = a.copy()
            for n in self.normal_fields:
                u = self.mass @ n.reshape(-1)
                u /= np.linalg.norm(u)
                a += beta * np.outer(u, u)
            # near-touching bodies can leave A slightly indefinite through
            # quadrature error; rescue with the smallest ridge that factors
            eye = np.eye(a.shape[0])
            for ridge in (0.0, 1e-6, 1e-4, 4e-3, 1e-1, 1.0):
                try:
                    self._defl_cho = cho_factor(a + (ridge * beta) * eye,
                                                lower=True)
                    break
                except np.linalg.LinAlgError:
                    continue
            else:
                raise ArithmeticError(
                    "single-layer matrix could not be factorized; "
                    "the configuration is degenerate")
        return self._defl_cho

    def _mass_factor(self):
        if self._mass_cho is None:
            self._mass_cho = cho_factor(self.mass, lower=True)
        return self._mass_cho

    def traction_for_velocity(self, v):
        """Force density (on the fluid) producing the surface velocity v."""
        rhs = self.mass @ np.asarray(v, dtype=float).reshape(-1)
        return cho_solve(self._deflated(), rhs).reshape(-1, 2)

    def velocity_for_traction(self, f):
        rhs = self.single_layer @ np.asarray(f, dtype=float).reshape(-1)
        return cho_solve(self._mass_factor(), rhs).reshape(-1, 2)

    def inner(self, u, w):
        """Surface inner product 2 pi int u . w sigma J ds of coefficient fields."""
        u = np.asarray(u, dtype=float).reshape(-1)
        w = np.asarray(w, dtype=float).reshape(-1)
        return float(u @ self.mass @ w)

    def axial_force(self, f):
        e = np.zeros((self.n_funcs, 2))
        e[:, 0] = 1.0
        return self.inner(e, f)

    def dissipation(self, v):
        """Power fed into the fluid by the surface motion v; always >= 0."""
        f = self.traction_for_velocity(v)
        return self.inner(f, v)


def assemble(curve, viscosity=1.0):
    """Build the boundary operator for one generator configuration."""
    tables = tables_for(curve.basis, curve.closed_patches)
    coeffs = np.asarray(curve.coeffs, dtype=float)

    reg_xy, reg_d, reg_j, reg_sj = _curve_nodes(
        tables, coeffs, tables.reg_B, tables.reg_Bd)
    if np.min(reg_xy[..., 1]) <= 0.0:
        raise ValueError(
            "generator curve crosses the axis between its endpoints; "
            "the spline resolution is too coarse for this geometry")
    self_xy, _, _, self_sj = _curve_nodes(
        tables, coeffs, tables.self_B, tables.self_Bd)
    adjR_xy, _, _, adjR_sj = _curve_nodes(
        tables, coeffs, tables.adjR_B, tables.adjR_Bd)
    adjL_xy, _, _, adjL_sj = _curve_nodes(
        tables, coeffs, tables.adjL_B, tables.adjL_Bd)

    c = np.ascontiguousarray
    A = _kernels.assemble_single_layer(
        tables.f0, tables.kind,
        c(reg_xy[..., 0]), c(reg_xy[..., 1]), c(tables.reg_gwh * reg_sj),
        tables.reg_B,
        c(self_xy[..., 0]), c(self_xy[..., 1]),
        c(tables.self_wS * self_sj), c(tables.self_wD * self_sj),
        tables.self_B,
        c(adjR_xy[..., 0]), c(adjR_xy[..., 1]), c(tables.adj_gwh * adjR_sj),
        tables.adjR_B,
        c(adjL_xy[..., 0]), c(adjL_xy[..., 1]), c(tables.adj_gwh * adjL_sj),
        tables.adjL_B,
        tables.basis.n_funcs)
    A *= 1.0 / (4.0 * viscosity)

    mass = _mass_matrix(tables, tables.reg_gwh * reg_sj)
    normals = _normal_fields(tables, reg_d, reg_j)
    return BoundaryOperator(curve, viscosity, A, mass, normals)


def _mass_matrix(tables, reg_w):
    m = tables.basis.n_funcs
    blocks = np.einsum("pki,pkj,pk->pij", tables.reg_B, tables.reg_B, reg_w)
    out = np.zeros((2 * m, 2 * m))
    for p in range(tables.n_panels):
        f0 = tables.f0[p]
        for i in range(4):
            for j in range(4):
                v = 2.0 * np.pi * blocks[p, i, j]
                out[2 * (f0 + i), 2 * (f0 + j)] += v
                out[2 * (f0 + i) + 1, 2 * (f0 + j) + 1] += v
    return out


def _normal_fields(tables, reg_d, reg_j):
    """Unit outward normal of each body, projected onto the basis."""
    m = tables.basis.n_funcs
    nx = -reg_d[..., 1] / reg_j
    ns = reg_d[..., 0] / reg_j
    flat = np.stack([nx.reshape(-1), ns.reshape(-1)], axis=-1)
    fields = []
    for rows, (f_lo, f_hi), pinv in zip(tables.patch_rows, tables.patch_funcs,
                                        tables.patch_pinv):
        coeffs = np.zeros((m, 2))
        coeffs[f_lo:f_hi] = pinv @ flat[rows]
        coeffs /= np.linalg.norm(coeffs)
        fields.append(coeffs)
    return np.stack(fields)
