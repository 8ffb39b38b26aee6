"""Cubic B-spline bases on patched or periodic parameter domains.

Every curve and time path in the package lives in one of these spaces. A
non-periodic basis is clamped (open knots) per patch with uniform interior
knots; interior patch breaks carry full multiplicity 4, so the spline space is
fully discontinuous across a break and each basis function is confined to one
patch. A periodic basis wraps uniform knots around the seam, which makes every
function C2 there, the seam included.

Evaluation is right-continuous at interior knots; the right domain endpoint
evaluates as a left limit so clamped end coefficients are interpolated.
"""

from dataclasses import dataclass, field

import numpy as np

DEGREE = 3


@dataclass(frozen=True, eq=False)
class BasisSet:
    """A fixed cubic spline space: knots, patch layout and span tables.

    Attributes:
        knots: full knot vector; extended by wrap-around for periodic bases.
        n_funcs: dimension M of the space.
        domain: parameter interval (left, right).
        periodic: seam-wrapped uniform basis when True.
        patch_bounds: patch edges including the domain ends, (P+1,).
        spans: (n_spans, 2) nonzero-measure knot intervals covering the domain.
        span_funcs: (n_spans, 4) global indices of the active functions.
        span_patch: (n_spans,) patch index of each span.
        func_patch: (M,) patch index of each basis function.
    """

    knots: np.ndarray
    n_funcs: int
    domain: tuple
    periodic: bool
    patch_bounds: np.ndarray
    spans: np.ndarray
    span_funcs: np.ndarray
    span_patch: np.ndarray
    func_patch: np.ndarray
    _offset: int = field(default=0)  # extended-index shift for periodic bases

    @property
    def n_patches(self):
        return len(self.patch_bounds) - 1

    @property
    def period(self):
        return self.domain[1] - self.domain[0]


def build_basis(controls_per_patch, patch_breaks=(), periodic=False,
                domain=(0.0, 1.0)):
    """Build a cubic spline basis.

    Args:
        controls_per_patch: number of control coefficients on each patch
            (one shared count, >= 4). For a periodic basis this is the total
            count and patch_breaks must be empty.
        patch_breaks: interior parameters splitting the domain into patches;
            each break gets knot multiplicity 4 (full discontinuity).
        periodic: wrap the knots so the basis is C2 across the seam.
        domain: parameter interval.
    """
    lo, hi = float(domain[0]), float(domain[1])
    if not hi > lo:
        raise ValueError(f"empty parameter domain [{lo}, {hi}]")
    n = int(controls_per_patch)
    if n < DEGREE + 1:
        raise ValueError(f"need at least {DEGREE + 1} controls per patch, got {n}")
    breaks = np.asarray(sorted(patch_breaks), dtype=float)
    if breaks.size and (breaks[0] <= lo or breaks[-1] >= hi
                        or np.any(np.diff(breaks) <= 0)):
        raise ValueError("patch breaks must be strictly inside the domain and distinct")

    if periodic:
        if breaks.size:
            raise ValueError("periodic basis does not take patch breaks")
        return _build_periodic(n, lo, hi)
    return _build_clamped(n, np.concatenate(([lo], breaks, [hi])))


def _build_clamped(n, bounds):
    n_patch = len(bounds) - 1
    knots = [np.full(DEGREE + 1, bounds[0])]
    for p in range(n_patch):
        interior = np.linspace(bounds[p], bounds[p + 1], n - 2)[1:-1]
        knots.append(interior)
        knots.append(np.full(DEGREE + 1, bounds[p + 1]))
    knots = np.concatenate(knots)
    m = len(knots) - (DEGREE + 1)

    spans, funcs, patch = [], [], []
    for i in range(len(knots) - 1):
        if knots[i + 1] > knots[i]:
            spans.append((knots[i], knots[i + 1]))
            funcs.append(range(i - DEGREE, i + 1))
            patch.append(np.searchsorted(bounds, knots[i], side="right") - 1)
    func_patch = np.repeat(np.arange(n_patch), n)
    return BasisSet(knots=knots, n_funcs=m, domain=(bounds[0], bounds[-1]),
                    periodic=False, patch_bounds=np.asarray(bounds),
                    spans=np.array(spans), span_funcs=np.array(funcs),
                    span_patch=np.array(patch), func_patch=func_patch)


def _build_periodic(n, lo, hi):
    h = (hi - lo) / n
    knots = lo + h * np.arange(-DEGREE, n + DEGREE + 1)
    spans = np.stack([knots[DEGREE:DEGREE + n], knots[DEGREE + 1:DEGREE + n + 1]],
                     axis=1)
    # span a activates extended functions a..a+3, folded as (j - 3) mod n
    funcs = np.array([[(a + m - DEGREE) % n for m in range(DEGREE + 1)]
                      for a in range(n)])
    return BasisSet(knots=knots, n_funcs=n, domain=(lo, hi), periodic=True,
                    patch_bounds=np.array([lo, hi]), spans=spans,
                    span_funcs=funcs, span_patch=np.zeros(n, dtype=int),
                    func_patch=np.zeros(n, dtype=int), _offset=DEGREE)


def _locate(basis, t):
    """(span index, effective parameter); right-continuous at knots.

    Periodic parameters are wrapped into [lo, hi); the right endpoint of a
    clamped basis evaluates as a left limit.
    """
    knots = basis.knots
    lo, hi = basis.domain
    if basis.periodic:
        t = lo + (t - lo) % (hi - lo)
    elif t < lo or t > hi:
        raise ValueError(f"parameter {t} outside domain [{lo}, {hi}]")
    i = int(np.searchsorted(knots, t, side="right")) - 1
    last = len(knots) - DEGREE - 2
    if i > last:  # clamped right endpoint
        i = last
        while knots[i + 1] <= knots[i]:
            i -= 1
    return i, t


def _ders_basis(knots, i, t, n_ders):
    """Values and derivatives of the 4 functions active on span i.

    Returns (n_ders+1, 4): row k holds the k-th derivatives of
    N_{i-3}..N_i at t. Cox-de Boor triangle with the standard inverted
    difference table for derivatives.
    """
    p = DEGREE
    ndu = np.empty((p + 1, p + 1))
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = t - knots[i + 1 - j]
        right[j] = knots[i + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((n_ders + 1, p + 1))
    ders[0] = ndu[:, p]
    a = np.empty((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for k in range(1, n_ders + 1):
            d = 0.0
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1
    fact = p
    for k in range(1, n_ders + 1):
        ders[k] *= fact
        fact *= p - k
    return ders


def active_values(basis, t, order=0):
    """(indices, table) of the 4 functions active at t.

    table has shape (order+1, 4): values and derivatives up to `order`.
    """
    i, t = _locate(basis, t)
    table = _ders_basis(basis.knots, i, t, order)
    first = i - DEGREE
    if basis.periodic:
        idx = (first - basis._offset + np.arange(DEGREE + 1)) % basis.n_funcs
    else:
        idx = first + np.arange(DEGREE + 1)
    return idx, table


def eval_basis(basis, t, order=0):
    """Dense vector of all M basis function values (or a derivative) at t."""
    idx, table = active_values(basis, t, order)
    out = np.zeros(basis.n_funcs)
    out[idx] = table[order]
    return out


def eval_curve(basis, coeffs, t, order=0):
    """Evaluate a spline (or its parameter derivative) at t.

    coeffs has shape (M,) or (M, d); t may be scalar or an array, and the
    result gains t's shape as leading dimensions.
    """
    coeffs = np.asarray(coeffs)
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        idx, table = active_values(basis, float(t), order)
        return table[order] @ coeffs[idx]
    out = np.empty(t.shape + coeffs.shape[1:])
    for pos, ti in np.ndenumerate(t):
        idx, table = active_values(basis, float(ti), order)
        out[pos] = table[order] @ coeffs[idx]
    return out


def basis_matrix(basis, ts, order=0):
    """Collocation matrix (len(ts), M) of values or derivatives."""
    out = np.zeros((len(ts), basis.n_funcs))
    for r, t in enumerate(ts):
        idx, table = active_values(basis, t, order)
        out[r, idx] = table[order]
    return out


def function_support(basis, j):
    """Parameter interval where basis function j is nonzero.

    For a periodic basis the support may wrap; then lo > hi and the support
    is [lo, domain_end) U [domain_start, hi].
    """
    if not basis.periodic:
        return basis.knots[j], basis.knots[j + DEGREE + 1]
    lo, hi = basis.domain
    a = lo + (basis.knots[j + basis._offset] - lo) % basis.period
    b = lo + (basis.knots[j + basis._offset + DEGREE + 1] - lo) % basis.period
    return a, b
