"""Jitted inner loops for the boundary-element assembly.

Everything here works on plain float arrays prepared by `bem`; no spline
evaluation happens inside. The assembler sums panel-pair contributions of the
ring kernel with three rules: plain tensor Gauss for separated pairs, a
log-split rule on the self pair, and corner-graded Gauss for pairs sharing a
panel endpoint. Writes are accumulated per target row and mirrored, so the
returned matrix is symmetric to roundoff and results are bit-reproducible.
"""

import numpy as np
from numba import njit

# modulus parameter m = k^2 never evaluated closer to 1 than this
M_CAP = 0.999999999999


@njit(cache=True, inline="always")
def _agm_ke(m):
    """K(k), E(k) for parameter m = k^2 < 1 via the AGM."""
    a = 1.0
    b = np.sqrt(1.0 - m)
    csum = m
    pw = 1.0
    for _ in range(16):
        c = 0.5 * (a - b)
        if c < 1e-17:
            break
        an = 0.5 * (a + b)
        b = np.sqrt(a * b)
        a = an
        pw *= 2.0
        csum += pw * c * c
    big_k = np.pi / (2.0 * a)
    return big_k, big_k * (1.0 - 0.5 * csum)


@njit(cache=True, inline="always")
def _ring(x0, s0, x1, s1):
    """Azimuthal integral of the Stokeslet over the source ring.

    Target generator point (x0, s0), source (x1, s1), both off the axis.
    Returns the 2x2 components (xx, xs, sx, ss); dimension 1/length.
    """
    dx = x1 - x0
    b = s0 * s0 - s1 * s1
    r2 = dx * dx + (s1 - s0) * (s1 - s0)
    big_r2 = dx * dx + (s1 + s0) * (s1 + s0)
    m = 4.0 * s1 * s0 / big_r2
    if m > M_CAP:
        m = M_CAP
    ek, ee = _agm_ke(m)
    k = np.sqrt(m)
    f = np.sqrt(s1 / s0) / s1
    e_r2 = ee / r2
    sxx = 2.0 * k * f * (ek + dx * dx * e_r2)
    sxs = k * dx / s1 * f * (ek - (b + dx * dx) * e_r2)
    ssx = -k * dx / s0 * f * (ek + (b - dx * dx) * e_r2)
    sss = k / (s0 * s1) * f * ((s0 * s0 + s1 * s1 + 2.0 * dx * dx) * ek
                               - (2.0 * dx ** 4
                                  + 3.0 * dx * dx * (s0 * s0 + s1 * s1)
                                  + b * b) * e_r2)
    return sxx, sxs, ssx, sss


@njit(cache=True)
def ring_components(tx, ts, sx, ss, out):
    """Batched ring kernel: out[n, 4] for paired target/source arrays."""
    for n in range(tx.shape[0]):
        a, b, c, d = _ring(tx[n], ts[n], sx[n], ss[n])
        out[n, 0] = a
        out[n, 1] = b
        out[n, 2] = c
        out[n, 3] = d
    return out


@njit(cache=True, inline="always")
def _scatter(A, T, f0p, f0q, mirror):
    for i in range(4):
        for al in range(2):
            row = 2 * (f0p + i) + al
            for j in range(4):
                for be in range(2):
                    col = 2 * (f0q + j) + be
                    v = T[i, al, j, be]
                    A[row, col] += v
                    if mirror:
                        A[col, row] += v


@njit(cache=True)
def assemble_single_layer(f0, kind,
                          reg_x, reg_s, reg_w, reg_B,
                          self_x, self_s, self_wS, self_wD, self_B,
                          adjR_x, adjR_s, adjR_w, adjR_B,
                          adjL_x, adjL_s, adjL_w, adjL_B,
                          n_funcs):
    """Galerkin matrix of the ring kernel against the panel basis.

    kind[p, q] selects the rule for the ordered pair p <= q: 0 separated,
    1 self, 2 p's right end touches q's left end, 3 the reverse (closed-patch
    seam). Weight arrays already include the sigma*J surface measure; the
    caller applies the 1/(4 eta) prefactor.
    """
    P = reg_x.shape[0]
    n_reg = reg_x.shape[1]
    n_inner = self_x.shape[2]
    A = np.zeros((2 * n_funcs, 2 * n_funcs))
    T = np.empty((4, 2, 4, 2))

    for p in range(P):
        for q in range(p, P):
            kd = kind[p, q]
            T[:] = 0.0

            if kd == 0:
                for k in range(n_reg):
                    x0 = reg_x[p, k]
                    s0 = reg_s[p, k]
                    w0 = reg_w[p, k]
                    for l in range(n_reg):
                        sxx, sxs, ssx, sss = _ring(x0, s0, reg_x[q, l], reg_s[q, l])
                        wl = reg_w[q, l]
                        for i in range(4):
                            aw = reg_B[p, k, i] * w0
                            for j in range(4):
                                c = aw * reg_B[q, l, j] * wl
                                T[i, 0, j, 0] += c * sxx
                                T[i, 0, j, 1] += c * sxs
                                T[i, 1, j, 0] += c * ssx
                                T[i, 1, j, 1] += c * sss
                _scatter(A, T, f0[p], f0[q], p != q)

            elif kd == 1:
                # self pair: log-split inner rule, then symmetrize the block
                for k in range(n_reg):
                    x0 = reg_x[p, k]
                    s0 = reg_s[p, k]
                    w0 = reg_w[p, k]
                    dcoef = -2.0 / s0
                    for m in range(n_inner):
                        ws = self_wS[p, k, m]
                        dg = dcoef * self_wD[p, k, m]
                        if ws != 0.0:
                            sxx, sxs, ssx, sss = _ring(x0, s0, self_x[p, k, m],
                                                       self_s[p, k, m])
                        else:
                            sxx = sxs = ssx = sss = 0.0
                        for i in range(4):
                            aw = reg_B[p, k, i] * w0
                            for j in range(4):
                                c = aw * self_B[p, k, m, j]
                                T[i, 0, j, 0] += c * (ws * sxx + dg)
                                T[i, 0, j, 1] += c * ws * sxs
                                T[i, 1, j, 0] += c * ws * ssx
                                T[i, 1, j, 1] += c * (ws * sss + dg)
                for i in range(4):
                    for al in range(2):
                        for j in range(4):
                            for be in range(2):
                                if 2 * i + al < 2 * j + be:
                                    v = 0.5 * (T[i, al, j, be] + T[j, be, i, al])
                                    T[i, al, j, be] = v
                                    T[j, be, i, al] = v
                _scatter(A, T, f0[p], f0[q], False)

            else:
                # shared endpoint: graded nodes approach the common corner
                if kd == 2:
                    tx, tsg, tw, tB = adjR_x, adjR_s, adjR_w, adjR_B
                    ux, usg, uw, uB = adjL_x, adjL_s, adjL_w, adjL_B
                else:
                    tx, tsg, tw, tB = adjL_x, adjL_s, adjL_w, adjL_B
                    ux, usg, uw, uB = adjR_x, adjR_s, adjR_w, adjR_B
                n_adj = tx.shape[1]
                for k in range(n_adj):
                    x0 = tx[p, k]
                    s0 = tsg[p, k]
                    w0 = tw[p, k]
                    for l in range(n_adj):
                        sxx, sxs, ssx, sss = _ring(x0, s0, ux[q, l], usg[q, l])
                        wl = uw[q, l]
                        for i in range(4):
                            aw = tB[p, k, i] * w0
                            for j in range(4):
                                c = aw * uB[q, l, j] * wl
                                T[i, 0, j, 0] += c * sxx
                                T[i, 0, j, 1] += c * sxs
                                T[i, 1, j, 0] += c * ssx
                                T[i, 1, j, 1] += c * sss
                _scatter(A, T, f0[p], f0[q], True)

    return A
