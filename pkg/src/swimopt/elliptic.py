"""Complete elliptic integrals K and E by the arithmetic-geometric mean.

Argument is the modulus k (not the parameter m = k^2). K diverges
logarithmically as k -> 1 and is only defined on [0, 1); E is defined on
[0, 1] with E(1) = 1 exactly. The AGM iteration converges quadratically, a
dozen rounds reach machine precision over the whole admissible range.
"""

import numpy as np

# K is evaluated at most this close to the singular modulus; callers that
# build kernels from geometry cap k here rather than risking inf.
K_MODULUS_CAP = 1.0 - 1e-12


def _agm_pair(m):
    """K and E for parameter array m = k^2 in [0, 1)."""
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    csum = np.array(m, copy=True)  # accumulates 2^n c_n^2, c_0 = k
    pw = 1.0
    for _ in range(16):
        c = 0.5 * (a - b)
        if np.all(c < 1e-17):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        pw *= 2.0
        csum += pw * c * c
    big_k = np.pi / (2.0 * a)
    return big_k, big_k * (1.0 - 0.5 * csum)


def complete_K(k):
    """Complete elliptic integral of the first kind, modulus k in [0, 1)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0) or np.any(k >= 1.0):
        raise ValueError("complete_K requires 0 <= k < 1")
    out = _agm_pair(k * k)[0]
    return float(out) if out.ndim == 0 else out


def complete_E(k):
    """Complete elliptic integral of the second kind, modulus k in [0, 1]."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0.0) or np.any(k > 1.0):
        raise ValueError("complete_E requires 0 <= k <= 1")
    one = k == 1.0
    out = _agm_pair(np.where(one, 0.0, k) ** 2)[1]
    out = np.where(one, 1.0, out)
    return float(out) if out.ndim == 0 else out
