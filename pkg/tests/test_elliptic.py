"""Complete elliptic integrals against frozen values, scipy, and quadrature."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ellipe, ellipk

from swimopt import elliptic


def test_frozen_values():
    assert elliptic.complete_K(0.0) == pytest.approx(np.pi / 2, rel=1e-15)
    assert elliptic.complete_E(0.0) == pytest.approx(np.pi / 2, rel=1e-15)
    assert elliptic.complete_K(0.5) == pytest.approx(1.6857503548125961, rel=1e-14)
    assert elliptic.complete_E(0.5) == pytest.approx(1.4674622093394272, rel=1e-14)
    assert elliptic.complete_E(1.0) == 1.0


def test_against_scipy():
    k = np.linspace(0.0, 0.999, 200)
    np.testing.assert_allclose(elliptic.complete_K(k), ellipk(k * k), rtol=1e-13)
    np.testing.assert_allclose(elliptic.complete_E(k), ellipe(k * k), rtol=1e-13)


def test_against_brute_quadrature():
    # midpoint rule on the defining integrals at a strongly elliptic modulus
    k = 0.99
    n = 400_000
    th = (np.arange(n) + 0.5) * (np.pi / 2) / n
    w = (np.pi / 2) / n
    root = np.sqrt(1.0 - (k * np.sin(th)) ** 2)
    assert elliptic.complete_K(k) == pytest.approx(np.sum(w / root), rel=1e-9)
    assert elliptic.complete_E(k) == pytest.approx(np.sum(w * root), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1.0 - 1e-9))
def test_legendre_relation(k):
    kp = np.sqrt(1.0 - k * k)
    lhs = (elliptic.complete_E(k) * elliptic.complete_K(kp)
           + elliptic.complete_E(kp) * elliptic.complete_K(k)
           - elliptic.complete_K(k) * elliptic.complete_K(kp))
    assert lhs == pytest.approx(np.pi / 2, rel=1e-12)


def test_domain_errors():
    with pytest.raises(ValueError):
        elliptic.complete_K(1.0)
    with pytest.raises(ValueError):
        elliptic.complete_K(-0.1)
    with pytest.raises(ValueError):
        elliptic.complete_E(1.0 + 1e-9)
    assert np.isfinite(elliptic.complete_K(elliptic.K_MODULUS_CAP))


def test_array_and_scalar_types():
    assert isinstance(elliptic.complete_K(0.3), float)
    out = elliptic.complete_K(np.array([0.1, 0.2]))
    assert out.shape == (2,)
