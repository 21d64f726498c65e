import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ising_superposition.elliptic import elliptic_b, elliptic_e, elliptic_k
from ising_superposition.errors import InvalidArgumentError


def quad_k(m):
    return integrate.quad(lambda p: 1 / math.sqrt(1 - m * math.sin(p) ** 2), 0, math.pi / 2,
                          epsabs=0, epsrel=1e-13, limit=500)[0]


def quad_e(m):
    return integrate.quad(lambda p: math.sqrt(1 - m * math.sin(p) ** 2), 0, math.pi / 2,
                          epsabs=0, epsrel=1e-13, limit=500)[0]


def test_values_at_zero():
    assert elliptic_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_e(0.0) == pytest.approx(math.pi / 2, rel=1e-15)


def test_e_at_one():
    assert elliptic_e(1.0) == 1.0


def test_k_half_matches_quadrature():
    assert elliptic_k(0.5) == pytest.approx(quad_k(0.5), rel=1e-12)
    # frozen from the quadrature oracle
    assert elliptic_k(0.5) == pytest.approx(1.8540746773013719, rel=1e-14)


@pytest.mark.parametrize("m", [-10.0, -1.0, -1e-3, 1e-8, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99])
def test_against_quadrature(m):
    assert elliptic_k(m) == pytest.approx(quad_k(m), rel=1e-12)
    assert elliptic_e(m) == pytest.approx(quad_e(m), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-50.0, max_value=1.0 - 1e-12))
def test_matches_scipy_special(m):
    from scipy.special import ellipe, ellipk

    assert elliptic_k(m) == pytest.approx(ellipk(m), rel=1e-12)
    assert elliptic_e(m) == pytest.approx(ellipe(m), rel=1e-12)


@pytest.mark.parametrize("m", [0.999, 0.999999, 1 - 1e-10, 1 - 2**-50])
def test_near_one_against_high_precision(m):
    # adaptive quadrature itself degrades next to the logarithmic singularity
    import mpmath as mp

    mp.mp.dps = 40
    assert elliptic_k(m) == pytest.approx(float(mp.ellipk(mp.mpf(m))), rel=1e-13)
    assert elliptic_e(m) == pytest.approx(float(mp.ellipe(mp.mpf(m))), rel=1e-14)


def test_near_one_is_finite_and_monotone():
    ms = 1.0 - np.logspace(-2, -15, 14)
    ks = [elliptic_k(m) for m in ms]
    assert all(np.isfinite(ks))
    assert all(b > a for a, b in zip(ks, ks[1:]))


@pytest.mark.parametrize("bad", [1.0 + 1e-12, 2.0, float("nan")])
def test_parameter_above_one_rejected(bad):
    with pytest.raises(InvalidArgumentError):
        elliptic_e(bad)
    with pytest.raises(InvalidArgumentError):
        elliptic_k(bad)


def test_k_diverges_at_one():
    with pytest.raises(InvalidArgumentError, match="diverg"):
        elliptic_k(1.0)


@pytest.mark.parametrize("m", [-3.0, -0.6, -1e-5, 1e-12, 1e-4, 0.3, 0.5, 0.50001, 0.9, 1 - 1e-9])
def test_b_against_high_precision(m):
    import mpmath as mp

    mp.mp.dps = 60
    M = mp.mpf(m)
    exact = (mp.ellipe(M) - (1 - M) * mp.ellipk(M)) / M
    assert elliptic_b(m) == pytest.approx(float(exact), rel=1e-14)


def test_b_endpoints():
    assert elliptic_b(0.0) == pytest.approx(math.pi / 4, rel=1e-15)
    assert elliptic_b(1e-300) == pytest.approx(math.pi / 4, rel=1e-15)
    assert elliptic_b(1.0) == 1.0
    with pytest.raises(InvalidArgumentError):
        elliptic_b(1.5)
