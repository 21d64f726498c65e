"""Complete elliptic integrals of the first and second kind.

Parameter convention (not modulus)::

    K(m) = int_0^{pi/2} dphi / sqrt(1 - m sin^2 phi)
    E(m) = int_0^{pi/2} dphi * sqrt(1 - m sin^2 phi)

Both are evaluated with the arithmetic-geometric mean, which converges
quadratically for every m < 1 including m -> 1^- and negative m.  The
combination B(m) = (E - (1-m) K) / m is provided separately because forming
it from E and K loses all digits as m -> 0.
"""

import math
import sys

from scipy import integrate

from .errors import InvalidArgumentError

_MAX_ITER = 64
_TOL = 4.0 * sys.float_info.epsilon


def _agm(m, include_c0=True):
    """Return (a_inf, sum_n 2^(n-1) c_n^2) for the AGM started at (1, sqrt(1-m)).

    With ``include_c0=False`` the n = 0 term m/2 is left out of the sum.
    Returns None if the iteration does not settle within ``_MAX_ITER`` steps.
    """
    a, b = 1.0, math.sqrt(1.0 - m)
    power = 0.5
    csum = power * m if include_c0 else 0.0  # c_0^2 = m
    for _ in range(_MAX_ITER):
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        power *= 2.0
        csum += power * c * c
        if abs(c) <= _TOL * a:
            return a, csum
    return None


def _check(m):
    m = float(m)
    if math.isnan(m):
        raise InvalidArgumentError("elliptic parameter is NaN")
    if m > 1.0:
        raise InvalidArgumentError(f"elliptic parameter m={m} exceeds 1")
    return m


def _quad(integrand):
    value, _ = integrate.quad(integrand, 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=1e-13, limit=200)
    return value


def elliptic_k(m):
    """Complete elliptic integral of the first kind K(m), m < 1.

    Raises
    ------
    InvalidArgumentError
        If m > 1, or m == 1 where K diverges logarithmically.
    """
    m = _check(m)
    if m == 1.0:
        raise InvalidArgumentError("K(m) diverges at m = 1")
    res = _agm(m)
    if res is None:
        return _quad(lambda phi: 1.0 / math.sqrt(1.0 - m * math.sin(phi) ** 2))
    a, _ = res
    return 0.5 * math.pi / a


def elliptic_e(m):
    """Complete elliptic integral of the second kind E(m), m <= 1."""
    m = _check(m)
    if m == 1.0:
        return 1.0
    res = _agm(m)
    if res is None:
        return _quad(lambda phi: math.sqrt(1.0 - m * math.sin(phi) ** 2))
    a, csum = res
    return 0.5 * math.pi / a * (1.0 - csum)


def elliptic_b(m):
    """B(m) = (E(m) - (1-m) K(m)) / m for m <= 1, with B(0) = pi/4 and B(1) = 1.

    For small m this is K (1/2 - sum_{n>=1} 2^(n-1) c_n^2 / m), free of the
    cancellation in E - (1-m) K.
    """
    m = _check(m)
    if m == 1.0:
        return 1.0
    if abs(m) > 0.5:
        return (elliptic_e(m) - (1.0 - m) * elliptic_k(m)) / m
    if m == 0.0:
        return 0.25 * math.pi
    res = _agm(m, include_c0=False)
    if res is None:
        return _quad(lambda phi: math.cos(phi) ** 2 / math.sqrt(1.0 - m * math.sin(phi) ** 2))
    a, rest = res
    return 0.5 * math.pi / a * (0.5 - rest / m)
