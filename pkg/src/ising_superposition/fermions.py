"""Free-fermion solution of the periodic transverse-field Ising ring.

    H_I(g) = - sum_n ( sx_n sx_{n+1} + g sz_n ),   sx_{N+1} = sx_1

After Jordan-Wigner and Fourier transforms, the even spin-flip-parity sector
is a BCS product over antiperiodic momenta k = +-(2s+1) pi / N.  Each pair
(k, -k) is rotated by the Bogoliubov angle theta_k with

    tan theta_k = sin k / (g - cos k),

and the ground state reads prod_{k>0} [cos(theta_k/2)|00> - sin(theta_k/2)|11>].
Negative momenta carry theta_{-k} = -theta_k, so every sum over all N modes
is twice the sum over the N/2 positive ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .elliptic import elliptic_e
from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one ring coupled to the central spin.

    Attributes
    ----------
    N : int
        Number of ring sites (even, >= 2).
    g : float
        Classical transverse field.
    delta : float
        Amplitude of the quantum part of the field, g_hat = g + delta * sz_S.
    h : float
        Longitudinal symmetry-breaking field; only the dense oracle uses it.
    """

    N: int
    g: float
    delta: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        check_size(self.N)
        for name in ("g", "delta", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidArgumentError(f"{name}={value} is not finite")
        if self.delta < 0:
            raise InvalidArgumentError(f"delta={self.delta} must be >= 0")
        if self.h < 0:
            raise InvalidArgumentError(f"h={self.h} must be >= 0")

    @property
    def g_plus(self) -> float:
        return self.g + self.delta

    @property
    def g_minus(self) -> float:
        return self.g - self.delta


def check_size(N) -> int:
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise InvalidArgumentError(f"N={N!r} must be an integer")
    if N < 2 or N % 2:
        raise InvalidArgumentError(f"N={N} must be even and >= 2")
    return int(N)


def check_field(value, name="g") -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name}={value} is not finite")
    return value


def momenta(N: int) -> np.ndarray:
    """Positive antiperiodic momenta (2s+1) pi / N, s = 0 .. N/2 - 1."""
    N = check_size(N)
    return (2.0 * np.arange(N // 2) + 1.0) * (math.pi / N)


def bogoliubov_angle(g_eff, k):
    """Bogoliubov angle theta_k in (0, pi) for momentum k in (0, pi).

    The branch is fixed by ``arctan2(sin k, g_eff - cos k)``, which is
    continuous in ``g_eff`` and tends to 0 (pi) as g_eff -> +inf (-inf).
    """
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0.0)) or np.any(~(k < math.pi)):
        raise InvalidArgumentError("momenta must lie strictly inside (0, pi)")
    theta = np.arctan2(np.sin(k), check_field(g_eff, "g_eff") - np.cos(k))
    return theta if theta.ndim else float(theta)


def angles(N: int, g_eff: float) -> np.ndarray:
    """Bogoliubov angles on the positive momenta of an N-site ring."""
    return bogoliubov_angle(g_eff, momenta(N))


def dispersion(g_eff, k):
    """Single-mode energy sqrt((g - cos k)^2 + sin^2 k) = |g - e^{ik}|."""
    return np.hypot(g_eff - np.cos(k), np.sin(k))


def energy_per_site_finite(N: int, g_eff: float) -> float:
    """Ground-state energy per site of the N-site ring (even parity sector)."""
    k = momenta(N)
    g_eff = check_field(g_eff, "g_eff")
    return -2.0 * math.fsum(dispersion(g_eff, k)) / N


def energy_per_site_thermo(g_eff: float) -> float:
    """N -> infinity energy per site, -(2/pi) |1+g| E(4g/(1+g)^2).

    Evaluated at |g_eff|: the spectrum is even in g, and the elliptic
    parameter 4|g|/(1+|g|)^2 then lies in [0, 1] with no pole at g = -1.
    """
    g = abs(check_field(g_eff, "g_eff"))
    return -2.0 / math.pi * (1.0 + g) * elliptic_e(elliptic_parameter(g))


def elliptic_parameter(g: float) -> float:
    """chi = 4g / (1+g)^2 for g >= 0; never exceeds 1 since (1-g)^2 >= 0."""
    # rounding can push the ratio a few ulp above 1 next to g = 1
    return min(4.0 * g / (1.0 + g) ** 2, 1.0)
