"""Diagonal and cross expectation values in the two ground states |g+delta>, |g-delta>.

Finite-N quantities are exact mode sums.  ``N=None`` selects the
thermodynamic limit, where elliptic-integral closed forms apply and the
fidelity vanishes (Anderson orthogonality), so only the fidelity-normalised
cross term survives.

Cross terms come in two independent routes:

* ``"spectral"``: the mode sum for <g+d| sz |g-d> / F;
* ``"energy"``: projecting the two eigen-equations H_I(g+-d)|g+-d> = N eps |g+-d>
  onto the other state gives a 2x2 linear system in (C_x^{+-}, M_z^{+-}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .elliptic import elliptic_b, elliptic_e
from .errors import DegenerateInputError, InvalidArgumentError
from .fermions import (
    check_field,
    dispersion,
    energy_per_site_finite,
    energy_per_site_thermo,
    momenta,
)

class CrossTerm(NamedTuple):
    """A cross matrix element and its fidelity-normalised counterpart."""

    value: float
    normalized: float


@dataclass(frozen=True)
class CrossObservable:
    """Everything the superposed state needs to know about one operator.

    ``o_pm_F`` is stored rather than ``o_pm`` because it stays finite when the
    fidelity underflows or vanishes (thermodynamic limit).
    """

    o_pp: float
    o_mm: float
    o_pm_F: float
    fidelity: float

    def __post_init__(self):
        if not (0.0 <= self.fidelity <= 1.0 + 1e-12):
            raise InvalidArgumentError(f"fidelity={self.fidelity} outside [0, 1]")

    @property
    def o_pm(self) -> float:
        return self.fidelity * self.o_pm_F


def _half_angles(N, g, delta):
    k = momenta(N)
    g = check_field(g)
    delta = check_field(delta, "delta")
    tp = np.arctan2(np.sin(k), g + delta - np.cos(k))
    tm = np.arctan2(np.sin(k), g - delta - np.cos(k))
    return 0.5 * (tp + tm), 0.5 * (tp - tm)


def log_fidelity(N: int, g: float, delta: float) -> float:
    """ln F with F = <g-delta|g+delta> = prod_{k>0} cos((theta+ - theta-)/2).

    Summed in log space so that it stays finite where F itself underflows.
    """
    _, half_diff = _half_angles(N, g, delta)
    return math.fsum(np.log(np.cos(half_diff)))


def fidelity(N: int, g: float, delta: float) -> float:
    """Ground-state fidelity, in (0, 1]; equals 1 only at delta = 0."""
    return math.exp(log_fidelity(N, g, delta))


def _energy(N, g_eff):
    return energy_per_site_thermo(g_eff) if N is None else energy_per_site_finite(N, g_eff)


def _mz_thermo(g):
    # g >= 0; Landen form of [(1+g) E(chi) + (g-1) K(chi)] / (pi g), plus duality for g > 1
    if g <= 1.0:
        return 2.0 * g * elliptic_b(g * g) / math.pi
    return 2.0 * elliptic_e(1.0 / (g * g)) / math.pi


def _cx_thermo(g):
    # g >= 0; Landen form of [(1+g) E(chi) + (1-g) K(chi)] / pi, plus duality for g > 1
    if g <= 1.0:
        return 2.0 * elliptic_e(g * g) / math.pi
    return 2.0 * elliptic_b(1.0 / (g * g)) / (math.pi * g)


def mz_diag(g_eff: float, N: int | None = None) -> float:
    """Transverse magnetisation <g|sz_n|g>.

    Finite N: (2/N) sum_{k>0} cos theta_k.  N=None: the elliptic closed form

        M_z = [(1+g) E(chi) + (g-1) K(chi)] / (pi g),   chi = 4g/(1+g)^2,

    evaluated at |g| and continued as an odd function of g.  The Landen
    transformation turns it into (2g/pi) B(g^2) for g <= 1 and (2/pi) E(1/g^2)
    above, which removes the 1/g singularity and the cancellation near g = 0.
    """
    g_eff = check_field(g_eff, "g_eff")
    if N is not None:
        k = momenta(N)
        return 2.0 * math.fsum((g_eff - np.cos(k)) / dispersion(g_eff, k)) / N
    return math.copysign(_mz_thermo(abs(g_eff)), g_eff)


def cx_diag(g_eff: float, N: int | None = None) -> float:
    """Nearest-neighbour correlator <g|sx_n sx_{n+1}|g>.

    Finite N follows from the eigen-equation, C_x = -eps_N - g M_z; the
    thermodynamic limit is [(1+g) E(chi) + (1-g) K(chi)] / pi at |g|, which
    is the self-dual partner of M_z: C_x(g) = M_z(1/g).
    """
    g_eff = check_field(g_eff, "g_eff")
    if N is not None:
        return -energy_per_site_finite(N, g_eff) - g_eff * mz_diag(g_eff, N)
    return _cx_thermo(abs(g_eff))


def mx_diag_thermo(g_eff: float) -> float:
    """Spontaneous magnetisation (1 - g^2)^{1/8} in the ferromagnet, else 0."""
    g_eff = check_field(g_eff, "g_eff")
    return (1.0 - g_eff * g_eff) ** 0.125 if abs(g_eff) < 1.0 else 0.0


def _pick_route(route, N):
    if route is None:
        return "energy" if N is None else "spectral"
    if route not in ("spectral", "energy"):
        raise InvalidArgumentError(f"unknown route {route!r}")
    if route == "spectral" and N is None:
        raise InvalidArgumentError("the spectral route needs a finite N")
    return route


def _fidelity_or_zero(N, g, delta):
    return 0.0 if N is None else fidelity(N, g, delta)


def _mz_cross_normalized(N, g, delta, route):
    if route == "spectral":
        half_sum, half_diff = _half_angles(N, g, delta)
        return 2.0 * math.fsum(np.cos(half_sum) / np.cos(half_diff)) / N
    if delta == 0:
        raise DegenerateInputError("energy route needs delta > 0; use mz_diag")
    return (_energy(N, g - delta) - _energy(N, g + delta)) / (2.0 * delta)


def mz_cross(N: int | None, g: float, delta: float, route: str | None = None) -> CrossTerm:
    """Cross magnetisation <g+delta|sz_n|g-delta> and its value divided by F.

    Parameters
    ----------
    N : int or None
        Ring size; None for the thermodynamic limit (energy route only).
    route : {"spectral", "energy"}, optional
        Defaults to the mode sum at finite N and the elliptic energy
        difference at N = infinity.
    """
    route = _pick_route(route, N)
    normalized = _mz_cross_normalized(N, g, delta, route)
    return CrossTerm(_fidelity_or_zero(N, g, delta) * normalized, normalized)


def cx_cross(N: int | None, g: float, delta: float, route: str | None = None) -> CrossTerm:
    """Cross bond correlator <g+delta|sx_n sx_{n+1}|g-delta> and its value over F.

    The energy route solves the 2x2 system

        -C^{+-} - (g +- delta) M_z^{+-} = eps(g +- delta) F

    for C^{+-}; the spectral route takes M_z^{+-} from its mode sum and uses
    only the (g + delta) projection.
    """
    route = _pick_route(route, N)
    if delta == 0:
        raise DegenerateInputError("cross route needs delta > 0; use cx_diag")
    if route == "energy":
        e_plus, e_minus = _energy(N, g + delta), _energy(N, g - delta)
        normalized = ((g - delta) * e_plus - (g + delta) * e_minus) / (2.0 * delta)
    else:
        mz_f = _mz_cross_normalized(N, g, delta, "spectral")
        normalized = -_energy(N, g + delta) - (g + delta) * mz_f
    return CrossTerm(_fidelity_or_zero(N, g, delta) * normalized, normalized)


def cross_observable(name: str, N: int | None, g: float, delta: float) -> CrossObservable:
    """Bundle O^{++}, O^{--}, O^{+-}/F and F for ``name`` in {"mz", "cx"}.

    ``delta == 0`` is allowed: the cross term then equals the diagonal one.
    The transverse order parameter ("mx") needs the block-Toeplitz machinery,
    see :func:`ising_superposition.toeplitz.mx_cross_observable`.
    """
    if name == "mz":
        diag, cross = mz_diag, mz_cross
    elif name == "cx":
        diag, cross = cx_diag, cx_cross
    else:
        raise InvalidArgumentError(f"unknown observable {name!r}")
    o_pp, o_mm = diag(g + delta, N), diag(g - delta, N)
    o_pm_F = o_pp if delta == 0 else cross(N, g, delta).normalized
    return CrossObservable(o_pp, o_mm, o_pm_F, _fidelity_or_zero(N, g, delta) if delta else 1.0)
