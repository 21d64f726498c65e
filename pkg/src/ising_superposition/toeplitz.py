"""Cross correlation <sx_1 sx_{1+R}>^{+-}_F from a block-Toeplitz determinant.

With a_n = c_n^dag + c_n and b_n = c_n^dag - c_n the string operator becomes
sx_1 sx_{1+R} = b_1 a_2 b_2 a_3 ... b_R a_{R+1}.  The generalised Wick theorem
for <g+delta| . |g-delta> / F turns it into the Pfaffian of the antisymmetric
matrix of pair contractions, ordered here as

    A_R = [[ <b_m b_n>,        <b_m a_{n+1}>     ],
           [ <a_{m+1} b_n>,    <a_{m+1} a_{n+1}> ]],   m, n = 1..R,

whose blocks are Toeplitz because the contractions depend on m - n only:

    <a_m a_n>  = <b_m b_n> = (-i/2pi) int dk tan(dtheta_k/2) e^{ik(m-n)},
    <b_m a_n>  = (-1/2pi) int dk e^{-i stheta_k} / cos(dtheta_k/2) e^{ik(m-n)},
    <a_m b_n>  = -<b_n a_m>,

with dtheta = theta+ - theta- and stheta = (theta+ + theta-)/2.  The integrals
are evaluated as midpoint sums on the antiperiodic grid k = (2s+1) pi / N_q,
which never samples k = 0 where the integrands have a 1/k pole whenever the
two fields sit on opposite sides of g = 1.  For finite N_q this is exactly the
N_q-site ring, so the same code checks against dense diagonalisation.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConvergenceError, InvalidArgumentError, NumericalInconsistencyError
from .fermions import check_field, check_size
from .observables import CrossObservable, fidelity, mx_diag_thermo

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE_N = 2**14
MAX_QUADRATURE_N = 2**24
DEFAULT_R_START = 64
DEFAULT_R_CAP = 4096


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ContractionKernel:
    """Tabulated contractions <a_m a_n> and <b_m a_n> for |m - n| <= r_max.

    Arrays are indexed by offset + r_max and are read-only, so one kernel can
    be shared by concurrent determinant evaluations.
    """

    g: float
    delta: float
    r_max: int
    aa_values: np.ndarray = field(repr=False)
    ba_values: np.ndarray = field(repr=False)
    quadrature_N: int

    def _index(self, r):
        r = np.asarray(r)
        if np.any(np.abs(r) > self.r_max):
            raise InvalidArgumentError(f"offset outside the tabulated range |r| <= {self.r_max}")
        return r + self.r_max

    def aa(self, r):
        """<a_m a_n>^{+-}_F at offset r = m - n (equal to <b_m b_n>)."""
        return self.aa_values[self._index(r)]

    def ba(self, r):
        """<b_m a_n>^{+-}_F at offset r = m - n."""
        return self.ba_values[self._index(r)]


def _mode_sums(n_modes, g, delta, r_max):
    k = (2.0 * np.arange(n_modes) + 1.0) * (math.pi / n_modes)
    sin_k, cos_k = np.sin(k), np.cos(k)
    theta_p = np.arctan2(sin_k, g + delta - cos_k)
    theta_m = np.arctan2(sin_k, g - delta - cos_k)
    half_diff = 0.5 * (theta_p - theta_m)
    half_sum = 0.5 * (theta_p + theta_m)
    f_aa = -1j * np.tan(half_diff)
    f_ba = -np.exp(-1j * half_sum) / np.cos(half_diff)
    # sum_s f(k_s) e^{i k_s r} = e^{i pi r / n} * n * ifft(f)[r mod n]
    r = np.arange(-r_max, r_max + 1)
    phase = np.exp(1j * math.pi * r / n_modes)
    aa = np.fft.ifft(f_aa)[r % n_modes] * phase
    ba = np.fft.ifft(f_ba)[r % n_modes] * phase
    return aa, ba


def finite_ring_kernel(N: int, g: float, delta: float, r_max: int | None = None) -> ContractionKernel:
    """Exact contractions of the N-site ring (the discrete analogue of :func:`kernel`)."""
    N = check_size(N)
    r_max = N - 1 if r_max is None else int(r_max)
    aa, ba = _mode_sums(N, check_field(g), check_field(delta, "delta"), r_max)
    return _finish(g, delta, r_max, aa, ba, N, tolerance=1e-12)


def _finish(g, delta, r_max, aa, ba, n_modes, tolerance):
    imag = max(np.abs(aa.imag).max(), np.abs(ba.imag).max())
    if imag <= max(tolerance, 1e-12):
        aa, ba = aa.real.copy(), ba.real.copy()
    else:
        logger.warning("contractions keep an imaginary part of %.3g", imag)
    return ContractionKernel(g, delta, r_max, _readonly(aa), _readonly(ba), n_modes)


def kernel(
    g: float,
    delta: float,
    r_max: int,
    tolerance: float = 1e-10,
    n_start: int = DEFAULT_QUADRATURE_N,
) -> ContractionKernel:
    """Thermodynamic-limit contractions for offsets |r| <= r_max.

    The mode count starts at ``n_start`` (raised to at least 4 (r_max+1)) and
    doubles until two successive tables agree within ``tolerance``.

    Raises
    ------
    ConvergenceError
        If ``MAX_QUADRATURE_N`` is reached first; ``iterates`` carries the
        last two (aa, ba) tables.
    """
    g = check_field(g)
    delta = check_field(delta, "delta")
    if delta < 0:
        raise InvalidArgumentError("delta must be >= 0")
    if tolerance <= 0:
        raise InvalidArgumentError("tolerance must be positive")
    r_max = int(r_max)
    if r_max < 1:
        raise InvalidArgumentError("r_max must be >= 1")
    n_modes = max(int(n_start), 1 << math.ceil(math.log2(4 * (r_max + 1))))
    previous = current = _mode_sums(n_modes, g, delta, r_max)
    while n_modes < MAX_QUADRATURE_N:
        n_modes *= 2
        current = _mode_sums(n_modes, g, delta, r_max)
        change = max(np.abs(current[0] - previous[0]).max(), np.abs(current[1] - previous[1]).max())
        if change <= tolerance:
            return _finish(g, delta, r_max, *current, n_modes, tolerance)
        previous = current
    raise ConvergenceError(
        f"contractions did not settle to {tolerance} by N_q={n_modes}", (previous, current)
    )


@dataclass(frozen=True)
class ToeplitzBlockMatrix:
    """The 2R x 2R antisymmetric contraction matrix A_R."""

    R: int
    entries: np.ndarray = field(repr=False)

    def antisymmetry_error(self, chunk=1024):
        a = self.entries
        worst = 0.0
        for start in range(0, a.shape[0], chunk):
            rows = slice(start, start + chunk)
            worst = max(worst, float(np.abs(a[rows] + a[:, rows].T).max()))
        return worst


def assemble(kern: ContractionKernel, R: int) -> ToeplitzBlockMatrix:
    """Build A_R from the kernel; needs offsets down to -R."""
    R = int(R)
    if R < 1:
        raise InvalidArgumentError("R must be >= 1")
    if kern.r_max < R:
        raise InvalidArgumentError(f"kernel covers |r| <= {kern.r_max}, R={R} needs {R}")
    i = np.arange(R)
    bb = linalg.toeplitz(kern.aa(i), kern.aa(-i))  # [m, n] -> aa(m - n)
    ba = linalg.toeplitz(kern.ba(i - 1), kern.ba(-i - 1))  # [m, n] -> ba(m - n - 1)
    entries = np.block([[bb, ba], [-ba.T, bb]])
    return ToeplitzBlockMatrix(R, entries)


def _log_det(a):
    with warnings.catch_warnings():
        # an exactly singular A_R just means C(R) = 0
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(a, check_finite=False)
    diag = np.diagonal(lu)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    with np.errstate(divide="ignore"):
        log_abs = float(np.sum(np.log(np.abs(diag))))
    phase = float(np.sum(np.angle(diag))) + math.pi * swaps
    return log_abs, math.remainder(phase, 2.0 * math.pi)


def cxx_cross(matrix: ToeplitzBlockMatrix, with_phase: bool = False):
    """|<sx_1 sx_{1+R}>^{+-}_F| = sqrt|det A_R|.

    The determinant of an antisymmetric matrix is a squared Pfaffian, so its
    phase must sit on the real axis; a phase more than 1e-6 rad away raises.
    With ``with_phase`` the phase is returned alongside the value.
    """
    scale = max(1.0, float(np.abs(matrix.entries).max()))
    if matrix.antisymmetry_error() > 1e-12 * scale:
        raise InvalidArgumentError("A_R is not antisymmetric")
    log_abs, phase = _log_det(matrix.entries)
    off_axis = min(abs(phase), math.pi - abs(phase))
    if math.isfinite(log_abs) and off_axis > 1e-6:
        raise NumericalInconsistencyError(f"det A_R has phase {phase:.3g} rad off the real axis")
    value = math.exp(0.5 * log_abs)
    return (value, phase) if with_phase else value


@dataclass(frozen=True)
class MxCrossResult:
    """Converged order-parameter cross term and its convergence record."""

    value: float
    R: int
    history: tuple  # ((R, sqrt C(R)), ...)
    g: float
    delta: float


def mx_cross(
    g: float,
    delta: float,
    tolerance: float = 1e-4,
    r_start: int = DEFAULT_R_START,
    r_cap: int = DEFAULT_R_CAP,
    kern: ContractionKernel | None = None,
) -> MxCrossResult:
    """M^{+-}_{xF} = lim_R sqrt(C(R)) by doubling R until successive values
    differ by less than ``tolerance``.

    ``R`` in the result is the larger of the two separations compared.

    Raises
    ------
    ConvergenceError
        If doubling would exceed ``r_cap``; ``iterates`` is the full history.
    """
    if tolerance <= 0:
        raise InvalidArgumentError("tolerance must be positive")
    if not 1 <= r_start <= r_cap:
        raise InvalidArgumentError("need 1 <= r_start <= r_cap")
    if kern is None:
        kern = kernel(g, delta, r_cap)
    elif kern.r_max < r_cap:
        raise InvalidArgumentError("supplied kernel does not reach r_cap")

    def sqrt_c(R):
        return math.sqrt(cxx_cross(assemble(kern, R)))

    R = r_start
    history = [(R, sqrt_c(R))]
    while 2 * R <= r_cap:
        R *= 2
        history.append((R, sqrt_c(R)))
        logger.debug("g=%g delta=%g R=%d sqrtC=%.10g", g, delta, R, history[-1][1])
        if abs(history[-1][1] - history[-2][1]) < tolerance:
            return MxCrossResult(history[-1][1], R, tuple(history), g, delta)
    raise ConvergenceError(
        f"sqrt C(R) not converged to {tolerance} by R={R} (g={g}, delta={delta})", history
    )


def mx_observable(N: int | None, g: float, delta: float, o_pm_F: float) -> CrossObservable:
    """Order-parameter quadruple around a given normalised cross term.

    Diagonal terms are (1 - g^2)^{1/8}; the fidelity is taken at ring size
    ``N`` (zero for ``N=None``), which sets how strongly the cross term shows.
    """
    F = 1.0 if delta == 0 else (0.0 if N is None else fidelity(N, g, delta))
    return CrossObservable(mx_diag_thermo(g + delta), mx_diag_thermo(g - delta), o_pm_F, F)


def mx_cross_observable(
    N: int | None, g: float, delta: float, tolerance: float = 1e-4, r_cap: int = DEFAULT_R_CAP
) -> CrossObservable:
    """Order-parameter quadruple for the h -> 0+ thermodynamic limit."""
    if delta == 0:
        o_pm_F = mx_diag_thermo(g)
    else:
        o_pm_F = mx_cross(g, delta, tolerance=tolerance, r_cap=r_cap).value
    return mx_observable(N, g, delta, o_pm_F)
