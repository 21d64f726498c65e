"""Critical scaling of the cross terms and of the fidelity.

Near g_c the order-parameter cross term obeys

    M^{+-}_{xF} = delta^beta B(c),   c = (g - g_c) / delta,

and ln F crosses over from -delta^2 N^{2/(d nu)} (N delta^{d nu} << 1) to
-N delta^{d nu} (N delta^{d nu} >> 1); away from g_c it is -N delta^2 |g - g_c|^{d nu - 2}.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError
from .fermions import check_size
from .observables import log_fidelity
from .toeplitz import DEFAULT_R_CAP, mx_cross

logger = logging.getLogger(__name__)

G_C = 1.0
BETA = 0.125
DIM = 1
NU = 1

CROSSOVER_BAND = (0.3, 3.0)
# a factor of 8 admits the doubling grid 0.005 .. 0.04
MIN_DELTA_SPAN = 8.0


@dataclass(frozen=True)
class ScalingSample:
    """One measurement at scaled distance ``c`` from the critical point."""

    c: float
    delta: float
    value: float
    n_sites: int | None = None

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise InvalidArgumentError(f"delta={self.delta} must be positive")
        if not math.isfinite(self.c):
            raise InvalidArgumentError("c must be finite")

    @property
    def g(self) -> float:
        return G_C + self.c * self.delta


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (log x, log y)."""

    slope: float
    intercept: float
    stderr: float
    r_squared: float
    residuals: tuple[float, ...]

    def within(self, expected: float, tol: float) -> bool:
        return abs(self.slope - expected) <= tol


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> PowerLawFit:
    """Fit y = A x^slope.  Needs two or more distinct positive x and positive y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidArgumentError("x and y must be 1-d and of equal length")
    if np.unique(x).size < 2:
        raise InvalidArgumentError("need at least two distinct abscissae")
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgumentError("power-law fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(ly) == 0.0:
        # linregress reports nan for r on a flat line; the fit itself is exact
        return PowerLawFit(0.0, float(ly[0]), 0.0, 1.0, tuple(0.0 for _ in lx))
    res = stats.linregress(lx, ly)
    residuals = ly - (res.intercept + res.slope * lx)
    return PowerLawFit(
        float(res.slope),
        float(res.intercept),
        float(res.stderr),
        float(res.rvalue**2),
        tuple(float(r) for r in residuals),
    )


def check_beta_grid(deltas: Iterable[float]) -> list[float]:
    """Sorted distinct deltas, provided there are four or more spanning a
    factor of at least ``MIN_DELTA_SPAN``."""
    deltas = sorted({float(d) for d in deltas})
    if len(deltas) < 4:
        raise InvalidArgumentError(f"beta fit needs >= 4 distinct deltas, got {len(deltas)}")
    if deltas[0] <= 0:
        raise InvalidArgumentError("deltas must be positive")
    if deltas[-1] / deltas[0] < MIN_DELTA_SPAN * (1 - 1e-12):
        raise InvalidArgumentError(
            f"delta grid spans a factor {deltas[-1] / deltas[0]:.3g} < {MIN_DELTA_SPAN:g}"
        )
    return deltas


def fit_beta(samples: Iterable[ScalingSample]) -> PowerLawFit:
    """Slope of log M^{+-}_{xF} against log delta at the critical point (c = 0)."""
    samples = list(samples)
    if any(abs(s.c) > 1e-12 for s in samples):
        raise InvalidArgumentError("beta fit needs samples at g = g_c (c = 0)")
    check_beta_grid(s.delta for s in samples)
    return fit_power_law([s.delta for s in samples], [s.value for s in samples])


def scaling_function(
    c: float, delta: float, tolerance: float = 1e-4, r_cap: int = DEFAULT_R_CAP
) -> float:
    """B(c) = M^{+-}_{xF}(g_c + c delta, delta) / delta^beta."""
    if not delta > 0:
        raise InvalidArgumentError("delta must be positive")
    value = mx_cross(G_C + c * delta, delta, tolerance=tolerance, r_cap=r_cap).value
    return value / delta**BETA


def b_large_negative_c(c: float) -> float:
    """Deep-ferromagnet asymptote B(c) ~ (-2c)^beta for c << -1."""
    if c >= 0:
        raise InvalidArgumentError("asymptote applies to c < 0 only")
    return (-2.0 * c) ** BETA


def critical_samples(
    deltas: Iterable[float], tolerance: float = 1e-4, r_cap: int = DEFAULT_R_CAP
) -> list[ScalingSample]:
    """M^{+-}_{xF} at g = g_c for each delta, in input order."""
    return [
        ScalingSample(0.0, d, mx_cross(G_C, d, tolerance=tolerance, r_cap=r_cap).value)
        for d in deltas
    ]


def collapse_spread(b_first: float, b_second: float) -> float:
    """Relative disagreement of two B values for the same c."""
    scale = max(abs(b_first), abs(b_second))
    return 0.0 if scale == 0.0 else abs(b_first - b_second) / scale


# --- fidelity regimes -------------------------------------------------------


@dataclass(frozen=True)
class RegimeFit:
    regime: str  # "small", "large" (in N delta^{d nu}) or "far"
    variable: str  # "N" or "delta"
    fixed: float  # the grid value held constant
    expected: float
    fit: PowerLawFit

    @property
    def deviation(self) -> float:
        return self.fit.slope - self.expected


@dataclass(frozen=True)
class FidelityReport:
    g: float
    critical: bool
    fits: tuple[RegimeFit, ...]
    excluded: tuple[tuple[int, float], ...] = ()
    warnings: tuple[str, ...] = field(default=())

    def slopes(self, regime: str, variable: str) -> list[float]:
        return [f.fit.slope for f in self.fits if f.regime == regime and f.variable == variable]


_EXPECTED = {
    ("small", "N"): 2.0 / (DIM * NU),
    ("small", "delta"): 2.0,
    ("large", "N"): 1.0,
    ("large", "delta"): float(DIM * NU),
    ("far", "N"): 1.0,
    ("far", "delta"): 2.0,
}


def classify(N: int, delta: float, g: float, critical: bool) -> str | None:
    """Regime label of one grid point, or None inside the crossover band."""
    if not critical:
        return "far"
    x = N * delta ** (DIM * NU)
    if x < CROSSOVER_BAND[0]:
        return "small"
    if x > CROSSOVER_BAND[1]:
        return "large"
    return None


def fidelity_regimes(
    g: float, n_values: Iterable[int], deltas: Iterable[float]
) -> FidelityReport:
    """Fit -ln F against N (fixed delta) and against delta (fixed N) per regime.

    The chain counts as critical when g_c lies within the largest delta of g,
    so that at least one superposition touches or straddles the transition.
    Points with N delta^{d nu} in the crossover band are dropped and reported;
    delta = 0 points carry ln F = 0 and are skipped.
    """
    n_values = sorted({check_size(N) for N in n_values})
    deltas = sorted({float(d) for d in deltas})
    if not n_values or not deltas:
        raise InvalidArgumentError("empty N or delta grid")
    if deltas[0] < 0:
        raise InvalidArgumentError("deltas must be non-negative")
    critical = abs(g - G_C) <= deltas[-1]

    groups: dict[tuple[str, str, float], list[tuple[float, float]]] = defaultdict(list)
    excluded = []
    for N in n_values:
        for d in deltas:
            if d == 0:
                continue
            regime = classify(N, d, g, critical)
            if regime is None:
                excluded.append((N, d))
                continue
            y = -log_fidelity(N, g, d)
            groups[(regime, "N", d)].append((N, y))
            groups[(regime, "delta", N)].append((d, y))

    fits = []
    for (regime, variable, fixed), points in sorted(groups.items()):
        if len(points) < 2:
            continue
        xs, ys = zip(*points)
        fits.append(
            RegimeFit(regime, variable, fixed, _EXPECTED[(regime, variable)], fit_power_law(xs, ys))
        )

    notes = []
    if excluded:
        notes.append(
            f"{len(excluded)} grid points fall in the crossover band "
            f"N delta^(d nu) in [{CROSSOVER_BAND[0]}, {CROSSOVER_BAND[1]}] and were excluded"
        )
    if not fits:
        notes.append("no regime has two or more points along either axis")
    for note in notes:
        logger.warning(note)
    return FidelityReport(g, critical, tuple(fits), tuple(excluded), tuple(notes))


# --- CSV interchange --------------------------------------------------------


def read_csv(path: str | Path) -> tuple[dict[str, str], list[dict[str, str]]]:
    """Parse a CLI CSV into its ``# key = value`` metadata and data rows."""
    metadata: dict[str, str] = {}
    body = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, sep, value = line[1:].partition("=")
                if sep:
                    metadata[key.strip()] = value.strip()
            elif line.strip():
                body.append(line)
    return metadata, list(csv.DictReader(body))


def read_samples(path: str | Path) -> list[ScalingSample]:
    """Load ScalingSamples from a fig5-upper, fig5-lower or fidelity-scaling CSV.

    fig5-lower rows are converted back to M^{+-}_{xF} = delta^beta B using the
    delta recorded in the metadata; zero-delta fidelity rows are skipped.
    """
    metadata, rows = read_csv(path)
    if not rows:
        return []
    columns = set(rows[0])
    samples = []
    if {"delta", "Mx_cross_F"} <= columns:
        g = float(metadata.get("g", G_C))
        for row in rows:
            d = float(row["delta"])
            samples.append(ScalingSample((g - G_C) / d, d, float(row["Mx_cross_F"])))
    elif {"c", "B"} <= columns:
        if "delta" not in metadata:
            raise InvalidArgumentError("B(c) file lacks the delta metadata entry")
        d = float(metadata["delta"])
        for row in rows:
            if row["B"] in ("", "nan"):
                continue
            samples.append(ScalingSample(float(row["c"]), d, float(row["B"]) * d**BETA))
    elif {"N", "delta", "logF"} <= columns:
        g = float(metadata.get("g", G_C))
        for row in rows:
            d = float(row["delta"])
            if d > 0:
                samples.append(ScalingSample((g - G_C) / d, d, float(row["logF"]), int(row["N"])))
    else:
        raise InvalidArgumentError(f"unrecognised sample columns {sorted(columns)}")
    return samples


def write_fit_report(fit: PowerLawFit, out: TextIO, label: str = "fit", expected: float | None = None):
    """Plain-text summary with one residual per line."""
    out.write(f"{label}: slope = {fit.slope:.12g} +- {fit.stderr:.3g}\n")
    out.write(f"{label}: intercept = {fit.intercept:.12g}\n")
    out.write(f"{label}: r_squared = {fit.r_squared:.12g}\n")
    if expected is not None:
        out.write(f"{label}: expected = {expected:.12g}, deviation = {fit.slope - expected:.3g}\n")
    for i, r in enumerate(fit.residuals):
        out.write(f"{label}: residual[{i}] = {r:.6g}\n")
