"""Figure-ready CSV sweeps from the command line.

Every CSV starts with a ``#`` block recording the configuration, followed by
a header row.  Floats carry 12 significant digits and rows follow parameter
order regardless of ``--threads``, so equal configurations give identical
bytes.

Exit codes: 0 success, 1 I/O error or failed oracle check, 2 invalid
configuration, 3 convergence failure.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import ed, observables, scaling
from .errors import ConvergenceError, InvalidArgumentError, InvalidStateError
from .fermions import energy_per_site_finite
from .superposition import CentralSpinAmplitudes, expectation_conditional, phase_average, standard_average
from .toeplitz import DEFAULT_R_CAP, mx_cross, mx_observable

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a subcommand's output.

    ``out`` and ``threads`` are deliberately left out of the metadata block:
    neither may change the numbers.
    """

    command: str
    params: dict[str, Any] = field(default_factory=dict)
    tol: float = 1e-4
    out: str | None = None
    threads: int = 1

    def __post_init__(self):
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise InvalidArgumentError(f"--tol must be positive, got {self.tol}")
        if self.threads < 1:
            raise InvalidArgumentError("--threads must be >= 1")
        for key, value in self.params.items():
            if isinstance(value, (list, tuple)) and not value:
                raise InvalidArgumentError(f"{key} must not be empty")

    def metadata(self) -> list[str]:
        lines = [f"# command = {self.command}"]
        for key in sorted(self.params):
            lines.append(f"# {key} = {_format_param(self.params[key])}")
        lines.append(f"# tol = {_fmt(self.tol)}")
        return lines


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return f"{float(x) + 0.0:.12g}"  # + 0.0 folds -0 into 0


def _format_param(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return _fmt(value)


def render_csv(config: RunConfig, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    for line in config.metadata():
        buf.write(line + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def emit(config: RunConfig, text: str):
    if config.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)


def parallel_map(func: Callable, items: Sequence, threads: int) -> list:
    """``[func(x) for x in items]`` on a thread pool, in input order.

    The heavy lifting (FFT, LU) runs in numpy/LAPACK with the GIL released.
    """
    if threads == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# --- argument types ----------------------------------------------------------


def float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def ring_size(text: str) -> int | None:
    if text.lower() in ("inf", "infinity", "none"):
        return None
    try:
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"N must be an integer or 'inf', got {text!r}") from exc


def _amplitudes(c_up: float | None, c_down: float | None) -> CentralSpinAmplitudes:
    if c_up is None and c_down is None:
        c_up = c_down = math.sqrt(0.5)
    elif c_down is None:
        c_down = math.sqrt(max(0.0, 1.0 - c_up * c_up))
    elif c_up is None:
        c_up = math.sqrt(max(0.0, 1.0 - c_down * c_down))
    return CentralSpinAmplitudes(c_up, c_down)


# --- subcommands -------------------------------------------------------------


def cmd_fig3(args) -> int:
    amps = _amplitudes(args.c_up, args.c_down)
    config = RunConfig(
        "fig3",
        {"N": args.N, "g": args.g, "delta": args.delta, "c_up": amps.c_up,
         "c_down": amps.c_down, "n_phase": args.n_phase},
        args.tol if args.tol is not None else 1e-12,
        args.out,
        args.threads,
    )
    if args.n_phase < 1:
        raise InvalidArgumentError("--n-phase must be >= 1")
    obs = observables.cross_observable("mz", args.N, args.g, args.delta)
    mean, var = phase_average(obs, amps)
    sd = math.sqrt(var)
    rows = []
    for j in range(args.n_phase):
        phase = 2.0 * math.pi * j / args.n_phase
        value = expectation_conditional(obs, amps.with_phase(phase))
        rows.append((phase, value, mean, mean + sd, mean - sd))
    columns = ["delta_phase", "Mz_conditional", "Mz_mean", "Mz_mean_plus_sd", "Mz_mean_minus_sd"]
    emit(config, render_csv(config, columns, rows))
    print(f"# fidelity = {obs.fidelity:.12g}  Mz_mean = {mean:.12g}  Mz_sd = {sd:.6g}", file=sys.stderr)
    return EXIT_OK


def _grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise InvalidArgumentError("grid needs at least one point")
    if steps == 1:
        return [lo]
    return [float(v) for v in np.linspace(lo, hi, steps)]


def cmd_fig4(args) -> int:
    amps = _amplitudes(args.c_up, args.c_down)
    tol = args.tol if args.tol is not None else 1e-4
    g_values = args.g_values or _grid(args.g_min, args.g_max, args.g_steps)
    config = RunConfig(
        "fig4",
        {"N": args.N if args.N is not None else "inf", "delta": args.delta, "c_up": amps.c_up,
         "c_down": amps.c_down, "g": g_values, "r_cap": args.r_cap},
        tol, args.out, args.threads,
    )
    if args.delta <= 0:
        raise InvalidArgumentError("--delta must be positive")

    def row(g):
        try:
            result = mx_cross(g, args.delta, tolerance=tol, r_cap=args.r_cap)
        except ConvergenceError as exc:
            last_R = exc.iterates[-1][0] if exc.iterates else 0
            obs = mx_observable(args.N, g, args.delta, math.nan)
            return (g, standard_average(obs, amps), math.nan, math.nan, last_R, "not_converged")
        obs = mx_observable(args.N, g, args.delta, result.value)
        # Delta = 0 and pi bracket the standard value; which one is larger
        # depends on the sign of M_xF - M_x^s
        extrema = (expectation_conditional(obs, amps, "+"), expectation_conditional(obs, amps, "-"))
        return (g, standard_average(obs, amps), max(extrema), min(extrema), result.R, "ok")

    rows = parallel_map(row, g_values, config.threads)
    columns = ["g", "Mx_standard", "Mx_upper", "Mx_lower", "R_used", "status"]
    emit(config, render_csv(config, columns, rows))
    return EXIT_CONVERGENCE if any(r[-1] != "ok" for r in rows) else EXIT_OK


def cmd_fig5_upper(args) -> int:
    tol = args.tol if args.tol is not None else 1e-4
    config = RunConfig(
        "fig5-upper", {"g": scaling.G_C, "deltas": args.deltas, "r_cap": args.r_cap},
        tol, args.out, args.threads,
    )
    scaling.check_beta_grid(args.deltas)
    results = parallel_map(
        lambda d: mx_cross(scaling.G_C, d, tolerance=tol, r_cap=args.r_cap), args.deltas, config.threads
    )
    rows = [(r.delta, r.value, r.R) for r in results]
    emit(config, render_csv(config, ["delta", "Mx_cross_F", "R_used"], rows))
    fit = scaling.fit_beta(scaling.ScalingSample(0.0, r.delta, r.value) for r in results)
    report = io.StringIO()
    scaling.write_fit_report(fit, report, "beta", scaling.BETA)
    sys.stderr.write(report.getvalue())
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.getvalue())
    return EXIT_OK


def cmd_fig5_lower(args) -> int:
    tol = args.tol if args.tol is not None else 1e-4
    config = RunConfig(
        "fig5-lower", {"delta": args.delta, "c": args.c_values, "r_cap": args.r_cap},
        tol, args.out, args.threads,
    )
    if args.delta <= 0:
        raise InvalidArgumentError("--delta must be positive")

    def row(c):
        try:
            result = mx_cross(scaling.G_C + c * args.delta, args.delta, tolerance=tol, r_cap=args.r_cap)
        except ConvergenceError as exc:
            last_R = exc.iterates[-1][0] if exc.iterates else 0
            return (c, math.nan, last_R, "not_converged")
        return (c, result.value / args.delta**scaling.BETA, result.R, "ok")

    rows = parallel_map(row, args.c_values, config.threads)
    emit(config, render_csv(config, ["c", "B", "R_used", "status"], rows))
    return EXIT_CONVERGENCE if any(r[-1] != "ok" for r in rows) else EXIT_OK


def cmd_fidelity_scaling(args) -> int:
    config = RunConfig(
        "fidelity-scaling", {"g": args.g, "N": args.N_values, "deltas": args.deltas},
        args.tol if args.tol is not None else 1e-12, args.out, args.threads,
    )
    grid = [(N, d) for N in args.N_values for d in args.deltas]
    rows = [(N, d, observables.log_fidelity(N, args.g, d)) for N, d in grid]
    emit(config, render_csv(config, ["N", "delta", "logF"], rows))
    report = scaling.fidelity_regimes(args.g, args.N_values, args.deltas)
    for fit in report.fits:
        print(
            f"# {fit.regime:5s} slope vs {fit.variable:5s} at fixed {_fmt(fit.fixed)}: "
            f"{fit.fit.slope:.6g} (expected {fit.expected:g}, R^2 = {fit.fit.r_squared:.6f})",
            file=sys.stderr,
        )
    for note in report.warnings:
        print(f"# warning: {note}", file=sys.stderr)
    return EXIT_OK


ORACLE_QUANTITIES = ("energy", "fidelity", "Mz_pp", "Mz_mm", "Mz_pm", "Cx_pp", "Cx_mm", "Cx_pm")


def oracle_errors(N: int, g: float, delta: float) -> dict[str, float]:
    """Absolute differences between free-fermion values and dense diagonalisation."""
    plus, minus = ed.ground_state_pair(N, g, delta)
    F_ed = ed.overlap(minus, plus).real
    bond = ed.bond_xx(0, N)

    def ed_values(op):
        return (
            ed.cross_expectation(op, plus, plus).real,
            ed.cross_expectation(op, minus, minus).real,
            ed.cross_expectation(op, plus, minus).real,
        )

    mz = ed_values(ed.sz(0))
    cx = ed_values(bond)
    ff_mz = (observables.mz_diag(g + delta, N), observables.mz_diag(g - delta, N),
             observables.mz_cross(N, g, delta).value)
    ff_cx = (observables.cx_diag(g + delta, N), observables.cx_diag(g - delta, N),
             observables.cx_cross(N, g, delta).value)
    energy = max(
        abs(plus.energy / N - energy_per_site_finite(N, g + delta)),
        abs(minus.energy / N - energy_per_site_finite(N, g - delta)),
    )
    errors = {"energy": energy, "fidelity": abs(F_ed - observables.fidelity(N, g, delta))}
    for label, ed_v, ff_v in (("Mz", mz, ff_mz), ("Cx", cx, ff_cx)):
        for suffix, a, b in zip(("pp", "mm", "pm"), ed_v, ff_v):
            errors[f"{label}_{suffix}"] = abs(a - b)
    return errors


def cmd_oracle_check(args) -> int:
    tol = args.tol if args.tol is not None else 1e-8
    config = RunConfig(
        "oracle-check", {"N": args.N_values, "points": args.points, "seed": args.seed},
        tol, args.out, args.threads,
    )
    if args.points < 1:
        raise InvalidArgumentError("--points must be >= 1")
    rng = np.random.default_rng(args.seed)
    points = [(float(g), float(d)) for g, d in zip(rng.uniform(0.0, 2.0, args.points),
                                                   rng.uniform(0.01, 0.3, args.points))]
    cases = [(N, g, d) for N in args.N_values for g, d in points]
    results = parallel_map(lambda c: oracle_errors(*c), cases, config.threads)
    worst = {q: max(r[q] for r in results) for q in ORACLE_QUANTITIES}
    lines = config.metadata()
    lines += [f"{'PASS' if worst[q] <= tol else 'FAIL'} {q} max_abs_err={worst[q]:.3e}" for q in ORACLE_QUANTITIES]
    failed = sum(worst[q] > tol for q in ORACLE_QUANTITIES)
    lines.append(f"{'PASS' if not failed else 'FAIL'} overall {len(cases)} cases, {failed} quantities failed")
    emit(config, "\n".join(lines) + "\n")
    return EXIT_OK if not failed else EXIT_IO


def cmd_observables(args) -> int:
    tol = args.tol if args.tol is not None else 1e-4
    config = RunConfig(
        "observables", {"name": args.name, "N": args.N if args.N is not None else "inf",
                        "g": args.g, "delta": args.delta, "r_cap": args.r_cap},
        tol, args.out, args.threads,
    )
    if args.name == "mx":
        if args.delta == 0:
            obs = mx_observable(args.N, args.g, 0.0, observables.mx_diag_thermo(args.g))
        else:
            obs = mx_observable(args.N, args.g, args.delta,
                                mx_cross(args.g, args.delta, tolerance=tol, r_cap=args.r_cap).value)
    else:
        obs = observables.cross_observable(args.name, args.N, args.g, args.delta)
    lines = config.metadata() + [
        f"o_pp = {_fmt(obs.o_pp)}",
        f"o_mm = {_fmt(obs.o_mm)}",
        f"o_pm = {_fmt(obs.o_pm)}",
        f"o_pm_F = {_fmt(obs.o_pm_F)}",
        f"fidelity = {_fmt(obs.fidelity)}",
    ]
    emit(config, "\n".join(lines) + "\n")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--tol", type=float, help="tolerance; meaning and default depend on the subcommand")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="ising-superposition",
        description="Superposed Ising ground states: figure sweeps and single-point queries.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig3", parents=[common], help="conditional M_z versus the relative phase")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c-up", type=float, default=0.5)
    p.add_argument("--c-down", type=float, default=None, help="default sqrt(1 - c_up^2)")
    p.add_argument("--n-phase", type=int, default=64, help="phase grid points on [0, 2 pi)")
    p.set_defaults(func=cmd_fig3)

    p = sub.add_parser("fig4", parents=[common], help="M_x band: standard value and conditional extrema")
    p.add_argument("--N", type=ring_size, default=100, help="ring size for the fidelity, or 'inf'")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--c-up", type=float, default=None)
    p.add_argument("--c-down", type=float, default=None)
    p.add_argument("--g-min", type=float, default=0.8)
    p.add_argument("--g-max", type=float, default=1.2)
    p.add_argument("--g-steps", type=int, default=41)
    p.add_argument("--g-values", type=float_list, default=None, help="explicit g grid (overrides min/max/steps)")
    p.add_argument("--r-cap", type=int, default=DEFAULT_R_CAP)
    p.set_defaults(func=cmd_fig4)

    p = sub.add_parser("fig5-upper", parents=[common], help="M_xF cross term at g_c versus delta")
    p.add_argument("--deltas", type=float_list, default=[0.005, 0.01, 0.02, 0.03, 0.04, 0.05])
    p.add_argument("--r-cap", type=int, default=DEFAULT_R_CAP)
    p.add_argument("--report", help="also write the fit report to this path")
    p.set_defaults(func=cmd_fig5_upper)

    p = sub.add_parser("fig5-lower", parents=[common], help="scaling function B(c) at fixed delta")
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--c-values", type=float_list,
                   default=[-4.0, -3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 2.0])
    p.add_argument("--r-cap", type=int, default=DEFAULT_R_CAP)
    p.set_defaults(func=cmd_fig5_lower)

    p = sub.add_parser("fidelity-scaling", parents=[common], help="ln F over an (N, delta) grid")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--N-values", type=int_list, default=[2**k for k in range(6, 15)])
    p.add_argument("--deltas", type=float_list, default=[1e-4, 1e-3, 0.05])
    p.set_defaults(func=cmd_fidelity_scaling)

    p = sub.add_parser("oracle-check", parents=[common], help="free fermions versus dense diagonalisation")
    p.add_argument("--N-values", type=int_list, default=[4, 6, 8, 10])
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("observables", parents=[common], help="one (O++, O--, O+-, O+-/F, F) quadruple")
    p.add_argument("--name", choices=("mz", "cx", "mx"), default="mz")
    p.add_argument("--N", type=ring_size, default=100, help="ring size or 'inf'")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--r-cap", type=int, default=DEFAULT_R_CAP)
    p.set_defaults(func=cmd_observables)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidArgumentError, InvalidStateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
