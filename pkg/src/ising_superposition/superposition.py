"""Chain state left behind after measuring the central spin along x.

Adiabatic driving of the composite system ends in

    c_up e^{i phi_up} |up>|g+delta> + c_down e^{i phi_down} |down>|g-delta>,

and a sx_S measurement with outcome +- projects the chain onto
(c_up e^{i phi_up}|g+delta> +- c_down e^{i phi_down}|g-delta>) / norm.
Only the relative phase Delta = phi_up - phi_down enters any observable, and
the - outcome is the + outcome with Delta shifted by pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError, InvalidStateError
from .observables import CrossObservable


@dataclass(frozen=True)
class CentralSpinAmplitudes:
    """Moduli of the central-spin amplitudes and their relative phase."""

    c_up: float
    c_down: float
    phase: float = 0.0

    def __post_init__(self):
        if self.c_up < 0 or self.c_down < 0:
            raise InvalidArgumentError("amplitude moduli must be non-negative")
        if abs(self.c_up**2 + self.c_down**2 - 1.0) > 1e-12:
            raise InvalidArgumentError("c_up^2 + c_down^2 must equal 1")
        if not math.isfinite(self.phase):
            raise InvalidArgumentError("phase must be finite")

    @classmethod
    def balanced(cls, phase=0.0):
        return cls(math.sqrt(0.5), math.sqrt(0.5), phase)

    def with_phase(self, phase):
        return CentralSpinAmplitudes(self.c_up, self.c_down, phase)

    @property
    def interference(self):
        """2 c_up c_down cos(Delta)."""
        return 2.0 * self.c_up * self.c_down * math.cos(self.phase)


def _phase_for(amps, outcome):
    if outcome == "+":
        return amps
    if outcome == "-":
        return amps.with_phase(amps.phase + math.pi)
    raise InvalidArgumentError(f"outcome must be '+' or '-', got {outcome!r}")


def measure_probability(amps: CentralSpinAmplitudes, fidelity: float) -> tuple[float, float]:
    """Probabilities (P+, P-) = 1/2 +- c_up c_down cos(Delta) F."""
    if not (0.0 <= fidelity <= 1.0):
        raise InvalidArgumentError(f"fidelity={fidelity} outside [0, 1]")
    shift = 0.5 * amps.interference * fidelity
    return 0.5 + shift, 0.5 - shift


def standard_average(obs: CrossObservable, amps: CentralSpinAmplitudes) -> float:
    """O^s = c_up^2 O^{++} + c_down^2 O^{--}, the value without interference."""
    return amps.c_up**2 * obs.o_pp + amps.c_down**2 * obs.o_mm


def expectation_conditional(
    obs: CrossObservable, amps: CentralSpinAmplitudes, outcome: str = "+"
) -> float:
    """Expectation value in the chain state conditioned on the measurement outcome.

        O = (O^s + 2 c_up c_down cos(Delta) O^{+-}) / (1 + 2 c_up c_down cos(Delta) F)
    """
    amps = _phase_for(amps, outcome)
    x = amps.interference
    denominator = 1.0 + x * obs.fidelity
    if denominator <= 0.0:
        raise InvalidStateError("post-measurement state has zero norm")
    return (standard_average(obs, amps) + x * obs.o_pm) / denominator


def phase_average(obs: CrossObservable, amps: CentralSpinAmplitudes) -> tuple[float, float]:
    """Mean and variance of the '+'-conditioned value over a uniform Delta.

    Each Delta is weighted by P+(Delta).  The mean is exactly O^s and

        var = (O^s - O^{+-}/F)^2 (1/sqrt(1 - x^2) - 1),   x = 2 c_up c_down F.

    ``amps.phase`` is ignored.
    """
    mean = standard_average(obs, amps)
    x = 2.0 * amps.c_up * amps.c_down * obs.fidelity
    spread = mean - obs.o_pm_F
    if x >= 1.0:
        # only reachable at delta = 0 with c_up = c_down, where both states coincide
        if abs(spread) > 1e-12:
            raise InvalidStateError("x = 2 c_up c_down F reached 1 with distinct states")
        return mean, 0.0
    s = math.sqrt(1.0 - x * x)
    # 1/s - 1 written without cancellation for x << 1
    return mean, spread * spread * x * x / (s * (1.0 + s))
