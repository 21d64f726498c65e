"""Transverse-field Ising ring driven by a quantum field g + delta sz_S.

Exact free-fermion observables for the two ground states |g +- delta>, their
cross terms and fidelity, the post-measurement superposition, the
block-Toeplitz order-parameter cross term, critical scaling fits and a dense
diagonalisation oracle.
"""

from .errors import (
    ConvergenceError,
    DegenerateInputError,
    InvalidArgumentError,
    InvalidStateError,
    NumericalInconsistencyError,
)
from .fermions import ChainSpec, angles, bogoliubov_angle, energy_per_site_finite, energy_per_site_thermo
from .observables import (
    CrossObservable,
    CrossTerm,
    cross_observable,
    cx_cross,
    cx_diag,
    fidelity,
    log_fidelity,
    mx_diag_thermo,
    mz_cross,
    mz_diag,
)
from .scaling import ScalingSample, fidelity_regimes, fit_beta, scaling_function
from .superposition import (
    CentralSpinAmplitudes,
    expectation_conditional,
    measure_probability,
    phase_average,
    standard_average,
)
from .toeplitz import assemble, cxx_cross, kernel, mx_cross, mx_cross_observable

__version__ = "0.1.0"

__all__ = [
    "CentralSpinAmplitudes",
    "ChainSpec",
    "ConvergenceError",
    "CrossObservable",
    "CrossTerm",
    "DegenerateInputError",
    "InvalidArgumentError",
    "InvalidStateError",
    "NumericalInconsistencyError",
    "ScalingSample",
    "angles",
    "assemble",
    "bogoliubov_angle",
    "cross_observable",
    "cx_cross",
    "cx_diag",
    "cxx_cross",
    "energy_per_site_finite",
    "energy_per_site_thermo",
    "expectation_conditional",
    "fidelity",
    "fidelity_regimes",
    "fit_beta",
    "kernel",
    "log_fidelity",
    "measure_probability",
    "mx_cross",
    "mx_cross_observable",
    "mx_diag_thermo",
    "mz_cross",
    "mz_diag",
    "phase_average",
    "scaling_function",
    "standard_average",
]
