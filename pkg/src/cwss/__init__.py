"""Compressive wideband spectrum sensing toolkit.

Simulates sub-Nyquist acquisition of sparse multiband signals, recovers
their spectra with l1 / group / iteratively-reweighted-group solvers, and
scores subband energy detection under seeded Monte Carlo evaluation.
"""

__version__ = "0.1.0"

from .bandplan import BandPlan
from .detection import (
    EdperResult,
    OccupancyReport,
    detect_holes,
    edper,
    normalize_total,
    subband_energies,
)
from .sampling import SamplingPattern, acquire, adjoint, dense_matrix, draw_pattern, forward
from .signal_model import (
    GroundTruth,
    InvalidSpecError,
    SignalSpec,
    add_awgn,
    generate_multiband,
    true_subband_energy,
    unitary_dft,
    unitary_idft,
)
from .solver import (
    NoSparseSolutionError,
    ReweightState,
    SolverOptions,
    SpectrumEstimate,
    l0_oracle,
    solve_bpdn,
    solve_evlbs,
    solve_group,
    update_weights,
)

__all__ = [
    "__version__",
    "BandPlan",
    "SignalSpec",
    "GroundTruth",
    "InvalidSpecError",
    "generate_multiband",
    "add_awgn",
    "true_subband_energy",
    "unitary_dft",
    "unitary_idft",
    "SamplingPattern",
    "draw_pattern",
    "acquire",
    "forward",
    "adjoint",
    "dense_matrix",
    "SolverOptions",
    "SpectrumEstimate",
    "ReweightState",
    "NoSparseSolutionError",
    "solve_bpdn",
    "solve_group",
    "update_weights",
    "solve_evlbs",
    "l0_oracle",
    "OccupancyReport",
    "EdperResult",
    "normalize_total",
    "subband_energies",
    "detect_holes",
    "edper",
]
