"""Subband energy detection and method-comparison gain ratios.

Recovered spectra are normalized to unit total energy, reduced to
per-section l2 norms, and thresholded into occupied/hole decisions.
The gain ratios compare a structured method's per-section energies
(squared norms) against the l1 baseline: positive on an active section
means more signal energy captured, positive on an inactive section means
noise suppressed; 1.0 on an inactive section means the method left it
exactly empty.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import section_norms

__all__ = [
    "OccupancyReport",
    "EdperResult",
    "normalize_total",
    "subband_energies",
    "detect_holes",
    "edper",
]


@dataclass(frozen=True)
class OccupancyReport:
    """Per-section energies and the occupancy decisions made on them."""

    energies: np.ndarray
    occupied: np.ndarray
    threshold: float
    degenerate: bool

    def __post_init__(self):
        self.energies.flags.writeable = False
        self.occupied.flags.writeable = False

    def holes(self):
        return ~self.occupied


@dataclass(frozen=True)
class EdperResult:
    """Energy-detection gain ratios of the group solvers vs the l1 baseline."""

    r1: np.ndarray
    r2: np.ndarray
    active_mask: np.ndarray


def normalize_total(r):
    """Scale to unit l2 norm. Returns (vector, degenerate); zero input
    comes back as zeros with the degenerate flag set."""
    nrm = np.linalg.norm(r)
    if nrm == 0.0:
        return np.zeros_like(r), True
    return r / nrm, False


def subband_energies(r, plan):
    """Per-section l2 norms of the total-energy-normalized spectrum."""
    if plan.n != len(r):
        raise ValueError(f"plan covers {plan.n} bins, spectrum has {len(r)}")
    rn, degenerate = normalize_total(np.asarray(r))
    if degenerate:
        return np.zeros(plan.k)
    return section_norms(rn.astype(np.complex128), plan.starts, plan.stops)


def detect_holes(energies, threshold):
    """Threshold per-section energies into occupied sections and holes."""
    if threshold <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    energies = np.asarray(energies, dtype=np.float64)
    return OccupancyReport(
        energies=energies,
        occupied=energies > threshold,
        threshold=float(threshold),
        degenerate=not np.any(energies),
    )


def _gain_ratio(base_sq, other_sq, active_mask):
    # active: relative energy gained; inactive: relative noise removed.
    # base energy of exactly zero makes the ratio undefined -> NaN sentinel.
    out = np.full(len(base_sq), np.nan)
    ok = base_sq > 0.0
    act = active_mask & ok
    inact = ~active_mask & ok
    out[act] = (other_sq[act] - base_sq[act]) / base_sq[act]
    out[inact] = (base_sq[inact] - other_sq[inact]) / base_sq[inact]
    return out


def edper(bpdn_r, vlbs_r, evlbs_r, plan, active_mask):
    """Per-section gain ratios of the group methods against the l1 baseline.

    Energies are squared section norms of the normalized spectra.
    """
    active_mask = np.asarray(active_mask, dtype=bool)
    if active_mask.shape != (plan.k,):
        raise ValueError(f"need {plan.k} mask entries, got {active_mask.shape}")
    e_bpdn = subband_energies(bpdn_r, plan) ** 2
    e_vlbs = subband_energies(vlbs_r, plan) ** 2
    e_evlbs = subband_energies(evlbs_r, plan) ** 2
    return EdperResult(
        r1=_gain_ratio(e_bpdn, e_vlbs, active_mask),
        r2=_gain_ratio(e_bpdn, e_evlbs, active_mask),
        active_mask=active_mask,
    )
