"""Synthetic multiband test signals with known sparse spectra.

The frequency grid has N bins spanning [0, nyquist_hz); bin k sits at
k * nyquist_hz / N. The DFT convention is unitary (1/sqrt(N) both ways),
so the time signal and its spectrum always carry equal energy.
"""

from dataclasses import dataclass, field

import numpy as np

from .bandplan import BandPlan, hz_to_bin
from .kernels import section_norms


class InvalidSpecError(ValueError):
    """Signal specification violates its invariants."""


def unitary_dft(x):
    """Forward unitary DFT (time -> spectrum)."""
    return np.fft.fft(x) / np.sqrt(len(x))


def unitary_idft(r):
    """Inverse unitary DFT (spectrum -> time)."""
    return np.fft.ifft(r) * np.sqrt(len(r))


@dataclass(frozen=True)
class SignalSpec:
    """Multiband signal description on an N-bin Nyquist grid.

    active_bands is a sequence of (low_hz, high_hz, level_low, level_high):
    each band occupies the bins mapping into [low_hz, high_hz) and its bin
    magnitudes are drawn i.i.d. uniform in [level_low, level_high].
    """

    n_bins: int = 1024
    nyquist_hz: float = 500e6
    active_bands: tuple = field(default_factory=tuple)
    snr_db: float = np.inf
    phase_mode: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "active_bands", tuple(tuple(b) for b in self.active_bands)
        )
        if self.n_bins < 2:
            raise InvalidSpecError(f"n_bins must be >= 2, got {self.n_bins}")
        if self.nyquist_hz <= 0:
            raise InvalidSpecError(f"nyquist_hz must be > 0, got {self.nyquist_hz}")
        for band in self.active_bands:
            if len(band) != 4:
                raise InvalidSpecError(
                    f"band must be (low_hz, high_hz, level_low, level_high), got {band}"
                )
            low, high, lv_lo, lv_hi = band
            if not 0 <= low < high <= self.nyquist_hz:
                raise InvalidSpecError(
                    f"band [{low}, {high}) must lie within [0, {self.nyquist_hz})"
                )
            if not 0 <= lv_lo <= lv_hi:
                raise InvalidSpecError(
                    f"band levels need 0 <= level_low <= level_high, got {lv_lo}, {lv_hi}"
                )
        bins = self.band_bins()
        for (lo, hi), band in zip(bins, self.active_bands):
            if hi - lo < 1:
                raise InvalidSpecError(
                    f"band {band[:2]} spans no full bin at n_bins={self.n_bins}"
                )
        for (_, hi_prev), (lo_next, _) in zip(
            sorted(bins), sorted(bins)[1:]
        ):
            if lo_next < hi_prev:
                raise InvalidSpecError("active bands overlap after bin mapping")

    def band_bins(self):
        """Half-open bin ranges [(lo, hi), ...], one per active band."""
        return [
            (
                hz_to_bin(low, self.n_bins, self.nyquist_hz),
                hz_to_bin(high, self.n_bins, self.nyquist_hz),
            )
            for (low, high, _, _) in self.active_bands
        ]


@dataclass(frozen=True)
class GroundTruth:
    """Known-answer signal: sparse spectrum, its time signal, and the noisy copy."""

    spectrum: np.ndarray
    time_signal: np.ndarray
    noisy_signal: np.ndarray
    band_energies: np.ndarray

    def __post_init__(self):
        for arr in (self.spectrum, self.time_signal, self.noisy_signal,
                    self.band_energies):
            arr.flags.writeable = False

    def __len__(self):
        return len(self.spectrum)


def generate_multiband(spec, seed):
    """Draw a multiband spectrum per the spec and synthesize its time signal.

    Each active-band bin gets a magnitude uniform in the band's level range
    and, when spec.phase_mode is set, an independent uniform phase. The
    noisy_signal field starts equal to time_signal; add_awgn injects noise.
    """
    rng = np.random.default_rng(seed)
    r = np.zeros(spec.n_bins, dtype=np.complex128)
    for (lo, hi), (_, _, lv_lo, lv_hi) in zip(spec.band_bins(), spec.active_bands):
        mags = rng.uniform(lv_lo, lv_hi, hi - lo)
        if spec.phase_mode:
            phases = rng.uniform(0.0, 2.0 * np.pi, hi - lo)
            r[lo:hi] = mags * np.exp(1j * phases)
        else:
            r[lo:hi] = mags
    x = unitary_idft(r)
    band_energies = np.array(
        [np.sum(np.abs(r[lo:hi]) ** 2) for lo, hi in spec.band_bins()]
    )
    return GroundTruth(
        spectrum=r,
        time_signal=x,
        noisy_signal=x.copy(),
        band_energies=band_energies,
    )


def add_awgn(truth, snr_db, seed):
    """Return a copy of truth with circular complex AWGN at the given SNR.

    The noise variance is set from the expected-power relation
    10*log10(||time_signal||^2 / E||w||^2) = snr_db.
    """
    if np.isposinf(snr_db):
        return GroundTruth(
            spectrum=truth.spectrum,
            time_signal=truth.time_signal,
            noisy_signal=truth.time_signal.copy(),
            band_energies=truth.band_energies,
        )
    sig_energy = np.sum(np.abs(truth.time_signal) ** 2)
    if sig_energy == 0.0:
        raise ValueError("cannot set a finite SNR on an all-zero signal")
    n = len(truth)
    noise_var = (sig_energy / n) * 10.0 ** (-snr_db / 10.0)
    rng = np.random.default_rng(seed)
    w = rng.normal(scale=np.sqrt(noise_var / 2.0), size=(n, 2))
    noise = w[:, 0] + 1j * w[:, 1]
    return GroundTruth(
        spectrum=truth.spectrum,
        time_signal=truth.time_signal,
        noisy_signal=truth.time_signal + noise,
        band_energies=truth.band_energies,
    )


def true_subband_energy(truth, plan):
    """Per-section l2 norms of the total-energy-normalized true spectrum.

    All-zero spectra yield an all-zero vector (degenerate case).
    """
    if plan.n != len(truth):
        raise ValueError(f"plan covers {plan.n} bins, spectrum has {len(truth)}")
    nrm = np.linalg.norm(truth.spectrum)
    if nrm == 0.0:
        return np.zeros(plan.k)
    return section_norms(truth.spectrum / nrm, plan.starts, plan.stops)
