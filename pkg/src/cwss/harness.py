"""Experiment runner: seeded Monte Carlo trials, aggregation, and reports.

A run is fully determined by (config, master seed). Per-trial randomness
comes from numpy SeedSequences keyed by (master_seed, trial_index, stream)
so trials are independent and order-free. Config documents are flat YAML
key/value files; every key has a default matching the reference scenario
(4 active bands over 0-500 MHz, 9-section plan, ratio 0.40, SNR 11.5 dB).
"""

import csv
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .bandplan import BandPlan
from .detection import _gain_ratio, detect_holes, normalize_total, subband_energies
from .sampling import acquire, draw_pattern
from .signal_model import InvalidSpecError, SignalSpec, add_awgn, generate_multiband
from .solver import SolverOptions, solve_bpdn, solve_evlbs, solve_group

METHODS = ("bpdn", "vlbs", "evlbs")

DEFAULT_BANDS = (
    (30e6, 60e6, 0.0023, 0.0066),
    (120e6, 170e6, 0.0016, 0.0063),
    (300e6, 350e6, 0.0017, 0.0063),
    (420e6, 450e6, 0.0032, 0.0064),
)
DEFAULT_BOUNDARIES_HZ = (30e6, 60e6, 120e6, 170e6, 300e6, 350e6, 420e6, 450e6)

# the four benchmark scenarios: (bands, sub-sampling ratio)
PRESETS = {
    "4band-0.40": {"active_bands": DEFAULT_BANDS, "ratio": 0.40},
    "3band-0.40": {"active_bands": DEFAULT_BANDS[1:], "ratio": 0.40},
    "3band-0.35": {"active_bands": DEFAULT_BANDS[1:], "ratio": 0.35},
    "2band-0.30": {
        "active_bands": (DEFAULT_BANDS[1], DEFAULT_BANDS[3]),
        "ratio": 0.30,
    },
}


class ConfigError(ValueError):
    """Config document failed validation; message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    signal: SignalSpec
    boundaries_hz: tuple = DEFAULT_BOUNDARIES_HZ
    ratio: float = 0.40
    methods: tuple = METHODS
    eta_multipliers: dict = field(
        default_factory=lambda: {"bpdn": 0.1, "vlbs": 0.2, "evlbs": 0.2}
    )
    delta: float = 0.001
    epsilon: float | None = None
    epsilon_rel: float = 0.05
    max_outer: int = 8
    trials: int = 200
    seed: int = 12345
    detection_threshold: float = 0.1
    out_dir: str = ""
    formats: tuple = ("csv", "json")
    keep_spectra: bool = False
    max_inner_iters: int = 2000
    inner_tol: float = 1e-6
    admm_rho: float = 1.0

    def plan(self):
        return BandPlan.from_hz(
            self.boundaries_hz, self.signal.n_bins, self.signal.nyquist_hz
        )

    def active_mask(self):
        """True for plan sections overlapping any active band."""
        plan = self.plan()
        mask = np.zeros(plan.k, dtype=bool)
        for lo, hi in self.signal.band_bins():
            for k, (start, stop) in enumerate(plan.sections()):
                if lo < stop and hi > start:
                    mask[k] = True
        return mask

    def solver_options(self, record_trace=False):
        return SolverOptions(
            max_inner_iters=self.max_inner_iters,
            inner_tol=self.inner_tol,
            admm_rho=self.admm_rho,
            record_trace=record_trace,
        )

    def to_dict(self):
        return {
            "n_bins": self.signal.n_bins,
            "nyquist_hz": self.signal.nyquist_hz,
            "active_bands": [list(b) for b in self.signal.active_bands],
            "snr_db": self.signal.snr_db,
            "phase_mode": self.signal.phase_mode,
            "boundaries_hz": list(self.boundaries_hz),
            "ratio": self.ratio,
            "methods": list(self.methods),
            "eta_bpdn": self.eta_multipliers["bpdn"],
            "eta_vlbs": self.eta_multipliers["vlbs"],
            "eta_evlbs": self.eta_multipliers["evlbs"],
            "delta": self.delta,
            "epsilon": self.epsilon,
            "epsilon_rel": self.epsilon_rel,
            "max_outer": self.max_outer,
            "trials": self.trials,
            "seed": self.seed,
            "detection_threshold": self.detection_threshold,
            "out_dir": self.out_dir,
            "formats": list(self.formats),
            "keep_spectra": self.keep_spectra,
            "max_inner_iters": self.max_inner_iters,
            "inner_tol": self.inner_tol,
            "admm_rho": self.admm_rho,
        }


_CONFIG_KEYS = {
    "n_bins",
    "nyquist_hz",
    "active_bands",
    "snr_db",
    "phase_mode",
    "boundaries_hz",
    "ratio",
    "methods",
    "eta_bpdn",
    "eta_vlbs",
    "eta_evlbs",
    "delta",
    "epsilon",
    "epsilon_rel",
    "max_outer",
    "trials",
    "seed",
    "detection_threshold",
    "out_dir",
    "formats",
    "keep_spectra",
    "max_inner_iters",
    "inner_tol",
    "admm_rho",
}


def _require(cond, key, msg):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def build_config(**overrides):
    """Construct a validated config from keyword overrides of the defaults."""
    unknown = set(overrides) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key: {sorted(unknown)[0]!r}")
    doc = dict(overrides)

    n_bins = int(doc.get("n_bins", 1024))
    nyquist_hz = float(doc.get("nyquist_hz", 500e6))
    bands = doc.get("active_bands", DEFAULT_BANDS)
    snr_db = float(doc.get("snr_db", 11.5))
    phase_mode = bool(doc.get("phase_mode", True))
    try:
        spec = SignalSpec(
            n_bins=n_bins,
            nyquist_hz=nyquist_hz,
            active_bands=tuple(tuple(float(x) for x in b) for b in bands),
            snr_db=snr_db,
            phase_mode=phase_mode,
        )
    except InvalidSpecError as exc:
        raise ConfigError(f"active_bands: {exc}") from exc

    boundaries = tuple(float(b) for b in doc.get("boundaries_hz", DEFAULT_BOUNDARIES_HZ))
    for b in boundaries:
        _require(0 < b < nyquist_hz, "boundaries_hz",
                 f"boundary {b} outside (0, {nyquist_hz})")

    ratio = float(doc.get("ratio", 0.40))
    _require(0.0 < ratio <= 1.0, "ratio", f"must be in (0, 1], got {ratio}")

    methods = tuple(str(m).lower() for m in doc.get("methods", METHODS))
    _require(len(methods) > 0, "methods", "must list at least one method")
    for m in methods:
        _require(m in METHODS, "methods", f"unknown method {m!r}")
    _require(len(set(methods)) == len(methods), "methods", "duplicate method")

    eta = {}
    for m in METHODS:
        key = f"eta_{m}"
        default = 0.1 if m == "bpdn" else 0.2
        eta[m] = float(doc.get(key, default))
        _require(eta[m] >= 0, key, f"must be >= 0, got {eta[m]}")

    delta = float(doc.get("delta", 0.001))
    _require(delta > 0, "delta", f"must be > 0, got {delta}")
    epsilon = doc.get("epsilon", None)
    if epsilon is not None:
        epsilon = float(epsilon)
        _require(epsilon > 0, "epsilon", f"must be > 0, got {epsilon}")
    epsilon_rel = float(doc.get("epsilon_rel", 0.05))
    _require(epsilon_rel > 0, "epsilon_rel", f"must be > 0, got {epsilon_rel}")
    max_outer = int(doc.get("max_outer", 8))
    _require(max_outer >= 1, "max_outer", f"must be >= 1, got {max_outer}")
    trials = int(doc.get("trials", 200))
    _require(trials >= 1, "trials", f"must be >= 1, got {trials}")
    threshold = float(doc.get("detection_threshold", 0.1))
    _require(threshold > 0, "detection_threshold", f"must be > 0, got {threshold}")

    formats = doc.get("formats", ("csv", "json"))
    if isinstance(formats, str):
        formats = (formats,)
    formats = tuple(str(f).lower() for f in formats)
    for f in formats:
        _require(f in ("csv", "json"), "formats", f"unknown format {f!r}")

    max_inner = int(doc.get("max_inner_iters", 2000))
    _require(max_inner >= 1, "max_inner_iters", f"must be >= 1, got {max_inner}")
    inner_tol = float(doc.get("inner_tol", 1e-6))
    _require(inner_tol > 0, "inner_tol", f"must be > 0, got {inner_tol}")
    admm_rho = float(doc.get("admm_rho", 1.0))
    _require(admm_rho > 0, "admm_rho", f"must be > 0, got {admm_rho}")

    out_dir = str(doc.get("out_dir", os.environ.get("CWSS_OUT_DIR", "results")))

    config = ExperimentConfig(
        signal=spec,
        boundaries_hz=boundaries,
        ratio=ratio,
        methods=methods,
        eta_multipliers=eta,
        delta=delta,
        epsilon=epsilon,
        epsilon_rel=epsilon_rel,
        max_outer=max_outer,
        trials=trials,
        seed=int(doc.get("seed", 12345)),
        detection_threshold=threshold,
        out_dir=out_dir,
        formats=formats,
        keep_spectra=bool(doc.get("keep_spectra", False)),
        max_inner_iters=max_inner,
        inner_tol=inner_tol,
        admm_rho=admm_rho,
    )
    # building the plan validates the boundaries against the bin grid
    plan = config.plan()
    _require(plan.k == len(boundaries) + 1, "boundaries_hz", "degenerate plan")
    return config


def parse_config(source=None):
    """Parse a config document (path, YAML text, or None for all defaults)."""
    if source is None:
        return build_config()
    if isinstance(source, Path) or (
        isinstance(source, str) and os.path.exists(source)
    ):
        text = Path(source).read_text()
    else:
        text = source
    doc = yaml.safe_load(text)
    if doc is None:
        return build_config()
    if not isinstance(doc, dict):
        raise ConfigError(f"config must be a key/value mapping, got {type(doc).__name__}")
    return build_config(**doc)


def preset_config(name, **overrides):
    """One of the four named benchmark scenarios, with optional overrides."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    merged = dict(PRESETS[name])
    merged.update(overrides)
    return build_config(**merged)


@dataclass(frozen=True)
class MethodStats:
    residual_norm: float
    objective: float
    inner_iters_used: int
    converged: bool
    wall_clock: float


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    method_stats: dict
    energies: dict
    occupied: dict
    r1: np.ndarray | None
    r2: np.ndarray | None
    evlbs_residual_history: tuple | None
    evlbs_outer_converged: bool | None
    spectra: dict | None = None


def _trial_seed(config, trial_index, stream):
    return np.random.SeedSequence([config.seed, trial_index, stream])


def run_trial(config, trial_index):
    """Run every configured method on one freshly drawn trial."""
    spec = config.signal
    truth = generate_multiband(spec, _trial_seed(config, trial_index, 0))
    truth = add_awgn(truth, spec.snr_db, _trial_seed(config, trial_index, 1))
    pattern = draw_pattern(
        spec.n_bins, config.ratio, _trial_seed(config, trial_index, 2)
    )
    y = acquire(truth, pattern)
    ynorm = float(np.linalg.norm(y))
    plan = config.plan()
    opts = config.solver_options()

    stats, energies, occupied, spectra = {}, {}, {}, {}
    evlbs_history = None
    evlbs_outer_converged = None
    for method in config.methods:
        eta = config.eta_multipliers[method] * ynorm
        t0 = time.perf_counter()
        if method == "bpdn":
            est = solve_bpdn(y, pattern, eta, opts)
        elif method == "vlbs":
            est = solve_group(y, pattern, plan, np.ones(plan.k), eta, opts)
        else:
            est, state = solve_evlbs(
                y,
                pattern,
                plan,
                eta,
                config.delta,
                epsilon=config.epsilon,
                max_outer=config.max_outer,
                opts=opts,
            )
            evlbs_history = state.residual_history
            evlbs_outer_converged = state.outer_converged
        elapsed = time.perf_counter() - t0
        stats[method] = MethodStats(
            residual_norm=est.residual_norm,
            objective=est.objective,
            inner_iters_used=est.inner_iters_used,
            converged=est.converged,
            wall_clock=elapsed,
        )
        energies[method] = subband_energies(est.r_hat, plan)
        occupied[method] = detect_holes(
            energies[method], config.detection_threshold
        ).occupied
        if config.keep_spectra:
            spectra[method] = normalize_total(est.r_hat)[0]

    r1 = r2 = None
    if "bpdn" in stats:
        base_sq = energies["bpdn"] ** 2
        mask = config.active_mask()
        if "vlbs" in stats:
            r1 = _gain_ratio(base_sq, energies["vlbs"] ** 2, mask)
        if "evlbs" in stats:
            r2 = _gain_ratio(base_sq, energies["evlbs"] ** 2, mask)

    return TrialResult(
        trial_index=trial_index,
        method_stats=stats,
        energies=energies,
        occupied=occupied,
        r1=r1,
        r2=r2,
        evlbs_residual_history=evlbs_history,
        evlbs_outer_converged=evlbs_outer_converged,
        spectra=spectra if config.keep_spectra else None,
    )


@dataclass(frozen=True)
class AggregateReport:
    config: ExperimentConfig
    n_trials: int
    active_mask: np.ndarray
    mean_energies: dict
    mean_energies_sq: dict
    detection_rates: dict
    mask_match_rates: dict
    false_alarm_rates: dict
    mean_r1: np.ndarray | None
    mean_r2: np.ndarray | None
    mean_outer_residuals: tuple | None
    outer_residual_counts: tuple | None
    inner_converged_rates: dict
    error_count: int

    def to_dict(self):
        def vec(v):
            return None if v is None else [float(x) for x in np.asarray(v)]

        # echo the experiment parameters; where the report lands is not one
        config_echo = self.config.to_dict()
        config_echo.pop("out_dir")
        config_echo.pop("formats")
        return {
            "tool_version": __version__,
            "master_seed": self.config.seed,
            "config": config_echo,
            "n_trials": self.n_trials,
            "active_mask": [bool(b) for b in self.active_mask],
            "mean_energies": {m: vec(v) for m, v in self.mean_energies.items()},
            "mean_energies_sq": {
                m: vec(v) for m, v in self.mean_energies_sq.items()
            },
            "detection_rates": {
                m: vec(v) for m, v in self.detection_rates.items()
            },
            "mask_match_rates": {
                m: float(v) for m, v in self.mask_match_rates.items()
            },
            "false_alarm_rates": {
                m: float(v) for m, v in self.false_alarm_rates.items()
            },
            "mean_r1": vec(self.mean_r1),
            "mean_r2": vec(self.mean_r2),
            "mean_outer_residuals": vec(self.mean_outer_residuals),
            "outer_residual_counts": (
                None
                if self.outer_residual_counts is None
                else [int(c) for c in self.outer_residual_counts]
            ),
            "inner_converged_rates": {
                m: float(v) for m, v in self.inner_converged_rates.items()
            },
            "error_count": self.error_count,
        }


def run_monte_carlo(config, progress=None):
    """Run all configured trials and aggregate. progress, if given, is
    called with (done, total) after each trial."""
    trials = []
    errors = 0
    for i in range(config.trials):
        try:
            trials.append(run_trial(config, i))
        except Exception:  # noqa: BLE001 - a bad trial must not kill the batch
            errors += 1
        if progress is not None:
            progress(i + 1, config.trials)

    mask = config.active_mask()
    inactive = ~mask
    mean_e, mean_e2, det, match, fa, conv = {}, {}, {}, {}, {}, {}
    for m in config.methods:
        e = np.array([t.energies[m] for t in trials])
        occ = np.array([t.occupied[m] for t in trials])
        mean_e[m] = e.mean(axis=0)
        mean_e2[m] = (e**2).mean(axis=0)
        det[m] = occ.mean(axis=0)
        match[m] = float(np.mean([np.array_equal(o, mask) for o in occ]))
        fa[m] = float(det[m][inactive].mean()) if inactive.any() else 0.0
        conv[m] = float(np.mean([t.method_stats[m].converged for t in trials]))

    mean_r1 = mean_r2 = None
    if any(t.r1 is not None for t in trials):
        mean_r1 = np.nanmean(np.array([t.r1 for t in trials]), axis=0)
    if any(t.r2 is not None for t in trials):
        mean_r2 = np.nanmean(np.array([t.r2 for t in trials]), axis=0)

    mean_outer = counts = None
    if "evlbs" in config.methods:
        histories = [t.evlbs_residual_history for t in trials]
        depth = max((len(h) for h in histories), default=0)
        mean_outer, counts = [], []
        for j in range(depth):
            vals = [h[j] for h in histories if len(h) > j]
            mean_outer.append(float(np.mean(vals)))
            counts.append(len(vals))
        mean_outer, counts = tuple(mean_outer), tuple(counts)

    return AggregateReport(
        config=config,
        n_trials=len(trials),
        active_mask=mask,
        mean_energies=mean_e,
        mean_energies_sq=mean_e2,
        detection_rates=det,
        mask_match_rates=match,
        false_alarm_rates=fa,
        mean_r1=mean_r1,
        mean_r2=mean_r2,
        mean_outer_residuals=mean_outer,
        outer_residual_counts=counts,
        inner_converged_rates=conv,
        error_count=errors,
    )


def _fmt(x):
    return repr(float(x))


def _representative_spectra(config):
    """Normalized spectrum magnitudes of trial 0, for plot output."""
    from dataclasses import replace as _replace

    cfg = _replace(config, keep_spectra=True)
    trial = run_trial(cfg, 0)
    spec = config.signal
    truth = generate_multiband(spec, _trial_seed(config, 0, 0))
    true_norm, _ = normalize_total(truth.spectrum)
    series = {"true": np.abs(true_norm)}
    for m in config.methods:
        series[m] = np.abs(trial.spectra[m])
    return series


def emit_report(report, formats=None, out_dir=None):
    """Write the aggregate as CSV and/or JSON plus plot-ready series.

    Returns the list of written paths. All outputs are deterministic
    functions of (config, master seed).
    """
    config = report.config
    formats = tuple(formats) if formats is not None else config.formats
    out = Path(out_dir if out_dir is not None else config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    spec = config.signal
    plan = config.plan()
    hz_per_bin = spec.nyquist_hz / spec.n_bins
    written = []

    if "csv" in formats:
        path = out / "report.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                [
                    "method",
                    "section_index",
                    "hz_range",
                    "mean_energy",
                    "detection_rate",
                    "r1",
                    "r2",
                ]
            )
            for m in config.methods:
                for k, (start, stop) in enumerate(plan.sections()):
                    r1 = (
                        _fmt(report.mean_r1[k])
                        if report.mean_r1 is not None
                        else ""
                    )
                    r2 = (
                        _fmt(report.mean_r2[k])
                        if report.mean_r2 is not None
                        else ""
                    )
                    w.writerow(
                        [
                            m,
                            k + 1,
                            f"{_fmt(start * hz_per_bin)}-{_fmt(stop * hz_per_bin)}",
                            _fmt(report.mean_energies[m][k]),
                            _fmt(report.detection_rates[m][k]),
                            r1,
                            r2,
                        ]
                    )
        written.append(path)

    if "json" in formats:
        path = out / "report.json"
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2)
            fh.write("\n")
        written.append(path)

    if report.n_trials > 0 and config.methods:
        series = _representative_spectra(config)
        path = out / "plot_spectrum.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["freq_hz", "true"] + list(config.methods))
            for k in range(spec.n_bins):
                row = [_fmt(k * hz_per_bin), _fmt(series["true"][k])]
                row += [_fmt(series[m][k]) for m in config.methods]
                w.writerow(row)
        written.append(path)

    return written
