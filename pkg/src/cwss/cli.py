"""Command line entry point: run experiments, list presets, dump solver traces."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harness import (
    PRESETS,
    ConfigError,
    build_config,
    emit_report,
    parse_config,
    run_monte_carlo,
    run_trial,
)
from .sampling import acquire, draw_pattern
from .signal_model import add_awgn, generate_multiband
from .solver import solve_bpdn, solve_evlbs, solve_group


def _load_overridden_config(args):
    if getattr(args, "preset", None) and args.config:
        raise ConfigError("give either a config path or --preset, not both")
    base = (
        dict(PRESETS[args.preset])
        if getattr(args, "preset", None)
        else parse_config(args.config).to_dict()
    )
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.ratio is not None:
        overrides["ratio"] = args.ratio
    if args.snr_db is not None:
        overrides["snr_db"] = args.snr_db
    if args.methods is not None:
        overrides["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    if args.out is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "format", None) is not None:
        overrides["formats"] = (
            ("csv", "json") if args.format == "both" else (args.format,)
        )
    base = {k: v for k, v in base.items() if v is not None}
    base.update(overrides)
    return build_config(**base)


def _cmd_run(args):
    config = _load_overridden_config(args)

    def progress(done, total):
        if not args.quiet:
            print(f"\rtrial {done}/{total}", end="", file=sys.stderr, flush=True)

    report = run_monte_carlo(config, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    written = emit_report(report)
    for path in written:
        print(path)
    if report.error_count:
        print(f"{report.error_count} trial(s) failed", file=sys.stderr)
        return 1
    return 0


def _cmd_presets(args):
    for name, settings in PRESETS.items():
        bands = ", ".join(
            f"{b[0] / 1e6:g}-{b[1] / 1e6:g} MHz" for b in settings["active_bands"]
        )
        print(f"{name}: ratio {settings['ratio']:.2f}, active bands: {bands}")
    return 0


def _cmd_trace(args):
    config = _load_overridden_config(args)
    spec = config.signal
    seeds = [
        np.random.SeedSequence([config.seed, args.trial, s]) for s in range(3)
    ]
    truth = generate_multiband(spec, seeds[0])
    truth = add_awgn(truth, spec.snr_db, seeds[1])
    pattern = draw_pattern(spec.n_bins, config.ratio, seeds[2])
    y = acquire(truth, pattern)
    eta = config.eta_multipliers[args.method] * float(np.linalg.norm(y))
    opts = config.solver_options(record_trace=True)
    plan = config.plan()
    if args.method == "bpdn":
        est = solve_bpdn(y, pattern, eta, opts)
    elif args.method == "vlbs":
        est = solve_group(y, pattern, plan, np.ones(plan.k), eta, opts)
    else:
        est, _ = solve_evlbs(
            y,
            pattern,
            plan,
            eta,
            config.delta,
            epsilon=config.epsilon,
            max_outer=config.max_outer,
            opts=opts,
        )
    payload = {
        "method": args.method,
        "trial": args.trial,
        "master_seed": config.seed,
        "residual_norm": est.residual_norm,
        "objective": est.objective,
        "converged": est.converged,
        "records": list(est.trace),
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(args.out)
    else:
        print(text)
    return 0


def _add_common_run_args(p):
    p.add_argument("config", nargs="?", default=None, help="config YAML path")
    p.add_argument("--preset", choices=sorted(PRESETS), help="named scenario")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--ratio", type=float, default=None)
    p.add_argument("--snr-db", dest="snr_db", type=float, default=None)
    p.add_argument("--methods", default=None, help="comma-separated: bpdn,vlbs,evlbs")
    p.add_argument("--out", default=None, help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cwss",
        description="compressive wideband spectrum sensing experiments",
    )
    parser.add_argument("--version", action="version", version=f"cwss {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo experiment")
    _add_common_run_args(run_p)
    run_p.add_argument("--format", choices=("csv", "json", "both"), default=None)
    run_p.add_argument("--quiet", action="store_true", help="no progress output")
    run_p.set_defaults(func=_cmd_run)

    presets_p = sub.add_parser("presets", help="list the built-in scenarios")
    presets_p.set_defaults(func=_cmd_presets)

    trace_p = sub.add_parser("trace", help="dump one trial's solver iterations")
    _add_common_run_args(trace_p)
    trace_p.add_argument(
        "--method", choices=("bpdn", "vlbs", "evlbs"), default="evlbs"
    )
    trace_p.add_argument("--trial", type=int, default=0)
    trace_p.set_defaults(func=_cmd_trace)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
