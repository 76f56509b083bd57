"""Command-line entry point: ``tpisim <command> [options]``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import analytic, verify
from .config import Experiment, apply_overrides, load_config, parse_frequency, parse_list, parse_time
from .correlator import CorrelatorConfig, correlate, correlate_batched
from .errors import CapacityError, TagFileError, TpiError, ValidationError
from .model import CqedParams, PolarizationMode, cooperativity, critical_photon_number
from .presets import DEVICE_CQED, PRESETS, get_preset
from .tagio import read_tags, write_tags
from .tags import seconds_to_ps
from .tagsim import SimConfig, generate_antibunched_renewal, generate_pair_correlated, generate_poisson

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_TOLERANCE = 5


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.9g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else _fmt(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def emit_table(header: List[str], rows, out: Optional[str], fmt: str) -> None:
    if fmt == "json":
        text = json.dumps([{k: _jsonable(v) for k, v in zip(header, row)} for row in rows], indent=1) + "\n"
    else:
        lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def load_experiment(args) -> Experiment:
    if getattr(args, "preset", None):
        if args.preset not in PRESETS:
            raise UsageError(f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
        exp = get_preset(args.preset).experiment()
    else:
        exp = Experiment()
    if getattr(args, "config", None):
        exp = load_config(args.config, exp)
    if getattr(args, "set", None):
        exp = apply_overrides(exp, args.set)
    return exp


def cmd_analytic(args) -> int:
    exp = load_experiment(args)
    cfg, model = exp.interferometer, exp.source
    span = exp.grid_span()
    if args.uniform:
        taus = np.linspace(-span, span, exp.points)
    else:
        taus = analytic.feature_grid(cfg.delta_t, model.tau_corr, span, coarse=exp.points)
    if args.mode == "visibility":
        header, cols = ["tau_s", "visibility"], [analytic.visibility(cfg, model, taus)]
    elif args.mode == "both":
        header = ["tau_s", "g2_cross", "g2_parallel"]
        cols = [analytic.g2_cross(cfg, model, taus), analytic.g2_parallel(cfg, model, taus)]
    else:
        header = ["tau_s", "g2"]
        cols = [analytic.sample_series(cfg, model, args.mode, taus).values]
    emit_table(header, zip(taus, *cols), args.out, args.format)
    return EXIT_OK


def classify_rows(exp: Experiment, delays, shifts):
    base, model = exp.interferometer, exp.source
    delays = delays or [base.delta_t]
    shifts = shifts if shifts else [base.shift_hz]
    rows = []
    for dt in delays:
        for shift in shifts:
            cfg = base.replace(delta_t=dt, omega=2 * math.pi * shift)
            plus = analytic.classify_side_feature(cfg, model, "+")
            minus = analytic.classify_side_feature(cfg, model, "-")
            rows.append([
                dt, shift, math.cos(cfg.omega * dt), plus.kind.value, minus.kind.value,
                plus.contrast, minus.contrast,
                _safe(analytic.side_threshold, cfg.replace(omega=0.0), model, "+"),
                _safe(analytic.exact_side_threshold, cfg.replace(omega=0.0), model, "+"),
                _safe(analytic.tau_coh_for_boundary, cfg, model, "+", exact=False),
                _safe(analytic.tau_coh_for_boundary, cfg, model, "+", exact=True),
            ])
    return rows


def _safe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValidationError:
        return float("nan")


CLASSIFY_HEADER = ["delta_t_s", "shift_hz", "cos_omega_dt", "kind_plus", "kind_minus",
                   "contrast_plus", "contrast_minus", "threshold_inequality_s", "threshold_exact_s",
                   "tau_coh_boundary_inequality_s", "tau_coh_boundary_exact_s"]


def cmd_classify(args) -> int:
    exp = load_experiment(args)
    delays = parse_list(args.delays, parse_time) if args.delays else exp.delays
    shifts = parse_list(args.shifts, parse_frequency) if args.shifts else exp.shifts
    emit_table(CLASSIFY_HEADER, classify_rows(exp, delays, shifts), args.out, args.format)
    return EXIT_OK


def _target(exp: Experiment, kind: str):
    if kind == "flat":
        return lambda t: np.ones_like(np.asarray(t, dtype=float))
    mode = PolarizationMode.parse(kind)
    return lambda t: analytic.g2(exp.interferometer, exp.source, mode, t)


def cmd_simulate(args) -> int:
    exp = load_experiment(args)
    sim = exp.simulation
    seed = args.seed if args.seed is not None else sim.seed
    prefix = args.out or "tags"
    if args.kind == "poisson":
        streams = [generate_poisson(sim.rate1, sim.duration, seed, channel=1)]
    elif args.kind == "renewal":
        streams = [generate_antibunched_renewal(sim.rate1, exp.source.g2_zero, exp.source.tau_corr,
                                                sim.duration, seed, channel=1)]
    else:
        target = args.target or sim.target
        streams = list(generate_pair_correlated(
            SimConfig(sim.rate1, sim.rate2, sim.duration, seed, _target(exp, target),
                      sim.window, background_rate=sim.background_rate)))
    for s in streams:
        path = f"{prefix}_ch{s.channel}.ttg"
        write_tags(s, path)
        print(f"wrote {len(s)} tags to {path}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    exp = load_experiment(args)
    c = exp.correlator
    bin_width = parse_time(args.bin_width) if args.bin_width else c.bin_width
    max_lag = parse_time(args.max_lag) if args.max_lag else c.max_lag
    norm = args.normalization or c.normalization
    seg = parse_time(args.segment_length) if args.segment_length else c.segment_length
    duration = seconds_to_ps(parse_time(args.duration)) if args.duration else None
    a = read_tags(args.file_a, duration)
    b = read_tags(args.file_b, duration)
    if duration is None:
        duration = max(a.duration, b.duration)
    cfg = CorrelatorConfig(seconds_to_ps(bin_width), seconds_to_ps(max_lag), norm)
    if seg:
        hist = correlate_batched(a, b, cfg, seg, duration=duration)
    else:
        hist = correlate(a, b, cfg, duration=duration)
    emit_table(["tau_s", "g2", "sigma", "counts"],
               zip(hist.bin_centers, hist.g2, hist.sigma, hist.counts), args.out, args.format)
    return EXIT_OK


def cmd_verify(args) -> int:
    exp = load_experiment(args)
    seed = args.seed if args.seed is not None else 0
    if args.scope == "oracle":
        report = verify.oracle_sweep(points=args.points, seed=seed)
    else:
        sim, c = exp.simulation, exp.correlator
        report = verify.montecarlo_check(
            exp.interferometer, exp.source, target=args.target or sim.target,
            rate1=sim.rate1, rate2=sim.rate2, duration=sim.duration, window=sim.window,
            seed=args.seed if args.seed is not None else sim.seed,
            bin_width=c.bin_width, max_lag=c.max_lag, segment_length=c.segment_length)
    for check in report.checks:
        print(check.line())
    print("verify: " + ("PASS" if report.passed else "FAIL"))
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def cmd_cqed(args) -> int:
    exp = load_experiment(args)
    base = exp.cqed or DEVICE_CQED
    p = CqedParams(
        g=parse_frequency(args.g) if args.g else base.g,
        kappa=parse_frequency(args.kappa) if args.kappa else base.kappa,
        gamma_par=parse_frequency(args.gamma_par) if args.gamma_par else base.gamma_par,
        gamma_star=parse_frequency(args.gamma_star) if args.gamma_star else base.gamma_star,
    )
    emit_table(["cooperativity", "critical_photon_number"],
               [[cooperativity(p), critical_photon_number(p)]], args.out, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI-style experiment file")
    common.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
    common.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config value (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="tpisim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", parents=[common], help="sample closed-form correlations")
    p.add_argument("--mode", choices=("cross", "parallel", "both", "visibility"), default="both")
    p.add_argument("--uniform", action="store_true", help="plain uniform grid, no refinement at features")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("classify", parents=[common], help="side peak/dip table")
    p.add_argument("--delays", help="comma separated arm delays, e.g. '0.6us,5us' or '1km,8km'")
    p.add_argument("--shifts", help="comma separated frequency shifts, e.g. '48kHz,101.6kHz'")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("simulate", parents=[common], help="write synthetic tag files")
    p.add_argument("--kind", choices=("pair", "poisson", "renewal"), default="pair")
    p.add_argument("--target", choices=("flat", "cross", "parallel"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("correlate", parents=[common], help="histogram two tag files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--bin-width")
    p.add_argument("--max-lag")
    p.add_argument("--normalization", choices=("raw", "rate"))
    p.add_argument("--segment-length")
    p.add_argument("--duration", help="acquisition time (default: last timestamp)")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("verify", parents=[common], help="run self-consistency checks")
    p.add_argument("--scope", choices=("oracle", "montecarlo"), default="oracle")
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--target", choices=("flat", "cross", "parallel"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cqed", parents=[common], help="cooperativity and critical photon number")
    p.add_argument("--g")
    p.add_argument("--kappa")
    p.add_argument("--gamma-par")
    p.add_argument("--gamma-star")
    p.set_defaults(func=cmd_cqed)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TagFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, CapacityError, ZeroDivisionError, TpiError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
