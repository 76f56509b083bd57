"""Self-checks: closed forms against the path oracle, and the
simulate -> correlate pipeline against its target."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy.optimize import least_squares

from . import analytic
from .correlator import CorrelationHistogram, CorrelatorConfig, correlate, correlate_batched
from .model import InterferometerConfig, PolarizationMode, SourceModel
from .oracle import oracle_g2
from .tags import seconds_to_ps
from .tagsim import SimConfig, generate_pair_correlated

ORACLE_TOLERANCE = 1e-9
#: Relative errors are taken against max(|value|, this floor).
RELATIVE_FLOOR = 1e-6
BIN_FRACTION_3SIGMA = 0.99
PERIOD_TOLERANCE = 0.01


@dataclass
class Check:
    name: str
    value: float
    limit: str
    passed: bool

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.value:.6g} ({self.limit})"


@dataclass
class Report:
    checks: List[Check] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, limit, passed) -> None:
        self.checks.append(Check(name, float(value), limit, bool(passed)))


def random_case(rng: np.random.Generator):
    """One random (config, model, tau) inside the model's validity range."""
    tau_corr = 10 ** rng.uniform(-12, -8)
    model = SourceModel(g2_zero=float(rng.choice([0.0, rng.uniform(0, 2)], p=[0.05, 0.95])),
                        tau_corr=tau_corr, tau_coh=tau_corr * 10 ** rng.uniform(1, 6))
    dt = 0.0 if rng.random() < 0.05 else model.tau_coh * 10 ** rng.uniform(-4, 0.7)
    scale = max(dt, model.tau_corr)
    omega = 0.0 if rng.random() < 0.3 else rng.uniform(0, 20 * math.pi / scale)
    cfg = InterferometerConfig.balanced(delta_t=dt, omega=omega, v0=rng.uniform(0, 1),
                                        r_a=rng.uniform(0.05, 0.95), r_b=rng.uniform(0.05, 0.95))
    pick = rng.random()
    if pick < 0.1:
        tau = 0.0
    elif pick < 0.2:
        tau = float(rng.choice([-1, 1])) * dt
    else:
        reach = 2 * (dt + 10 * model.tau_corr)
        tau = rng.uniform(-reach, reach)
    return cfg, model, tau


def oracle_sweep(points: int = 10_000, seed: int = 0,
                 oracle: Callable = oracle_g2) -> Report:
    rng = np.random.default_rng(seed)
    worst, worst_case = 0.0, None
    for _ in range(points):
        cfg, model, tau = random_case(rng)
        for mode in PolarizationMode:
            ref = float(analytic.g2(cfg, model, mode, tau))
            got = oracle(cfg, model, mode, tau)
            rel = abs(got - ref) / max(abs(ref), RELATIVE_FLOOR)
            if not rel <= worst:
                worst, worst_case = rel, (cfg, model, mode, tau)
    report = Report()
    report.add(f"oracle vs closed form, max relative error over {points} points",
               worst, f"< {ORACLE_TOLERANCE:g}", worst < ORACLE_TOLERANCE)
    report.details["worst_case"] = worst_case
    return report


def bin_average(fn, centers: np.ndarray, width: float, sub: int = 16) -> np.ndarray:
    offsets = ((np.arange(sub) + 0.5) / sub - 0.5) * width
    return np.mean(fn(centers[:, None] + offsets[None, :]), axis=1)


def fit_beat_period(hist: CorrelationHistogram, cfg: InterferometerConfig, model: SourceModel,
                    exclude: float) -> float:
    """Beat period (s) fitted to a rate-normalized histogram.

    A coarse periodogram of the interference residual seeds a least-squares
    fit of the parallel correlation with free shift and overlap. Bins within
    ``exclude`` of 0 and ±dt are ignored.
    """
    tau = hist.bin_centers
    keep = np.ones(tau.size, dtype=bool)
    for c in (0.0, cfg.delta_t, -cfg.delta_t):
        keep &= np.abs(tau - c) > exclude
    tau, y = tau[keep], hist.g2[keep]
    weight = 1.0 / np.maximum(hist.sigma[keep], 1e-3)
    resid = analytic.g2_cross(cfg, model, tau) - y
    span = tau.max() - tau.min()
    bw = hist.config.bin_width * 1e-12
    trial = np.linspace(2 * math.pi / span, math.pi / bw, 20_000)
    power = np.abs((resid * weight ** 2) @ np.exp(-1j * np.outer(tau, trial))) ** 2
    omega0 = trial[int(np.argmax(power))]

    def residuals(p):
        trial_cfg = cfg.replace(omega=p[0], v0=float(np.clip(p[1], 0, 1)))
        return (analytic.g2_parallel(trial_cfg, model, tau) - y) * weight

    fit = least_squares(residuals, x0=[omega0, max(cfg.v0, 0.5)],
                        bounds=([0.5 * omega0, 0.0], [1.5 * omega0, 1.0]))
    return 2 * math.pi / fit.x[0]


def montecarlo_check(cfg: InterferometerConfig, model: SourceModel, target: str = "parallel",
                     rate1: float = 5e3, rate2: float = 5e3, duration: float = 2000.0,
                     window: float = 4e-6, seed: int = 1, bin_width: float = 10e-9,
                     max_lag: float = 2e-6, segment_length: Optional[float] = None) -> Report:
    """Simulate a detector pair whose cross-correlation follows ``target``
    (``flat``, ``cross`` or ``parallel``), correlate it and compare."""
    if target == "flat":
        def fn(t):
            return np.ones_like(np.asarray(t, dtype=float))
    else:
        mode = PolarizationMode.parse(target)

        def fn(t):
            return analytic.g2(cfg, model, mode, t)
    streams = generate_pair_correlated(SimConfig(rate1, rate2, duration, seed, fn, window))
    ccfg = CorrelatorConfig(seconds_to_ps(bin_width), seconds_to_ps(max_lag))
    if segment_length:
        hist = correlate_batched(*streams, ccfg, segment_length)
    else:
        hist = correlate(*streams, ccfg)

    report = Report()
    report.details.update(histogram=hist, streams=streams)
    expected = hist.expected_counts(bin_average(fn, hist.bin_centers, bin_width))
    z = (hist.counts - expected) / np.sqrt(np.maximum(expected, 1e-12))
    frac = float(np.mean(np.abs(z) <= 3))
    report.add("fraction of bins within 3 sigma of target", frac,
               f">= {BIN_FRACTION_3SIGMA}", frac >= BIN_FRACTION_3SIGMA)
    dof = z.size
    chi2 = float(np.sum(z ** 2) / dof)
    report.add("chi2 per bin", chi2, "<= 1 + 5*sqrt(2/n)", chi2 <= 1 + 5 * math.sqrt(2 / dof))

    if target != "flat":
        report.details["features"] = _feature_checks(report, hist, expected, fn, cfg, model, bin_width)
        if target == "parallel" and cfg.omega != 0:
            period = fit_beat_period(hist, cfg, model, exclude=5 * model.tau_corr)
            true = 2 * math.pi / abs(cfg.omega)
            err = abs(period - true) / true
            report.details["fitted_period"] = period
            report.add("fitted beat period relative error", err,
                       f"< {PERIOD_TOLERANCE:g}", err < PERIOD_TOLERANCE)
    return report


def _feature_checks(report, hist, expected, fn, cfg, model, bin_width):
    """Compare mean g2 inside each feature (0, ±dt) with the target, and
    check the side features rise or fall relative to their background the
    same way the target does."""
    tau, g2, sigma = hist.bin_centers, hist.g2, hist.sigma
    half = max(model.tau_corr, bin_width)
    results = {}
    for label, center in (("0", 0.0), ("+dt", cfg.delta_t), ("-dt", -cfg.delta_t)):
        sel = np.abs(tau - center) <= half
        if not sel.any():
            continue
        obs = hist.counts[sel].sum()
        exp = expected[sel].sum()
        zf = (obs - exp) / math.sqrt(max(exp, 1e-12))
        report.add(f"mean g2 in feature at {label} (z-score vs target)", zf, "|z| <= 3", abs(zf) <= 3)
        results[label] = float(np.mean(g2[sel]))
        if label == "0":
            continue
        offset = analytic.BACKGROUND_OFFSET * model.tau_corr
        bg_sel = (np.abs(np.abs(tau - center) - offset) <= half)
        if bg_sel.any():
            measured = float(np.mean(g2[sel]) - np.mean(g2[bg_sel]))
            predicted = float(np.mean(fn(tau[sel])) - np.mean(fn(tau[bg_sel])))
            err = math.sqrt(np.mean(sigma[sel] ** 2) / sel.sum() + np.mean(sigma[bg_sel] ** 2) / bg_sel.sum())
            agree = abs(measured - predicted) <= 3 * err
            report.add(f"side contrast at {label} (measured {measured:+.3f}, target {predicted:+.3f})",
                       (measured - predicted) / err if err else 0.0, "|z| <= 3", agree)
            if abs(predicted) > 5 * err:
                report.add(f"side feature at {label} is a {'peak' if predicted > 0 else 'dip'}",
                           measured / err, "same sign as target", measured * predicted > 0)
    return results
