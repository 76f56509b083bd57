"""Closed-form coincidence correlations behind an asymmetric Mach-Zehnder.

``g2_cross`` and ``g2_parallel`` give the normalized cross-correlation between
the two output detectors for orthogonal and identical polarizations. The
remaining functions derive visibilities, side-feature thresholds and
classifications from them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateDenominatorError, UndefinedThresholdError, ValidationError
from .model import InterferometerConfig, PolarizationMode, SourceModel

#: Background offset for side-feature classification, in units of tau_corr.
BACKGROUND_OFFSET = 20.0
DEFAULT_EPSILON = 1e-3
_SYM_TOL = 1e-9


class SideLocation(enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> int:
        return 1 if self is SideLocation.PLUS else -1

    @classmethod
    def parse(cls, value) -> "SideLocation":
        if isinstance(value, cls):
            return value
        if value in (1, "+", "plus", "+dt"):
            return cls.PLUS
        if value in (-1, "-", "minus", "-dt"):
            return cls.MINUS
        raise ValidationError(f"unknown side location {value!r}")


class FeatureKind(enum.Enum):
    PEAK = "peak"
    DIP = "dip"
    FLAT = "flat"


@dataclass(frozen=True)
class SideFeature:
    location: SideLocation
    kind: FeatureKind
    contrast: float
    value: float
    background: float


@dataclass(frozen=True)
class CorrelationSeries:
    taus: np.ndarray
    values: np.ndarray
    mode: PolarizationMode
    config: InterferometerConfig
    model: SourceModel

    def __post_init__(self):
        if self.taus.shape != self.values.shape:
            raise ValidationError("taus and values must have equal length")
        if self.taus.size > 1 and not np.all(np.diff(self.taus) > 0):
            raise ValidationError("taus must be strictly increasing")
        if np.any(self.values < 0):
            raise ValidationError("correlation values must be non-negative")

    def __len__(self):
        return self.taus.size


def normalization(cfg: InterferometerConfig) -> float:
    n = ((cfg.r_a ** 2 + cfg.t_a ** 2) * cfg.r_b * cfg.t_b
         + (cfg.r_b ** 2 + cfg.t_b ** 2) * cfg.r_a * cfg.t_a)
    if n <= 0:
        raise ValidationError("normalization vanishes for this splitter configuration")
    return n


def _incoherent_terms(cfg, model, tau):
    same_arm = (cfg.r_a ** 2 + cfg.t_a ** 2) * cfg.r_b * cfg.t_b * model.g2(tau)
    long_first = cfg.r_a * cfg.t_a * cfg.r_b ** 2 * model.g2(tau + cfg.delta_t)
    short_first = cfg.r_a * cfg.t_a * cfg.t_b ** 2 * model.g2(tau - cfg.delta_t)
    return same_arm + long_first + short_first


def g2_cross(cfg: InterferometerConfig, model: SourceModel, tau):
    """Cross-correlation for orthogonal polarizations (no interference)."""
    tau = np.asarray(tau, dtype=float)
    return _incoherent_terms(cfg, model, tau) / normalization(cfg)


def interference_term(cfg: InterferometerConfig, model: SourceModel, tau):
    """Unnormalized fourth-order interference contribution (positive sign)."""
    tau = np.asarray(tau, dtype=float)
    g1 = model.g1(tau)
    # g2 >= 0 so the product under the root is never negative
    envelope = np.sqrt(model.g2(tau - cfg.delta_t) * model.g2(tau + cfg.delta_t))
    return (2 * cfg.r_a * cfg.t_a * cfg.r_b * cfg.t_b * cfg.v0
            * g1 ** 2 * np.cos(cfg.omega * tau) * envelope)


def g2_parallel(cfg: InterferometerConfig, model: SourceModel, tau):
    """Cross-correlation for identical polarizations."""
    tau = np.asarray(tau, dtype=float)
    value = (_incoherent_terms(cfg, model, tau) - interference_term(cfg, model, tau)) / normalization(cfg)
    # rounding can push exact zeros a few ulp negative
    return np.maximum(value, 0.0)


def g2_parallel_grouped(cfg: InterferometerConfig, model: SourceModel, tau):
    """Same quantity as :func:`g2_parallel`, organized per output-splitter
    grouping. Used to cross-check the regrouping algebra."""
    tau = np.asarray(tau, dtype=float)
    plus = np.sqrt(model.g2(tau + cfg.delta_t))
    minus = np.sqrt(model.g2(tau - cfg.delta_t))
    coh = cfg.v0 * model.g1(tau) ** 2 * np.cos(cfg.omega * tau)
    value = ((cfg.r_a ** 2 + cfg.t_a ** 2) * cfg.r_b * cfg.t_b * model.g2(tau)
             + cfg.r_a * cfg.t_a * cfg.r_b * plus * (cfg.r_b * plus - cfg.t_b * coh * minus)
             + cfg.r_a * cfg.t_a * cfg.t_b * minus * (cfg.t_b * minus - cfg.r_b * coh * plus))
    return value / normalization(cfg)


def g2(cfg: InterferometerConfig, model: SourceModel, mode, tau):
    mode = PolarizationMode.parse(mode)
    if mode is PolarizationMode.CROSS:
        return g2_cross(cfg, model, tau)
    return g2_parallel(cfg, model, tau)


def visibility(cfg: InterferometerConfig, model: SourceModel, tau):
    """Two-photon interference visibility (g2_cross - g2_parallel) / g2_cross."""
    cross = g2_cross(cfg, model, tau)
    if np.any(cross < 1e-12):
        raise DegenerateDenominatorError("g2_cross vanishes; visibility undefined")
    return (cross - g2_parallel(cfg, model, tau)) / cross


def visibility_zero(cfg: InterferometerConfig, model: SourceModel) -> float:
    """Zero-delay visibility of a balanced interferometer, V0 / (1 + g2(0))."""
    if not cfg.is_symmetric:
        raise ValidationError("visibility_zero requires 50/50 splitters")
    return cfg.v0 / (1.0 + model.g2_zero)


def _check_threshold_inputs(cfg, model):
    if cfg.omega != 0:
        raise ValidationError("side thresholds are defined for omega = 0 only")
    if not model.g2_zero > 0:
        raise ValidationError("side thresholds require g2_zero > 0")
    if not cfg.v0 > 0:
        raise ValidationError("side thresholds require v0 > 0")


def _log_threshold(tau_coh, ratio, location):
    if ratio < 1:
        raise UndefinedThresholdError(
            f"no side peak at {location.value}dt for any delay (log argument {ratio:.6g} < 1)")
    return 0.5 * tau_coh * math.log(ratio)


def side_threshold(cfg: InterferometerConfig, model: SourceModel, location) -> float:
    """Largest arm delay for which the heuristic sign argument on the grouped
    form predicts a bunching peak at ``location``.

    Peak iff ``delta_t`` is below the returned value. The argument compares
    ``T_B g2(0)`` (resp. ``R_B g2(0)``) with ``R_B V0 |g1(dt)|^2`` and is the
    conventional rule of thumb; :func:`exact_side_threshold` gives the
    boundary of the actual local contrast.
    """
    location = SideLocation.parse(location)
    _check_threshold_inputs(cfg, model)
    near, far = (cfg.r_b, cfg.t_b) if location is SideLocation.PLUS else (cfg.t_b, cfg.r_b)
    if far == 0:
        return math.inf
    return _log_threshold(model.tau_coh, near * cfg.v0 / (far * model.g2_zero), location)


def exact_side_threshold(cfg: InterferometerConfig, model: SourceModel, location) -> float:
    """Peak/dip boundary of the local contrast at ``location`` for omega = 0.

    In the limit tau_corr << dt the parallel correlation across the side dip
    is quadratic in ``x = sqrt(g2(tau -+ dt))``; comparing ``x = sqrt(g2(0))``
    with ``x = 1`` gives a peak iff
    ``T_B (1 + sqrt(g2(0))) < 2 R_B V0 |g1(dt)|^2`` (R_B, T_B swapped at -dt).
    """
    location = SideLocation.parse(location)
    _check_threshold_inputs(cfg, model)
    near, far = (cfg.r_b, cfg.t_b) if location is SideLocation.PLUS else (cfg.t_b, cfg.r_b)
    if far == 0:
        return math.inf
    ratio = 2 * near * cfg.v0 / (far * (1 + math.sqrt(model.g2_zero)))
    return _log_threshold(model.tau_coh, ratio, location)


def tau_coh_for_boundary(cfg: InterferometerConfig, model: SourceModel, location,
                         exact: bool = True) -> float:
    """Coherence time that would place the peak/dip boundary exactly at
    ``cfg.delta_t``."""
    probe = model.replace(tau_coh=1.0)
    fn = exact_side_threshold if exact else side_threshold
    per_unit = fn(cfg.replace(omega=0.0), probe, location)
    if per_unit <= 0:
        return math.inf
    return cfg.delta_t / per_unit


def classify_side_feature(cfg: InterferometerConfig, model: SourceModel, location,
                          epsilon: float = DEFAULT_EPSILON) -> SideFeature:
    """Classify the parallel-polarization feature at +dt or -dt.

    The local background is the mean of ``g2_parallel`` at
    ``±dt ± 20 tau_corr``.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be > 0")
    location = SideLocation.parse(location)
    center = location.sign * cfg.delta_t
    offset = BACKGROUND_OFFSET * model.tau_corr
    value = float(g2_parallel(cfg, model, center))
    background = float(np.mean(g2_parallel(cfg, model, np.array([center - offset, center + offset]))))
    contrast = value - background
    if contrast > epsilon:
        kind = FeatureKind.PEAK
    elif contrast < -epsilon:
        kind = FeatureKind.DIP
    else:
        kind = FeatureKind.FLAT
    return SideFeature(location, kind, contrast, value, background)


def beat_visibility(cfg: InterferometerConfig, model: SourceModel,
                    tau_window: Tuple[float, float], points_per_period: int = 512) -> float:
    """(max - min) / (max + min) of ``g2_parallel`` over ``tau_window``."""
    lo, hi = map(float, tau_window)
    if cfg.omega == 0:
        raise ValidationError("beat visibility requires a non-zero frequency shift")
    if not hi > lo:
        raise ValidationError("empty tau window")
    period = 2 * math.pi / abs(cfg.omega)
    if hi - lo < period:
        raise ValidationError(f"window spans {hi - lo:.3g} s, shorter than one beat period {period:.3g} s")
    guard = BACKGROUND_OFFSET * model.tau_corr
    for center in (0.0, cfg.delta_t, -cfg.delta_t):
        if lo < center + guard and hi > center - guard:
            raise ValidationError(f"window overlaps the feature neighbourhood of tau={center:.3g} s")
    limit = model.tau_coh / 10
    if lo <= -limit or hi >= limit:
        raise ValidationError("window must lie inside (-tau_coh/10, tau_coh/10)")
    n = max(4097, int(math.ceil((hi - lo) / period * points_per_period)) + 1)
    values = g2_parallel(cfg, model, np.linspace(lo, hi, n))
    vmax, vmin = float(values.max()), float(values.min())
    return (vmax - vmin) / (vmax + vmin)


def sample_series(cfg: InterferometerConfig, model: SourceModel, mode, tau_grid) -> CorrelationSeries:
    mode = PolarizationMode.parse(mode)
    taus = np.asarray(tau_grid, dtype=float).ravel()
    if taus.size > 1 and not np.all(np.diff(taus) > 0):
        raise ValidationError("tau grid must be strictly increasing")
    values = np.asarray(g2(cfg, model, mode, taus), dtype=float).reshape(taus.shape)
    return CorrelationSeries(taus, values, mode, cfg, model)


def feature_grid(delta_t: float, tau_corr: float, span: float, coarse: int = 2001,
                 fine: int = 401, fine_halfwidth: float = 30.0) -> np.ndarray:
    """Uniform grid over ``[-span, span]`` refined around 0 and ±dt."""
    parts = [np.linspace(-span, span, coarse)]
    half = fine_halfwidth * tau_corr
    for center in {0.0, delta_t, -delta_t}:
        parts.append(np.linspace(center - half, center + half, fine))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= -span) & (grid <= span)]
