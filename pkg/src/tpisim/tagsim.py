"""Seeded synthetic detector streams.

Two-channel streams are produced by thinning: channel 1 is homogeneous
Poisson, channel 2 is drawn from a dominating Poisson process at
``rate2 * M`` and each candidate at time ``t`` is kept with probability
``prod_i target(t - a_i) / M`` over channel-1 tags ``a_i`` within ``±window``.
For a Poisson channel 1 this makes the normalized cross-correlation equal to
``target`` exactly, up to clamping of products above ``M``. Only two-point
statistics are faithful; higher orders are not.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import CapacityError, ValidationError
from .tags import PS_PER_S, TagStream

MAX_EXPECTED_TAGS = 1_000_000_000
WARN_RATIO = 0.05
REJECT_RATIO = 0.2
_CHUNK = 1 << 20


def _check_capacity(expected: float) -> None:
    if expected > MAX_EXPECTED_TAGS:
        raise CapacityError(f"expected {expected:.3g} tags exceeds the 1e9 limit")


def _poisson_times(rate: float, duration: float, rng: np.random.Generator) -> np.ndarray:
    _check_capacity(rate * duration)
    n = rng.poisson(rate * duration)
    return np.sort(rng.uniform(0.0, duration, n))


def generate_poisson(rate: float, duration: float, seed: int, channel: int = 0) -> TagStream:
    """Homogeneous Poisson stream of ``rate`` Hz over ``duration`` seconds."""
    if duration == 0:
        return TagStream(channel, np.empty(0, dtype=np.int64), 0)
    if not rate > 0 or not duration > 0:
        raise ValidationError("rate and duration must be positive")
    rng = np.random.default_rng(seed)
    return TagStream.from_seconds(_poisson_times(rate, duration, rng), duration, channel)


@dataclass(frozen=True)
class SimConfig:
    """Two-channel simulation request. ``target`` maps lags ``t_2 - t_1``
    (seconds, numpy array) to the desired cross-correlation and is treated as
    1 outside ``±window``."""

    rate1: float
    rate2: float
    duration: float
    seed: int
    target: Callable[[np.ndarray], np.ndarray]
    window: float
    background_rate: float = 0.0
    target_max: Optional[float] = None

    def __post_init__(self):
        if not (self.rate1 > 0 and self.rate2 > 0):
            raise ValidationError("rates must be positive")
        if not self.duration > 0:
            raise ValidationError("duration must be positive")
        if not self.window > 0:
            raise ValidationError("window must be positive")
        if self.background_rate < 0:
            raise ValidationError("background_rate must be >= 0")
        ratio = self.validity_ratio
        if ratio > REJECT_RATIO:
            raise ValidationError(f"max(rate)*window = {ratio:.3g} exceeds {REJECT_RATIO}")
        if ratio > WARN_RATIO:
            warnings.warn(f"max(rate)*window = {ratio:.3g} > {WARN_RATIO}; "
                          "multi-neighbour clamping may bias the correlation", RuntimeWarning, stacklevel=3)

    @property
    def validity_ratio(self) -> float:
        return max(self.rate1, self.rate2) * self.window


def target_supremum(target, window: float, points: int = 200_001) -> float:
    grid = np.linspace(-window, window, points)
    return float(np.max(target(grid)))


def generate_pair_correlated(cfg: SimConfig) -> Tuple[TagStream, TagStream]:
    s1_seed, cand_seed, accept_seed, bg_seed = np.random.SeedSequence(cfg.seed).spawn(4)
    stream1 = generate_poisson(cfg.rate1, cfg.duration, s1_seed, channel=1)
    m = cfg.target_max if cfg.target_max is not None else target_supremum(cfg.target, cfg.window)
    if not m > 0:
        raise ValidationError("target must be positive somewhere inside the window")

    rng = np.random.default_rng(cand_seed)
    candidates = _poisson_times(cfg.rate2 * m, cfg.duration, rng)
    cand_ps = np.round(candidates * PS_PER_S).astype(np.int64)
    a = stream1.tags
    win_ps = int(round(cfg.window * PS_PER_S))
    accept_rng = np.random.default_rng(accept_seed)
    kept = []
    for start in range(0, cand_ps.size, _CHUNK):
        chunk = cand_ps[start:start + _CHUNK]
        prob = _acceptance(chunk, a, win_ps, cfg.target) / m
        keep = accept_rng.random(chunk.size) < np.clip(prob, 0.0, 1.0)
        kept.append(candidates[start:start + _CHUNK][keep])
    times2 = np.concatenate(kept) if kept else np.empty(0)

    if cfg.background_rate > 0:
        bg_rng = np.random.default_rng(bg_seed)
        bg1 = _poisson_times(cfg.background_rate, cfg.duration, bg_rng)
        bg2 = _poisson_times(cfg.background_rate, cfg.duration, bg_rng)
        stream1 = TagStream.from_seconds(np.sort(np.concatenate([a / PS_PER_S, bg1])), cfg.duration, 1)
        times2 = np.sort(np.concatenate([times2, bg2]))
    stream2 = TagStream.from_seconds(times2, cfg.duration, channel=2)
    return stream1, stream2


def _acceptance(cand: np.ndarray, a: np.ndarray, win_ps: int, target) -> np.ndarray:
    """Product of ``target(c - a_i)`` over channel-1 tags within the window."""
    lo = np.searchsorted(a, cand - win_ps, side="left")
    hi = np.searchsorted(a, cand + win_ps, side="right")
    n = hi - lo
    prod = np.ones(cand.size)
    total = int(n.sum())
    if total == 0:
        return prod
    owner = np.repeat(np.arange(cand.size), n)
    first = np.cumsum(n) - n
    a_idx = lo[owner] + (np.arange(total) - first[owner])
    lags = (cand[owner] - a[a_idx]) / PS_PER_S
    np.multiply.at(prod, owner, np.asarray(target(lags), dtype=float))
    return prod


def _renewal_intervals(e: np.ndarray, rate: float, depth: float, tau: float) -> np.ndarray:
    """Solve ``rate*(x - depth*tau*(1 - exp(-x/tau))) = e`` for ``x``.

    The cumulative hazard is convex and increasing, so Newton from the
    large-``x`` asymptote converges monotonically from above.
    """
    x = e / rate + depth * tau
    for _ in range(100):
        decay = np.exp(-x / tau)
        h = rate * (x - depth * tau * (1.0 - decay)) - e
        slope = rate * (1.0 - depth * decay)
        step = np.where(slope > 0, h / np.where(slope > 0, slope, 1.0), 0.0)
        x = np.maximum(x - step, 0.0)
        if np.all(np.abs(step) <= 1e-15 * np.maximum(x, tau)):
            break
    return x


def generate_antibunched_renewal(rate: float, g2_zero: float, tau_corr: float,
                                 duration: float, seed: int, channel: int = 0) -> TagStream:
    """Renewal stream with hazard ``rate*(1 - (1 - g2_zero) exp(-d/tau_corr))``
    where ``d`` is the time since the previous event."""
    if not (rate > 0 and tau_corr > 0 and duration >= 0 and g2_zero >= 0):
        raise ValidationError("invalid renewal parameters")
    if rate * tau_corr > WARN_RATIO:
        raise ValidationError(f"rate*tau_corr = {rate * tau_corr:.3g} exceeds {WARN_RATIO}")
    if duration == 0:
        return TagStream(channel, np.empty(0, dtype=np.int64), 0)
    depth = 1.0 - g2_zero
    mean_interval = 1.0 / rate + depth * tau_corr
    _check_capacity(duration / mean_interval)
    rng = np.random.default_rng(seed)
    chunks, t = [], 0.0
    block = int(duration / mean_interval * 1.05 + 10 * math.sqrt(duration / mean_interval) + 64)
    while t <= duration:
        gaps = _renewal_intervals(rng.exponential(size=block), rate, depth, tau_corr)
        times = t + np.cumsum(gaps)
        chunks.append(times)
        t = times[-1]
        block = max(block // 4, 1024)
    times = np.concatenate(chunks)
    return TagStream.from_seconds(times[times <= duration], duration, channel)


def split_stream(stream: TagStream, seed: int, fraction: float = 0.5,
                 channels: Tuple[int, int] = (1, 2)) -> Tuple[TagStream, TagStream]:
    """Route each tag to the first output with probability ``fraction``
    (a beam splitter in front of two detectors)."""
    rng = np.random.default_rng(seed)
    first = rng.random(stream.tags.size) < fraction
    return (TagStream(channels[0], stream.tags[first], stream.duration),
            TagStream(channels[1], stream.tags[~first], stream.duration))
