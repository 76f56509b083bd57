"""Cross-correlation histograms of time-tag streams.

The lag convention is ``tau = t_b - t_a``. Histogram bins cover
``[-max_lag, max_lag)`` with width ``bin_width`` (both in picoseconds).
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numba
import numpy as np

from .errors import CounterOverflowError, UnsortedInputError, ValidationError
from .tags import PS_PER_S, TagStream, seconds_to_ps

_COUNTER_MAX = np.iinfo(np.int64).max
# int64 histograms above this many bins spill out of L2; count through a uint8 stage
_STAGED_MIN_BINS = 1 << 18
_STAGE_MAX = 255


class Normalization(enum.Enum):
    RAW = "raw"
    RATE = "rate"

    @classmethod
    def parse(cls, value) -> "Normalization":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower()
        if v in ("rate", "ratenormalized", "rate_normalized"):
            return cls.RATE
        if v == "raw":
            return cls.RAW
        raise ValidationError(f"unknown normalization {value!r}")


@dataclass(frozen=True)
class CorrelatorConfig:
    bin_width: int
    max_lag: int
    normalization: Normalization = Normalization.RATE

    def __post_init__(self):
        object.__setattr__(self, "normalization", Normalization.parse(self.normalization))
        if self.bin_width <= 0 or self.max_lag <= 0:
            raise ValidationError("bin_width and max_lag must be positive")
        if (2 * self.max_lag) % self.bin_width:
            raise ValidationError("2*max_lag must be an integer multiple of bin_width")

    @property
    def n_bins(self) -> int:
        return 2 * self.max_lag // self.bin_width

    def bin_centers_ps(self) -> np.ndarray:
        return -self.max_lag + (np.arange(self.n_bins) + 0.5) * self.bin_width


@dataclass(frozen=True, eq=False)
class CorrelationHistogram:
    """Pair-count histogram. ``g2`` and ``sigma`` are derived on first
    access: rate-normalized counts divided by
    ``rate_a * rate_b * bin_width * (duration - |tau|)`` or, for raw
    normalization, the counts themselves."""

    counts: np.ndarray
    rate_a: float
    rate_b: float
    duration: float
    config: CorrelatorConfig = field(repr=False)

    @cached_property
    def bin_centers(self) -> np.ndarray:
        return self.config.bin_centers_ps() / PS_PER_S

    def effective_time(self) -> np.ndarray:
        return self.duration - np.abs(self.bin_centers)

    def _norm(self) -> np.ndarray:
        return self.rate_a * self.rate_b * (self.config.bin_width / PS_PER_S) * self.effective_time()

    @cached_property
    def g2(self) -> np.ndarray:
        if self.config.normalization is Normalization.RAW:
            return self.counts.astype(float)
        norm = self._norm()
        return np.divide(self.counts, norm, out=np.zeros(norm.size), where=norm > 0)

    @cached_property
    def sigma(self) -> np.ndarray:
        root = np.sqrt(self.counts)
        if self.config.normalization is Normalization.RAW:
            return root
        norm = self._norm()
        return np.divide(root, norm, out=np.zeros(norm.size), where=norm > 0)

    def expected_counts(self, g2_model) -> np.ndarray:
        """Counts implied by a model ``g2`` at the measured singles rates."""
        return np.asarray(g2_model) * self._norm()

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("tau_s,g2,sigma,counts\n")
            for row in zip(self.bin_centers, self.g2, self.sigma, self.counts):
                fh.write(f"{row[0]:.9g},{row[1]:.9g},{row[2]:.9g},{row[3]}\n")


@numba.njit(cache=True, nogil=True, inline="always")
def _bin_index(d, bin_width):
    # d >= 0 inside the window; unsigned division skips the sign fix-up
    return np.uint64(d) // np.uint64(bin_width)


@numba.njit(cache=True, nogil=True)
def _sweep(a, b, max_lag, bin_width, counts):
    nb = b.size
    lo = 0
    for i in range(a.size):
        start = a[i] - max_lag
        while lo < nb and b[lo] < start:
            lo += 1
        end = a[i] + max_lag
        j = lo
        while j < nb and b[j] < end:
            counts[_bin_index(b[j] - start, bin_width)] += 1
            j += 1


@numba.njit(cache=True, nogil=True)
def _sweep_staged(a, b, max_lag, bin_width, counts):
    # increments land in a uint8 copy of the histogram (an eighth of the
    # memory traffic); a counter that reaches 255 spills into ``counts``
    stage = np.zeros(counts.size, np.uint8)
    nb = b.size
    lo = 0
    for i in range(a.size):
        start = a[i] - max_lag
        while lo < nb and b[lo] < start:
            lo += 1
        end = a[i] + max_lag
        j = lo
        while j < nb and b[j] < end:
            k = _bin_index(b[j] - start, bin_width)
            v = stage[k] + np.uint8(1)
            if v == _STAGE_MAX:
                counts[k] += _STAGE_MAX
                v = 0
            stage[k] = v
            j += 1
    for k in range(counts.size):
        counts[k] += stage[k]


def _run(a_tags, b_tags, cfg, counts) -> None:
    max_lag, bw = np.int64(cfg.max_lag), np.int64(cfg.bin_width)
    if counts.size >= _STAGED_MIN_BINS:
        _sweep_staged(a_tags, b_tags, max_lag, bw, counts)
    else:
        _sweep(a_tags, b_tags, max_lag, bw, counts)


def _as_tags(x) -> np.ndarray:
    arr = x.tags if isinstance(x, TagStream) else np.asarray(x)
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    if arr.size > 1 and np.any(arr[1:] < arr[:-1]):
        raise UnsortedInputError("time tags must be sorted in ascending order")
    return arr


def _duration_ps(a, b, duration) -> int:
    if duration is not None:
        return int(duration)
    known = [s.duration for s in (a, b) if isinstance(s, TagStream)]
    if known:
        return min(known)
    tails = [int(np.asarray(s)[-1]) for s in (a, b) if np.asarray(s).size]
    return max(tails, default=0)


def _accumulate(total: np.ndarray, part: np.ndarray) -> None:
    if np.any(part > _COUNTER_MAX - total):
        raise CounterOverflowError("histogram bin exceeds the 64-bit counter range")
    total += part


def _finish(counts, a_tags, b_tags, cfg: CorrelatorConfig, duration_ps: int) -> CorrelationHistogram:
    duration = duration_ps / PS_PER_S
    rate_a = a_tags.size / duration if duration > 0 else 0.0
    rate_b = b_tags.size / duration if duration > 0 else 0.0
    return CorrelationHistogram(counts, rate_a, rate_b, duration, cfg)


def correlate(a, b, cfg: CorrelatorConfig, duration: Optional[int] = None) -> CorrelationHistogram:
    """Histogram of ``t_b - t_a`` over all pairs within ``±max_lag``.

    ``a``/``b`` are :class:`TagStream` objects or sorted integer-ps arrays.
    ``duration`` (ps) defaults to the shorter stream duration.
    """
    a_tags, b_tags = _as_tags(a), _as_tags(b)
    counts = np.zeros(cfg.n_bins, dtype=np.int64)
    _run(a_tags, b_tags, cfg, counts)
    return _finish(counts, a_tags, b_tags, cfg, _duration_ps(a, b, duration))


def correlate_batched(a, b, cfg: CorrelatorConfig, segment_length: float,
                      duration: Optional[int] = None, n_jobs: int = 1) -> CorrelationHistogram:
    """Segmented equivalent of :func:`correlate`.

    Stream ``a`` is cut into segments of ``segment_length`` seconds; each
    segment sees the slice of ``b`` widened by ``max_lag`` on both sides.
    Partial histograms are independent and summed, so segments may run on
    ``n_jobs`` threads. Counts are bit-identical to :func:`correlate`.
    """
    a_tags, b_tags = _as_tags(a), _as_tags(b)
    seg = seconds_to_ps(segment_length)
    if seg <= 0:
        raise ValidationError("segment_length must be positive")
    total = np.zeros(cfg.n_bins, dtype=np.int64)
    if a_tags.size and b_tags.size:
        t0 = int(a_tags[0])
        starts = range(t0, int(a_tags[-1]) + 1, seg)

        def work(s):
            a_lo, a_hi = np.searchsorted(a_tags, [s, s + seg], side="left")
            b_lo, b_hi = np.searchsorted(b_tags, [s - cfg.max_lag, s + seg + cfg.max_lag], side="left")
            part = np.zeros(cfg.n_bins, dtype=np.int64)
            _run(a_tags[a_lo:a_hi], b_tags[b_lo:b_hi], cfg, part)
            return part

        if n_jobs > 1:
            with ThreadPoolExecutor(max_workers=n_jobs) as pool:
                for part in pool.map(work, starts):
                    _accumulate(total, part)
        else:
            for s in starts:
                _accumulate(total, work(s))
    return _finish(total, a_tags, b_tags, cfg, _duration_ps(a, b, duration))
