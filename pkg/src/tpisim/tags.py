"""Time-tag stream container."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

PS_PER_S = 1_000_000_000_000


def seconds_to_ps(t) -> int:
    return int(round(float(t) * PS_PER_S))


@dataclass(frozen=True, eq=False)
class TagStream:
    """Strictly increasing detector click times (integer picoseconds) on one
    channel, recorded over ``[0, duration]``."""

    channel: int
    tags: np.ndarray
    duration: int

    def __post_init__(self):
        tags = np.ascontiguousarray(self.tags, dtype=np.int64)
        tags.setflags(write=False)
        object.__setattr__(self, "tags", tags)
        object.__setattr__(self, "duration", int(self.duration))
        if tags.ndim != 1:
            raise ValidationError("tags must be one-dimensional")
        if tags.size:
            if tags.size > 1 and not np.all(tags[1:] > tags[:-1]):
                raise ValidationError("tags must be strictly increasing")
            if tags[0] < 0 or tags[-1] > self.duration:
                raise ValidationError("tags must lie within [0, duration]")
        if self.duration < 0:
            raise ValidationError("duration must be >= 0")

    def __len__(self):
        return self.tags.size

    def __eq__(self, other):
        if not isinstance(other, TagStream):
            return NotImplemented
        return (self.channel == other.channel and self.duration == other.duration
                and np.array_equal(self.tags, other.tags))

    @property
    def duration_s(self) -> float:
        return self.duration / PS_PER_S

    @property
    def rate(self) -> float:
        return self.tags.size / self.duration_s if self.duration else 0.0

    @classmethod
    def from_seconds(cls, times, duration: float, channel: int = 0) -> "TagStream":
        """Quantize sorted times (s) onto the 1 ps grid. Collisions are pushed
        forward by 1 ps; anything pushed past ``duration`` is dropped."""
        duration_ps = seconds_to_ps(duration)
        ps = np.round(np.asarray(times, dtype=float) * PS_PER_S).astype(np.int64)
        if ps.size:
            idx = np.arange(ps.size, dtype=np.int64)
            ps = np.maximum.accumulate(ps - idx) + idx
            ps = ps[ps <= duration_ps]
        return cls(channel, ps, duration_ps)
