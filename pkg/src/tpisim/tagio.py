"""Binary and text time-tag files.

Binary layout (little-endian)::

    magic "TTG1" | version u16 (=1) | reserved u16 | resolution_ps u64
    | channel u8 | record_count u64 | record_count x timestamp u64

Timestamps are stored in units of ``resolution_ps``. The format carries no
acquisition duration; readers default it to the last timestamp.

Text layout: one ``channel<TAB>timestamp_ps`` record per line, ``#`` starts a
comment line.
"""
from __future__ import annotations

import struct
from typing import Dict, Iterable, Optional

import numpy as np

from .errors import MalformedHeaderError, NonMonotonicTimestampError, TruncatedRecordError
from .tags import TagStream

MAGIC = b"TTG1"
VERSION = 1
_HEADER = struct.Struct("<4sHHQBQ")
HEADER_SIZE = _HEADER.size


def write_tags(stream: TagStream, path, resolution_ps: int = 1) -> None:
    if resolution_ps < 1:
        raise ValueError("resolution_ps must be >= 1")
    if not 0 <= stream.channel <= 255:
        raise ValueError("channel must fit in u8")
    tags = stream.tags
    if resolution_ps != 1:
        if np.any(tags % resolution_ps):
            raise ValueError("timestamps are not multiples of the requested resolution")
        tags = tags // resolution_ps
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 0, resolution_ps, stream.channel, tags.size))
        fh.write(tags.astype("<u8").tobytes())


def read_tags(path, duration: Optional[int] = None) -> TagStream:
    with open(path, "rb") as fh:
        head = fh.read(HEADER_SIZE)
        if len(head) < HEADER_SIZE:
            raise MalformedHeaderError(f"{path}: file shorter than the {HEADER_SIZE}-byte header")
        magic, version, _, resolution, channel, count = _HEADER.unpack(head)
        if magic != MAGIC:
            raise MalformedHeaderError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise MalformedHeaderError(f"{path}: unsupported version {version}")
        if resolution == 0:
            raise MalformedHeaderError(f"{path}: zero resolution")
        payload = fh.read()
    if len(payload) != 8 * count:
        raise TruncatedRecordError(
            f"{path}: header announces {count} records, payload holds {len(payload) / 8:g}")
    raw = np.frombuffer(payload, dtype="<u8")
    if raw.size and raw.max() > np.iinfo(np.int64).max // resolution:
        raise MalformedHeaderError(f"{path}: timestamps overflow 64-bit picoseconds")
    tags = raw.astype(np.int64) * np.int64(resolution)
    if tags.size > 1 and not np.all(tags[1:] > tags[:-1]):
        bad = int(np.argmin(tags[1:] > tags[:-1])) + 1
        raise NonMonotonicTimestampError(f"{path}: record {bad} is not after record {bad - 1}")
    if duration is None:
        duration = int(tags[-1]) if tags.size else 0
    return TagStream(channel, tags, duration)


def write_text_tags(streams: Iterable[TagStream], path) -> None:
    records = []
    for s in streams:
        records.append(np.column_stack([np.full(s.tags.size, s.channel, dtype=np.int64), s.tags]))
    data = np.concatenate(records) if records else np.empty((0, 2), dtype=np.int64)
    data = data[np.lexsort((data[:, 0], data[:, 1]))]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# channel\ttimestamp_ps\n")
        for ch, ts in data:
            fh.write(f"{ch}\t{ts}\n")


def read_text_tags(path, duration: Optional[int] = None) -> Dict[int, TagStream]:
    per_channel: Dict[int, list] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise TruncatedRecordError(f"{path}:{lineno}: expected 'channel<TAB>timestamp_ps'")
            try:
                ch, ts = int(parts[0]), int(parts[1])
            except ValueError:
                raise TruncatedRecordError(f"{path}:{lineno}: non-integer field") from None
            ticks = per_channel.setdefault(ch, [])
            if ticks and ts <= ticks[-1]:
                raise NonMonotonicTimestampError(f"{path}:{lineno}: timestamp not increasing on channel {ch}")
            ticks.append(ts)
    if duration is None:
        duration = max((t[-1] for t in per_channel.values() if t), default=0)
    return {ch: TagStream(ch, np.array(t, dtype=np.int64), duration)
            for ch, t in sorted(per_channel.items())}

