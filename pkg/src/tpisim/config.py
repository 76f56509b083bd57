"""Experiment configuration files and unit-suffixed quantities.

Files are INI-style: ``key = value`` lines under ``[section]`` headers.
Times take ``ps``/``ns``/``us``/``ms``/``s`` suffixes or a fibre length in
``km`` (5 us per km); frequencies take ``Hz``/``kHz``/``MHz``/``GHz``.

Recognised sections and keys::

    [source]          g2_zero, tau_corr, tau_coh
    [interferometer]  r_a, t_a, r_b, t_b, delta_t, shift (Omega/2pi), omega (rad/s), v0
    [grid]            span, points
    [simulation]      rate1, rate2, duration, seed, window, target, background_rate
    [correlator]      bin_width, max_lag, normalization, segment_length
    [cqed]            g, kappa, gamma_par, gamma_star
    [classify]        delays, shifts   (comma separated lists)
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

from .errors import ValidationError
from .model import FIBRE_DELAY_PER_KM, CqedParams, InterferometerConfig, SourceModel

_TIME_UNITS = {"ps": 1e-12, "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ms": 1e-3,
               "s": 1.0, "km": FIBRE_DELAY_PER_KM}
_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµμ]*)\s*$")


def _split(text: str):
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValidationError(f"cannot parse quantity {text!r}")
    return float(m.group(1)), m.group(2)


def parse_time(text) -> float:
    """Seconds from ``'2.1 ns'``, ``'1 km'`` or a bare number of seconds."""
    value, unit = _split(text)
    if not unit:
        return value
    try:
        return value * _TIME_UNITS[unit if unit in _TIME_UNITS else unit.lower()]
    except KeyError:
        raise ValidationError(f"unknown time unit {unit!r} in {text!r}") from None


def parse_frequency(text) -> float:
    """Ordinary frequency in Hz."""
    value, unit = _split(text)
    if not unit:
        return value
    try:
        return value * _FREQ_UNITS[unit.lower()]
    except KeyError:
        raise ValidationError(f"unknown frequency unit {unit!r} in {text!r}") from None


def parse_number(text) -> float:
    value, unit = _split(text)
    if unit:
        raise ValidationError(f"expected a dimensionless number, got {text!r}")
    return value


def parse_list(text, parser) -> List[float]:
    return [parser(item) for item in str(text).split(",") if item.strip()]


@dataclass
class SimulationSettings:
    rate1: float = 5e3
    rate2: float = 5e3
    duration: float = 2000.0
    seed: int = 1
    window: float = 4e-6
    target: str = "parallel"
    background_rate: float = 0.0


@dataclass
class CorrelatorSettings:
    bin_width: float = 10e-9
    max_lag: float = 2e-6
    normalization: str = "rate"
    segment_length: Optional[float] = None


@dataclass
class Experiment:
    """Everything a CLI command may need, with defaults for missing parts."""

    source: SourceModel = field(default_factory=SourceModel)
    interferometer: InterferometerConfig = field(default_factory=InterferometerConfig)
    span: Optional[float] = None
    points: int = 2001
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    correlator: CorrelatorSettings = field(default_factory=CorrelatorSettings)
    cqed: Optional[CqedParams] = None
    delays: List[float] = field(default_factory=list)
    shifts: List[float] = field(default_factory=list)

    def grid_span(self) -> float:
        if self.span is not None:
            return self.span
        dt = self.interferometer.delta_t
        return 1.5 * dt if dt > 0 else 50 * self.source.tau_corr


_SOURCE_KEYS = {"g2_zero": parse_number, "tau_corr": parse_time, "tau_coh": parse_time}
_IFM_KEYS = {"r_a": parse_number, "t_a": parse_number, "r_b": parse_number, "t_b": parse_number,
             "delta_t": parse_time, "v0": parse_number, "omega": parse_number, "shift": parse_frequency}
_SIM_KEYS = {"rate1": parse_frequency, "rate2": parse_frequency, "duration": parse_time,
             "seed": lambda s: int(s), "window": parse_time, "target": str.strip,
             "background_rate": parse_frequency}
_CORR_KEYS = {"bin_width": parse_time, "max_lag": parse_time, "normalization": str.strip,
              "segment_length": parse_time}
_CQED_KEYS = {"g": parse_frequency, "kappa": parse_frequency, "gamma_par": parse_frequency,
              "gamma_star": parse_frequency}


def _section(parser, name, keys) -> Dict[str, object]:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        if key not in keys:
            raise ValidationError(f"unknown key {key!r} in [{name}]")
        out[key] = keys[key](raw)
    return out


def _interferometer(base: InterferometerConfig, values: Dict[str, object]) -> InterferometerConfig:
    values = dict(values)
    if "shift" in values:
        if "omega" in values:
            raise ValidationError("give either shift or omega, not both")
        values["omega"] = 2 * math.pi * values.pop("shift")
    for r, t in (("r_a", "t_a"), ("r_b", "t_b")):
        if r in values and t not in values:
            values[t] = 1.0 - values[r]
        elif t in values and r not in values:
            values[r] = 1.0 - values[t]
    return replace(base, **values)


def apply_settings(exp: Experiment, parser: configparser.ConfigParser) -> Experiment:
    known = {"source", "interferometer", "grid", "simulation", "correlator", "cqed", "classify"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ValidationError(f"unknown section(s): {', '.join(sorted(unknown))}")
    exp = replace(exp)
    src = _section(parser, "source", _SOURCE_KEYS)
    if src:
        exp.source = replace(exp.source, **src)
    ifm = _section(parser, "interferometer", _IFM_KEYS)
    if ifm:
        exp.interferometer = _interferometer(exp.interferometer, ifm)
    grid = _section(parser, "grid", {"span": parse_time, "points": lambda s: int(s)})
    exp.span = grid.get("span", exp.span)
    exp.points = grid.get("points", exp.points)
    sim = _section(parser, "simulation", _SIM_KEYS)
    if sim:
        exp.simulation = replace(exp.simulation, **sim)
    corr = _section(parser, "correlator", _CORR_KEYS)
    if corr:
        exp.correlator = replace(exp.correlator, **corr)
    cq = _section(parser, "cqed", _CQED_KEYS)
    if cq:
        exp.cqed = CqedParams(**cq) if exp.cqed is None else replace(exp.cqed, **cq)
    cls = _section(parser, "classify", {"delays": lambda s: parse_list(s, parse_time),
                                       "shifts": lambda s: parse_list(s, parse_frequency)})
    exp.delays = cls.get("delays", exp.delays)
    exp.shifts = cls.get("shifts", exp.shifts)
    return exp


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    return parser


def load_config(path, base: Optional[Experiment] = None) -> Experiment:
    parser = _parser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    return apply_settings(base or Experiment(), parser)


def apply_overrides(exp: Experiment, overrides: List[str]) -> Experiment:
    """Apply ``section.key=value`` strings on top of ``exp``."""
    parser = _parser()
    for item in overrides:
        lhs, sep, value = item.partition("=")
        section, dot, key = lhs.strip().partition(".")
        if not sep or not dot:
            raise ValidationError(f"override {item!r} must look like section.key=value")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())
    return apply_settings(exp, parser)
