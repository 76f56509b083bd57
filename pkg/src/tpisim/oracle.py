"""Path-amplitude reconstruction of the interferometer coincidence rate.

Each detected photon pair is routed through one of four arm assignments
(short/long arm for the photon recorded on detector 1 and detector 2). The
coincidence rate is the squared modulus of the summed two-photon amplitude,
averaged over the source: diagonal terms weight the source pair correlation at
the emission-time separation of each assignment, off-diagonal terms survive
only if the optical carrier phases of the two assignments cancel.

Everything here is scalar Python on purpose; it must not share arithmetic with
the vectorized closed forms it is used to check.
"""
from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from typing import List

from .model import InterferometerConfig, PolarizationMode, SourceModel


class Arm(enum.Enum):
    SHORT = "short"
    LONG = "long"


@dataclass(frozen=True)
class PathPairing:
    """Arm assignment for the photons recorded on detector 1 and detector 2.

    ``delay_offset`` is (arm delay of photon 1 - arm delay of photon 2) in
    units of dt; the source emission separation is ``tau + delay_offset*dt``.
    """

    path_first: Arm
    path_second: Arm
    amplitude: complex

    @property
    def amplitude_weight(self) -> float:
        return abs(self.amplitude)

    @property
    def delay_offset(self) -> int:
        return _delay(self.path_first) - _delay(self.path_second)

    @property
    def total_delay(self) -> int:
        return _delay(self.path_first) + _delay(self.path_second)


def _delay(arm: Arm) -> int:
    return 1 if arm is Arm.LONG else 0


def _leg_amplitude(cfg: InterferometerConfig, arm: Arm, detector: int) -> complex:
    # input splitter: short arm transmitted, long arm reflected
    # output splitter: long arm reflected into detector 1, short arm into detector 2
    # reflections pick up a factor i
    first = math.sqrt(cfg.t_a) if arm is Arm.SHORT else 1j * math.sqrt(cfg.r_a)
    reflected = (arm is Arm.LONG) == (detector == 1)
    second = 1j * math.sqrt(cfg.r_b) if reflected else math.sqrt(cfg.t_b)
    return first * second


def enumerate_pairings(cfg: InterferometerConfig) -> List[PathPairing]:
    return [
        PathPairing(a1, a2, _leg_amplitude(cfg, a1, 1) * _leg_amplitude(cfg, a2, 2))
        for a1, a2 in itertools.product(Arm, Arm)
    ]


def exchange_survives(p: PathPairing, q: PathPairing) -> bool:
    """Off-diagonal terms keep a carrier phase ``omega_0 * dt * (total delay
    difference)`` unless both assignments accumulate the same total delay; a
    non-zero carrier phase averages out over the detection time."""
    return p != q and p.total_delay == q.total_delay


def _emission_times(p: PathPairing, tau: float, dt: float):
    # detector 1 clicks at 0, detector 2 at tau
    return (-_delay(p.path_first) * dt, tau - _delay(p.path_second) * dt)


def _shift_phase(p: PathPairing, tau: float, omega: float) -> float:
    # field leaving the frequency-shifted (long) arm at time t carries exp(-i omega t)
    detection_times = (0.0, tau)
    arms = (p.path_first, p.path_second)
    return -omega * sum(t for t, arm in zip(detection_times, arms) if arm is Arm.LONG)


def oracle_g2(cfg: InterferometerConfig, model: SourceModel, mode, tau: float) -> float:
    mode = PolarizationMode.parse(mode)
    tau = float(tau)
    dt = cfg.delta_t
    pairings = enumerate_pairings(cfg)
    completeness = sum(abs(p.amplitude) ** 2 for p in pairings)

    def pair_g2(p):
        e1, e2 = _emission_times(p, tau, dt)
        return float(model.g2(e2 - e1))

    rate = sum(abs(p.amplitude) ** 2 * pair_g2(p) for p in pairings)
    if mode is PolarizationMode.PARALLEL and cfg.v0 > 0:
        for p, q in itertools.combinations(pairings, 2):
            if not exchange_survives(p, q):
                continue
            p1, p2 = _emission_times(p, tau, dt)
            q1, q2 = _emission_times(q, tau, dt)
            # exchange: conjugate field of each photon paired with the other's partner
            coherence = float(model.g1(p1 - q2)) * float(model.g1(p2 - q1))
            envelope = math.sqrt(pair_g2(p) * pair_g2(q))
            phase = _shift_phase(q, tau, cfg.omega) - _shift_phase(p, tau, cfg.omega)
            amp = p.amplitude.conjugate() * q.amplitude * cmath.exp(1j * phase)
            rate += 2 * (amp * cfg.v0 * coherence * envelope).real
    return max(rate / completeness, 0.0)
