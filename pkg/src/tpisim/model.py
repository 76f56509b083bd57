"""Source, interferometer and cavity-QED parameter types.

All times are in seconds, angular frequencies in rad/s. Cavity-QED rates are
ordinary frequencies in Hz (the "/2π" values usually quoted for devices).
Every correlation function accepts scalars or numpy arrays.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

#: Fibre propagation delay, seconds per kilometre.
FIBRE_DELAY_PER_KM = 5e-6

#: Default photon correlation time of the quantum-dot device (s).
DEVICE_TAU_CORR = 115e-12
#: Default first-order coherence time (s); a lower bound for the real device.
DEVICE_TAU_COH = 10e-6
DEVICE_G2_ZERO = 0.03

_SUM_TOL = 1e-9


class PolarizationMode(enum.Enum):
    CROSS = "cross"
    PARALLEL = "parallel"

    @classmethod
    def parse(cls, value: "str | PolarizationMode") -> "PolarizationMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown polarization mode {value!r}") from None


@dataclass(frozen=True)
class SourceModel:
    """Correlation description of a stationary light source.

    The antibunching dip recovers as a single exponential with time constant
    ``tau_corr``; coherence decays exponentially with ``tau_coh``. Subclasses
    may override :meth:`g1` or :meth:`g2` to plug in other shapes.
    """

    g2_zero: float = DEVICE_G2_ZERO
    tau_corr: float = DEVICE_TAU_CORR
    tau_coh: float = DEVICE_TAU_COH

    def __post_init__(self):
        if not self.g2_zero >= 0:
            raise ValidationError(f"g2_zero must be >= 0, got {self.g2_zero}")
        if not self.tau_corr > 0:
            raise ValidationError(f"tau_corr must be > 0, got {self.tau_corr}")
        if not self.tau_coh > 0:
            raise ValidationError(f"tau_coh must be > 0, got {self.tau_coh}")
        if self.tau_coh / self.tau_corr < 10:
            warnings.warn(
                f"tau_coh/tau_corr = {self.tau_coh / self.tau_corr:.3g} < 10; "
                "the long-coherence model is outside its intended regime",
                RuntimeWarning,
                stacklevel=3,
            )

    def g1(self, tau):
        return np.exp(-np.abs(tau) / self.tau_coh)

    def g2(self, tau):
        return 1.0 - (1.0 - self.g2_zero) * np.exp(-np.abs(tau) / self.tau_corr)

    def replace(self, **changes) -> "SourceModel":
        return replace(self, **changes)


@dataclass(frozen=True)
class InterferometerConfig:
    """Asymmetric Mach-Zehnder interferometer.

    ``r_*``/``t_*`` are intensity coefficients of the input (A) and output (B)
    splitters, ``delta_t`` the arm delay, ``omega`` the angular frequency shift
    carried by the long arm and ``v0`` the mode overlap at the output splitter.
    """

    r_a: float = 0.5
    t_a: float = 0.5
    r_b: float = 0.5
    t_b: float = 0.5
    delta_t: float = 0.0
    omega: float = 0.0
    v0: float = 1.0

    def __post_init__(self):
        for name in ("r_a", "t_a", "r_b", "t_b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {value}")
        if abs(self.r_a + self.t_a - 1.0) > _SUM_TOL:
            raise ValidationError("r_a + t_a must equal 1 (lossless splitter)")
        if abs(self.r_b + self.t_b - 1.0) > _SUM_TOL:
            raise ValidationError("r_b + t_b must equal 1 (lossless splitter)")
        if not 0.0 <= self.v0 <= 1.0:
            raise ValidationError(f"v0 must lie in [0, 1], got {self.v0}")
        if not self.delta_t >= 0:
            raise ValidationError(f"delta_t must be >= 0, got {self.delta_t}")
        if not math.isfinite(self.omega):
            raise ValidationError("omega must be finite")

    @classmethod
    def balanced(cls, delta_t: float = 0.0, omega: float = 0.0, v0: float = 1.0,
                 r_a: float = 0.5, r_b: float = 0.5) -> "InterferometerConfig":
        return cls(r_a=r_a, t_a=1.0 - r_a, r_b=r_b, t_b=1.0 - r_b,
                   delta_t=delta_t, omega=omega, v0=v0)

    @property
    def shift_hz(self) -> float:
        """Frequency shift Ω/2π in Hz."""
        return self.omega / (2 * math.pi)

    @property
    def is_symmetric(self) -> bool:
        return all(abs(v - 0.5) <= _SUM_TOL for v in (self.r_a, self.t_a, self.r_b, self.t_b))

    def replace(self, **changes) -> "InterferometerConfig":
        return replace(self, **changes)


def fibre_delay(length_km: float) -> float:
    """Arm delay in seconds for a fibre of ``length_km`` kilometres."""
    return length_km * FIBRE_DELAY_PER_KM


@dataclass(frozen=True)
class CqedParams:
    """Cavity-QED rates in Hz: coupling ``g``, cavity decay ``kappa``,
    spontaneous emission into leaky modes ``gamma_par`` and pure dephasing
    ``gamma_star``."""

    g: float
    kappa: float
    gamma_par: float
    gamma_star: float = 0.0

    def __post_init__(self):
        if min(self.g, self.kappa, self.gamma_par, self.gamma_star) < 0:
            raise ValidationError("CQED rates must be non-negative")

    @property
    def gamma_perp(self) -> float:
        return self.gamma_par / 2 + self.gamma_star


def g1_magnitude(model: SourceModel, tau):
    """|g1(tau)| of the source."""
    return model.g1(tau)


def g2_auto(model: SourceModel, tau):
    """Second-order autocorrelation g2(tau) of the source."""
    return model.g2(tau)


def cooperativity(p: CqedParams) -> float:
    denom = p.kappa * p.gamma_perp
    if denom == 0:
        raise ZeroDivisionError("cooperativity undefined for kappa * gamma_perp = 0")
    return 2 * p.g ** 2 / denom


def critical_photon_number(p: CqedParams) -> float:
    if p.g == 0:
        raise ZeroDivisionError("critical photon number undefined for g = 0")
    return p.gamma_perp * p.gamma_par / (4 * p.g ** 2)
