"""Named experiment presets for the device measurements and scaled test runs.

All figure presets use g2(0) = 0.03, tau_corr = 115 ps and tau_coh = 10 us
(a lower bound on the coherence time). The ``desk_*`` presets are
scaled for Monte-Carlo runs: tau_coh = 1 us, tau_corr = 20 ns, dt = 0.5 us;
the ratios dt/tau_coh and Omega*dt that set the physics are what matter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

from .config import CorrelatorSettings, Experiment, SimulationSettings
from .errors import ValidationError
from .model import CqedParams, InterferometerConfig, SourceModel, fibre_delay

DEVICE = SourceModel(g2_zero=0.03, tau_corr=115e-12, tau_coh=10e-6)
DESK = SourceModel(g2_zero=0.03, tau_corr=20e-9, tau_coh=1e-6)
DEVICE_CQED = CqedParams(g=4.7e9, kappa=36.8e9, gamma_par=0.35e9, gamma_star=0.0)
#: V0 reproducing the measured zero-delay visibility 0.943 at g2(0) = 0.03.
MEASURED_V0 = 0.971

FIG3_FIBRE_KM = {"fig3a": 0.12, "fig3b": 1.0, "fig3c": 2.0, "fig3d": 8.0}
FIG4_SHIFT_KHZ = {"fig4a": 48.0, "fig4b": 101.6, "fig4c": 147.1, "fig4d": 194.7, "fig4e": 246.0}


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    description: str
    source: SourceModel
    interferometer: InterferometerConfig
    span: float
    expected: Tuple[str, ...] = ()
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    correlator: CorrelatorSettings = field(default_factory=CorrelatorSettings)

    def experiment(self) -> Experiment:
        return Experiment(source=self.source, interferometer=self.interferometer, span=self.span,
                          simulation=replace(self.simulation), correlator=replace(self.correlator),
                          cqed=DEVICE_CQED)


def _build() -> Dict[str, ExperimentPreset]:
    out = {}

    def add(p):
        out[p.name] = p

    fig2 = InterferometerConfig.balanced(delta_t=2.1e-9)
    add(ExperimentPreset("fig2d", "cross/parallel correlations at the measured overlap", DEVICE,
                         fig2.replace(v0=MEASURED_V0), 4e-9))
    add(ExperimentPreset("fig2e", "cross/parallel correlations at perfect overlap", DEVICE, fig2, 4e-9,
                         ("cross(0) = 0.515", "parallel(0) = 0.015")))
    add(ExperimentPreset("fig2f", "visibility versus delay at the measured overlap", DEVICE,
                         fig2.replace(v0=MEASURED_V0), 4e-9,
                         ("visibility(0) = 0.943", "background 0.5")))
    for name, km in FIG3_FIBRE_KM.items():
        dt = fibre_delay(km)
        add(ExperimentPreset(name, f"parallel correlation, {km:g} km fibre delay", DEVICE,
                             InterferometerConfig.balanced(delta_t=dt), 1.5 * dt))
    dt = fibre_delay(1.0)
    for name, khz in FIG4_SHIFT_KHZ.items():
        add(ExperimentPreset(name, f"beat, shift {khz:g} kHz, 1 km fibre delay", DEVICE,
                             InterferometerConfig.balanced(delta_t=dt, omega=2 * math.pi * khz * 1e3),
                             2 * dt))
    # driving laser: Poissonian, same interferometer as fig4a
    add(ExperimentPreset("fig4f", "driving laser, shift 48 kHz", DEVICE.replace(g2_zero=1.0),
                         InterferometerConfig.balanced(delta_t=dt, omega=2 * math.pi * 48e3), 2 * dt))

    desk_dt = 0.5e-6
    add(ExperimentPreset("desk_parallel", "scaled Monte-Carlo run, no shift", DESK,
                         InterferometerConfig.balanced(delta_t=desk_dt), 2e-6))
    add(ExperimentPreset("desk_beat", "scaled Monte-Carlo run, Omega*dt = 2 pi", DESK,
                         InterferometerConfig.balanced(delta_t=desk_dt, omega=2 * math.pi / desk_dt), 2e-6))
    return out


PRESETS: Dict[str, ExperimentPreset] = _build()


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
