import math

import pytest

from tpisim import config
from tpisim.config import Experiment, apply_overrides, load_config
from tpisim.errors import ValidationError
from tpisim.presets import PRESETS, get_preset


@pytest.mark.parametrize("text, seconds", [
    ("2.1 ns", 2.1e-9), ("115ps", 115e-12), ("10 us", 10e-6), ("10 µs", 10e-6),
    ("0.5ms", 0.5e-3), ("3", 3.0), ("1 km", 5e-6), ("8km", 40e-6), ("1e-9 s", 1e-9),
])
def test_parse_time(text, seconds):
    assert config.parse_time(text) == pytest.approx(seconds, rel=1e-12)


@pytest.mark.parametrize("text", ["ten ns", "5 parsecs", ""])
def test_parse_time_rejects(text):
    with pytest.raises(ValidationError):
        config.parse_time(text)


def test_parse_frequency_and_lists():
    assert config.parse_frequency("101.6 kHz") == pytest.approx(101.6e3)
    assert config.parse_frequency("4.7GHz") == pytest.approx(4.7e9)
    assert config.parse_list("0.6us, 5us,10 us", config.parse_time) == pytest.approx([0.6e-6, 5e-6, 10e-6])
    with pytest.raises(ValidationError):
        config.parse_number("3 ns")


def test_load_config(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("""
[source]
g2_zero = 0.05
tau_coh = 20 us   # lower bound
[interferometer]
delta_t = 1 km
shift = 48 kHz
r_b = 0.4
[classify]
delays = 0.6us, 5us
""")
    exp = load_config(path)
    assert exp.source.g2_zero == 0.05
    assert exp.source.tau_coh == pytest.approx(20e-6)
    assert exp.interferometer.delta_t == pytest.approx(5e-6)
    assert exp.interferometer.omega == pytest.approx(2 * math.pi * 48e3)
    assert exp.interferometer.t_b == pytest.approx(0.6)
    assert exp.delays == pytest.approx([0.6e-6, 5e-6])


def test_unknown_section_and_key(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text("[sauce]\nx = 1\n")
    with pytest.raises(ValidationError):
        load_config(path)
    path.write_text("[source]\ncolour = blue\n")
    with pytest.raises(ValidationError):
        load_config(path)


def test_overrides_layer_on_presets():
    exp = apply_overrides(get_preset("fig2e").experiment(), ["interferometer.v0=0", "source.g2_zero=0.1"])
    assert exp.interferometer.v0 == 0.0
    assert exp.source.g2_zero == 0.1
    assert exp.interferometer.delta_t == pytest.approx(2.1e-9)
    with pytest.raises(ValidationError):
        apply_overrides(Experiment(), ["v0=0"])
    with pytest.raises(ValidationError):
        apply_overrides(Experiment(), ["interferometer.shift=1kHz", "interferometer.omega=5"])


def test_override_validation_propagates():
    with pytest.raises(ValidationError):
        apply_overrides(Experiment(), ["interferometer.v0=1.5"])


def test_presets_build_and_carry_expected_delays():
    assert {"fig2d", "fig2e", "fig2f", "fig3a", "fig3d", "fig4a", "fig4e", "fig4f",
            "desk_parallel", "desk_beat"} <= set(PRESETS)
    assert get_preset("fig3d").interferometer.delta_t == pytest.approx(40e-6)
    assert get_preset("fig4d").interferometer.shift_hz == pytest.approx(194.7e3)
    beat = get_preset("desk_beat").interferometer
    assert beat.omega * beat.delta_t == pytest.approx(2 * math.pi)
    with pytest.raises(ValidationError):
        get_preset("fig9z")
