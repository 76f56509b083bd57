import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpisim import analytic
from tpisim.analytic import FeatureKind, SideLocation
from tpisim.errors import DegenerateDenominatorError, UndefinedThresholdError, ValidationError
from tpisim.model import InterferometerConfig, PolarizationMode, SourceModel

G0 = 0.03
TAU_CORR = 115e-12
# tau_corr << dt << tau_coh by many orders, so the limit values hold to ~1e-9
LIMIT_MODEL = SourceModel(g2_zero=G0, tau_corr=TAU_CORR, tau_coh=1e3)
LIMIT_DT = 100e-9
LIMIT_CFG = InterferometerConfig.balanced(delta_t=LIMIT_DT)
DEVICE = SourceModel(g2_zero=G0, tau_corr=TAU_CORR, tau_coh=10e-6)

# hand evaluation of the balanced-splitter coefficients: (R_A^2+T_A^2) R_B T_B = 0.125,
# R_A T_A R_B^2 = R_A T_A T_B^2 = 0.0625, N = 0.25, interference prefactor 2 R_A T_A R_B T_B = 0.125
HAND_CROSS_0 = (0.125 * G0 + 0.0625 + 0.0625) / 0.25
HAND_CROSS_DT = (0.125 + 0.0625 + 0.0625 * G0) / 0.25
HAND_PAR_0 = (0.125 * G0 + 0.0625 + 0.0625 - 0.125) / 0.25
HAND_PAR_DT = (0.125 + 0.0625 + 0.0625 * G0 - 0.125 * math.sqrt(G0)) / 0.25


def cfg_strategy():
    return st.builds(
        InterferometerConfig.balanced,
        delta_t=st.floats(0, 5e-6),
        omega=st.floats(0, 1e8),
        v0=st.floats(0, 1),
        r_a=st.floats(0.01, 0.99),
        r_b=st.floats(0.01, 0.99),
    )


def model_strategy():
    return st.builds(SourceModel, g2_zero=st.floats(0, 2), tau_corr=st.floats(1e-11, 1e-8),
                     tau_coh=st.floats(1e-6, 1e-4))


def test_normalization_balanced():
    assert analytic.normalization(LIMIT_CFG) == pytest.approx(0.25, abs=1e-15)


def test_normalization_degenerate_input_splitter():
    cfg = InterferometerConfig(r_a=1.0, t_a=0.0, r_b=0.3, t_b=0.7)
    assert analytic.normalization(cfg) == pytest.approx(0.3 * 0.7)


def test_normalization_zero_rejected():
    with pytest.raises(ValidationError):
        analytic.normalization(InterferometerConfig(r_a=1.0, t_a=0.0, r_b=1.0, t_b=0.0))


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_normalization_symmetric_under_splitter_swap(ra, rb):
    a = InterferometerConfig.balanced(r_a=ra, r_b=rb)
    b = InterferometerConfig.balanced(r_a=rb, r_b=ra)
    assert analytic.normalization(a) == pytest.approx(analytic.normalization(b), rel=1e-12)


def test_cross_point_values():
    assert analytic.g2_cross(LIMIT_CFG, LIMIT_MODEL, 0.0) == pytest.approx(HAND_CROSS_0, abs=1e-9)
    assert HAND_CROSS_0 == pytest.approx(0.515)
    for tau in (LIMIT_DT, -LIMIT_DT):
        assert analytic.g2_cross(LIMIT_CFG, LIMIT_MODEL, tau) == pytest.approx(HAND_CROSS_DT, abs=1e-9)
    assert HAND_CROSS_DT == pytest.approx(0.7575)


def test_cross_dip_depths_for_ideal_source():
    ideal = LIMIT_MODEL.replace(g2_zero=0.0)
    centre = analytic.g2_cross(LIMIT_CFG, ideal, 0.0)
    side = analytic.g2_cross(LIMIT_CFG, ideal, LIMIT_DT)
    far = analytic.g2_cross(LIMIT_CFG, ideal, LIMIT_DT / 2)
    assert far - centre == pytest.approx(0.5, abs=1e-9)
    assert far - side == pytest.approx(0.25, abs=1e-9)


def test_cross_tends_to_one():
    assert analytic.g2_cross(LIMIT_CFG, LIMIT_MODEL, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_parallel_point_values():
    assert analytic.g2_parallel(LIMIT_CFG, LIMIT_MODEL, 0.0) == pytest.approx(HAND_PAR_0, abs=1e-9)
    assert HAND_PAR_0 == pytest.approx(0.015)
    assert analytic.g2_parallel(LIMIT_CFG, LIMIT_MODEL, LIMIT_DT / 2) == pytest.approx(0.5, abs=1e-9)
    assert analytic.g2_parallel(LIMIT_CFG, LIMIT_MODEL, LIMIT_DT) == pytest.approx(HAND_PAR_DT, abs=1e-9)
    assert HAND_PAR_DT == pytest.approx(0.671, abs=5e-4)
    assert HAND_PAR_DT > 0.5


def test_parallel_coherence_loss_limit():
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9)
    assert analytic.g2_parallel(cfg, DEVICE, 1e-3) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200)
@given(cfg_strategy(), model_strategy(), st.floats(-2e-5, 2e-5))
def test_grouped_form_matches(cfg, model, tau):
    a = analytic.g2_parallel(cfg, model, tau)
    b = analytic.g2_parallel_grouped(cfg, model, tau)
    assert a == pytest.approx(max(b, 0.0), abs=1e-12)


@settings(max_examples=300)
@given(cfg_strategy(), model_strategy(), st.floats(-2e-5, 2e-5))
def test_parallel_never_negative(cfg, model, tau):
    # the grouped form is not clamped, so it exposes any genuine negativity
    assert analytic.g2_parallel_grouped(cfg, model, tau) >= -1e-12


@settings(max_examples=200)
@given(cfg_strategy(), model_strategy(), st.floats(-2e-5, 2e-5))
def test_parallel_below_cross_when_cos_positive(cfg, model, tau):
    if math.cos(cfg.omega * tau) >= 0:
        assert analytic.g2_parallel(cfg, model, tau) <= analytic.g2_cross(cfg, model, tau) + 1e-12


@given(cfg_strategy(), model_strategy(), st.floats(-2e-5, 2e-5))
def test_no_overlap_means_no_interference(cfg, model, tau):
    cfg = cfg.replace(v0=0.0, omega=0.0)
    assert abs(analytic.g2_parallel(cfg, model, tau) - analytic.g2_cross(cfg, model, tau)) <= 1e-12


@given(st.floats(0, 5e-6), model_strategy(), st.floats(0, 1), st.floats(-2e-5, 2e-5))
def test_even_symmetry_for_balanced_splitters(dt, model, v0, tau):
    cfg = InterferometerConfig.balanced(delta_t=dt, v0=v0)
    for mode in PolarizationMode:
        assert analytic.g2(cfg, model, mode, tau) == pytest.approx(analytic.g2(cfg, model, mode, -tau), abs=1e-12)


def test_unbalanced_output_splitter_breaks_side_symmetry():
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9, r_b=0.45)
    plus = analytic.g2_parallel(cfg, DEVICE, 2.1e-9)
    minus = analytic.g2_parallel(cfg, DEVICE, -2.1e-9)
    assert abs(plus - minus) > 1e-3


def test_vectorized_matches_scalar():
    taus = np.linspace(-5e-9, 5e-9, 11)
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9, omega=1e9)
    vec = analytic.g2_parallel(cfg, DEVICE, taus)
    assert np.allclose(vec, [analytic.g2_parallel(cfg, DEVICE, t) for t in taus], rtol=0, atol=0)


def test_visibility_measured_value():
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9, v0=0.971)
    assert analytic.visibility(cfg, DEVICE, 0.0) == pytest.approx(0.943, abs=1e-3)


def test_visibility_background_and_coherence_loss():
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9)
    assert analytic.visibility(cfg, DEVICE, 1.05e-9) == pytest.approx(0.5, abs=1e-3)
    assert analytic.visibility(cfg, DEVICE, 1e-3) == pytest.approx(0.0, abs=1e-12)


def test_visibility_degenerate():
    cfg = InterferometerConfig.balanced(delta_t=0.0)
    with pytest.raises(DegenerateDenominatorError):
        analytic.visibility(cfg, DEVICE.replace(g2_zero=0.0), 0.0)


@pytest.mark.parametrize("g0, factor", [(0.0, 1.0), (1.0, 0.5), (2.0, 1 / 3)])
def test_visibility_zero_special_cases(g0, factor):
    cfg = LIMIT_CFG.replace(v0=0.83)
    assert analytic.visibility_zero(cfg, LIMIT_MODEL.replace(g2_zero=g0)) == pytest.approx(0.83 * factor, abs=1e-12)


@given(st.floats(0, 2), st.floats(0, 1))
def test_visibility_zero_matches_numeric(g0, v0):
    cfg = LIMIT_CFG.replace(v0=v0)
    model = LIMIT_MODEL.replace(g2_zero=g0)
    assert analytic.visibility_zero(cfg, model) == pytest.approx(
        float(analytic.visibility(cfg, model, 0.0)), abs=1e-9)


def test_visibility_zero_requires_balanced():
    with pytest.raises(ValidationError):
        analytic.visibility_zero(InterferometerConfig.balanced(r_b=0.4), DEVICE)


def test_side_threshold_balanced():
    thr = analytic.side_threshold(InterferometerConfig.balanced(), DEVICE, "+")
    assert thr / DEVICE.tau_coh == pytest.approx(0.5 * math.log(1 / G0), rel=1e-12)
    assert round(thr / DEVICE.tau_coh, 2) == 1.75
    # threshold in fibre length at 5 us per km
    assert thr / 5e-6 == pytest.approx(3.5, abs=0.01)


def test_side_threshold_asymmetric_locations():
    cfg = InterferometerConfig.balanced(r_b=0.6)
    plus = analytic.side_threshold(cfg, DEVICE, SideLocation.PLUS)
    minus = analytic.side_threshold(cfg, DEVICE, SideLocation.MINUS)
    assert plus == pytest.approx(0.5 * DEVICE.tau_coh * math.log(0.6 / (0.4 * G0)))
    assert minus == pytest.approx(0.5 * DEVICE.tau_coh * math.log(0.4 / (0.6 * G0)))


def test_side_threshold_boundary_is_zero():
    cfg = InterferometerConfig.balanced(r_b=0.4, v0=0.9)
    model = DEVICE.replace(g2_zero=0.9 * 0.4 / 0.6)
    assert analytic.side_threshold(cfg, model, "+") == pytest.approx(0.0, abs=1e-18)


def test_side_threshold_errors():
    with pytest.raises(UndefinedThresholdError):
        analytic.side_threshold(InterferometerConfig.balanced(v0=0.5), DEVICE.replace(g2_zero=0.9), "+")
    with pytest.raises(ValidationError):
        analytic.side_threshold(InterferometerConfig.balanced(omega=1.0), DEVICE, "+")
    with pytest.raises(ValidationError):
        analytic.side_threshold(InterferometerConfig.balanced(), DEVICE.replace(g2_zero=0.0), "+")


def test_exact_threshold_value():
    thr = analytic.exact_side_threshold(InterferometerConfig.balanced(), DEVICE, "+")
    assert thr == pytest.approx(0.5 * DEVICE.tau_coh * math.log(2 / (1 + math.sqrt(G0))), rel=1e-12)


def test_tau_coh_for_boundary_inverts_threshold():
    cfg = InterferometerConfig.balanced(delta_t=25e-6)
    tc = analytic.tau_coh_for_boundary(cfg, DEVICE, "+")
    assert analytic.exact_side_threshold(cfg, DEVICE.replace(tau_coh=tc), "+") == pytest.approx(25e-6)


def _kind(cfg, model, loc="+"):
    return analytic.classify_side_feature(cfg, model, loc).kind


def test_classify_short_and_long_delays():
    assert _kind(InterferometerConfig.balanced(delta_t=0.6e-6), DEVICE) is FeatureKind.PEAK
    assert _kind(InterferometerConfig.balanced(delta_t=40e-6), DEVICE) is FeatureKind.DIP
    assert _kind(InterferometerConfig.balanced(delta_t=40e-6), DEVICE, "-") is FeatureKind.DIP


def test_classify_between_thresholds_is_a_dip():
    # the sign argument on the grouped form predicts a peak for dt < 1.75 tau_coh,
    # but the local contrast turns negative already beyond 0.267 tau_coh
    cfg = InterferometerConfig.balanced(delta_t=10e-6)
    assert cfg.delta_t < analytic.side_threshold(cfg, DEVICE, "+")
    assert cfg.delta_t > analytic.exact_side_threshold(cfg, DEVICE, "+")
    assert _kind(cfg, DEVICE) is FeatureKind.DIP


@pytest.mark.parametrize("dt", [0.6e-6, 5e-6])
def test_classify_quadrature_shift_always_dips(dt):
    long_coherence = DEVICE.replace(tau_coh=1.0)
    omega = (math.pi / 2) / dt
    cfg = InterferometerConfig.balanced(delta_t=dt, omega=omega)
    assert math.cos(omega * dt) == pytest.approx(0.0, abs=1e-12)
    assert _kind(cfg, long_coherence, "+") is FeatureKind.DIP
    assert _kind(cfg, long_coherence, "-") is FeatureKind.DIP


def test_classify_flat_within_epsilon():
    feat = analytic.classify_side_feature(InterferometerConfig.balanced(delta_t=5e-6), DEVICE, "+", epsilon=1.0)
    assert feat.kind is FeatureKind.FLAT
    assert abs(feat.contrast) <= 1.0
    with pytest.raises(ValidationError):
        analytic.classify_side_feature(InterferometerConfig.balanced(delta_t=5e-6), DEVICE, "+", epsilon=0.0)


# coherence time that puts the exact peak/dip boundary at 5 km (25 us) of fibre
CALIBRATED = DEVICE.replace(tau_coh=2 * 25e-6 / math.log(2 / (1 + math.sqrt(G0))))


@pytest.mark.parametrize("km, kind", [(0.12, "peak"), (1, "peak"), (2, "peak"), (8, "dip")])
def test_fibre_length_pattern_at_calibrated_coherence(km, kind):
    cfg = InterferometerConfig.balanced(delta_t=km * 5e-6)
    assert _kind(cfg, CALIBRATED, "+").value == kind
    assert _kind(cfg, CALIBRATED, "-").value == kind


@pytest.mark.parametrize("khz, kind", [(48.0, "dip"), (101.6, "dip"), (147.1, "dip"), (194.7, "peak"), (246.0, "dip")])
def test_frequency_shift_pattern_at_calibrated_coherence(khz, kind):
    cfg = InterferometerConfig.balanced(delta_t=5e-6, omega=2 * math.pi * khz * 1e3)
    assert _kind(cfg, CALIBRATED, "+").value == kind


def test_classify_agrees_with_exact_threshold_randomized():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(1000):
        tau_coh = 10 ** rng.uniform(-7, -4)
        model = SourceModel(g2_zero=rng.uniform(0.001, 0.5), tau_corr=TAU_CORR, tau_coh=tau_coh)
        dt = rng.uniform(100 * TAU_CORR, 3 * tau_coh)
        cfg = InterferometerConfig.balanced(delta_t=dt, r_b=rng.uniform(0.2, 0.8))
        loc = SideLocation.PLUS if rng.random() < 0.5 else SideLocation.MINUS
        feat = analytic.classify_side_feature(cfg, model, loc, epsilon=1e-6)
        try:
            thr = analytic.exact_side_threshold(cfg, model, loc)
        except UndefinedThresholdError:
            thr = 0.0
        if abs(dt - thr) < 1e-3 * tau_coh:
            continue
        expected = FeatureKind.PEAK if dt < thr else FeatureKind.DIP
        assert feat.kind is expected, (dt, thr, feat)
        checked += 1
    assert checked > 950


BEAT_CFG = InterferometerConfig.balanced(delta_t=2.1e-9, omega=2 * math.pi * 100e6)
BEAT_WINDOW = (10e-9, 30e-9)


def test_beat_visibility_full_overlap():
    assert analytic.beat_visibility(BEAT_CFG, DEVICE, BEAT_WINDOW) == pytest.approx(0.5, rel=0.01)


def test_beat_visibility_no_overlap():
    assert analytic.beat_visibility(BEAT_CFG.replace(v0=0.0), DEVICE, BEAT_WINDOW) == pytest.approx(0.0, abs=1e-12)


def test_beat_visibility_measured_overlap():
    # (max - min)/(max + min) of 1 - (V0/2) cos(omega tau) is V0/2
    assert analytic.beat_visibility(BEAT_CFG.replace(v0=0.971), DEVICE, BEAT_WINDOW) == pytest.approx(
        0.971 / 2, rel=0.01)


@pytest.mark.parametrize("cfg, window", [
    (BEAT_CFG.replace(omega=0.0), BEAT_WINDOW),
    (BEAT_CFG, (10e-9, 15e-9)),
    (BEAT_CFG, (-5e-9, 30e-9)),
    (BEAT_CFG, (1e-9, 30e-9)),
    (BEAT_CFG, (10e-9, 2e-6)),
])
def test_beat_visibility_preconditions(cfg, window):
    with pytest.raises(ValidationError):
        analytic.beat_visibility(cfg, DEVICE, window)


def test_sample_series_singleton_and_empty():
    s = analytic.sample_series(LIMIT_CFG, LIMIT_MODEL, "cross", [0.0])
    assert s.values.tolist() == [pytest.approx(0.515, abs=1e-9)]
    assert s.mode is PolarizationMode.CROSS
    empty = analytic.sample_series(LIMIT_CFG, LIMIT_MODEL, "parallel", [])
    assert len(empty) == 0


def test_sample_series_matches_pointwise():
    cfg = InterferometerConfig.balanced(delta_t=2.1e-9)
    grid = analytic.feature_grid(cfg.delta_t, DEVICE.tau_corr, 4e-9)
    s = analytic.sample_series(cfg, DEVICE, PolarizationMode.PARALLEL, grid)
    assert np.all(np.diff(s.taus) > 0)
    idx = np.searchsorted(grid, 0.0)
    assert grid[idx] == 0.0
    assert s.values[idx] == pytest.approx(0.015, abs=1e-6)


def test_sample_series_rejects_unsorted_grid():
    with pytest.raises(ValidationError):
        analytic.sample_series(LIMIT_CFG, LIMIT_MODEL, "cross", [1e-9, 0.0])
