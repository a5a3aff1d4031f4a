import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from mejpa.design import DesignConfig, PumpParams
from mejpa.errors import DomainError, InvariantError, ThresholdError, UnreachableTargetError
from mejpa.junction_lab import SquidParams, pump_modulation_coefficients
from mejpa.network import EnvironmentModel, LineSection
from mejpa.pump_gain import (
    SidebandPair,
    center_gain_db,
    critical_pump_depth,
    gain_profile,
    loaded_resonance,
    max_pump_depth,
    pump_operating_point,
    reflection_gain,
    retune,
    sideband_denominator,
    unpumped_linewidth,
)

from oracles import two_by_two_gain


@pytest.fixture(scope="module")
def t20(table1):
    return retune(table1, 20.0)


def test_sideband_pair_invariants():
    p = SidebandPair.from_signal(6e9, 13e9)
    assert p.omega_s + p.omega_i == pytest.approx(2 * np.pi * 13e9, rel=1e-15)
    with pytest.raises(DomainError):
        SidebandPair.from_signal(14e9, 13e9)


def test_pump_params_invariants():
    with pytest.raises(InvariantError, match="PumpParams"):
        PumpParams(13e9, 0.1)
    with pytest.raises(InvariantError):
        PumpParams(0.0)


def test_denominator_degenerate_limit():
    squid = SquidParams(1e-30, 1e-30)
    mods = pump_modulation_coefficients(squid, 0.0)
    w = 2 * np.pi * 5e9
    env = EnvironmentModel(50.0)
    d = sideband_denominator(w, squid, mods, env)
    # C and Gamma0 are negligible against i w / 50 here
    assert d == pytest.approx(1j * w / 50.0, rel=1e-6)


def test_denominator_resonance_matches_lc_oracle(table1):
    squid = table1.squid
    mods = pump_modulation_coefficients(squid, 0.0)
    env = EnvironmentModel(50.0)
    w0 = np.sqrt(mods.gamma0 / squid.c_total)
    root = brentq(lambda w: sideband_denominator(w, squid, mods, env).real, 0.8 * w0, 1.2 * w0)
    assert root == pytest.approx(w0, rel=1e-12)


def test_denominator_continuous_on_fine_grid(table1):
    mods = pump_modulation_coefficients(table1.squid, 0.0)
    f = np.arange(6.0e9, 6.0e9 + 2e6, 1e3)
    d = sideband_denominator(2 * np.pi * f, table1.squid, mods, table1.transformer)
    assert np.max(np.abs(np.diff(d))) < 1e-3 * np.min(np.abs(d))


def test_pump_off_unit_reflection(table1):
    pair = SidebandPair.from_signal(np.linspace(4e9, 9e9, 501), table1.pump.f_pump)
    g_s, g_i = reflection_gain(pair, table1.squid, table1.pump, table1.transformer)
    assert np.max(np.abs(np.abs(g_s) - 1)) < 1e-12
    assert np.all(g_i == 0)


def test_closed_form_matches_two_by_two_solve(t20):
    for f in np.linspace(5.8e9, 7.2e9, 29):
        pair = SidebandPair.from_signal(f, t20.pump.f_pump)
        g_s, g_i = reflection_gain(pair, t20.squid, t20.pump, t20.transformer)
        o_s, o_i = two_by_two_gain(f, t20.squid, t20.pump, t20.transformer, t20.constants)
        assert abs(g_s - o_s) <= 1e-10 * abs(o_s)
        assert abs(g_i - o_i) <= 1e-10 * abs(o_i)


def test_manley_rowe_on_table1(t20):
    pair = SidebandPair.from_signal(t20.frequencies(), t20.pump.f_pump)
    g_s, g_i = reflection_gain(pair, t20.squid, t20.pump, t20.transformer)
    lhs = (np.abs(g_s) ** 2 - 1) / pair.omega_s
    rhs = np.abs(g_i) ** 2 / pair.omega_i
    assert np.max(np.abs(lhs - rhs) / np.abs(lhs)) < 1e-9


def test_degenerate_point_is_maximum_for_flat_environment(control):
    c = retune(control, 20.0)
    prof = gain_profile(c)
    k = int(np.argmax(prof.gain_db))
    assert abs(prof.freqs[k] - c.f_center) <= np.diff(prof.freqs)[0]


def test_signal_idler_symmetry_constant_environment(control):
    c = retune(control, 15.0)
    d = np.linspace(1e6, 1.4e9, 300)
    up = gain_profile(c, c.f_center + d).gain_db
    dn = gain_profile(c, c.f_center - d).gain_db
    assert np.max(np.abs(up - dn)) < 1e-9


def test_threshold_error_names_critical_depth(table1):
    crit = critical_pump_depth(table1.squid, table1.transformer, table1.pump.f_pump)
    pump = PumpParams(table1.pump.f_pump, min(1.01 * crit, 0.0999))
    pair = SidebandPair.from_signal(6.5e9, pump.f_pump)
    with pytest.raises(ThresholdError) as info:
        reflection_gain(pair, table1.squid, pump, table1.transformer)
    assert info.value.critical_depth == pytest.approx(crit)
    assert f"{crit:.6g}" in str(info.value)


def test_below_threshold_band_is_finite(table1):
    crit = critical_pump_depth(table1.squid, table1.transformer, table1.pump.f_pump)
    cfg = table1.with_pump(PumpParams(table1.pump.f_pump, 0.999 * crit))
    prof = gain_profile(cfg)
    assert np.all(np.isfinite(prof.gain_db))
    assert prof.center_gain_db > 50


def test_gain_profile_pump_off(table1):
    prof = gain_profile(table1)
    assert np.max(np.abs(prof.gain_db)) < 1e-10
    assert prof.bw_at_threshold is None and prof.bw_3db is None and prof.ripple_db is None
    assert prof.gain_db == pytest.approx(20 * np.log10(np.abs(prof.g_complex)))


def test_gain_profile_rejects_grid_outside_pump(t20):
    with pytest.raises(DomainError):
        gain_profile(t20, np.array([1e9, 14e9]))


def test_table1_20db_bandwidth_and_control_ratio(t20, control):
    prof = gain_profile(t20)
    assert prof.center_gain_db == pytest.approx(20.0, abs=0.05)
    assert prof.bw_at_threshold >= 400e6
    ctl = gain_profile(retune(control, 20.0))
    assert prof.bw_at_threshold >= 3 * ctl.bw_at_threshold


def test_fit_coefficients_describe_the_top(t20):
    prof = gain_profile(t20)
    g_lin = 10 ** (prof.center_gain_db / 10)
    assert prof.g0 == pytest.approx(g_lin, rel=0.01)
    # the fit reproduces the profile inside its window
    w = np.linspace(-prof.fit_half_width, prof.fit_half_width, 7)
    model = prof.g0 + prof.g2 * w**2 + prof.g4 * w**4
    actual = 10 ** (gain_profile(t20, t20.f_center + w / (2 * np.pi)).gain_db / 10)
    assert np.max(np.abs(model - actual) / actual) < 0.01


def test_operating_point_round_trip(table1):
    pump = pump_operating_point(table1, 20.0, 6.36e9)
    assert pump.f_pump == pytest.approx(2 * 6.36e9)
    cfg = table1.with_pump(pump)
    assert gain_profile(cfg).center_gain_db == pytest.approx(20.0, abs=0.05)


def test_operating_point_zero_and_unreachable(table1):
    assert pump_operating_point(table1, 0.0).pump_depth == 0.0
    with pytest.raises(UnreachableTargetError) as info:
        pump_operating_point(table1, 60.0)
    assert 20 < info.value.max_gain_db < 60
    assert center_gain_db(table1, PumpParams(table1.pump.f_pump, max_pump_depth(table1))) == pytest.approx(
        info.value.max_gain_db)


@given(st.floats(0.0, 0.08), st.floats(0.0, 0.08), st.floats(5.8e9, 7.2e9))
def test_gain_monotone_in_pump_depth(table1, d1, d2, f):
    lo, hi = sorted((d1, d2))
    pair = SidebandPair.from_signal(f, table1.pump.f_pump)
    g_lo, _ = reflection_gain(pair, table1.squid, PumpParams(table1.pump.f_pump, lo), table1.transformer)
    g_hi, _ = reflection_gain(pair, table1.squid, PumpParams(table1.pump.f_pump, hi), table1.transformer)
    assert abs(g_hi) >= abs(g_lo) * (1 - 1e-12)


def test_control_linewidth_matches_rc(control):
    w_r, kappa = loaded_resonance(control)
    c = control.squid.c_total
    assert kappa == pytest.approx(1 / (50.0 * c), rel=0.02)
    big = DesignConfig(SquidParams(control.squid.i_c_total, 2 * c, 0.0, control.squid.flux_dc),
                       control.transformer, control.pump)
    assert unpumped_linewidth(big, w_r / (2 * np.pi) / np.sqrt(2)) < kappa


def test_matched_linewidth_exceeds_control(table1, control):
    assert unpumped_linewidth(table1) > unpumped_linewidth(control)


def test_linewidth_requires_resonance(control):
    with pytest.raises(Exception, match="resonance"):
        loaded_resonance(control, 1.0e9, window=0.2)


def test_ripple_segment_produces_ripple(t20):
    seg = LineSection(40.0, 1e9, 6 * np.pi)
    env = EnvironmentModel(50.0, t20.transformer.sections, ripple_segment=seg)
    base = gain_profile(t20)
    rippled = gain_profile(retune(t20.with_environment(env), 20.0))
    extrema = lambda g: np.sum(np.diff(np.sign(np.diff(g))) != 0)
    assert extrema(rippled.gain_db) > extrema(base.gain_db)
