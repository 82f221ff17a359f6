from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repeaterchain.errors import ConfigError, NonTerminatingProcess, UnreachableConfiguration
from repeaterchain.model import (
    AttemptDistribution,
    ChainConfig,
    ChannelParams,
    HardwareParams,
    combined_attempt_dist,
    ec_prob,
    ec_prob_single_mode,
    expected_max_attempts,
    expected_max_attempts_closed_form,
    memory_time_std,
    metrics,
    single_link_attempt_dist,
)

DEFAULT_HW = HardwareParams()
DEFAULT_CH = ChannelParams()


def unit_clock_setup(p1m: float, n: int) -> tuple[HardwareParams, ChainConfig, ChannelParams]:
    """Lossless fiber with 1 km/s signal speed and 1 km links, so the clock
    interval is exactly 1 s and the single-mode EC probability is ``p1m``."""
    hw = HardwareParams(detector_eff=1.0, memory_eff=1.0,
                        emission_prob=math.sqrt(2.0 * p1m), mode_count=1)
    return hw, ChainConfig(total_length=float(n), link_count=n), ChannelParams(
        attenuation=0.0, signal_speed=1.0)


# ---------------------------------------------------------------- parameter types

def test_defaults_match_reference_assumptions():
    assert DEFAULT_HW.detector_eff == DEFAULT_HW.memory_eff == DEFAULT_HW.emission_prob == 0.9
    assert DEFAULT_HW.mode_count == 100
    assert DEFAULT_CH.attenuation == 0.2
    assert DEFAULT_CH.signal_speed == 2.0e5


@pytest.mark.parametrize("kwargs", [
    {"detector_eff": 1.3},
    {"memory_eff": -0.1},
    {"emission_prob": 1.0001},
    {"mode_count": 0},
    {"mode_count": 2.5},
])
def test_hardware_params_rejects_out_of_range(kwargs):
    with pytest.raises(ConfigError):
        HardwareParams(**kwargs)


def test_channel_params_rejects_out_of_range():
    with pytest.raises(ConfigError):
        ChannelParams(attenuation=-0.1)
    with pytest.raises(ConfigError):
        ChannelParams(signal_speed=0.0)


def test_chain_config_derives_link_length():
    chain = ChainConfig(total_length=1600.0, link_count=8)
    assert chain.link_length == 200.0
    with pytest.raises(ConfigError):
        ChainConfig(total_length=1600.0, link_count=8, link_length=150.0)
    with pytest.raises(ConfigError):
        ChainConfig(total_length=0.0, link_count=1)
    with pytest.raises(ConfigError):
        ChainConfig(total_length=100.0, link_count=0)


# ---------------------------------------------------------------- EC probability

def test_single_mode_zero_loss_limit():
    hw = HardwareParams(detector_eff=1.0, emission_prob=1.0)
    ch = ChannelParams(attenuation=0.0)
    assert ec_prob_single_mode(hw, ChainConfig(total_length=100.0, link_count=1), ch) == 0.5


def test_single_mode_reference_point():
    # eta_d = rho = 0.9, 125 km link, 0.2 dB/km; frozen from a 40-digit evaluation
    p1m = ec_prob_single_mode(DEFAULT_HW, ChainConfig(total_length=125.0, link_count=1), DEFAULT_CH)
    assert p1m == pytest.approx(1.0373851864182368e-3, rel=1e-12)


def test_single_mode_no_emission():
    hw = HardwareParams(emission_prob=0.0)
    assert ec_prob_single_mode(hw, ChainConfig(total_length=125.0, link_count=1), DEFAULT_CH) == 0.0
    assert ec_prob(hw, ChainConfig(total_length=125.0, link_count=1), DEFAULT_CH) == 0.0


def test_multimode_reduces_to_single_mode_at_m_1():
    hw = HardwareParams(mode_count=1)
    chain = ChainConfig(total_length=125.0, link_count=1)
    assert ec_prob(hw, chain, DEFAULT_CH) == pytest.approx(
        ec_prob_single_mode(hw, chain, DEFAULT_CH), rel=1e-15)


def test_multimode_reference_point():
    p = ec_prob(DEFAULT_HW, ChainConfig(total_length=125.0, link_count=1), DEFAULT_CH)
    assert p == pytest.approx(0.09858755659173564, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    length=st.floats(min_value=1.0, max_value=2000.0),
    mode_count=st.integers(min_value=1, max_value=500),
    rho=st.floats(min_value=0.01, max_value=0.99),
    eta_d=st.floats(min_value=0.01, max_value=0.99),
)
def test_ec_prob_monotonicity(length, mode_count, rho, eta_d):
    def p(L=length, m=mode_count, r=rho, e=eta_d):
        hw = HardwareParams(detector_eff=e, emission_prob=r, mode_count=m)
        return ec_prob(hw, ChainConfig(total_length=L, link_count=1), DEFAULT_CH)

    base = p()
    assert p(m=mode_count + 1) >= base
    assert p(r=min(rho * 1.1, 1.0)) >= base
    assert p(e=min(eta_d * 1.1, 1.0)) >= base
    assert p(L=length * 1.1) <= base


# ---------------------------------------------------------------- attempt distributions

def test_single_link_dist_certain_success():
    dist = single_link_attempt_dist(1.0)
    assert dist.probs.tolist() == [1.0]
    assert dist.tail_mass == 0.0


def test_single_link_dist_geometric_halving():
    dist = single_link_attempt_dist(0.5)
    assert dist.probs[:3] == pytest.approx([0.5, 0.25, 0.125], rel=1e-14)


def test_single_link_dist_expectation():
    dist = single_link_attempt_dist(0.1, tol=1e-12)
    assert abs(dist.expectation() - 10.0) < 1e-9


def test_single_link_dist_rejects_zero_probability():
    with pytest.raises(NonTerminatingProcess):
        single_link_attempt_dist(0.0)


def test_combined_dist_reduces_to_single_link():
    single = single_link_attempt_dist(0.37)
    combined = combined_attempt_dist(0.37, 1)
    assert combined.probs.size == single.probs.size
    np.testing.assert_allclose(combined.probs, single.probs, rtol=1e-12, atol=1e-12)


def test_combined_dist_two_links_hand_values():
    # Two fair-coin links: P(max = 1) = (1/2)^2, P(max = 2) = (3/4)^2 - (1/2)^2.
    dist = combined_attempt_dist(0.5, 2)
    assert dist.probs[0] == pytest.approx(0.25, rel=1e-14)
    assert dist.probs[1] == pytest.approx(0.3125, rel=1e-14)
    assert dist.probs[2] == pytest.approx(0.203125, rel=1e-14)


def test_combined_dist_certain_success_any_n():
    for n in (1, 3, 17):
        dist = combined_attempt_dist(1.0, n)
        assert dist.probs.tolist() == [1.0]


@settings(max_examples=80, deadline=None)
@given(
    p=st.floats(min_value=1e-3, max_value=1.0),
    n=st.integers(min_value=1, max_value=64),
)
def test_combined_dist_normalization(p, n):
    dist = combined_attempt_dist(p, n)
    total = float(dist.probs.sum()) + dist.tail_mass
    assert abs(total - 1.0) < 1e-10
    assert dist.tail_mass <= 1e-12 + 1e-15


def test_attempt_distribution_validates_normalization():
    with pytest.raises(Exception):
        AttemptDistribution(probs=np.array([0.5, 0.2]), tail_mass=0.0)


# ---------------------------------------------------------------- expected max attempts

def test_expected_attempts_single_link_is_inverse_probability():
    for p in (1.0, 0.5, 0.1, 1e-3):
        assert expected_max_attempts(p, 1) == pytest.approx(1.0 / p, rel=1e-11)


def test_expected_attempts_two_links_fair_coin():
    assert expected_max_attempts(0.5, 2) == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_expected_attempts_certain_success():
    for n in (1, 7, 40):
        assert expected_max_attempts(1.0, n) == 1.0


def test_expected_attempts_rejects_zero_probability():
    with pytest.raises(NonTerminatingProcess):
        expected_max_attempts(0.0, 4)


def test_expected_attempts_matches_closed_form_small_n():
    for p in np.geomspace(1e-3, 1.0, 12):
        for n in range(1, 21):
            series = expected_max_attempts(float(p), n)
            closed = expected_max_attempts_closed_form(float(p), n)
            assert series == pytest.approx(closed, rel=1e-8)


@settings(max_examples=60, deadline=None)
@given(
    p=st.floats(min_value=1e-3, max_value=1.0),
    n=st.integers(min_value=1, max_value=32),
)
def test_expected_attempts_monotone(p, n):
    base = expected_max_attempts(p, n)
    assert expected_max_attempts(p, n + 1) >= base * (1.0 - 1e-12)
    smaller_p = p * 0.9
    if smaller_p > 0.0:
        assert expected_max_attempts(smaller_p, n) >= base * (1.0 - 1e-12)


def test_slowdown_factor_grows_slowly():
    # Doubling the link count never doubles the slowdown factor f(n, p).
    for p in (1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.9, 1.0):
        for n in (1, 2, 4, 8, 16, 32):
            f_n = p * expected_max_attempts(p, n)
            f_2n = p * expected_max_attempts(p, 2 * n)
            assert 1.0 - 1e-12 <= f_n and f_2n / f_n <= 2.0 + 1e-12


def test_expected_attempts_tiny_probability_route():
    # So small that the series is impractical; exact 1/p must still come out.
    assert expected_max_attempts(1e-12, 1) == pytest.approx(1e12, rel=1e-10)
    # and the multi-link value stays above the single-link one
    assert expected_max_attempts(1e-12, 8) > 1e12


# ---------------------------------------------------------------- chain metrics

def test_metrics_reference_point_1600km_8_links():
    # Frozen from a 40-digit evaluation of the closed forms.
    m = metrics(DEFAULT_HW, ChainConfig(total_length=1600.0, link_count=8), DEFAULT_CH)
    assert m.ec_prob == pytest.approx(3.2751786723447968e-3, rel=1e-12)
    assert m.expected_attempts == pytest.approx(828.9750992109782, rel=1e-10)
    assert m.t_ec == pytest.approx(0.8289750992109782, rel=1e-10)
    assert m.t_cc == 0.008
    assert m.p_es == pytest.approx(4.088653383026254e-4, rel=1e-12)
    assert m.t_tot == pytest.approx(3120.0546790554133, rel=1e-10)
    assert m.mem_time_avg == pytest.approx(0.8369750992109782, rel=1e-10)
    assert m.mem_time_std == pytest.approx(0.3767319816329104, rel=1e-8)


def test_metrics_identities():
    m = metrics(DEFAULT_HW, ChainConfig(total_length=1000.0, link_count=5), DEFAULT_CH)
    assert m.mem_time_avg == m.t_ec + m.t_cc  # same code path, exact
    assert m.t_tot >= m.t_ec + m.t_cc
    assert 0.0 < m.p_es <= 1.0


def test_metrics_single_link_perfect_retrieval():
    # One link, perfect memories and detectors: t_tot = (L/c) * (1/p + 1).
    hw, chain, ch = unit_clock_setup(0.3, 1)
    m = metrics(hw, chain, ch)
    assert m.t_tot == pytest.approx((1.0 / 0.3 + 1.0), rel=1e-10)
    assert m.p_es == 1.0


def test_metrics_errors():
    with pytest.raises(NonTerminatingProcess):
        metrics(HardwareParams(emission_prob=0.0),
                ChainConfig(total_length=100.0, link_count=1), DEFAULT_CH)
    with pytest.raises(UnreachableConfiguration):
        metrics(HardwareParams(memory_eff=0.0),
                ChainConfig(total_length=100.0, link_count=2), DEFAULT_CH)


# ---------------------------------------------------------------- memory time spread

def test_memory_std_zero_at_certain_success():
    hw = HardwareParams(detector_eff=1.0, emission_prob=1.0, mode_count=10000)
    ch = ChannelParams(attenuation=0.0)
    chain = ChainConfig(total_length=100.0, link_count=4)
    assert ec_prob(hw, chain, ch) == 1.0
    assert memory_time_std(hw, chain, ch) == 0.0


def test_memory_std_single_link_geometric():
    # Unit clock, p = 1/2: std of a geometric is sqrt(1 - p) / p = sqrt(2).
    hw, chain, ch = unit_clock_setup(0.5, 1)
    assert memory_time_std(hw, chain, ch) == pytest.approx(math.sqrt(2.0), rel=1e-8)


def test_memory_std_two_links_brute_force_value():
    # Frozen brute-force sum over k <= 200 with a 1e-15 tail at p = 1/2.
    hw, chain, ch = unit_clock_setup(0.5, 2)
    assert memory_time_std(hw, chain, ch) == pytest.approx(1.6329931618554520655, rel=1e-8)


def test_memory_std_shrinks_as_success_gets_certain():
    hw, chain, ch = unit_clock_setup(0.2, 3)
    spreads = []
    for p1m in (0.2, 0.35, 0.5):
        hw_p = HardwareParams(detector_eff=1.0, memory_eff=1.0,
                              emission_prob=math.sqrt(2.0 * p1m), mode_count=1)
        spreads.append(memory_time_std(hw_p, chain, ch))
    assert spreads[0] > spreads[1] > spreads[2] > 0.0


def test_memory_std_matches_metrics_field():
    chain = ChainConfig(total_length=800.0, link_count=4)
    assert memory_time_std(DEFAULT_HW, chain, DEFAULT_CH) == pytest.approx(
        metrics(DEFAULT_HW, chain, DEFAULT_CH).mem_time_std, rel=1e-12)
