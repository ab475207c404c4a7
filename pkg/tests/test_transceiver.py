import math
from dataclasses import replace

import numpy as np
import pytest

from arisim import (
    ChannelRealization,
    LinkBudget,
    Mode,
    PhaseConfig,
    SystemConfig,
    aqnm_alpha,
    cascaded_channel,
    instantaneous_sinr,
    make_geometry,
    measured_ris_power,
    monte_carlo_rate,
    resolve_budget,
    sample_channels,
)
from arisim.channel import substream

from helpers import sinr_from_definition


def test_aqnm_alpha_table():
    assert aqnm_alpha(1) == pytest.approx(1 - 0.3634, abs=1e-12)
    assert aqnm_alpha(2) == pytest.approx(1 - 0.1175, abs=1e-12)
    assert aqnm_alpha(4) == pytest.approx(0.990521, abs=1e-6)
    assert aqnm_alpha(5) == pytest.approx(1 - 0.002499, abs=1e-12)
    assert aqnm_alpha(8) == pytest.approx(1 - (math.pi * math.sqrt(3) / 2) * 2**-16, abs=1e-12)
    assert aqnm_alpha("ideal") == 1.0


def test_aqnm_alpha_monotone_across_table_boundary():
    values = [aqnm_alpha(b) for b in range(1, 13)]
    assert all(values[i] < values[i + 1] for i in range(len(values) - 1))
    assert values[-1] < 1.0


def test_aqnm_alpha_rejects_bad_bits():
    for bad in (0, -1, 2.5, "three"):
        with pytest.raises(ValueError):
            aqnm_alpha(bad)


def test_phase_config_reduction():
    phases = PhaseConfig(np.array([0.0, 2 * np.pi + 0.5, -0.25]))
    assert np.all(phases.theta >= 0.0) and np.all(phases.theta < 2 * np.pi)
    assert phases.theta[1] == pytest.approx(0.5, rel=1e-12)
    np.testing.assert_allclose(np.abs(phases.phi), 1.0, atol=1e-15)


def test_cascaded_channel_single_element():
    rng = substream(5, 0)
    H1 = (rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3)))
    H2 = (rng.standard_normal((4, 1)) + 1j * rng.standard_normal((4, 1)))
    real = ChannelRealization(H1, H2)
    got = cascaded_channel(real, PhaseConfig(np.zeros(1)), eta=1.0)
    np.testing.assert_allclose(got, H2 @ H1, rtol=1e-14)
    doubled = cascaded_channel(real, PhaseConfig(np.zeros(1)), eta=2.0)
    np.testing.assert_allclose(doubled, 2.0 * got, rtol=1e-14)


def test_cascaded_channel_dimension_mismatch():
    real = ChannelRealization(np.zeros((4, 2), complex), np.zeros((8, 4), complex))
    with pytest.raises(ValueError):
        cascaded_channel(real, PhaseConfig(np.zeros(3)), eta=1.0)


@pytest.mark.parametrize("strict", [False, True])
def test_sinr_matches_literal_definition(paper_cfg, strict):
    # production path against a start-from-scratch evaluator
    cfg = paper_cfg
    geom = make_geometry(cfg)
    budget = resolve_budget(cfg, geom.alpha, Mode.ACTIVE)
    real = sample_channels(geom, cfg, substream(50, 0))
    phases = PhaseConfig.random(cfg.N, substream(51, 0))
    got = instantaneous_sinr(real, phases, budget, cfg, strict_aqnm=strict)
    want = sinr_from_definition(
        real.H1, real.H2, phases.theta, budget.p, budget.eta,
        budget.sigma_v2_w, cfg.sigma_n2_w, aqnm_alpha(cfg.b), strict_aqnm=strict,
    )
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_sinr_passive_matches_definition(paper_cfg):
    cfg = paper_cfg
    geom = make_geometry(cfg)
    budget = resolve_budget(cfg, geom.alpha, Mode.PASSIVE)
    real = sample_channels(geom, cfg, substream(52, 0))
    phases = PhaseConfig.random(cfg.N, substream(53, 0))
    got = instantaneous_sinr(real, phases, budget, cfg)
    want = sinr_from_definition(
        real.H1, real.H2, phases.theta, budget.p, 1.0, 0.0,
        cfg.sigma_n2_w, aqnm_alpha(cfg.b),
    )
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_ideal_adc_drops_quantization_term(desk):
    cfg, geom, phases, active = desk
    ideal = resolve_budget(cfg, geom.alpha, Mode.IDEAL_ADC)
    real = sample_channels(geom, cfg, substream(54, 0))
    got = instantaneous_sinr(real, phases, ideal, cfg)
    want = sinr_from_definition(
        real.H1, real.H2, phases.theta, ideal.p, ideal.eta,
        ideal.sigma_v2_w, cfg.sigma_n2_w, alpha=1.0,
    )
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_single_user_has_no_interference():
    cfg = SystemConfig(M=16, N=4, K=1, epsilon=(10.0,), trials=10, seed=3)
    geom = make_geometry(cfg)
    budget = resolve_budget(cfg, geom.alpha, Mode.ACTIVE)
    real = sample_channels(geom, cfg, substream(55, 0))
    sinr = instantaneous_sinr(real, PhaseConfig(np.zeros(cfg.N)), budget, cfg)
    assert sinr.shape == (1,)
    assert sinr[0] > 0.0


def test_quantization_sandwich(desk):
    # more bits never hurt, and ideal ADCs dominate every finite resolution
    cfg, geom, phases, budget = desk
    real = sample_channels(geom, cfg, substream(56, 0))
    prev = None
    for bits in range(1, 9):
        sinr = instantaneous_sinr(real, phases, budget, cfg=replace(cfg, b=bits))
        if prev is not None:
            assert np.all(sinr >= prev - 1e-15)
        prev = sinr
    ideal = resolve_budget(cfg, geom.alpha, Mode.IDEAL_ADC)
    top = instantaneous_sinr(real, phases, ideal, cfg)
    assert np.all(top >= prev)


def test_global_phase_invariance(desk):
    cfg, geom, phases, budget = desk
    real = sample_channels(geom, cfg, substream(57, 0))
    base = instantaneous_sinr(real, phases, budget, cfg)
    for offset in (0.37, np.pi / 3, 5.1):
        shifted = instantaneous_sinr(real, phases.shifted(offset), budget, cfg)
        np.testing.assert_allclose(shifted, base, rtol=1e-10)


def test_scale_consistency_ideal_mode(desk):
    # multiplying all transmit powers and both noise powers by the same
    # constant leaves the ideal-ADC SINR unchanged for a fixed realization
    cfg, geom, phases, _ = desk
    base_budget = resolve_budget(cfg, geom.alpha, Mode.IDEAL_ADC)
    real = sample_channels(geom, cfg, substream(58, 0))
    base = instantaneous_sinr(real, phases, base_budget, cfg)
    c_db = 20.0  # factor 100
    scaled_cfg = replace(cfg, sigma_n2_dbm=cfg.sigma_n2_dbm + c_db)
    scaled_budget = LinkBudget(
        p=base_budget.p * 100.0,
        eta=base_budget.eta,
        P_A=base_budget.P_A,
        startup_met=True,
        mode=Mode.IDEAL_ADC,
        sigma_v2_w=base_budget.sigma_v2_w * 100.0,
    )
    scaled = instantaneous_sinr(real, phases, scaled_budget, scaled_cfg)
    np.testing.assert_allclose(scaled, base, rtol=1e-12)


def test_zero_transmit_power_gives_zero_rates(desk):
    cfg, geom, phases, budget = desk
    silent = LinkBudget(
        p=np.zeros(cfg.K), eta=budget.eta, P_A=budget.P_A,
        startup_met=True, mode=Mode.ACTIVE, sigma_v2_w=budget.sigma_v2_w,
    )
    report = monte_carlo_rate(geom, cfg, phases, silent, trials=32)
    assert report.sum_rate == 0.0
    assert np.all(report.per_user_rate == 0.0)


def test_rates_decrease_with_noise(desk):
    cfg, geom, phases, budget = desk
    base = monte_carlo_rate(geom, cfg, phases, budget, trials=200)
    noisier = monte_carlo_rate(
        geom, replace(cfg, sigma_n2_dbm=cfg.sigma_n2_dbm + 3.0), phases, budget, trials=200
    )
    assert np.all(noisier.per_user_rate <= base.per_user_rate)


def test_monte_carlo_deterministic(desk):
    cfg, geom, phases, budget = desk
    a = monte_carlo_rate(geom, cfg, phases, budget, trials=300)
    b = monte_carlo_rate(geom, cfg, phases, budget, trials=300)
    np.testing.assert_array_equal(a.per_user_rate, b.per_user_rate)
    np.testing.assert_array_equal(a.std_err, b.std_err)
    assert a.sum_rate == b.sum_rate
    assert a.trials_used == 300


def test_monte_carlo_startup_not_met(desk_cfg):
    cfg = replace(desk_cfg, P_T_dbm=-20.0)
    geom = make_geometry(cfg)
    budget = resolve_budget(cfg, geom.alpha, Mode.ACTIVE)
    assert not budget.startup_met
    report = monte_carlo_rate(geom, cfg, PhaseConfig(np.zeros(cfg.N)), budget)
    assert report.sum_rate == 0.0
    assert report.trials_used == 0
    assert np.all(report.per_user_rate == 0.0)


def test_std_err_scaling(desk):
    cfg, geom, phases, budget = desk
    small = monte_carlo_rate(geom, cfg, phases, budget, trials=1000)
    large = monte_carlo_rate(geom, cfg, phases, budget, trials=4000)
    ratio = small.std_err / large.std_err
    assert np.all(ratio > 2.0 * 0.8) and np.all(ratio < 2.0 * 1.2)


def test_rate_report_consistency(desk):
    cfg, geom, phases, budget = desk
    report = monte_carlo_rate(geom, cfg, phases, budget, trials=128)
    assert report.sum_rate == pytest.approx(report.per_user_rate.sum(), rel=1e-12)
    assert np.all(report.per_user_rate >= 0.0)


def test_measured_power_zero_without_sources(desk):
    cfg, geom, phases, _ = desk
    silent = LinkBudget(
        p=np.zeros(cfg.K), eta=1.0, P_A=0.0,
        startup_met=True, mode=Mode.PASSIVE, sigma_v2_w=0.0,
    )
    assert measured_ris_power(geom, cfg, phases, silent, trials=64) == 0.0


def test_measured_power_quadratic_in_gain(desk):
    cfg, geom, phases, budget = desk
    doubled = LinkBudget(
        p=budget.p, eta=2.0 * budget.eta, P_A=budget.P_A,
        startup_met=True, mode=Mode.ACTIVE, sigma_v2_w=budget.sigma_v2_w,
    )
    base = measured_ris_power(geom, cfg, phases, budget, trials=500)
    four_x = measured_ris_power(geom, cfg, phases, doubled, trials=500)
    # identical draws, so the quadratic scaling is exact
    assert four_x == pytest.approx(4.0 * base, rel=1e-12)
