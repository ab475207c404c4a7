"""Closed-form approximate uplink rates for the cascaded Rician channel.

The ergodic per-user rate is approximated by moving the expectation inside
the log ratio, which reduces everything to five deterministic moments of
the combined channel g_k = eta * H2 * Phi * h_k:

    E{||g_k||^4},  E{|g_k^H g_i|^2},  E{||g_k^H H2 Phi||^2},
    E{||g_k||^2},  E{g_k^H diag(p_k G G^H + sn2 I) g_k}.

Each moment has a closed form in the array sizes, the Rician factors, the
large-scale gains and two phase-dependent functionals: the aligned LoS gain
f_k = a_N^H(ris departure) Phi hbar_k and the steering inner products
hbar_k^H hbar_i.  The dynamic-noise moment additionally relies on a
central-Wishart approximation of the second hop's Gram matrix, so it is the
least exact of the five; all are validated against brute-force Monte Carlo
estimates in the oracle module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .budget import LinkBudget, Mode, SystemConfig
from .channel import Geometry, array_response, los_components
from .transceiver import PhaseConfig, quantization_gain


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Deterministic inputs of the closed-form rate expressions."""

    f: np.ndarray           # (K,) aligned LoS gains f_k(Phi)
    u: np.ndarray           # (K,) composite gains beta*alpha_k/((delta+1)(eps_k+1))
    hbar_inner: np.ndarray  # (K, K) steering inner products hbar_k^H hbar_i
    M: int
    N: int
    delta: float
    eps: np.ndarray         # (K,)
    beta: float
    alpha: np.ndarray       # (K,)


def compute_stats(geom: Geometry, cfg: SystemConfig, phases: PhaseConfig) -> ChannelStats:
    """Evaluate the phase functionals and large-scale factors once."""
    hbar, _ = los_components(geom, cfg)
    a_ris = array_response(cfg.N, geom.ris_aod[0], geom.ris_aod[1], cfg.d_over_lambda)
    f = (a_ris.conj() * phases.phi) @ hbar
    eps = np.asarray(cfg.epsilon)
    u = geom.beta * geom.alpha / ((cfg.delta + 1.0) * (eps + 1.0))
    hbar_inner = hbar.conj().T @ hbar
    return ChannelStats(f, u, hbar_inner, cfg.M, cfg.N, cfg.delta, eps, geom.beta, geom.alpha)


def _pair_cross(stats: ChannelStats, k: int, i: int) -> float:
    """LoS coupling of users k and i: Re{f_k * conj(f_i) * hbar_k^H hbar_i}.

    The aligned-gain product is conjugated against the steering inner
    product; the opposite pairing fails the Monte Carlo oracle whenever the
    steering vectors are strongly correlated.
    """
    return float((stats.f[k] * np.conj(stats.f[i]) * stats.hbar_inner[k, i]).real)


def signal_moment(stats: ChannelStats, k: int, eta: float = 1.0) -> float:
    """E{||g_k||^4}: fourth moment of the combined-channel norm."""
    M, N, d = stats.M, stats.N, stats.delta
    e = stats.eps[k]
    fk2 = abs(stats.f[k]) ** 2
    return float(
        eta**4 * M * stats.u[k] ** 2 * (
            M * d**2 * e**2 * fk2**2
            + 2.0 * d * e * fk2 * (2 * M * N + M * N * e + M * N + 2 * M + N * e + N + 2)
            + M * N**2 * (2 * d**2 + e**2 + 2 * d * e + 2 * d + 2 * e + 1)
            + N**2 * (e**2 + 2 * d * e + 2 * d + 2 * e + 1)
            + M * N * (2 * d + 2 * e + 1)
            + N * (2 * d + 2 * e + 1)
        )
    )


def interference_moment(
    stats: ChannelStats, k: int, i: int, eta: float = 1.0, printed_prefactor: bool = False
) -> float:
    """E{|g_k^H g_i|^2}: pairwise interference coupling, k != i.

    `printed_prefactor` switches to a u_k^2 * u_i^2 prefactor variant kept
    only for documentation; dimensional analysis and the Monte Carlo oracle
    both require u_k * u_i, which is the default.
    """
    if k == i:
        raise ValueError("interference moment is defined for distinct users")
    M, N, d = stats.M, stats.N, stats.delta
    ek, ei = stats.eps[k], stats.eps[i]
    fk2 = abs(stats.f[k]) ** 2
    fi2 = abs(stats.f[i]) ** 2
    inner = stats.hbar_inner[k, i]
    cross = _pair_cross(stats, k, i)
    u_pref = (
        stats.u[k] ** 2 * stats.u[i] ** 2 if printed_prefactor else stats.u[k] * stats.u[i]
    )
    return float(
        eta**4 * M * u_pref * (
            M * d**2 * ek * ei * fk2 * fi2
            + d * ek * fk2 * (d * M * N + N * ei + N + 2 * M)
            + d * ei * fi2 * (d * M * N + N * ek + N + 2 * M)
            + N**2 * (M * d**2 + d * (ek + ei + 2) + (ei + 1) * (ek + 1))
            + M * N * (2 * d + ek + ei + 1)
            + M * ek * ei * abs(inner) ** 2
            + 2.0 * M * d * ek * ei * cross
        )
    )


def dynamic_noise_moment(stats: ChannelStats, k: int, eta: float = 1.0) -> float:
    """E{||g_k^H H2 Phi||^2}: gain seen by the surface's dynamic noise after
    combining.  Uses the central-Wishart approximation of (H2^H H2)^2."""
    M, N, d = stats.M, stats.N, stats.delta
    e = stats.eps[k]
    fk2 = abs(stats.f[k]) ** 2
    b_u = stats.beta * stats.u[k]
    return float(
        eta**2 * M**2 * b_u / (d + 1.0)
        * (d * e * (2.0 + d * N) * fk2 + 2 * N * d + N**2 * d**2 + N * e + N)
        + eta**2 * M * N * b_u * (d * e * fk2 + N * d + N * e + N)
    )


def channel_gain_moment(stats: ChannelStats, k: int, eta: float = 1.0) -> float:
    """E{||g_k||^2}: mean combined-channel power."""
    M, N, d = stats.M, stats.N, stats.delta
    e = stats.eps[k]
    fk2 = abs(stats.f[k]) ** 2
    return float(eta**2 * M * stats.u[k] * (d * e * fk2 + d * N + e * N + N))


def quantization_moment(
    stats: ChannelStats, k: int, budget: LinkBudget, cfg: SystemConfig
) -> float:
    """E{g_k^H diag(p_k G G^H + sn2 I) g_k}: quantization-noise coupling.

    Carries the user's own fourth moment, the AWGN contribution and the
    per-entry coupling with every interferer; transmit powers and the noise
    floor are folded in, matching how the term enters the SINR denominator.
    """
    M, N, d = stats.M, stats.N, stats.delta
    e = stats.eps[k]
    fk2 = abs(stats.f[k]) ** 2
    eta = budget.eta
    p_k = float(budget.p[k])

    own = p_k * eta**4 * M * stats.u[k] ** 2 * (
        (d * e * fk2) ** 2
        + 4.0 * d * e * fk2 * (N * (d + e + 1) + 2)
        + 2.0 * N**2 * (d + e + 1) ** 2
        + 2.0 * N * (2 * d + 2 * e + 1)
    )
    noise = cfg.sigma_n2_w * channel_gain_moment(stats, k, eta)

    cross = 0.0
    for i in range(len(stats.eps)):
        if i == k:
            continue
        ei = stats.eps[i]
        fi2 = abs(stats.f[i]) ** 2
        u_ki = stats.u[k] * stats.u[i]
        pair_re = _pair_cross(stats, k, i)
        cross += u_ki * (d * e * fk2 + N * (d + e + 1)) * (d * ei * fi2 + N * (d + ei + 1))
        cross += 2.0 * d * u_ki * (e * ei * pair_re + e * fk2 + ei * fi2 + N)
    return float(own + noise + p_k * eta**4 * M * cross)


def _moment_terms(stats: ChannelStats, budget: LinkBudget, cfg: SystemConfig, k: int):
    eta = budget.eta
    sig = signal_moment(stats, k, eta)
    interf = sum(
        float(budget.p[i]) * interference_moment(stats, k, i, eta)
        for i in range(cfg.K)
        if i != k
    )
    dyn = eta**2 * budget.sigma_v2_w * dynamic_noise_moment(stats, k, eta)
    awgn = cfg.sigma_n2_w * channel_gain_moment(stats, k, eta)
    return sig, interf, dyn, awgn


def rate_active(stats: ChannelStats, budget: LinkBudget, cfg: SystemConfig, k: int) -> float:
    """Closed-form approximate rate of user k with an active surface and
    low-resolution ADCs, bits/s/Hz.  Zero when the surface is down."""
    if not budget.startup_met:
        return 0.0
    alpha_q = quantization_gain(cfg, budget.mode)
    sig, interf, dyn, awgn = _moment_terms(stats, budget, cfg, k)
    den = interf + dyn + awgn
    if alpha_q < 1.0:
        den += (1.0 - alpha_q) / alpha_q * quantization_moment(stats, k, budget, cfg)
    return float(np.log2(1.0 + float(budget.p[k]) * sig / den))


def rate_passive(stats: ChannelStats, budget: LinkBudget, cfg: SystemConfig, k: int) -> float:
    """Closed-form rate with a passive surface: unit gain, no dynamic noise."""
    if not budget.startup_met:
        return 0.0
    if budget.mode is not Mode.PASSIVE:
        raise ValueError("rate_passive expects a passive budget")
    alpha_q = quantization_gain(cfg, budget.mode)
    sig, interf, _, awgn = _moment_terms(stats, budget, cfg, k)
    den = interf + awgn
    if alpha_q < 1.0:
        den += (1.0 - alpha_q) / alpha_q * quantization_moment(stats, k, budget, cfg)
    return float(np.log2(1.0 + float(budget.p[k]) * sig / den))


def rate_ideal_adc(stats: ChannelStats, budget: LinkBudget, cfg: SystemConfig, k: int) -> float:
    """Closed-form rate with infinite-resolution ADCs (no quantization term)."""
    if not budget.startup_met:
        return 0.0
    sig, interf, dyn, awgn = _moment_terms(stats, budget, cfg, k)
    return float(np.log2(1.0 + float(budget.p[k]) * sig / (interf + dyn + awgn)))


def closed_form_rates(stats: ChannelStats, budget: LinkBudget, cfg: SystemConfig) -> np.ndarray:
    """Per-user closed-form rates dispatched on the budget's mode."""
    if budget.mode is Mode.PASSIVE:
        fn = rate_passive
    elif budget.mode is Mode.IDEAL_ADC:
        fn = rate_ideal_adc
    else:
        fn = rate_active
    return np.array([fn(stats, budget, cfg, k) for k in range(cfg.K)])


def closed_form_sum_rate(
    geom: Geometry, cfg: SystemConfig, budget: LinkBudget, phases: PhaseConfig
) -> float:
    """Sum of the per-user closed-form rates for one phase configuration."""
    if not budget.startup_met:
        return 0.0
    stats = compute_stats(geom, cfg, phases)
    return float(closed_form_rates(stats, budget, cfg).sum())
