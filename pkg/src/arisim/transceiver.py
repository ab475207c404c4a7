"""Cascaded-channel transceiver chain: quantization, MRC and Monte Carlo rates.

The BS applies maximal-ratio combining to the ADC output, modeled with the
additive quantization noise model (AQNM): the quantizer scales its input by
alpha = 1 - rho and adds Gaussian noise whose covariance is proportional to
the diagonal of the input power.  Achievable rates are per-user ergodic
values E{log2(1 + SINR)} estimated over fading realizations.

Monte Carlo trials are processed in fixed-size batches, each with its own
generator derived from (seed, batch index), so results depend only on the
seed and trial count, never on execution order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budget import LinkBudget, Mode, SystemConfig
from .channel import (
    STREAM_FADING,
    STREAM_SYMBOLS,
    ChannelRealization,
    Geometry,
    crandn,
    sample_channel_batch,
    sample_user_channels,
    substream,
)

# Trials per RNG batch.  Part of the determinism contract: changing it
# changes which generator produces which trial.
BATCH = 512

# Distortion factor rho of an optimal scalar quantizer for small bit widths;
# beyond 5 bits the pi*sqrt(3)/2 * 2^(-2b) asymptote is accurate.
AQNM_RHO = {1: 0.3634, 2: 0.1175, 3: 0.03454, 4: 0.009479, 5: 0.002499}


def aqnm_alpha(b) -> float:
    """Quantization gain alpha = 1 - rho(b); alpha = 1 for ideal ADCs."""
    if b == "ideal":
        return 1.0
    if not isinstance(b, (int, np.integer)) or b < 1:
        raise ValueError(f"quantization bits must be a positive integer or 'ideal', got {b!r}")
    rho = AQNM_RHO[b] if b <= 5 else (math.pi * math.sqrt(3.0) / 2.0) * 2.0 ** (-2 * b)
    return 1.0 - rho


def quantization_gain(cfg: SystemConfig, mode: Mode) -> float:
    """Effective alpha for the given operating mode."""
    return 1.0 if mode is Mode.IDEAL_ADC else aqnm_alpha(cfg.b)


@dataclass(frozen=True, eq=False)
class PhaseConfig:
    """The N surface phase shifts, stored reduced modulo 2*pi."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.mod(np.asarray(self.theta, dtype=float), 2.0 * np.pi)
        object.__setattr__(self, "theta", t)

    @property
    def n_elements(self) -> int:
        return self.theta.shape[0]

    @property
    def phi(self) -> np.ndarray:
        """Diagonal of the unit-modulus reflection matrix, exp(j*theta)."""
        return np.exp(1j * self.theta)

    def shifted(self, offset: float) -> "PhaseConfig":
        """Same configuration with a common offset added to every element."""
        return PhaseConfig(self.theta + offset)

    @staticmethod
    def random(n: int, rng: np.random.Generator) -> "PhaseConfig":
        return PhaseConfig(rng.uniform(0.0, 2.0 * np.pi, n))


@dataclass(frozen=True, eq=False)
class RateReport:
    """Per-user ergodic rates with Monte Carlo standard errors."""

    per_user_rate: np.ndarray  # (K,) bits/s/Hz
    sum_rate: float
    std_err: np.ndarray        # (K,) standard error of each per-user mean
    trials_used: int
    sum_std_err: float         # standard error of the sum rate (per-trial sums)


def cascaded_channel(real: ChannelRealization, phases: PhaseConfig, eta: float) -> np.ndarray:
    """Effective BS-side channel G = eta * H2 * diag(exp(j*theta)) * H1, (M, K)."""
    H1, H2 = real.H1, real.H2
    if H2.shape[1] != phases.n_elements or H1.shape[0] != phases.n_elements:
        raise ValueError(
            f"dimension mismatch: H2 {H2.shape}, H1 {H1.shape}, {phases.n_elements} phases"
        )
    return eta * (H2 * phases.phi) @ H1


def _sinr_batch(
    H1: np.ndarray,
    H2: np.ndarray,
    phases: PhaseConfig,
    budget: LinkBudget,
    cfg: SystemConfig,
    alpha_q: float,
    strict_aqnm: bool = False,
) -> np.ndarray:
    """Post-combining SINR per user for a batch of realizations.

    For user k with combined channel g_k (column of G) the SINR is

        p_k a^2 ||g_k||^4  /  ( a^2 sum_{i!=k} p_i |g_k^H g_i|^2
                                + eta^2 a^2 sv2 ||g_k^H H2 Phi||^2
                                + a^2 sn2 ||g_k||^2
                                + a(1-a) g_k^H diag(p_k G G^H + sn2 I) g_k )

    with a the quantization gain.  `strict_aqnm` replaces the scalar p_k in
    the quantizer-input power by the exact per-user allocation diag(p) and
    adds the amplified dynamic noise to it; with equal powers and no
    dynamic-noise term the two coincide.
    """
    phi = phases.phi
    G = budget.eta * (H2 * phi[None, None, :]) @ H1          # (T, M, K)
    gram = np.einsum("tmk,tmi->tki", G.conj(), G)            # gram[t,k,i] = g_k^H g_i
    norm2 = np.einsum("tkk->tk", gram).real                  # ||g_k||^2
    cross2 = np.abs(gram) ** 2

    p = budget.p
    sn2 = cfg.sigma_n2_w
    sv2 = budget.sigma_v2_w

    interference = alpha_q**2 * (cross2 @ p - p * norm2**2)

    h2g = np.einsum("tmn,tmk->tnk", H2.conj(), G)            # H2^H g_k
    dyn_gain = np.einsum("tnk,tnk->tk", h2g.conj(), h2g).real
    dynamic = budget.eta**2 * alpha_q**2 * sv2 * dyn_gain

    awgn = alpha_q**2 * sn2 * norm2

    row_power = np.abs(G) ** 2                               # (T, M, K)
    if strict_aqnm:
        # quantizer-input power with the exact per-user allocation and the
        # amplified dynamic noise: diag(G P G^H + eta^2 sv2 H2 H2^H + sn2 I)
        diag_in = row_power @ p + budget.eta**2 * sv2 * (np.abs(H2) ** 2).sum(axis=2) + sn2
        quant = alpha_q * (1.0 - alpha_q) * np.einsum("tm,tmk->tk", diag_in, row_power)
    else:
        total_row = row_power.sum(axis=2)                    # diag(G G^H)
        quant = alpha_q * (1.0 - alpha_q) * (
            p * np.einsum("tm,tmk->tk", total_row, row_power) + sn2 * norm2
        )

    num = p * alpha_q**2 * norm2**2
    den = interference + dynamic + awgn + quant
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)


def instantaneous_sinr(
    real: ChannelRealization,
    phases: PhaseConfig,
    budget: LinkBudget,
    cfg: SystemConfig,
    strict_aqnm: bool = False,
) -> np.ndarray:
    """SINR per user for one realization; all zeros if the surface is down."""
    if not budget.startup_met:
        return np.zeros(cfg.K)
    alpha_q = quantization_gain(cfg, budget.mode)
    return _sinr_batch(
        real.H1[None], real.H2[None], phases, budget, cfg, alpha_q, strict_aqnm
    )[0]


def _batches(trials: int):
    for b_idx in range(0, (trials + BATCH - 1) // BATCH):
        lo = b_idx * BATCH
        yield b_idx, lo, min(lo + BATCH, trials)


def monte_carlo_rate(
    geom: Geometry,
    cfg: SystemConfig,
    phases: PhaseConfig,
    budget: LinkBudget,
    trials: int | None = None,
    strict_aqnm: bool = False,
) -> RateReport:
    """Estimate per-user ergodic rates by averaging over fading draws.

    Deterministic for a fixed (seed, trials) pair regardless of batching.
    """
    T = cfg.trials if trials is None else int(trials)
    if T < 1:
        raise ValueError("trials must be positive")
    K = cfg.K
    if not budget.startup_met:
        return RateReport(np.zeros(K), 0.0, np.zeros(K), 0, 0.0)

    alpha_q = quantization_gain(cfg, budget.mode)
    rates = np.empty((T, K))
    for b_idx, lo, hi in _batches(T):
        rng = substream(cfg.seed, STREAM_FADING, b_idx)
        H1, H2 = sample_channel_batch(geom, cfg, rng, hi - lo)
        sinr = _sinr_batch(H1, H2, phases, budget, cfg, alpha_q, strict_aqnm)
        rates[lo:hi] = np.log2(1.0 + sinr)

    per_user = rates.mean(axis=0)
    if T > 1:
        std_err = rates.std(axis=0, ddof=1) / math.sqrt(T)
        sum_std_err = float(rates.sum(axis=1).std(ddof=1) / math.sqrt(T))
    else:
        std_err = np.zeros(K)
        sum_std_err = 0.0
    return RateReport(per_user, float(per_user.sum()), std_err, T, sum_std_err)


def measured_ris_power(
    geom: Geometry,
    cfg: SystemConfig,
    phases: PhaseConfig,
    budget: LinkBudget,
    trials: int,
) -> float:
    """Monte Carlo estimate of the power radiated by the surface, watts.

    Draws fresh user channels, unit-power Gaussian symbols and dynamic
    noise, and averages ||eta * Phi * (H1 diag(sqrt(p)) x + v)||^2.  For a
    correctly resolved active budget this reproduces
    eta^2 * N * (sum_k p_k alpha_k + sigma_v^2) = P_A.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    sqrt_p = np.sqrt(budget.p)
    sv = math.sqrt(budget.sigma_v2_w)
    phi = phases.phi
    total = 0.0
    for b_idx, lo, hi in _batches(trials):
        rng = substream(cfg.seed, STREAM_SYMBOLS, b_idx)
        count = hi - lo
        H1 = sample_user_channels(geom, cfg, rng, count)
        x = crandn(rng, (count, cfg.K))
        v = sv * crandn(rng, (count, cfg.N))
        y = budget.eta * phi * (np.einsum("tnk,tk->tn", H1, sqrt_p * x) + v)
        total += float((np.abs(y) ** 2).sum())
    return total / trials
