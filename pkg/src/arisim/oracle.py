"""Brute-force Monte Carlo verification of the closed-form moments.

Every expectation the closed forms claim is estimated here directly from
fresh channel draws, with standard errors, so the analytic module can be
certified numerically.  This module intentionally does not import the
analytic module: the two routes to each moment stay independent.

Also checks the central-Wishart surrogate used for the dynamic-noise
moment: the Gram matrix W = H2^H H2 of the Rician second hop is non-central
Wishart, and E{W W} is approximated by M*S*(M*S + tr(S)) with the adjusted
covariance S = Sigma + (LoS mean)(LoS mean)^H / M.  The surrogate is exact
when the LoS part vanishes and degrades slowly as the Rician factor grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budget import LinkBudget, SystemConfig
from .channel import (
    Geometry,
    los_components,
    make_geometry,
    sample_channel_batch,
    substream,
)
from .transceiver import BATCH, PhaseConfig


def _batches(trials: int):
    for b_idx in range(0, (trials + BATCH - 1) // BATCH):
        lo = b_idx * BATCH
        yield b_idx, lo, min(lo + BATCH, trials)


@dataclass(frozen=True, eq=False)
class MomentEstimates:
    """Sample means and standard errors of the five combined-channel moments."""

    signal: np.ndarray             # (K,)   mean ||g_k||^4
    interference: np.ndarray       # (K, K) mean |g_k^H g_i|^2, diagonal zeroed
    dynamic_noise: np.ndarray      # (K,)   mean ||g_k^H H2 Phi||^2
    channel_gain: np.ndarray       # (K,)   mean ||g_k||^2
    quantization: np.ndarray       # (K,)   mean g_k^H diag(p_k G G^H + sn2 I) g_k
    se_signal: np.ndarray
    se_interference: np.ndarray
    se_dynamic_noise: np.ndarray
    se_channel_gain: np.ndarray
    se_quantization: np.ndarray
    trials: int


def estimate_moments(
    geom: Geometry,
    cfg: SystemConfig,
    phases: PhaseConfig,
    budget: LinkBudget,
    trials: int,
    seed: int,
) -> MomentEstimates:
    """Estimate all five moments from `trials` fresh channel draws.

    Deterministic given (seed, trials); the stream is independent of the
    rate-simulation streams so estimates never reuse simulation draws.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    K = cfg.K
    eta = budget.eta
    p = budget.p
    sn2 = cfg.sigma_n2_w
    phi = phases.phi

    sig = np.empty((trials, K))
    cross = np.empty((trials, K, K))
    dyn = np.empty((trials, K))
    gain = np.empty((trials, K))
    quant = np.empty((trials, K))

    for b_idx, lo, hi in _batches(trials):
        rng = substream(seed, b_idx)
        H1, H2 = sample_channel_batch(geom, cfg, rng, hi - lo)
        G = eta * (H2 * phi[None, None, :]) @ H1
        gram = np.einsum("tmk,tmi->tki", G.conj(), G)
        norm2 = np.einsum("tkk->tk", gram).real
        h2g = np.einsum("tmn,tmk->tnk", H2.conj(), G)
        row_power = np.abs(G) ** 2
        total_row = row_power.sum(axis=2)

        sig[lo:hi] = norm2**2
        cross[lo:hi] = np.abs(gram) ** 2
        dyn[lo:hi] = np.einsum("tnk,tnk->tk", h2g.conj(), h2g).real
        gain[lo:hi] = norm2
        quant[lo:hi] = p * np.einsum("tm,tmk->tk", total_row, row_power) + sn2 * norm2

    def mean_se(x):
        m = x.mean(axis=0)
        se = x.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros_like(m)
        return m, se

    sig_m, sig_se = mean_se(sig)
    cross_m, cross_se = mean_se(cross)
    dyn_m, dyn_se = mean_se(dyn)
    gain_m, gain_se = mean_se(gain)
    quant_m, quant_se = mean_se(quant)
    off_diag = 1.0 - np.eye(K)
    return MomentEstimates(
        sig_m, cross_m * off_diag, dyn_m, gain_m, quant_m,
        sig_se, cross_se * off_diag, dyn_se, gain_se, quant_se,
        trials,
    )


@dataclass(frozen=True, eq=False)
class WishartMomentReport:
    """Monte Carlo E{W W} against its central-Wishart surrogate."""

    mc: np.ndarray            # (N, N) sample mean of W @ W
    approx: np.ndarray        # (N, N) M*S*(M*S + tr(S))
    se: np.ndarray            # (N, N) per-entry standard error of the mean
    frob_rel_dev: float       # ||mc - approx||_F / ||approx||_F
    frob_rel_se: float        # sqrt(sum se^2) / ||approx||_F  (sampling noise floor)
    max_entry_dev: float      # max |mc - approx| over entries, relative to ||approx||_F / N
    trace_surrogate: float    # tr(S), equals N * beta
    trials: int

    def summary(self) -> str:
        return (
            f"relative Frobenius deviation {self.frob_rel_dev:.4%} "
            f"(sampling floor {self.frob_rel_se:.4%}, {self.trials} trials)"
        )


def wishart_moment_check(cfg: SystemConfig, trials: int, seed: int) -> WishartMomentReport:
    """Compare E{(H2^H H2)^2} against the central-Wishart surrogate."""
    if trials < 1:
        raise ValueError("trials must be positive")
    geom = make_geometry(cfg)
    _, Hbar2 = los_components(geom, cfg)
    N, M, d, beta = cfg.N, cfg.M, cfg.delta, geom.beta

    surrogate_cov = beta / (1.0 + d) * (np.eye(N) + (d / M) * (Hbar2.conj().T @ Hbar2))
    trace = float(np.trace(surrogate_cov).real)
    approx = M * surrogate_cov @ (M * surrogate_cov + trace * np.eye(N))

    s1 = np.zeros((N, N), dtype=complex)
    s2 = np.zeros((N, N))
    for b_idx, lo, hi in _batches(trials):
        rng = substream(seed, b_idx)
        _, H2 = sample_channel_batch(geom, cfg, rng, hi - lo)
        W = np.einsum("tmn,tmj->tnj", H2.conj(), H2)
        WW = W @ W
        s1 += WW.sum(axis=0)
        s2 += (np.abs(WW) ** 2).sum(axis=0)

    mc = s1 / trials
    var = np.maximum(s2 / trials - np.abs(mc) ** 2, 0.0)
    se = np.sqrt(var / trials)

    approx_norm = float(np.linalg.norm(approx))
    dev = mc - approx
    return WishartMomentReport(
        mc=mc,
        approx=approx,
        se=se,
        frob_rel_dev=float(np.linalg.norm(dev)) / approx_norm,
        frob_rel_se=float(np.sqrt((se**2).sum())) / approx_norm,
        max_entry_dev=float(np.abs(dev).max()) * N / approx_norm,
        trace_surrogate=trace,
        trials=trials,
    )
