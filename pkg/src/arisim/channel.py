"""Rician fading channel generation for the user -> RIS -> BS uplink.

Geometry (user positions, arrival/departure angles, large-scale gains) is
drawn once per experiment from a dedicated seeded stream and then held
fixed; Monte Carlo trials vary only the small-scale fading.  Every random
stream is derived from the master seed through `numpy.random.SeedSequence`
spawn keys, so results are reproducible and independent of how trials are
batched across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .budget import SystemConfig, path_loss

# Spawn-key domains under the master seed.  Fading and symbol streams are
# further keyed by batch index.
STREAM_GEOMETRY = 0
STREAM_FADING = 1
STREAM_SYMBOLS = 2
STREAM_PHASES = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator derived from `seed` and an integer key path."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circular complex Gaussian draws, unit variance per entry."""
    z = rng.standard_normal(size=(2,) + tuple(shape))
    return (z[0] + 1j * z[1]) * math.sqrt(0.5)


def _grid_dims(L: int) -> tuple[int, int]:
    """Planar grid layout for L elements: square when L is a perfect square,
    otherwise the most-square rectangle (1 x L for primes)."""
    side = math.isqrt(L)
    if side * side == L:
        return side, side
    ny = next(d for d in range(side, 0, -1) if L % d == 0)
    return L // ny, ny


def array_response(L: int, az: float, el: float, d_over_lambda: float = 0.5) -> np.ndarray:
    """Planar-array response vector of length L.

    Element l (0-based) sits at grid coordinates x = l // ny, y = l % ny
    and contributes a unit-modulus phasor
    exp(j*2*pi*(d/lambda)*(x*sin(el)*sin(az) + y*cos(el))).
    """
    if L < 1:
        raise ValueError("array size must be positive")
    _, ny = _grid_dims(L)
    idx = np.arange(L)
    x = idx // ny
    y = idx % ny
    phase = 2.0 * np.pi * d_over_lambda * (x * np.sin(el) * np.sin(az) + y * np.cos(el))
    return np.exp(1j * phase)


@dataclass(frozen=True, eq=False)
class Geometry:
    """Fixed per-experiment geometry: angles, positions and large-scale gains."""

    user_aoa: np.ndarray   # (K, 2) azimuth/elevation of arrival at the RIS, per user
    ris_aod: np.ndarray    # (2,) azimuth/elevation of departure at the RIS toward the BS
    bs_aoa: np.ndarray     # (2,) azimuth/elevation of arrival at the BS
    user_pos: np.ndarray   # (K, 3) user positions, meters
    dist_user: np.ndarray  # (K,) user -> RIS distances
    dist_ris: float        # RIS -> BS distance
    alpha: np.ndarray      # (K,) large-scale gains, user -> RIS
    beta: float            # large-scale gain, RIS -> BS


def make_geometry(cfg: SystemConfig) -> Geometry:
    """Draw the fixed experiment geometry from the master seed.

    Users are placed uniformly over the semicircular disk of radius
    `user_radius` around `user_center`, on the side facing away from the
    BS (y >= center).  All angles are uniform on [0, 2*pi) as configured
    (elevations on [0, pi) when `restrict_elevation` is set); they are
    drawn independently of the positions, which only set the path losses.
    """
    rng = substream(cfg.seed, STREAM_GEOMETRY)
    K = cfg.K
    el_hi = np.pi if cfg.restrict_elevation else 2.0 * np.pi

    t = rng.uniform(0.0, np.pi, K)
    r = cfg.user_radius * np.sqrt(rng.uniform(0.0, 1.0, K))
    center = np.asarray(cfg.user_center)
    user_pos = np.column_stack([
        center[0] + r * np.cos(t),
        center[1] + r * np.sin(t),
        np.full(K, center[2]),
    ])

    user_aoa = np.column_stack([rng.uniform(0.0, 2.0 * np.pi, K), rng.uniform(0.0, el_hi, K)])
    ris_aod = np.array([rng.uniform(0.0, 2.0 * np.pi), rng.uniform(0.0, el_hi)])
    bs_aoa = np.array([rng.uniform(0.0, 2.0 * np.pi), rng.uniform(0.0, el_hi)])

    ris = np.asarray(cfg.ris_pos)
    dist_user = np.linalg.norm(user_pos - ris, axis=1)
    dist_ris = float(np.linalg.norm(ris - np.asarray(cfg.bs_pos)))
    alpha = path_loss(dist_user, cfg.pathloss_exp_user)
    beta = path_loss(dist_ris, cfg.pathloss_exp_ris)

    return Geometry(user_aoa, ris_aod, bs_aoa, user_pos, dist_user, dist_ris, alpha, beta)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One small-scale fading draw of both hops."""

    H1: np.ndarray  # (N, K) user -> RIS channel matrix
    H2: np.ndarray  # (M, N) RIS -> BS channel matrix


def los_components(geom: Geometry, cfg: SystemConfig) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic LoS parts: per-user steering columns (N, K) and the
    rank-one RIS->BS outer product (M, N)."""
    hbar = np.column_stack([
        array_response(cfg.N, az, el, cfg.d_over_lambda) for az, el in geom.user_aoa
    ])
    a_bs = array_response(cfg.M, geom.bs_aoa[0], geom.bs_aoa[1], cfg.d_over_lambda)
    a_ris = array_response(cfg.N, geom.ris_aod[0], geom.ris_aod[1], cfg.d_over_lambda)
    Hbar2 = np.outer(a_bs, a_ris.conj())
    return hbar, Hbar2


def sample_channel_batch(
    geom: Geometry, cfg: SystemConfig, rng: np.random.Generator, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw `count` independent realizations; returns (count, N, K) and
    (count, M, N) arrays.

    Each column of H1 mixes its fixed steering vector with fresh complex
    Gaussian noise at the user's Rician factor and is scaled so that
    E{||h_k||^2} = N * alpha_k; H2 is built the same way around the
    rank-one LoS part with E{||H2||_F^2} = M * N * beta.
    """
    hbar, Hbar2 = los_components(geom, cfg)
    eps = np.asarray(cfg.epsilon)

    h_nlos = crandn(rng, (count, cfg.N, cfg.K))
    H2_nlos = crandn(rng, (count, cfg.M, cfg.N))

    w_los = np.sqrt(eps / (eps + 1.0))
    w_nlos = np.sqrt(1.0 / (eps + 1.0))
    H1 = np.sqrt(geom.alpha) * (w_los * hbar + w_nlos * h_nlos)

    d = cfg.delta
    H2 = math.sqrt(geom.beta) * (
        math.sqrt(d / (d + 1.0)) * Hbar2 + math.sqrt(1.0 / (d + 1.0)) * H2_nlos
    )
    return H1, H2


def sample_channels(geom: Geometry, cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Draw a single realization from the given stream."""
    H1, H2 = sample_channel_batch(geom, cfg, rng, 1)
    return ChannelRealization(H1[0], H2[0])


def sample_user_channels(
    geom: Geometry, cfg: SystemConfig, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw only the user -> RIS hop, (count, N, K); used where the second
    hop is irrelevant (e.g. surface power measurement)."""
    hbar, _ = los_components(geom, cfg)
    eps = np.asarray(cfg.epsilon)
    h_nlos = crandn(rng, (count, cfg.N, cfg.K))
    return np.sqrt(geom.alpha) * (
        np.sqrt(eps / (eps + 1.0)) * hbar + np.sqrt(1.0 / (eps + 1.0)) * h_nlos
    )
