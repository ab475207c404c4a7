import numpy as np
import pytest

from arisim import (
    Mode,
    PhaseConfig,
    SystemConfig,
    make_geometry,
    resolve_budget,
)
from arisim.channel import STREAM_PHASES, substream


@pytest.fixture(scope="session")
def desk_cfg():
    """Small instance used across modules: cheap but fully featured."""
    return SystemConfig(M=16, N=4, K=2, epsilon=(10.0, 10.0), b=1, trials=400, seed=7)


@pytest.fixture(scope="session")
def desk(desk_cfg):
    geom = make_geometry(desk_cfg)
    phases = PhaseConfig.random(desk_cfg.N, substream(desk_cfg.seed, STREAM_PHASES, desk_cfg.N))
    budget = resolve_budget(desk_cfg, geom.alpha, Mode.ACTIVE)
    return desk_cfg, geom, phases, budget


@pytest.fixture(scope="session")
def paper_cfg():
    """Full-scale baseline parameters."""
    return SystemConfig()


def random_phases(n, seed):
    return PhaseConfig.random(n, np.random.default_rng(seed))
