import numpy as np
import pytest

from saginmm.config import default_config, small_config
from saginmm.scenario import deploy_scenario


@pytest.fixture(scope="session")
def small_world():
    """Deployed desk-scale scenario shared by read-only tests."""
    return deploy_scenario(small_config())


@pytest.fixture(scope="session")
def default_world():
    """Deployed full-size reference scenario (9 GN + 9 AN + 2 SN cells)."""
    return deploy_scenario(default_config())


def tiny_config(seed=3, episodes=4, steps=20, batch=16):
    """Small-budget training config for fast loop tests."""
    cfg = small_config(seed=seed)
    cfg.train.episodes = episodes
    cfg.env.n_max_steps = steps
    cfg.ddqn.batch_size = batch
    cfg.csac.batch_size = batch
    cfg.env.r_min_bps = 1e6
    cfg.env.r_max_bps = 9e6
    return cfg


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
