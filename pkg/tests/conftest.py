import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from xlris.config import SystemConfig

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def small_config(**kw) -> SystemConfig:
    """A few-hundred-element system that keeps estimator tests fast."""
    base = dict(ris_ny=16, ris_nz=2, user_ny=2, user_nz=2, bs_ny=4, bs_nz=4, K=4, P=2, Q=16, n_x=8,
                g_r_z=8, g_u_y=8, g_u_z=8, trials=3)
    base.update(kw)
    return SystemConfig(**base)


@pytest.fixture
def small_cfg():
    return small_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
