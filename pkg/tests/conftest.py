import pytest

from coexsim import MS, SEC, McsProfile, PhyParams, Sensing
from coexsim.config import ExperimentConfig
from coexsim.scenarios import resolve_point


@pytest.fixture(scope="session")
def phy():
    return PhyParams()


@pytest.fixture(scope="session")
def mcs():
    return McsProfile()


def fair_point(n, ton_ms, n_agg, mode, sensing=Sensing.PERFECT, horizon_s=10,
               seed=1):
    """Resolved fair-allocation operating point (analytics + SimConfig)."""
    cfg = ExperimentConfig()
    cfg.seed = seed
    cfg.stations.n = n
    cfg.stations.n_agg = n_agg
    cfg.sched.t_on = ton_ms * MS
    cfg.sim.horizon = horizon_s * SEC
    return resolve_point(cfg, mode=mode, sensing=sensing)
