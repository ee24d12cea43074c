import numpy as np
import pytest
from hypothesis import settings

from robust_mpmab.model import BetaRewards, DeterministicRewards, SystemConfig

settings.register_profile("ci", max_examples=50, deadline=None, derandomize=True)
settings.register_profile("dev", max_examples=10, deadline=None)
settings.load_profile("ci")

PAPER_MEANS = np.array([[0.8, 0.6, 0.4], [0.2, 0.7, 0.3], [0.1, 0.7, 0.5]])
FIXTURE = np.array([[0.9, 0.2], [0.3, 0.8]])

ACCEPTANCE_LINES = []


def paper_config(**kw):
    base = dict(K=3, M=3, means=PAPER_MEANS, reward_model=BetaRewards(2.0), delta_exp=0.0,
                epsilon=1e-4, kappa=3.0, beta=2.0, T0=200, c2=200, c3=500, epochs=7, base_seed=0)
    base.update(kw)
    return SystemConfig(**base)


@pytest.fixture
def paper_cfg():
    return paper_config()


@pytest.fixture
def det_cfg():
    return paper_config(reward_model=DeterministicRewards())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
