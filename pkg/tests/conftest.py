import numpy as np
import pytest

from anamorph.scheme import SecurityConfig, keygen
from anamorph.states import random_density, random_pd_density

ACCEPTANCE_LINES = []

CORPUS_DIMS = [(1, 1), (2, 1), (2, 2), (3, 2)]


def make_corpus(seed=2024, per_dims=25):
    """Random (mo, mc, key) triples with weak-mode eta, ``per_dims`` per size."""
    rng = np.random.default_rng(seed)
    cfg = SecurityConfig(1)
    out = []
    for d1, d2 in CORPUS_DIMS:
        for _ in range(per_dims):
            mo = random_pd_density(2**d1, rng, floor=0.2)
            mc = random_density(2**d2, rng)
            out.append((mo, mc, keygen(d1, d2, cfg, "weak", mo, mc, rng)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return make_corpus()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
