import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def capital_claims():
    # sources A=0, B=1, C=2; attribute Capital(Germany)=0; Berlin=0, Frankfurt=1
    return [(0, 0, 0), (1, 0, 0), (2, 0, 1)]


@pytest.fixture(scope="session")
def small_synthetic():
    from ltdrbm.synthgen import SynthConfig, generate
    return generate(SynthConfig(n_sources=8, n_attributes=150, rng_seed=11))


def random_model(rng, n):
    from ltdrbm.reliability import ReliabilityModel
    return ReliabilityModel(rng.uniform(0.01, 0.99, n), rng.uniform(0.01, 0.99, n),
                            rng.uniform(0.01, 0.99))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
        terminalreporter.write_line(line)
