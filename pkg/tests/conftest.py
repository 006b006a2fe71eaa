import numpy as np
import pytest

from splicecop import builtin_section, context, random_section
from splicecop.config import BUILTIN_NAMES


@pytest.fixture(scope="session")
def ctxs():
    """Evaluation contexts for every builtin section, keyed by name."""
    return {name: context(builtin_section(name)) for name in BUILTIN_NAMES}


@pytest.fixture(scope="session")
def ex1(ctxs):
    return ctxs["example-1"]


@pytest.fixture(scope="session")
def ex3(ctxs):
    return ctxs["example-2"]


@pytest.fixture(scope="session")
def random_ctxs():
    """Ten generator sections with fixed seeds."""
    return [context(random_section(seed, samples=1024)) for seed in range(10)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
