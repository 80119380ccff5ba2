import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paracheck.models import builtin_models, evaluate_structure
from paracheck.sampling import derive_rng, random_vectors, sample_points

TEST_SEED = 42
TEST_POINTS = 25
TEST_TUPLES = 20


@pytest.fixture(scope="session")
def models():
    return builtin_models()


def _structure(models, name, npoints=TEST_POINTS):
    m = models[name]
    pts = sample_points(m.domain, npoints, derive_rng(TEST_SEED, name, "points"))
    return evaluate_structure(m, pts)


@pytest.fixture(scope="session")
def e1(models):
    return _structure(models, "E1")


@pytest.fixture(scope="session")
def e2(models):
    return _structure(models, "E2")


@pytest.fixture(scope="session")
def n1(models):
    return _structure(models, "N1")


@pytest.fixture(scope="session")
def f0(models):
    return _structure(models, "F0")


@pytest.fixture(scope="session")
def vectors():
    def make(struct, tuples=TEST_TUPLES, tag="vectors"):
        rng = derive_rng(TEST_SEED, tag, struct.dim, struct.npoints)
        return random_vectors(rng, struct.npoints, 2 * tuples, struct.dim)

    return make


@pytest.fixture()
def rng():
    return np.random.default_rng(20240615)
