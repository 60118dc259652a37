import numpy as np
import pytest

from nvzeno import build_space, subspace_catalog


@pytest.fixture(scope="session")
def space2():
    return build_space(2)


@pytest.fixture(scope="session")
def catalog(space2):
    return subspace_catalog(space2)


@pytest.fixture()
def rng():
    return np.random.RandomState(171717)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)
