import numpy as np
import pytest

from ensemble import SparseInstance
from linalg import DesignMatrix
from schemas import DesignKind


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def gaussian(rng):
    """Seeded 20 x 40 Gaussian matrix with N(0, 1/n) entries"""
    return rng.normal(0.0, 1.0 / np.sqrt(20), size=(20, 40))


def planted(phi, support, values=None, seed=0) -> SparseInstance:
    """Noiseless instance with the given 0-based support on an explicit matrix"""
    phi = DesignMatrix(phi)
    support = np.sort(np.asarray(support, dtype=np.intp))
    if values is None:
        values = np.random.default_rng(seed).choice([-1.0, 1.0], size=support.size) * (
            1.0 + np.random.default_rng(seed + 1).random(support.size)
        )
    x = np.zeros(phi.cols)
    x[support] = values
    return SparseInstance(
        phi=phi,
        x_star=x,
        s_star=support,
        y=phi.entries @ x,
        sigma2=0.0,
        seed=seed,
        design=DesignKind.ORTHONORMAL if phi.rows == phi.cols else DesignKind.GAUSSIAN,
    )


@pytest.fixture
def identity_instance():
    """Phi = I_12 with a 3-sparse signal on features 1, 5 and 9"""
    return planted(np.eye(12), [1, 5, 9], values=[2.0, -1.5, 0.7])
