import numpy as np
import pytest

from polsarcd import FLEVOLAND_B1, WishartParams, sample
from polsarcd.model import derive_seed


@pytest.fixture(scope="session")
def b1() -> np.ndarray:
    return FLEVOLAND_B1


@pytest.fixture(scope="session")
def theta_b1() -> WishartParams:
    return WishartParams(FLEVOLAND_B1, 4.0)


@pytest.fixture(scope="session")
def sample_pair(theta_b1):
    """Two independent 40-observation samples from the same law."""
    x = sample(theta_b1, 40, derive_seed(101, 0))
    y = sample(theta_b1, 40, derive_seed(101, 1))
    return x, y


def random_spd(rng: np.random.Generator, p: int) -> np.ndarray:
    """Random Hermitian positive-definite matrix with unit-scale eigenvalues."""
    a = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    m = a @ a.conj().T / p + 0.1 * np.eye(p)
    return (m + m.conj().T) / 2.0


def random_hermitian(rng: np.random.Generator, p: int) -> np.ndarray:
    a = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    return (a + a.conj().T) / 2.0
