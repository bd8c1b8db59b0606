import pathlib

import numpy as np
import pytest

from rateaudit.cli import random_ccp_spec

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


def ccp_spec(seed: int, d: int):
    """Deterministic random CCP spec used across the oracle tests."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, d]))
    return random_ccp_spec(rng, d)


def random_hermitian(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_density(rng, d: int) -> np.ndarray:
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T + 0.1 * np.eye(d)
    return rho / np.trace(rho).real
