import numpy as np
import pytest

from oplebesgue import GeometricTail, L1Sequence, PsdMatrix


def make_rng(seed):
    return np.random.default_rng(seed)


def random_psd(rng, dim, rank=None, complex_entries=True):
    """Random PSD matrix with prescribed rank from a Gaussian factor."""
    r = rank if rank is not None else dim
    factor = rng.standard_normal((dim, r))
    if complex_entries:
        factor = factor + 1j * rng.standard_normal((dim, r))
    return PsdMatrix(factor @ factor.conj().T)


def random_hermitian(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (raw + raw.conj().T) / 2


def random_unitary(rng, dim):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(raw)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_sequence(rng, max_prefix=6):
    """Random L1Sequence mixing support gaps and optional geometric tails.

    Tail ratios stay >= 0.75 so that every value down to index 64 remains
    above the matrix engine's rank resolution; that is the shared ground on
    which the diagonal rules and the truncated matrix engine must agree.
    """
    n = int(rng.integers(0, max_prefix + 1))
    prefix = tuple(
        float(rng.uniform(0.1, 3.0)) if rng.random() > 0.3 else 0.0 for _ in range(n)
    )
    if rng.random() < 0.5:
        tail = GeometricTail(float(rng.uniform(0.2, 2.0)), float(rng.uniform(0.75, 0.95)))
    else:
        tail = None
    if not prefix and tail is None:
        tail = GeometricTail(1.0, 0.75)
    return L1Sequence(prefix, tail)


@pytest.fixture
def rng():
    return make_rng(1234)
