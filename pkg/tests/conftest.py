"""Shared fixtures and independent oracle implementations.

The oracles here deliberately avoid the library's own code paths: spark
and support ranks via numpy.linalg.matrix_rank over explicit subset
loops, residuals via orthonormal projectors from scipy.linalg.orth,
principal angles via scipy.linalg.subspace_angles.  Expected values in
the tests were computed with these and frozen.
"""

import itertools

import numpy as np
import pytest
import scipy.linalg

from lsa import bounds as bounds_mod


def brute_coherence(A: np.ndarray) -> float:
    best = 0.0
    for i in range(A.shape[1]):
        for j in range(i + 1, A.shape[1]):
            best = max(best, abs(np.vdot(A[:, i], A[:, j])))
    return best


def brute_spark(A: np.ndarray) -> float:
    N = A.shape[1]
    if np.linalg.matrix_rank(A) == N:
        return float("inf")
    for size in range(2, N + 1):
        for S in itertools.combinations(range(N), size):
            if np.linalg.matrix_rank(A[:, S]) < size:
                return size
    raise AssertionError("unreachable")


def projector_residual(A: np.ndarray, support, b: np.ndarray) -> float:
    """||b - P_S b|| via an orthonormal basis from scipy.linalg.orth."""
    Q = scipy.linalg.orth(A[:, list(support)])
    return float(np.linalg.norm(b - Q @ (Q.conj().T @ b)))


def brute_best_residual(A: np.ndarray, b: np.ndarray, k: int) -> float:
    """Optimal residual over all supports of size <= k, via lstsq."""
    best = float(np.linalg.norm(b))
    for size in range(1, k + 1):
        for S in itertools.combinations(range(A.shape[1]), size):
            x = np.linalg.lstsq(A[:, S], b, rcond=None)[0]
            best = min(best, float(np.linalg.norm(A[:, S] @ x - b)))
    return best


def first_principal_cosine(X: np.ndarray, Y: np.ndarray) -> float:
    angles = scipy.linalg.subspace_angles(X, Y)
    return float(np.cos(angles.min()))


@pytest.fixture(scope="session")
def small_corpus():
    """12 seeded Gaussian dictionaries for property tests (m 2..6, N 4..12)."""
    rng = np.random.default_rng(20240811)
    out = []
    for _ in range(12):
        m = int(rng.integers(2, 7))
        n = int(rng.integers(max(4, m), 13))
        out.append(bounds_mod.random_dictionary(m, n, seed=int(rng.integers(0, 2**31))))
    return out
