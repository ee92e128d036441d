"""Redundant dictionaries and their combinatorial/geometric invariants.

A dictionary is an m x N complex matrix whose columns (atoms) have unit
Euclidean norm; real dictionaries are the zero-imaginary special case.
This module computes the invariants everything else is built on:

* coherence         -- largest |<A_i, A_j>| over distinct atoms,
* spark             -- smallest number of linearly dependent columns
                       (an Infinite sentinel when all N columns are
                       independent, since the minimum is then vacuous),
* generalized coherence of degree k -- cosine of the smallest first
  principal angle between the spans of two disjoint k-subsets of atoms,
* numerical ranks of column submatrices.

All rank decisions are relative to the largest singular value of the
matrix being tested, with default tolerance RANK_TOL.  Every operation is
a pure function of an immutable Dictionary, so concurrent use is safe;
subset enumerations run in a canonical order and results are
deterministic.

Note on degree-k coherence: the definition allows subset sizes up to k,
but enlarging a subset enlarges its span and cannot decrease the maximal
cosine, so only |I| = |J| = k is enumerated.  For 2k > N there is no pair
of disjoint size-k subsets and the operation raises rather than guessing
a semantics for forced overlaps.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetExceeded,
    InvalidSupport,
    NonFiniteEntry,
    NotNormalized,
    OverlappingSupports,
    SingleAtom,
    SparsityTooLarge,
    ZeroColumn,
)

RANK_TOL = 1e-10
NORM_TOL = 1e-8

#: Spark sentinel for a dictionary whose N columns are linearly independent.
INFINITE = math.inf

_BATCH = 4096  # subsets per SVD batch; keeps peak memory small


def default_budget() -> int | None:
    """Optional global enumeration cap from the LSA_BUDGET variable."""
    raw = os.environ.get("LSA_BUDGET")
    return int(raw) if raw else None


@dataclass(frozen=True)
class Dictionary:
    """Immutable m x N matrix with unit-norm columns.

    Build instances through :func:`new_dictionary`, which validates (or
    performs) the normalization.  `entries` is complex128 and
    write-protected.
    """

    entries: np.ndarray
    column_norm_tol: float = NORM_TOL

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.entries.shape[1]

    @property
    def is_real(self) -> bool:
        return not np.any(self.entries.imag)

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j]

    def columns(self, support) -> np.ndarray:
        return self.entries[:, list(support)]


def new_dictionary(entries, normalize: bool = False, tol: float = NORM_TOL) -> Dictionary:
    """Validate (or perform) column normalization and freeze the matrix.

    With `normalize` unset, any column whose norm deviates from 1 by more
    than `tol` raises NotNormalized.  With it set, columns are rescaled
    and a column of norm below `tol` raises ZeroColumn.
    """
    A = np.array(entries, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidSupport(f"dictionary must be a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise NonFiniteEntry("dictionary entries must be finite")
    norms = np.linalg.norm(A, axis=0)
    if normalize:
        if np.any(norms < tol):
            bad = int(np.argmin(norms))
            raise ZeroColumn(f"column {bad} has norm {norms[bad]:.3e} < {tol:.3e}")
        A = A / norms
    else:
        dev = np.abs(norms - 1.0)
        if np.any(dev > tol):
            bad = int(np.argmax(dev))
            raise NotNormalized(
                f"column {bad} has norm {norms[bad]!r}, off by {dev[bad]:.3e} > {tol:.3e}"
            )
    A.setflags(write=False)
    return Dictionary(entries=A, column_norm_tol=tol)


def normalize_support(indices, n_atoms: int) -> tuple[int, ...]:
    """Return a sorted duplicate-free index tuple, validated against N."""
    idx = tuple(sorted(int(i) for i in indices))
    if len(idx) == 0:
        raise InvalidSupport("support must be non-empty")
    if len(set(idx)) != len(idx):
        raise InvalidSupport(f"support has duplicate indices: {idx}")
    if idx[0] < 0 or idx[-1] >= n_atoms:
        raise InvalidSupport(f"support {idx} out of range for N={n_atoms}")
    return idx


def orthonormal_span(M: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the column span of M at the given relative rank tolerance."""
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return U[:, :0], 0
    r = int(np.count_nonzero(s > rank_tol * s[0]))
    return U[:, :r], r


def matrix_rank(M: np.ndarray, rank_tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def coherence(D: Dictionary) -> float:
    """Largest modulus of an inner product between two distinct atoms."""
    if D.n_atoms < 2:
        raise SingleAtom("coherence needs at least two atoms")
    G = np.abs(D.entries.conj().T @ D.entries)
    np.fill_diagonal(G, 0.0)
    return float(G.max())


def support_rank(D: Dictionary, support, rank_tol: float = RANK_TOL) -> int:
    """Numerical rank of the column submatrix A_S."""
    S = normalize_support(support, D.n_atoms)
    return matrix_rank(D.columns(S), rank_tol)


def _batched_min_max_sv(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest singular values of a (batch, m, s) stack."""
    s = np.linalg.svd(blocks, compute_uv=False)
    return s[:, -1], s[:, 0]


def spark(
    D: Dictionary,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> int | float:
    """Smallest s such that some s columns are linearly dependent.

    Exhaustive search in increasing subset size, stopping at the first
    size with a dependent subset (a subset is dependent when its smallest
    singular value falls below rank_tol times its largest).  Returns the
    INFINITE sentinel when all N columns are independent.  `budget` caps
    the number of subsets examined; exceeding it raises BudgetExceeded
    rather than returning a guess.
    """
    A = D.entries
    N = D.n_atoms
    r = matrix_rank(A, rank_tol)
    if r == N:
        return INFINITE
    examined = 0
    for size in range(2, r + 1):
        combos = itertools.combinations(range(N), size)
        while True:
            chunk = list(itertools.islice(combos, _BATCH))
            if not chunk:
                break
            examined += len(chunk)
            if budget is not None and examined > budget:
                raise BudgetExceeded(
                    f"spark search examined more than {budget} subsets (at size {size})"
                )
            idx = np.asarray(chunk)
            blocks = A[:, idx].transpose(1, 0, 2)  # (batch, m, size)
            smin, smax = _batched_min_max_sv(blocks)
            if np.any(smin < rank_tol * smax):
                return size
    # every size <= rank(A) subset was independent, and any rank+1 columns
    # are dependent, so the spark is exactly rank + 1
    return r + 1


def spark_at_most(
    D: Dictionary,
    cap: int,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> int | None:
    """The spark if it is <= cap, else None (meaning "greater than cap").

    Same exhaustive search as :func:`spark` but bounded, for predicates
    like k < spark/2 that only need a one-sided answer at desk scale.
    """
    A = D.entries
    N = D.n_atoms
    examined = 0
    for size in range(2, min(cap, N) + 1):
        if size > D.m:
            return size  # more columns than rows is dependent outright
        combos = itertools.combinations(range(N), size)
        while True:
            chunk = list(itertools.islice(combos, _BATCH))
            if not chunk:
                break
            examined += len(chunk)
            if budget is not None and examined > budget:
                raise BudgetExceeded(f"bounded spark search exceeded budget {budget}")
            idx = np.asarray(chunk)
            blocks = A[:, idx].transpose(1, 0, 2)
            smin, smax = _batched_min_max_sv(blocks)
            if np.any(smin < rank_tol * smax):
                return size
    return None


def first_dependent_subset(
    D: Dictionary,
    max_size: int,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> tuple[int, ...] | None:
    """First (in size-then-lex order) dependent subset of size <= max_size, or None."""
    A = D.entries
    N = D.n_atoms
    examined = 0
    for size in range(2, max_size + 1):
        for S in itertools.combinations(range(N), size):
            examined += 1
            if budget is not None and examined > budget:
                raise BudgetExceeded(f"dependent-subset search exceeded budget {budget}")
            sub = A[:, S]
            s = np.linalg.svd(sub, compute_uv=False)
            # svd yields min(m, size) values; size > m is dependent outright
            if size > A.shape[0] or s[-1] < rank_tol * s[0]:
                return S
    return None


def principal_angle_cos(
    D: Dictionary,
    support_i,
    support_j,
    rank_tol: float = RANK_TOL,
) -> float:
    """Cosine of the first principal angle between span(A_I) and span(A_J).

    Computed as the largest singular value of Q_I^H Q_J where Q_I, Q_J are
    orthonormal bases of the two spans (rank-deficient subsets reduce to
    their span's dimension).  Clamped to [0, 1].
    """
    I = normalize_support(support_i, D.n_atoms)
    J = normalize_support(support_j, D.n_atoms)
    if set(I) & set(J):
        raise OverlappingSupports(f"supports {I} and {J} overlap")
    QI, ri = orthonormal_span(D.columns(I), rank_tol)
    QJ, rj = orthonormal_span(D.columns(J), rank_tol)
    if ri == 0 or rj == 0:
        return 0.0
    s = np.linalg.svd(QI.conj().T @ QJ, compute_uv=False)
    return float(min(max(s[0], 0.0), 1.0))


def generalized_coherence(
    D: Dictionary,
    k: int,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> float:
    """Degree-k coherence: max first-principal-angle cosine over disjoint k-subsets.

    Enumerates every unordered pair of disjoint size-k subsets (see module
    docstring for why exactly k suffices).  Requires 2k <= N.
    """
    if k < 1:
        raise SparsityTooLarge(f"k must be >= 1, got {k}")
    N = D.n_atoms
    if 2 * k > N:
        raise SparsityTooLarge(f"generalized coherence of degree {k} needs 2k <= N = {N}")
    if k == 1:
        return coherence(D)

    subsets = list(itertools.combinations(range(N), k))
    n_sub = len(subsets)
    if budget is not None and n_sub * (n_sub - 1) // 2 > budget:
        raise BudgetExceeded(
            f"degree-{k} coherence needs {n_sub * (n_sub - 1) // 2} subset pairs > budget {budget}"
        )

    # Orthonormal bases, zero-padded to k columns: padding adds zero singular
    # values to the pair products without changing the largest one.
    Q = np.zeros((n_sub, D.m, k), dtype=np.complex128)
    for t, S in enumerate(subsets):
        basis, r = orthonormal_span(D.columns(S), rank_tol)
        Q[t, :, :r] = basis
    masks = np.array([sum(1 << i for i in S) for S in subsets], dtype=np.int64)

    best = 0.0
    for start in range(0, n_sub, 256):
        stop = min(start + 256, n_sub)
        prod = np.einsum("imr,jms->ijrs", Q[start:stop].conj(), Q)
        sv = np.linalg.svd(prod, compute_uv=False)[..., 0]
        disjoint = (masks[start:stop, None] & masks[None, :]) == 0
        if np.any(disjoint):
            best = max(best, float(sv[disjoint].max()))
    return min(max(best, 0.0), 1.0)


@dataclass(frozen=True)
class InvariantReport:
    """Invariants of one dictionary, with the tolerances used to decide them."""

    coherence: float
    spark: int | float
    generalized_coherence: dict[int, float]
    rank: int
    rank_tol: float
    column_norm_tol: float

    @property
    def spark_is_infinite(self) -> bool:
        return self.spark == INFINITE


def invariant_report(
    D: Dictionary,
    k_max: int = 1,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> InvariantReport:
    """Coherence, spark, mu_1..mu_k_max, and rank in one report."""
    mu = coherence(D)
    gen = {1: mu}
    for k in range(2, k_max + 1):
        gen[k] = generalized_coherence(D, k, rank_tol=rank_tol, budget=budget)
    return InvariantReport(
        coherence=mu,
        spark=spark(D, rank_tol=rank_tol, budget=budget),
        generalized_coherence=gen,
        rank=matrix_rank(D.entries, rank_tol),
        rank_tol=rank_tol,
        column_norm_tol=D.column_norm_tol,
    )
