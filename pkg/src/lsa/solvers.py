"""Exhaustive enumeration engines for list-sparse and list-approximate queries.

Two query types share the machinery here:

* list-sparse: all supports of size <= k whose least-squares residual
  attains the global minimum over k-sparse vectors (ties within eq_tol),
  reduced to inclusion-minimal supports;
* list-approx: all supports with residual <= eps, counted either over
  supports of size exactly k (the default) or over inclusion-minimal
  supports of size <= k.  Both counting semantics exist in the wild, so
  both are exposed; `exact-size` is the default and is what the counting
  examples in this package predict.

Everything is ground truth by enumeration -- no greedy or convex
heuristics.  Supports are enumerated in size-then-lexicographic order and
all outputs are canonically sorted, so results are deterministic.  An
optional budget caps the number of supports examined and raises
BudgetExceeded instead of silently running for hours.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import RANK_TOL, Dictionary, normalize_support, orthonormal_span, spark
from .errors import (
    BudgetExceeded,
    InputError,
    WitnessNotFound,
    ZeroTarget,
)

EQ_TOL = 1e-9

EXACT_SIZE = "exact-size"
MINIMAL_SUPPORTS = "minimal-supports"


@dataclass(frozen=True)
class SparseSolution:
    """One representation: a support, its coefficients, and the residual.

    Coefficients are the minimum-norm least-squares solution on the
    support; `coeffs_unique` is False exactly when A_S is column-rank
    deficient, in which case infinitely many coefficient vectors achieve
    the same residual.
    """

    support: tuple[int, ...]
    coefficients: np.ndarray
    residual: float
    coeffs_unique: bool


@dataclass(frozen=True)
class Query:
    b: np.ndarray
    k: int
    eps: float | None  # None marks a list-sparse (optimal-residual) query

    @property
    def is_optimal(self) -> bool:
        return self.eps is None


@dataclass(frozen=True)
class SolutionList:
    """All solutions for one query, canonically ordered by support.

    `support_count` is the number of distinct supports listed.  For
    list-sparse queries `finite` is False when some support of size <= k
    with rank-deficient columns attains the optimal residual (infinitely
    many coefficient representations); for list-approx queries it is
    False when any *listed* support is rank-deficient.
    """

    query: Query
    solutions: tuple[SparseSolution, ...]
    optimal_residual: float
    finite: bool
    support_count: int
    restricted_counts: dict[int, int] = field(default_factory=dict)

    @property
    def supports(self) -> list[tuple[int, ...]]:
        return [s.support for s in self.solutions]


def _check_target(D: Dictionary, b) -> np.ndarray:
    v = np.asarray(b, dtype=np.complex128).reshape(-1)
    if v.shape[0] != D.m:
        raise InputError(f"target has length {v.shape[0]}, dictionary has m={D.m}")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise InputError("target has non-finite entries")
    if np.linalg.norm(v) == 0.0:
        raise ZeroTarget("target vector is zero")
    return v


def least_squares(D: Dictionary, support, b, rank_tol: float = RANK_TOL) -> SparseSolution:
    """Minimum-norm least-squares fit of b on the columns in `support`."""
    S = normalize_support(support, D.n_atoms)
    v = np.asarray(b, dtype=np.complex128).reshape(-1)
    if v.shape[0] != D.m:
        raise InputError(f"target has length {v.shape[0]}, dictionary has m={D.m}")
    As = D.columns(S)
    U, s, Vh = np.linalg.svd(As, full_matrices=False)
    r = int(np.count_nonzero(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
    coeff = Vh[:r].conj().T @ ((U[:, :r].conj().T @ v) / s[:r])
    residual = float(np.linalg.norm(As @ coeff - v))
    return SparseSolution(
        support=S,
        coefficients=coeff,
        residual=residual,
        coeffs_unique=(r == len(S)),
    )


class SupportTable:
    """Orthonormal span bases for every support of size <= k (canonical order).

    The heavy lifting of both solvers: residuals for a batch of targets
    come from one projection product, ||b - P_S b||^2 = ||b||^2 -
    ||Q_S^H b||^2.
    """

    def __init__(
        self,
        D: Dictionary,
        k: int,
        rank_tol: float = RANK_TOL,
        budget: int | None = None,
        sizes: tuple[int, ...] | None = None,
    ):
        if not 1 <= k <= D.n_atoms:
            raise InputError(f"k must be in [1, {D.n_atoms}], got {k}")
        self.dictionary = D
        self.k = k
        self.rank_tol = rank_tol
        sizes = sizes if sizes is not None else tuple(range(1, k + 1))
        total = sum(math.comb(D.n_atoms, s) for s in sizes)
        if budget is not None and total > budget:
            raise BudgetExceeded(f"{total} supports of sizes {sizes} exceed budget {budget}")
        supports: list[tuple[int, ...]] = []
        ranks: list[int] = []
        bases: list[np.ndarray] = []
        for size in sizes:
            for S in itertools.combinations(range(D.n_atoms), size):
                Q, r = orthonormal_span(D.columns(S), rank_tol)
                supports.append(S)
                ranks.append(r)
                bases.append(Q)
        self.supports = supports
        self.ranks = np.array(ranks)
        self._q = np.hstack(bases) if bases else np.zeros((D.m, 0))
        self._offsets = np.concatenate([[0], np.cumsum(self.ranks)[:-1]])

    def residuals(self, targets: np.ndarray) -> np.ndarray:
        """Residual matrix (n_supports, n_targets) for column-stacked targets."""
        B = np.asarray(targets, dtype=np.complex128)
        if B.ndim == 1:
            B = B[:, None]
        proj = np.abs(self._q.conj().T @ B) ** 2
        # guard reduceat against zero-rank supports (duplicate offsets)
        sums = np.add.reduceat(proj, self._offsets, axis=0) if proj.shape[0] else np.zeros(
            (len(self.supports), B.shape[1])
        )
        zero_rank = self.ranks == 0
        if np.any(zero_rank):
            sums[zero_rank] = 0.0
        norms2 = np.sum(np.abs(B) ** 2, axis=0)
        res2 = np.maximum(norms2[None, :] - sums, 0.0)
        res = np.sqrt(res2)
        # ||b||^2 - ||Q^H b||^2 cancels catastrophically near zero (error
        # ~sqrt(machine eps) in the residual); recompute those entries with
        # the backward-stable direct form ||b - Q Q^H b||
        near = np.argwhere(res2 <= 1e-12 * np.maximum(norms2, 1e-300)[None, :])
        for i, t in near:
            off = self._offsets[i]
            Q = self._q[:, off : off + self.ranks[i]]
            b = B[:, t]
            res[i, t] = np.linalg.norm(b - Q @ (Q.conj().T @ b))
        return res


def _minimal_supports(supports: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Inclusion-minimal members, input in any order."""
    by_size = sorted(supports, key=lambda s: (len(s), s))
    kept: list[tuple[int, ...]] = []
    kept_masks: list[int] = []
    for S in by_size:
        mask = sum(1 << i for i in S)
        if any(km & mask == km for km in kept_masks):
            continue
        kept.append(S)
        kept_masks.append(mask)
    return sorted(kept)


def solve_list_sparse(
    D: Dictionary,
    b,
    k: int,
    eq_tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> SolutionList:
    """List every inclusion-minimal support attaining the optimal k-sparse residual.

    Enumerates all supports of size <= k.  A support qualifies when its
    residual is <= optimal * (1 + eq_tol) + eq_tol; strict supersets of a
    qualifying support are suppressed (their extra atoms are padding, not
    different optima).  The zero vector (empty support) participates, so
    a target orthogonal to every atom yields the single empty solution.
    """
    v = _check_target(D, b)
    table = SupportTable(D, k, rank_tol=rank_tol, budget=budget)
    res = table.residuals(v)[:, 0]
    norm_b = float(np.linalg.norm(v))
    optimal = float(min(res.min(), norm_b))
    threshold = optimal * (1.0 + eq_tol) + eq_tol

    qualifying = [S for S, r in zip(table.supports, res) if r <= threshold]
    infinite_witness = any(
        table.ranks[i] < len(table.supports[i])
        for i in range(len(table.supports))
        if res[i] <= threshold
    )
    if norm_b <= threshold:
        qualifying.append(())
    minimal = _minimal_supports(qualifying)

    solutions = []
    for S in minimal:
        if S == ():
            solutions.append(
                SparseSolution(support=(), coefficients=np.zeros(0, dtype=np.complex128),
                               residual=norm_b, coeffs_unique=True)
            )
        else:
            solutions.append(least_squares(D, S, v, rank_tol=rank_tol))
    solutions.sort(key=lambda s: s.support)
    return SolutionList(
        query=Query(b=v, k=k, eps=None),
        solutions=tuple(solutions),
        optimal_residual=optimal,
        finite=not infinite_witness,
        support_count=len(solutions),
    )


def solve_list_approx(
    D: Dictionary,
    b,
    k: int,
    eps: float,
    mode: str = EXACT_SIZE,
    tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> SolutionList:
    """List every support whose residual is within eps of the target.

    `exact-size` mode counts supports of cardinality exactly k (what the
    closed-form counting examples predict); `minimal-supports` mode lists
    inclusion-minimal qualifying supports of size <= k.  A support
    qualifies when residual <= eps + tol.
    """
    if eps < 0:
        raise InputError(f"eps must be >= 0, got {eps}")
    if mode not in (EXACT_SIZE, MINIMAL_SUPPORTS):
        raise InputError(f"unknown mode {mode!r}")
    v = _check_target(D, b)
    sizes = (k,) if mode == EXACT_SIZE else tuple(range(1, k + 1))
    table = SupportTable(D, k, rank_tol=rank_tol, budget=budget, sizes=sizes)
    res = table.residuals(v)[:, 0]
    cutoff = eps + tol

    hits = [i for i in range(len(table.supports)) if res[i] <= cutoff]
    if mode == MINIMAL_SUPPORTS:
        chosen = _minimal_supports([table.supports[i] for i in hits])
    else:
        chosen = sorted(table.supports[i] for i in hits)
    chosen_set = set(chosen)
    rank_of = {table.supports[i]: int(table.ranks[i]) for i in hits}

    solutions = tuple(least_squares(D, S, v, rank_tol=rank_tol) for S in chosen)
    finite = all(rank_of[S] == len(S) for S in chosen_set)
    optimal = float(min(res.min(), np.linalg.norm(v)))
    return SolutionList(
        query=Query(b=v, k=k, eps=float(eps)),
        solutions=solutions,
        optimal_residual=optimal,
        finite=finite,
        support_count=len(solutions),
    )


def restricted_list_size(
    supports,
    R: int,
    budget: int | None = None,
) -> int:
    """Largest sub-collection in which every atom occurs in at most R members.

    Exact branch-and-bound over the collection in canonical order: a
    greedy pass supplies the incumbent, and a capacity bound (remaining
    atom capacity divided by the smallest remaining support) prunes.
    Deterministic; raises BudgetExceeded rather than returning an
    unproven value when the node budget runs out.
    """
    if R < 1:
        raise InputError(f"R must be >= 1, got {R}")
    sets = sorted({tuple(sorted(S)) for S in supports})
    # empty supports consume no capacity and are always packable
    free = sum(1 for S in sets if len(S) == 0)
    sets = [S for S in sets if len(S) > 0]
    if not sets:
        return free
    atoms = sorted({i for S in sets for i in S})
    pos = {a: t for t, a in enumerate(atoms)}
    members = [tuple(pos[a] for a in S) for S in sets]
    n = len(members)

    caps = np.full(len(atoms), R, dtype=np.int64)

    def greedy() -> int:
        c = caps.copy()
        count = 0
        for S in members:
            if all(c[a] > 0 for a in S):
                for a in S:
                    c[a] -= 1
                count += 1
        return count

    best = greedy()
    min_size = min(len(S) for S in members)

    # iterative include/exclude search; the capacity bound is
    # chosen + floor(total remaining capacity / smallest support size)
    stack = [(0, 0, caps.copy())]
    nodes = 0
    while stack:
        idx, chosen, c = stack.pop()
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(f"set packing exceeded node budget {budget}")
        if chosen > best:
            best = chosen
        if idx == n:
            continue
        remaining = n - idx
        if chosen + min(remaining, int(c.sum()) // min_size) <= best:
            continue
        # exclude branch
        stack.append((idx + 1, chosen, c))
        # include branch, when capacity allows
        S = members[idx]
        if all(c[a] > 0 for a in S):
            c2 = c.copy()
            for a in S:
                c2[a] -= 1
            stack.append((idx + 1, chosen + 1, c2))
    return best + free


@dataclass(frozen=True)
class WitnessResult:
    b: np.ndarray
    verified_count: int
    finite: bool
    case: int  # 1, 2, or 3 per the dependence structure of the dictionary


def _random_combination(rng, A_sub: np.ndarray, complex_draw: bool) -> np.ndarray:
    w = rng.standard_normal(A_sub.shape[1])
    if complex_draw:
        w = w + 1j * rng.standard_normal(A_sub.shape[1])
    v = A_sub @ w
    return v


def find_multi_solution_witness(
    D: Dictionary,
    k: int,
    seed: int = 0,
    eq_tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    max_tuples: int = 2000,
    budget: int | None = None,
) -> WitnessResult:
    """Construct a unit target with more than k optimal k-sparse solutions.

    Three cases by dependence structure:

    1. some k columns are dependent: any (random, seeded) combination of a
       dependent k-set gives infinitely many representations;
    2. all k-sets independent but some (k+1)-set dependent: a random
       combination of that set lies in all of its k-sub-spans (re-drawn
       if it degenerates into a smaller span within rank tolerance);
    3. every (k+1)-set independent: numeric expanding-sphere search --
       for candidate (k+1)-tuples of k-subspans, minimize the largest
       span distance on the unit sphere (SLSQP), landing on an
       equidistant point, and accept the first target the list-sparse
       solver verifies.

    Case 3 is explicitly heuristic; exhausting `max_tuples` raises
    WitnessNotFound rather than silently falling back.
    """
    if not 1 <= k < D.n_atoms:
        raise InputError(f"witness search needs 1 <= k < N, got k={k}, N={D.n_atoms}")
    rng = np.random.default_rng(seed)
    complex_draw = not D.is_real
    s = spark(D, rank_tol=rank_tol, budget=budget)

    def verify(b: np.ndarray) -> WitnessResult | None:
        sol = solve_list_sparse(D, b, k, eq_tol=eq_tol, rank_tol=rank_tol, budget=budget)
        if not sol.finite or sol.support_count > k:
            case = 1 if s <= k else (2 if s == k + 1 else 3)
            return WitnessResult(
                b=b, verified_count=sol.support_count, finite=sol.finite, case=case
            )
        return None

    if s <= k:
        from .core import first_dependent_subset

        T = first_dependent_subset(D, k, rank_tol=rank_tol, budget=budget)
        for _ in range(64):
            b = _random_combination(rng, D.columns(T), complex_draw)
            nb = np.linalg.norm(b)
            if nb < 1e-9:
                continue
            hit = verify(b / nb)
            if hit:
                return hit
        raise WitnessNotFound("case-1 draws kept degenerating")

    if s == k + 1:
        from .core import first_dependent_subset

        T = first_dependent_subset(D, k + 1, rank_tol=rank_tol, budget=budget)
        sub_spans = [
            orthonormal_span(D.columns(U), rank_tol)[0]
            for U in itertools.combinations(T, k - 1)
        ] if k >= 2 else []
        for _ in range(64):
            b = _random_combination(rng, D.columns(T), complex_draw)
            nb = np.linalg.norm(b)
            if nb < 1e-9:
                continue
            b = b / nb
            # avoid draws that land (numerically) inside a smaller span
            if any(
                np.linalg.norm(b - Q @ (Q.conj().T @ b)) < math.sqrt(rank_tol)
                for Q in sub_spans
            ):
                continue
            hit = verify(b)
            if hit:
                return hit
        raise WitnessNotFound("case-2 draws kept degenerating")

    return _expanding_sphere_witness(
        D, k, rng, verify, rank_tol=rank_tol, max_tuples=max_tuples
    )


def _expanding_sphere_witness(D, k, rng, verify, rank_tol, max_tuples):
    m, N = D.m, D.n_atoms
    supports = list(itertools.combinations(range(N), k))
    bases = {S: orthonormal_span(D.columns(S), rank_tol)[0] for S in supports}
    complex_dict = not D.is_real

    def unpack(x):
        if complex_dict:
            return x[:m] + 1j * x[m : 2 * m]
        return x[:m]

    def dists2(x, Qs):
        b = unpack(x)
        n2 = float(np.real(np.vdot(b, b)))
        return np.array([n2 - float(np.sum(np.abs(Q.conj().T @ b) ** 2)) for Q in Qs])

    dim = 2 * m if complex_dict else m
    tried = 0
    for tup in itertools.combinations(supports, k + 1):
        tried += 1
        if tried > max_tuples:
            break
        atoms = sorted(set().union(*tup))
        seed_vec = D.columns(atoms).sum(axis=1)
        nv = np.linalg.norm(seed_vec)
        if nv < 1e-9:
            continue
        seed_vec = seed_vec / nv
        Qs = [bases[S] for S in tup]
        x0 = np.zeros(dim + 1)
        x0[:m] = seed_vec.real
        if complex_dict:
            x0[m : 2 * m] = seed_vec.imag
        x0[-1] = dists2(x0[:-1], Qs).max()
        cons = [{"type": "eq", "fun": lambda x: float(x[:-1] @ x[:-1]) - 1.0}]
        for i in range(len(Qs)):
            cons.append(
                {
                    "type": "ineq",
                    "fun": (lambda i: lambda x: x[-1] - dists2(x[:-1], Qs)[i])(i),
                }
            )
        result = minimize(
            lambda x: x[-1],
            x0,
            constraints=cons,
            method="SLSQP",
            options={"maxiter": 300, "ftol": 1e-16},
        )
        b = unpack(result.x[:-1])
        nb = np.linalg.norm(b)
        if nb < 1e-9:
            continue
        hit = verify(b / nb)
        if hit:
            return hit
    raise WitnessNotFound(
        f"expanding-sphere search tried {min(tried, max_tuples)} tuples without a verified witness"
    )


@dataclass(frozen=True)
class ListStats:
    trials: int
    unique_fraction: float
    multiple_fraction: float
    infinite_fraction: float
    max_list_size: int
    seed: int


def monte_carlo_list_stats(
    D: Dictionary,
    k: int,
    trials: int,
    seed: int,
    eq_tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> ListStats:
    """Fractions of unique / multiple / infinite solution lists over random unit targets.

    Targets are spherical-Gaussian draws normalized to the unit sphere
    (complex Gaussian for complex dictionaries), from a caller-supplied
    seed; there is no global RNG state.
    """
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((D.m, trials))
    if not D.is_real:
        B = B + 1j * rng.standard_normal((D.m, trials))
    B = B / np.linalg.norm(B, axis=0)

    table = SupportTable(D, k, rank_tol=rank_tol, budget=budget)
    res = table.residuals(B)
    deficient = table.ranks < np.array([len(S) for S in table.supports])

    unique = multiple = infinite = 0
    max_list = 0
    for t in range(trials):
        col = res[:, t]
        optimal = min(float(col.min()), 1.0)
        thr = optimal * (1.0 + eq_tol) + eq_tol
        hit = col <= thr
        if np.any(hit & deficient):
            infinite += 1
            continue
        minimal = _minimal_supports([S for S, h in zip(table.supports, hit) if h])
        max_list = max(max_list, len(minimal))
        if len(minimal) <= 1:
            unique += 1
        else:
            multiple += 1
    return ListStats(
        trials=trials,
        unique_fraction=unique / trials,
        multiple_fraction=multiple / trials,
        infinite_fraction=infinite / trials,
        max_list_size=max_list,
        seed=seed,
    )
