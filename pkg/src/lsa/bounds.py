"""Closed-form list-size bounds and the empirical soundness harness.

Every bound is evaluated exactly as stated, with its precondition checked
first: when the precondition fails the result is NotApplicable (None),
never a number.  Boundary cases on strict hypotheses (e.g. eps =
sqrt(1-mu)) resolve conservatively to NotApplicable; the k=1 average-error
bound keeps its non-strict eps <= sqrt(1-17 mu) hypothesis.  Real-valued
bounds are floored to integers since list sizes are integral.

The harness (`verify_bounds`, `soundness_sweep`, `run_suite`) measures
actual list sizes with the exhaustive solvers -- R=1 bounds against the
exact set-packing number of the qualifying supports -- and flags any
measured value exceeding an applicable bound.  A violation is a
build-failing event, not a warning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    INFINITE,
    RANK_TOL,
    Dictionary,
    coherence,
    generalized_coherence,
    matrix_rank,
    new_dictionary,
    spark,
)
from .errors import InputError
from .solvers import EQ_TOL, restricted_list_size

NOT_APPLICABLE = None


def simplex_circumradius(n: int) -> float:
    """Circumradius of a regular unit-edge simplex on n vertices: sqrt((n-1)/(2n))."""
    if n < 2:
        raise InputError(f"need n >= 2 vertices, got {n}")
    return math.sqrt((n - 1) / (2 * n))


def euclidean_list_bound(delta: float, eps: float) -> int | None:
    """List size of a Euclidean code with distance delta at radius eps < delta/sqrt(2)."""
    if delta <= 0:
        raise InputError(f"need delta > 0, got {delta}")
    if eps >= delta / math.sqrt(2):
        return NOT_APPLICABLE
    return math.floor(1.0 / (1.0 - 2.0 * eps**2 / delta**2))


def spherical_list_bound(mu: float, eps: float) -> int | None:
    """Disjoint list size for k=1 at radius eps < sqrt(1-mu)."""
    if not 0 <= mu < 1:
        raise InputError(f"need 0 <= mu < 1, got {mu}")
    if eps >= math.sqrt(1.0 - mu):
        return NOT_APPLICABLE
    return math.floor(1.0 / (1.0 - eps**2 / (1.0 - mu)))


def list_bound_mu_k(mu_k: float, eps: float) -> int | None:
    """Disjoint list size for degree-k coherence mu_k at radius eps < sqrt(1-mu_k)."""
    if not 0 <= mu_k <= 1:
        raise InputError(f"need 0 <= mu_k <= 1, got {mu_k}")
    if mu_k >= 1.0 or eps >= math.sqrt(1.0 - mu_k):
        return NOT_APPLICABLE
    return math.floor(1.0 / (1.0 - eps**2 / (1.0 - mu_k)))


def list_bound_coherence(mu: float, k: int, eps: float) -> int | None:
    """Disjoint list size from plain coherence: needs mu < 1/(2k-1) and a matching eps."""
    if k < 1:
        raise InputError(f"need k >= 1, got {k}")
    if mu < 0:
        raise InputError(f"need mu >= 0, got {mu}")
    if mu >= 1.0 / (2 * k - 1):
        return NOT_APPLICABLE
    radicand = (1.0 - (2 * k - 1) * mu) / (1.0 - (k - 1) * mu)
    if eps >= math.sqrt(radicand):
        return NOT_APPLICABLE
    return math.floor(1.0 / (1.0 - (1.0 - (k - 1) * mu) * eps**2 / (1.0 - (2 * k - 1) * mu)))


def av_list_bound_k1(mu: float, eps: float) -> int | None:
    """Average-error k=1 bound: floor(4/(1-eps^2)) whenever eps <= sqrt(1-17*mu)."""
    if mu < 0:
        raise InputError(f"need mu >= 0, got {mu}")
    if 17.0 * mu >= 1.0:
        return NOT_APPLICABLE
    if eps > math.sqrt(1.0 - 17.0 * mu):
        return NOT_APPLICABLE
    return math.floor(4.0 / (1.0 - eps**2))


def av_list_bound(mu: float, k: int, eps: float, gamma: float) -> int | None:
    """Average-error k>1 bound: ceil((11/(1-eps^2))^(1/(1-gamma))).

    Applicable whenever eps <= sqrt(1 - 24 (mu k)^(1-gamma)); the atom
    multiplicity allowed in the measured list is L^gamma (gamma = 0 is
    the disjoint case).
    """
    if k < 2:
        raise InputError(f"need k >= 2, got {k}")
    if not 0 <= gamma < 1:
        raise InputError(f"need 0 <= gamma < 1, got {gamma}")
    if mu < 0:
        raise InputError(f"need mu >= 0, got {mu}")
    radicand = 1.0 - 24.0 * (mu * k) ** (1.0 - gamma)
    if radicand < 0 or eps > math.sqrt(radicand):
        return NOT_APPLICABLE
    return math.ceil((11.0 / (1.0 - eps**2)) ** (1.0 / (1.0 - gamma)))


def gen_list_regime(mu: float, k: int, L: int) -> bool:
    """Companion predicate for the constant-list regime: mu <= 1/(2kL)."""
    if k < 1 or L < 1:
        raise InputError("need k >= 1 and L >= 1")
    return mu <= 1.0 / (2 * k * L)


def mu_k_upper(mu: float, k: int) -> float | None:
    """Degree-k coherence bound k*mu/(1-(k-1)*mu); NotApplicable for mu >= 1/(k-1)."""
    if k < 2:
        raise InputError(f"need k >= 2, got {k}")
    if mu >= 1.0 / (k - 1):
        return NOT_APPLICABLE
    return k * mu / (1.0 - (k - 1) * mu)


def mu_k_upper_simple(mu: float, k: int) -> float:
    """Always-valid degree-k coherence bound (2k-1)*mu."""
    if k < 2:
        raise InputError(f"need k >= 2, got {k}")
    return (2 * k - 1) * mu


@dataclass(frozen=True)
class UniquenessFlags:
    unique_by_mu: bool
    unique_by_spark: bool
    two_onb_cohbound: bool


def uniqueness_thresholds(mu: float, spark_value: int | float, k: int) -> UniquenessFlags:
    """The three sparsity thresholds guaranteeing a unique exact representation.

    unique_by_mu:     k < (1/mu + 1)/2
    unique_by_spark:  k < spark/2   (Infinite spark makes this true for all k)
    two_onb_cohbound: k < 1/mu     (the two-orthonormal-basis regime)
    """
    by_mu = True if mu == 0 else k < 0.5 * (1.0 / mu + 1.0)
    by_spark = True if spark_value == INFINITE else k < spark_value / 2.0
    cohbound = True if mu == 0 else k < 1.0 / mu
    return UniquenessFlags(bool(by_mu), bool(by_spark), bool(cohbound))


@dataclass(frozen=True)
class ListSparseConditions:
    finite_all_b: bool
    sufficient_le_L: bool
    necessary_le_L: bool
    list_size_1: bool
    list_size_le_2: bool
    spark: int | float
    rank: int


def list_sparse_conditions(
    D: Dictionary, k: int, L: int, rank_tol: float = RANK_TOL, budget: int | None = None
) -> ListSparseConditions:
    """Evaluate the finiteness / list-length conditions from computed spark and rank."""
    if not 1 <= k <= D.n_atoms:
        raise InputError(f"need 1 <= k <= N, got k={k}")
    N = D.n_atoms
    s = spark(D, rank_tol=rank_tol, budget=budget)
    r = matrix_rank(D.entries, rank_tol)
    finite = k < s
    suf = finite and math.comb(N, k) <= L
    nec = (k == N == r) or (k < min(L, s))
    one = k == N == r
    le2 = (finite and math.comb(N, k) <= 2) or (k == 1 and r == 2 and s == 3)
    return ListSparseConditions(
        finite_all_b=bool(finite),
        sufficient_le_L=bool(suf),
        necessary_le_L=bool(nec),
        list_size_1=bool(one),
        list_size_le_2=bool(le2),
        spark=s,
        rank=r,
    )


@dataclass(frozen=True)
class BoundReport:
    """One bound evaluated against one measured list size."""

    bound_name: str
    inputs: dict
    precondition_holds: bool
    bound_value: int | float | None  # None == NotApplicable
    measured: int | None = None
    violated: bool = False


def measured_disjoint_list_sizes(
    D: Dictionary,
    targets,
    k: int,
    eps_values,
    eq_tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
) -> dict[float, int]:
    """Exact R=1 packing of qualifying supports, worst case over targets.

    Measured per eps from one shared residual table.  Inclusion-minimal
    qualifying supports of size <= k suffice for the packing number: any
    disjoint qualifying family stays disjoint and qualifying after
    replacing each member by a minimal subset.
    """
    from .solvers import SupportTable, _minimal_supports

    table = SupportTable(D, k, rank_tol=rank_tol, budget=budget)
    B = np.column_stack([np.asarray(b, dtype=np.complex128) for b in targets])
    res = table.residuals(B)
    out: dict[float, int] = {}
    for eps in eps_values:
        worst = 0
        for t in range(B.shape[1]):
            hit = np.flatnonzero(res[:, t] <= eps + eq_tol)
            minimal = _minimal_supports([table.supports[i] for i in hit])
            worst = max(worst, restricted_list_size(minimal, R=1, budget=budget))
        out[eps] = worst
    return out


def _bound_rows(mu: float, mu_k: float | None, k: int, eps: float) -> list[tuple[str, object, dict]]:
    """(name, value-or-None, inputs) for every R=1 bound at this k and eps."""
    if k == 1:
        return [
            ("list-decoding-spherical", spherical_list_bound(mu, eps), {"mu": mu, "eps": eps}),
            ("av-p2-k1", av_list_bound_k1(mu, eps), {"mu": mu, "eps": eps}),
        ]
    rows = [
        (
            "list-decoding-mu-k",
            list_bound_mu_k(mu_k, eps),
            {"mu_k": mu_k, "k": k, "eps": eps},
        ),
        (
            "list-decoding-coherence",
            list_bound_coherence(mu, k, eps),
            {"mu": mu, "k": k, "eps": eps},
        ),
        (
            "av-p2-k",
            av_list_bound(mu, k, eps, gamma=0.0),
            {"mu": mu, "k": k, "eps": eps, "gamma": 0.0},
        ),
    ]
    return rows


def verify_bounds(
    D: Dictionary,
    targets,
    k: int,
    eps: float,
    eq_tol: float = EQ_TOL,
    rank_tol: float = RANK_TOL,
    budget: int | None = None,
    mu_k_value: float | None = None,
) -> list[BoundReport]:
    """Evaluate every applicable list-size bound against measured ground truth.

    All bounds here restrict atom multiplicity to R=1, so the measured
    value is the exact set-packing number of the qualifying supports,
    maximized over the supplied targets.  Measurement is skipped (left
    None) when every bound's precondition fails -- there is nothing to
    violate.  `mu_k_value` reuses a precomputed degree-k coherence.
    """
    targets = list(targets)
    if not targets:
        raise InputError("verify_bounds needs at least one target")
    mu = coherence(D)
    mu_k = None
    if k > 1:
        mu_k = (
            mu_k_value
            if mu_k_value is not None
            else generalized_coherence(D, k, rank_tol=rank_tol, budget=budget)
        )
    rows = _bound_rows(mu, mu_k, k, eps)
    any_applicable = any(value is not NOT_APPLICABLE for _, value, _ in rows)
    measured = None
    if any_applicable:
        measured = measured_disjoint_list_sizes(
            D, targets, k, [eps], eq_tol=eq_tol, rank_tol=rank_tol, budget=budget
        )[eps]
    return [
        BoundReport(
            bound_name=name,
            inputs=inputs,
            precondition_holds=value is not NOT_APPLICABLE,
            bound_value=value,
            measured=measured,
            violated=bool(
                value is not NOT_APPLICABLE and measured is not None and measured > value
            ),
        )
        for name, value, inputs in rows
    ]


def random_dictionary(m: int, n_atoms: int, seed: int) -> Dictionary:
    """Seeded Gaussian dictionary with normalized columns (the sweep corpus)."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n_atoms))
    return new_dictionary(A, normalize=True)


def random_unit_targets(m: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, count))
    return B / np.linalg.norm(B, axis=0)


EPS_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


def soundness_sweep(
    n_dictionaries: int,
    seed: int,
    ks: tuple[int, ...] = (1, 2),
    eps_grid: tuple[float, ...] = EPS_GRID,
    targets_per_dictionary: int = 20,
    max_m: int = 8,
    max_n: int = 16,
    budget: int | None = None,
) -> list[BoundReport]:
    """Seeded random-dictionary sweep; returns every report (violations included)."""
    rng = np.random.default_rng(seed)
    reports: list[BoundReport] = []
    for t in range(n_dictionaries):
        m = int(rng.integers(2, max_m + 1))
        n = int(rng.integers(max(2 * max(ks), m), max_n + 1))
        D = random_dictionary(m, n, seed=int(rng.integers(0, 2**31)))
        targets = list(
            random_unit_targets(m, targets_per_dictionary, seed=int(rng.integers(0, 2**31))).T
        )
        reports.extend(
            sweep_dictionary(D, targets, ks=ks, eps_grid=eps_grid, budget=budget)
        )
    return reports


def sweep_dictionary(
    D: Dictionary,
    targets,
    ks: tuple[int, ...] = (1, 2),
    eps_grid: tuple[float, ...] = EPS_GRID,
    budget: int | None = None,
    mu_k_values: dict[int, float] | None = None,
) -> list[BoundReport]:
    """All (k, eps) bound reports for one dictionary, measuring only where needed."""
    mu = coherence(D)
    reports: list[BoundReport] = []
    for k in ks:
        mu_k = None
        if k > 1:
            if mu_k_values and k in mu_k_values:
                mu_k = mu_k_values[k]
            else:
                mu_k = generalized_coherence(D, k, budget=budget)
        rows_by_eps = {eps: _bound_rows(mu, mu_k, k, eps) for eps in eps_grid}
        need = [
            eps
            for eps, rows in rows_by_eps.items()
            if any(v is not NOT_APPLICABLE for _, v, _ in rows)
        ]
        measured = (
            measured_disjoint_list_sizes(D, targets, k, need, budget=budget) if need else {}
        )
        for eps, rows in rows_by_eps.items():
            got = measured.get(eps)
            for name, value, inputs in rows:
                reports.append(
                    BoundReport(
                        bound_name=name,
                        inputs=inputs,
                        precondition_holds=value is not NOT_APPLICABLE,
                        bound_value=value,
                        measured=got,
                        violated=bool(
                            value is not NOT_APPLICABLE and got is not None and got > value
                        ),
                    )
                )
    return reports


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    seed: int
    reports: list[BoundReport] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return sum(1 for r in self.reports if r.violated)


def run_suite(name: str, seed: int, budget: int | None = None) -> SuiteResult:
    """Named verification suites behind `lsa verify`."""
    from . import constructions

    reports: list[BoundReport] = []
    if name == "identity":
        for m, k in ((5, 1), (5, 2), (6, 2), (6, 3)):
            eps = 0.5 * math.sqrt((m - k) / m)
            bundle = constructions.identity_bad_b(m, k, eps)
            targets = [v for _, v in bundle.targets]
            targets.extend(random_unit_targets(m, 5, seed).T)
            for e in (eps, 0.3, 0.6):
                reports.extend(verify_bounds(bundle.dictionary, targets, k, e, budget=budget))
    elif name == "tight-example":
        for m, k in ((5, 1), (9, 2)):
            bundle = constructions.tight_example(m, k, 0.5)
            targets = [v for _, v in bundle.targets]
            for e in (0.3, 0.5):
                reports.extend(verify_bounds(bundle.dictionary, targets, k, e, budget=budget))
    elif name == "spikes":
        for d in (1, 2):
            bundle = constructions.spikes_and_sines(d)
            m = bundle.dictionary.m
            targets = list(random_unit_targets(m, 5, seed).T)
            for e in (0.3, 0.6):
                reports.extend(verify_bounds(bundle.dictionary, targets, 1, e, budget=budget))
    elif name == "kerdock":
        bundle = constructions.kerdock_dictionary(4)
        m = bundle.dictionary.m
        targets = [v.astype(np.complex128) + 0j for v in random_unit_targets(m, 5, seed).T]
        for e in (0.3, 0.6):
            reports.extend(verify_bounds(bundle.dictionary, targets, 1, e, budget=budget))
    elif name == "random":
        reports = soundness_sweep(20, seed, targets_per_dictionary=10, budget=budget)
    else:
        raise InputError(
            f"unknown suite {name!r}; choose from identity, tight-example, spikes, kerdock, random"
        )
    return SuiteResult(suite=name, seed=seed, reports=reports)
