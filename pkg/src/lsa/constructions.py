"""Deterministic generators for the worst-case dictionaries and targets.

Each generator returns a ConstructionBundle pairing a dictionary with the
target vectors, predicted invariants, and (where the construction defines
them) explicit multi-solution coefficient vectors, so every prediction
can be re-checked by the core/solvers operations.

Conventions fixed here, once:

* indices are 0-based everywhere ("atom 0" is the distinguished atom of
  the identity bad-target construction);
* the DFT block of spikes-and-sines uses the unitary normalization
  1/sqrt(n) with forward kernel exp(-2*pi*i*j*t/n), so its columns are
  unit-norm;
* the Kerdock set is realized as the trace forms M_a[i][j] =
  Tr(a * e_i * e_j) over GF(2^m) in the polynomial basis e_i = x^i, with
  an explicit irreducible polynomial per m; validity (pairwise
  nonsingular differences) is checked programmatically at construction
  time, never assumed;
* the shifted-picket index sets Omega_i are the lexicographically first
  valid choice, so repeated runs are byte-identical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .core import Dictionary, new_dictionary
from .errors import (
    DimensionTooSmall,
    EpsOutOfRange,
    InputError,
    KerdockSetInvalid,
    OddDimension,
    OddSplit,
    ParameterOutOfRange,
    SOutOfRange,
)

LabeledVector = tuple[str, np.ndarray]


@dataclass(frozen=True)
class ConstructionBundle:
    """A generated dictionary plus everything needed to verify it.

    `targets` are right-hand sides for the solvers; `vectors` holds
    construction-specific payloads (kernel vectors, picket fences);
    `solution_factory`, when set, yields labeled coefficient vectors that
    solve A x = b for the bundle's distinguished target.
    """

    name: str
    dictionary: Dictionary
    targets: tuple[LabeledVector, ...]
    predicted: dict
    parameters: dict
    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    solution_factory: Callable[[], Iterator[LabeledVector]] | None = None

    def iter_solutions(self) -> Iterator[LabeledVector]:
        if self.solution_factory is None:
            return iter(())
        return self.solution_factory()


def identity_bad_b(m: int, k: int, eps: float) -> ConstructionBundle:
    """Identity dictionary with a target equidistant from many axis subsets.

    The target has b_0^2 = 1 - (m-1) eps^2/(m-k) and b_i^2 = eps^2/(m-k)
    elsewhere; every size-k support containing atom 0 then reaches
    residual exactly eps and no other size-k support comes within eps,
    giving exactly C(m-1, k-1) qualifying supports.
    """
    if not 1 <= k < m:
        raise ParameterOutOfRange(f"need 1 <= k < m, got k={k}, m={m}")
    limit = math.sqrt((m - k) / m)
    if not 0 < eps < limit:
        raise EpsOutOfRange(f"need 0 < eps < sqrt((m-k)/m) = {limit:.6f}, got {eps}")
    b = np.full(m, eps / math.sqrt(m - k))
    b[0] = math.sqrt(1.0 - (m - 1) * eps**2 / (m - k))
    D = new_dictionary(np.eye(m))
    return ConstructionBundle(
        name="identity-bad-b",
        dictionary=D,
        targets=(("bad_b", b.astype(np.complex128)),),
        predicted={
            "coherence": 0.0,
            "qualifying_support_count": math.comb(m - 1, k - 1),
            "required_atom": 0,
            "qualifying_residual": eps,
        },
        parameters={"m": m, "k": k, "eps": eps},
    )


def tight_example(m: int, k: int, eps: float) -> ConstructionBundle:
    """The m x m matrix whose first atom is flat off-axis and whose others
    tilt toward e_0, with target b = e_0.

    Coherence is 1/(1 + eps^2 k), and at least floor((m-1)/k)
    pairwise-disjoint size-k supports (from atoms 1..m-1) reach residual
    <= eps.
    """
    if m < k + 2:
        raise DimensionTooSmall(f"need m >= k + 2, got m={m}, k={k}")
    if eps <= 0:
        raise EpsOutOfRange(f"need eps > 0, got {eps}")
    A = np.zeros((m, m))
    A[1:, 0] = 1.0 / math.sqrt(m - 1)
    scale = 1.0 / math.sqrt(1.0 + eps**2 * k)
    for i in range(1, m):
        A[0, i] = scale
        A[i, i] = eps * math.sqrt(k) * scale
    e0 = np.zeros(m)
    e0[0] = 1.0
    return ConstructionBundle(
        name="tight-example",
        dictionary=new_dictionary(A),
        targets=(("e0", e0.astype(np.complex128)),),
        predicted={
            "coherence": 1.0 / (1.0 + eps**2 * k),
            "disjoint_support_count": (m - 1) // k,
            "qualifying_residual_max": eps,
        },
        parameters={"m": m, "k": k, "eps": eps},
    )


def _unitary_dft(n: int) -> np.ndarray:
    j, t = np.meshgrid(np.arange(n), np.arange(n))
    return np.exp(-2j * np.pi * j * t / n) / math.sqrt(n)


def _picket_fence(n: int) -> np.ndarray:
    """The comb 1 (x) e_1: spikes of value 1 at multiples of sqrt(n)."""
    root = math.isqrt(n)
    v = np.zeros(n, dtype=np.complex128)
    v[::root] = 1.0
    return v


def spikes_and_sines(d: int) -> ConstructionBundle:
    """Union of the Fourier and canonical bases of C^n, n = 2^(2d).

    The kernel z = [v; -F v] with v the picket fence satisfies A z = 0
    with exactly 2*sqrt(n) nonzeros, which pins spark(A) = 2*sqrt(n)
    against the two-basis uncertainty bound 2/mu.  d = 1 is below the
    regime the counting arguments target but is allowed for micro-tests.
    """
    if d < 1:
        raise ParameterOutOfRange(f"need d >= 1, got {d}")
    n = 4**d
    root = 2**d
    F = _unitary_dft(n)
    A = np.hstack([F, np.eye(n)])
    v = _picket_fence(n)
    z = np.concatenate([v, -(F @ v)])
    D = new_dictionary(A)
    assert np.linalg.norm(D.entries @ z) <= 1e-10
    return ConstructionBundle(
        name="spikes-sines",
        dictionary=D,
        targets=(("picket_fence", v),),
        predicted={
            "coherence": 1.0 / root,
            "kernel_sparsity": 2 * root,
            "spark": 2 * root,
        },
        parameters={"d": d, "n": n},
        vectors={"kernel": z, "picket_fence": v},
    )


def shifted_picket_solutions(d: int) -> ConstructionBundle:
    """Spikes-and-sines target with an explicit family of 2^k exact solutions.

    The k circular shifts of the picket fence give kernel vectors
    z^(i); each is split at a deterministic index set Omega_i (the
    lexicographically first subset of supp(z^(i)) with exactly k/2
    indices in the spike block) into x1^(i) and x2^(i) = x1^(i) - z^(i)
    with A x1 = A x2.  Summing one of the pair per shift yields 2^k
    solutions with pairwise-distinct supports and sparsity in
    [k^2/2, k^2].
    """
    if d < 1:
        raise ParameterOutOfRange(f"need d >= 1, got {d}")
    k = 2**d
    if k % 2 != 0:
        raise OddSplit(f"shift sparsity k={k} must be even to split")
    n = 4**d
    F = _unitary_dft(n)
    A = np.hstack([F, np.eye(n)])
    D = new_dictionary(A)

    v = _picket_fence(n)
    x1s, x2s = [], []
    for i in range(k):
        vi = np.roll(v, i)
        zi = np.concatenate([vi, -(F @ vi)])
        supp = np.flatnonzero(np.abs(zi) > 1e-12)
        fourier_part = [int(t) for t in supp if t < n]
        spike_part = [int(t) for t in supp if t >= n]
        omega = fourier_part[: k // 2] + spike_part[: k // 2]
        x1 = np.zeros(2 * n, dtype=np.complex128)
        x1[omega] = zi[omega]
        x1s.append(x1)
        x2s.append(x1 - zi)
    x = sum(x1s)
    b = D.entries @ x

    def factory() -> Iterator[LabeledVector]:
        for bits in itertools.product((0, 1), repeat=k):
            y = sum(x1s[i] if bits[i] else x2s[i] for i in range(k))
            yield "c=" + "".join(str(c) for c in bits), y

    return ConstructionBundle(
        name="picket-solutions",
        dictionary=D,
        targets=(("b", b),),
        predicted={
            "solution_count": 2**k,
            "sparsity_min": k * k // 2,
            "sparsity_max": k * k,
            "k": k,
        },
        parameters={"d": d, "n": n},
        vectors={"defining_x": x},
        solution_factory=factory,
    )


# -- Kerdock bases over GF(2^m) ------------------------------------------------

#: Irreducible polynomials (bitmask coefficients) defining GF(2^m).
_IRREDUCIBLE = {2: 0b111, 4: 0b10011, 6: 0b1000011}


def _gf_mul(a: int, b: int, m: int, poly: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> m) & 1:
            a ^= poly
    return r


def _gf_trace(a: int, m: int, poly: int) -> int:
    t, x = 0, a
    for _ in range(m):
        t ^= x
        x = _gf_mul(x, x, m, poly)
    return t & 1


def _gf2_rank(M: np.ndarray) -> int:
    M = (M % 2).astype(np.int64).copy()
    rank = 0
    for c in range(M.shape[1]):
        piv = None
        for i in range(rank, M.shape[0]):
            if M[i, c]:
                piv = i
                break
        if piv is None:
            continue
        M[[rank, piv]] = M[[piv, rank]]
        for i in range(M.shape[0]):
            if i != rank and M[i, c]:
                M[i] ^= M[rank]
        rank += 1
    return rank


def kerdock_set(m: int) -> list[np.ndarray]:
    """Binary symmetric matrices M_a[i][j] = Tr(a e_i e_j) with nonsingular differences.

    The set is linear (M_a xor M_b = M_{a xor b}), so the difference check
    reduces to nonsingularity of every nonzero member, which is verified
    explicitly; failure raises KerdockSetInvalid.
    """
    if m not in _IRREDUCIBLE:
        raise InputError(
            f"no irreducible polynomial tabled for m={m}; available: {sorted(_IRREDUCIBLE)}"
        )
    poly = _IRREDUCIBLE[m]
    mats = []
    for a in range(2**m):
        P = np.zeros((m, m), dtype=np.int64)
        for i in range(m):
            for j in range(i, m):
                val = _gf_trace(_gf_mul(a, _gf_mul(1 << i, 1 << j, m, poly), m, poly), m, poly)
                P[i, j] = P[j, i] = val
        mats.append(P)
    for a in range(1, 2**m):
        if _gf2_rank(mats[a]) != m:
            raise KerdockSetInvalid(f"member {a} of the Kerdock set is singular")
    # linearity M_a xor M_b = M_{a xor b} is what reduces the pairwise
    # difference check to the member check above; verify it too
    for a in range(2**m):
        for b in range(a + 1, 2**m):
            if not np.array_equal(mats[a] ^ mats[b], mats[a ^ b]):
                raise KerdockSetInvalid("trace forms are not additive over GF(2^m)")
    return mats


def _walsh_hadamard(m: int) -> np.ndarray:
    H = np.array([[1.0]])
    h2 = np.array([[1.0, 1.0], [1.0, -1.0]])
    for _ in range(m):
        H = np.kron(H, h2)
    return H / math.sqrt(2**m)


def kerdock_blocks(m: int) -> list[np.ndarray]:
    """The n = 2^m mutually unbiased bases diag(i^{x^T P x}) . WH."""
    n = 2**m
    H = _walsh_hadamard(m)
    xs = np.array([[(x >> i) & 1 for i in range(m)] for x in range(n)], dtype=np.int64)
    blocks = []
    for P in kerdock_set(m):
        q = np.einsum("xi,ij,xj->x", xs, P, xs)  # integer quadratic form, read mod 4
        blocks.append((1j ** (q % 4))[:, None] * H)
    return blocks


def _validate_kerdock(blocks: list[np.ndarray], n: int) -> None:
    root = math.isqrt(n)
    eye = np.eye(n)
    for t, B in enumerate(blocks):
        if np.max(np.abs(B.conj().T @ B - eye)) > 1e-10:
            raise KerdockSetInvalid(f"basis block {t} is not unitary within 1e-10")
    target = 1.0 / root
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            M = np.abs(blocks[a].conj().T @ blocks[b])
            if np.max(np.abs(M - target)) > 1e-10:
                raise KerdockSetInvalid(f"blocks {a},{b} are not mutually unbiased")


def kerdock_dictionary(m: int) -> ConstructionBundle:
    """The n x n^2 union of n mutually unbiased bases, n = 2^m, coherence 1/sqrt(n).

    Note on the per-basis picket-fence coefficients: the bundle carries
    x_i = (block_i)^H z for the picket fence z, and predicts the
    literature's sparsity value sqrt(n) for each.  That prediction is
    provably unreachable for every block simultaneously (a vector can be
    sqrt(n)-sparse in at most sqrt(n)+1 mutually unbiased bases -- each
    block pair forces equality in the two-basis uncertainty principle,
    and the underlying subspace spread has too few intersection points);
    the measured per-block sparsities are reported alongside.  The
    multi-solution family built on the x_i (distinct supports, exact
    residuals, atom multiplicities) is unaffected.
    """
    if m < 2 or m % 2 != 0:
        raise OddDimension(f"need even m >= 2, got {m}")
    n = 2**m
    root = math.isqrt(n)
    blocks = kerdock_blocks(m)
    _validate_kerdock(blocks, n)
    A = np.hstack(blocks)
    D = new_dictionary(A)

    z = _picket_fence(n)
    xis = []
    for i, B in enumerate(blocks):
        xi = np.zeros(n * n, dtype=np.complex128)
        xi[i * n : (i + 1) * n] = B.conj().T @ z
        xis.append(xi)
    sparsities = [int(np.count_nonzero(np.abs(x) > 1e-12)) for x in xis]

    def factory() -> Iterator[LabeledVector]:
        for i, x in enumerate(xis):
            yield f"x_{i}", x

    return ConstructionBundle(
        name="kerdock",
        dictionary=D,
        targets=(("picket_fence", z),),
        predicted={
            "coherence": 1.0 / root,
            "n_blocks": n,
            "x_sparsity": root,
            "x_sparsity_measured": sparsities,
        },
        parameters={"m": m, "n": n},
        vectors={"picket_fence": z},
        solution_factory=factory,
    )


def kerdock_multi_solutions(m: int, s: int) -> ConstructionBundle:
    """Target b = s*z with C(n, s) distinct-support exact representations.

    Solutions are x_S = sum_{i in S} x_i over all size-s subsets of the n
    bases; supports are distinct (the x_i live in disjoint column
    blocks), and every atom that appears at all appears in exactly
    C(n-1, s-1) of the solutions.
    """
    base = kerdock_dictionary(m)
    n = base.parameters["n"]
    if not 1 <= s <= n:
        raise SOutOfRange(f"need 1 <= s <= n = {n}, got {s}")
    z = base.vectors["picket_fence"]
    xis = [x for _, x in base.iter_solutions()]
    b = s * z
    root = math.isqrt(n)

    def factory() -> Iterator[LabeledVector]:
        for S in itertools.combinations(range(n), s):
            x = np.zeros(n * n, dtype=np.complex128)
            for i in S:
                x += xis[i]
            yield "S=" + ",".join(map(str, S)), x

    return ConstructionBundle(
        name="kerdock-solutions",
        dictionary=base.dictionary,
        targets=(("s_times_picket", b),),
        predicted={
            "solution_count": math.comb(n, s),
            "per_atom_multiplicity": math.comb(n - 1, s - 1),
            "sparsity": s * root,
            "coherence": 1.0 / root,
        },
        parameters={"m": m, "n": n, "s": s},
        vectors={"picket_fence": z},
        solution_factory=factory,
    )


def mu_k_tight(k: int, c: float) -> ConstructionBundle:
    """2k x 2k dictionary meeting the degree-k coherence upper bound exactly.

    Two size-k blocks built from (c+1) I_k - J_k over J_k; every pair of
    columns has the same |dot product| 2(c-k+1)/(c^2+2k-1), and the
    all-ones combination of each block produces the same vector, so the
    degree-k coherence equals min(k mu / (1-(k-1) mu), 1).
    """
    if k < 2:
        raise ParameterOutOfRange(f"need k >= 2, got {k}")
    if c < 2 * k - 1:
        raise ParameterOutOfRange(f"need c >= 2k - 1 = {2 * k - 1}, got {c}")
    I = np.eye(k)
    J = np.ones((k, k))
    scale = 1.0 / math.sqrt(c**2 + 2 * k - 1)
    upper = scale * ((c + 1) * I - J)
    lower = scale * J
    A = np.hstack([np.vstack([upper, lower]), np.vstack([lower, upper])])
    mu = 2 * (c - k + 1) / (c**2 + 2 * k - 1)
    mu_k = min(k * mu / (1.0 - (k - 1) * mu), 1.0) if (k - 1) * mu < 1.0 else 1.0
    return ConstructionBundle(
        name="mu-k-tight",
        dictionary=new_dictionary(A),
        targets=(),
        predicted={"coherence": mu, "generalized_coherence": mu_k, "k": k},
        parameters={"k": k, "c": c},
    )


def equiangular_lines_2d(n_atoms: int) -> ConstructionBundle:
    """n unit vectors in the plane at angles j*pi/N: rank 2, spark 3.

    Fixture for the rank-2/spark-3 characterization of worst-case list
    size <= 2 and for the expanding-sphere witness search; the bisector
    of the first two atom lines is included as a two-solution target.
    """
    if n_atoms < 3:
        raise ParameterOutOfRange(f"need N >= 3, got {n_atoms}")
    theta = np.arange(n_atoms) * np.pi / n_atoms
    A = np.vstack([np.cos(theta), np.sin(theta)])
    half = np.pi / (2 * n_atoms)
    bisector = np.array([np.cos(half), np.sin(half)])
    return ConstructionBundle(
        name="equiangular-2d",
        dictionary=new_dictionary(A),
        targets=(("bisector_01", bisector.astype(np.complex128)),),
        predicted={"rank": 2, "spark": 3, "coherence": float(np.cos(np.pi / n_atoms))},
        parameters={"n": n_atoms},
    )


#: CLI / service construction registry: name -> (generator, parameter names).
REGISTRY: dict[str, tuple[Callable[..., ConstructionBundle], tuple[str, ...]]] = {
    "identity-bad-b": (identity_bad_b, ("m", "k", "eps")),
    "tight-example": (tight_example, ("m", "k", "eps")),
    "spikes-sines": (spikes_and_sines, ("d",)),
    "picket-solutions": (shifted_picket_solutions, ("d",)),
    "kerdock": (kerdock_dictionary, ("m",)),
    "kerdock-solutions": (kerdock_multi_solutions, ("m", "s")),
    "mu-k-tight": (mu_k_tight, ("k", "c")),
    "equiangular-2d": (equiangular_lines_2d, ("n",)),
}


def build(name: str, **params) -> ConstructionBundle:
    """Instantiate a registered construction by CLI name."""
    if name not in REGISTRY:
        raise InputError(f"unknown construction {name!r}; choose from {sorted(REGISTRY)}")
    fn, wanted = REGISTRY[name]
    missing = [p for p in wanted if p not in params]
    if missing:
        raise InputError(f"construction {name!r} needs parameters {missing}")
    extra = [p for p in params if p not in wanted]
    if extra:
        raise InputError(f"construction {name!r} does not take {extra}")
    args = []
    for p in wanted:
        val = params[p]
        args.append(float(val) if p in ("eps", "c") else int(val))
    return fn(*args)
