import itertools
import math

import numpy as np
import pytest

import lsa
from lsa import constructions
from lsa.errors import (
    DimensionTooSmall,
    EpsOutOfRange,
    InputError,
    OddDimension,
    ParameterOutOfRange,
    SOutOfRange,
)

from conftest import brute_coherence


def support_of(x, tol=1e-12):
    return tuple(int(i) for i in np.flatnonzero(np.abs(x) > tol))


class TestIdentityBadB:
    def test_target_entries_and_residual_split(self):
        bundle = constructions.identity_bad_b(5, 2, 0.5)
        b = bundle.targets[0][1].real
        assert b[0] == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
        assert np.allclose(b[1:], math.sqrt(1.0 / 12.0))
        D = bundle.dictionary
        # supports holding atom 0 sit exactly at eps; the rest at sqrt(5/6)
        for S in itertools.combinations(range(5), 2):
            r = lsa.least_squares(D, S, b).residual
            expect = 0.5 if 0 in S else math.sqrt(5.0 / 6.0)
            assert r == pytest.approx(expect, abs=1e-12)

    def test_qualifying_count_matches_binomial(self):
        bundle = constructions.identity_bad_b(5, 2, 0.5)
        sol = lsa.solve_list_approx(bundle.dictionary, bundle.targets[0][1], 2, 0.5)
        assert sol.support_count == bundle.predicted["qualifying_support_count"] == 4

    def test_smallest_case(self):
        bundle = constructions.identity_bad_b(2, 1, 0.1)
        sol = lsa.solve_list_approx(bundle.dictionary, bundle.targets[0][1], 1, 0.1)
        assert sol.support_count == 1

    def test_eps_range_enforced(self):
        with pytest.raises(EpsOutOfRange):
            constructions.identity_bad_b(5, 2, 0.9)  # 0.9 > sqrt(3/5)
        with pytest.raises(ParameterOutOfRange):
            constructions.identity_bad_b(3, 3, 0.1)


class TestTightExample:
    def test_m5_k1_coherence_and_solutions(self):
        bundle = constructions.tight_example(5, 1, 0.5)
        D = bundle.dictionary
        assert lsa.coherence(D) == pytest.approx(0.8, abs=1e-12)
        sol = lsa.solve_list_approx(D, bundle.targets[0][1], 1, 0.5)
        assert sol.support_count == 4
        for s in sol.solutions:
            assert s.residual == pytest.approx(math.sqrt(0.2), abs=1e-12)

    def test_first_atom_never_qualifies(self):
        bundle = constructions.tight_example(7, 2, 0.4)
        D = bundle.dictionary
        b = bundle.targets[0][1]
        assert lsa.least_squares(D, (0,), b).residual == pytest.approx(1.0, abs=1e-12)

    def test_m9_k2_disjoint_count(self):
        bundle = constructions.tight_example(9, 2, 0.5)
        sol = lsa.solve_list_approx(bundle.dictionary, bundle.targets[0][1], 2, 0.5)
        packed = lsa.restricted_list_size(sol.supports, 1)
        assert packed >= (9 - 1) // 2 == bundle.predicted["disjoint_support_count"]

    def test_dimension_check(self):
        with pytest.raises(DimensionTooSmall):
            constructions.tight_example(3, 2, 0.5)


class TestSpikesAndSines:
    def test_kernel_vector_d2(self):
        bundle = constructions.spikes_and_sines(2)
        z = bundle.vectors["kernel"]
        assert support_of(z) and len(support_of(z)) == 8
        assert np.linalg.norm(bundle.dictionary.entries @ z) <= 1e-10

    def test_coherence_is_inverse_root_n(self):
        bundle = constructions.spikes_and_sines(2)
        mu = lsa.coherence(bundle.dictionary)
        assert mu == pytest.approx(0.25, abs=1e-12)
        assert mu == pytest.approx(brute_coherence(bundle.dictionary.entries), abs=1e-13)

    def test_d1_spark(self):
        bundle = constructions.spikes_and_sines(1)
        assert lsa.spark(bundle.dictionary) == 4

    def test_d_nonpositive_rejected(self):
        with pytest.raises(ParameterOutOfRange):
            constructions.spikes_and_sines(0)


class TestShiftedPicketSolutions:
    def test_d2_family(self):
        bundle = constructions.shifted_picket_solutions(2)
        D = bundle.dictionary
        b = bundle.targets[0][1]
        sols = list(bundle.iter_solutions())
        assert len(sols) == 16 == bundle.predicted["solution_count"]
        supports = []
        for _, y in sols:
            assert np.linalg.norm(D.entries @ y - b) <= 1e-10
            nnz = len(support_of(y))
            assert 8 <= nnz <= 16
            supports.append(support_of(y))
        # pairwise distinct over all 120 pairs
        assert len(set(supports)) == 16

    def test_all_ones_choice_reproduces_defining_vector(self):
        bundle = constructions.shifted_picket_solutions(2)
        by_label = dict(bundle.iter_solutions())
        assert np.allclose(by_label["c=1111"], bundle.vectors["defining_x"])

    def test_d1_family(self):
        bundle = constructions.shifted_picket_solutions(1)
        sols = list(bundle.iter_solutions())
        assert len(sols) == 4
        b = bundle.targets[0][1]
        for _, y in sols:
            assert np.linalg.norm(bundle.dictionary.entries @ y - b) <= 1e-10
            assert 2 <= len(support_of(y)) <= 4


class TestKerdock:
    def test_block_zero_is_walsh_hadamard(self):
        blocks = constructions.kerdock_blocks(4)
        wh = constructions._walsh_hadamard(4)
        assert np.allclose(blocks[0], wh)

    def test_blocks_unitary_and_unbiased(self):
        blocks = constructions.kerdock_blocks(4)
        n = 16
        for B in blocks:
            assert np.max(np.abs(B.conj().T @ B - np.eye(n))) <= 1e-10
        for a, b in itertools.combinations(range(n), 2):
            M = np.abs(blocks[a].conj().T @ blocks[b])
            assert np.max(np.abs(M - 0.25)) <= 1e-10

    def test_coherence(self):
        bundle = constructions.kerdock_dictionary(4)
        assert lsa.coherence(bundle.dictionary) == pytest.approx(0.25, abs=1e-12)
        assert bundle.dictionary.m == 16 and bundle.dictionary.n_atoms == 256

    def test_coefficient_vectors_reproduce_picket_fence(self):
        bundle = constructions.kerdock_dictionary(4)
        z = bundle.vectors["picket_fence"]
        A = bundle.dictionary.entries
        for _, x in bundle.iter_solutions():
            assert np.linalg.norm(A @ x - z) <= 1e-10

    def test_picket_sparsity_cannot_hold_in_every_block(self):
        # A vector sqrt(n)-sparse in one unbiased block forces, through
        # equality in the two-basis uncertainty principle, flat
        # coefficients in every other block it is sqrt(n)-sparse in; the
        # subspace-spread count caps such blocks at sqrt(n)+1.  The comb
        # achieves sqrt(n) sparsity in exactly two of the 16 blocks.
        bundle = constructions.kerdock_dictionary(4)
        measured = bundle.predicted["x_sparsity_measured"]
        assert measured.count(4) == 2
        assert all(s >= 4 for s in measured)

    def test_small_even_dimension_allowed(self):
        bundle = constructions.kerdock_dictionary(2)
        assert lsa.coherence(bundle.dictionary) == pytest.approx(0.5, abs=1e-12)

    def test_odd_dimension_rejected(self):
        with pytest.raises(OddDimension):
            constructions.kerdock_dictionary(3)

    def test_untabled_size_rejected(self):
        with pytest.raises(InputError):
            constructions.kerdock_dictionary(8)


class TestKerdockMultiSolutions:
    def test_s1_disjoint_supports(self):
        bundle = constructions.kerdock_multi_solutions(4, 1)
        sols = list(bundle.iter_solutions())
        assert len(sols) == 16
        b = bundle.targets[0][1]
        A = bundle.dictionary.entries
        supports = [support_of(x) for _, x in sols]
        for (_, x), S in zip(sols, supports):
            assert np.linalg.norm(A @ x - b) <= 1e-10
        for S, T in itertools.combinations(supports, 2):
            assert not set(S) & set(T)

    def test_s2_count_and_multiplicity(self):
        bundle = constructions.kerdock_multi_solutions(4, 2)
        sols = list(bundle.iter_solutions())
        assert len(sols) == 120 == bundle.predicted["solution_count"]
        supports = [support_of(x) for _, x in sols]
        assert len(set(supports)) == 120
        counts = {}
        for S in supports:
            for a in S:
                counts[a] = counts.get(a, 0) + 1
        assert set(counts.values()) == {15}
        assert bundle.predicted["per_atom_multiplicity"] == 15

    def test_s_equals_n_single_solution(self):
        bundle = constructions.kerdock_multi_solutions(2, 4)
        assert len(list(bundle.iter_solutions())) == 1

    def test_s_out_of_range(self):
        with pytest.raises(SOutOfRange):
            constructions.kerdock_multi_solutions(2, 5)


class TestMuKTight:
    def test_k2_c3_values(self):
        bundle = constructions.mu_k_tight(2, 3)
        assert bundle.predicted["coherence"] == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert bundle.predicted["generalized_coherence"] == pytest.approx(1.0, abs=1e-12)
        assert lsa.coherence(bundle.dictionary) == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert lsa.generalized_coherence(bundle.dictionary, 2) == pytest.approx(1.0, abs=1e-9)

    def test_large_c_tracks_formula(self):
        bundle = constructions.mu_k_tight(2, 100.0)
        mu = lsa.coherence(bundle.dictionary)
        assert mu == pytest.approx(2 * 99 / (100**2 + 3), abs=1e-12)
        expect = min(2 * mu / (1 - mu), 1.0)
        assert lsa.generalized_coherence(bundle.dictionary, 2) == pytest.approx(
            expect, abs=1e-9
        )

    def test_columns_unit_norm(self):
        for k, c in ((2, 3), (3, 5), (3, 12)):
            A = constructions.mu_k_tight(k, c).dictionary.entries
            assert np.max(np.abs(np.linalg.norm(A, axis=0) - 1.0)) <= 1e-12

    def test_gram_is_flat(self):
        # every pair of distinct columns has the same |dot product|
        A = constructions.mu_k_tight(3, 7).dictionary.entries
        G = np.abs(A.conj().T @ A)
        off = G[~np.eye(6, dtype=bool)]
        assert np.ptp(off) <= 1e-12

    def test_parameter_guards(self):
        with pytest.raises(ParameterOutOfRange):
            constructions.mu_k_tight(1, 5)
        with pytest.raises(ParameterOutOfRange):
            constructions.mu_k_tight(2, 2.5)


class TestEquiangular:
    def test_n3_geometry(self):
        bundle = constructions.equiangular_lines_2d(3)
        D = bundle.dictionary
        assert lsa.coherence(D) == pytest.approx(0.5, abs=1e-12)  # cos 60
        assert lsa.spark(D) == 3

    def test_bisector_has_two_solutions(self):
        bundle = constructions.equiangular_lines_2d(3)
        sol = lsa.solve_list_sparse(bundle.dictionary, bundle.targets[0][1], 1)
        assert sol.support_count == 2

    def test_n4(self):
        bundle = constructions.equiangular_lines_2d(4)
        assert lsa.spark(bundle.dictionary) == 3
        assert np.linalg.matrix_rank(bundle.dictionary.entries) == 2

    def test_minimum_size(self):
        with pytest.raises(ParameterOutOfRange):
            constructions.equiangular_lines_2d(2)


class TestBundleContracts:
    @pytest.mark.parametrize(
        "name,params",
        [
            ("identity-bad-b", {"m": 5, "k": 2, "eps": 0.5}),
            ("tight-example", {"m": 5, "k": 1, "eps": 0.5}),
            ("spikes-sines", {"d": 2}),
            ("picket-solutions", {"d": 1}),
            ("kerdock", {"m": 2}),
            ("kerdock-solutions", {"m": 2, "s": 1}),
            ("mu-k-tight", {"k": 2, "c": 3}),
            ("equiangular-2d", {"n": 4}),
        ],
    )
    def test_predicted_coherence_matches_measured(self, name, params):
        bundle = constructions.build(name, **params)
        if "coherence" in bundle.predicted:
            assert lsa.coherence(bundle.dictionary) == pytest.approx(
                bundle.predicted["coherence"], abs=1e-12
            )
        # every claimed exact solution re-evaluates to residual <= 1e-10
        if bundle.solution_factory is not None and bundle.targets:
            b = bundle.targets[0][1]
            A = bundle.dictionary.entries
            for _, x in bundle.iter_solutions():
                assert np.linalg.norm(A @ x - b) <= 1e-10

    def test_registry_rejects_unknown_and_missing(self):
        with pytest.raises(InputError):
            constructions.build("nonesuch")
        with pytest.raises(InputError):
            constructions.build("kerdock")
        with pytest.raises(InputError):
            constructions.build("kerdock", m=2, bogus=1)
