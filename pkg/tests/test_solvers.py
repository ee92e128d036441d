import itertools
import math

import numpy as np
import pytest

import lsa
from lsa import constructions
from lsa.bounds import random_dictionary
from lsa.errors import BudgetExceeded, InputError, WitnessNotFound, ZeroTarget
from lsa.solvers import EXACT_SIZE, MINIMAL_SUPPORTS, SupportTable

from conftest import brute_best_residual, projector_residual


def _dup_column_dictionary():
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    return lsa.new_dictionary(A)


class TestLeastSquares:
    def test_projection_onto_axis(self):
        D = lsa.new_dictionary(np.eye(3))
        sol = lsa.least_squares(D, (0,), np.array([0.6, 0.8, 0.0]))
        assert sol.coefficients[0] == pytest.approx(0.6, abs=1e-12)
        assert sol.residual == pytest.approx(0.8, abs=1e-12)
        assert sol.coeffs_unique

    def test_duplicated_column_minimum_norm(self):
        D = _dup_column_dictionary()
        b = np.array([1.0, 0.0, 0.0])
        sol = lsa.least_squares(D, (0, 2), b)
        assert sol.residual == pytest.approx(0.0, abs=1e-12)
        assert not sol.coeffs_unique
        # minimum-norm solution splits the weight evenly
        assert np.allclose(sol.coefficients, [0.5, 0.5])

    def test_projector_oracle_on_picket_subset(self):
        bundle = constructions.spikes_and_sines(1)
        D = bundle.dictionary
        z = bundle.vectors["kernel"]
        support = [int(i) for i in np.flatnonzero(np.abs(z) > 1e-12)]
        removed = support.pop()
        b = D.column(removed) * z[removed]
        sol = lsa.least_squares(D, support, b)
        assert sol.residual == pytest.approx(
            projector_residual(D.entries, support, b), abs=1e-12
        )
        # z is a kernel vector, so the removed contribution is in the span
        assert sol.residual == pytest.approx(0.0, abs=1e-10)

    def test_residual_reevaluates(self, small_corpus):
        rng = np.random.default_rng(9)
        for D in small_corpus[:5]:
            b = rng.standard_normal(D.m)
            sol = lsa.least_squares(D, (0, 1), b)
            direct = np.linalg.norm(D.entries[:, [0, 1]] @ sol.coefficients - b)
            assert sol.residual == pytest.approx(float(direct), abs=1e-10)


class TestSolveListSparse:
    def test_identity_unique_argmax(self):
        D = lsa.new_dictionary(np.eye(3))
        b = np.array([3.0, 2.0, 1.0]) / math.sqrt(14)
        sol = lsa.solve_list_sparse(D, b, 1)
        assert sol.supports == [(0,)]
        assert sol.finite and sol.support_count == 1

    def test_equiangular_bisector_two_optima(self):
        bundle = constructions.equiangular_lines_2d(3)
        sol = lsa.solve_list_sparse(bundle.dictionary, bundle.targets[0][1], 1)
        assert sol.support_count == 2
        assert sol.supports == [(0,), (1,)]
        assert sol.optimal_residual == pytest.approx(math.sin(math.pi / 6), abs=1e-12)

    def test_infinite_when_k_reaches_spark(self):
        D = _dup_column_dictionary()
        b = np.array([1.0, 0.0, 0.0])  # in the span of the dependent pair
        sol = lsa.solve_list_sparse(D, b, 2)
        assert not sol.finite

    def test_finite_below_spark(self):
        D = _dup_column_dictionary()
        b = np.array([1.0, 0.0, 0.0])
        assert lsa.solve_list_sparse(D, b, 1).finite

    def test_minimal_support_reduction(self):
        # b on an axis: {0} is optimal, any superset is suppressed
        D = lsa.new_dictionary(np.eye(3))
        b = np.array([1.0, 0.0, 0.0])
        sol = lsa.solve_list_sparse(D, b, 2)
        assert sol.supports == [(0,)]

    def test_zero_target_rejected(self):
        D = lsa.new_dictionary(np.eye(3))
        with pytest.raises(ZeroTarget):
            lsa.solve_list_sparse(D, np.zeros(3), 1)

    def test_optimality_against_full_reenumeration(self, small_corpus):
        rng = np.random.default_rng(4)
        for D in small_corpus[:6]:
            b = rng.standard_normal(D.m)
            b /= np.linalg.norm(b)
            sol = lsa.solve_list_sparse(D, b, 2)
            assert sol.optimal_residual == pytest.approx(
                brute_best_residual(D.entries, b, 2), abs=1e-10
            )
            for s in sol.solutions:
                assert s.residual <= sol.optimal_residual * (1 + 1e-9) + 1e-9

    def test_solutions_sorted_and_residuals_recheck(self, small_corpus):
        rng = np.random.default_rng(8)
        for D in small_corpus[:6]:
            b = rng.standard_normal(D.m)
            sol = lsa.solve_list_sparse(D, b, 2)
            assert sol.supports == sorted(sol.supports)
            for s in sol.solutions:
                assert s.residual == pytest.approx(
                    projector_residual(D.entries, s.support, b), abs=1e-10
                )


class TestSolveListApprox:
    def test_identity_bad_b_counts(self):
        bundle = constructions.identity_bad_b(5, 2, 0.5)
        b = bundle.targets[0][1]
        sol = lsa.solve_list_approx(bundle.dictionary, b, 2, 0.5)
        assert sol.support_count == 4
        assert all(0 in s for s in sol.supports)

    def test_exact_size_vs_minimal_modes(self):
        D = lsa.new_dictionary(np.eye(3))
        b = np.array([1.0, 0.0, 0.0])
        exact = lsa.solve_list_approx(D, b, 2, eps=0.0, mode=EXACT_SIZE)
        minimal = lsa.solve_list_approx(D, b, 2, eps=0.0, mode=MINIMAL_SUPPORTS)
        # exact-size counts the two supersets {0,1}, {0,2}; minimal just {0}
        assert exact.supports == [(0, 1), (0, 2)]
        assert minimal.supports == [(0,)]

    def test_picket_solutions_show_up_at_eps_zero(self):
        bundle = constructions.shifted_picket_solutions(1)
        D = bundle.dictionary
        b = bundle.targets[0][1]
        built = [tuple(np.flatnonzero(np.abs(y) > 1e-12)) for _, y in bundle.iter_solutions()]
        sol = lsa.solve_list_approx(D, b, 4, eps=0.0, mode=MINIMAL_SUPPORTS)
        assert sol.support_count >= 1
        minimals = [set(s) for s in sol.supports]
        for supp in built:
            assert any(mins <= set(supp) for mins in minimals)
        exact = lsa.solve_list_approx(D, b, 4, eps=0.0, mode=EXACT_SIZE)
        for supp in built:
            if len(supp) == 4:
                assert supp in exact.supports

    def test_monotone_in_eps(self, small_corpus):
        rng = np.random.default_rng(2)
        for D in small_corpus[:4]:
            b = rng.standard_normal(D.m)
            b /= np.linalg.norm(b)
            counts = [
                lsa.solve_list_approx(D, b, 2, eps).support_count
                for eps in (0.2, 0.5, 0.8)
            ]
            assert counts == sorted(counts)

    def test_negative_eps_rejected(self):
        D = lsa.new_dictionary(np.eye(3))
        with pytest.raises(InputError):
            lsa.solve_list_approx(D, np.array([1.0, 0, 0]), 1, -0.1)

    def test_budget(self):
        D = lsa.new_dictionary(np.eye(6))
        with pytest.raises(BudgetExceeded):
            lsa.solve_list_approx(D, np.ones(6) / math.sqrt(6), 3, 0.5, budget=5)


class TestRestrictedListSize:
    def test_shared_atom_forces_one(self):
        bundle = constructions.identity_bad_b(5, 2, 0.5)
        sol = lsa.solve_list_approx(bundle.dictionary, bundle.targets[0][1], 2, 0.5)
        assert lsa.restricted_list_size(sol.supports, 1) == 1

    def test_disjoint_family_counts_fully(self):
        supports = [(0, 1), (2, 3), (4, 5)]
        for R in (1, 2, 5):
            assert lsa.restricted_list_size(supports, R) == 3

    def test_monotone_in_R_and_capped_by_total(self):
        supports = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)]
        values = [lsa.restricted_list_size(supports, R) for R in (1, 2, 3, 4)]
        assert values == sorted(values)
        assert values[-1] == len(supports)  # R >= max multiplicity

    def test_kerdock_multiplicity_census(self):
        bundle = constructions.kerdock_multi_solutions(4, 2)
        supports = [
            tuple(int(i) for i in np.flatnonzero(np.abs(x) > 1e-12))
            for _, x in bundle.iter_solutions()
        ]
        assert len(supports) == 120
        # every used atom appears in exactly 15 supports, so R=15 packs all
        assert lsa.restricted_list_size(supports, 15) == 120

    def test_exactness_against_brute_force(self):
        rng = np.random.default_rng(6)
        atoms = 6
        for _ in range(10):
            supports = sorted(
                {
                    tuple(sorted(rng.choice(atoms, size=2, replace=False)))
                    for _ in range(5)
                }
            )
            for R in (1, 2):
                best = 0
                for r in range(len(supports), -1, -1):
                    for sub in itertools.combinations(supports, r):
                        counts = {}
                        for S in sub:
                            for a in S:
                                counts[a] = counts.get(a, 0) + 1
                        if all(v <= R for v in counts.values()):
                            best = r
                            break
                    if best:
                        break
                assert lsa.restricted_list_size(supports, R) == best

    def test_invalid_R(self):
        with pytest.raises(InputError):
            lsa.restricted_list_size([(0, 1)], 0)


class TestWitnessSearch:
    def test_case1_duplicated_column_infinite(self):
        D = _dup_column_dictionary()
        res = lsa.find_multi_solution_witness(D, 2, seed=0)
        assert res.case == 1
        assert not res.finite

    def test_case2_duplicated_column_k1(self):
        D = _dup_column_dictionary()
        res = lsa.find_multi_solution_witness(D, 1, seed=0)
        assert res.case == 2
        assert res.verified_count > 1

    def test_case3_equiangular(self):
        D = constructions.equiangular_lines_2d(3).dictionary
        res = lsa.find_multi_solution_witness(D, 1, seed=0)
        assert res.case == 3
        assert res.verified_count >= 2
        # re-verify through the solver from scratch
        sol = lsa.solve_list_sparse(D, res.b, 1)
        assert sol.support_count == res.verified_count

    def test_case3_random_3x5(self):
        D = random_dictionary(3, 5, seed=3)
        assert lsa.spark(D) > 3
        res = lsa.find_multi_solution_witness(D, 2, seed=0)
        assert res.verified_count > 2 or not res.finite

    def test_budget_exhaustion_reports_honestly(self):
        D = random_dictionary(3, 5, seed=3)
        with pytest.raises(WitnessNotFound):
            lsa.find_multi_solution_witness(D, 2, seed=0, max_tuples=0)


class TestMonteCarlo:
    def test_unique_below_spark_minus_one(self):
        D = random_dictionary(3, 5, seed=3)  # spark 4
        stats = lsa.monte_carlo_list_stats(D, 2, trials=100, seed=1)
        assert stats.unique_fraction == 1.0

    def test_infinite_iff_k_exceeds_rank(self):
        D = random_dictionary(3, 5, seed=3)  # rank 3
        assert lsa.monte_carlo_list_stats(D, 3, trials=50, seed=1).infinite_fraction == 0.0
        assert lsa.monte_carlo_list_stats(D, 4, trials=50, seed=1).infinite_fraction == 1.0

    def test_ties_surface_at_spark_minus_one(self):
        # equiangular(3): spark 3, k = 2 = spark - 1 >= rank: dependent pairs
        # do not exist, but distinct pairs span the same plane, so ties occur
        D = constructions.equiangular_lines_2d(3).dictionary
        stats = lsa.monte_carlo_list_stats(D, 2, trials=40, seed=2)
        assert stats.unique_fraction < 1.0

    def test_deterministic_given_seed(self):
        D = random_dictionary(4, 7, seed=5)
        a = lsa.monte_carlo_list_stats(D, 2, trials=30, seed=9)
        b = lsa.monte_carlo_list_stats(D, 2, trials=30, seed=9)
        assert a == b


class TestUncertaintyPrinciple:
    @pytest.mark.parametrize("d", [1, 2])
    def test_picket_fence_meets_two_onb_bound_exactly(self, d):
        bundle = constructions.spikes_and_sines(d)
        D = bundle.dictionary
        n = bundle.parameters["n"]
        v = bundle.vectors["picket_fence"]
        F = D.entries[:, :n]
        spikes_coeff = v  # representation in the canonical block
        fourier_coeff = F.conj().T @ v
        k_spikes = int(np.count_nonzero(np.abs(spikes_coeff) > 1e-12))
        k_fourier = int(np.count_nonzero(np.abs(fourier_coeff) > 1e-12))
        mu = lsa.coherence(D)
        assert k_spikes + k_fourier >= 2.0 / mu - 1e-9
        assert k_spikes + k_fourier == 2 * math.isqrt(n)

    def test_random_two_basis_representations_respect_bound(self):
        bundle = constructions.spikes_and_sines(2)
        D = bundle.dictionary
        n = bundle.parameters["n"]
        mu = lsa.coherence(D)
        F = D.entries[:, :n]
        rng = np.random.default_rng(3)
        for _ in range(10):
            b = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            k_f = int(np.count_nonzero(np.abs(F.conj().T @ b) > 1e-12))
            k_s = int(np.count_nonzero(np.abs(b) > 1e-12))
            assert k_f + k_s >= 2.0 / mu - 1e-9


class TestUniquenessRecovery:
    def test_exact_representation_unique_below_half_spark(self, small_corpus):
        rng = np.random.default_rng(12)
        for D in small_corpus[:6]:
            s = lsa.spark(D)
            k = 1 if s <= 3 else 2
            if not k < s / 2:
                continue
            S = tuple(sorted(rng.choice(D.n_atoms, size=k, replace=False)))
            b = D.entries[:, S] @ (1.0 + rng.random(k))
            sol = lsa.solve_list_approx(D, b, k, eps=0.0, mode=MINIMAL_SUPPORTS)
            assert sol.support_count <= 1

    def test_unique_below_mu_threshold(self):
        D = constructions.kerdock_dictionary(2).dictionary  # mu = 1/2
        # k < (1/mu + 1)/2 = 1.5 -> k = 1 exact representations unique
        b = D.column(3)
        sol = lsa.solve_list_approx(D, b, 1, eps=0.0, mode=MINIMAL_SUPPORTS)
        assert sol.support_count == 1


class TestSupportTable:
    def test_residual_matrix_matches_scalar_path(self, small_corpus):
        rng = np.random.default_rng(10)
        D = small_corpus[0]
        table = SupportTable(D, 2)
        B = rng.standard_normal((D.m, 3))
        res = table.residuals(B)
        for t in range(3):
            for i, S in enumerate(table.supports):
                assert res[i, t] == pytest.approx(
                    projector_residual(D.entries, S, B[:, t]), abs=1e-10
                )
