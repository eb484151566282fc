import numpy as np
import pytest

from fermionic_nuclearity.errors import DomainError, InvariantError, ParityError, SeparationError
from fermionic_nuclearity.fields import field_phi, make_context, random_polynomial
from fermionic_nuclearity.fock import slater
from fermionic_nuclearity.golden import load_golden
from fermionic_nuclearity.nuclearity import (
    commutant,
    double_cone_intersection,
    empirical_nuclear_sum,
    estimate_check,
    expansion_identity_check,
    field_algebra,
    gamma_fixed_eigenbasis,
    generated_algebra,
    nuclear_bound,
    one_particle_T,
    separation_check,
    subset_sum_bound,
    xi_apply,
)
from fermionic_nuclearity.one_particle import (
    gamma,
    make_space,
    make_subspace_pair,
    random_positive,
    random_space,
    random_subspace_pair,
)

from conftest import cvec


def _real_context(d):
    """Plain conjugation with L = R^d, the span of the phi fields of e_1..e_d."""
    return make_context(make_subspace_pair(make_space(d), list(np.eye(d)), []))


def _span_contains(basis, mats, tol=1e-9):
    Q = np.column_stack([b.reshape(-1) for b in basis])
    return all(np.linalg.norm(m.reshape(-1) - Q @ (Q.conj().T @ m.reshape(-1))) < tol for m in mats)


class TestXi:
    def test_identity_gives_vacuum(self, random_context, rng):
        ctx = random_context(3)
        X = random_positive(ctx.fock.base, rng)
        np.testing.assert_allclose(xi_apply(ctx, X, np.eye(8)), ctx.fock.vacuum(), atol=1e-14)

    def test_field_gives_one_particle_vector(self, random_context, rng):
        ctx = random_context(3)
        space = ctx.fock.base
        X = random_positive(space, rng)
        v = cvec(rng, 3)
        psi = v + gamma(space, v)
        np.testing.assert_allclose(xi_apply(ctx, X, field_phi(ctx, psi)), slater(ctx.fock, X @ psi), atol=1e-12)

    def test_unit_X(self, random_context, rng):
        ctx = random_context(3)
        A = random_polynomial(ctx, 2, 4)
        np.testing.assert_allclose(xi_apply(ctx, np.eye(3), A), A.matrix[:, 0], atol=1e-14)

    def test_requires_gamma_commutation(self):
        ctx = make_context(make_subspace_pair(make_space(2, [[0, 1], [1, 0]]), [], []))
        with pytest.raises(InvariantError, match="Gamma"):
            xi_apply(ctx, np.diag([1.0, 0.5]), np.eye(4))


class TestExpansion:
    def test_single_field(self, random_context, rng):
        ctx = random_context(3, 2, 1)
        space = ctx.fock.base
        X = random_positive(space, rng)
        xi, xi2 = cvec(rng, 3), cvec(rng, 3)
        lhs, rhs = expansion_identity_check(ctx, X, [xi], field_phi(ctx, xi2))
        expected = np.vdot(gamma(space, X @ xi), xi2)
        assert lhs == pytest.approx(expected, abs=1e-12)
        assert rhs == pytest.approx(expected, abs=1e-12)

    def test_no_vectors(self, random_context, rng):
        ctx = random_context(3)
        X = random_positive(ctx.fock.base, rng)
        A = random_polynomial(ctx, 2, 1)
        lhs, rhs = expansion_identity_check(ctx, X, [], A)
        assert lhs == pytest.approx(A.matrix[0, 0], abs=1e-14)
        assert rhs == pytest.approx(lhs, abs=1e-14)

    @pytest.mark.parametrize("degree", [2, 3])
    def test_three_vectors_four_modes(self, rng, degree):
        space = random_space(4, rng)
        ctx = make_context(random_subspace_pair(space, 2, 2, rng))
        X = random_positive(space, rng, 0.9)
        xis = [cvec(rng, 4) for _ in range(3)]
        A = random_polynomial(ctx, degree, 17)
        lhs, rhs = expansion_identity_check(ctx, X, xis, A)
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))

    def test_mixed_rejected(self, random_context, rng):
        ctx = random_context(3, 2, 1)
        A = random_polynomial(ctx, 2, 0, mixed=True)
        with pytest.raises(ParityError):
            expansion_identity_check(ctx, np.eye(3), [cvec(rng, 3)], A)

    def test_estimate_with_annihilated_vector(self, rng):
        space = make_space(3)
        e = np.eye(3)
        ctx = make_context(make_subspace_pair(space, [e[0], e[1]], []))
        X = np.diag([0.8, 0.4, 0.6])
        A = random_polynomial(ctx, 3, 2)
        lhs, rhs = estimate_check(ctx, X, [e[0], e[2]], A)  # T e3 = 0
        assert rhs == 0.0 and lhs <= 1e-9

    def test_estimate_without_vectors(self, random_context, rng):
        ctx = random_context(3)
        A = random_polynomial(ctx, 2, 8)
        lhs, rhs = estimate_check(ctx, random_positive(ctx.fock.base, rng), [], A)
        assert lhs <= A.norm() + 1e-12 and rhs == pytest.approx(A.norm())


class TestBounds:
    def test_zero(self):
        rep = nuclear_bound(np.zeros((2, 2)), np.zeros((2, 2)))
        assert rep.det_bound == 1.0 and rep.exp_bound == 1.0 and rep.subset_sum == 1.0

    def test_half(self):
        rep = nuclear_bound(np.diag([0.5]), np.zeros((1, 1)))
        assert rep.det_bound == pytest.approx(2.0)
        assert rep.exp_bound == pytest.approx(np.e)

    def test_subset_sum_diagonal(self, rng):
        t = rng.uniform(0, 1, size=4)
        assert subset_sum_bound(t) == pytest.approx(np.prod(1 + 2 * t), rel=1e-12)

    def test_subset_sum_cap(self):
        with pytest.raises(DomainError):
            subset_sum_bound(np.ones(13))

    def test_chain(self, rng):
        for _ in range(20):
            d = int(rng.integers(1, 7))
            A, B = (0.3 * (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for _ in range(2))
            rep = nuclear_bound(A, B)
            assert rep.subset_sum == pytest.approx(rep.det_bound, rel=1e-12)
            assert rep.det_bound <= rep.exp_T_bound * (1 + 1e-12)
            assert rep.exp_T_bound <= rep.exp_bound * (1 + 1e-12)

    def test_gamma_fixed_eigenbasis(self, rng):
        space = random_space(4, rng)
        ctx = make_context(random_subspace_pair(space, 2, 1, rng))
        T = one_particle_T(ctx, random_positive(space, rng))
        t, b = gamma_fixed_eigenbasis(space, T)
        np.testing.assert_allclose(b.conj().T @ b, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(T @ b, b * t, atol=1e-10)
        for col in b.T:
            np.testing.assert_allclose(gamma(space, col), col, atol=1e-10)


class TestEmpirical:
    def test_zero_X(self):
        ctx = _real_context(2)
        rep = empirical_nuclear_sum(ctx, np.zeros((2, 2)), 10, 0)
        assert rep.det_bound == 1.0
        assert rep.empirical_sum <= 1.0 + 1e-12

    def test_single_sample_is_identity(self, rng):
        ctx = _real_context(3)
        rep = empirical_nuclear_sum(ctx, random_positive(ctx.fock.base, rng), 1, 0)
        expected = np.zeros(8)
        expected[0] = 1.0
        np.testing.assert_allclose(rep.functional_estimates, expected, atol=1e-12)
        assert rep.empirical_sum == pytest.approx(1.0)

    def test_below_det_bound(self, rng):
        space = random_space(3, rng)
        ctx = make_context(random_subspace_pair(space, 2, 1, rng))
        rep = empirical_nuclear_sum(ctx, random_positive(space, rng), 200, 5)
        assert rep.empirical_sum <= rep.det_bound
        assert all(e <= b + 1e-9 for e, b in zip(rep.functional_estimates, rep.functional_bounds))

    def test_thread_count_does_not_matter(self, rng, monkeypatch):
        ctx = _real_context(3)
        X = random_positive(ctx.fock.base, rng)
        monkeypatch.setenv("NUCLEARITY_THREADS", "1")
        one = empirical_nuclear_sum(ctx, X, 30, 3)
        monkeypatch.setenv("NUCLEARITY_THREADS", "3")
        three = empirical_nuclear_sum(ctx, X, 30, 3)
        assert one.functional_estimates == three.functional_estimates

    def test_not_separating(self):
        ctx = make_context(make_subspace_pair(make_space(1), [[1]], [[1]]))
        with pytest.raises(SeparationError):
            empirical_nuclear_sum(ctx, np.eye(1), 4, 0)


class TestSeparation:
    @pytest.mark.parametrize("d", [1, 2, 3, 4])
    def test_real_subspace(self, d):
        assert separation_check(_real_context(d))

    def test_empty(self):
        assert separation_check(make_context(make_subspace_pair(make_space(2), [], [])))

    def test_full_space_is_not_separating(self):
        # phi and pi fields together generate every matrix, which cannot act injectively on Omega
        e = list(np.eye(2))
        assert not separation_check(make_context(make_subspace_pair(make_space(2), e, e)))


class TestCommutant:
    def test_of_identity(self):
        assert commutant([np.eye(4)]).shape[0] == 16

    def test_of_all_matrices(self):
        units = [np.eye(4)[:, [i]] @ np.eye(4)[[j]] for i in range(4) for j in range(4)]
        (b,) = commutant(units)
        np.testing.assert_allclose(np.abs(b), np.eye(4) / 2, atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            commutant([])

    @pytest.mark.parametrize("d,k_phi,k_pi", [(2, 1, 0), (2, 1, 1), (3, 1, 1), (3, 2, 0)])
    def test_double_commutant_is_generated_algebra(self, rng, d, k_phi, k_pi):
        ctx = make_context(random_subspace_pair(random_space(d, rng), k_phi, k_pi, rng))
        gens = ctx.generators()
        alg = generated_algebra(gens, ctx.fock.dim)
        double = commutant(commutant(gens))
        assert double.shape[0] == alg.shape[0]
        assert _span_contains(double, alg)

    def test_field_algebra_matches_generic_closure(self, rng):
        ctx = make_context(random_subspace_pair(random_space(3, rng), 2, 1, rng))
        fast = field_algebra(ctx)
        slow = generated_algebra(ctx.generators(), ctx.fock.dim)
        assert fast.shape[0] == slow.shape[0]
        assert _span_contains(slow, fast)


class TestIntersection:
    def test_trivial_second_region(self, rng):
        ctx1 = make_context(random_subspace_pair(random_space(2, rng), 1, 0, rng))
        ctx2 = make_context(make_subspace_pair(ctx1.fock.base, [], []))
        res = double_cone_intersection(ctx1, ctx2)
        assert res.dimension == field_algebra(ctx1).shape[0]
        assert res.max_defect < 1e-9

    def test_full_regions(self):
        e = list(np.eye(2))
        ctx = make_context(make_subspace_pair(make_space(2), e, e))
        res = double_cone_intersection(ctx, ctx)
        assert res.dimension == 1
        assert res.max_defect < 1e-9

    def test_nested_fixture(self):
        space = make_space(3)
        e = np.eye(3)
        ctx1 = make_context(make_subspace_pair(space, [e[0], e[1]], [e[2]]))
        ctx2 = make_context(make_subspace_pair(space, [e[0]], []))
        res = double_cone_intersection(ctx1, ctx2)
        assert res.dimension == load_golden()["intersection"]["dimension"] == 4
        assert res.max_defect < 1e-9
        for b in res.basis:
            phi = field_phi(ctx2, e[0]).matrix
            np.testing.assert_allclose(b @ phi, phi @ b, atol=1e-9)

    def test_different_fock_spaces(self):
        c1 = make_context(make_subspace_pair(make_space(2), [], []))
        c2 = make_context(make_subspace_pair(make_space(3), [], []))
        with pytest.raises(DomainError):
            double_cone_intersection(c1, c2)
