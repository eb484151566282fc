import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermionic_nuclearity.errors import DomainError, InvariantError
from fermionic_nuclearity.one_particle import (
    combine_T,
    double_primed_vector,
    fermi_bose_compare,
    gamma,
    make_space,
    make_subspace_pair,
    primed_vector,
    random_space,
    random_subspace_pair,
    real_basis,
    real_span,
    symplectic_defect,
    trace_norm,
)

from conftest import cvec

SWAP = np.array([[0, 1], [1, 0]])


class TestSpace:
    def test_identity_is_conjugation(self):
        space = make_space(2)
        np.testing.assert_allclose(gamma(space, [1j, 0]), [-1j, 0])

    def test_swap(self):
        space = make_space(2, SWAP)
        np.testing.assert_allclose(gamma(space, [1, 1j]), [-1j, 1])

    def test_diagonal_phase_is_an_involution(self):
        # diag(1, i) is unitary and symmetric, so C conj(C) = 1 and Gamma^2 = 1
        space = make_space(2, np.diag([1, 1j]))
        psi = np.array([0.3 + 1j, -2 + 0.5j])
        np.testing.assert_allclose(gamma(space, gamma(space, psi)), psi)

    def test_antisymmetric_rejected(self):
        with pytest.raises(InvariantError, match="symmetric"):
            make_space(2, [[0, 1], [-1, 0]])

    def test_non_unitary_rejected(self):
        with pytest.raises(InvariantError, match="unitary"):
            make_space(2, np.diag([1, 2]))

    def test_bad_dimension(self):
        with pytest.raises(DomainError):
            make_space(0)
        with pytest.raises(InvariantError):
            make_space(3, np.eye(2))

    @settings(max_examples=30, deadline=None)
    @given(d=st.integers(1, 6), seed=st.integers(0, 2**31))
    def test_gamma_involutive_and_antiunitary(self, d, seed):
        rng = np.random.default_rng(seed)
        space = random_space(d, rng)
        psi, xi = cvec(rng, d), cvec(rng, d)
        np.testing.assert_allclose(gamma(space, gamma(space, psi)), psi, atol=1e-12)
        assert np.vdot(gamma(space, psi), gamma(space, xi)) == pytest.approx(np.vdot(xi, psi), abs=1e-10)


class TestSubspaces:
    def test_same_line_for_both(self):
        space = make_space(2)
        e1 = np.array([1, 0])
        pair = make_subspace_pair(space, [e1], [e1])
        expected = np.outer(e1, e1)
        np.testing.assert_allclose(pair.proj_phi, expected)
        np.testing.assert_allclose(pair.proj_pi, expected)

    def test_duplicates_dropped(self):
        pair = make_subspace_pair(make_space(2), [[1, 0], [2, 0]], [])
        assert pair.basis_phi.shape == (2, 1)

    def test_non_invariant_rejected(self):
        with pytest.raises(InvariantError, match="not Gamma-invariant"):
            make_subspace_pair(make_space(2), [[1, 1j]], [])

    def test_real_span_phi_line(self):
        pair = make_subspace_pair(make_space(2), [[1, 0]], [])
        vecs = real_span(pair)
        np.testing.assert_allclose(vecs[0], [2, 0])
        np.testing.assert_allclose(vecs[1], [0, 0])
        assert len(real_basis(pair)) == 1

    def test_real_span_pi_line(self):
        pair = make_subspace_pair(make_space(2), [], [[1, 0]])
        (b,) = real_basis(pair)
        assert abs(b[0].real) < 1e-14 and abs(abs(b[0]) - 1) < 1e-14

    def test_full_space_has_real_dimension_2d(self):
        d = 3
        e = np.eye(d)
        pair = make_subspace_pair(make_space(d), list(e), list(e))
        assert len(real_basis(pair)) == 2 * d


class TestSymplectic:
    def test_orthogonal_vector_has_no_defect(self):
        pair = make_subspace_pair(make_space(2), [[1, 0]], [])
        assert symplectic_defect(pair, [0, 1]) == 0.0

    def test_real_direction(self):
        pair = make_subspace_pair(make_space(2), [[1, 0]], [])
        assert symplectic_defect(pair, [1, 0]) == pytest.approx(0.0, abs=1e-15)

    def test_imaginary_direction(self):
        # evaluated on the unnormalized spanning vector 2 e1: |<i e1, 2e1> - <2e1, i e1>| = 4
        pair = make_subspace_pair(make_space(2), [[1, 0]], [])
        assert symplectic_defect(pair, [1j, 0]) == pytest.approx(4.0)

    def test_primed_full_and_empty(self, rng):
        space = make_space(3)
        e = list(np.eye(3))
        psi = cvec(rng, 3)
        full = make_subspace_pair(space, e, e)
        empty = make_subspace_pair(space, [], [])
        np.testing.assert_allclose(primed_vector(full, psi), 0, atol=1e-14)
        np.testing.assert_allclose(primed_vector(empty, psi), psi)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_primed_in_complement(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 5))
        space = random_space(d, rng)
        pair = random_subspace_pair(space, int(rng.integers(0, d + 1)), int(rng.integers(0, d + 1)), rng)
        psi = cvec(rng, d)
        assert symplectic_defect(pair, primed_vector(pair, psi)) < 1e-9
        # the double-primed vector is i times an element of the complement
        assert symplectic_defect(pair, -1j * double_primed_vector(pair, psi)) < 1e-9


class TestNorms:
    def test_trace_norm_diagonal(self):
        assert trace_norm(np.diag([0.5, 0.25])) == pytest.approx(0.75)
        assert trace_norm(np.zeros((2, 2))) == 0.0

    def test_trace_norm_against_eigenvalues(self, rng):
        T = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        w = np.linalg.eigvalsh(T.conj().T @ T)
        assert trace_norm(T) == pytest.approx(np.sqrt(np.clip(w, 0, None)).sum(), rel=1e-12)

    def test_combine_with_zero_is_modulus(self, rng):
        T = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        u, s, vh = np.linalg.svd(T)
        np.testing.assert_allclose(combine_T(T, np.zeros((3, 3))), (vh.conj().T * s) @ vh, atol=1e-12)

    def test_combine_pythagorean(self):
        np.testing.assert_allclose(combine_T(np.diag([3, 0]), np.diag([4, 0])), np.diag([5, 0]), atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**31))
    def test_combined_trace_norm_subadditive(self, seed):
        rng = np.random.default_rng(seed)
        d = int(rng.integers(1, 6))
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        B = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        T = combine_T(A, B)
        assert trace_norm(T) <= trace_norm(A) + trace_norm(B) + 1e-9
        np.testing.assert_allclose(T @ T, A.conj().T @ A + B.conj().T @ B, atol=1e-9)

    def test_combine_shape_mismatch(self):
        with pytest.raises(DomainError):
            combine_T(np.eye(2), np.eye(3))


class TestFermiBose:
    def test_single_value(self):
        fermi, bose = fermi_bose_compare(np.diag([0.5]))
        assert fermi == pytest.approx(np.e)
        assert bose == pytest.approx(4.0)

    def test_two_values(self):
        fermi, bose = fermi_bose_compare(np.diag([0.9, 0.1]))
        assert fermi == pytest.approx(np.exp(2.0))
        assert bose == pytest.approx(1 / (0.1 * 0.9) ** 2)
        assert bose == pytest.approx(123.457, rel=1e-5)

    def test_vanishing(self):
        fermi, bose = fermi_bose_compare(1e-12 * np.eye(2))
        assert fermi == pytest.approx(1.0) and bose == pytest.approx(1.0)

    def test_norm_one_rejected(self):
        with pytest.raises(DomainError):
            fermi_bose_compare(np.eye(2))
