from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermionic_nuclearity.errors import CapacityError, DomainError
from fermionic_nuclearity.fock import (
    FockOperator,
    annihilator,
    classify_parity,
    creator,
    fock_space,
    occupation_vector,
    parity_diagonal,
    parity_operator,
    scattering_operator,
    second_quantize,
    second_quantize_via_slater,
    sector_block,
    slater,
)

from conftest import cvec


def _perm_sign(p):
    p = list(p)
    sign = 1
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def antisymmetrized_coefficients(fock, psis):
    """Fock vector from the explicit antisymmetrized tensor sum_sigma sgn(sigma) psi_sigma(1) x ... ."""
    n, d = len(psis), fock.modes
    tensor = np.zeros((d,) * n, dtype=np.complex128)
    for perm in permutations(range(n)):
        term = np.ones((), dtype=np.complex128)
        for i in perm:
            term = np.multiply.outer(term, psis[i])
        tensor = tensor + _perm_sign(perm) * term
    out = np.zeros(fock.dim, dtype=np.complex128)
    for idx in fock.sector(n):
        occ = [k for k in range(d) if idx >> k & 1]
        out[idx] = tensor[tuple(occ)]
    return out


class TestSpace:
    def test_dimension(self):
        assert fock_space(5).dim == 32
        assert list(fock_space(3).sector(2)) == [3, 5, 6]

    def test_capacity(self):
        with pytest.raises(CapacityError):
            fock_space(15)


class TestCreation:
    def test_single_mode(self):
        np.testing.assert_array_equal(creator(fock_space(1), [1]).matrix, [[0, 0], [1, 0]])

    def test_orthogonal_modes_anticommute(self):
        fock = fock_space(2)
        a1 = annihilator(fock, [1, 0]).matrix
        c2 = creator(fock, [0, 1]).matrix
        np.testing.assert_allclose(a1 @ c2 + c2 @ a1, 0, atol=1e-15)

    def test_jordan_wigner_sign(self):
        fock = fock_space(2)
        # a*_2 acting on |1> picks up one sign for the occupied mode below it
        out = creator(fock, [0, 1]).matrix @ occupation_vector(fock, [0])
        np.testing.assert_allclose(out, -occupation_vector(fock, [0, 1]))

    @settings(max_examples=40, deadline=None)
    @given(d=st.integers(1, 6), seed=st.integers(0, 2**31))
    def test_car_and_norm(self, d, seed):
        rng = np.random.default_rng(seed)
        fock = fock_space(d)
        p1, p2 = cvec(rng, d), cvec(rng, d)
        a1, a2 = annihilator(fock, p1).matrix, annihilator(fock, p2).matrix
        c2 = a2.conj().T
        np.testing.assert_allclose(a1 @ a2 + a2 @ a1, 0, atol=1e-12)
        np.testing.assert_allclose(a1 @ c2 + c2 @ a1, np.vdot(p1, p2) * np.eye(fock.dim), atol=1e-12)
        assert np.linalg.norm(c2, 2) == pytest.approx(np.linalg.norm(p2), abs=1e-10)

    def test_linearity(self, rng):
        fock = fock_space(3)
        p, q = cvec(rng, 3), cvec(rng, 3)
        z = 0.3 - 1.2j
        np.testing.assert_allclose(creator(fock, p + z * q).matrix,
                                   creator(fock, p).matrix + z * creator(fock, q).matrix, atol=1e-14)
        np.testing.assert_allclose(annihilator(fock, z * p).matrix,
                                   np.conj(z) * annihilator(fock, p).matrix, atol=1e-14)

    def test_validated_creator(self, rng):
        creator(fock_space(3), cvec(rng, 3), validate=True)

    def test_wrong_length(self):
        with pytest.raises(DomainError):
            creator(fock_space(2), [1, 0, 0])


class TestSlater:
    def test_empty_is_vacuum(self):
        fock = fock_space(3)
        np.testing.assert_array_equal(slater(fock), fock.vacuum())

    def test_pauli(self):
        np.testing.assert_array_equal(slater(fock_space(2), [1, 0], [1, 0]), 0)

    def test_antisymmetric(self):
        fock = fock_space(2)
        e1, e2 = np.eye(2)
        np.testing.assert_allclose(slater(fock, e1, e2), -slater(fock, e2, e1))

    def test_orthonormal_inputs_give_unit_norm(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3)))
        assert np.linalg.norm(slater(fock_space(4), *q.T)) == pytest.approx(1.0)

    def test_too_many_particles(self):
        with pytest.raises(DomainError):
            slater(fock_space(1), [1], [1])

    @settings(max_examples=30, deadline=None)
    @given(d=st.integers(1, 5), seed=st.integers(0, 2**31))
    def test_matches_antisymmetrized_tensor(self, d, seed):
        rng = np.random.default_rng(seed)
        fock = fock_space(d)
        psis = [cvec(rng, d) for _ in range(int(rng.integers(0, min(d, 3) + 1)))]
        np.testing.assert_allclose(slater(fock, *psis), antisymmetrized_coefficients(fock, psis), atol=1e-11)


class TestSecondQuantization:
    def test_identity(self):
        fock = fock_space(3)
        np.testing.assert_allclose(second_quantize(fock, np.eye(3)).matrix, np.eye(8), atol=1e-15)

    def test_diagonal_two_particle(self):
        fock = fock_space(2)
        block = sector_block(fock, second_quantize(fock, np.diag([0.7, -1.3])), 2)
        np.testing.assert_allclose(block, [[0.7 * -1.3]])

    def test_zero_is_vacuum_projection(self):
        fock = fock_space(3)
        expected = np.zeros((8, 8))
        expected[0, 0] = 1
        np.testing.assert_allclose(second_quantize(fock, np.zeros((3, 3))).matrix, expected)

    @settings(max_examples=25, deadline=None)
    @given(d=st.integers(1, 4), seed=st.integers(0, 2**31))
    def test_tensor_power_oracle(self, d, seed):
        rng = np.random.default_rng(seed)
        fock = fock_space(d)
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        psis = [cvec(rng, d) for _ in range(int(rng.integers(0, min(d, 3) + 1)))]
        lam = second_quantize(fock, X).matrix
        expected = antisymmetrized_coefficients(fock, [X @ p for p in psis])
        np.testing.assert_allclose(lam @ slater(fock, *psis), expected, atol=1e-10)

    def test_two_paths_agree(self, rng):
        fock = fock_space(4)
        X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        np.testing.assert_allclose(second_quantize(fock, X).matrix,
                                   second_quantize_via_slater(fock, X).matrix, atol=1e-12)

    def test_multiplicative(self, rng):
        fock = fock_space(3)
        X, Y = (rng.normal(size=(3, 3)) for _ in range(2))
        np.testing.assert_allclose(second_quantize(fock, X @ Y).matrix,
                                   second_quantize(fock, X).matrix @ second_quantize(fock, Y).matrix,
                                   atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            second_quantize(fock_space(2), np.eye(3))


class TestParity:
    def test_single_mode(self):
        fock = fock_space(1)
        np.testing.assert_array_equal(np.diag(parity_operator(fock).matrix).real, [1, -1])
        np.testing.assert_array_equal(np.diag(scattering_operator(fock).matrix).real, [1, 1])

    def test_two_particles(self):
        fock = fock_space(2)
        v = occupation_vector(fock, [0, 1])
        assert v @ parity_operator(fock).matrix @ v == 1
        assert v @ scattering_operator(fock).matrix @ v == -1

    def test_classification(self, rng):
        fock = fock_space(3)
        P = parity_diagonal(fock)
        c = creator(fock, cvec(rng, 3)).matrix
        assert classify_parity(c, P) == "odd"
        assert classify_parity(c @ c.conj().T, P) == "even"
        assert classify_parity(c + c @ c.conj().T, P) == "mixed"
        assert FockOperator.from_matrix(fock, c).parity == "odd"
