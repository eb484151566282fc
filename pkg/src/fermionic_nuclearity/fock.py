"""Antisymmetric Fock space over a finite-dimensional one-particle space.

Basis states are occupation bitmasks: bit ``k`` of the index is set when mode
``k`` is occupied, so the vacuum is index 0. The Jordan-Wigner sign of
``a*_k`` counts the occupied modes strictly below ``k``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from . import kernels
from .config import MAX_MODES, TOL
from .errors import CapacityError, DomainError
from .one_particle import OneParticleSpace, make_space


@dataclass(frozen=True)
class FockSpace:
    base: OneParticleSpace

    def __post_init__(self):
        if self.base.dim > MAX_MODES:
            raise CapacityError(
                f"{self.base.dim} modes exceeds the dense limit of {MAX_MODES}"
            )

    @property
    def modes(self):
        return self.base.dim

    @property
    def dim(self):
        return 1 << self.base.dim

    @cached_property
    def particle_numbers(self):
        return np.array([bin(n).count("1") for n in range(self.dim)])

    def vacuum(self):
        v = np.zeros(self.dim, dtype=np.complex128)
        v[0] = 1.0
        return v

    def sector(self, n):
        """Indices of the n-particle occupation states, in increasing order."""
        return np.flatnonzero(self.particle_numbers == n)


def fock_space(d_or_space):
    if isinstance(d_or_space, OneParticleSpace):
        return FockSpace(d_or_space)
    return FockSpace(make_space(d_or_space))


def classify_parity(matrix, parity_diag, tol=TOL.structural):
    """'even', 'odd' or 'mixed' according to (anti)commutation with (-1)^N."""
    m = np.asarray(matrix)
    scale = max(1.0, np.abs(m).max(initial=0.0))
    same = np.equal.outer(parity_diag, parity_diag)
    off_diag_blocks = np.abs(m[~same]).max(initial=0.0)
    diag_blocks = np.abs(m[same]).max(initial=0.0)
    if off_diag_blocks <= tol * scale:
        return "even"
    if diag_blocks <= tol * scale:
        return "odd"
    return "mixed"


@dataclass(frozen=True)
class FockOperator:
    matrix: np.ndarray = field(repr=False)
    parity: str

    @classmethod
    def from_matrix(cls, fock, matrix):
        matrix = np.asarray(matrix, dtype=np.complex128)
        return cls(matrix, classify_parity(matrix, parity_diagonal(fock)))

    @property
    def H(self):
        return FockOperator(self.matrix.conj().T, self.parity)

    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.matrix @ other.matrix, _product_parity(self.parity, other.parity))
        return self.matrix @ other


def _product_parity(p, q):
    if "mixed" in (p, q):
        return "mixed"
    return "even" if p == q else "odd"


def parity_diagonal(fock):
    return np.where(fock.particle_numbers % 2, -1.0, 1.0)


def _coeffs(fock, psi):
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (fock.modes,):
        raise DomainError(f"vector has shape {psi.shape}, expected ({fock.modes},)")
    return np.ascontiguousarray(psi)


def creator(fock, psi, validate=False):
    """a*(psi), complex linear in psi."""
    coeffs = _coeffs(fock, psi)
    op = FockOperator(kernels.creation_matrix(coeffs), "odd")
    if validate:
        err = abs(op.norm() - np.linalg.norm(coeffs))
        if err > TOL.structural:
            raise AssertionError(f"||a*(psi)|| differs from ||psi|| by {err:.3g}")
    return op


def annihilator(fock, psi, validate=False):
    """a(psi) = a*(psi)^+, antilinear in psi."""
    return creator(fock, psi, validate).H


def slater(fock, *psis):
    """a*(psi_1) ... a*(psi_n) Omega."""
    if len(psis) > fock.modes:
        raise DomainError(f"{len(psis)} particles exceed {fock.modes} modes")
    vec = fock.vacuum()
    for psi in reversed(psis):
        vec = kernels.apply_creation(_coeffs(fock, psi), vec)
    return vec


def second_quantize(fock, X):
    """Lambda(X): on the n-particle sector, (K, J) entries are det X[K, J]."""
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != (fock.modes, fock.modes):
        raise DomainError(f"X has shape {X.shape}, expected {(fock.modes, fock.modes)}")
    return FockOperator(kernels.sector_minors(np.ascontiguousarray(X)), "even")


def second_quantize_via_slater(fock, X):
    """Lambda(X) assembled column by column as slater(X e_j1, ..., X e_jn)."""
    X = np.asarray(X, dtype=np.complex128)
    if X.shape != (fock.modes, fock.modes):
        raise DomainError(f"X has shape {X.shape}, expected {(fock.modes, fock.modes)}")
    out = np.zeros((fock.dim, fock.dim), dtype=np.complex128)
    for n in range(fock.modes + 1):
        for occ in combinations(range(fock.modes), n):
            idx = sum(1 << k for k in occ)
            out[:, idx] = slater(fock, *(X[:, k] for k in occ))
    return FockOperator(out, "even")


def sector_block(fock, op, n):
    """Restriction of an even operator to the n-particle sector."""
    idx = fock.sector(n)
    m = op.matrix if isinstance(op, FockOperator) else np.asarray(op)
    return m[np.ix_(idx, idx)]


def parity_operator(fock):
    return FockOperator(np.diag(parity_diagonal(fock)).astype(np.complex128), "even")


def scattering_operator(fock):
    """S = (-1)^(N(N-1)/2), the two-body S-matrix S_2 = -1 on Fock space."""
    N = fock.particle_numbers
    return FockOperator(np.diag(np.where((N * (N - 1) // 2) % 2, -1.0, 1.0)).astype(np.complex128), "even")


def occupation_vector(fock, modes):
    """Basis vector |K> for an occupation set K (= slater(e_k1, ..., e_kn), k1 < ... < kn)."""
    v = np.zeros(fock.dim, dtype=np.complex128)
    v[sum(1 << k for k in set(modes))] = 1.0
    return v
