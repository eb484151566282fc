"""Finite-dimensional one-particle space with an antiunitary involution.

An antilinear involution is stored as ``Gamma psi = C @ conj(psi)`` with ``C``
unitary and symmetric. Inner products are antilinear in the first argument
(``np.vdot``).
"""
from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .errors import DomainError, InvariantError


@dataclass(frozen=True)
class OneParticleSpace:
    dim: int
    conj_matrix: np.ndarray = field(repr=False)

    def gamma(self, psi):
        return gamma(self, psi)


@dataclass(frozen=True)
class SubspacePair:
    """Two Gamma-invariant complex subspaces, stored as projections and bases."""

    space: OneParticleSpace
    proj_phi: np.ndarray = field(repr=False)
    proj_pi: np.ndarray = field(repr=False)
    basis_phi: np.ndarray = field(repr=False)  # columns are orthonormal
    basis_pi: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.space.dim


def _as_matrix(a, d=None, name="matrix"):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantError(f"{name} must be square, got shape {a.shape}")
    if d is not None and a.shape[0] != d:
        raise InvariantError(f"{name} has dimension {a.shape[0]}, expected {d}")
    return a


def _as_vector(space, psi):
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (space.dim,):
        raise DomainError(f"vector has shape {psi.shape}, expected ({space.dim},)")
    return psi


def make_space(d, C=None, tol=TOL.unitary):
    """Build a one-particle space of dimension ``d``.

    ``C`` defaults to the identity (plain componentwise conjugation). It must
    be unitary and symmetric, which is exactly the condition for
    ``psi -> C conj(psi)`` to be an antiunitary involution.
    """
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got {d}")
    d = int(d)
    C = np.eye(d, dtype=np.complex128) if C is None else _as_matrix(C, d, "conjugation matrix")
    eye = np.eye(d)
    err = np.abs(C @ C.conj().T - eye).max()
    if err > tol:
        raise InvariantError(f"conjugation matrix is not unitary (|C C^+ - 1| = {err:.3g})")
    err = np.abs(C - C.T).max()
    if err > tol:
        raise InvariantError(
            f"conjugation matrix is not symmetric (|C - C^T| = {err:.3g}); "
            "Gamma would not be an involution"
        )
    # implied by the two checks above; kept as the diagnostic users actually care about
    err = np.abs(C @ C.conj() - eye).max()
    if err > 10 * tol:
        raise InvariantError(f"Gamma^2 != 1 (|C conj(C) - 1| = {err:.3g})")
    C = C.copy()
    C.setflags(write=False)
    return OneParticleSpace(d, C)


def random_space(d, rng):
    """Space with a random involution ``C = U U^T``, ``U`` Haar-ish unitary."""
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return make_space(d, q @ q.T)


def gamma(space, psi):
    psi = _as_vector(space, psi)
    return space.conj_matrix @ psi.conj()


def gamma_conjugate(space, A):
    """Matrix of the complex-linear operator Gamma A Gamma."""
    C = space.conj_matrix
    return C @ np.asarray(A).conj() @ C.conj()


def commutes_with_gamma(space, A, tol=TOL.structural):
    A = np.asarray(A, dtype=np.complex128)
    return np.abs(gamma_conjugate(space, A) - A).max() <= tol * max(1.0, np.abs(A).max())


def orthonormalize(vectors, d, drop_tol=TOL.rank):
    """Gram-Schmidt (two passes) returning a d x r matrix of orthonormal columns."""
    basis = []
    for v in vectors:
        v = np.asarray(v, dtype=np.complex128).reshape(d)
        for _ in range(2):
            for b in basis:
                v = v - b * np.vdot(b, v)
        nrm = np.linalg.norm(v)
        if nrm >= drop_tol:
            basis.append(v / nrm)
    if not basis:
        return np.zeros((d, 0), dtype=np.complex128)
    return np.column_stack(basis)


def _check_invariant(space, basis, label, tol):
    proj = basis @ basis.conj().T
    for col in basis.T:
        image = gamma(space, col)
        resid = np.linalg.norm(image - proj @ image)
        if resid > tol:
            raise InvariantError(
                f"L_{label} is not Gamma-invariant: basis vector {np.round(col, 12)} "
                f"maps outside the span (residual {resid:.3g})"
            )
    err = np.abs(gamma_conjugate(space, proj) - proj).max()
    if err > tol:
        raise InvariantError(f"Gamma E_{label} Gamma != E_{label} (error {err:.3g})")
    return proj


def make_subspace_pair(space, gens_phi=(), gens_pi=(), tol=TOL.structural):
    d = space.dim
    basis_phi = orthonormalize(gens_phi, d)
    basis_pi = orthonormalize(gens_pi, d)
    proj_phi = _check_invariant(space, basis_phi, "phi", tol)
    proj_pi = _check_invariant(space, basis_pi, "pi", tol)
    return SubspacePair(space, proj_phi, proj_pi, basis_phi, basis_pi)


def pair_from_projections(space, proj_phi, proj_pi, tol=TOL.structural):
    """Subspace pair whose ranges are those of two orthogonal projections."""
    gens = []
    for p in (proj_phi, proj_pi):
        p = _as_matrix(p, space.dim, "projection")
        if np.abs(p @ p - p).max() > tol or np.abs(p - p.conj().T).max() > tol:
            raise InvariantError("argument is not an orthogonal projection")
        w, v = np.linalg.eigh(p)
        gens.append(list(v[:, w > 0.5].T))
    return make_subspace_pair(space, gens[0], gens[1], tol)


def random_gamma_invariant_vectors(space, k, rng):
    """``k`` random Gamma-fixed vectors; their complex span is Gamma-invariant."""
    out = []
    for _ in range(k):
        v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
        out.append(v + gamma(space, v))
    return out


def random_subspace_pair(space, dim_phi, dim_pi, rng):
    return make_subspace_pair(
        space,
        random_gamma_invariant_vectors(space, dim_phi, rng),
        random_gamma_invariant_vectors(space, dim_pi, rng),
    )


def real_span(pair):
    """Real spanning set of L = (1 + Gamma) L_phi + (1 - Gamma) L_pi."""
    space = pair.space
    out = []
    for b in pair.basis_phi.T:
        for v in (b, 1j * b):
            out.append(v + gamma(space, v))
    for b in pair.basis_pi.T:
        for v in (b, 1j * b):
            out.append(v - gamma(space, v))
    return out


def real_basis(pair, tol=TOL.rank):
    """Real-orthonormal basis of L (w.r.t. Re<.,.>), as a list of vectors."""
    d = pair.dim
    vecs = real_span(pair)
    if not vecs:
        return []
    emb = np.array([np.concatenate([v.real, v.imag]) for v in vecs]).T
    u, s, _ = np.linalg.svd(emb, full_matrices=False)
    keep = u[:, s > tol * max(1.0, s.max(initial=0.0))]
    return [col[:d] + 1j * col[d:] for col in keep.T]


def real_span_distance(pair, psi):
    """Distance from ``psi`` to the real subspace L."""
    psi = _as_vector(pair.space, psi)
    basis = real_basis(pair)
    resid = psi.copy()
    for b in basis:
        resid = resid - b * np.vdot(b, psi).real
    return float(np.linalg.norm(resid))


def symplectic_defect(pair, psi):
    """max |<psi, xi> - <xi, psi>| over the spanning set returned by ``real_span``.

    Zero (up to rounding) exactly when ``psi`` lies in the symplectic complement.
    """
    psi = _as_vector(pair.space, psi)
    vals = [abs(np.vdot(psi, xi) - np.vdot(xi, psi)) for xi in real_span(pair)]
    return float(max(vals, default=0.0))


def primed_vector(pair, psi):
    space = pair.space
    psi = _as_vector(space, psi)
    u = psi - pair.proj_pi @ psi
    v = psi - pair.proj_phi @ psi
    return 0.5 * (u + gamma(space, u)) + 0.5 * (v - gamma(space, v))


def double_primed_vector(pair, psi):
    space = pair.space
    psi = _as_vector(space, psi)
    u = psi - pair.proj_pi @ psi
    v = psi - pair.proj_phi @ psi
    return 0.5 * (u - gamma(space, u)) + 0.5 * (v + gamma(space, v))


def trace_norm(T):
    T = np.asarray(T, dtype=np.complex128)
    if T.size == 0:
        return 0.0
    return float(np.linalg.svd(T, compute_uv=False).sum())


def operator_norm(T):
    T = np.asarray(T, dtype=np.complex128)
    if T.size == 0:
        return 0.0
    return float(np.linalg.svd(T, compute_uv=False)[0])


def psd_sqrt(H):
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def combine_T(T_phi, T_pi, tol=TOL.derived):
    """Positive square root of |T_phi|^2 + |T_pi|^2."""
    T_phi = np.asarray(T_phi, dtype=np.complex128)
    T_pi = np.asarray(T_pi, dtype=np.complex128)
    if T_phi.shape != T_pi.shape or T_phi.ndim != 2 or T_phi.shape[0] != T_phi.shape[1]:
        raise DomainError(f"incompatible shapes {T_phi.shape} and {T_pi.shape}")
    # T^2 = S^+ S for S = [T_phi; T_pi]; the SVD of S avoids square roots of rounding noise
    _, sv, vh = np.linalg.svd(np.vstack([T_phi, T_pi]), full_matrices=False)
    T = (vh.conj().T * sv) @ vh
    lhs, rhs = trace_norm(T), trace_norm(T_phi) + trace_norm(T_pi)
    if lhs > rhs + tol:
        raise InvariantError(f"Kosaki inequality violated: {lhs} > {rhs}")
    return T


def fermi_bose_compare(T):
    """(exp(2 ||T||_1), prod (1 - t_n)^-2) for the singular values t_n of T."""
    t = np.linalg.svd(np.atleast_2d(np.asarray(T, dtype=np.complex128)), compute_uv=False)
    if t.size and t.max() >= 1.0:
        raise DomainError(f"operator norm {t.max()} >= 1: Bose bound undefined")
    fermi = float(np.exp(2.0 * t.sum()))
    bose = float(np.prod((1.0 - t) ** -2.0))
    return fermi, bose


def check_positive(space, X, require_gamma=True, tol=TOL.structural):
    """Validate a one-particle operator used as X; returns it as an array."""
    X = _as_matrix(X, space.dim, "X")
    if np.abs(X - X.conj().T).max() > tol * max(1.0, np.abs(X).max()):
        raise InvariantError("X is not Hermitian")
    if np.linalg.eigvalsh(X).min() < -1e-12 * max(1.0, np.abs(X).max()):
        raise InvariantError("X is not positive semidefinite")
    if require_gamma and not commutes_with_gamma(space, X, tol):
        raise InvariantError("X does not commute with Gamma")
    return X


def random_positive(space, rng, scale=1.0):
    """Random positive semidefinite X commuting with Gamma."""
    d = space.dim
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = z @ z.conj().T
    H = 0.5 * (H + gamma_conjugate(space, H))
    return scale * H / np.linalg.eigvalsh(H).max()
