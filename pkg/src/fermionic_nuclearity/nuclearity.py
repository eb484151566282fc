"""The map A -> Lambda(X) A Omega, its expansion through derivations, and nuclear-norm bounds.

Also small finite-dimensional algebra tools (generated algebras, commutants,
intersections) used for the toy double-cone algebras.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
import math
import os

import numpy as np

from . import kernels
from .config import TOL
from .errors import DomainError, ParityError, SeparationError
from .fields import delta, grade, random_polynomial
from .fock import FockOperator, classify_parity, second_quantize, slater
from .one_particle import (
    check_positive,
    combine_T,
    gamma,
    trace_norm,
)

SUBSET_SUM_MAX_MODES = 12


def thread_count():
    try:
        return max(1, int(os.environ.get("NUCLEARITY_THREADS", "1")))
    except ValueError:
        return 1


def _mat(A):
    return A.matrix if isinstance(A, FockOperator) else np.asarray(A, dtype=np.complex128)


def _definite_parity(ctx, A):
    parity = A.parity if isinstance(A, FockOperator) else classify_parity(_mat(A), ctx.parity)
    if parity not in ("even", "odd"):
        raise ParityError("operator must be even or odd")
    return parity


# --- the map Xi ---------------------------------------------------------------

def xi_apply(ctx, X, A):
    """Lambda(X) A Omega."""
    X = check_positive(ctx.fock.base, X)
    return second_quantize(ctx.fock, X).matrix @ _mat(A)[:, 0]


def one_particle_T(ctx, X):
    """The positive operator (|E_phi X|^2 + |E_pi X|^2)^(1/2)."""
    X = check_positive(ctx.fock.base, X)
    return combine_T(ctx.pair.proj_phi @ X, ctx.pair.proj_pi @ X)


def expansion_identity_check(ctx, X, xis, A):
    """Both sides of the expansion of <slater(Gamma xi), X A Omega> through delta+ + delta-.

    Returns ``(lhs, rhs)``; they agree for every A of definite parity.
    """
    _definite_parity(ctx, A)
    X = check_positive(ctx.fock.base, X)
    if len(xis) > ctx.fock.modes:
        raise DomainError("more vectors than modes")
    space = ctx.fock.base
    lhs = np.vdot(
        slater(ctx.fock, *(gamma(space, xi) for xi in xis)),
        second_quantize(ctx.fock, X).matrix @ _mat(A)[:, 0],
    )
    B = FockOperator(_mat(A), A.parity if isinstance(A, FockOperator) else "mixed")
    for xi in xis:
        eta = X @ np.asarray(xi, dtype=np.complex128)
        B = FockOperator(delta(ctx, "+", eta, B).matrix + delta(ctx, "-", eta, B).matrix, B.parity)
    rhs = B.matrix[0, 0] / 2 ** len(xis)
    return complex(lhs), complex(rhs)


def estimate_check(ctx, X, xis, A):
    """(|<slater(Gamma xi), X A Omega>|, 2^n ||A|| prod ||T xi_j||)."""
    _definite_parity(ctx, A)
    T = one_particle_T(ctx, X)
    space = ctx.fock.base
    lhs = abs(np.vdot(
        slater(ctx.fock, *(gamma(space, xi) for xi in xis)),
        second_quantize(ctx.fock, X).matrix @ _mat(A)[:, 0],
    ))
    rhs = 2.0 ** len(xis) * np.linalg.norm(_mat(A), 2)
    for xi in xis:
        rhs *= np.linalg.norm(T @ np.asarray(xi, dtype=np.complex128))
    return float(lhs), float(rhs)


# --- bounds -------------------------------------------------------------------

@dataclass
class NuclearityReport:
    t_values: list
    det_bound: float
    exp_T_bound: float
    exp_bound: float
    trace_T: float
    trace_phi: float
    trace_pi: float
    subset_sum: float | None = None
    empirical_sum: float | None = None
    sample_count: int = 0
    seed: int | None = None
    functional_estimates: list = field(default_factory=list)
    functional_bounds: list = field(default_factory=list)

    def to_dict(self):
        return {
            "t_values": [float(t) for t in self.t_values],
            "det_bound": self.det_bound,
            "exp_T_bound": self.exp_T_bound,
            "exp_bound": self.exp_bound,
            "trace_T": self.trace_T,
            "trace_phi": self.trace_phi,
            "trace_pi": self.trace_pi,
            "subset_sum": self.subset_sum,
            "empirical_sum": self.empirical_sum,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


def subset_sum_bound(t_values):
    """Sum over occupation sets K of prod_{k in K} 2 t_k, by enumeration."""
    t = np.ascontiguousarray(2.0 * np.asarray(t_values, dtype=np.float64))
    if t.size > SUBSET_SUM_MAX_MODES:
        raise DomainError(f"subset enumeration capped at {SUBSET_SUM_MAX_MODES} values")
    return float(kernels.subset_product_sum(t))


def nuclear_bound(T_phi, T_pi):
    """det(1 + 2T) and the two exponential bounds above it."""
    T = combine_T(T_phi, T_pi)
    t = np.clip(np.linalg.eigvalsh(T), 0.0, None)[::-1]
    trace_phi, trace_pi = trace_norm(T_phi), trace_norm(T_pi)
    report = NuclearityReport(
        t_values=list(t),
        det_bound=float(np.prod(1.0 + 2.0 * t)),
        exp_T_bound=float(np.exp(2.0 * t.sum())),
        exp_bound=float(np.exp(2.0 * (trace_phi + trace_pi))),
        trace_T=float(t.sum()),
        trace_phi=trace_phi,
        trace_pi=trace_pi,
    )
    if t.size <= SUBSET_SUM_MAX_MODES:
        report.subset_sum = subset_sum_bound(t)
    return report


def gamma_fixed_eigenbasis(space, T, tol=1e-8):
    """Eigenvalues (descending) and orthonormal eigenvectors b with Gamma b = b.

    Possible because T commutes with Gamma: each eigenspace is Gamma-invariant
    and spanned by Gamma-fixed vectors, and real-orthonormal Gamma-fixed
    vectors are complex-orthonormal.
    """
    w, v = np.linalg.eigh(0.5 * (T + T.conj().T))
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    d = space.dim
    vals, vecs = [], []
    i = 0
    scale = max(1.0, abs(w).max(initial=0.0))
    while i < d:
        j = i
        while j + 1 < d and abs(w[j + 1] - w[i]) <= tol * scale:
            j += 1
        block = v[:, i:j + 1]
        cands = []
        for col in block.T:
            for u in (col, 1j * col):
                cands.append(u + gamma(space, u))
        emb = np.array([np.concatenate([c.real, c.imag]) for c in cands]).T
        uu, s, _ = np.linalg.svd(emb, full_matrices=False)
        k = j - i + 1
        fixed = uu[:, :k]
        for col in fixed.T:
            vecs.append(col[:d] + 1j * col[d:])
            vals.append(w[i:j + 1].mean())
        i = j + 1
    return np.array(vals), np.column_stack(vecs)


def _sample_operator(ctx, index, child_seed):
    if index == 0:
        return np.eye(ctx.fock.dim, dtype=np.complex128)
    span = max(1, 2 * len(ctx.real_basis))
    degree = 1 + (index - 1) % span
    return random_polynomial(ctx, degree, child_seed, mixed=(index % 2 == 0)).matrix


def empirical_nuclear_sum(ctx, X, samples, seed):
    """Sampled lower estimates of sup_{||A||<=1} |<b_K, X A Omega>|, summed over K.

    ``b_K`` are Slater vectors of a Gamma-fixed eigenbasis of T. Sample 0 is the
    identity; the rest are seeded random polynomials of norm one.
    """
    if samples < 1:
        raise DomainError("need at least one sample")
    if not separation_check(ctx):
        raise SeparationError("vacuum is not separating for the generated algebra")
    X = check_positive(ctx.fock.base, X)
    report = nuclear_bound(ctx.pair.proj_phi @ X, ctx.pair.proj_pi @ X)
    t, b = gamma_fixed_eigenbasis(ctx.fock.base, one_particle_T(ctx, X))
    t = np.clip(t, 0.0, None)

    d = ctx.fock.modes
    slaters, bounds = [], []
    for n in range(d + 1):
        for occ in combinations(range(d), n):
            slaters.append(slater(ctx.fock, *(gamma(ctx.fock.base, b[:, k]) for k in occ)))
            bounds.append(2.0 ** n * float(np.prod(t[list(occ)])))
    basis = np.column_stack(slaters)

    lam = second_quantize(ctx.fock, X).matrix
    seeds = np.random.SeedSequence(seed).spawn(samples)

    def image(i):
        return lam @ _sample_operator(ctx, i, seeds[i])[:, 0]

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        vectors = list(pool.map(image, range(samples)))
    coeffs = np.abs(basis.conj().T @ np.column_stack(vectors))
    estimates = coeffs.max(axis=1)

    report.empirical_sum = float(math.fsum(estimates))
    report.sample_count = samples
    report.seed = seed
    report.functional_estimates = [float(e) for e in estimates]
    report.functional_bounds = bounds
    return report


# --- finite-dimensional algebras ----------------------------------------------

def _orthonormal_extend(Q, cands, tol):
    """Append to the orthonormal columns Q the new directions among cands."""
    if cands.shape[1] == 0:
        return Q, 0
    for _ in range(2):
        cands = cands - Q @ (Q.conj().T @ cands)
    u, s, _ = np.linalg.svd(cands, full_matrices=False)
    new = u[:, s > tol]
    if new.shape[1]:
        new = new - Q @ (Q.conj().T @ new)
        new, _ = np.linalg.qr(new)
        Q = np.hstack([Q, new])
    return Q, new.shape[1]


def generated_algebra(ops, dim, tol=TOL.rank):
    """Hilbert-Schmidt orthonormal basis (shape (m, dim, dim)) of the unital
    *-algebra generated by ``ops``; growth stops once a product round adds nothing."""
    gens = []
    for op in ops:
        m = _mat(op)
        gens.append(m)
        if np.abs(m - m.conj().T).max() > tol:
            gens.append(m.conj().T)
    Q = (np.eye(dim, dtype=np.complex128) / np.sqrt(dim)).reshape(-1, 1)
    cands = np.column_stack([g.reshape(-1) for g in gens]) if gens else np.zeros((dim * dim, 0))
    Q, added = _orthonormal_extend(Q, cands, tol)
    frontier = Q[:, 1:]
    while added and gens:
        blocks = frontier.T.reshape(-1, dim, dim)
        prods = np.matmul(np.stack(gens)[:, None], blocks[None]).reshape(-1, dim * dim).T
        before = Q.shape[1]
        Q, added = _orthonormal_extend(Q, prods, tol)
        frontier = Q[:, before:]
    return Q.T.reshape(-1, dim, dim)


def field_algebra(ctx, tol=TOL.rank):
    """Orthonormal basis of the algebra generated by phi(L).

    For a real-orthonormal basis b_1..b_r of L the anticommutators
    [phi(b_i), phi(b_j)]_+ = 2 Re<b_i, b_j> are scalars, so the ordered
    monomials phi(b_i1)...phi(b_ik), i1 < ... < ik, already span the algebra.
    """
    dim = ctx.fock.dim
    gens = [g.matrix for g in ctx.generators()]
    words = [np.eye(dim, dtype=np.complex128)]
    for g in gens:
        words = words + [w @ g for w in words]
    Q = np.zeros((dim * dim, 0), dtype=np.complex128)
    Q, _ = _orthonormal_extend(Q, np.column_stack([w.reshape(-1) for w in words]), tol)
    return Q.T.reshape(-1, dim, dim)


def commutant(ops, dim=None, tol=TOL.rank):
    """Hilbert-Schmidt orthonormal basis (shape (m, dim, dim)) of {B : [B, op] = 0}.

    Dense in dim**2, so intended for at most 4 modes (dim 16).
    """
    mats = [_mat(op) for op in ops]
    if not mats:
        raise DomainError("commutant needs at least one operator")
    dim = mats[0].shape[0] if dim is None else dim
    eye = np.eye(dim)
    # row-major vec: vec(B m) = (1 (x) m^T) vec(B), vec(m B) = (m (x) 1) vec(B)
    stacked = np.vstack([np.kron(eye, m.T) - np.kron(m, eye) for m in mats])
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    scale = max(1.0, max(np.abs(m).max() for m in mats))
    s = np.concatenate([s, np.zeros(dim * dim - s.size)])
    null = vh[s <= tol * scale * dim].conj()
    return null.reshape(-1, dim, dim)


def span_intersection(U, V, tol=1e-8):
    """Orthonormal basis of span(U) & span(V) for orthonormal column matrices."""
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros((U.shape[0], 0), dtype=np.complex128)
    a, s, _ = np.linalg.svd(U.conj().T @ V, full_matrices=False)
    return U @ a[:, s >= 1.0 - tol]


def _as_columns(basis):
    return np.column_stack([b.reshape(-1) for b in basis]) if len(basis) else None


def separation_check(ctx, tol=TOL.rank):
    """True iff A -> A Omega is injective on the algebra generated by the fields."""
    if len(ctx.real_basis) > ctx.fock.modes:
        return False  # 2^r monomials cannot map injectively into 2^d dimensions
    alg = field_algebra(ctx, tol)
    images = alg[:, :, 0].T  # columns A_i Omega
    s = np.linalg.svd(images, compute_uv=False)
    rank = int((s > tol * max(1.0, s.max(initial=0.0))).sum())
    return rank == alg.shape[0]


@dataclass
class IntersectionResult:
    dimension: int
    basis: np.ndarray = field(repr=False)
    commutation_defect: float
    span_defect: float
    closure_defect: float
    adjoint_defect: float

    @property
    def max_defect(self):
        return max(self.commutation_defect, self.span_defect, self.closure_defect, self.adjoint_defect)


def _residual(Q, m):
    v = m.reshape(-1)
    return float(np.linalg.norm(v - Q @ (Q.conj().T @ v)))


def double_cone_intersection(ctx1, ctx2, tol=TOL.rank):
    """A(L1) & A(L2)' with checks that the result is a *-algebra inside both."""
    if ctx1.fock != ctx2.fock:
        raise DomainError("contexts must share one Fock space")
    dim = ctx1.fock.dim
    alg1 = field_algebra(ctx1, tol)
    gens2 = ctx2.generators() or [np.eye(dim)]
    comm2 = commutant(gens2, dim, tol)
    Q1, Q2 = _as_columns(alg1), _as_columns(comm2)
    inter = span_intersection(Q1, Q2)
    basis = inter.T.reshape(-1, dim, dim)

    comm_def = max(
        (np.linalg.norm(b @ _mat(g) - _mat(g) @ b) for b in basis for g in gens2), default=0.0
    )
    span_def = max((_residual(Q1, b) for b in basis), default=0.0)
    closure = max((_residual(inter, a @ b) for a in basis for b in basis), default=0.0)
    adjoint = max((_residual(inter, b.conj().T) for b in basis), default=0.0)
    return IntersectionResult(basis.shape[0], basis, float(comm_def), span_def, closure, adjoint)
