"""Field operators, grading, and the odd derivations built from the auxiliary fields."""
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .config import TOL
from .errors import DomainError, ParityError
from .fock import FockOperator, FockSpace, annihilator, creator, parity_diagonal
from .one_particle import SubspacePair, gamma, real_basis, real_span_distance


@dataclass(frozen=True)
class FieldContext:
    fock: FockSpace
    pair: SubspacePair
    strict: bool = False

    def __post_init__(self):
        if self.pair.space is not self.fock.base and self.pair.space != self.fock.base:
            raise DomainError("subspace pair does not live on the Fock space's base space")

    @cached_property
    def parity(self):
        return parity_diagonal(self.fock)

    @cached_property
    def real_basis(self):
        return real_basis(self.pair)

    def generators(self):
        """phi(b) for a real basis b of L: these generate the polynomial algebra."""
        return [field_phi(self, b) for b in self.real_basis]


def make_context(pair, strict=False):
    return FieldContext(FockSpace(pair.space), pair, strict)


@dataclass(frozen=True)
class GradedOperator:
    even_part: FockOperator
    odd_part: FockOperator


def _mat(A):
    return A.matrix if isinstance(A, FockOperator) else np.asarray(A, dtype=np.complex128)


def field_phi(ctx, psi, strict=None):
    """phi(psi) = a*(psi) + a(psi); always self-adjoint."""
    strict = ctx.strict if strict is None else strict
    if strict:
        dist = real_span_distance(ctx.pair, psi)
        if dist > TOL.membership:
            raise DomainError(f"argument is not in L (distance {dist:.3g})")
    cr = creator(ctx.fock, psi).matrix
    return FockOperator(cr + cr.conj().T, "odd")


def aux_varphi(ctx, psi):
    """varphi(psi) = a*(psi) + a(Gamma psi)."""
    g = gamma(ctx.fock.base, psi)
    return FockOperator(creator(ctx.fock, psi).matrix + annihilator(ctx.fock, g).matrix, "odd")


def aux_pi(ctx, psi):
    """pi(psi) = i (a*(psi) - a(Gamma psi))."""
    g = gamma(ctx.fock.base, psi)
    return FockOperator(1j * (creator(ctx.fock, psi).matrix - annihilator(ctx.fock, g).matrix), "odd")


def grade(ctx, A):
    m = _mat(A)
    flipped = m * np.outer(ctx.parity, ctx.parity)  # P A P for diagonal P
    return GradedOperator(
        FockOperator(0.5 * (m + flipped), "even"),
        FockOperator(0.5 * (m - flipped), "odd"),
    )


def grading_automorphism(ctx, A):
    return FockOperator(_mat(A) * np.outer(ctx.parity, ctx.parity), getattr(A, "parity", "mixed"))


def _sign(sign):
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


def delta_generator(ctx, sign, psi):
    """varphi((1 -+ Gamma) psi) + i pi((1 +- Gamma) psi), upper signs for delta+."""
    s = _sign(sign)
    psi = np.asarray(psi, dtype=np.complex128)
    g = gamma(ctx.fock.base, psi)
    return FockOperator(
        aux_varphi(ctx, psi - s * g).matrix + 1j * aux_pi(ctx, psi + s * g).matrix, "odd"
    )


def graded_commutator(F, A, parity):
    """[F, A]_- for even A and [F, A]_+ for odd A."""
    if parity == "even":
        return F @ A - A @ F
    if parity == "odd":
        return F @ A + A @ F
    raise ParityError(f"graded commutator needs definite parity, got {parity!r}")


_FLIP = {"even": "odd", "odd": "even", "mixed": "mixed"}


def delta(ctx, sign, psi, A):
    """Odd derivation delta^{sign}_psi applied to A (split into graded parts)."""
    G = delta_generator(ctx, sign, psi).matrix
    parts = grade(ctx, A)
    out = 0.5 * graded_commutator(G, parts.even_part.matrix, "even")
    out += 0.5 * graded_commutator(G, parts.odd_part.matrix, "odd")
    return FockOperator(out, _FLIP[getattr(A, "parity", "mixed")])


def delta_norm_bound(ctx, sign, psi, A):
    """(||delta(A)||, bound) for A of definite parity; the bound must dominate."""
    parity = A.parity if isinstance(A, FockOperator) else None
    m = _mat(A)
    if parity not in ("even", "odd"):
        parts = grade(ctx, m)
        if np.abs(parts.odd_part.matrix).max() <= TOL.structural * max(1.0, np.abs(m).max()):
            parity = "even"
        elif np.abs(parts.even_part.matrix).max() <= TOL.structural * max(1.0, np.abs(m).max()):
            parity = "odd"
        else:
            raise ParityError("delta_norm_bound needs an operator of definite parity")
    s = _sign(sign)
    space = ctx.fock.base
    psi = np.asarray(psi, dtype=np.complex128)
    u = ctx.pair.proj_phi @ psi
    v = ctx.pair.proj_pi @ psi
    a = np.linalg.norm(u - s * gamma(space, u))
    b = np.linalg.norm(v + s * gamma(space, v))
    lhs = delta(ctx, sign, psi, FockOperator(m, parity)).norm()
    rhs = float(np.hypot(a, b)) * float(np.linalg.norm(m, 2))
    return lhs, rhs


def monomial(ctx, psis):
    m = np.eye(ctx.fock.dim, dtype=np.complex128)
    for psi in psis:
        m = m @ field_phi(ctx, psi).matrix
    return FockOperator(m, "even" if len(psis) % 2 == 0 else "odd")


def random_polynomial(ctx, degree, seed, mixed=False, terms=3):
    """Seeded random element of the polynomial algebra, rescaled to norm 1.

    Monomial lengths run over ``degree, degree - 2, ...`` so the result has
    definite parity; ``mixed=True`` uses every length up to ``degree``.
    Field arguments are random real combinations of a real basis of L.
    """
    if degree < 0:
        raise DomainError("degree must be non-negative")
    rng = np.random.default_rng(seed)
    basis = ctx.real_basis
    lengths = range(degree + 1) if mixed else range(degree % 2, degree + 1, 2)
    total = np.zeros((ctx.fock.dim, ctx.fock.dim), dtype=np.complex128)
    for length in lengths:
        count = 1 if length == 0 else terms
        for _ in range(count):
            c = abs(rng.normal()) if length == 0 else rng.normal()
            if length and not basis:
                continue
            psis = [sum(r * b for r, b in zip(rng.normal(size=len(basis)), basis)) for _ in range(length)]
            total += c * monomial(ctx, psis).matrix
    nrm = np.linalg.norm(total, 2)
    if nrm > 0:
        total /= nrm
    parity = "mixed" if mixed and degree > 0 else ("even" if degree % 2 == 0 else "odd")
    return FockOperator(total, parity)
