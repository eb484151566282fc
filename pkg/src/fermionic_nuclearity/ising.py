"""One-particle trace-norm estimates for the S_2 = -1 model in rapidity space.

Wavefunctions live on L^2(R, dtheta) with p(theta) = m (cosh theta, sinh theta).
Subspaces for the left wedge are spanned by the rational family

    psi_j(theta) = (1 - i m sinh(theta) / kappa)^(-j),

the Fourier transforms of t^(j-1) e^(-kappa t) on a half-line. Its continuation
to theta + i pi/2 is (1 + m cosh(theta) / kappa)^(-j): bounded and decaying,
which is what fixes the half-line (the other choice has a pole in the strip).
The pi-subspace uses omega * psi_j with omega = m cosh theta; psi_1 is dropped
there because omega * psi_1 is not square integrable, so j runs over 2..J+1.
"""
from dataclasses import asdict, dataclass, field
import warnings

import numpy as np

from .errors import (
    DomainError,
    GridResolutionError,
    NonIntegrableDampingError,
    WedgeConditionError,
)

LOG_OVERFLOW = 700.0
CONVERGENCE_RTOL = 1e-3
GRAM_RTOL = 1e-6


@dataclass(frozen=True)
class RapidityGrid:
    theta_max: float
    n_points: int
    order: int
    nodes: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    def refined(self):
        return make_grid(self.theta_max, 2 * self.n_points, self.order)

    def params(self):
        return {"theta_max": self.theta_max, "n_points": self.n_points, "order": self.order}


def make_grid(theta_max=12.0, n_points=2000, order=20):
    """Composite Gauss-Legendre rule on [-theta_max, theta_max]."""
    if theta_max <= 0:
        raise DomainError("theta_max must be positive")
    if n_points <= 0 or n_points % order:
        raise DomainError(f"n_points={n_points} must be a positive multiple of order={order}")
    x, w = np.polynomial.legendre.leggauss(order)
    panels = n_points // order
    edges = np.linspace(-theta_max, theta_max, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return RapidityGrid(float(theta_max), int(n_points), int(order), nodes, weights)


def in_left_wedge(x):
    x0, x1 = x
    return x1 + abs(x0) < 0


@dataclass(frozen=True)
class WedgeScenario:
    mass: float
    x0: float
    x1: float
    basis_size: int = 8
    kappa: float = 1.0
    grid: RapidityGrid = field(default_factory=make_grid)

    @property
    def x(self):
        return (self.x0, self.x1)

    @property
    def damping_rate(self):
        """m (|x1| - |x0|): positive exactly inside the left wedge."""
        return self.mass * (abs(self.x1) - abs(self.x0))

    def validate(self):
        if self.mass <= 0 or self.kappa <= 0:
            raise DomainError("mass and kappa must be positive")
        if not 1 <= self.basis_size <= 64:
            raise DomainError("basis size must lie in 1..64")
        if not in_left_wedge(self.x):
            raise WedgeConditionError(
                f"x = {self.x} is not in the left wedge (need x1 + |x0| < 0)"
            )
        return self


def momentum(m, theta):
    return m * np.cosh(theta), m * np.sinh(theta)


def boost_translate(m, x, lam, psi, grid, leak_tol=1e-8):
    """Samples of (U(x, B(lam)) psi)(theta) = exp(i p(theta).x) psi(theta - lam) on the grid.

    ``psi`` is a callable, or an array of samples on the grid when ``lam == 0``.
    Warns when the boost moves more than ``leak_tol`` of the norm past the grid.
    """
    theta = grid.nodes
    x0, x1 = x
    p0, p1 = momentum(m, theta)
    phase = np.exp(1j * (p0 * x0 - p1 * x1))
    if callable(psi):
        shifted = np.asarray(psi(theta - lam), dtype=np.complex128)
        if lam != 0:
            before = np.sum(grid.weights * np.abs(psi(theta)) ** 2)
            after = np.sum(grid.weights * np.abs(shifted) ** 2)
            if before > 0 and abs(before - after) / before > leak_tol:
                warnings.warn(
                    f"boost by {lam} moves {abs(before - after) / before:.2e} of the norm past theta_max",
                    RuntimeWarning,
                    stacklevel=2,
                )
    else:
        if lam != 0:
            raise DomainError("sampled input only supports lam = 0; pass a callable to boost")
        shifted = np.asarray(psi, dtype=np.complex128)
    return phase * shifted


@dataclass(frozen=True)
class BasisFunction:
    j: int
    kappa: float
    mass: float
    variant: str = "phi"
    half_line: str = "negative"

    def __post_init__(self):
        if self.j < 1 or self.kappa <= 0:
            raise DomainError("need j >= 1 and kappa > 0")
        if self.variant not in ("phi", "pi"):
            raise DomainError(f"variant must be 'phi' or 'pi', got {self.variant!r}")
        if self.half_line not in ("negative", "positive"):
            raise DomainError("half_line must be 'negative' or 'positive'")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        s = -1j if self.half_line == "negative" else 1j
        val = (1.0 + s * self.mass * np.sinh(theta) / self.kappa) ** (-self.j)
        if self.variant == "pi":
            val = self.mass * np.cosh(theta) * val
        return val

    def continued(self, theta):
        """Boundary value at theta + i pi/2."""
        if self.half_line == "positive":
            raise NonIntegrableDampingError(
                "the positive half-line family has a pole at cosh(theta) = kappa/m inside the strip"
            )
        theta = np.asarray(theta, dtype=np.float64)
        val = (1.0 + self.mass * np.cosh(theta) / self.kappa) ** (-self.j) + 0j
        if self.variant == "pi":
            val = 1j * self.mass * np.sinh(theta) * val
        return val


def basis_function(j, kappa, m, variant="phi", half_line="negative"):
    return BasisFunction(j, kappa, m, variant, half_line)


def basis_indices(basis_size, variant):
    start = 1 if variant == "phi" else 2
    return range(start, start + basis_size)


def damping_factor(m, x, theta):
    """exp(i p(theta + i pi/2).x) = exp(-m (x0 sinh theta - x1 cosh theta))."""
    x0, x1 = x
    theta = np.asarray(theta, dtype=np.float64)
    expo = -m * (x0 * np.sinh(theta) - x1 * np.cosh(theta))
    if np.max(expo, initial=-np.inf) > LOG_OVERFLOW:
        raise NonIntegrableDampingError(
            f"continued translation phase overflows (exponent {np.max(expo):.3g}); "
            f"x = {tuple(x)} is not in the left wedge"
        )
    return np.exp(expo) + 0j


def _gram(values, weights):
    return values.conj().T @ (weights[:, None] * values)


def _basis_samples(scenario, variant, grid):
    funcs = [basis_function(j, scenario.kappa, scenario.mass, variant)
             for j in basis_indices(scenario.basis_size, variant)]
    theta = grid.nodes
    real = np.column_stack([f(theta) for f in funcs])
    cont = np.column_stack([f.continued(theta) for f in funcs])
    return real, cont


def _wedge_samples(scenario, variant, grid):
    real, cont = _basis_samples(scenario, variant, grid)
    image = damping_factor(scenario.mass, scenario.x, grid.nodes)[:, None] * cont
    return real, image


def _energy_samples(mass, beta, basis_size, kappa, variant, grid):
    funcs = [basis_function(j, kappa, mass, variant) for j in basis_indices(basis_size, variant)]
    theta = grid.nodes
    real = np.column_stack([f(theta) for f in funcs])
    image = np.exp(-beta * mass * np.cosh(theta))[:, None] * real
    return real, image


def _check_gram_resolution(pairs, pairs_fine):
    for coarse, fine in zip(pairs, pairs_fine):
        scale = max(np.abs(fine).max(), 1e-300)
        rel = np.abs(coarse - fine).max() / scale
        if rel > GRAM_RTOL:
            raise GridResolutionError(f"Gram entries change by {rel:.3g} (relative) under grid doubling")


def wedge_gram(scenario, variant, grid=None, check_resolution=False):
    """(G, M): Gram matrices of the basis and of its image under Delta^(1/4) U(x).

    With ``check_resolution`` the computation is repeated on the doubled grid and
    a relative change above 1e-6 (max entry scale) raises GridResolutionError.
    """
    grid = scenario.grid if grid is None else grid
    real, image = _wedge_samples(scenario, variant, grid)
    G, M = _gram(real, grid.weights), _gram(image, grid.weights)
    if check_resolution:
        fine = grid.refined()
        r2, i2 = _wedge_samples(scenario, variant, fine)
        _check_gram_resolution((G, M), (_gram(r2, fine.weights), _gram(i2, fine.weights)))
    return G, M


def singular_values_from_grams(G, M, rel_tol=1e-10):
    """Singular values of the map restricted to span{f_j}, from <f_j, f_k> and <Af_j, Af_k>."""
    G = np.asarray(G, dtype=np.complex128)
    M = np.asarray(M, dtype=np.complex128)
    if G.shape != M.shape or G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DomainError("G and M must be square matrices of one size")
    w, v = np.linalg.eigh(0.5 * (G + G.conj().T))
    keep = w > rel_tol * max(w.max(initial=0.0), 0.0)
    if not keep.any():
        raise DomainError("basis Gram matrix has no retained eigenvalues")
    Q = v[:, keep] / np.sqrt(w[keep])
    H = Q.conj().T @ M @ Q
    s2 = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    return np.sqrt(np.clip(s2, 0.0, None))[::-1]


def singular_values_from_samples(domain, image, weights, image_weights=None, rel_tol=1e-10):
    """Same singular values as :func:`singular_values_from_grams`, computed from
    quadrature samples (columns) without forming Gram matrices.

    Working with sqrt(weights) * samples directly keeps the condition number of
    the basis instead of squaring it, which matters for the smallest values.
    ``image_weights`` defaults to ``weights``; ``rel_tol`` applies to Gram
    eigenvalues, as in the Gram version.
    """
    sw = np.sqrt(np.asarray(weights))[:, None]
    iw = sw if image_weights is None else np.sqrt(np.asarray(image_weights))[:, None]
    _, s, vh = np.linalg.svd(sw * domain, full_matrices=False)
    keep = s > np.sqrt(rel_tol) * s.max(initial=0.0)
    if not keep.any():
        raise DomainError("basis has no retained directions")
    coords = vh[keep].conj().T / s[keep]
    return np.linalg.svd((iw * image) @ coords, compute_uv=False)


def _block_diag(a, b):
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]), dtype=np.complex128)
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


@dataclass
class SpectralReport:
    kind: str
    sigma_phi: list
    sigma_pi: list
    trace_phi: float
    trace_pi: float
    xi_bound: float
    t_values: list
    det_bound: float
    exp_T_bound: float
    converged: bool
    rel_change: float
    params: dict
    note: str = "finite-rank lower estimates; bound conditional on basis exhaustion"

    def to_dict(self):
        return asdict(self)


def _spectra(samples, weights):
    """Per-variant singular values plus those of the combined T = (|T_phi|^2 + |T_pi|^2)^(1/2).

    T^2 has the spectrum of the map (f, g) -> X f + X g on L_phi (+) L_pi: its
    domain is the orthogonal sum of the two sample spaces, its image mixes both.
    """
    (rp, ip), (rq, iq) = samples
    sp = singular_values_from_samples(rp, ip, weights)
    sq = singular_values_from_samples(rq, iq, weights)
    t = singular_values_from_samples(_block_diag(rp, rq), np.hstack([ip, iq]),
                                     np.concatenate([weights, weights]), weights)
    return sp, sq, t


def _report(kind, sample_fn, grid, params, check_convergence):
    sp, sq, t = _spectra(sample_fn(grid), grid.weights)
    rel = 0.0
    if check_convergence:
        fine = grid.refined()
        sp2, sq2, _ = _spectra(sample_fn(fine), fine.weights)
        for a, b in ((sp.sum(), sp2.sum()), (sq.sum(), sq2.sum())):
            if b > 0:
                rel = max(rel, abs(a - b) / b)
    trace_phi, trace_pi = float(sp.sum()), float(sq.sum())
    return SpectralReport(
        kind=kind,
        sigma_phi=[float(s) for s in sp],
        sigma_pi=[float(s) for s in sq],
        trace_phi=trace_phi,
        trace_pi=trace_pi,
        xi_bound=float(np.exp(2.0 * (trace_phi + trace_pi))),
        t_values=[float(s) for s in t],
        det_bound=float(np.prod(1.0 + 2.0 * t)),
        exp_T_bound=float(np.exp(2.0 * t.sum())),
        converged=bool(rel <= CONVERGENCE_RTOL),
        rel_change=float(rel),
        params={**params, **grid.params()},
    )


def modular_nuclearity_report(scenario, check_convergence=True):
    """Trace-norm estimates of Delta^(1/4) E_phi(W_L + x) and Delta^(1/4) E_pi(W_L + x)."""
    scenario.validate()

    def samples(grid):
        return _wedge_samples(scenario, "phi", grid), _wedge_samples(scenario, "pi", grid)

    params = {"mass": scenario.mass, "x0": scenario.x0, "x1": scenario.x1,
              "basis_size": scenario.basis_size, "kappa": scenario.kappa}
    return _report("modular", samples, scenario.grid, params, check_convergence)


def energy_nuclearity_report(mass, beta, basis_size=8, kappa=1.0, grid=None, check_convergence=True):
    """Same pipeline with the one-particle operator exp(-beta omega) on the wedge subspaces."""
    if beta <= 0:
        raise DomainError("beta must be positive")
    if mass <= 0 or kappa <= 0:
        raise DomainError("mass and kappa must be positive")
    grid = make_grid() if grid is None else grid

    def samples(g):
        return (_energy_samples(mass, beta, basis_size, kappa, "phi", g),
                _energy_samples(mass, beta, basis_size, kappa, "pi", g))

    params = {"mass": mass, "beta": beta, "basis_size": basis_size, "kappa": kappa}
    return _report("energy", samples, grid, params, check_convergence)


def refine_until_converged(build, grid, rtol=CONVERGENCE_RTOL, max_doublings=6):
    """Double the grid until two successive reports agree on both traces to ``rtol``.

    ``build(grid)`` returns a SpectralReport. Returns (report, grid) at the finer level.
    """
    prev = build(grid)
    for _ in range(max_doublings):
        grid = grid.refined()
        cur = build(grid)
        ok = all(
            abs(a - b) <= rtol * abs(b)
            for a, b in ((prev.trace_phi, cur.trace_phi), (prev.trace_pi, cur.trace_pi))
        )
        if ok:
            return cur, grid
        prev = cur
    raise GridResolutionError(f"no agreement to {rtol} after {max_doublings} doublings")
