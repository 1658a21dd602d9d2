"""Constructive solution of the Bezout equation g . f = 1 on the unit disc.

Given corona data f = (f_1, ..., f_m) with |f(z)| >= delta > 0, the pipeline
builds the smooth pointwise solution and repairs its analyticity:

    phi  = f^* / |f|^2                 (row; phi . f = 1 everywhere)
    dbar phi = (f')^*/|f|^2 - ((f')^* f) f^*/|f|^4      (closed form)
    Phi  = phi^T (dbar phi)            (m x m matrix field)
    Psi  = Cauchy transform of Phi     (entrywise; dbar Psi ~ Phi)
    g    = phi + f^T (Psi^T - Psi)

Two identities hold at every node in exact arithmetic regardless of how well
Psi solves its dbar problem: phi . f = 1, and f^T (Psi^T - Psi) f = 0 because
Psi - Psi^T is antisymmetric.  The accuracy of Psi only controls how close g
is to analytic; the solution is therefore projected onto nonnegative Fourier
modes (read off an outer grid ring) and the lost exactness is restored by a
Neumann-series refinement: if alpha := g . f - 1 has norm below one, then
(1 + alpha)^{-1} g solves the equation again, and the K-term truncation
leaves a residual of at most ||alpha||^{K+1} / (1 - ||alpha||).

Inputs are certified rather than assumed: the corona lower bound is the grid
minimum of |f| minus a Lipschitz correction (covering radius times a
coefficient bound on |f'|), which is a true lower bound for the infimum over
the disc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import DiscField, PolarGrid, cauchy_transform, dbar
from .series import (
    AnalyticVectorFunction,
    NormReport,
    algebra_norm,
    boundary_trace,
    dot,
)

__all__ = [
    "CoronaData",
    "CoronaSolution",
    "AugmentedData",
    "UncertifiableDataError",
    "RefinementError",
    "certify_min_modulus",
    "phi_field",
    "dbar_phi",
    "correction_rhs",
    "solve_correction",
    "assemble_solution",
    "refine_neumann",
    "augment",
    "solve_corona",
]

# Solutions with more than this fraction of boundary energy in negative
# Fourier modes are flagged LOW_CONFIDENCE; refinement alone cannot fix them.
NEG_MODE_THRESHOLD = 0.1
# Accept a solution once sup |g.f - 1| falls below this.
BEZOUT_TOLERANCE = 1e-4


class UncertifiableDataError(ValueError):
    """The corona condition could not be certified from grid data."""


class RefinementError(RuntimeError):
    """Neumann refinement refused because ||alpha|| >= 1."""


def _coefficient_derivative_bound(f: AnalyticVectorFunction) -> float:
    """sum_j j ||a_j||_2, an upper bound for sup_D |f'|."""
    norms = np.linalg.norm(f.coeffs, axis=0)
    return float((np.arange(f.coeffs.shape[1]) * norms).sum())


def certify_min_modulus(f: AnalyticVectorFunction, grid: PolarGrid, G: int = 2048) -> float:
    """Certified lower bound for inf_D |f(z)|.

    Grid minimum over interior nodes and a boundary trace, minus covering
    radius times a coefficient bound on |f'|.  A nonpositive return means the
    data cannot be certified.
    """
    interior = f.eval(grid.z)
    mn = float(np.sqrt((np.abs(interior) ** 2).sum(axis=0)).min())
    Gb = 1 << (max(G, 2 * (f.degree + 1)) - 1).bit_length()  # round up to a power of two
    rim = boundary_trace(f, Gb).samples
    mn = min(mn, float(np.sqrt((np.abs(rim) ** 2).sum(axis=0)).min()))
    return mn - grid.covering_radius() * _coefficient_derivative_bound(f)


@dataclass(frozen=True)
class CoronaData:
    """Certified corona data: f with a positive lower bound on |f|."""

    f: AnalyticVectorFunction
    delta: float              # certified lower bound for inf |f|
    measured_min: float       # raw grid minimum of |f|
    norm_cert: NormReport     # algebra norm of f at the working order

    def __post_init__(self):
        if not (0 < self.delta <= self.measured_min):
            raise UncertifiableDataError(
                f"certified bound {self.delta} must be positive and below the grid minimum"
            )

    @classmethod
    def certify(cls, f: AnalyticVectorFunction, grid: PolarGrid, n: int, G: int = 4096) -> "CoronaData":
        delta = certify_min_modulus(f, grid)
        if delta <= 0:
            raise UncertifiableDataError(
                f"corona condition failed: certified lower bound {delta:.3e} <= 0"
            )
        interior = f.eval(grid.z)
        measured = float(np.sqrt((np.abs(interior) ** 2).sum(axis=0)).min())
        return cls(f=f, delta=delta, measured_min=measured, norm_cert=algebra_norm(f, n, G))


def phi_field(f: AnalyticVectorFunction, grid: PolarGrid, delta: float | None = None) -> DiscField:
    """Pointwise row solution phi = f^* / |f|^2; phi . f = 1 at every node."""
    if delta is None:
        delta = certify_min_modulus(f, grid)
    if delta <= 0:
        raise UncertifiableDataError("phi is unbounded without a certified positive minimum")
    vals = f.eval(grid.z)
    return DiscField(grid, np.conj(vals) / (np.abs(vals) ** 2).sum(axis=0))


def dbar_phi(f: AnalyticVectorFunction, grid: PolarGrid, delta: float | None = None) -> DiscField:
    """Closed-form dbar of phi (no numerical differentiation):

    dbar phi = (f')^* / |f|^2 - ((f')^* f) f^* / |f|^4.
    """
    if delta is None:
        delta = certify_min_modulus(f, grid)
    if delta <= 0:
        raise UncertifiableDataError("dbar phi needs certified data")
    fv = f.eval(grid.z)
    fpv = f.derivative(1).eval(grid.z)
    mod2 = (np.abs(fv) ** 2).sum(axis=0)
    cross = (np.conj(fpv) * fv).sum(axis=0)
    return DiscField(grid, np.conj(fpv) / mod2 - cross * np.conj(fv) / mod2**2)


def correction_rhs(f: AnalyticVectorFunction, grid: PolarGrid, delta: float | None = None) -> DiscField:
    """Matrix right-hand side Phi = phi^T (dbar phi) of the dbar problem for Psi."""
    phi = phi_field(f, grid, delta)
    dphi = dbar_phi(f, grid, delta)
    return DiscField(grid, phi.values[:, None] * dphi.values[None, :])


def solve_correction(rhs: DiscField) -> tuple[DiscField, float]:
    """Entrywise Cauchy transform of Phi plus its measured dbar residual.

    The residual sup |dbar Psi - Phi| / sup |Phi| is reported, never silently
    accepted; callers decide whether it meets their tolerance.
    """
    psi = cauchy_transform(rhs)
    scale = float(np.abs(rhs.values).max())
    if scale == 0.0:
        return psi, 0.0
    resid = float(np.abs(dbar(psi).values - rhs.values).max()) / scale
    return psi, resid


@dataclass(frozen=True)
class CoronaSolution:
    """Analytic row g with residual diagnostics."""

    g: AnalyticVectorFunction
    bezout_residual: float          # sup |g.f - 1| on a boundary grid
    antianalytic_residual: float    # negative-mode energy fraction before projection
    g_norm: NormReport
    refinement_log: tuple = ()      # ((r, ||alpha||), ...)
    low_confidence: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "g": self.g.to_dict(),
            "bezout_residual": float(self.bezout_residual),
            "antianalytic_residual": float(self.antianalytic_residual),
            "g_norm": self.g_norm.to_dict(),
            "refinement_log": [[float(r), float(a)] for r, a in self.refinement_log],
            "low_confidence": bool(self.low_confidence),
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }


def _bezout_residual(g: AnalyticVectorFunction, f: AnalyticVectorFunction, G: int) -> float:
    prod = dot(g, f)
    Gb = 1 << (max(G, 2 * (prod.degree + 1)) - 1).bit_length()
    vals = boundary_trace(prod, Gb).samples[0]
    return float(np.abs(vals - 1).max())


def assemble_solution(
    f: AnalyticVectorFunction,
    grid: PolarGrid,
    phi: DiscField,
    psi: DiscField,
    n: int,
    G: int = 4096,
    degree: int | None = None,
    psi_dbar_residual: float | None = None,
) -> CoronaSolution:
    """Assemble g = phi + f^T (Psi^T - Psi), project to analytic, and measure.

    The algebraic identities (phi.f = 1 and the antisymmetric correction
    annihilating f) are verified at every node; the negative-Fourier-mode
    energy of g on the outer grid ring measures how far the assembled field is
    from analytic, and the analytic projection keeps modes j >= 0 rescaled by
    ring_radius^-j to recover Taylor coefficients.
    """
    fv = f.eval(grid.z)
    xi = np.swapaxes(psi.values, 0, 1) - psi.values  # Psi^T - Psi
    g_raw = phi.values + np.einsum("a...,ab...->b...", fv, xi)

    id_phi = float(np.abs((phi.values * fv).sum(axis=0) - 1).max())
    id_anti = float(np.abs(np.einsum("a...,ab...,b...->...", fv, xi, fv)).max())

    ring = g_raw[:, -1, :]
    rho = float(grid.r[-1])
    modes = np.fft.fft(ring, axis=1) / grid.Q
    k = np.fft.fftfreq(grid.Q, d=1.0 / grid.Q).astype(int)
    total = float((np.abs(modes) ** 2).sum())
    neg = float((np.abs(modes[:, k < 0]) ** 2).sum())
    neg_fraction = neg / total if total > 0 else 0.0

    if degree is None:
        degree = 2 * f.degree + 16
    degree = min(degree, grid.Q // 2 - 1)
    pos = {int(kk): i for i, kk in enumerate(k)}
    gc = np.zeros((f.m, degree + 1), dtype=complex)
    for j in range(degree + 1):
        gc[:, j] = modes[:, pos[j]] / rho**j
    g_proj = AnalyticVectorFunction(gc)

    diagnostics = {"identity_phi_f": id_phi, "identity_antisymmetry": id_anti}
    if psi_dbar_residual is not None:
        diagnostics["psi_dbar_residual"] = psi_dbar_residual
    return CoronaSolution(
        g=g_proj,
        bezout_residual=_bezout_residual(g_proj, f, G),
        antianalytic_residual=neg_fraction,
        g_norm=algebra_norm(g_proj, n, G),
        low_confidence=neg_fraction > NEG_MODE_THRESHOLD,
        diagnostics=diagnostics,
    )


def refine_neumann(
    f: AnalyticVectorFunction,
    g_raw: AnalyticVectorFunction,
    r: float = 1.0,
    K: int = 8,
    n: int = 1,
    G: int = 4096,
    work_degree: int | None = None,
) -> CoronaSolution:
    """Upgrade an approximate solution by inverting 1 + alpha.

    With g_r the dilation of g_raw, alpha := g_r . f - 1 is computed exactly in
    coefficient arithmetic; if its algebra norm is below one, the K-term
    Neumann series for (1 + alpha)^{-1} multiplies g_r and the residual drops
    to about ||alpha||^{K+1} / (1 - ||alpha||).
    """
    if not 0 < r <= 1:
        raise ValueError("dilation parameter must lie in (0, 1]")
    g_r = g_raw.dilate(r)
    ac0 = dot(g_r, f).coeffs.copy()
    ac0[0, 0] -= 1.0
    alpha = AnalyticVectorFunction(ac0)
    a_norm = algebra_norm(alpha, min(n, alpha.degree), G).weighted_sum
    if a_norm >= 1:
        raise RefinementError(
            f"||alpha|| = {a_norm:.3f} >= 1; improve Psi or refine the grid before retrying"
        )
    if work_degree is None:
        work_degree = g_r.degree + f.degree + 40
    ac = alpha.coeffs[0]
    inv = np.zeros(work_degree + 1, dtype=complex)
    inv[0] = 1.0
    term = inv.copy()
    for _ in range(K):
        term = -np.convolve(term, ac)[: work_degree + 1]
        inv += np.pad(term, (0, work_degree + 1 - len(term)))
    refined = np.stack(
        [np.convolve(inv, g_r.coeffs[comp])[: work_degree + 1] for comp in range(g_r.m)]
    )
    g_new = AnalyticVectorFunction(refined)
    return CoronaSolution(
        g=g_new,
        bezout_residual=_bezout_residual(g_new, f, G),
        antianalytic_residual=0.0,
        g_norm=algebra_norm(g_new, n, G),
        refinement_log=((r, a_norm),),
        diagnostics={"residual_bound": a_norm ** (K + 1) / (1 - a_norm)},
    )


@dataclass(frozen=True)
class AugmentedData:
    """f with a constant component gamma prepended, improving the lower bound."""

    f_aug: AnalyticVectorFunction
    gamma: float
    delta_tilde: float
    norm_bound: float  # sqrt(delta^2 + gamma^2) + 1 - delta, bound for ||f_aug||

    def __post_init__(self):
        if self.delta_tilde <= 0:
            raise ValueError("augmented lower bound must be positive")


def augment(f: AnalyticVectorFunction, delta: float, gamma: float) -> AugmentedData:
    """Prepend the constant gamma > 0 to f.

    The rescaled data has certified minimum
    delta_tilde = sqrt(delta^2 + gamma^2) / (sqrt(delta^2 + gamma^2) + 1 - delta),
    which exceeds delta for gamma > 0 and tends to delta as gamma -> 0+.
    """
    if gamma <= 0:
        raise ValueError("augmentation constant must be positive")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    root = math.hypot(delta, gamma)
    coeffs = np.zeros((f.m + 1, f.degree + 1), dtype=complex)
    coeffs[0, 0] = gamma
    coeffs[1:] = f.coeffs
    return AugmentedData(
        f_aug=AnalyticVectorFunction(coeffs),
        gamma=gamma,
        delta_tilde=root / (root + 1 - delta),
        norm_bound=root + 1 - delta,
    )


def solve_corona(
    f: AnalyticVectorFunction,
    grid: PolarGrid,
    n: int = 1,
    G: int = 4096,
    K: int = 8,
    refine_r: float = 1.0,
    degree: int | None = None,
) -> CoronaSolution:
    """Full pipeline: certify, build phi/Phi/Psi, assemble, project, refine."""
    data = CoronaData.certify(f, grid, n, G)
    phi = phi_field(f, grid, data.delta)
    rhs = correction_rhs(f, grid, data.delta)
    psi, dbar_res = solve_correction(rhs)
    sol = assemble_solution(f, grid, phi, psi, n, G, degree, psi_dbar_residual=dbar_res)
    if sol.low_confidence:
        return sol
    refined = refine_neumann(f, sol.g, refine_r, K, n, G)
    diagnostics = dict(sol.diagnostics)
    diagnostics.update(refined.diagnostics)
    diagnostics["delta_certified"] = data.delta
    return CoronaSolution(
        g=refined.g,
        bezout_residual=refined.bezout_residual,
        antianalytic_residual=sol.antianalytic_residual,
        g_norm=refined.g_norm,
        refinement_log=refined.refinement_log,
        low_confidence=False,
        diagnostics=diagnostics,
    )
