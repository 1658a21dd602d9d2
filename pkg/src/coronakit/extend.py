"""Approximate holomorphic extension of disc functions across boundary arcs.

Given f analytic on the disc whose derivatives extend continuously to an open
arc set S, the function is pushed across a closed subarc C of S in four moves:

  1. extend f radially, f(r z) := f(z) for z on the circle and r > 1 (constant
     along rays; C^n in the angle, kinked across the circle);
  2. build a smooth cutoff b with b = 1 on a neighbourhood U of C and b = 0
     outside a larger W;
  3. correct the cutoff extension: with u solving dbar u = (dbar b) f via the
     Cauchy transform, h := b f - u is holomorphic in the disc while f - h is
     holomorphic in U;
  4. repair the size of the perturbation by a radial dilation: F := f - h + h_r
     with h_r(z) = h(r z).  F is holomorphic on the disc joined with the part
     of U inside the 1/r-dilated disc, and ||F - f|| = ||h_r - h|| -> 0 as
     r -> 1.

The quadrature domain is the full disc of radius rho0 = outer W radius: the
collar between the unit circle and rho0 is gridded as a full annulus so the
closed-form constant-density transform (C[1] = conj(zeta)) stays valid and the
angular-convolution fast path applies to every ring set.

Analyticity certificates are measured with the same discrete dbar operator the
disc module uses.  Radial stencils never straddle the unit circle when the
field is kinked there (h, the radial extension); where the extended field is
genuinely analytic the kink cancels and crossing stencils are meaningful, but
a thin margin of rings around the interface is still excluded from sup
residuals and replaced by a one-sided derivative matching check at r = 1,
which is the grid-observable form of C^n continuity across the arc.

Cutoffs are tensor products of one-dimensional C^4 polynomial smoothsteps
(s = 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9).  An exp(-1/t) profile
is smoother on paper but its derivative spikes are hopeless to resolve on
desk-scale grids; C^4 covers every order n <= 4 this package exposes.

Finitely many arcs are handled by iterating the single-arc step with
geometric accuracy budgets eps * 2^-k, one closed arc per step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .grid import (
    PolarGrid,
    _build_ring_tables,
    _radial_rule,
    fornberg_weights,
    radial_derivative_matrix,
    ring_cauchy_transform,
)
from .series import AnalyticVectorFunction, BoundaryVectorFunction

__all__ = [
    "ArcBox",
    "ArcSpec",
    "ExtensionGeometry",
    "ExtensionResult",
    "BudgetError",
    "smoothstep",
    "Ramp",
    "Bump",
    "make_bump",
    "radial_extension",
    "correction_h",
    "approximate_extension",
    "multi_arc_extension",
]


def smoothstep(t):
    """C^4 polynomial ramp: 0 for t <= 0, 1 for t >= 1, monotone between."""
    t = np.clip(t, 0.0, 1.0)
    return t**5 * (70 * t**4 - 315 * t**3 + 540 * t**2 - 420 * t + 126)


def smoothstep_d(t):
    inb = (t > 0) & (t < 1)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inb, 630 * tc**4 * (1 - tc) ** 4, 0.0)


def smoothstep_d2(t):
    inb = (t > 0) & (t < 1)
    tc = np.clip(t, 0.0, 1.0)
    return np.where(inb, 2520 * tc**3 * (1 - tc) ** 3 * (1 - 2 * tc), 0.0)


class Ramp:
    """Plateau profile: rises over [x0, x1], equals 1 on [x1, x2], falls over [x2, x3]."""

    def __init__(self, x0, x1, x2, x3):
        if not x0 < x1 < x2 < x3:
            raise ValueError("ramp breakpoints must be strictly increasing")
        self.p = (float(x0), float(x1), float(x2), float(x3))

    def __call__(self, x):
        x0, x1, x2, x3 = self.p
        return smoothstep((x - x0) / (x1 - x0)) * smoothstep((x3 - x) / (x3 - x2))

    def d(self, x):
        x0, x1, x2, x3 = self.p
        u = smoothstep((x - x0) / (x1 - x0))
        du = smoothstep_d((x - x0) / (x1 - x0)) / (x1 - x0)
        v = smoothstep((x3 - x) / (x3 - x2))
        dv = -smoothstep_d((x3 - x) / (x3 - x2)) / (x3 - x2)
        return du * v + u * dv

    def d2(self, x):
        x0, x1, x2, x3 = self.p
        t1 = (x - x0) / (x1 - x0)
        t2 = (x3 - x) / (x3 - x2)
        u, du, d2u = smoothstep(t1), smoothstep_d(t1) / (x1 - x0), smoothstep_d2(t1) / (x1 - x0) ** 2
        v, dv, d2v = smoothstep(t2), -smoothstep_d(t2) / (x3 - x2), smoothstep_d2(t2) / (x3 - x2) ** 2
        return d2u * v + 2 * du * dv + u * d2v


def _wrap(dtheta):
    """Angle difference reduced to (-pi, pi]."""
    return (np.asarray(dtheta) + np.pi) % (2 * np.pi) - np.pi


class Bump:
    """Tensor-product cutoff b(r, theta) = a(theta - center) * b(r).

    Equals 1 on the U box, 0 outside the W box, with closed-form dbar and the
    second derivatives that feed the transform's desingularization model.
    """

    def __init__(self, center: float, ang: Ramp, rad: Ramp):
        self.center = float(center)
        self.ang = ang
        self.rad = rad

    def val(self, z):
        r = np.abs(z)
        t = _wrap(np.angle(z) - self.center)
        return self.ang(t) * self.rad(r)

    def _polar_pieces(self, z):
        r = np.abs(z)
        th = np.angle(z)
        t = _wrap(th - self.center)
        a, da, d2a = self.ang(t), self.ang.d(t), self.ang.d2(t)
        b, db, d2b = self.rad(r), self.rad.d(r), self.rad.d2(r)
        return r, th, a, da, d2a, b, db, d2b

    def dbar(self, z):
        """(e^{i theta}/2)(d_r + (i/r) d_theta) of the cutoff."""
        r, th, a, da, _, b, db, _ = self._polar_pieces(z)
        g = a * db + 1j / r * da * b
        return 0.5 * np.exp(1j * th) * g

    def dbar_model(self, z):
        """(dbar b, d(dbar b)/dz, dbar(dbar b)): closed forms for the model."""
        r, th, a, da, d2a, b, db, d2b = self._polar_pieces(z)
        g = a * db + 1j / r * da * b
        dg_r = a * d2b - 1j / r**2 * da * b + 1j / r * da * db
        dg_t = da * db + 1j / r * d2a * b
        e = np.exp(1j * th)
        dbar_b = 0.5 * e * g
        dbar_dbar_b = (e**2 / 4) * (dg_r + 1j / r * dg_t - g / r)
        d_dbar_b = g / (4 * r) + 0.25 * (dg_r - 1j / r * dg_t)
        return dbar_b, d_dbar_b, dbar_dbar_b


@dataclass(frozen=True)
class ArcBox:
    """One closed arc C with nested angular x radial neighbourhoods U inside W."""

    c: tuple[float, float]        # closed subarc, radians
    u_theta: tuple[float, float]
    u_r: tuple[float, float]
    w_theta: tuple[float, float]
    w_r: tuple[float, float]

    def __post_init__(self):
        c0, c1 = self.c
        ut0, ut1 = self.u_theta
        wt0, wt1 = self.w_theta
        ur0, ur1 = self.u_r
        wr0, wr1 = self.w_r
        if not c0 < c1 or c1 - c0 >= 2 * math.pi:
            raise ValueError("arc must be a nonempty interval shorter than the full circle")
        if not (wt0 < ut0 < c0 and c1 < ut1 < wt1):
            raise ValueError("need strict angular nesting W > U > C")
        if not (wr0 < ur0 < 1.0 < ur1 < wr1):
            raise ValueError("radial boxes must straddle the unit circle with strict nesting")
        if wt1 - wt0 >= 2 * math.pi:
            raise ValueError("W wraps the whole circle")

    @property
    def center(self) -> float:
        return 0.5 * (self.c[0] + self.c[1])

    def bump(self) -> Bump:
        ctr = self.center
        ang = Ramp(
            self.w_theta[0] - ctr, self.u_theta[0] - ctr,
            self.u_theta[1] - ctr, self.w_theta[1] - ctr,
        )
        rad = Ramp(self.w_r[0], self.u_r[0], self.u_r[1], self.w_r[1])
        return Bump(ctr, ang, rad)

    def in_u_sector(self, z, pad_r: float = 0.0, pad_theta: float = 0.0):
        """Nodes inside the cutoff plateau U, shrunk so that radial finite
        difference stencils and spectral smoothing never leave the plateau."""
        t = _wrap(np.angle(z) - self.center)
        return (
            (t > self.u_theta[0] - self.center + pad_theta)
            & (t < self.u_theta[1] - self.center - pad_theta)
            & (np.abs(z) > self.u_r[0] + pad_r)
            & (np.abs(z) < self.u_r[1] - pad_r)
        )


@dataclass(frozen=True)
class ArcSpec:
    """Open arc set S (finite union of intervals) and the arcs to extend across."""

    s_intervals: tuple  # ((lo, hi), ...)
    arcs: tuple         # (ArcBox, ...)

    def __post_init__(self):
        for lo, hi in self.s_intervals:
            if not lo < hi or hi - lo > 2 * math.pi:
                raise ValueError("S intervals must be nonempty and at most a full circle")
        for arc in self.arcs:
            host = [
                (lo, hi)
                for lo, hi in self.s_intervals
                if lo < arc.w_theta[0] and arc.w_theta[1] < hi
            ]
            if not host:
                raise ValueError(
                    f"arc at {arc.c} has W angular extent outside S (W cap T must lie in S)"
                )
        spans = sorted(arc.w_theta for arc in self.arcs)
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            if b0 < a1:
                raise ValueError("arcs overlap: W sectors must be pairwise disjoint")

    @classmethod
    def from_dict(cls, d: dict) -> "ArcSpec":
        try:
            s = tuple((float(a), float(b)) for a, b in d["s_intervals"])
            arcs = tuple(
                ArcBox(
                    c=(float(a["c"][0]), float(a["c"][1])),
                    u_theta=(float(a["u_theta"][0]), float(a["u_theta"][1])),
                    u_r=(float(a["u_r"][0]), float(a["u_r"][1])),
                    w_theta=(float(a["w_theta"][0]), float(a["w_theta"][1])),
                    w_r=(float(a["w_r"][0]), float(a["w_r"][1])),
                )
                for a in d["arcs"]
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValueError(f"malformed arc spec: {exc}") from exc
        return cls(s_intervals=s, arcs=arcs)

    def to_dict(self) -> dict:
        return {
            "s_intervals": [[a, b] for a, b in self.s_intervals],
            "arcs": [
                {
                    "c": list(a.c), "u_theta": list(a.u_theta), "u_r": list(a.u_r),
                    "w_theta": list(a.w_theta), "w_r": list(a.w_r),
                }
                for a in self.arcs
            ],
        }


def _panel_nodes(a: float, b: float, h: float, order: int = 6):
    n = max(1, int(math.ceil((b - a) / h)))
    x, w = roots_legendre(order)
    nodes, weights = [], []
    for j in range(n):
        lo, hi = a + (b - a) * j / n, a + (b - a) * (j + 1) / n
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (lo + hi))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class ExtensionGeometry:
    """Ring geometry for one arc: graded core, fine band below the circle,
    full-annulus collar up to rho0 = outer W radius, and the claimed boundary
    parameterization rho(theta) of the extended domain."""

    rings: np.ndarray       # increasing radii, core + fine band + collar
    ring_weights: np.ndarray  # area weights (r dr * 2 pi / Q) per ring
    theta: np.ndarray
    rho0: float
    h_fine: float
    arc: ArcBox
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def Q(self) -> int:
        return len(self.theta)

    @property
    def z(self) -> np.ndarray:
        return self.rings[:, None] * np.exp(1j * self.theta)[None, :]

    @property
    def inside(self) -> np.ndarray:
        return self.rings < 1.0

    def interface_margin(self) -> np.ndarray:
        return np.abs(self.rings - 1.0) > 1.5 * self.h_fine

    def boundary_parameterization(self, r_dil: float) -> np.ndarray:
        """rho(theta) samples of the claimed extended domain boundary."""
        arc = self.arc
        top = min(arc.u_r[1], 1.0 / r_dil) - 0.5 * self.h_fine
        width = 0.25 * (arc.u_theta[1] - arc.u_theta[0])
        prof = Ramp(
            arc.u_theta[0] - arc.center, arc.u_theta[0] - arc.center + width,
            arc.u_theta[1] - arc.center - width, arc.u_theta[1] - arc.center,
        )
        t = _wrap(self.theta - arc.center)
        return 1.0 + prof(t) * (top - 1.0)

    def dbar_rings(self, values: np.ndarray, mask: np.ndarray | None = None):
        """Discrete dbar on (a masked subset of) the merged ring set."""
        key = ("dbar", None if mask is None else mask.tobytes())
        if key not in self._cache:
            sel = np.arange(len(self.rings)) if mask is None else np.where(mask)[0]
            self._cache[key] = (sel, radial_derivative_matrix(self.rings[sel]))
        sel, Dr = self._cache[key]
        k = np.fft.fftfreq(self.Q, d=1.0 / self.Q)
        v = values[..., sel, :]
        vr = np.einsum("ab,...bq->...aq", Dr, v)
        vt = np.fft.ifft(1j * k * np.fft.fft(v, axis=-1), axis=-1)
        return sel, 0.5 * np.exp(1j * self.theta) * (vr + 1j * vt / self.rings[sel][:, None])


def make_geometry(arc: ArcBox, Q: int = 256, h_fine: float = 0.02, core_R: int = 32) -> ExtensionGeometry:
    if Q < 64 or Q % 2:
        raise ValueError("extension needs an even angular count, at least 64")
    a_split = min(0.5, arc.w_r[0] - 0.02)
    r0, w0 = _radial_rule(core_R)
    r0, w0 = r0 * a_split, w0 * a_split
    # h_fine panels hug the interface where the field kinks; the rest of the
    # band and the outer collar run at a coarser pitch
    h_bulk = 2.5 * h_fine
    near_lo, near_hi = 1.0 - 6 * h_fine, min(1.0 + 6 * h_fine, arc.w_r[1])
    r1, w1 = _panel_nodes(a_split, near_lo, h_bulk)
    r2, w2 = _panel_nodes(near_lo, 1.0, h_fine)
    r3, w3 = _panel_nodes(1.0, near_hi, h_fine)
    pieces_r = [r0, r1, r2, r3]
    pieces_w = [w0, w1, w2, w3]
    if near_hi < arc.w_r[1]:
        r4, w4 = _panel_nodes(near_hi, arc.w_r[1], h_bulk)
        pieces_r.append(r4)
        pieces_w.append(w4)
    rings = np.concatenate(pieces_r)
    pure = np.concatenate(pieces_w)
    return ExtensionGeometry(
        rings=rings,
        ring_weights=pure * rings * (2 * np.pi / Q),
        theta=2 * np.pi * np.arange(Q) / Q,
        rho0=float(arc.w_r[1]),
        h_fine=h_fine,
        arc=arc,
    )


def radial_extension(boundary: BoundaryVectorFunction, radii) -> np.ndarray:
    """Constant-along-rays collar values: f(r z) = f(z) for r > 1, z on the circle.

    Returns shape (m, len(radii), G).
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii < 1.0):
        raise ValueError("collar radii must be >= 1")
    return np.broadcast_to(
        boundary.samples[:, None, :], (boundary.m, len(radii), boundary.G)
    ).copy()


class _ExtensionField:
    """f plus accumulated arc corrections; evaluable on arbitrary ring sets."""

    def __init__(self, f: AnalyticVectorFunction):
        self.f = f
        self.steps = []  # (bump, geometry, r_dil, psi_src values)

    # -- base radial extension and its Wirtinger derivatives -----------------

    def _base(self, z):
        r = np.abs(z)
        zz = np.where(r > 1, z / np.maximum(r, 1e-300), z)
        out = np.zeros((self.f.m,) + z.shape, dtype=complex)
        sel = (...,) + (None,) * z.ndim
        for j in range(self.f.degree, -1, -1):
            out = out * zz + self.f.coeffs[:, j][sel]
        return out

    def _base_model(self, z):
        r = np.abs(z)
        th = np.angle(z)
        dc = self.f.derivative(1)
        rim = np.exp(1j * th)
        fp_rim = np.zeros((self.f.m,) + z.shape, dtype=complex)
        fp_in = np.zeros_like(fp_rim)
        sel = (...,) + (None,) * z.ndim
        for j in range(dc.degree, -1, -1):
            fp_rim = fp_rim * rim + dc.coeffs[:, j][sel]
            fp_in = fp_in * z + dc.coeffs[:, j][sel]
        inside = r <= 1
        rr = np.maximum(r, 1e-9)
        dbarF = np.where(inside, 0, -rim**2 * fp_rim / (2 * rr))
        dF = np.where(inside, fp_in, fp_rim / (2 * rr))
        return dbarF, dF

    # -- field evaluation on ring sets ---------------------------------------

    def values_on(self, geom: ExtensionGeometry, radii: np.ndarray) -> np.ndarray:
        z = radii[:, None] * np.exp(1j * geom.theta)[None, :]
        vals = self._base(z)
        for step_idx, (bump, g, r_dil, _) in enumerate(self.steps):
            vals = vals - self._h_on(step_idx, g, radii) + self._h_on(step_idx, g, radii * r_dil)
        return vals

    def _partial_values(self, upto: int, geom: ExtensionGeometry, radii: np.ndarray) -> np.ndarray:
        z = radii[:, None] * np.exp(1j * geom.theta)[None, :]
        vals = self._base(z)
        for step_idx in range(upto):
            bump, g, r_dil, _ = self.steps[step_idx]
            vals = vals - self._h_on(step_idx, g, radii) + self._h_on(step_idx, g, radii * r_dil)
        return vals

    def _psi_model(self, upto: int, bump: Bump, geom: ExtensionGeometry, radii: np.ndarray):
        """Density (dbar b) F and its Wirtinger derivatives at the given rings.

        F derivatives are approximated by the base radial extension's; for the
        first arc this is exact, later arcs only steer the desingularization
        model of a correction that is itself small.
        """
        z = radii[:, None] * np.exp(1j * geom.theta)[None, :]
        F = self._partial_values(upto, geom, radii)
        dbF, dF = self._base_model(z)
        dbar_b, d_dbar_b, dbar_dbar_b = bump.dbar_model(z)
        psi = dbar_b * F
        a = d_dbar_b * F + dbar_b * dF
        b = dbar_dbar_b * F + dbar_b * dbF
        return psi, a, b

    def _h_on(self, step_idx: int, geom: ExtensionGeometry, radii: np.ndarray) -> np.ndarray:
        bump, g, r_dil, psi_src = self.steps[step_idx]
        z = radii[:, None] * np.exp(1j * g.theta)[None, :]
        F = self._partial_values(step_idx, g, radii)
        u = self._u_on(step_idx, radii)
        return bump.val(z) * F - u

    def _u_on(self, step_idx: int, radii: np.ndarray) -> np.ndarray:
        bump, g, r_dil, psi_src = self.steps[step_idx]
        key = (step_idx, radii.tobytes())
        cache = g._cache.setdefault("u", {})
        if key in cache:
            return cache[key]
        psi_t, a_t, b_t = self._psi_model(step_idx, bump, g, radii)
        out = np.empty_like(psi_t)
        block = 48  # bounds the (n_src, block, Q) kernel table memory
        for j0 in range(0, len(radii), block):
            sl = slice(j0, min(j0 + block, len(radii)))
            tables = _build_ring_tables(g.rings, g.ring_weights, g.Q, radii[sl])
            out[..., sl, :] = ring_cauchy_transform(
                tables, g.Q, g.rho0, radii[sl],
                psi_src, psi_t[..., sl, :], a_t[..., sl, :], b_t[..., sl, :],
            )
        cache[key] = out
        return out

    def push(self, bump: Bump, geom: ExtensionGeometry, r_dil: float):
        psi_src, _, _ = self._psi_model(len(self.steps), bump, geom, geom.rings)
        self.steps.append((bump, geom, r_dil, psi_src))


@dataclass(frozen=True)
class ExtensionResult:
    """Extended field with its measured certificates.

    eps_S1 is the order-n norm of (F - f) restricted to the disc, measured
    spectrally on the outermost interior measurement ring.  eps_S3 compares
    the same norm estimate of F over the extended domain (order-0 part also
    sampled on the analytic collar nodes) with the norm of f.  The dbar
    residual is the sup of the discrete dbar of F over the certified region:
    collar and U nodes inside the claimed domain, an interface margin of
    1.5 h_fine excluded; continuity across the interface is certified
    separately by one-sided radial derivative matching at r = 1.
    """

    f_values: np.ndarray            # field on the ring set (m, n_rings, Q)
    rings: np.ndarray
    theta: np.ndarray
    eps_s1: float
    eps_s3: float
    dbar_residual_collar: float
    interface_gaps: tuple           # per order 0..n, max |inside - outside|
    boundary_rho: np.ndarray        # sampled polar parameterization of the claimed domain
    step_log: tuple = ()            # ((arc_index, r_dil, step_eps, budget), ...)
    budgets_met: bool = True

    def to_dict(self) -> dict:
        return {
            "eps_s1": float(self.eps_s1),
            "eps_s3": float(self.eps_s3),
            "dbar_residual_collar": float(self.dbar_residual_collar),
            "interface_gaps": [float(g) for g in self.interface_gaps],
            "rho_deviation": float(np.abs(self.boundary_rho - 1).max()),
            "step_log": [
                {"arc": int(a), "r": float(r), "eps": float(e), "budget": float(b)}
                for a, r, e, b in self.step_log
            ],
            "budgets_met": bool(self.budgets_met),
        }


class BudgetError(RuntimeError):
    def __init__(self, step: int, measured: float, budget: float):
        self.step = step
        super().__init__(
            f"extension step {step} missed its accuracy budget: {measured:.3e} > {budget:.3e}"
        )


def _ring_spectral_norm(values_ring: np.ndarray, rho: float, n: int, Q: int):
    """Order-n norm of an analytic function from samples on one interior ring.

    Negative modes (the anti-analytic leak) are dropped; their energy fraction
    is returned alongside so callers can see what was discarded.
    """
    modes = np.fft.fft(values_ring, axis=-1) / Q
    k = np.fft.fftfreq(Q, d=1.0 / Q).astype(int)
    tot = float((np.abs(modes) ** 2).sum())
    neg = float((np.abs(modes[..., k < 0]) ** 2).sum())
    sups = []
    for order in range(n + 1):
        mult = np.where(k >= order, _falling(k, order) / rho**order, 0.0)
        vals = np.fft.ifft(modes * mult, axis=-1) * Q
        sups.append(float(np.sqrt((np.abs(vals) ** 2).sum(axis=0)).max()))
    total = sum(s / math.factorial(j) for j, s in enumerate(sups))
    return total, sups, (neg / tot if tot > 0 else 0.0)


def _falling(k: np.ndarray, order: int) -> np.ndarray:
    out = np.ones_like(k, dtype=float)
    for i in range(order):
        out = out * np.maximum(k - i, 0)
    return out


def correction_h(
    f: AnalyticVectorFunction,
    arc: ArcBox,
    Q: int = 256,
    h_fine: float = 0.02,
) -> dict:
    """Single cutoff correction h = b f - u with its residual certificates.

    Returns the h values on the geometry rings together with sup_D |dbar h|
    (disc-side stencils only) and sup_U |dbar (f - h)| (margin-excluded).
    Aborts if the transform's own contract fails outright (residual > 0.5).
    """
    geom = make_geometry(arc, Q, h_fine)
    state = _ExtensionField(f)
    bump = arc.bump()
    state.push(bump, geom, 1.0)
    h_vals = state._h_on(0, geom, geom.rings)

    sel_in, dh_in = geom.dbar_rings(h_vals, geom.inside)
    interior = np.sqrt((np.abs(dh_in) ** 2).sum(axis=0))
    margin_in = geom.interface_margin()[np.where(geom.inside)[0]]
    dbar_h_disc = float(interior[margin_in].max())

    fmh = state._base(geom.z) - h_vals
    sel_all, dfm = geom.dbar_rings(fmh)
    in_u = (
        arc.in_u_sector(geom.z[sel_all], 3 * h_fine, 6 * math.pi / Q)
        & geom.interface_margin()[sel_all][:, None]
    )
    pts = np.sqrt((np.abs(dfm) ** 2).sum(axis=0))[in_u]
    dbar_fmh_u = float(pts.max()) if pts.size else 0.0

    scale = max(float(np.abs(state.steps[0][3]).max()), 1e-30)
    if dbar_h_disc > 0.5 * scale:
        raise RuntimeError(
            f"Cauchy transform contract failed: dbar h residual {dbar_h_disc:.2e} "
            f"against density scale {scale:.2e}"
        )
    return {
        "geometry": geom,
        "h": h_vals,
        "dbar_h_disc": dbar_h_disc,
        "dbar_f_minus_h_u": dbar_fmh_u,
    }


def _measure(state: _ExtensionField, geoms, f, n: int, r_last: float, step_log, budgets_met):
    geom = geoms[-1]
    F_vals = state.values_on(geom, geom.rings)

    inside_idx = np.where(geom.inside)[0]
    meas_idx = inside_idx[-1]
    rho = float(geom.rings[meas_idx])
    diff_ring = F_vals[:, meas_idx, :] - f.eval(rho * np.exp(1j * geom.theta))
    eps_s1, _, _ = _ring_spectral_norm(diff_ring, rho, n, geom.Q)

    # dbar residual over the certified region of every pushed arc, and the
    # interface matching of f - h (h_r is analytic at r = 1, so the C^n gluing
    # of the construction is carried entirely by f - h)
    worst = 0.0
    rho_claim = np.ones(geom.Q)
    gaps = np.zeros(n + 1)
    for idx, (bump, g, r_dil, _) in enumerate(state.steps):
        vals = state.values_on(g, g.rings)
        sel, dF = g.dbar_rings(vals)
        zsel = g.z[sel]
        cert = (
            g.arc.in_u_sector(zsel, 3 * g.h_fine, 6 * math.pi / g.Q)
            & (np.abs(zsel) < 1.0 / r_dil - 3 * g.h_fine)
            & g.interface_margin()[sel][:, None]
        )
        pts = np.sqrt((np.abs(dF) ** 2).sum(axis=0))[cert]
        if pts.size:
            worst = max(worst, float(pts.max()))
        rho_claim = np.maximum(rho_claim, g.boundary_parameterization(r_dil))
        fmh = state._partial_values(idx, g, g.rings) - state._h_on(idx, g, g.rings)
        gaps = np.maximum(gaps, _interface_gaps(g, fmh, bump, n))

    # order-n norm of F over the claimed domain: spectral on the measurement
    # ring for all orders, order-0 also sampled on the analytic collar nodes
    norm_F, sups, _ = _ring_spectral_norm(F_vals[:, meas_idx, :], rho, n, geom.Q)
    collar_sup = 0.0
    for bump, g, r_dil, _ in state.steps:
        vals = state.values_on(g, g.rings)
        outside = ~g.inside
        zout = g.z[outside]
        claim = np.abs(zout) < g.boundary_parameterization(r_dil)[None, :]
        if claim.any():
            collar_sup = max(
                collar_sup,
                float(np.sqrt((np.abs(vals[:, outside, :]) ** 2).sum(axis=0))[claim].max()),
            )
    norm_F += max(0.0, collar_sup - sups[0])
    from .series import algebra_norm

    eps_s3 = abs(norm_F - algebra_norm(f, n, 1 << (max(2 * (f.degree + 1), geom.Q) - 1).bit_length()).weighted_sum)

    return ExtensionResult(
        f_values=F_vals,
        rings=geom.rings,
        theta=geom.theta,
        eps_s1=eps_s1,
        eps_s3=eps_s3,
        dbar_residual_collar=worst,
        interface_gaps=tuple(gaps),
        boundary_rho=rho_claim,
        step_log=tuple(step_log),
        budgets_met=budgets_met,
    )


def _interface_gaps(geom: ExtensionGeometry, vals: np.ndarray, bump: Bump, n: int) -> np.ndarray:
    """One-sided radial derivative agreement at r = 1 inside the U sector.

    Stencil nodes stand off the interface by 1.2 h_fine: the rings hugging
    r = 1 carry the largest share of the transform's quadrature error, and a
    derivative stencil touching them measures that error, not the field.
    """
    off = 1.2 * geom.h_fine
    inside_idx = np.where(geom.rings < 1 - off)[0][-5:]
    outside_idx = np.where(geom.rings > 1 + off)[0][:5]
    t = _wrap(geom.theta - bump.center)
    sector = (t > bump.ang.p[1]) & (t < bump.ang.p[2])
    gaps = np.zeros(n + 1)
    for order in range(n + 1):
        wi = fornberg_weights(1.0, geom.rings[inside_idx], order)
        wo = fornberg_weights(1.0, geom.rings[outside_idx], order)
        vin = np.einsum("s,msq->mq", wi, vals[:, inside_idx, :])
        vout = np.einsum("s,msq->mq", wo, vals[:, outside_idx, :])
        diff = np.sqrt((np.abs(vin - vout) ** 2).sum(axis=0))
        gaps[order] = float(diff[sector].max()) if sector.any() else 0.0
    return gaps


def approximate_extension(
    f: AnalyticVectorFunction,
    arc: ArcBox,
    r: float,
    n: int = 1,
    Q: int = 256,
    h_fine: float = 0.02,
) -> ExtensionResult:
    """Extend f across one closed arc: F = f - h + h_r on disc plus collar."""
    if not 0 < r < 1:
        raise ValueError("dilation parameter must lie in (0, 1)")
    geom = make_geometry(arc, Q, h_fine)
    state = _ExtensionField(f)
    state.push(arc.bump(), geom, r)
    return _measure(state, [geom], f, n, r, step_log=(), budgets_met=True)


def multi_arc_extension(
    f: AnalyticVectorFunction,
    spec: ArcSpec,
    eps: float,
    n: int = 1,
    Q: int = 256,
    h_fine: float = 0.02,
    r_start: float = 0.97,
    max_tries: int = 5,
) -> ExtensionResult:
    """Iterate the single-arc step over finitely many arcs.

    Step k gets the budget eps * 2^-k for the norm of its perturbation
    h_r - h on the disc; the dilation parameter is pushed toward 1 until the
    budget is met, else the step index is reported in a BudgetError.
    """
    if eps <= 0:
        raise ValueError("accuracy budget must be positive")
    state = _ExtensionField(f)
    geoms = []
    log = []
    for kk, arc in enumerate(spec.arcs, start=1):
        geom = make_geometry(arc, Q, h_fine)
        geoms.append(geom)
        budget = eps * 2.0**-kk
        bump = arc.bump()
        achieved = None
        r_dil = r_start
        for attempt in range(max_tries):
            before = state._partial_values(len(state.steps), geom, geom.rings)
            state.push(bump, geom, r_dil)
            h = state._h_on(len(state.steps) - 1, geom, geom.rings)
            h_r = state._h_on(len(state.steps) - 1, geom, geom.rings * r_dil)
            inside_idx = np.where(geom.inside)[0][-1]
            rho = float(geom.rings[inside_idx])
            step_eps, _, _ = _ring_spectral_norm(
                (h_r - h)[:, inside_idx, :], rho, n, geom.Q
            )
            if step_eps <= budget:
                achieved = (r_dil, step_eps)
                break
            state.steps.pop()  # retry with a dilation closer to 1
            r_dil = 1 - (1 - r_dil) / 2
        if achieved is None:
            raise BudgetError(kk, step_eps, budget)
        log.append((kk, achieved[0], achieved[1], budget))
    return _measure(state, geoms, f, n, log[-1][1] if log else r_start, log, True)
