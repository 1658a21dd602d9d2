"""Command-line interface: solve, verify, estimate-constant, extend, carleson.

Exit codes are disjoint and stable:

    0   success
    1   certification failure (corona condition not certifiable) or a failed
        identity in the verify suite
    2   solution flagged LOW_CONFIDENCE or residual above tolerance
    3   extension accuracy budget missed (step index in the message)
    64  usage error: malformed spec files, invalid sizes, invalid budgets

Every report embeds the full run configuration.  With a fixed seed the
outputs are byte-identical across reruns; wall-clock timing therefore stays
out of the reports unless explicitly requested with --timing.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import carleson as carleson_mod
from . import corona as corona_mod
from .extend import ArcSpec, BudgetError, multi_arc_extension
from .grid import DiscField, PolarGrid, cauchy_transform, dbar, green_rhs, h2_norm, littlewood_paley_norm, make_grid
from .series import (
    MEAN_VALUE_CONSTANT,
    AnalyticVectorFunction,
    BoundaryVectorFunction,
    algebra_norm,
    angular_derivative,
    boundary_trace,
)

OK, CERT_FAIL, LOW_CONFIDENCE, BUDGET_FAIL, USAGE = 0, 1, 2, 3, 64

CSV_HEADER = "delta,m,n,trial,g_norm,bezout_residual,dbar_residual,wall_ms"


@dataclass(frozen=True)
class RunConfig:
    """Discretization sizes and tolerances shared by all commands."""

    N: int = 8
    G: int = 4096
    R: int = 64
    Q: int = 128
    n: int = 1
    tol_bezout: float = 1e-4
    tol_dbar: float = 1e-2
    seed: int = 0
    out: str | None = None

    def validate(self) -> None:
        if self.G < 8 or self.G & (self.G - 1):
            raise ValueError(f"boundary grid G={self.G} must be a power of two, at least 8")
        if self.G < 2 * (self.N + 1):
            raise ValueError(f"G={self.G} aliases degree {self.N}: need G >= {2 * (self.N + 1)}")
        if self.R < 4:
            raise ValueError("radial size must be at least 4")
        if self.Q < 8 or self.Q % 2:
            raise ValueError("angular size must be even, at least 8")
        if self.n < 0:
            raise ValueError("smoothness order must be nonnegative")
        if self.tol_bezout <= 0 or self.tol_dbar <= 0:
            raise ValueError("tolerances must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _write_report(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_function(path: str) -> AnalyticVectorFunction:
    return AnalyticVectorFunction.from_dict(_load_json(path))


# ---------------------------------------------------------------------------
# solve


def cmd_solve(cfg: RunConfig, spec_path: str) -> int:
    try:
        f = _load_function(spec_path)
        if cfg.G < 2 * (f.degree + 1):
            raise ValueError(
                f"G={cfg.G} aliases the input (degree {f.degree}); need G >= {2 * (f.degree + 1)}"
            )
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    grid = make_grid(cfg.R, cfg.Q)
    try:
        sol = corona_mod.solve_corona(f, grid, n=cfg.n, G=cfg.G)
    except corona_mod.UncertifiableDataError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return CERT_FAIL
    payload = {"config": cfg.to_dict(), "solution": sol.to_dict()}
    _write_report(payload, cfg.out)
    if sol.low_confidence:
        return LOW_CONFIDENCE
    return OK if sol.bezout_residual <= cfg.tol_bezout else LOW_CONFIDENCE


# ---------------------------------------------------------------------------
# verify


def _verify_checks(cfg: RunConfig):
    """Yield (name, measured_error, tolerance) for the fixed identity suite."""
    grid = make_grid(cfg.R, cfg.Q)
    z = grid.z

    # Green's formula: boundary mean - center value = (2/pi) iint ddbar(u) log(1/|z|)
    lap_sq = DiscField(grid, np.ones_like(z))
    yield "green-|z|^2", abs(green_rhs(lap_sq) - 1.0), 1e-5
    lap_q = DiscField(grid, 4.0 * np.abs(z) ** 2 + 0j)
    yield "green-|z|^4", abs(green_rhs(lap_q) - 1.0), 1e-5
    lap_h = DiscField(grid, np.zeros_like(z))
    yield "green-harmonic", abs(green_rhs(lap_h)), 1e-8

    for k in range(1, 9):
        mono = AnalyticVectorFunction.from_scalar([0.0] * k + [1.0])
        yield f"littlewood-paley-z^{k}", abs(littlewood_paley_norm(mono, grid) - 1.0), 1e-6

    worst = 0.0
    for k in range(0, 9):
        mono = AnalyticVectorFunction.from_scalar([0.0] * k + [1.0])
        expected = np.zeros(k + 1, dtype=complex)
        expected[k] = k
        worst = max(worst, float(np.abs(angular_derivative(mono).coeffs[0] - expected).max()))
    yield "angular-derivative-spectral", worst, 0.0

    one = DiscField(grid, np.ones_like(z))
    u1 = cauchy_transform(one)
    yield "cauchy-constant-density", float(np.abs(u1.values - np.conj(z)).max()), 1e-4

    worst = 0.0
    rng = np.random.default_rng(cfg.seed)
    for _ in range(3):
        dens = np.zeros_like(z)
        for k in range(-3, 4):
            c = rng.standard_normal() + 1j * rng.standard_normal()
            dens += c * grid.r[:, None] ** abs(k) * (1 - 0.5 * grid.r[:, None] ** 2) * np.exp(
                1j * k * grid.theta
            )
        fld = DiscField(grid, dens)
        res = np.abs(dbar(cauchy_transform(fld)).values - dens).max() / np.abs(dens).max()
        worst = max(worst, float(res))
    yield "dbar-cauchy-contract", worst, cfg.tol_dbar

    # D-norm chain; vacuous at n = 0
    if cfg.n >= 1:
        worst = 0.0
        for t in range(10):
            trng = np.random.default_rng(cfg.seed + 1000 + t)
            modes = {}
            for k in range(1, 33):
                for s in (k, -k):
                    modes[s] = (trng.standard_normal() + 1j * trng.standard_normal()) / k**1.5
            b = BoundaryVectorFunction.from_modes(modes, cfg.G)
            dn = b.angular_derivative(cfg.n).sup_norm()
            for k in range(1, cfg.n + 1):
                dk = b.angular_derivative(k).sup_norm()
                bound = MEAN_VALUE_CONSTANT ** (cfg.n - k) * dn
                worst = max(worst, dk - bound)
        yield "derivative-chain", max(worst, 0.0), 1e-10


def cmd_verify(cfg: RunConfig) -> int:
    all_ok = True
    lines = []
    try:
        for name, err, tol in _verify_checks(cfg):
            ok = err <= max(tol, 1e-300) or (tol == 0.0 and err == 0.0)
            all_ok &= ok
            lines.append((name, ok, err, tol))
            print(f"{'PASS' if ok else 'FAIL'} {name:32s} err={err:.3e} tol={tol:.1e}")
    except ValueError as exc:
        print(f"FAIL suite-aborted                      {exc}")
        all_ok = False
    if cfg.out:
        _write_report(
            {
                "config": cfg.to_dict(),
                "checks": [
                    {"name": n, "pass": bool(o), "error": float(e), "tol": float(t)}
                    for n, o, e, t in lines
                ],
                "all_pass": bool(all_ok),
            },
            cfg.out,
        )
    return OK if all_ok else CERT_FAIL


# ---------------------------------------------------------------------------
# estimate-constant


def _random_corona_data(rng, m: int, degree: int, n: int, delta: float, grid, G: int):
    """Rejection sampling: constant direction plus decaying wiggle, rescaled to
    unit algebra norm, largest wiggle scale whose certified minimum clears delta."""
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    v /= np.linalg.norm(v)
    wig = rng.standard_normal((m, degree + 1)) + 1j * rng.standard_normal((m, degree + 1))
    wig[:, 0] = 0
    wig /= np.arange(1, degree + 2) ** 2
    for scale in (0.5, 0.4, 0.32, 0.25, 0.2, 0.15, 0.11, 0.08, 0.05, 0.03, 0.015, 0.0):
        coeffs = scale * wig.copy()
        coeffs[:, 0] += v
        f = AnalyticVectorFunction(coeffs)
        f = AnalyticVectorFunction(f.coeffs / algebra_norm(f, n, G).weighted_sum)
        if corona_mod.certify_min_modulus(f, grid) >= delta:
            return f
    return None


def cmd_estimate_constant(
    cfg: RunConfig,
    deltas: list[float],
    m: int,
    trials: int,
    orders: list[int],
    timing: bool,
) -> int:
    if trials < 1:
        print("error: need at least one trial", file=sys.stderr)
        return USAGE
    grid = make_grid(cfg.R, cfg.Q)
    rows = []
    for delta in sorted(deltas):
        for n in orders:
            for trial in range(trials):
                rng = np.random.default_rng((cfg.seed ^ (trial + 1)) + 65537 * n)
                f = _random_corona_data(rng, m, cfg.N, n, delta, grid, cfg.G)
                if f is None:
                    rows.append(f"{delta:.6g},{m},{n},{trial},EMPTY,,,0")
                    continue
                t0 = time.perf_counter()
                sol = corona_mod.solve_corona(f, grid, n=n, G=cfg.G)
                ms = (time.perf_counter() - t0) * 1000 if timing else 0.0
                rows.append(
                    f"{delta:.6g},{m},{n},{trial},"
                    f"{sol.g_norm.weighted_sum:.12e},{sol.bezout_residual:.12e},"
                    f"{sol.diagnostics.get('psi_dbar_residual', 0.0):.12e},{ms:.0f}"
                )
    text = CSV_HEADER + "\n" + "\n".join(rows) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return OK


# ---------------------------------------------------------------------------
# extend


def cmd_extend(cfg: RunConfig, arc_path: str, spec_path: str, eps: float, q_ext: int) -> int:
    try:
        if eps <= 0:
            raise ValueError("accuracy budget must be positive")
        spec = ArcSpec.from_dict(_load_json(arc_path))
        f = _load_function(spec_path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    try:
        result = multi_arc_extension(f, spec, eps, n=cfg.n, Q=q_ext)
    except BudgetError as exc:
        print(f"budget failure: {exc}", file=sys.stderr)
        return BUDGET_FAIL
    payload = {"config": cfg.to_dict(), "eps": eps, "result": result.to_dict()}
    _write_report(payload, cfg.out)
    return OK if result.budgets_met else BUDGET_FAIL


# ---------------------------------------------------------------------------
# carleson


def cmd_carleson(cfg: RunConfig, spec_path: str) -> int:
    try:
        f = _load_function(spec_path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    grid = make_grid(cfg.R, cfg.Q)
    Gb = 1 << (max(cfg.G, 2 * (f.degree + 1)) - 1).bit_length()
    sup_F = boundary_trace(f, Gb).sup_norm()
    report = carleson_mod.carleson_report(f, grid, sup_F)
    payload = {"config": cfg.to_dict(), "sup_F": sup_F, "report": report.to_dict()}
    _write_report(payload, cfg.out)
    return OK if report.embedding_const <= report.bound_prop + 1e-3 else LOW_CONFIDENCE


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--degree", type=int, default=8, dest="N", help="working truncation degree")
    p.add_argument("--grid-boundary", type=int, default=4096, dest="G", help="boundary grid size (power of two)")
    p.add_argument("--grid-radial", type=int, default=64, dest="R")
    p.add_argument("--grid-angular", type=int, default=128, dest="Q")
    p.add_argument("--order", type=int, default=1, dest="n", help="smoothness order n")
    p.add_argument("--tol-bezout", type=float, default=1e-4)
    p.add_argument("--tol-dbar", type=float, default=1e-2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None)


def _config(args) -> RunConfig:
    return RunConfig(
        N=args.N, G=args.G, R=args.R, Q=args.Q, n=args.n,
        tol_bezout=args.tol_bezout, tol_dbar=args.tol_dbar,
        seed=args.seed, out=args.out,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coronakit",
        description="Construct and verify Bezout-equation solutions on the unit disc.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve g.f = 1 for corona data from a function spec")
    _add_common(p)
    p.add_argument("function_spec")

    p = sub.add_parser("verify", help="run the fixed identity suite")
    _add_common(p)

    p = sub.add_parser("estimate-constant", help="empirical solution-norm bounds over a delta grid")
    _add_common(p)
    p.add_argument("--deltas", type=str, default="0.3,0.5,0.7")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--orders", type=str, default=None, help="comma list; defaults to --order")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identical reruns)")

    p = sub.add_parser("extend", help="holomorphic extension across boundary arcs")
    _add_common(p)
    p.add_argument("arc_spec")
    p.add_argument("function_spec")
    p.add_argument("--eps", type=float, default=0.05, help="total accuracy budget")
    p.add_argument("--grid-angular-ext", type=int, default=256, dest="q_ext")

    p = sub.add_parser("carleson", help="box norm and embedding constant of the log-weight measure")
    _add_common(p)
    p.add_argument("function_spec")

    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE

    if args.command == "solve":
        return cmd_solve(cfg, args.function_spec)
    if args.command == "verify":
        return cmd_verify(cfg)
    if args.command == "estimate-constant":
        try:
            deltas = [float(x) for x in args.deltas.split(",") if x]
            orders = [int(x) for x in args.orders.split(",")] if args.orders else [cfg.n]
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE
        return cmd_estimate_constant(cfg, deltas, args.m, args.trials, orders, args.timing)
    if args.command == "extend":
        return cmd_extend(cfg, args.arc_spec, args.function_spec, args.eps, args.q_ext)
    if args.command == "carleson":
        return cmd_carleson(cfg, args.function_spec)
    return USAGE


if __name__ == "__main__":
    sys.exit(main())
