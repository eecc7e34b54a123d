"""Command-line front end.

Exit codes: 0 all asserted checks pass, 1 a check failed, 2 usage error,
3 domain error (singular point, non-null k, bracket outside its domain).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import catalog
from .alignment import TOL_ABS, TOL_REL, boost_order_components
from .bilinear import DomainViolation, bracket, bracket_monomial, monomial_tensor
from .congruence import classify_congruence, kappa_rho
from .frames import FrameError, frame_components
from .metric_ir import parse_metric
from .metric_ir.expr import DomainError, ExprError
from .tensor_core import DOWN, TensorError, TensorValue
from .verify import diagnose as run_diagnose
from .verify import dumps, registry
from .verify.context import PointContext

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3

TENSOR_NAMES = ("Rm", "Ric", "S", "C", "∇Rm", "∇²Rm", "∇³Rm")
_T_ALIASES = {"DRm": "∇Rm", "nablaRm": "∇Rm", "D2Rm": "∇²Rm", "D3Rm": "∇³Rm", "DS": "∇S", "DC": "∇C"}


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    pass


@dataclass
class RunConfig:
    entry: object
    point: np.ndarray | None
    tol_abs: float
    tol_rel: float
    seed: int
    json: bool


# --- parsing helpers ----------------------------------------------------------------

def parse_number(text: str) -> float:
    text = text.strip()
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a decimal or rational p/q") from None


def parse_point(text: str, coords) -> np.ndarray:
    """'t=0,r=3,...' matched against the chart's coordinate names (or plain values in order)."""
    parts = [p for p in text.split(",") if p.strip()]
    if all("=" in p for p in parts):
        vals = {}
        for p in parts:
            name, _, val = p.partition("=")
            name = name.strip()
            if name not in coords:
                raise UsageError(f"unknown coordinate {name!r}; chart has {', '.join(coords)}")
            vals[name] = parse_number(val)
        missing = [c for c in coords if c not in vals]
        if missing:
            raise UsageError(f"point is missing coordinates: {', '.join(missing)}")
        return np.array([vals[c] for c in coords])
    if any("=" in p for p in parts):
        raise UsageError("mix of name=value and plain values in --point")
    if len(parts) != len(coords):
        raise UsageError(f"point has {len(parts)} values, the chart has {len(coords)} coordinates")
    return np.array([parse_number(p) for p in parts])


def split_components(text: str) -> list:
    """Split on top-level commas so that components may contain f(a, b)."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur).strip())
    return out


def load_entry(args) -> catalog.CatalogEntry:
    src = args.metric
    if src is None:
        raise UsageError("--metric is required")
    if os.path.isfile(src):
        with open(src, encoding="utf-8") as fh:
            metric = parse_metric(fh.read(), os.path.splitext(os.path.basename(src))[0])
        base = None
    else:
        try:
            base = catalog.get(src)
        except catalog.UnknownEntry as exc:
            raise UsageError(f"{src!r} is neither a file nor a catalog entry ({exc.args[0]})") from None
        metric = base.metric
    k_text = getattr(args, "k", None)
    if k_text is not None and getattr(args, "catalog_k", False):
        raise UsageError("--k and --catalog-k are mutually exclusive")
    if k_text is not None:
        comps = split_components(k_text)
        if len(comps) != metric.dim:
            raise UsageError(f"--k has {len(comps)} components, the metric has dimension {metric.dim}")
        if base is not None:
            return base.with_k(comps, k_lower=args.k_lower)
        return catalog.custom_entry(metric, comps, k_lower=args.k_lower)
    if base is None:
        raise UsageError("a metric file needs --k")
    if getattr(args, "k_lower", False):
        raise UsageError("--k-lower needs --k")
    return base


def make_config(args, need_point: bool) -> RunConfig:
    if args.tol_abs <= 0 or args.tol_rel <= 0:
        raise UsageError("tolerances must be positive")
    entry = load_entry(args)
    point = None
    if args.point is not None:
        point = parse_point(args.point, entry.metric.coords)
    elif need_point:
        point = entry.center()
    return RunConfig(entry, point, args.tol_abs, args.tol_rel, args.seed, args.json)


def _context(cfg: RunConfig) -> PointContext:
    return PointContext(cfg.entry, cfg.point, tol_abs=cfg.tol_abs, tol_rel=cfg.tol_rel)


def _emit(cfg_json: bool, payload, text: str) -> None:
    if cfg_json:
        print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        print(text)


def _tensor(ctx: PointContext, name: str) -> np.ndarray:
    name = _T_ALIASES.get(name, name)
    m = 0
    for sym, order in (("∇³", 3), ("∇²", 2), ("∇", 1)):
        if name.startswith(sym):
            m, name = order, name[len(sym):]
            break
    if name not in ("Rm", "Ric", "S", "C", "R"):
        raise UsageError(f"unknown tensor {name!r}")
    if name == "C" and ctx.n < 4:
        raise UsageError("the Weyl tensor needs dimension >= 4")
    return np.asarray(ctx.pc.jet(name, m).value, dtype=float)


# --- commands -------------------------------------------------------------------------

def cmd_classify(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    reports = {}
    for name in TENSOR_NAMES:
        if name == "C" and ctx.n < 4:
            continue
        F = frame_components(_tensor(ctx, name), ctx.f)
        reports[name] = boost_order_components(F, cfg.tol_abs, cfg.tol_rel)
    payload = {"metric": cfg.entry.name, "point": [float(x) for x in cfg.point],
               "k": [float(x) for x in ctx.f.k], "reports": {k: r.to_json() for k, r in reports.items()}}
    lines = [f"{cfg.entry.name} at {cfg.point.tolist()}"]
    for k, r in reports.items():
        bo = "zero tensor" if r.bo is None else f"bo={r.bo} ({r.label})"
        lines.append(f"  {k}: {bo}")
    _emit(cfg.json, payload, "\n".join(lines))
    return EXIT_OK


def cmd_congruence(cfg: RunConfig) -> int:
    ctx = _context(cfg)
    rep = kappa_rho(ctx.pc, ctx.k_jet, ctx.f)
    payload = {"metric": cfg.entry.name, "point": [float(x) for x in cfg.point], **rep.to_json()}
    text = (f"{cfg.entry.name} at {cfg.point.tolist()}: {classify_congruence(rep)}\n"
            f"  kappa = {np.round(rep.kappa, 12).tolist()}\n  expansion = {rep.theta:.6g}\n"
            f"  |shear| = {np.abs(rep.sigma).max(initial=0.0):.3e}, |twist| = {np.abs(rep.omega).max(initial=0.0):.3e}\n"
            f"  flags: {', '.join(k for k, v in sorted(rep.flags.items()) if v) or 'none'}")
    _emit(cfg.json, payload, text)
    return EXIT_OK


def cmd_bracket(cfg: RunConfig, T_name: str, Q_text: str) -> int:
    ctx = _context(cfg)
    arr = _tensor(ctx, T_name)
    try:
        alpha = tuple(int(x) for x in split_components(Q_text))
    except ValueError:
        raise UsageError(f"--Q must be comma-separated frame labels 0..{ctx.n - 1}") from None
    if len(alpha) != arr.ndim or any(not 0 <= a < ctx.n for a in alpha):
        raise UsageError(f"--Q needs {arr.ndim} frame labels in 0..{ctx.n - 1}")
    T = TensorValue(arr, (DOWN,) * arr.ndim)
    try:
        qd = bracket(T, ctx.f, monomial_tensor(ctx.f, alpha), cfg.tol_abs, cfg.tol_rel)
    except DomainViolation as exc:
        raise DomainFailure(str(exc)) from None
    payload = {"metric": cfg.entry.name, "point": [float(x) for x in cfg.point], "T": T_name,
               "Q": list(alpha), **qd.to_json()}
    if qd.note == "zero tensor":
        payload["status"] = "skipped"
        text = f"⟨{T_name}|k|{alpha}⟩: zero tensor, skipped"
    else:
        qc = bracket_monomial(T, ctx.f, alpha, cfg.tol_abs, cfg.tol_rel)
        payload["closed_form"] = [float(x) for x in qc.components]
        payload["status"] = "ok"
        text = f"⟨{T_name}|k|{alpha}⟩ = {np.round(qd.components, 12).tolist()} in the π(m_i) basis"
    _emit(cfg.json, payload, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.tol_abs <= 0 or args.tol_rel <= 0:
        raise UsageError("tolerances must be positive")
    suites = None if args.suite == "all" else [args.suite]
    if suites:
        try:
            registry.get_suite(args.suite)
        except registry.UnknownSuite as exc:
            raise UsageError(exc.args[0]) from None
    if args.points is not None and args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.metric is None:
        if args.k is not None or args.point is not None:
            raise UsageError("--k and --point need --metric")
        entries = None
        points = None
    else:
        entry = load_entry(args)
        entries = [entry]
        points = None if args.point is None else [parse_point(args.point, entry.metric.coords)]
    results = registry.run_all(entries, suites, points, args.seed, args.points or registry.DEFAULT_POINTS,
                               args.tol_abs, args.tol_rel)
    if args.json:
        print(dumps(results))
    else:
        for r in results:
            line = f"{r.suite:20s} {r.metric:16s} {r.status}"
            if r.note:
                line += f"  ({r.note})"
            if r.error:
                line += f"  error: {r.error}"
            print(line)
            for c in r.checks:
                if c.status in ("fail", "error"):
                    res = "n/a" if c.residual is None else f"{c.residual:.3e}"
                    print(f"    FAIL {c.anchor} at point {c.point}: residual {res} > {c.tol:.1e} {c.detail}")
    failed = any(r.status in ("fail", "error") for r in results)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_diagnose(cfg: RunConfig, N: int) -> int:
    d = run_diagnose(cfg.entry, cfg.point, N=N, tol_abs=cfg.tol_abs, tol_rel=cfg.tol_rel)
    _emit(cfg.json, d.to_json(), d.summary())
    return EXIT_OK if d.consistent else EXIT_FAIL


def cmd_catalog(args) -> int:
    if args.action == "list":
        payload = [{"name": n, "dim": catalog.get(n).dim, "description": catalog.get(n).description}
                   for n in catalog.names()]
        text = "\n".join(f"{p['name']:16s} dim {p['dim']}  {p['description']}" for p in payload)
        _emit(args.json, payload, text)
        return EXIT_OK
    if not args.name:
        raise UsageError("catalog show needs an entry name")
    try:
        e = catalog.get(args.name)
    except catalog.UnknownEntry as exc:
        raise UsageError(exc.args[0]) from None
    if args.json:
        _emit(True, e.to_json(), "")
    else:
        lines = [f"# {e.name}: {e.description}", e.to_text().rstrip(),
                 f"# k = ({', '.join(e.k_text)})"]
        lines += [f"# {k}: {v} [{prov}]" for k, (v, prov) in sorted(e.reference.items())]
        print("\n".join(lines))
    return EXIT_OK


# --- argument parser -------------------------------------------------------------------

def suites_help() -> str:
    lines = ["suites (run in this order by --suite all):"]
    for s in registry.SUITES:
        lines.append(f"  {s.name}: {s.description}")
        lines.append("    anchors: " + ", ".join(s.anchors))
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--metric", help="catalog entry name or metric file path")
    common.add_argument("--point", help="point as name=value pairs, e.g. t=0,r=3 (values decimal or p/q)")
    common.add_argument("--k", help="null field components as expressions, comma separated (k^a by default)")
    common.add_argument("--k-lower", action="store_true", help="read --k as the covector k_a")
    common.add_argument("--catalog-k", action="store_true", help="use the catalog entry's null field")
    common.add_argument("--tol-abs", type=float, default=TOL_ABS, help="absolute zero threshold")
    common.add_argument("--tol-rel", type=float, default=TOL_REL, help="relative zero threshold")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled points and frames")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="nullalign", description="Null alignment, bilinear brackets and Kundt checks.",
                                epilog=suites_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="boost order of Rm, Ric, S, C and ∇^m Rm along k")
    sub.add_parser("congruence", parents=[common], help="optical matrices and Kundt / Robinson-Trautman flags")
    b = sub.add_parser("bracket", parents=[common], help="⟨T|k|Q⟩ for a curvature tensor and a frame monomial")
    b.add_argument("--T", required=True, help="tensor: " + ", ".join(TENSOR_NAMES + ("∇S", "∇C")))
    b.add_argument("--Q", required=True, help="frame labels of the monomial, e.g. 0,2 (0=k, 1=l, 2..=m_i)")
    v = sub.add_parser("verify", parents=[common], help="run verification suites",
                       epilog=suites_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    v.add_argument("--suite", default="all", help="suite name or 'all'")
    v.add_argument("--points", type=int, default=None, help=f"sampled points per metric (default {registry.DEFAULT_POINTS})")
    d = sub.add_parser("diagnose", parents=[common], help="which theorem applies, its prediction and the measured flags")
    d.add_argument("--N", type=int, default=3, choices=(1, 2, 3), help="derivative order for K_N")
    c = sub.add_parser("catalog", help="list or show built-in metrics")
    c.add_argument("action", choices=("list", "show"))
    c.add_argument("name", nargs="?")
    c.add_argument("--json", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    coords = None
    try:
        if args.command == "catalog":
            return cmd_catalog(args)
        if args.command == "verify":
            return cmd_verify(args)
        cfg = make_config(args, need_point=True)
        coords = cfg.entry.metric.coords
        if args.command == "classify":
            return cmd_classify(cfg)
        if args.command == "congruence":
            return cmd_congruence(cfg)
        if args.command == "bracket":
            return cmd_bracket(cfg, args.T, args.Q)
        if args.command == "diagnose":
            return cmd_diagnose(cfg, args.N)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc.describe(coords)}", file=sys.stderr)
        return EXIT_DOMAIN
    except (DomainFailure, FrameError, TensorError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ExprError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
