"""Which Kundt-type theorem applies at a point, what it predicts, and what is measured."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..alignment import boost_order_components, s_eigenstructure
from ..bilinear import k_subspace
from ..congruence import FLAG_TOL, classify_congruence, kappa_rho
from .conformal import tachyonic_field, u_structure, uniform_type_d, STRUCT_TOL
from .context import PointContext
from .records import FAILS, HOLDS, MARGINAL, combine

KUNDT = "Kundt"
WARPED = "warped product"
NONE = "no prediction"


@dataclass
class Route:
    name: str
    hypotheses: dict  # label -> holds/fails/marginal
    prediction: str

    @property
    def applies(self) -> bool:
        return all(v == HOLDS for v in self.hypotheses.values())

    def to_json(self) -> dict:
        return {"route": self.name, "hypotheses": dict(self.hypotheses), "applies": self.applies,
                "prediction": self.prediction}


@dataclass
class Diagnosis:
    metric: str
    point: list
    N: int
    measurements: dict
    routes: list
    route: str | None
    prediction: str
    measured: dict
    verdict: str
    notes: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return not self.verdict.startswith("RED ALERT")

    def to_json(self) -> dict:
        return {
            "metric": self.metric,
            "point": [float(x) for x in self.point],
            "N": self.N,
            "measurements": self.measurements,
            "routes": [r.to_json() for r in self.routes],
            "route": self.route,
            "prediction": self.prediction,
            "measured": self.measured,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }

    def summary(self) -> str:
        lines = [f"metric {self.metric} at {np.round(self.point, 6).tolist()}"]
        m = self.measurements
        lines.append("  bo(∇^m Rm): " + ", ".join(f"m={i}: {b}" for i, b in enumerate(m["bo_nabla_Rm"])))
        for key in ("C_zero", "S_zero", "bo_S", "dim_E_lambda", "bo_nabla_S", "d_N", "uniform_type_d", "warped_structure"):
            lines.append(f"  {key}: {m.get(key)}")
        for r in self.routes:
            hyp = ", ".join(f"{k} {v}" for k, v in r.hypotheses.items())
            lines.append(f"  route {r.name}: {'applies' if r.applies else 'does not apply'} ({hyp})")
        lines.append(f"  chosen route: {self.route or 'none'}; prediction: {self.prediction}")
        lines.append(f"  measured: {self.measured['label']}")
        lines.append(f"  verdict: {self.verdict}")
        return "\n".join(lines)


def _st(flag) -> str:
    return HOLDS if flag else FAILS


def _bo(F, ctx) -> int | None:
    return boost_order_components(F, ctx.tol_abs, ctx.tol_rel).bo


def diagnose(entry, point, N: int = 3, tol_abs=None, tol_rel=None) -> Diagnosis:
    kw = {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}
    ctx = PointContext(entry, point, **kw)
    n = ctx.n
    notes = []
    bo_rm = [_bo(ctx.comps("Rm", m), ctx) for m in range(N + 1)]
    special = [ctx.at_most("Rm", m, 0) for m in range(N + 1)]
    all_special = combine(*special) if special else HOLDS
    c_zero = ctx.norm("C") <= ctx.tol_abs + ctx.tol_rel * max(1.0, ctx.norm("Rm")) if n >= 4 else True
    s_zero = ctx.norm("S") <= ctx.tol_abs + ctx.tol_rel * max(1.0, ctx.norm("Rm"))
    bo_s = _bo(ctx.comps("S"), ctx)
    bo_ds = _bo(ctx.comps("S", 1), ctx)
    eig = s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at, ctx.f, ctx.tol_abs, ctx.tol_rel)
    ks = k_subspace(ctx.pc, ctx.f, N, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel)
    d_N = ks.d
    utd = None
    warped = None
    if n == 4 and not s_zero:
        utd = bool(uniform_type_d([ctx.pc.jet("S").value, ctx.pc.jet("S", 1).value], ctx.f).holds)
        try:
            us = u_structure(ctx.pc, tachyonic_field(ctx.pc))
            warped = bool(c_zero and us.form_residual <= 1e-8 and us.case == 3 and us.structure_residual <= STRUCT_TOL)
        except ValueError:
            warped = False
    rep = kappa_rho(ctx.pc, ctx.k_jet, ctx.f)
    measurements = {
        "dim": n,
        "bo_nabla_Rm": ["zero" if b is None else b for b in bo_rm],
        "nabla_Rm_special": special,
        "C_zero": bool(c_zero),
        "S_zero": bool(s_zero),
        "bo_S": "zero" if bo_s is None else bo_s,
        "dim_E_lambda": eig.dim_E_lambda,
        "generic_type_ii": bool(eig.generic_type_ii),
        "bo_nabla_S": "zero" if bo_ds is None else bo_ds,
        "d_N": d_N,
        "d_N_lower_bound": True,
        "uniform_type_d": utd,
        "warped_structure": warped,
    }

    def eq(name, m, b):
        return ctx.equals(name, m, b) if ctx.norm(name, m) > ctx.tol_abs else FAILS

    d3 = d_N if N == 3 else k_subspace(ctx.pc, ctx.f, 3, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel).d
    special3 = combine(*(ctx.at_most("Rm", m, 0) for m in range(4)))
    routes = []
    # most specific curvature routes first; ∇k type III route (a statement about k itself) last
    routes.append(Route("Ricci type III route", {"bo(S) = -1": eq("S", 0, -1), "bo(∇S) <= 0": ctx.at_most("S", 1, 0),
                                         "bo(∇∇S) <= 0": ctx.at_most("S", 2, 0)}, KUNDT))
    routes.append(Route("Ricci type N route", {"bo(S) = -2": eq("S", 0, -2), "bo(∇∇S) <= 0": ctx.at_most("S", 2, 0),
                                       "bo(∇∇∇S) <= 0": ctx.at_most("S", 3, 0)}, KUNDT))
    if n >= 4:
        routes.append(Route("Weyl type III route", {"bo(C) = -1": eq("C", 0, -1), "bo(∇C) <= 0": ctx.at_most("C", 1, 0),
                                              "bo(∇∇C) <= 0": ctx.at_most("C", 2, 0)}, KUNDT))
        routes.append(Route("Weyl type N route", {"bo(C) = -2": eq("C", 0, -2), "bo(∇∇C) <= 0": ctx.at_most("C", 2, 0),
                                            "bo(∇∇∇C) <= 0": ctx.at_most("C", 3, 0)}, KUNDT))
    routes.append(Route("generic type II Ricci route", {"dim E_lambda = 2": _st(eig.dim_E_lambda == 2 and bo_s == 0),
                                              "bo(∇S) <= 0": ctx.at_most("S", 1, 0)}, KUNDT))
    if n == 4:
        routes.append(Route("Weyl type II/D route", {"bo(C) = 0": eq("C", 0, 0), "bo(∇C) <= 0": ctx.at_most("C", 1, 0)}, KUNDT))
    routes.append(Route("top-dimension route", {f"∇^m Rm special, m <= {N}": all_special, f"d_{N} = n-2": _st(d_N == n - 2)}, KUNDT))
    if n == 4:
        gamma = (not c_zero) or (utd is False) or d3 == 2
        routes.append(Route("special derivatives route (Kundt branch)",
                            {"∇^m Rm special, m <= 3": special3, "point in Gamma": _st(gamma)}, KUNDT))
        routes.append(Route("conformally flat tachyonic route (type D branch)",
                            {"∇^m Rm special, m <= 3": special3, "C = 0": _st(c_zero), "S != 0": _st(not s_zero),
                             "{S, ∇S} uniformly type D": _st(bool(utd)), "d_3 = 1": _st(d3 == 1)}, WARPED))
    if n == 3:
        routes.append(Route("three-dimensional route", {"∇^m S special, m <= 3": combine(*(ctx.at_most("S", m, 0) for m in range(4))),
                                                "S != 0": _st(not s_zero)}, KUNDT))
    routes.append(Route("∇k type III route", {"bo(∇k) <= 0": ctx.at_most("k", 1, 0), "bo(∇∇k) <= 0": ctx.at_most("k", 2, 0)}, KUNDT))
    chosen = next((r for r in routes if r.applies), None)
    label = classify_congruence(rep)
    measured = {"label": label, "flags": dict(sorted(rep.flags.items())),
                "kappa_max": float(np.abs(rep.kappa).max()), "rho_max": float(np.abs(rep.rho).max()) if rep.rho.size else 0.0}
    if chosen is None:
        prediction = NONE
        verdict = f"no prediction; measured: {label}"
    elif chosen.prediction == KUNDT:
        prediction = KUNDT
        ok = rep.flags["kundt"]
        verdict = (f"consistent: {chosen.name} predicts Kundt; measured: {label}" if ok else
                   f"RED ALERT: {chosen.name} predicts Kundt but measured {label}")
    else:
        prediction = WARPED
        verdict = (f"consistent: {chosen.name} predicts a warped product; the metric is a warped product" if warped else
                   f"RED ALERT: {chosen.name} predicts a warped product but u is not geodesic and umbilic")
    if MARGINAL in [v for r in routes for v in r.hypotheses.values()]:
        notes.append("some hypotheses are marginal (within 10x of the threshold)")
    return Diagnosis(entry.name, list(ctx.point), N, measurements, routes, chosen.name if chosen else None,
                     prediction, measured, verdict, notes)
