"""Geodesic / Kundt propositions for k, rank-2 symmetric and Weyl-like tensors of type III or N.

Each displayed relation is returned as a pair (lhs, rhs): ``lhs`` holds the
frame components of a covariant derivative that the hypotheses force to zero,
``rhs`` is the same quantity rewritten through κ, ρ and the leading
components of the tensor.  Arrays are indexed by the free spatial labels in
the order they appear in the relation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..congruence import FLAG_TOL
from .context import PointContext
from .records import FAILS, HOLDS, SuiteResult, combine, judge

EQ_TOL = 1e-8


# --- relation sides -------------------------------------------------------------

def k_geodesic(ctx: PointContext):
    sp = ctx.sp
    return ctx.comps("k", 1)[0, sp], ctx.kappa


def k_rho_square(ctx: PointContext):
    sp = ctx.sp
    rho = ctx.rho
    lhs = ctx.comps("k", 2)[sp, sp, 0]  # [j, i] = ∇_j ∇_i k_0
    return lhs, -np.einsum("lj,li->ji", rho, rho)


def _v(ctx):
    return ctx.comps("S")[1, ctx.sp]


def ric3_kappa_spatial(ctx: PointContext):
    sp, kap, v = ctx.sp, ctx.kappa, _v(ctx)
    return ctx.comps("S", 1)[0, sp, sp], np.outer(kap, v) + np.outer(v, kap)


def ric3_kappa_boost(ctx: PointContext):
    return np.array(ctx.comps("S", 1)[0, 0, 1]), np.array(-ctx.kappa @ _v(ctx))


def ric3_rho(ctx: PointContext):
    sp, rho, v = ctx.sp, ctx.rho, _v(ctx)
    lhs = np.transpose(ctx.comps("S", 2)[sp, sp, sp, 0], (2, 1, 0))  # [i, j, k] = ∇_k ∇_j S_i0
    rhs = -(np.einsum("lj,ik,l->ijk", rho, rho, v) + np.einsum("lk,ij,l->ijk", rho, rho, v))
    rhs -= np.einsum("lk,lj,i->ijk", rho, rho, v)
    return lhs, rhs


def ricn_kappa(ctx: PointContext):
    sp, kap = ctx.sp, ctx.kappa
    s11 = ctx.comps("S")[1, 1]
    return ctx.comps("S", 2)[0, 0, sp, sp], 2 * np.outer(kap, kap) * s11


def ricn_rho(ctx: PointContext):
    sp, rho = ctx.sp, ctx.rho
    s11 = ctx.comps("S")[1, 1]
    lhs = np.transpose(ctx.comps("S", 3)[sp, sp, sp, sp, 0], (3, 2, 1, 0))  # [i, j, k, l] = ∇_l∇_k∇_j S_i0
    rhs = (np.einsum("il,mk,mj->ijkl", rho, rho, rho) + np.einsum("ml,ik,mj->ijkl", rho, rho, rho)
           + np.einsum("ml,mk,ij->ijkl", rho, rho, rho))
    return lhs, -rhs * s11


def _psi3(ctx):
    sp = ctx.sp
    C = ctx.comps("C")
    return C[1, sp, sp, sp], C[1, 0, 1, sp]


def weyl3_kappa_spatial(ctx: PointContext):
    sp, kap = ctx.sp, ctx.kappa
    P3, _ = _psi3(ctx)
    rhs = (np.einsum("i,jkl->ijkl", kap, P3) - np.einsum("j,ikl->ijkl", kap, P3)
           + np.einsum("k,lij->ijkl", kap, P3) - np.einsum("l,kij->ijkl", kap, P3))
    return ctx.comps("C", 1)[0, sp, sp, sp, sp], rhs


def weyl3_kappa_01ij(ctx: PointContext):
    sp, kap = ctx.sp, ctx.kappa
    P3, P1 = _psi3(ctx)
    rhs = np.einsum("m,mij->ij", kap, P3) - np.outer(kap, P1) + np.outer(P1, kap)
    return ctx.comps("C", 1)[0, 0, 1, sp, sp], rhs


def weyl3_kappa_0i1j(ctx: PointContext):
    sp, kap = ctx.sp, ctx.kappa
    P3, P1 = _psi3(ctx)
    rhs = -np.einsum("m,jmi->ij", kap, P3) - np.outer(kap, P1)
    return ctx.comps("C", 1)[0, 0, sp, 1, sp], rhs


def weyl3_rho_a(ctx: PointContext):
    sp, r = ctx.sp, ctx.rho
    P3, P1 = _psi3(ctx)
    lhs = np.transpose(ctx.comps("C", 2)[sp, sp, sp, sp, sp, 0], (2, 3, 4, 1, 0))  # [i,j,k,l,m] = ∇_m∇_l W_ijk0
    e = np.einsum
    rhs = (e("ql,jm,ikq->ijklm", r, r, P3) + e("qm,jl,ikq->ijklm", r, r, P3)
           - e("ql,im,jkq->ijklm", r, r, P3) - e("qm,il,jkq->ijklm", r, r, P3)
           - e("ql,km,qij->ijklm", r, r, P3) - e("qm,kl,qij->ijklm", r, r, P3)
           + e("ql,qm,kij->ijklm", r, r, P3)
           + e("kl,im,j->ijklm", r, r, P1) + e("km,il,j->ijklm", r, r, P1)
           - e("kl,jm,i->ijklm", r, r, P1) - e("km,jl,i->ijklm", r, r, P1))
    return lhs, rhs


def weyl3_rho_b(ctx: PointContext):
    sp, r = ctx.sp, ctx.rho
    P3, P1 = _psi3(ctx)
    lhs = np.transpose(ctx.comps("C", 2)[sp, sp, sp, 0, 1, 0], (2, 1, 0))  # [i,l,m] = ∇_m∇_l W_i010
    e = np.einsum
    rhs = (e("ql,rm,qir->ilm", r, r, P3) + e("qm,rl,qir->ilm", r, r, P3)
           - 2 * (e("ql,im,q->ilm", r, r, P1) + e("qm,il,q->ilm", r, r, P1))
           + e("ql,qm,i->ilm", r, r, P1))
    return lhs, rhs


def _psi2(ctx):
    sp = ctx.sp
    return ctx.comps("C")[1, sp, 1, sp]


def weyln_kappa(ctx: PointContext):
    kap = ctx.kappa
    P = _psi2(ctx)
    sp = ctx.sp
    rhs = 2 * np.outer(kap, kap @ P) - (kap @ kap) * P
    return ctx.comps("C", 2)[0, 0, 0, sp, 1, sp], rhs


def _weyln_rho_pairs(ctx):
    """Per fixed spatial label l*: the two relations and the vanishing components behind them."""
    sp = ctx.sp
    P = _psi2(ctx)
    D3 = ctx.comps("C", 3)
    out = []
    for s in range(ctx.n - 2):
        r = ctx.rho[:, s]
        rr = r @ r
        a_l = rr * (np.einsum("i,jk->ijk", r, P) - np.einsum("j,ik->ijk", r, P))
        a_r = 2 * (np.einsum("k,i,jq,q->ijk", r, r, P, r) - np.einsum("k,j,iq,q->ijk", r, r, P, r))
        b_l = rr * (P @ r)
        b_r = 2 * r * (r @ P @ r)
        t = s + 2
        vanish = np.concatenate([D3[t, t, t, sp, sp, sp, 0].ravel(), D3[t, t, t, sp, 0, 1, 0].ravel()])
        out.append((a_l, a_r, b_l, b_r, vanish))
    return out


def weyln_rho_a(ctx: PointContext):
    pairs = _weyln_rho_pairs(ctx)
    lhs = np.stack([p[0] for p in pairs])
    rhs = np.stack([p[1] for p in pairs])
    return lhs, rhs


def weyln_rho_b(ctx: PointContext):
    pairs = _weyln_rho_pairs(ctx)
    return np.stack([p[2] for p in pairs]), np.stack([p[3] for p in pairs])


def weyln_rho_vanishing(ctx: PointContext):
    v = np.concatenate([p[4] for p in _weyln_rho_pairs(ctx)])
    return v, np.zeros_like(v)


# --- proposition table -------------------------------------------------------------

@dataclass(frozen=True)
class Relation:
    anchor: str
    sides: object
    kind: str  # "vanishing": 0 = lhs = rhs ; "equality": lhs = rhs as displayed
    degree: int  # polynomial degree in κ, ρ (for the residual scale)


@dataclass(frozen=True)
class Proposition:
    name: str
    field: str  # "k", "S" or "C"
    genuine_bo: int | None
    geodesic_m: tuple  # ∇-orders required to be special for the geodesic conclusion
    kundt_m: tuple  # additional ∇-orders for the Kundt conclusion
    geodesic: tuple
    kundt: tuple
    description: str


PROPOSITIONS = {
    "k-III": Proposition(
        "k-III", "k", None, (1,), (2,),
        (Relation("k-III/kappa-component", k_geodesic, "vanishing", 1),),
        (Relation("k-III/rho-square", k_rho_square, "vanishing", 2),),
        "bo(∇k) <= 0 gives geodesic k; bo(∇∇k) <= 0 in addition gives Kundt",
    ),
    "Ric-III": Proposition(
        "Ric-III", "S", -1, (1,), (2,),
        (Relation("Ric-III/kappa-spatial", ric3_kappa_spatial, "vanishing", 1),
         Relation("Ric-III/kappa-boost", ric3_kappa_boost, "vanishing", 1)),
        (Relation("Ric-III/rho-quadratic", ric3_rho, "vanishing", 2),),
        "symmetric S with bo(S) = -1: bo(∇S) <= 0 gives geodesic, bo(∇∇S) <= 0 gives Kundt",
    ),
    "Ric-N": Proposition(
        "Ric-N", "S", -2, (1, 2), (3,),
        (Relation("Ric-N/kappa-quadratic", ricn_kappa, "vanishing", 2),),
        (Relation("Ric-N/rho-cubic", ricn_rho, "vanishing", 3),),
        "symmetric S with bo(S) = -2: bo(∇∇S) <= 0 gives geodesic, bo(∇∇∇S) <= 0 gives Kundt",
    ),
    "Weyl-III": Proposition(
        "Weyl-III", "C", -1, (1,), (2,),
        (Relation("Weyl-III/kappa-ijkl", weyl3_kappa_spatial, "vanishing", 1),
         Relation("Weyl-III/kappa-01ij", weyl3_kappa_01ij, "vanishing", 1),
         Relation("Weyl-III/kappa-0i1j", weyl3_kappa_0i1j, "vanishing", 1)),
        (Relation("Weyl-III/rho-ijk0", weyl3_rho_a, "vanishing", 2),
         Relation("Weyl-III/rho-i010", weyl3_rho_b, "vanishing", 2)),
        "double 2-form with bo(W) = -1: bo(∇W) <= 0 gives geodesic, bo(∇∇W) <= 0 gives Kundt",
    ),
    "Weyl-N": Proposition(
        "Weyl-N", "C", -2, (1, 2), (3,),
        (Relation("Weyl-N/kappa-quadratic", weyln_kappa, "vanishing", 2),),
        (Relation("Weyl-N/rho-a", weyln_rho_a, "equality", 3),
         Relation("Weyl-N/rho-b", weyln_rho_b, "equality", 3),
         Relation("Weyl-N/rho-vanishing", weyln_rho_vanishing, "vanishing", 0)),
        "double 2-form with bo(W) = -2: bo(∇∇W) <= 0 gives geodesic, bo(∇∇∇W) <= 0 gives Kundt",
    ),
}


def relation_residual(ctx: PointContext, rel: Relation, prop: Proposition) -> tuple:
    """(residual, identity residual) scaled by the tensor norm and the optical scalars."""
    lhs, rhs = (np.asarray(x, dtype=float) for x in rel.sides(ctx))
    base = ctx.norm(prop.field, 1 if prop.field == "k" else 0)
    opt = 1.0 + float(np.abs(ctx.rho).max(initial=0.0)) + float(np.abs(ctx.kappa).max(initial=0.0))
    scale = 1.0 + base * opt ** max(rel.degree - (1 if prop.field == "k" else 0), 0)
    ident = float(np.abs(lhs - rhs).max(initial=0.0)) / scale
    if rel.kind == "vanishing":
        res = max(ident, float(np.abs(lhs).max(initial=0.0)) / scale, float(np.abs(rhs).max(initial=0.0)) / scale)
    else:
        res = ident
    return res, ident


def _hyp(ctx, prop: Proposition, orders) -> str:
    return combine(*(ctx.at_most(prop.field, m, 0) for m in orders))


def run_proposition(name: str, entry, points, seed: int = 0, tol_abs=None, tol_rel=None,
                    eq_tol: float = EQ_TOL, flag_tol: float = FLAG_TOL) -> SuiteResult:
    prop = PROPOSITIONS[name]
    kw = {}
    if tol_abs is not None:
        kw["tol_abs"] = tol_abs
    if tol_rel is not None:
        kw["tol_rel"] = tol_rel
    result = SuiteResult(f"prop:{name}", entry.name, seed, [list(p) for p in points])
    applicable = False
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        if prop.genuine_bo is None:
            base = HOLDS
        else:
            base = ctx.equals(prop.field, 0, prop.genuine_bo)
        if base != FAILS:
            applicable = True
        h1 = combine(base, _hyp(ctx, prop, prop.geodesic_m))
        h2 = combine(h1, _hyp(ctx, prop, prop.kundt_m))
        for rel in prop.geodesic:
            res, ident = relation_residual(ctx, rel, prop)
            result.checks.append(judge(rel.anchor, idx, h1, res, eq_tol, f"identity residual {ident:.3e}"))
        kn = float(np.abs(ctx.kappa).max(initial=0.0))
        result.checks.append(judge(f"{name}/geodesic", idx, h1, kn, flag_tol, "max |kappa_i|"))
        for rel in prop.kundt:
            res, ident = relation_residual(ctx, rel, prop)
            result.checks.append(judge(rel.anchor, idx, h2, res, eq_tol, f"identity residual {ident:.3e}"))
        rn = float(np.abs(ctx.rho).max(initial=0.0))
        result.checks.append(judge(f"{name}/kundt", idx, h2, rn, flag_tol, "max |rho_ij|"))
    if not applicable:
        result.note = "not applicable on this metric"
    return result


def relation_anchors() -> list:
    out = []
    for prop in PROPOSITIONS.values():
        out += [r.anchor for r in prop.geodesic + prop.kundt]
        out += [f"{prop.name}/geodesic", f"{prop.name}/kundt"]
    return out
