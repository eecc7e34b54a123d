"""Point-wise suites: the Kundt tensor, bracket properties, K_N and the Weyl Kundt criterion."""

from __future__ import annotations

import itertools

import numpy as np

from ..alignment import boost_order_components, boost_weight, s_eigenstructure, weight_array
from ..bilinear import bracket, image_array, k_subspace, monomial_tensor
from ..congruence import FLAG_TOL, kappa_rho, kundt_tensor_residual
from ..frames import frame_components, null_rotation
from ..tensor_core import DOWN, TensorValue
from .context import PointContext
from .records import FAILS, HOLDS, MARGINAL, SuiteResult, combine, judge

BRACKET_TOL = 1e-10
SUBSPACE_TOL = 1e-9
CHAR_TOL = 1e-8
NEARBY = 2
NEARBY_STEP = 1e-4


def _kw(tol_abs, tol_rel):
    return {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}


def _finish(result):
    if all(c.status.startswith("skipped") for c in result.checks):
        result.note = "not applicable on this metric"
    return result


# --- congruence ----------------------------------------------------------------------

def suite_congruence(entry, points, seed: int = 0, tol_abs=None, tol_rel=None, tol: float = FLAG_TOL) -> SuiteResult:
    """k_[a ∇_b] k_[c k_d] vanishes exactly when the optical matrices say Kundt."""
    result = SuiteResult("congruence", entry.name, seed, [list(p) for p in points])
    labels = []
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **_kw(tol_abs, tol_rel))
        rep = kappa_rho(ctx.pc, ctx.k_jet, ctx.f, tol)
        X = kundt_tensor_residual(ctx.pc, ctx.k_jet).components
        k = ctx.pc.g.value @ ctx.k_jet.value
        scale = float(np.abs(k).max()) ** 3 * (1.0 + float(np.abs(ctx.k_nabla(1).value).max()))
        size = float(np.abs(X).max()) / max(scale, 1e-300)
        labels.append(rep.flags)
        kundt = rep.flags["kundt"]
        hyp = MARGINAL if rep.marginal else HOLDS
        agree = kundt == (size <= tol)
        result.checks.append(judge("congruence/kundt-tensor", idx, hyp, size if kundt else float(not agree),
                                   tol if kundt else 0.0,
                                   f"Kundt flag {kundt}, relative Kundt tensor {size:.2e}"))
    result.extra["kundt"] = [bool(fl["kundt"]) for fl in labels]
    return result


# --- bracket properties on curvature tensors -------------------------------------------

BRACKET_TENSORS = (("S", 0), ("C", 0), ("Rm", 0), ("Rm", 1))


def _pick(rng, items, count):
    if len(items) <= count:
        return list(items)
    idx = sorted(rng.choice(len(items), size=count, replace=False))
    return [items[i] for i in idx]


def suite_brackets(entry, points, seed: int = 0, tol_abs=None, tol_rel=None, tol: float = BRACKET_TOL,
                   samples: int = 6) -> SuiteResult:
    """Zero property and l-independence of ⟨T|k|Q⟩, from the definition via φ."""
    result = SuiteResult("brackets", entry.name, seed, [list(p) for p in points])
    rng = np.random.default_rng(seed)
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **_kw(tol_abs, tol_rel))
        f = ctx.f
        n = ctx.n
        z = rng.normal(size=n - 2)
        l_alt = null_rotation(f, z).l
        for name, m in BRACKET_TENSORS:
            if name == "C" and n < 4:
                continue
            F = ctx.comps(name, m)
            s = boost_order_components(F, ctx.tol_abs, ctx.tol_rel).bo
            label = name if m == 0 else f"∇{name}"
            if s is None:
                continue
            T = TensorValue(np.asarray(ctx.field(name, m).value), (DOWN,) * F.ndim)
            scale = 1.0 + float(np.abs(F).max())
            r = F.ndim
            words = list(itertools.product(range(n), repeat=r))
            high = [a for a in words if boost_weight(a) > s + 1]
            edge = [a for a in words if boost_weight(a) == s + 1]
            res = 0.0
            for a in _pick(rng, high, samples):
                res = max(res, float(np.abs(bracket(T, f, monomial_tensor(f, a), ctx.tol_abs, ctx.tol_rel).components).max()))
            if high:
                result.checks.append(judge("bracket/zero-property", idx, HOLDS, res / scale, tol,
                                           f"T = {label}, bo = {s}"))
            res = 0.0
            for a in _pick(rng, edge, samples):
                Q = monomial_tensor(f, a)
                w1 = bracket(T, f, Q, ctx.tol_abs, ctx.tol_rel).components
                w2 = bracket(T, f, Q, ctx.tol_abs, ctx.tol_rel, l_vector=l_alt).components
                res = max(res, float(np.abs(w1 - w2).max()))
            if edge:
                result.checks.append(judge("bracket/l-independence", idx, HOLDS, res / scale, tol,
                                           f"T = {label}, bo = {s}"))
    return _finish(result)


# --- K_N -------------------------------------------------------------------------------

def suite_k_subspace(entry, points, seed: int = 0, tol_abs=None, tol_rel=None, tol: float = SUBSPACE_TOL,
                     N: int = 3) -> SuiteResult:
    """map-S identity, Kundt property on K_N, top dimension and the generic type II route."""
    result = SuiteResult("k_subspace", entry.name, seed, [list(p) for p in points])
    rng = np.random.default_rng(seed)
    kw = _kw(tol_abs, tol_rel)
    dims = []
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        add = result.checks.append
        n = ctx.n
        special = combine(*(ctx.at_most("Rm", m, 0) for m in range(N + 1)))
        ks = k_subspace(ctx.pc, ctx.f, N, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel)
        dims.append(ks.d)
        Dk = ctx.comps("k", 1)  # [X, Y] = (∇_X k)_Y
        rows = [0] + list(range(2, n))
        A = Dk[np.ix_(rows, list(range(2, n)))]
        res = float(np.abs(A @ ks.basis.T).max()) if ks.d else 0.0
        add(judge("k-subspace/kundt-on-K", idx, special, res / (1.0 + float(np.abs(Dk).max())), tol,
                  f"d_{N} = {ks.d}"))
        optical = max(float(np.abs(ctx.kappa).max()), float(np.abs(ctx.rho).max()) if ctx.rho.size else 0.0)
        top = combine(special, HOLDS if ks.d == n - 2 else FAILS)
        add(judge("k-subspace/top-dimension", idx, top, optical, FLAG_TOL, f"d_{N} = {ks.d}, n - 2 = {n - 2}"))
        # map-S on the actual trace-free Ricci tensor
        S = ctx.comps("S")
        s_hyp = ctx.at_most("S", 0, 0) if ctx.norm("S") > ctx.tol_abs else FAILS
        IM = image_array(S, n)
        lam = S[0, 1]
        sp = slice(2, n)
        lhs = np.stack([IM[0, i] for i in range(2, n)])  # [i, j]
        res = float(np.abs(lhs - (lam * np.eye(n - 2) - S[sp, sp])).max()) / (1.0 + float(np.abs(S).max()))
        add(judge("k-subspace/map-S", idx, s_hyp, res, 1e-12))
        eig = s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at, ctx.f, ctx.tol_abs, ctx.tol_rel)
        gen = combine(HOLDS if (eig.dim_E_lambda == 2 and eig.generic_type_ii) else FAILS, ctx.at_most("S", 1, 0))
        d1 = k_subspace(ctx.pc, ctx.f, 1, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel).d
        add(judge("k-subspace/ricci-generic-d1", idx, gen, float(abs(d1 - (n - 2))), 0.0, f"d_1 = {d1}"))
        add(judge("k-subspace/ricci-generic-kundt", idx, gen, optical, FLAG_TOL))
        # lower semi-continuity, sampled: d at p is at most d at nearby points
        near = []
        for _ in range(NEARBY):
            q = np.asarray(p, dtype=float) + NEARBY_STEP * rng.normal(size=n)
            try:
                cq = PointContext(entry, q, **kw)
            except (ValueError, ArithmeticError):
                continue
            near.append(k_subspace(cq.pc, cq.f, N, tol_abs=cq.tol_abs, tol_rel=cq.tol_rel).d)
        if near:
            add(judge("k-subspace/semicontinuity", idx, HOLDS, float(max(0, ks.d - min(near))), 0.0,
                      f"sampled: d = {ks.d} here, nearby {near}"))
    result.extra["d_N"] = dims
    return _finish(result)


# --- Kundt criterion for a non-zero Weyl tensor -----------------------------------------

def suite_weyl_kundt_char(entry, points, seed: int = 0, tol_abs=None, tol_rel=None,
                          tol: float = CHAR_TOL) -> SuiteResult:
    """X^a(∇_a C)Q = 0 over c⊥ and Q of boost order -s-1 exactly when k is Kundt;
    a multiple α π(X)·⟨C|k|Q⟩ when k is Robinson–Trautman."""
    result = SuiteResult("weyl_kundt_char", entry.name, seed, [list(p) for p in points])
    if entry.dim != 4:
        result.note = "not applicable: the criterion is stated in dimension 4"
        return result
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **_kw(tol_abs, tol_rel))
        add = result.checks.append
        C = ctx.comps("C")
        s = boost_order_components(C, ctx.tol_abs, ctx.tol_rel).bo
        if s is None or s > 1:
            why = "C = 0" if s is None else f"bo(C) = {s} > 1"
            for a in ("weyl-kundt-char/kundt", "weyl-kundt-char/robinson-trautman", "weyl-kundt-char/iff"):
                add(judge(a, idx, FAILS, None, tol, why))
            continue
        hyp = ctx.equals("C", 0, s)
        DC = ctx.comps("C", 1)  # [X, alpha...]
        w = weight_array(4, 4)
        mask = w == s + 1  # Q = e_alpha with bo(Q) = -s-1
        rows = [0, 2, 3]
        L = DC[rows][:, mask]  # [X, q]
        IM = image_array(C, 4)[mask]  # [q, j]
        scale = 1.0 + float(np.abs(DC).max())
        size = float(np.abs(L).max()) / scale
        rep = kappa_rho(ctx.pc, ctx.k_jet, ctx.f)
        kundt = rep.flags["kundt"]
        add(judge("weyl-kundt-char/kundt", idx, combine(hyp, HOLDS if kundt else FAILS), size, tol, f"bo(C) = {s}"))
        # π(X) for X = k, m_2, m_3: rows of R give ⟨π(X), ·⟩ in the π(m) basis
        R = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        target = np.einsum("xj,qj->xq", R, IM)
        denom = float(np.sum(target * target))
        alpha = float(np.sum(target * L) / denom) if denom > 0 else 0.0
        rt = rep.flags["robinson_trautman"]
        add(judge("weyl-kundt-char/robinson-trautman", idx, combine(hyp, HOLDS if rt else FAILS),
                  float(np.abs(L - alpha * target).max()) / scale, tol, f"alpha = {alpha:.6g}"))
        agree = kundt == (size <= tol)
        add(judge("weyl-kundt-char/iff", idx, hyp, float(not agree), 0.0,
                  f"Kundt flag {kundt}, |X(∇C)Q| relative {size:.2e}"))
    return _finish(result)
