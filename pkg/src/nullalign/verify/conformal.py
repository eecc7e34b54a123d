"""Conformally flat metrics with trace-free Ricci of boost order zero.

Two suites live here.  ``suite_conformally_flat`` fixes the frame gauge
(m_2 spanning K_3, then S_12 = 0 by a null rotation about k) and checks the
chain of bracket identities for ∇S and ∇∇S, the relations tying them to ∇k,
and, when S has the form λ(uu - h/3), the warped-product structure of u.
``suite_type_d_structure`` recovers u from S and checks the structure of ∇u.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..alignment import weight_array
from ..bilinear import image_array, k_subspace
from ..frames import FrameError, NullFrame, frame_components, null_rotation, spin
from ..geometry import jets as J
from ..geometry.curvature import bianchi_cf_residual, cov_deriv_jet, plebanski
from ..tensor_core import DOWN, TensorValue
from ..congruence import FLAG_TOL
from .context import PointContext
from .records import FAILS, HOLDS, MARGINAL, SuiteResult, combine, judge

CF_TOL = 1e-8
STRUCT_TOL = 1e-9
TYPE_D_TOL = 1e-10


class GaugeError(ValueError):
    pass


# --- identity data ------------------------------------------------------------------
# A term is (coefficient, ((tensor, index), ...)); tensors: "S", "dS", "ddS", "dk"
# where dk[X, Y] = (∇_X k)_Y.  Frame labels: 0 = k, 1 = l, 2 = m_2, 3 = m_3.

@dataclass(frozen=True)
class BracketIdentity:
    anchor: str
    word: tuple | None  # Q as frame labels, or None for a relation without a bracket
    tensor: str  # "dS" or "ddS"
    expansion: tuple  # displayed combination of components
    final: tuple = ()  # displayed product form, when one is given


def _t(c, *factors):
    return (c, tuple(factors))


DS_IDENTITIES = (
    BracketIdentity("cf/dS:k-m3-m3", (0, 3, 3), "dS", (_t(-1, ("dS", (3, 3, 3))), _t(2, ("dS", (0, 1, 3))))),
    BracketIdentity("cf/dS:m3-k-m3", (3, 0, 3), "dS",
                    (_t(-1, ("dS", (3, 3, 3))), _t(1, ("dS", (1, 0, 3))), _t(1, ("dS", (3, 0, 1))))),
    BracketIdentity("cf/dS:l-k-k", (1, 0, 0), "dS", (_t(-2, ("dS", (1, 0, 3))),)),
    BracketIdentity("cf/dS:k-k-l", (0, 0, 1), "dS", (_t(-1, ("dS", (3, 0, 1))), _t(-1, ("dS", (0, 1, 3))))),
    BracketIdentity("cf/dS:k-m2-m3", (0, 2, 3), "dS", (_t(-1, ("dS", (3, 2, 3))), _t(1, ("dS", (0, 2, 1))))),
    BracketIdentity("cf/dS:m2-k-m3", (2, 0, 3), "dS", (_t(-1, ("dS", (2, 3, 3))), _t(1, ("dS", (2, 0, 1))))),
    BracketIdentity("cf/dS:m3-k-m2", (3, 0, 2), "dS", (_t(-1, ("dS", (3, 3, 2))), _t(1, ("dS", (1, 0, 2))))),
    BracketIdentity("cf/dS:k-m2-m2", (0, 2, 2), "dS", (_t(-1, ("dS", (3, 2, 2))),)),
    BracketIdentity("cf/dS:m2-m2-k", (2, 2, 0), "dS", (_t(-1, ("dS", (2, 2, 3))),)),
)


def _dds(*idx_coef):
    return tuple(_t(c, ("ddS", i)) for c, i in idx_coef)


DDS_IDENTITIES = (
    BracketIdentity("cf/ddS:m3-m3-k-m3", (3, 3, 0, 3), "ddS",
                    _dds((-1, (3, 3, 3, 3)), (1, (1, 3, 0, 3)), (1, (3, 1, 0, 3)), (1, (3, 3, 0, 1))),
                    (_t(-3, ("dS", (3, 1, 3)), ("dk", (3, 3))),)),
    BracketIdentity("cf/ddS:m2-m3-k-m3", (2, 3, 0, 3), "ddS",
                    _dds((-1, (2, 3, 3, 3)), (1, (2, 1, 0, 3)), (1, (2, 3, 0, 1))),
                    (_t(-3, ("dS", (3, 1, 3)), ("dk", (2, 3))),)),
    BracketIdentity("cf/ddS:k-derivative-m3", None, "ddS",
                    _dds((-1, (0, 3, 3, 3)), (1, (0, 3, 0, 1))),
                    (_t(-3, ("dS", (3, 1, 3)), ("dk", (0, 3))),)),
    BracketIdentity("cf/ddS:m3-m2-k-m3", (3, 2, 0, 3), "ddS",
                    _dds((-1, (3, 2, 3, 3)), (1, (1, 2, 0, 3)), (1, (3, 2, 0, 1))),
                    (_t(-3, ("dS", (2, 1, 3)), ("dk", (3, 3))),)),
    BracketIdentity("cf/ddS:m2-m2-k-m3", (2, 2, 0, 3), "ddS",
                    _dds((-1, (2, 2, 3, 3)), (1, (2, 2, 0, 1))),
                    (_t(-3, ("dS", (2, 1, 3)), ("dk", (2, 3))),)),
    BracketIdentity("cf/ddS:k-derivative-m2-33", None, "ddS",
                    _dds((-1, (0, 2, 3, 3)), (1, (0, 2, 0, 1))),
                    (_t(-1, ("dS", (2, 1, 3)), ("dk", (0, 3))),)),
    BracketIdentity("cf/ddS:m3-m2-k-m2", (3, 2, 0, 2), "ddS",
                    _dds((-1, (3, 2, 2, 3)), (1, (1, 2, 0, 2))),
                    (_t(-1, ("dS", (2, 1, 2)), ("dk", (3, 3))),)),
    BracketIdentity("cf/ddS:m2-m2-k-m2", (2, 2, 0, 2), "ddS",
                    _dds((-1, (2, 2, 2, 3)),),
                    (_t(-1, ("dS", (2, 1, 2)), ("dk", (2, 3))),)),
    BracketIdentity("cf/ddS:k-derivative-m2-23", None, "ddS",
                    _dds((1, (0, 2, 2, 3)),),
                    (_t(1, ("dS", (2, 1, 2)), ("dk", (0, 3))),)),
    BracketIdentity("cf/ddS:m3-k-m2-m2", (3, 0, 2, 2), "ddS",
                    _dds((-1, (3, 3, 2, 2)), (1, (1, 0, 2, 2))),
                    (_t(-1, ("dS", (1, 2, 2)), ("dk", (3, 3))),)),
    BracketIdentity("cf/ddS:m2-k-m2-m2", (2, 0, 2, 2), "ddS",
                    _dds((-1, (2, 3, 2, 2)),),
                    (_t(-1, ("dS", (1, 2, 2)), ("dk", (2, 3))),)),
    BracketIdentity("cf/ddS:k-derivative-22", None, "ddS",
                    _dds((1, (0, 3, 2, 2)),),
                    (_t(1, ("dS", (1, 2, 2)), ("dk", (0, 3))),)),
)


def evaluate_terms(terms, arrays: dict) -> float:
    total = 0.0
    for coef, factors in terms:
        v = float(coef)
        for name, idx in factors:
            v *= float(arrays[name][idx])
        total += v
    return total


# --- gauge ---------------------------------------------------------------------------

@dataclass
class Gauge:
    frame: NullFrame
    z: float
    d3: int
    s12_residual: float
    gap: float  # S_01 - S_22 before the rotation


def gauge_frame(ctx: PointContext, tol: float = 1e-9) -> Gauge:
    """Frame with π(m_2) spanning K_3 and S_12 = 0."""
    ks = k_subspace(ctx.pc, ctx.f, 3, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel)
    if ks.d != 1:
        raise GaugeError(f"K_3 has dimension {ks.d}, the gauge needs exactly 1")
    b = ks.basis[0] / np.linalg.norm(ks.basis[0])
    R = np.array([[b[0], b[1]], [-b[1], b[0]]])
    f = spin(ctx.f, R)
    F = frame_components(ctx.pc.jet("S").value, f)
    gap = float(F[0, 1] - F[2, 2])
    if abs(gap) <= tol * max(1.0, float(np.abs(F).max())):
        raise GaugeError("gauge fix degenerate: S_01 = S_22")
    z = float(F[1, 2] / gap)
    f = null_rotation(f, np.array([z, 0.0]))
    F2 = frame_components(ctx.pc.jet("S").value, f)
    return Gauge(f, z, ks.d, float(abs(F2[1, 2])), gap)


def _arrays(ctx: PointContext, f: NullFrame) -> dict:
    pc = ctx.pc
    return {
        "S": frame_components(pc.jet("S").value, f),
        "dS": frame_components(pc.jet("S", 1).value, f),
        "ddS": frame_components(pc.jet("S", 2).value, f),
        "dk": frame_components(ctx.k_nabla(1).value, f),
        "Rm": frame_components(pc.jet("Rm").value, f),
    }


# --- uniform type D ------------------------------------------------------------------

@dataclass
class UniformTypeD:
    holds: bool
    residual: float  # largest negative-bw component (relative) after the search
    aligned_residual: float  # largest positive-bw component (relative) w.r.t. k
    z: np.ndarray
    frame: NullFrame


def _negative_parts(tensors, f: NullFrame) -> np.ndarray:
    out = []
    for T in tensors:
        F = frame_components(T, f)
        scale = max(1.0, float(np.abs(F).max()))
        w = weight_array(f.dim, F.ndim)
        out.append(F[w < 0].ravel() / scale)
    return np.concatenate(out) if out else np.zeros(0)


def uniform_type_d(tensors, f: NullFrame, tol: float = TYPE_D_TOL, starts: int = 6) -> UniformTypeD:
    """Search null rotations about k for a second null line along which every tensor is special.

    Deterministic multi-start least squares over z in R^{n-2}; exactness is
    not claimed away from the returned minimum.
    """
    tensors = [np.asarray(T, dtype=float) for T in tensors]
    pos = []
    for T in tensors:
        F = frame_components(T, f)
        w = weight_array(f.dim, F.ndim)
        pos.append(float(np.abs(F[w > 0]).max(initial=0.0)) / max(1.0, float(np.abs(F).max())))
    aligned = max(pos) if pos else 0.0
    d = f.dim - 2
    grid = [np.zeros(d)] + [np.roll(np.eye(d)[0], i) * a for a in (0.5, -0.5, 2.0) for i in range(d)]
    best = None
    for z0 in grid[:max(starts, 1)]:
        sol = least_squares(lambda z: _negative_parts(tensors, null_rotation(f, z)), z0, xtol=1e-15,
                            ftol=1e-15, gtol=1e-15, max_nfev=200)
        r = float(np.abs(_negative_parts(tensors, null_rotation(f, sol.x))).max(initial=0.0))
        if best is None or r < best[0] - 1e-15:
            best = (r, sol.x)
        if r <= tol * 1e-2:
            break
    r, z = best
    return UniformTypeD(bool(r <= tol and aligned <= tol), r, aligned, np.asarray(z), null_rotation(f, z))


# --- the unit field u of a tachyonic S -------------------------------------------------

@dataclass
class TachyonicField:
    u: object  # jet of u_a
    lam: object  # jet of λ
    theta: float | None = None


def tachyonic_field(pc, sign_ref=None) -> TachyonicField:
    """u_a and λ from S = λ(uu - h/3): λ = cbrt(9/8 tr S³), uu = (3S/λ + g)/4."""
    S = pc.jet("S")
    g = pc.g.truncate(S.order)
    gi = pc.ginv.truncate(S.order)
    mix = J.einsum("ab,bc->ac", gi, S)
    tr3 = J.einsum("ac,ca->", J.einsum("ab,bc->ac", mix, mix), mix)
    if abs(float(tr3.value)) <= 1e-12 * (1.0 + float(np.abs(S.value).max())) ** 3:
        raise ValueError("tr S³ vanishes")
    lam = J.cbrt(tr3 * (9.0 / 8.0))
    uu = (S * J.reciprocal(lam) * 3.0 + g) * 0.25
    c = int(np.argmax(np.diag(uu.value)))
    if uu.value[c, c] <= 0:
        raise ValueError("uu has no positive diagonal entry")
    u = uu[:, c] * J.power(uu[c, c], -0.5)
    if sign_ref is not None and float(np.asarray(sign_ref) @ pc.ginv.value @ u.value) < 0:
        u = u * -1.0
    return TachyonicField(u, lam)


def classify_udot(udot, ginv, tol: float) -> tuple:
    """Case 3 if u̇ = 0, case 1 if spacelike, case 2 if null and non-zero; also returns g(u̇, u̇)."""
    udot = np.asarray(udot, dtype=float)
    n2 = float(udot @ ginv @ udot)
    mag = float(np.abs(udot).max())
    if mag <= tol:
        return 3, n2
    if n2 > tol * (1.0 + mag) ** 2:
        return 1, n2
    if abs(n2) <= tol * (1.0 + mag) ** 2:
        return 2, n2
    raise ValueError("u̇ is timelike, which cannot happen for u̇ orthogonal to a spacelike unit u")


@dataclass
class UStructure:
    u: np.ndarray
    udot: np.ndarray
    theta: float
    lam: float
    unit_residual: float
    form_residual: float
    structure_residual: float
    lambda_residual: float
    ricci_residual: float
    case: int
    udot_norm2: float


def u_structure(pc, tf: TachyonicField, tol: float = STRUCT_TOL) -> UStructure:
    g = pc.g.value
    gi = pc.ginv.value
    u = tf.u.value
    uu_up = gi @ u
    Du_jet = cov_deriv_jet(tf.u, pc.gamma)  # [b, a] = ∇_b u_a
    Du = Du_jet.value
    udot = uu_up @ Du  # u^b ∇_b u_a
    h = g - np.outer(u, u)
    theta = float(np.einsum("ab,ba->", gi - np.outer(uu_up, uu_up), Du)) / 3.0
    lam = float(tf.lam.value)
    S = pc.jet("S").value
    scale = 1.0 + abs(lam)
    unit_res = abs(float(u @ uu_up) - 1.0)
    form_res = float(np.abs(S - lam * (np.outer(u, u) - h / 3.0)).max()) / scale
    struct = Du - np.outer(u, udot) - theta * h
    struct_res = float(np.abs(struct).max()) / (1.0 + float(np.abs(Du).max()))
    hmix = np.eye(len(u)) - np.outer(uu_up, u)  # [b, a] = h^b_a
    dlam = tf.lam.grad().value
    dR = pc.jet("R").grad().value
    hl = hmix.T @ dlam
    lam_res = max(float(np.abs(hl - lam * udot).max()), float(np.abs(lam * udot - 0.25 * (hmix.T @ dR)).max()))
    lam_res /= 1.0 + float(np.abs(dR).max())
    # Ricci identity for u with ∇u = θh: Ric(u, .) = h∇θ - 3θ²u - 3∇θ (only meaningful when u̇ = 0)
    dth = _theta_jet(pc, tf).grad().value
    ric_u = pc.jet("Ric").value @ uu_up
    ric_res = float(np.abs(ric_u - (hmix.T @ dth - 3 * theta**2 * u - 3 * dth)).max()) / (1.0 + float(np.abs(ric_u).max()))
    case, n2 = classify_udot(udot, gi, tol * (1.0 + float(np.abs(Du).max())))
    return UStructure(u, udot, theta, lam, unit_res, form_res, struct_res, lam_res, ric_res, case, n2)


# --- suites ----------------------------------------------------------------------------

def _preconditions(ctx: PointContext, max_m: int = 3) -> tuple:
    """(hypothesis status, detail) for the conformally flat theorem at this point."""
    notes = []
    if ctx.n != 4:
        return FAILS, "dimension is not 4"
    C = ctx.comps("C")
    Rm_norm = max(1.0, ctx.norm("Rm"))
    cz = float(np.abs(C).max())
    sts = []
    thr = ctx.tol_abs + ctx.tol_rel * Rm_norm
    sts.append(HOLDS if cz <= thr else (MARGINAL if cz <= 10 * thr else FAILS))
    if sts[-1] != HOLDS:
        notes.append(f"Weyl tensor {cz:.2e}")
    if ctx.norm("S") <= ctx.tol_abs:
        sts.append(FAILS)
        notes.append("S = 0")
    else:
        sts.append(ctx.equals("S", 0, 0))
        if sts[-1] != HOLDS:
            notes.append("bo(S) != 0")
    for m in range(max_m + 1):
        st = ctx.at_most("Rm", m, 0)
        sts.append(st)
        if st != HOLDS:
            notes.append(f"bo(∇^{m} Rm) > 0")
    return combine(*sts), "; ".join(notes)


def suite_conformally_flat(entry, points, seed: int = 0, tol: float = CF_TOL, tol_abs=None,
                           tol_rel=None) -> SuiteResult:
    result = SuiteResult("conformally_flat", entry.name, seed, [list(p) for p in points])
    if entry.dim != 4:
        result.note = "not applicable: the theorem is stated in dimension 4"
        return result
    kw = {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}
    branches = []
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        hyp, why = _preconditions(ctx)
        add = result.checks.append
        if hyp == FAILS:
            add(judge("cf/bianchi", idx, hyp, None, STRUCT_TOL, why))
            continue
        bres = bianchi_cf_residual(ctx.pc).components
        scale = 1.0 + ctx.norm("S", 1) + ctx.norm("R", 1)
        add(judge("cf/bianchi", idx, hyp, float(np.abs(bres).max()) / scale, STRUCT_TOL, why))
        try:
            gauge = gauge_frame(ctx)
        except GaugeError as exc:
            add(judge("cf/gauge", idx, FAILS, None, tol, str(exc)))
            continue
        A = _arrays(ctx, gauge.frame)
        sS = 1.0 + float(np.abs(A["S"]).max())
        add(judge("cf/gauge", idx, hyp, gauge.s12_residual / sS, tol, f"z = {gauge.z:.6g}, d3 = {gauge.d3}"))
        add(judge("cf/d3", idx, hyp, float(abs(gauge.d3 - 1)), 0.0, f"d3 lower bound = {gauge.d3}"))
        # bracket identities
        for ident in DS_IDENTITIES + DDS_IDENTITIES:
            T = A[ident.tensor]
            tsc = 1.0 + float(np.abs(T).max()) + sS * (1.0 + float(np.abs(A["dk"]).max())) * (1.0 + float(np.abs(A["dS"]).max()))
            middle = evaluate_terms(ident.expansion, A)
            res = abs(middle)
            detail = []
            if ident.word is not None:
                br = float(image_array(T, 4)[ident.word][1])
                res = max(res, abs(br - middle))
                detail.append(f"bracket {br:.3e}")
            if ident.final:
                fin = evaluate_terms(ident.final, A)
                res = max(res, abs(fin - middle))
                detail.append(f"product form {fin:.3e}")
            add(judge(ident.anchor, idx, hyp, res / tsc, tol, ", ".join(detail)))
        dS, S, dk = A["dS"], A["S"], A["dk"]
        sds = 1.0 + float(np.abs(dS).max())
        comb = max(abs(dS[3, 3, 3]), abs(dS[1, 0, 3]), abs(dS[0, 1, 3]), abs(dS[3, 0, 1]))
        add(judge("cf/dS-combined", idx, hyp, comb / sds, tol))
        rel = max(abs(dS[X, 3, 3] - dS[X, 0, 1] - 3 * S[1, 3] * dk[X, 3]) for X in (0, 2, 3))
        add(judge("cf/S13-relation", idx, hyp, rel / (sds * (1 + float(np.abs(dk).max()))), tol))
        rel = max(abs(dS[X, 1, 3] - S[1, 1] * dk[X, 3]) for X in (0, 2, 3))
        add(judge("cf/S11-relation", idx, hyp, rel / (sds * (1 + float(np.abs(dk).max()))), tol))
        # type D branch: S and ∇S special along k and a second null line
        td = uniform_type_d([ctx.pc.jet("S").value, ctx.pc.jet("S", 1).value], gauge.frame)
        branches.append(bool(td.holds))
        detail = "negative boost weight parts of S and ∇S after the null-rotation search"
        if td.holds:
            add(judge("cf/uniform-type-d", idx, hyp, max(td.residual, td.aligned_residual), TYPE_D_TOL, detail))
            add(judge("cf/kundt-conclusion", idx, FAILS, None, FLAG_TOL, "branch applies where {S, ∇S} is not uniformly of type D"))
        else:
            add(judge("cf/uniform-type-d", idx, FAILS, None, TYPE_D_TOL,
                      f"not uniformly of type D (residual {td.residual:.2e})"))
            kappa, rho = ctx.kappa, ctx.rho
            add(judge("cf/kundt-conclusion", idx, hyp, max(float(np.abs(kappa).max()), float(np.abs(rho).max())),
                      FLAG_TOL, "{S, ∇S} not uniformly of type D here, so k must be Kundt"))
        _type_d_branch(ctx, gauge, A, combine(hyp, HOLDS if td.holds else FAILS), idx, add, tol)
    result.extra["uniform_type_d"] = branches
    if not any(c.status != "skipped" for c in result.checks):
        result.note = "not applicable on this metric"
    return result


def _type_d_branch(ctx, gauge, A, hyp, idx, add, tol):
    anchors = ("cf/m2-components", "cf/m2-relations", "cf/m2-type-d-components", "cf/m2-theta-h",
               "cf/theta-gradient", "cf/ricci-identity-m2", "cf/einstein-bracket", "cf/einstein-endpoint")
    if hyp == FAILS:
        for a in anchors:
            add(judge(a, idx, hyp, None, tol, "requires {S, ∇S} uniformly of type D"))
        return
    f = gauge.frame
    tf = tachyonic_field(ctx.pc, sign_ref=f.lowered[2])
    us = u_structure(ctx.pc, tf)
    Du = cov_deriv_jet(tf.u, ctx.pc.gamma).value
    dm = frame_components(Du, f)  # dm[X, Y] = ∇_X (m_2)_Y
    S, dS = A["S"], A["dS"]
    sc = (1.0 + float(np.abs(dS).max())) * (1.0 + float(np.abs(dm).max()))
    match = float(np.abs(f.lowered[2] - tf.u.value).max())
    chain = [
        (dS[0, 2, 0], (S[2, 2] - S[1, 0]) * dm[0, 0]),
        (dS[0, 2, 3], (S[2, 2] - S[3, 3]) * dm[0, 3]),
        (dS[2, 2, 3], (S[2, 2] - S[3, 3]) * dm[2, 3]),
        (-dS[3, 2, 3] + dS[1, 0, 2], (S[3, 3] - S[2, 2]) * (dm[3, 3] - dm[1, 0])),
        (-dS[3, 2, 3] + dS[0, 1, 2], (S[3, 3] - S[2, 2]) * (dm[3, 3] - dm[0, 1])),
    ]
    res = max(max(abs(a), abs(b), abs(a - b)) for a, b in chain) / sc
    add(judge("cf/m2-components", idx, hyp, res, tol, f"gauge m_2 vs u mismatch {match:.2e}"))
    res = max(abs(dm[2, 3]), abs(dm[1, 0] - dm[3, 3]), abs(dm[0, 1] - dm[3, 3])) / (1.0 + float(np.abs(dm).max()))
    add(judge("cf/m2-relations", idx, hyp, res, tol))
    chain = [
        (dS[1, 2, 3], (S[2, 2] - S[3, 3]) * dm[1, 3]),
        (dS[3, 1, 2], (S[2, 2] - S[1, 0]) * dm[3, 1]),
        (dS[1, 1, 2], (S[2, 2] - S[0, 1]) * dm[1, 1]),
        (dS[2, 1, 2], (S[2, 2] - S[0, 1]) * dm[2, 1]),
    ]
    res = max(max(abs(a), abs(b), abs(a - b)) for a, b in chain) / sc
    add(judge("cf/m2-type-d-components", idx, hyp, res, tol))
    add(judge("cf/m2-theta-h", idx, hyp, us.structure_residual if us.case == 3 else float(np.abs(us.udot).max()),
              STRUCT_TOL, f"theta = {us.theta:.6g}, udot case {us.case}"))
    # ∇θ ∝ m_2
    th = _theta_jet(ctx.pc, tf)
    dth = th.grad().value
    u_up = ctx.pc.ginv.value @ tf.u.value
    perp = dth - (dth @ u_up) * tf.u.value
    add(judge("cf/theta-gradient", idx, hyp, float(np.abs(perp).max()) / (1.0 + float(np.abs(dth).max())), STRUCT_TOL))
    add(judge("cf/ricci-identity-m2", idx, hyp, us.ricci_residual, STRUCT_TOL))
    Rm = A["Rm"]
    br = float(image_array(Rm, 4)[(0, 1, 0, 3)][1])
    mid = -Rm[3, 1, 0, 3] + Rm[0, 1, 0, 1]
    rsc = 1.0 + float(np.abs(Rm).max())
    add(judge("cf/einstein-bracket", idx, hyp, max(abs(br - mid), abs(mid)) / rsc, tol))
    theta = us.theta
    r01 = Rm[1, 0, 0, 1] + Rm[3, 0, 3, 1] - 2 * theta**2
    r33 = 2 * Rm[0, 3, 1, 3] - 2 * theta**2
    add(judge("cf/einstein-endpoint", idx, hyp, abs(r01 - r33) / rsc, tol,
              f"intrinsic R01 = {r01:.6g}, R33 = {r33:.6g}"))


def _theta_jet(pc, tf: TachyonicField):
    Du = cov_deriv_jet(tf.u, pc.gamma)
    gi = pc.ginv.truncate(Du.order)
    u_up = J.einsum("ab,b->a", gi, tf.u.truncate(Du.order))
    h_up = gi - J.einsum("a,b->ab", u_up, u_up)
    return J.einsum("ab,ba->", h_up, Du) * (1.0 / 3.0)


TD_ANCHORS = ("td/u-form", "td/u-structure", "td/lambda-gradient", "td/case")


def suite_type_d_structure(entry, points, seed: int = 0, tol: float = CF_TOL, tol_abs=None,
                           tol_rel=None) -> SuiteResult:
    result = SuiteResult("type_d_structure", entry.name, seed, [list(p) for p in points])
    if entry.dim != 4:
        result.note = "not applicable: the Plebański tensor is used in dimension 4"
        return result
    kw = {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}
    cases, plebanski_sizes = [], []
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        add = result.checks.append
        Sn = ctx.norm("S")
        if Sn <= ctx.tol_abs:
            for a in TD_ANCHORS:
                add(judge(a, idx, FAILS, None, tol, "S = 0"))
            continue
        P = plebanski(ctx.pc.tensor("S"), ctx.pc.metric_at, tol=1e-7)
        pres = float(np.abs(P.components).max()) / Sn**2
        plebanski_sizes.append(pres)
        if pres > STRUCT_TOL:
            for a in TD_ANCHORS:
                add(judge(a, idx, FAILS if pres > 10 * STRUCT_TOL else MARGINAL, None, tol,
                          f"Plebański tensor non-zero ({pres:.2e})"))
            continue
        hyp = HOLDS
        try:
            tf = tachyonic_field(ctx.pc)
            us = u_structure(ctx.pc, tf)
        except ValueError as exc:
            tf = us = None
            why = f"S is not of the form λ(uu - h/3): {exc}"
        else:
            why = "" if us.form_residual <= tol and us.unit_residual <= tol else "S is not of the form λ(uu - h/3) with u spacelike"
        if why:
            for a in TD_ANCHORS:
                add(judge(a, idx, FAILS, None, tol, why))
            continue
        add(judge("td/u-form", idx, hyp, max(us.unit_residual, us.form_residual), tol,
                  f"lambda = {us.lam:.6g}"))
        add(judge("td/u-structure", idx, hyp, us.structure_residual, tol, f"theta = {us.theta:.6g}"))
        add(judge("td/lambda-gradient", idx, hyp, us.lambda_residual, tol))
        cases.append(us.case)
        kind = {1: "spacelike", 2: "null", 3: "zero"}[us.case]
        N, expect = {1: (2, 2), 2: (2, 1), 3: (3, 1)}[us.case]
        kv = ctx.k_jet.value
        ku = abs(float(us.u @ kv)) / (1.0 + float(np.abs(kv).max()))
        if us.case == 1:
            case_hyp = ctx.equals("S", 1, 0)
            need = "bo(∇S) = 0 along k"
        elif us.case == 2:
            par = np.abs(np.outer(kv, us.udot) - np.outer(us.udot, kv)).max() / (1.0 + np.abs(us.udot).max())
            case_hyp = HOLDS if par <= STRUCT_TOL else FAILS
            need = "k along u-dot"
        else:
            case_hyp = HOLDS if ku <= STRUCT_TOL else FAILS
            need = "k orthogonal to u"
        if case_hyp != HOLDS:
            add(judge("td/case", idx, case_hyp, None, 0.0, f"case {us.case} (u-dot {kind}); d_{N} claim needs {need}"))
            continue
        d = k_subspace(ctx.pc, ctx.f, N, tol_abs=ctx.tol_abs, tol_rel=ctx.tol_rel).d
        add(judge("td/case", idx, hyp, float(abs(d - expect)), 0.0,
                  f"case {us.case} (u-dot {kind}), d_{N} = {d}"))
    result.extra["cases"] = cases
    result.extra["plebanski_relative"] = plebanski_sizes
    if not any(c.status != "skipped" for c in result.checks):
        result.note = "not applicable on this metric"
    return result
