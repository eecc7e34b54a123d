"""Curvature at a point from Taylor jets of the metric.

The symbolic derivative table gives the Taylor coefficients of every g_{ab}
to order ``m_max + 2``.  Christoffel symbols, Riemann, Ricci, S, Weyl and the
covariant derivatives are then computed in truncated jet arithmetic, each
step losing one order.  Covariant derivatives put the derivative slot FIRST:
``nabla(T)[b, a1, ..., ar] = ∇_b T_{a1...ar}``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .. import metric_ir as ir
from ..metric_ir import expr as E
from ..tensor_core import DOWN, MetricAtPoint, TensorError, TensorValue
from . import jets as J
from .jets import Jet

MAX_NABLA = 3
BASE_FIELDS = ("Rm", "Ric", "R", "S", "C")
_SLOTS = "ABCDFGHIJKLMNOP"


def cov_deriv_jet(T: Jet, gamma: Jet) -> Jet:
    """Covariant derivative of an all-down tensor jet."""
    r = len(T.shape)
    out = T.grad()
    if r == 0:
        return out
    subs = _SLOTS[:r]
    for i in range(r):
        swapped = subs[:i] + "y" + subs[i + 1:]
        corr = J.einsum(f"yz{subs[i]},{swapped}->z{subs}", gamma, T)
        out = out - corr
    return out


def weyl_from(Rm: Jet, Ric: Jet, R: Jet, g: Jet) -> Jet:
    n = g.shape[0]
    if n == 3:
        k = min(Rm.order, g.order)
        return Jet(np.zeros_like(Rm.truncate(k).c), g.n, k)
    gR = J.einsum("ac,bd->abcd", g, Ric)
    # g_ac R_bd − g_ad R_bc − g_bc R_ad + g_bd R_ac
    kn = gR - gR.transpose(0, 1, 3, 2) - gR.transpose(1, 0, 2, 3) + gR.transpose(1, 0, 3, 2)
    gg = J.einsum("ac,bd->abcd", g, g)
    gg = gg - gg.transpose(0, 1, 3, 2)
    return Rm - kn * (1.0 / (n - 2)) + J.multiply(gg, R) * (1.0 / ((n - 1) * (n - 2)))


class PointCurvature:
    """Curvature jets at one point; derived fields are memoized."""

    def __init__(self, metric: ir.MetricSpec, point, table: ir.DerivativeTable, m_max: int):
        self.metric = metric
        self.point = tuple(float(x) for x in point)
        if len(self.point) != metric.dim:
            raise ValueError(f"point has {len(self.point)} coordinates, chart has {metric.dim}")
        n = metric.dim
        self.n = n
        self.m_max = m_max
        K = m_max + 2
        taylor = table.taylor(self.point)
        c = np.zeros((n, n, taylor.shape[1]))
        for row, (a, b) in enumerate(_upper(n)):
            c[a, b] = c[b, a] = taylor[row]
        g = Jet(c, n, table.order).truncate(K)
        self.metric_at = MetricAtPoint.from_matrix(g.value, check_lorentzian=metric.signature != "any")
        self.g = g
        self.ginv = J.matrix_inverse(g)
        dg = g.grad()
        low = (dg.transpose(1, 0, 2) + dg.transpose(1, 2, 0) - dg) * 0.5  # Γ_{dbc}
        self.gamma = J.einsum("ad,dbc->abc", self.ginv, low)
        dG = self.gamma.grad()  # dG[c, a, d, b] = ∂_c Γ^a_{db}
        t1 = Jet(np.einsum("cadbm->abcdm", dG.c), n, dG.order)
        qq = J.einsum("ace,edb->abcd", self.gamma, self.gamma)
        rup = t1 - t1.transpose(0, 1, 3, 2) + qq - qq.transpose(0, 1, 3, 2)
        self.riemann_up = rup
        Rm = J.einsum("ae,ebcd->abcd", g, rup)
        Ric = Jet(np.einsum("abadm->bdm", rup.c), n, rup.order)
        R = J.einsum("bd,bd->", self.ginv, Ric)
        S = Ric - J.multiply(g.truncate(Ric.order), R) * (1.0 / n)
        self._fields = {("Rm", 0): Rm, ("Ric", 0): Ric, ("R", 0): R, ("S", 0): S}
        self._fields[("C", 0)] = weyl_from(Rm, Ric, R, g.truncate(Rm.order))
        self._lock = threading.Lock()

    # access -------------------------------------------------------------
    def jet(self, name: str, m: int = 0) -> Jet:
        """Jet of ∇^m of a named curvature field (Rm, Ric, R, S, C)."""
        if name not in BASE_FIELDS:
            raise KeyError(f"unknown curvature field {name!r}")
        if m > self.m_max:
            raise ValueError(f"∇^{m} exceeds the pipeline ceiling m <= {self.m_max}")
        with self._lock:
            return self._jet(name, m)

    def _jet(self, name, m):
        key = (name, m)
        if key not in self._fields:
            self._fields[key] = cov_deriv_jet(self._jet(name, m - 1), self.gamma)
        return self._fields[key]

    def tensor(self, name: str, m: int = 0) -> TensorValue:
        v = self.jet(name, m).value
        return TensorValue(np.array(v, dtype=float), (DOWN,) * np.ndim(v))

    def nabla(self, T: Jet, times: int = 1) -> Jet:
        for _ in range(times):
            T = cov_deriv_jet(T, self.gamma)
        return T

    @property
    def gamma_value(self) -> np.ndarray:
        return self.gamma.value


def _upper(n):
    return [(a, b) for a in range(n) for b in range(a, n)]


class CurvatureBundle:
    """Lazily built curvature pipeline for one metric.

    The derivative table is built once (guarded by a lock) and point results
    are memoized, so concurrent readers see a single computed value.
    """

    def __init__(self, metric: ir.MetricSpec, m_max: int = MAX_NABLA, node_cap: int = E.NODE_CAP):
        if not 0 <= m_max <= MAX_NABLA:
            raise ValueError(f"m_max must be in 0..{MAX_NABLA}")
        self.metric = metric
        self.m_max = m_max
        self.node_cap = node_cap
        self._table = None
        self._vector_tables: dict = {}
        self._points: dict = {}
        self._lock = threading.Lock()

    @property
    def table(self) -> ir.DerivativeTable:
        with self._lock:
            if self._table is None:
                exprs = [self.metric.g(a, b) for a, b in _upper(self.metric.dim)]
                self._table = ir.DerivativeTable(exprs, self.metric.dim, self.m_max + 2, self.node_cap)
            return self._table

    def at(self, point) -> PointCurvature:
        key = tuple(float(x) for x in point)
        table = self.table
        with self._lock:
            hit = self._points.get(key)
        if hit is not None:
            return hit
        pc = PointCurvature(self.metric, key, table, self.m_max)
        with self._lock:
            return self._points.setdefault(key, pc)

    def vector_jet(self, exprs, point, order: int) -> Jet:
        """Taylor jet of a vector (or any list) of Expr components."""
        exprs = tuple(exprs)
        key = (exprs, order)
        with self._lock:
            tab = self._vector_tables.get(key)
            if tab is None:
                tab = ir.DerivativeTable(exprs, self.metric.dim, order, self.node_cap)
                self._vector_tables[key] = tab
        return Jet(tab.taylor([float(x) for x in point]), self.metric.dim, order)


def expr_jet(e: E.Expr, point, order: int) -> Jet:
    """Taylor-mode evaluation of an Expr: an oracle independent of symbolic diff."""
    n = len(point)
    vals: dict = {}
    for node in E.topo_order([e]):
        k = node.kind
        if k == "const":
            v = Jet.constant(float(node.value), n, order)
        elif k == "var":
            v = Jet.coordinate(node.value, float(point[node.value]), n, order)
        else:
            args = [vals[a] for a in node.args]
            if k == "add":
                v = args[0]
                for a in args[1:]:
                    v = v + a
            elif k == "mul":
                v = args[0]
                for a in args[1:]:
                    v = J.multiply(v, a)
            elif k == "pow":
                p = node.value
                base = args[0]
                v = Jet.constant(1.0, n, order)
                for _ in range(abs(p)):
                    v = J.multiply(v, base)
                if p < 0:
                    v = J.reciprocal(v)
            elif k == "neg":
                v = -args[0]
            elif k == "inv":
                v = J.reciprocal(args[0])
            else:
                v = getattr(J, k)(args[0])
        vals[node] = v
    return vals[e]


def plebanski(S: TensorValue, m: MetricAtPoint, tol: float = 1e-9) -> TensorValue:
    """All-down Plebański tensor of a trace-free symmetric S in dimension 4."""
    if m.dim != 4:
        raise TensorError("the Plebański tensor is defined here for dimension 4 only")
    Sd = np.asarray(S.components, dtype=float)
    if S.variance != (DOWN, DOWN):
        raise TensorError("S must be given all-down")
    gi = m.inverse
    scale = max(1.0, float(np.abs(Sd).max()))
    tr = float(np.einsum("ab,ab->", gi, Sd))
    if abs(tr) > tol * scale or np.abs(Sd - Sd.T).max() > tol * scale:
        raise TensorError(f"S must be symmetric and trace-free (trace {tr:.3e})")
    mix = gi @ Sd  # S^a_c
    d = np.eye(4)
    Y = Sd @ gi @ Sd @ gi  # Y[d, b] = S_{de} S^{be}
    s2 = float(np.einsum("ab,ba->", mix, mix))
    X = np.einsum("ac,bd->abcd", mix, mix)
    X = X + np.einsum("ac,db->abcd", d, Y)
    X = X - s2 / 6.0 * np.einsum("ac,bd->abcd", d, d)
    X = (X - X.transpose(1, 0, 2, 3) - X.transpose(0, 1, 3, 2) + X.transpose(1, 0, 3, 2)) / 4.0
    P = np.einsum("ae,bf,efcd->abcd", m.matrix, m.matrix, X)
    return TensorValue(P, (DOWN,) * 4)


def bianchi_cf_residual(pc: PointCurvature) -> TensorValue:
    """Residual of ∇_[a S_b]c + (1/12) ∇_[a R g_b]c, expected to vanish when C = 0 in 4D."""
    if pc.n != 4:
        raise TensorError("the conformally-flat Bianchi residual is stated for dimension 4")
    dS = pc.jet("S", 1).value
    dR = pc.jet("R", 1).value
    g = pc.g.value
    t = dS + np.einsum("a,bc->abc", dR, g) / 12.0
    return TensorValue(0.5 * (t - t.transpose(1, 0, 2)), (DOWN,) * 3)


@dataclass
class SymmetryResiduals:
    antisym_first: float
    antisym_last: float
    pair: float
    bianchi: float
    trace: float = 0.0
    extra: dict = field(default_factory=dict)

    def max(self) -> float:
        return max(self.antisym_first, self.antisym_last, self.pair, self.bianchi, self.trace)


def riemann_symmetry_residuals(Rm: np.ndarray, ginv: np.ndarray | None = None) -> SymmetryResiduals:
    """Relative residuals of the algebraic curvature symmetries (and trace, if ginv given)."""
    scale = max(1.0, float(np.abs(Rm).max()))
    a1 = np.abs(Rm + Rm.transpose(1, 0, 2, 3)).max() / scale
    a2 = np.abs(Rm + Rm.transpose(0, 1, 3, 2)).max() / scale
    pr = np.abs(Rm - Rm.transpose(2, 3, 0, 1)).max() / scale
    bi = np.abs(Rm + Rm.transpose(0, 2, 3, 1) + Rm.transpose(0, 3, 1, 2)).max() / scale
    tr = 0.0
    if ginv is not None:
        tr = float(np.abs(np.einsum("abcd,bd->ac", Rm, ginv)).max()) / scale
    return SymmetryResiduals(float(a1), float(a2), float(pr), float(bi), tr)
