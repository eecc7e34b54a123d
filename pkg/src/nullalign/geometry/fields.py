"""Tensor fields with symbolic Expr components.

This route differentiates the curvature expressions directly.  It is exact
but the expression DAG grows quickly with the derivative order, so it is
used for Christoffel symbols, Riemann and a first covariant derivative, and
as an independent cross-check of the Taylor-jet pipeline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import metric_ir as ir
from ..metric_ir import expr as E
from ..tensor_core import DOWN, UP, TensorValue


@dataclass(frozen=True, eq=False)
class TensorFieldExpr:
    dim: int
    variance: tuple
    components: np.ndarray  # object array of Expr, shape (dim,) * rank

    @property
    def rank(self) -> int:
        return len(self.variance)

    def node_count(self) -> int:
        return E.node_count(*self.components.ravel())

    def evaluate(self, point) -> TensorValue:
        flat = list(self.components.ravel())
        fn = E.compile_exprs(flat)
        vals = np.array(fn([float(x) for x in point]), dtype=float)
        return TensorValue(vals.reshape(self.components.shape), self.variance)


def _obj(shape):
    a = np.empty(shape, dtype=object)
    a.fill(E.ZERO)
    return a


def _det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    terms = []
    for j in range(n):
        if m[0][j] is E.ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        t = E.mul(m[0][j], _det(minor))
        terms.append(t if j % 2 == 0 else E.neg(t))
    return E.add(*terms) if terms else E.ZERO


def metric_field(metric: ir.MetricSpec) -> TensorFieldExpr:
    comps = _obj((metric.dim, metric.dim))
    for a in range(metric.dim):
        for b in range(metric.dim):
            comps[a, b] = metric.g(a, b)
    return TensorFieldExpr(metric.dim, (DOWN, DOWN), comps)


def inverse_metric(metric: ir.MetricSpec) -> TensorFieldExpr:
    """Cofactor inverse: exact, with a single shared 1/det node."""
    n = metric.dim
    rows = [[metric.g(a, b) for b in range(n)] for a in range(n)]
    inv_det = E.inv(_det(rows))
    comps = _obj((n, n))
    for a in range(n):
        for b in range(a, n):
            minor = [r[:a] + r[a + 1:] for i, r in enumerate(rows) if i != b]
            c = E.mul(_det(minor), inv_det)
            c = c if (a + b) % 2 == 0 else E.neg(c)
            comps[a, b] = comps[b, a] = c
    return TensorFieldExpr(n, (UP, UP), comps)


def _check(field: TensorFieldExpr, cap: int) -> TensorFieldExpr:
    count = field.node_count()
    if count > cap:
        raise E.NodeCapExceeded(
            f"symbolic field needs {count} expression nodes (cap {cap}); "
            "lower the derivative order or use the jet pipeline"
        )
    return field


def christoffel(metric: ir.MetricSpec, node_cap: int = E.NODE_CAP) -> TensorFieldExpr:
    """Γ[a, b, c] = Γ^a_{bc}."""
    n = metric.dim
    ginv = inverse_metric(metric).components
    dg = [[[E.diff(metric.g(a, b), c) for c in range(n)] for b in range(n)] for a in range(n)]
    half = E.const(Fraction(1, 2))
    low = _obj((n, n, n))  # Γ_{dbc}
    for d in range(n):
        for b in range(n):
            for c in range(b, n):
                low[d, b, c] = low[d, c, b] = E.mul(half, E.add(dg[d][c][b], dg[d][b][c], E.neg(dg[b][c][d])))
    out = _obj((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(b, n):
                out[a, b, c] = out[a, c, b] = E.add(*(E.mul(ginv[a, d], low[d, b, c]) for d in range(n)))
    return _check(TensorFieldExpr(n, (UP, DOWN, DOWN), out), node_cap)


def riemann(metric: ir.MetricSpec, node_cap: int = E.NODE_CAP) -> TensorFieldExpr:
    """All-down R_{abcd} with R^a_{bcd} = ∂_cΓ^a_{db} − ∂_dΓ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}."""
    n = metric.dim
    G = christoffel(metric, node_cap).components
    up = _obj((n,) * 4)
    for a, b, c, d in itertools.product(range(n), repeat=4):
        if c >= d:
            continue
        terms = [E.diff(G[a, d, b], c), E.neg(E.diff(G[a, c, b], d))]
        for e in range(n):
            terms.append(E.mul(G[a, c, e], G[e, d, b]))
            terms.append(E.neg(E.mul(G[a, d, e], G[e, c, b])))
        up[a, b, c, d] = E.add(*terms)
        up[a, b, d, c] = E.neg(up[a, b, c, d])
    down = _obj((n,) * 4)
    for a, b, c, d in itertools.product(range(n), repeat=4):
        down[a, b, c, d] = E.add(*(E.mul(metric.g(a, e), up[e, b, c, d]) for e in range(n)))
    return _check(TensorFieldExpr(n, (DOWN,) * 4, down), node_cap)


def cov_deriv(field: TensorFieldExpr, metric: ir.MetricSpec, node_cap: int = E.NODE_CAP) -> TensorFieldExpr:
    """∇ of an all-down field; the derivative slot is placed FIRST."""
    if any(v != DOWN for v in field.variance):
        raise ValueError("cov_deriv expects an all-down field")
    n = metric.dim
    G = christoffel(metric, node_cap).components
    T = field.components
    out = _obj((n,) * (field.rank + 1))
    for idx in itertools.product(range(n), repeat=field.rank + 1):
        b, rest = idx[0], idx[1:]
        terms = [E.diff(T[rest], b)]
        for i, a in enumerate(rest):
            for e in range(n):
                if G[e, b, a] is E.ZERO:
                    continue
                swapped = rest[:i] + (e,) + rest[i + 1:]
                terms.append(E.neg(E.mul(G[e, b, a], T[swapped])))
        out[idx] = E.add(*terms)
    return _check(TensorFieldExpr(n, (DOWN,) * (field.rank + 1), out), node_cap)


def scalar_field(e: E.Expr, dim: int) -> TensorFieldExpr:
    a = np.empty((), dtype=object)
    a[()] = e
    return TensorFieldExpr(dim, (), a)


def vector_field(exprs, lower: bool = False) -> TensorFieldExpr:
    comps = np.empty((len(exprs),), dtype=object)
    for i, e in enumerate(exprs):
        comps[i] = e
    return TensorFieldExpr(len(exprs), (DOWN,) if lower else (UP,), comps)
