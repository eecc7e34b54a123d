"""Truncated multivariate Taylor series ("jets") with tensor-valued coefficients.

A ``Jet`` stores coefficients of shape ``tensor_shape + (M,)`` where the last
axis runs over monomials in the chart displacement ``x - p`` of total degree
``<= order`` (ordering from ``metric_ir.monomials``).  Products truncate at the
lower of the two orders; differentiation lowers the order by one.
"""

from __future__ import annotations

import math
import string
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..metric_ir import monomial_index, monomials


@lru_cache(maxsize=None)
def _pairs(n: int, order: int):
    mons = monomials(n, order)
    index = monomial_index(n, order)
    ii, jj, kk = [], [], []
    for i, a in enumerate(mons):
        da = sum(a)
        for j, b in enumerate(mons):
            if da + sum(b) > order:
                continue
            ii.append(i)
            jj.append(j)
            kk.append(index[tuple(x + y for x, y in zip(a, b))])
    reduce = sp.csr_matrix((np.ones(len(kk)), (np.arange(len(kk)), kk)), shape=(len(kk), len(mons)))
    return np.array(ii), np.array(jj), reduce


@lru_cache(maxsize=None)
def _deriv_map(n: int, order: int, var: int):
    low = monomials(n, order - 1)
    index = monomial_index(n, order)
    src = []
    fac = []
    for b in low:
        up = b[:var] + (b[var] + 1,) + b[var + 1:]
        src.append(index[up])
        fac.append(b[var] + 1)
    return np.array(src), np.array(fac, dtype=float)


class Jet:
    __slots__ = ("c", "n", "order")

    def __init__(self, coeffs, n: int, order: int):
        self.c = np.asarray(coeffs)
        self.n = n
        self.order = order
        if self.c.shape[-1] != math.comb(n + order, order):
            raise ValueError("coefficient axis does not match (n, order)")

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, value, n: int, order: int) -> "Jet":
        value = np.asarray(value, dtype=float)
        c = np.zeros(value.shape + (math.comb(n + order, order),), dtype=value.dtype)
        c[..., 0] = value
        return cls(c, n, order)

    @classmethod
    def coordinate(cls, var: int, point_value: float, n: int, order: int) -> "Jet":
        j = cls.constant(point_value, n, order)
        if order >= 1:
            j.c[..., 1 + var] = 1.0
        return j

    # shape ------------------------------------------------------------
    @property
    def shape(self):
        return self.c.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.c[..., 0]

    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        return Jet(self.c[idx + (Ellipsis, slice(None))] if Ellipsis not in idx else self.c[idx], self.n, self.order)

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot raise jet order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.c[..., : math.comb(self.n + order, order)], self.n, order)

    def transpose(self, *axes) -> "Jet":
        return Jet(np.transpose(self.c, tuple(axes) + (len(axes),)), self.n, self.order)

    def moveaxis(self, src: int, dst: int) -> "Jet":
        r = len(self.shape)
        src %= r
        dst %= r
        return Jet(np.moveaxis(self.c, src, dst), self.n, self.order)

    def sum(self, axis) -> "Jet":
        return Jet(self.c.sum(axis=axis), self.n, self.order)

    def reshape(self, *shape) -> "Jet":
        return Jet(self.c.reshape(tuple(shape) + (self.c.shape[-1],)), self.n, self.order)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, None

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(a.c + b.c, a.n, a.order)
        out = self.c.copy()
        out[..., 0] = out[..., 0] + np.asarray(other)
        return Jet(out, self.n, self.order)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.n, self.order)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return multiply(self, other)
        other = np.asarray(other)
        return Jet(self.c * other[..., None], self.n, self.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return multiply(self, reciprocal(other))
        other = np.asarray(other, dtype=float)
        return Jet(self.c / other[..., None], self.n, self.order)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    # calculus -----------------------------------------------------------
    def deriv(self, var: int) -> "Jet":
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _deriv_map(self.n, self.order, var)
        return Jet(self.c[..., src] * fac, self.n, self.order - 1)

    def grad(self) -> "Jet":
        """Partial derivatives stacked on a new FIRST tensor axis."""
        parts = [self.deriv(i).c for i in range(self.n)]
        return Jet(np.stack(parts, axis=0), self.n, self.order - 1)

    def __repr__(self):
        return f"Jet(shape={self.shape}, n={self.n}, order={self.order})"


def _pair_expand(a: Jet, b: Jet):
    k = min(a.order, b.order)
    a, b = a.truncate(k), b.truncate(k)
    ii, jj, red = _pairs(a.n, k)
    return a.c[..., ii], b.c[..., jj], red, k


def _reduce(prod: np.ndarray, red, n: int, k: int) -> Jet:
    lead = prod.shape[:-1]
    flat = prod.reshape(-1, prod.shape[-1])
    out = np.asarray(flat @ red) if flat.size else np.zeros((flat.shape[0], red.shape[1]))
    return Jet(out.reshape(lead + (red.shape[1],)), n, k)


def multiply(a: Jet, b: Jet) -> Jet:
    """Elementwise (broadcasting) product."""
    A, B, red, k = _pair_expand(a, b)
    return _reduce(A * B, red, a.n, k)


def einsum(subscripts: str, a: Jet, b: Jet) -> Jet:
    """Two-operand ``np.einsum`` over tensor axes with jet multiplication."""
    lhs, out = subscripts.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    free = next(ch for ch in string.ascii_letters if ch not in subscripts)
    A, B, red, k = _pair_expand(a, b)
    prod = np.einsum(f"{sa}{free},{sb}{free}->{out}{free}", A, B, optimize=True)
    return _reduce(prod, red, a.n, k)


def tensordot_const(mat: np.ndarray, subscripts: str, a: Jet) -> Jet:
    """Contract a plain array with a jet: ``einsum(subscripts, mat, a)``."""
    lhs, out = subscripts.replace(" ", "").split("->")
    sm, sa = lhs.split(",")
    free = next(ch for ch in string.ascii_letters if ch not in subscripts)
    c = np.einsum(f"{sm},{sa}{free}->{out}{free}", mat, a.c, optimize=True)
    return Jet(c, a.n, a.order)


def compose(a: Jet, derivs) -> Jet:
    """``f(a)`` from ``derivs[k] = f^(k)(a.value)`` for k = 0..order."""
    base = a.value
    delta = Jet(a.c.copy(), a.n, a.order)
    delta.c[..., 0] = 0
    out = Jet.constant(np.asarray(derivs[0], dtype=float) * np.ones_like(base, dtype=float), a.n, a.order)
    term = None
    for k in range(1, a.order + 1):
        term = delta if term is None else multiply(term, delta)
        out = out + term * (np.asarray(derivs[k]) / math.factorial(k))
    return out


def reciprocal(a: Jet) -> Jet:
    x = a.value
    if np.any(x == 0):
        raise ZeroDivisionError("reciprocal of a jet with zero value")
    derivs = [((-1) ** k) * math.factorial(k) / x ** (k + 1) for k in range(a.order + 1)]
    return compose(a, derivs)


def power(a: Jet, p: float) -> Jet:
    """``a**p`` for real ``p``; the value must be positive unless p is a non-negative integer."""
    x = np.asarray(a.value, dtype=float)
    derivs = []
    coef = 1.0
    for k in range(a.order + 1):
        derivs.append(coef * np.power(x, p - k))
        coef *= p - k
    return compose(a, derivs)


def sqrt(a: Jet) -> Jet:
    if np.any(a.value <= 0):
        raise ValueError("square root of a non-positive jet value")
    return power(a, 0.5)


def cbrt(a: Jet) -> Jet:
    """Real cube root, valid for either sign of the value."""
    x = np.asarray(a.value, dtype=float)
    if np.any(x == 0):
        raise ValueError("cube root of zero is not smooth")
    s = np.sign(x)
    return power(a * s, 1.0 / 3.0) * s


def exp(a: Jet) -> Jet:
    e = np.exp(a.value)
    return compose(a, [e] * (a.order + 1))


def log(a: Jet) -> Jet:
    x = a.value
    if np.any(x <= 0):
        raise ValueError("log of a non-positive jet value")
    derivs = [np.log(x)] + [((-1) ** (k - 1)) * math.factorial(k - 1) / x**k for k in range(1, a.order + 1)]
    return compose(a, derivs)


def _cyclic(a: Jet, cycle):
    x = a.value
    return compose(a, [cycle[k % 4](x) for k in range(a.order + 1)])


def sin(a: Jet) -> Jet:
    return _cyclic(a, [np.sin, np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x)])


def cos(a: Jet) -> Jet:
    return _cyclic(a, [np.cos, lambda x: -np.sin(x), lambda x: -np.cos(x), np.sin])


def sinh(a: Jet) -> Jet:
    return _cyclic(a, [np.sinh, np.cosh, np.sinh, np.cosh])


def cosh(a: Jet) -> Jet:
    return _cyclic(a, [np.cosh, np.sinh, np.cosh, np.sinh])


def stack(jets, axis: int = 0) -> Jet:
    k = min(j.order for j in jets)
    jets = [j.truncate(k) for j in jets]
    return Jet(np.stack([j.c for j in jets], axis=axis), jets[0].n, k)


def matrix_inverse(a: Jet) -> Jet:
    """Inverse of a square-matrix-valued jet by Neumann iteration on the constant term."""
    a0inv = np.linalg.inv(a.value)
    delta = Jet(a.c.copy(), a.n, a.order)
    delta.c[..., 0] = 0
    # (A0 + D)^-1 = sum_k (-A0^-1 D)^k A0^-1, nilpotent beyond the jet order
    step = -tensordot_const(a0inv, "ij,jk->ik", delta)
    out = Jet.constant(a0inv, a.n, a.order)
    term = Jet.constant(np.eye(a0inv.shape[0]), a.n, a.order)
    for _ in range(a.order):
        term = einsum("ij,jk->ik", step, term)
        out = out + Jet(np.einsum("ijm,jk->ikm", term.c, a0inv), a.n, a.order)
    return out
