"""Symbolic partial-derivative tables compiled for repeated pointwise use."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import expr as E


@lru_cache(maxsize=None)
def monomials(n: int, order: int) -> tuple:
    """Exponent tuples in ``n`` variables of total degree <= order.

    Sorted by degree, then lexicographically descending, so the table for a
    lower order is a prefix of the table for a higher one.
    """
    out = []
    for deg in range(order + 1):
        level = []

        def rec(prefix, left, slots):
            if slots == 1:
                level.append(prefix + (left,))
                return
            for first in range(left, -1, -1):
                rec(prefix + (first,), left - first, slots - 1)

        rec((), deg, n)
        out.extend(level)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, order: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n, order))}


def n_monomials(n: int, order: int) -> int:
    return math.comb(n + order, order)


class DerivativeTable:
    """All partial derivatives of ``exprs`` up to ``order``, as Taylor coefficients.

    Each derivative for exponent tuple ``alpha`` is built from the derivative
    for ``alpha`` minus one unit in its first non-zero slot, so chains share
    subtrees.  The total DAG size is checked against ``expr.NODE_CAP``.
    """

    def __init__(self, exprs: Sequence[E.Expr], nvars: int, order: int, node_cap: int = E.NODE_CAP):
        self.exprs = tuple(exprs)
        self.nvars = nvars
        self.order = order
        mons = monomials(nvars, order)
        table = []
        for e in self.exprs:
            d = {mons[0]: e}
            for m in mons[1:]:
                i = next(j for j, x in enumerate(m) if x)
                parent = m[:i] + (m[i] - 1,) + m[i + 1:]
                d[m] = E.diff(d[parent], i)
            table.append([d[m] for m in mons])
        flat = [x for row in table for x in row]
        count = E.node_count(*flat)
        if count > node_cap:
            raise E.NodeCapExceeded(
                f"derivative table needs {count} expression nodes (cap {node_cap}); "
                "lower the derivative order or simplify the metric"
            )
        self.node_count = count
        self.derivatives = table
        self._scale = np.array([1.0 / math.prod(math.factorial(a) for a in m) for m in mons])
        self._nonzero = [(r, c) for r, row in enumerate(table) for c, x in enumerate(row) if x is not E.ZERO]
        self._fn = E.compile_exprs([table[r][c] for r, c in self._nonzero]) if self._nonzero else None

    def taylor(self, point: Sequence[float]) -> np.ndarray:
        """Array of shape (len(exprs), n_monomials) with coefficients d^alpha f / alpha!."""
        out = np.zeros((len(self.exprs), len(self._scale)))
        if self._fn is not None:
            vals = self._fn([float(x) for x in point])
            rows, cols = zip(*self._nonzero)
            out[list(rows), list(cols)] = vals
        return out * self._scale
