"""Dense component tensors at a point.

Components are stored as an ndarray of shape ``(dim,) * rank`` in row-major
order, first slot slowest.  ``variance`` records ``"up"`` or ``"down"`` per slot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

UP, DOWN = "up", "down"


class TensorError(ValueError):
    pass


class SingularMetricError(TensorError):
    pass


@dataclass(frozen=True, eq=False)
class TensorValue:
    components: np.ndarray
    variance: tuple

    def __post_init__(self):
        comps = np.asarray(self.components)
        if comps.ndim != len(self.variance):
            raise TensorError(f"rank {comps.ndim} does not match variance of length {len(self.variance)}")
        if comps.ndim and len(set(comps.shape)) != 1:
            raise TensorError(f"components must be hypercubic, got shape {comps.shape}")
        for v in self.variance:
            if v not in (UP, DOWN):
                raise TensorError(f"bad variance entry {v!r}")
        comps = comps.copy()
        comps.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "variance", tuple(self.variance))

    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        return self.components.shape[0] if self.rank else 0

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "rank": self.rank,
            "variance": list(self.variance),
            "components": [float(x) for x in self.components.ravel()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "TensorValue":
        shape = (data["dim"],) * data["rank"]
        return cls(np.array(data["components"], dtype=float).reshape(shape), tuple(data["variance"]))

    def __repr__(self):
        return f"TensorValue(rank={self.rank}, dim={self.dim}, variance={self.variance})"


def down(components, rank: int | None = None) -> TensorValue:
    c = np.asarray(components, dtype=float)
    return TensorValue(c, (DOWN,) * c.ndim)


def up(components) -> TensorValue:
    c = np.asarray(components, dtype=float)
    return TensorValue(c, (UP,) * c.ndim)


def scalar(x: float) -> TensorValue:
    return TensorValue(np.array(float(x)), ())


@dataclass(frozen=True, eq=False)
class MetricAtPoint:
    g: TensorValue
    ginv: TensorValue

    @classmethod
    def from_matrix(cls, g, check_lorentzian: bool = True) -> "MetricAtPoint":
        g = np.asarray(g, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise TensorError("metric must be a square matrix")
        if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise TensorError("metric is not symmetric")
        g = 0.5 * (g + g.T)
        scale = max(1.0, np.abs(g).max())
        if abs(np.linalg.det(g)) <= 1e-13 * scale ** g.shape[0]:
            raise SingularMetricError("metric is singular (det g = 0)")
        ginv = np.linalg.inv(g)
        ginv = 0.5 * (ginv + ginv.T)
        if check_lorentzian:
            eig = np.linalg.eigvalsh(g)
            if int(np.sum(eig < 0)) != 1:
                raise TensorError(f"metric signature is not Lorentzian (eigenvalues {eig})")
        return cls(down(g), up(ginv))

    @property
    def dim(self) -> int:
        return self.g.dim

    @property
    def matrix(self) -> np.ndarray:
        return self.g.components

    @property
    def inverse(self) -> np.ndarray:
        return self.ginv.components

    def dot(self, x, y) -> float:
        return float(np.asarray(x) @ self.matrix @ np.asarray(y))

    def lower(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v)

    def raise_(self, w) -> np.ndarray:
        return self.inverse @ np.asarray(w)


def _check_dims(a: TensorValue, b: TensorValue):
    if a.rank and b.rank and a.dim != b.dim:
        raise TensorError(f"dimension mismatch: {a.dim} vs {b.dim}")


def tensor_product(a: TensorValue, b: TensorValue) -> TensorValue:
    _check_dims(a, b)
    return TensorValue(np.multiply.outer(a.components, b.components), a.variance + b.variance)


def _slot(t: TensorValue, s: int) -> int:
    if not 0 <= s < t.rank:
        raise TensorError(f"slot {s} out of range for rank {t.rank}")
    return s


def contract(t: TensorValue, slot1: int, slot2: int) -> TensorValue:
    _slot(t, slot1)
    _slot(t, slot2)
    if slot1 == slot2:
        raise TensorError("cannot contract a slot with itself")
    if t.variance[slot1] == t.variance[slot2]:
        raise TensorError(f"variance clash: slots {slot1} and {slot2} are both {t.variance[slot1]}")
    comps = np.trace(t.components, axis1=slot1, axis2=slot2)
    var = tuple(v for i, v in enumerate(t.variance) if i not in (slot1, slot2))
    return TensorValue(comps, var)


def raise_lower(t: TensorValue, slot: int, m: MetricAtPoint) -> TensorValue:
    """Flip the variance of ``slot`` using the metric."""
    _slot(t, slot)
    mat = m.inverse if t.variance[slot] == DOWN else m.matrix
    comps = np.moveaxis(np.tensordot(mat, t.components, axes=([1], [slot])), 0, slot)
    var = list(t.variance)
    var[slot] = UP if t.variance[slot] == DOWN else DOWN
    return TensorValue(comps, tuple(var))


def all_down(t: TensorValue, m: MetricAtPoint) -> np.ndarray:
    for s, v in enumerate(t.variance):
        if v == UP:
            t = raise_lower(t, s, m)
    return t.components


def all_up(t: TensorValue, m: MetricAtPoint) -> np.ndarray:
    for s, v in enumerate(t.variance):
        if v == DOWN:
            t = raise_lower(t, s, m)
    return t.components


def permute(t: TensorValue, sigma: Sequence[int]) -> TensorValue:
    """New tensor whose slot i is slot ``sigma[i]`` of ``t``."""
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(t.rank)):
        raise TensorError(f"{sigma} is not a permutation of rank {t.rank}")
    return TensorValue(np.transpose(t.components, sigma), tuple(t.variance[i] for i in sigma))


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _average(t: TensorValue, slots: Sequence[int], signed: bool) -> TensorValue:
    slots = [_slot(t, s) for s in slots]
    if len(set(slots)) != len(slots):
        raise TensorError("repeated slot")
    if len({t.variance[s] for s in slots}) > 1:
        raise TensorError("(anti)symmetrized slots must share variance")
    acc = np.zeros_like(t.components, dtype=np.result_type(t.components, float))
    axes = list(range(t.rank))
    for p in itertools.permutations(range(len(slots))):
        perm = axes.copy()
        for i, j in enumerate(p):
            perm[slots[i]] = slots[j]
        term = np.transpose(t.components, perm)
        acc = acc + (_perm_sign(p) if signed else 1) * term
    return TensorValue(acc / math.factorial(len(slots)), t.variance)


def symmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    return _average(t, slots, signed=False)


def antisymmetrize(t: TensorValue, slots: Sequence[int]) -> TensorValue:
    return _average(t, slots, signed=True)


def identity(dim: int) -> TensorValue:
    return TensorValue(np.eye(dim), (UP, DOWN))
