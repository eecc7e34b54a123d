"""Null frames (k, l, m_2, ..., m_{n-1}) at a point and as Taylor-jet fields.

Frame rows are contravariant vectors: row 0 is k, row 1 is l, rows j >= 2 are
the spatial m_j.  Completion of a null k is deterministic; the same routine
runs on order-0 jets (a point) or higher-order jets (a smooth frame field
near a point, needed for connection coefficients and frame derivatives).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .geometry import jets as J
from .geometry.jets import Jet
from .tensor_core import MetricAtPoint, TensorError, TensorValue, all_down

NULL_TOL = 1e-10
DROP_TOL = 1e-8
NORM_TOL = 1e-11


class FrameError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NullFrame:
    vectors: np.ndarray  # (n, n), rows are contravariant e_alpha
    metric: MetricAtPoint

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def k(self) -> np.ndarray:
        return self.vectors[0]

    @property
    def l(self) -> np.ndarray:  # noqa: E743
        return self.vectors[1]

    @property
    def m(self) -> np.ndarray:
        return self.vectors[2:]

    @property
    def lowered(self) -> np.ndarray:
        return self.vectors @ self.metric.matrix

    def gram(self) -> np.ndarray:
        return self.vectors @ self.metric.matrix @ self.vectors.T

    def normalization_residual(self) -> float:
        return float(np.abs(self.gram() - frame_gram(self.dim)).max())

    def fingerprint(self) -> str:
        data = np.round(self.vectors, 10) + 0.0
        return hashlib.sha256(data.tobytes()).hexdigest()[:16]

    def to_json(self) -> dict:
        return {
            "k": [float(x) for x in self.k],
            "l": [float(x) for x in self.l],
            "m": [[float(x) for x in row] for row in self.m],
            "fingerprint": self.fingerprint(),
        }


def frame_gram(n: int) -> np.ndarray:
    """The frame metric: g_01 = g_10 = 1, g_jj = 1."""
    G = np.eye(n)
    G[0, 0] = G[1, 1] = 0.0
    G[0, 1] = G[1, 0] = 1.0
    return G


def _dot(g: Jet, x: Jet, y: Jet) -> Jet:
    return J.einsum("a,a->", J.einsum("ab,b->a", g, y), x)


def complete_frame_jet(k: Jet, g: Jet, seed: Jet | None = None) -> Jet:
    """Frame field jet of shape (n, n) completing the null vector field jet ``k``.

    All branching decisions (reference vector, dropped candidates) are taken
    from point values, so the result is smooth near the point.
    """
    n = g.shape[0]
    order = min(k.order, g.order, seed.order if seed is not None else k.order)
    k, g = k.truncate(order), g.truncate(order)
    kv = np.asarray(k.value, dtype=float)
    scale = max(1.0, float(np.abs(g.value).max()))
    if not np.any(kv):
        raise FrameError("k is the zero vector")
    klow = J.einsum("ab,b->a", g, k)
    knorm = float(np.abs(kv).max())
    kk = float(_dot(g, k, k).value)
    if abs(kk) > NULL_TOL * scale * knorm**2:
        raise FrameError(f"k is not null: g(k,k) = {kk:.3e}")
    if seed is None:
        a = int(np.argmax(np.abs(klow.value)))
        t = Jet.constant(np.eye(n)[a], k.n, order)
    else:
        t = seed.truncate(order)
    gkt = J.einsum("a,a->", klow, t)
    tnorm = float(np.abs(t.value).max())
    if tnorm == 0 or abs(float(gkt.value)) <= DROP_TOL * knorm * tnorm * scale:
        raise FrameError("seed vector is degenerate with k (g(k, seed) = 0)")
    gtt = _dot(g, t, t)
    inv = J.reciprocal(gkt)
    l = t * inv - k * (gtt * inv * inv * 0.5)  # noqa: E741
    llow = J.einsum("ab,b->a", g, l)
    ms: list[Jet] = []
    for a in range(n):
        if len(ms) == n - 2:
            break
        v = Jet.constant(np.eye(n)[a], k.n, order)
        v = v - k * J.einsum("a,a->", llow, v) - l * J.einsum("a,a->", klow, v)
        ref = math.sqrt(max(float(_dot(g, v, v).value), 0.0))
        for m in ms:
            v = v - m * _dot(g, m, v)
        nn = float(_dot(g, v, v).value)
        if nn <= (DROP_TOL * max(ref, 1.0)) ** 2:
            continue
        ms.append(v * J.power(_dot(g, v, v), -0.5))
    if len(ms) != n - 2:
        raise FrameError("could not complete the spatial frame")
    return J.stack([k, l] + ms, axis=0)


def complete_null_frame(k, m: MetricAtPoint, seed=None) -> NullFrame:
    """Deterministic null frame at a point with e_0 = k."""
    n = m.dim
    kj = Jet.constant(np.asarray(k, dtype=float), n, 0)
    gj = Jet.constant(m.matrix, n, 0)
    sj = None if seed is None else Jet.constant(np.asarray(seed, dtype=float), n, 0)
    E = complete_frame_jet(kj, gj, sj)
    return NullFrame(E.value, m)


def null_rotation(f: NullFrame, z) -> NullFrame:
    """Null rotation about k: l -> l - ½|z|²k + z^i m_i, m_i -> m_i - z_i k."""
    z = np.asarray(z, dtype=float)
    if z.shape != (f.dim - 2,):
        raise FrameError(f"z must have {f.dim - 2} components")
    k, l, m = f.k, f.l, f.m
    l2 = l - 0.5 * float(z @ z) * k + z @ m
    m2 = m - np.outer(z, k)
    return NullFrame(np.vstack([k, l2, m2]), f.metric)


def boost(f: NullFrame, lam: float) -> NullFrame:
    if lam == 0:
        raise FrameError("boost parameter must be non-zero")
    return NullFrame(np.vstack([lam * f.k, f.l / lam, f.m]), f.metric)


def spin(f: NullFrame, R) -> NullFrame:
    R = np.asarray(R, dtype=float)
    d = f.dim - 2
    if R.shape != (d, d) or np.abs(R @ R.T - np.eye(d)).max() > 1e-10:
        raise FrameError("spin matrix must be orthogonal of size n-2")
    return NullFrame(np.vstack([f.k, f.l, R @ f.m]), f.metric)


def frame_components(T: TensorValue | np.ndarray, f, metric: MetricAtPoint | None = None) -> np.ndarray:
    """T_alpha = T(e_alpha1, ..., e_alphar) with all slots lowered.

    ``f`` is a NullFrame or a (possibly complex) array of frame rows, in which
    case ``metric`` is needed only if T has up slots.
    """
    if isinstance(f, NullFrame):
        rows, metric = f.vectors, f.metric
    else:
        rows = np.asarray(f)
    if isinstance(T, TensorValue):
        if T.rank and T.dim != rows.shape[1]:
            raise TensorError(f"dimension mismatch: tensor {T.dim}, frame {rows.shape[1]}")
        comps = all_down(T, metric) if metric is not None else T.components
    else:
        comps = np.asarray(T)
    out = comps
    for _ in range(comps.ndim):
        # contract the leading coordinate slot, append the frame slot at the end
        out = np.tensordot(out, rows, axes=([0], [1]))
    return out


def frame_jet_components(T: Jet, E: Jet) -> Jet:
    """Frame components of an all-down tensor jet against a frame jet."""
    out = T
    for _ in range(len(T.shape)):
        r = len(out.shape)
        rest = "ABCDFGHIJKLMNOP"[: r - 1]
        out = J.einsum(f"a{rest},za->{rest}z", out, E)
    return out


def frame_connection(E: Jet, gamma: Jet, g: Jet, tol: float = 1e-9) -> np.ndarray:
    """Gamma_{alpha beta gamma} = g(e_alpha, ∇_{e_gamma} e_beta) at the point.

    ``E`` is a frame jet of order >= 1; rigidity (constant frame Gram matrix to
    first order) is checked before use.
    """
    if E.order < 1:
        raise FrameError("frame_connection needs a frame jet of order >= 1")
    n = E.shape[0]
    gram = J.einsum("zb,yb->zy", J.einsum("za,ab->zb", E, g), E).truncate(1)
    target = frame_gram(n)
    resid = max(float(np.abs(gram.value - target).max()), float(np.abs(gram.c[..., 1:]).max()))
    if resid > tol:
        raise FrameError(f"frame is not rigid: normalization varies by {resid:.3e}")
    dE = E.grad().value  # dE[c, beta, a] = ∂_c e_beta^a
    Ev = E.value
    G = gamma.value
    cov = dE + np.einsum("acd,bd->cba", G, Ev)  # ∇_c e_beta^a
    low = Ev @ g.value  # e_alpha lowered
    return np.einsum("xa,cba,yc->xby", low, cov, Ev)


@dataclass(frozen=True, eq=False)
class ComplexFrame:
    """(k, l, m, m̄) in dimension 4 with m = (m_2 - i m_3)/√2."""

    k: np.ndarray
    l: np.ndarray  # noqa: E741
    m: np.ndarray
    mbar: np.ndarray
    metric: MetricAtPoint

    @property
    def rows(self) -> np.ndarray:
        return np.vstack([self.k, self.l, self.m, self.mbar]).astype(complex)

    def gram(self) -> np.ndarray:
        R = self.rows
        return R @ self.metric.matrix @ R.T


def np_frame(f: NullFrame) -> ComplexFrame:
    if f.dim != 4:
        raise FrameError("the complex null frame is defined for dimension 4")
    m = (f.m[0] - 1j * f.m[1]) / math.sqrt(2.0)
    return ComplexFrame(f.k.astype(complex), f.l.astype(complex), m, m.conj(), f.metric)
