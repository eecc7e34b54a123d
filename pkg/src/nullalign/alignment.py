"""Boost weights, boost order and null alignment relative to a null direction.

A frame component T_alpha carries weight +bw(alpha) = #0 - #1 among its
labels; a monomial e_alpha1...e_alphar carries boost order -bw(alpha).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .frames import NullFrame, complete_null_frame, frame_components, frame_gram, np_frame
from .geometry.curvature import plebanski
from .tensor_core import DOWN, MetricAtPoint, TensorError, TensorValue, all_down

TOL_ABS = 1e-10
TOL_REL = 1e-9


def boost_weight(alpha) -> int:
    return sum((a == 0) - (a == 1) for a in alpha)


@lru_cache(maxsize=None)
def weight_array(n: int, r: int) -> np.ndarray:
    """bw of every multi-index, as an array of shape (n,) * r."""
    w = np.zeros((n,) * r, dtype=int)
    for idx in itertools.product(range(n), repeat=r):
        w[idx] = boost_weight(idx)
    return w


def type_label(bo) -> str:
    if bo is None:
        return "zero"
    if bo > 0:
        return "not special"
    if bo == 0:
        return "II"
    if bo == -1:
        return "III"
    return "N"


@dataclass
class AlignmentReport:
    bo: int | None
    weights: list  # [(b, max_abs)] for b present above the threshold, descending
    label: str
    tol_abs: float
    tol_rel: float
    sampled: bool = False
    norm: float = 0.0

    @property
    def is_zero(self) -> bool:
        return self.bo is None

    def to_json(self) -> dict:
        return {
            "bo": "zero tensor" if self.bo is None else self.bo,
            "weights": [{"b": b, "max_abs": float(v)} for b, v in self.weights],
            "label": self.label,
            "tol_abs": self.tol_abs,
            "tol_rel": self.tol_rel,
            "sampled": self.sampled,
        }


def zero_threshold(F: np.ndarray, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL) -> float:
    norm = float(np.abs(F).max()) if np.size(F) else 0.0
    return tol_abs + tol_rel * norm


def boost_order_components(F: np.ndarray, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL,
                           scale: float | None = None) -> AlignmentReport:
    """Boost order from frame components.

    ``scale`` overrides the norm used for the relative threshold (for example
    the coordinate norm of T, or the norm of a related tensor).
    """
    F = np.asarray(F)
    r = F.ndim
    norm = float(np.abs(F).max()) if F.size else 0.0
    thr = tol_abs + tol_rel * (norm if scale is None else scale)
    if r == 0:
        bo = 0 if abs(F) > thr else None
        return AlignmentReport(bo, [(0, abs(complex(F)))] if bo is not None else [], type_label(bo), tol_abs, tol_rel, norm=norm)
    w = weight_array(F.shape[0], r)
    weights = []
    for b in range(r, -r - 1, -1):
        mask = w == b
        if not mask.any():
            continue
        mx = float(np.abs(F[mask]).max())
        if mx > thr:
            weights.append((b, mx))
    bo = weights[0][0] if weights else None
    return AlignmentReport(bo, weights, type_label(bo), tol_abs, tol_rel, norm=norm)


def boost_order(T: TensorValue, f: NullFrame, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL) -> AlignmentReport:
    return boost_order_components(frame_components(T, f), tol_abs, tol_rel)


def dual_coframe(f: NullFrame) -> np.ndarray:
    """Rows theta^alpha (covectors) with theta^alpha(e_beta) = delta."""
    return frame_gram(f.dim) @ f.lowered


def from_frame_components(F: np.ndarray, f: NullFrame) -> np.ndarray:
    """All-down coordinate components of the tensor whose frame components are F."""
    theta = dual_coframe(f)
    out = np.asarray(F)
    for _ in range(out.ndim):
        out = np.tensordot(out, theta, axes=([0], [0]))
    return out


def boost_decomposition(T: TensorValue, f: NullFrame) -> dict:
    """Map b -> (T)_b as all-down TensorValues; the parts sum to T."""
    F = frame_components(T, f)
    w = weight_array(f.dim, F.ndim)
    out = {}
    for b in range(F.ndim, -F.ndim - 1, -1):
        mask = w == b
        if not mask.any():
            continue
        out[b] = TensorValue(from_frame_components(np.where(mask, F, 0.0), f), (DOWN,) * F.ndim)
    return out


def truncate_boost(T: TensorValue, f: NullFrame, keep) -> TensorValue:
    """Sum of the boost-weight parts of T whose weight b satisfies ``keep(b)``."""
    parts = boost_decomposition(T, f)
    acc = sum((p.components for b, p in parts.items() if keep(b)), np.zeros_like(T.components))
    return TensorValue(acc, T.variance)


# --- Weyl-like tensors ---------------------------------------------------

def weyl_symmetry_residual(W: np.ndarray, ginv: np.ndarray) -> float:
    scale = max(1.0, float(np.abs(W).max()))
    res = [
        np.abs(W + W.transpose(1, 0, 2, 3)).max(),
        np.abs(W + W.transpose(0, 1, 3, 2)).max(),
        np.abs(W - W.transpose(2, 3, 0, 1)).max(),
        np.abs(W + W.transpose(0, 2, 3, 1) + W.transpose(0, 3, 1, 2)).max(),
        np.abs(np.einsum("abcd,bd->ac", W, ginv)).max(),
    ]
    return float(max(res)) / scale


def weyl_part(X: np.ndarray, m: MetricAtPoint) -> np.ndarray:
    """Project an arbitrary all-down rank-4 array onto Weyl-like tensors."""
    X = np.asarray(X, dtype=float)
    X = (X - X.transpose(1, 0, 2, 3)) / 2
    X = (X - X.transpose(0, 1, 3, 2)) / 2
    X = (X + X.transpose(2, 3, 0, 1)) / 2
    # remove the totally antisymmetric part so the cyclic identity holds
    X = X - (X + X.transpose(0, 2, 3, 1) + X.transpose(0, 3, 1, 2)) / 3
    g, gi = m.matrix, m.inverse
    n = m.dim
    ric = np.einsum("abcd,ac->bd", X, gi)
    R = float(np.einsum("bd,bd->", ric, gi))
    gR = np.einsum("ac,bd->abcd", g, ric)
    kn = gR - gR.transpose(0, 1, 3, 2) - gR.transpose(1, 0, 2, 3) + gR.transpose(1, 0, 3, 2)
    gg = np.einsum("ac,bd->abcd", g, g)
    gg = gg - gg.transpose(0, 1, 3, 2)
    return X - kn / (n - 2) + R * gg / ((n - 1) * (n - 2))


@dataclass
class NPScalars:
    psi: tuple  # five complex numbers Psi_0..Psi_4

    def to_json(self) -> dict:
        return {f"Psi{i}": [float(z.real), float(z.imag)] for i, z in enumerate(self.psi)}


def np_scalars(W: TensorValue, f: NullFrame, tol: float = 1e-9) -> NPScalars:
    """NP Weyl scalars in the complex frame built from ``f`` (dimension 4)."""
    if f.dim != 4:
        raise TensorError("NP scalars are defined in dimension 4")
    Wd = all_down(W, f.metric)
    res = weyl_symmetry_residual(Wd, f.metric.inverse)
    if res > tol:
        raise TensorError(f"tensor is not Weyl-like (symmetry residual {res:.3e})")
    nf = np_frame(f)
    k, l, m, mb = nf.k, nf.l, nf.m, nf.mbar

    def w(a, b, c, d):
        return complex(np.einsum("abcd,a,b,c,d->", Wd, a, b, c, d))

    return NPScalars((w(k, m, k, m), w(k, l, k, m), w(k, m, l, mb), w(l, k, mb, l), w(l, mb, l, mb)))


# --- principal null directions in 4D ---------------------------------------

@dataclass
class PND:
    direction: np.ndarray  # contravariant null vector
    multiplicity: int
    z: complex | None  # None for the root at infinity (direction of l)


def _rotated_psi0(Wd, nf, z: complex) -> complex:
    k, l, m, mb = nf.k, nf.l, nf.m, nf.mbar
    kp = k + np.conj(z) * m + z * mb - abs(z) ** 2 * l
    mp = m - z * l
    return complex(np.einsum("abcd,a,b,c,d->", Wd, kp, mp, kp, mp))


def psi0_polynomial(W: TensorValue, f: NullFrame, samples: int = 16):
    """Coefficients (ascending) of Psi_0 after a null rotation by z, and the variable used.

    Returns ``(coeffs, conj)`` where the quartic is a polynomial in z if
    ``conj`` is False and in conj(z) otherwise.
    """
    Wd = all_down(W, f.metric)
    nf = np_frame(f)
    theta = 2 * np.pi * np.arange(samples) / samples
    vals = np.array([_rotated_psi0(Wd, nf, complex(np.exp(1j * t))) for t in theta])
    four = np.fft.fft(vals) / samples  # four[j] multiplies e^{i j theta}
    pos = four[:5]
    neg = np.concatenate([[four[0]], four[::-1][:4]])
    rest_pos = np.abs(np.delete(four, range(5))).max() if samples > 5 else 0.0
    rest_neg = np.abs(np.delete(four, [0] + list(range(samples - 4, samples)))).max()
    if rest_pos <= rest_neg:
        return pos, False
    return neg, True


def weyl_pnds_4d(W: TensorValue, f: NullFrame, tol: float = 1e-10, cluster: float = 1e-6,
                 loose: float = 1e-3) -> list:
    """Principal null directions of a Weyl-like tensor in dimension 4 with multiplicities."""
    if f.dim != 4:
        raise TensorError("PND computation is implemented for dimension 4")
    Wd = all_down(W, f.metric)
    if float(np.abs(Wd).max()) == 0.0:
        raise TensorError("Weyl-like tensor is zero; principal null directions undefined")
    coeffs, conj = psi0_polynomial(W, f)
    scale = float(np.abs(coeffs).max())
    if scale <= tol * max(1.0, float(np.abs(Wd).max())):
        raise TensorError("Weyl-like tensor is zero; principal null directions undefined")
    c = np.where(np.abs(coeffs) > tol * scale, coeffs, 0)
    deg = max(i for i in range(5) if c[i] != 0)
    roots = np.roots(c[: deg + 1][::-1]) if deg > 0 else np.array([])
    groups = _cluster_roots(list(roots), cluster)
    groups = _merge_loose(groups, c[: deg + 1], loose)
    nf = np_frame(f)
    out = []
    for members in groups:
        w = complex(np.mean(members))
        z = np.conj(w) if conj else w
        k = nf.k + np.conj(z) * nf.m + z * nf.mbar - abs(z) ** 2 * nf.l
        out.append(PND(np.real(k), len(members), complex(z)))
    if deg < 4:
        out.append(PND(np.array(f.l, dtype=float), 4 - deg, None))
    out.sort(key=lambda p: (-p.multiplicity, p.z is None, 0 if p.z is None else (abs(p.z), np.angle(p.z))))
    return out


def _cluster_roots(roots, radius):
    groups = []
    for r in roots:
        for g in groups:
            if abs(np.mean(g) - r) <= radius * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    return groups


def _merge_loose(groups, coeffs, radius):
    """Merge nearby clusters when the polynomial's derivatives confirm a repeated root."""
    poly = np.polynomial.Polynomial(coeffs)
    changed = True
    while changed:
        changed = False
        for i, j in itertools.combinations(range(len(groups)), 2):
            a, b = groups[i], groups[j]
            ca, cb = np.mean(a), np.mean(b)
            if abs(ca - cb) > radius * max(1.0, abs(ca)):
                continue
            merged = a + b
            c = np.mean(merged)
            mult = len(merged)
            scale = float(np.abs(coeffs).max()) * max(1.0, abs(c)) ** 4
            d = poly
            ok = True
            for _ in range(mult):
                if abs(d(c)) > 1e-6 * scale:
                    ok = False
                    break
                d = d.deriv()
            if ok:
                groups[i] = merged
                del groups[j]
                changed = True
                break
    return groups


def petrov_pattern(pnds) -> str:
    mult = sorted((p.multiplicity for p in pnds), reverse=True)
    return {
        (1, 1, 1, 1): "I",
        (2, 1, 1): "II",
        (2, 2): "D",
        (3, 1): "III",
        (4,): "N",
    }.get(tuple(mult), "unknown")


# --- trace-free Ricci eigenstructure -------------------------------------

@dataclass
class SEigenReport:
    eigenvalues: list
    aligned: bool
    lam: float | None
    dim_E_lambda: int | None
    spatial_eigenvalues: list
    generic_type_ii: bool
    plebanski_zero: bool | None
    trivial: bool
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[float(np.real(x)), float(np.imag(x))] for x in self.eigenvalues],
            "aligned": self.aligned,
            "lambda": self.lam,
            "dim_E_lambda": self.dim_E_lambda,
            "spatial_eigenvalues": [float(x) for x in self.spatial_eigenvalues],
            "generic_type_ii": self.generic_type_ii,
            "plebanski_zero": self.plebanski_zero,
            "trivial": self.trivial,
        }


def s_eigenstructure(S: TensorValue, m: MetricAtPoint, f: NullFrame | None = None,
                     tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL, eig_tol: float = 1e-7) -> SEigenReport:
    """Eigen data of S^a_b; with a frame, the null eigendirection k = e_0 is tested."""
    Sd = all_down(S, m)
    norm = float(np.abs(Sd).max())
    mix = m.inverse @ Sd
    ev = sorted(np.linalg.eigvals(mix), key=lambda z: (round(float(np.real(z)), 9), float(np.imag(z))))
    if norm <= tol_abs:
        return SEigenReport(ev, True, 0.0, m.dim, [], False, True if m.dim == 4 else None, True)
    P0 = None
    if m.dim == 4:
        P = plebanski(TensorValue(Sd, (DOWN, DOWN)), m, tol=1e-7)
        P0 = bool(np.abs(P.components).max() <= 1e-9 * max(norm, 1.0) ** 2)
    if f is None:
        f = _null_eigen_frame(mix, m, eig_tol)
        if f is None:
            return SEigenReport(ev, False, None, None, [], False, P0, False)
    F = frame_components(TensorValue(Sd, (DOWN, DOWN)), f)
    rep = boost_order_components(F, tol_abs, tol_rel)
    aligned = rep.bo is not None and rep.bo <= 0
    if not aligned:
        return SEigenReport(ev, False, None, None, [], False, P0, False)
    lam = float(F[0, 1])
    spatial = np.linalg.eigvalsh(F[2:, 2:]) if m.dim > 2 else np.array([])
    hits = int(np.sum(np.abs(spatial - lam) <= eig_tol * max(1.0, norm)))
    dimE = 2 + hits
    generic = rep.bo == 0 and hits == 0
    return SEigenReport(ev, True, lam, dimE, list(spatial), generic, P0, False)


def _null_eigen_frame(mix, m: MetricAtPoint, eig_tol: float):
    """A frame whose k is a null eigenvector of S^a_b, if one exists."""
    n = m.dim
    vals = np.linalg.eigvals(mix)
    for lam in sorted({round(float(v.real), 10) for v in vals if abs(v.imag) < eig_tol}):
        A = mix - lam * np.eye(n)
        _, s, vt = np.linalg.svd(A)
        thr = eig_tol * max(1.0, s[0])
        V = vt[s <= thr].T if np.any(s <= thr) else vt[-1:].T
        G = V.T @ m.matrix @ V
        w, U = np.linalg.eigh(G)
        cand = None
        if w[0] < -eig_tol and w[-1] > eig_tol:
            a = U[:, 0] / math.sqrt(-w[0])
            b = U[:, -1] / math.sqrt(w[-1])
            cand = V @ (a + b)
        else:
            small = np.abs(w) <= eig_tol * max(1.0, np.abs(w).max())
            if small.any():
                cand = V @ U[:, np.argmax(small)]
        if cand is not None:
            try:
                return complete_null_frame(cand / np.abs(cand).max(), m)
            except ValueError:
                continue
    return None


# --- sampled global data ---------------------------------------------------

def random_null_directions(m: MetricAtPoint, count: int, rng: np.random.Generator) -> np.ndarray:
    """Null vectors t + s with t unit timelike and s unit spacelike orthogonal, uniform on the sphere."""
    w, V = np.linalg.eigh(m.matrix)
    basis = V / np.sqrt(np.abs(w))  # columns orthonormal; column 0 timelike
    out = []
    for _ in range(count):
        s = rng.normal(size=m.dim - 1)
        s /= np.linalg.norm(s)
        out.append(basis[:, 0] + basis[:, 1:] @ s)
    return np.array(out)


def sampled_bo_range(T: TensorValue, m: MetricAtPoint, count: int = 500, seed: int = 0,
                     extra=(), tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL) -> dict:
    """Sampled min and max boost order over null directions (bo_min is an upper bound)."""
    rng = np.random.default_rng(seed)
    dirs = list(random_null_directions(m, count, rng)) + [np.asarray(x, dtype=float) for x in extra]
    bos = []
    scale = float(np.abs(all_down(T, m)).max())
    for k in dirs:
        f = complete_null_frame(k, m)
        F = frame_components(T, f)
        rep = boost_order_components(F, tol_abs, tol_rel)
        if rep.bo is not None:
            bos.append(rep.bo)
    if not bos:
        return {"bo_min": None, "bo_max": None, "sampled": True, "count": len(dirs), "norm": scale}
    return {"bo_min": min(bos), "bo_max": max(bos), "sampled": True, "count": len(dirs), "norm": scale}
