"""Image of the bracket with a 4D Weyl-like tensor: ⟨W|k|Q_s⟩ = (s+3) Ψ_{2-s} π(m)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..alignment import np_scalars, truncate_boost, weyl_symmetry_residual
from ..bilinear import bracket, image_array
from ..frames import NullFrame, frame_components, np_frame, null_rotation
from ..tensor_core import DOWN, UP, TensorValue, all_down
from .context import PointContext, bo_equals
from .records import FAILS, HOLDS, SuiteResult, judge

IMAGE_TOL = 1e-9
SYMMETRY_TOL = 1e-9
S_VALUES = (-2, -1, 0, 1)

# Q_s as words in (k, l, m, m̄) = (0, 1, 2, 3) of the complex frame.  For s = -1
# the word k m l m has zero image for every Weyl-like W; k m l m̄ carries 2Ψ_3 π(m).
Q_WORDS = {-2: (1, 3, 2, 3), -1: (0, 2, 1, 3), 0: (0, 2, 2, 3), 1: (0, 2, 0, 2)}
Q_WORD_AS_PRINTED = {-1: (0, 2, 1, 2)}

_SQ = 1 / math.sqrt(2.0)
# coefficients of k, l, m, m̄ in the real frame (e_0, e_1, e_2, e_3)
_COMPLEX_BASIS = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, _SQ, -1j * _SQ],
    [0, 0, _SQ, 1j * _SQ],
], dtype=complex)
PI_M = np.array([_SQ, -1j * _SQ])  # π(m) in the (m_2, m_3) basis


class ZeroWeylError(ValueError):
    pass


def rotate_about_l(f: NullFrame, z) -> NullFrame:
    """Null rotation fixing l: k -> k - ½|z|² l + z^i m_i, m_i -> m_i - z_i l."""
    z = np.asarray(z, dtype=float)
    k2 = f.k - 0.5 * float(z @ z) * f.l + z @ f.m
    m2 = f.m - np.outer(z, f.l)
    return NullFrame(np.vstack([k2, f.l, m2]), f.metric)


def q_coefficients(s: int, word=None) -> np.ndarray:
    """Q_s (or any word in k, l, m, m̄) expanded on real frame monomials, shape (4, 4, 4, 4)."""
    a, b, c, d = (_COMPLEX_BASIS[i] for i in (word or Q_WORDS[s]))
    return np.einsum("a,b,c,d->abcd", a, b, c, d)


def trace_free_frame_residual(W: TensorValue, f: NullFrame) -> float:
    """max |W_{α0β1} + W_{α1β0} + W_{αmβm̄} + W_{αm̄βm}| over the complex frame."""
    nf = np_frame(f)
    Wc = frame_components(all_down(W, f.metric), nf.rows)
    t = Wc[:, 0, :, 1] + Wc[:, 1, :, 0] + Wc[:, 2, :, 3] + Wc[:, 3, :, 2]
    scale = 1.0 + float(np.abs(Wc).max())
    return float(np.abs(t).max()) / scale


@dataclass
class ImageCheck:
    s: int
    image: np.ndarray  # complex vector in the (m_2, m_3) basis
    expected: np.ndarray
    psi: complex
    residual: float
    definition_residual: float
    spans: bool
    singular_values: list


def image_check(W: TensorValue, f: NullFrame, s: int) -> ImageCheck:
    if f.dim != 4:
        raise ValueError("the Weyl image formula is stated in dimension 4")
    Wd = all_down(W, f.metric)
    if not np.any(np.abs(Wd) > 0):
        raise ZeroWeylError("the image formula needs a non-zero Weyl-like tensor")
    sym = weyl_symmetry_residual(Wd, f.metric.inverse)
    if sym > SYMMETRY_TOL * (1.0 + float(np.abs(Wd).max())):
        raise ValueError(f"tensor is not Weyl-like (symmetry residual {sym:.3e})")
    F = frame_components(Wd, f)
    IM = image_array(F, 4)
    Qc = q_coefficients(s)
    image = np.einsum("abcd,abcdj->j", Qc, IM)
    psi = np_scalars(TensorValue(Wd, (DOWN,) * 4), f).psi[2 - s]
    expected = (s + 3) * psi * PI_M
    residual = float(np.abs(image - expected).max()) / (1.0 + abs(psi))
    # the same image from the defining contraction, real and imaginary parts separately
    rows = f.vectors
    Qup = np.einsum("abcd,ai,bj,ck,dl->ijkl", Qc, rows, rows, rows, rows)
    via_def = np.zeros(2, dtype=complex)
    for part, unit in ((Qup.real, 1.0), (Qup.imag, 1j)):
        if np.any(np.abs(part) > 1e-14):
            q = bracket(TensorValue(Wd, (DOWN,) * 4), f, TensorValue(part, (UP,) * 4))
            via_def += unit * np.asarray(q.components)
    def_res = float(np.abs(via_def - image).max()) / (1.0 + float(np.abs(Wd).max()))
    span = np.array([image.real, image.imag, image.conj().real, image.conj().imag])
    sv = np.linalg.svd(span, compute_uv=False)
    spans = bool(sv[0] > 0 and sv[1] > 1e-8 * sv[0])
    return ImageCheck(s, image, expected, psi, residual, def_res, spans, [float(x) for x in sv])


def generic_frame(f: NullFrame, seed: int) -> NullFrame:
    """Deterministic frame with neither k nor l along a principal direction (generically)."""
    rng = np.random.default_rng(seed)
    z1, z2 = rng.uniform(-0.6, 0.6, size=(2, 2))
    return rotate_about_l(null_rotation(f, z1), z2)


def suite_surjectivity(entry, points, seed: int = 0, s_values=S_VALUES, tol: float = IMAGE_TOL,
                       tol_abs=None, tol_rel=None) -> SuiteResult:
    result = SuiteResult("surjectivity", entry.name, seed, [list(p) for p in points])
    if entry.dim != 4:
        result.note = "not applicable: the image formula is stated in dimension 4"
        return result
    kw = {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}
    zero_everywhere = True
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        C = ctx.pc.tensor("C")
        if float(np.abs(C.components).max()) <= ctx.tol_abs:
            for s in s_values:
                result.checks.append(judge(f"surjectivity/image-s{s:+d}", idx, FAILS, None, tol, "zero Weyl tensor"))
            continue
        zero_everywhere = False
        # the Weyl tensor itself, in the catalog frame
        variants = [("native", C, ctx.f)]
        # boost-truncations in a frame whose k is not a principal direction
        fr = generic_frame(ctx.f, seed)
        for s in s_values:
            variants.append((f"truncated b<={s}", truncate_boost(C, fr, lambda b, s=s: b <= s), fr))
        for label, W, f in variants:
            F = frame_components(W, f)
            sym = weyl_symmetry_residual(all_down(W, f.metric), f.metric.inverse) / (1.0 + float(np.abs(F).max()))
            result.checks.append(judge("surjectivity/weyl-like", idx, HOLDS, sym, SYMMETRY_TOL, label))
            result.checks.append(judge("surjectivity/trace-free-frame", idx, HOLDS,
                                       trace_free_frame_residual(W, f), SYMMETRY_TOL, label))
            for s in s_values:
                hyp = bo_equals(F, s, ctx.tol_abs, ctx.tol_rel)
                if hyp == FAILS:
                    continue
                try:
                    ic = image_check(W, f, s)
                except ZeroWeylError:
                    continue
                detail = f"{label}; Psi_{2 - s} = {ic.psi.real:.6g}{ic.psi.imag:+.6g}i"
                result.checks.append(judge(f"surjectivity/image-s{s:+d}", idx, hyp, ic.residual, tol, detail))
                result.checks.append(judge("surjectivity/closed-form-vs-definition", idx, hyp,
                                           ic.definition_residual, 1e-12, f"{label}; s = {s}"))
                result.checks.append(judge("surjectivity/spans-screen", idx, hyp, 0.0 if ic.spans else 1.0,
                                           0.5, f"{label}; singular values {ic.singular_values[0]:.3e}, "
                                                f"{ic.singular_values[1]:.3e}"))
    if zero_everywhere:
        result.note = "not applicable: the Weyl tensor vanishes at every point"
    return result
