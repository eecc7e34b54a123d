"""Per-point data shared by the suites: curvature, k, frame and measured hypotheses."""

from __future__ import annotations

import numpy as np

from ..alignment import TOL_ABS, TOL_REL, weight_array
from ..congruence import MARGIN, check_null_field, optical_matrices
from ..frames import NullFrame, complete_frame_jet, frame_components
from ..geometry import jets as J
from ..geometry.curvature import cov_deriv_jet
from .records import FAILS, HOLDS, MARGINAL


def _status(excess: float, thr: float) -> str:
    if excess <= thr:
        return HOLDS
    if excess <= MARGIN * thr:
        return MARGINAL
    return FAILS


def bo_at_most(F: np.ndarray, b: int, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL) -> str:
    """Measured status of bo(T) <= b from frame components (a zero tensor satisfies it)."""
    F = np.asarray(F)
    if F.ndim == 0:
        return HOLDS if b >= 0 else _status(abs(float(F)), tol_abs)
    w = weight_array(F.shape[0], F.ndim)
    mask = w > b
    if not mask.any():
        return HOLDS
    thr = tol_abs + tol_rel * float(np.abs(F).max())
    return _status(float(np.abs(F[mask]).max()), thr)


def bo_equals(F: np.ndarray, b: int, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL) -> str:
    """Measured status of bo(T) == b: nothing above b, something clearly at b."""
    F = np.asarray(F)
    upper = bo_at_most(F, b, tol_abs, tol_rel)
    if upper == FAILS:
        return FAILS
    w = weight_array(F.shape[0], F.ndim)
    mask = w == b
    if not mask.any():
        return FAILS
    thr = tol_abs + tol_rel * float(np.abs(F).max())
    top = float(np.abs(F[mask]).max())
    if top > MARGIN * thr:
        at = HOLDS
    elif top <= thr:
        at = FAILS
    else:
        at = MARGINAL
    if at == FAILS:
        return FAILS
    return MARGINAL if MARGINAL in (upper, at) else HOLDS


class PointContext:
    """Curvature pipeline, the congruence field and a frame field at one point."""

    def __init__(self, entry, point, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL):
        self.entry = entry
        self.point = np.asarray(point, dtype=float)
        self.tol_abs = tol_abs
        self.tol_rel = tol_rel
        self.pc = entry.bundle().at(self.point)
        self.n = self.pc.n
        self.k_jet = entry.k_jet(self.point, order=3)
        check_null_field(self.pc, self.k_jet)
        self.E = complete_frame_jet(self.k_jet, self.pc.g)
        self.f = NullFrame(self.E.value, self.pc.metric_at)
        self._cache: dict = {}
        self._fields: dict = {}

    def set_field(self, name: str, jet) -> None:
        """Use an all-down tensor field jet in place of a named curvature field."""
        self._fields[name] = jet
        self._cache = {k: v for k, v in self._cache.items() if name not in k[:2]}

    def field(self, name: str, m: int = 0):
        if name in self._fields:
            key = ("field", name, m)
            if key not in self._cache:
                base = self._fields[name] if m == 0 else self.field(name, m - 1)
                self._cache[key] = base if m == 0 else cov_deriv_jet(base, self.pc.gamma)
            return self._cache[key]
        if name == "k":
            return self.k_nabla(m)
        return self.pc.jet(name, m)

    @property
    def sp(self) -> slice:
        return slice(2, self.n)

    def comps(self, name: str, m: int = 0) -> np.ndarray:
        """Frame components of ∇^m of a curvature field, or of ∇^m k (name "k")."""
        key = (name, m)
        if key not in self._cache:
            val = self.field(name, m).value
            self._cache[key] = frame_components(np.asarray(val, dtype=float), self.f)
        return self._cache[key]

    def k_nabla(self, m: int):
        """Jet of ∇^m k_a (all-down, derivative slots first)."""
        key = ("k-jet", m)
        if key not in self._cache:
            if m == 0:
                g = self.pc.g.truncate(self.k_jet.order)
                self._cache[key] = J.einsum("ab,b->a", g, self.k_jet)
            else:
                self._cache[key] = cov_deriv_jet(self.k_nabla(m - 1), self.pc.gamma)
        return self._cache[key]

    def optical(self):
        if "optical" not in self._cache:
            self._cache["optical"] = optical_matrices(self.pc, self.k_jet, self.f)
        return self._cache["optical"]

    @property
    def kappa(self) -> np.ndarray:
        return self.optical()[0]

    @property
    def rho(self) -> np.ndarray:
        return self.optical()[1]

    def at_most(self, name: str, m: int, b: int) -> str:
        return bo_at_most(self.comps(name, m), b, self.tol_abs, self.tol_rel)

    def equals(self, name: str, m: int, b: int) -> str:
        return bo_equals(self.comps(name, m), b, self.tol_abs, self.tol_rel)

    def norm(self, name: str, m: int = 0) -> float:
        F = self.comps(name, m)
        return float(np.abs(F).max()) if F.size else 0.0


def default_points(entry, count: int, seed: int) -> np.ndarray:
    return entry.sample_points(count, seed)


__all__ = ["PointContext", "bo_at_most", "bo_equals", "default_points", "check_null_field"]
