"""Built-in metrics with a designated null congruence and reference properties.

Reference properties carry a provenance tag: "pipeline" values are
re-derived by the self-audit test, "exact" values are known in closed form.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .geometry import CurvatureBundle
from .geometry import jets as J
from .geometry.jets import Jet
from .metric_ir import MetricSpec, parse_expr, parse_metric


class UnknownEntry(KeyError):
    pass


@dataclass(eq=False)
class CatalogEntry:
    name: str
    metric: MetricSpec
    k_text: tuple
    box: dict  # coord -> (lo, hi)
    reference: dict  # property -> (value, provenance)
    description: str = ""
    k_lower: bool = False  # k_text gives the covector k_a instead of k^a
    _bundle: CurvatureBundle | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def dim(self) -> int:
        return self.metric.dim

    @property
    def k_exprs(self) -> tuple:
        return tuple(parse_expr(t, self.metric.coords) for t in self.k_text)

    def bundle(self) -> CurvatureBundle:
        with self._lock:
            if self._bundle is None:
                self._bundle = CurvatureBundle(self.metric)
            return self._bundle

    def k_jet(self, point, order: int = 3) -> Jet:
        jet = self.bundle().vector_jet(self.k_exprs, point, order)
        if self.k_lower:
            gi = self.bundle().at(point).ginv.truncate(order)
            jet = J.einsum("ab,b->a", gi, jet)
        return jet

    def with_k(self, k_text, k_lower: bool = False) -> "CatalogEntry":
        """Same metric and box with a different null field."""
        e = CatalogEntry(self.name, self.metric, tuple(k_text), dict(self.box), {}, self.description, k_lower)
        e._bundle = self._bundle
        return e

    def sample_points(self, count: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo = np.array([self.box[c][0] for c in self.metric.coords], dtype=float)
        hi = np.array([self.box[c][1] for c in self.metric.coords], dtype=float)
        return lo + (hi - lo) * rng.random((count, self.dim))

    def center(self) -> np.ndarray:
        return np.array([(self.box[c][0] + self.box[c][1]) / 2 for c in self.metric.coords])

    def to_text(self) -> str:
        return self.metric.to_text()

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "metric": self.metric.to_text(),
            "k": list(self.k_text),
            "k_lower": self.k_lower,
            "box": {c: list(self.box[c]) for c in self.metric.coords},
            "reference": {k: {"value": v, "provenance": p} for k, (v, p) in sorted(self.reference.items())},
        }


def _entry(name, text, k, box, reference, description):
    metric = parse_metric(text, name)
    return CatalogEntry(name, metric, tuple(k), dict(box), dict(reference), description)


def _build() -> dict:
    unit = (-1.0, 1.0)
    entries = [
        _entry(
            "minkowski3",
            "dim = 3\ncoords = t x y\ng[0][0] = -1\ng[1][1] = 1\ng[2][2] = 1\n",
            ["1", "1", "0"],
            {"t": unit, "x": unit, "y": unit},
            {"curvature": ("zero", "exact"), "congruence": ("Kundt", "exact")},
            "Flat 3D space, constant null k.",
        ),
        _entry(
            "minkowski4",
            "dim = 4\ncoords = t x y z\ng[0][0] = -1\ng[1][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            ["1", "1", "0", "0"],
            {"t": unit, "x": unit, "y": unit, "z": unit},
            {"curvature": ("zero", "exact"), "congruence": ("Kundt", "exact")},
            "Flat 4D space in Cartesian coordinates, constant null k.",
        ),
        _entry(
            "minkowski4null",
            "dim = 4\ncoords = u v x y\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"curvature": ("zero", "exact"), "congruence": ("Kundt", "exact")},
            "Flat 4D space in null coordinates, k = ∂_v.",
        ),
        _entry(
            "ppwave4",
            "dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"weyl_type": ("N", "pipeline"), "ricci": ("zero", "pipeline"), "congruence": ("Kundt", "exact")},
            "Vacuum pp-wave, k = ∂_v.",
        ),
        _entry(
            "kundt4",
            "dim = 4\ncoords = u v x y\n"
            "g[0][0] = v^2 + 2*x*y*v + 2*x^2 - y^2 + u*x\n"
            "g[0][1] = 1\ng[0][2] = x*v + y\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"congruence": ("Kundt", "exact"), "weyl_bo": (0, "pipeline"), "ricci_bo": (0, "pipeline")},
            "Degenerate Kundt metric 2du(dv + H du + W dx) + dx² + dy², H quadratic and W linear in v.",
        ),
        _entry(
            "vsi4",
            "dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2 + u*x*y\ng[0][1] = 1\ng[0][2] = x*y\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"congruence": ("Kundt", "exact"), "weyl_type": ("III", "pipeline"), "ricci_type": ("III", "pipeline")},
            "VSI Kundt metric with v-independent W = x y: Weyl and trace-free Ricci of type III.",
        ),
        _entry(
            "pprad4",
            "dim = 4\ncoords = u v x y\ng[0][0] = x^2 + y^2 + u*x\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"congruence": ("Kundt", "exact"), "ricci_type": ("N", "pipeline"), "weyl": ("zero", "pipeline")},
            "Pure-radiation pp-wave: S of type N, conformally flat.",
        ),
        _entry(
            "ds2r2",
            "dim = 4\ncoords = u v x y\ng[0][0] = -v^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"congruence": ("Kundt", "exact"), "ricci_type": ("II", "pipeline"), "dim_E_lambda": (2, "pipeline"),
             "generic_type_ii": (True, "pipeline")},
            "Product of 2D anti-de Sitter (in Kundt form) with a flat plane: S generic type II, ∇S = 0.",
        ),
        _entry(
            "schwarzschild",
            "dim = 4\ncoords = t r θ φ\n"
            "g[0][0] = -(1 - 2/r)\ng[1][1] = 1/(1 - 2/r)\ng[2][2] = r^2\ng[3][3] = r^2*sin(θ)^2\n",
            ["1/(1 - 2/r)", "1", "0", "0"],
            {"t": unit, "r": (2.5, 10.0), "θ": (0.3, np.pi - 0.3), "φ": (0.0, 2 * np.pi)},
            {"weyl_type": ("D", "exact"), "ricci": ("zero", "exact"), "congruence": ("Robinson-Trautman", "exact")},
            "Schwarzschild with M = 1 outside the horizon; outgoing radial null k.",
        ),
        _entry(
            "warped4",
            "dim = 4\ncoords = x t y z\ng[0][0] = 1\ng[1][1] = -cosh(x)^2\ng[2][2] = cosh(x)^2\ng[3][3] = cosh(x)^2\n",
            ["0", "1", "1", "0"],
            {"x": unit, "t": unit, "y": unit, "z": unit},
            {"weyl": ("zero", "pipeline"), "s_structure": ("uniformly type D", "pipeline"),
             "congruence": ("Kundt", "pipeline")},
            "Warped product dx² + cosh²(x)(−dt² + dy² + dz²) over a flat Lorentzian fibre.",
        ),
        _entry(
            "ppwave3",
            "dim = 3\ncoords = u v x\ng[0][0] = x^2\ng[0][1] = 1\ng[2][2] = 1\n",
            ["0", "1", "0"],
            {"u": unit, "v": unit, "x": unit},
            {"congruence": ("Kundt", "exact"), "ricci_type": ("N", "pipeline")},
            "3D pp-wave, k = ∂_v.",
        ),
        _entry(
            "confflat4",
            "dim = 4\ncoords = u v x y\n"
            "g[0][1] = exp(u*x/2 + x/3)\ng[2][2] = exp(u*x/2 + x/3)\ng[3][3] = exp(u*x/2 + x/3)\n",
            ["0", "1", "0", "0"],
            {"u": unit, "v": unit, "x": unit, "y": unit},
            {"weyl": ("zero", "pipeline"), "congruence": ("Kundt", "pipeline")},
            "Conformally flat e^{2σ}(2dudv + dx² + dy²) with σ = ux/4 + x/6.",
        ),
    ]
    return {e.name: e for e in entries}


_REGISTRY = _build()


def custom_entry(metric: MetricSpec, k_text, k_lower: bool = False, name: str | None = None,
                 box: dict | None = None) -> CatalogEntry:
    """An entry for a user-supplied metric; the default sampling box is the unit cube."""
    if len(k_text) != metric.dim:
        raise ValueError(f"k has {len(k_text)} components, the metric has dimension {metric.dim}")
    box = box or {c: (-1.0, 1.0) for c in metric.coords}
    return CatalogEntry(name or metric.name or "custom", metric, tuple(k_text), box, {}, "user metric", k_lower)


def names() -> list:
    return sorted(_REGISTRY)


def get(name: str) -> CatalogEntry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None
