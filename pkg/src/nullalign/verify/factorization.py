"""Factorization of directional derivatives through ∇k, over catalog points."""

from __future__ import annotations

import numpy as np

from ..bilinear import factorization_check
from .context import PointContext
from .records import FAILS, HOLDS, MARGINAL, SuiteResult, judge

FACTOR_TOL = 1e-8
TENSORS = (("S", 0), ("Rm", 0), ("Rm", 1))


def _label(name, m):
    return f"∇{name}" if m == 1 else name


def suite_factorization(entry, points, seed: int = 0, tol_abs=None, tol_rel=None,
                        tol: float = FACTOR_TOL, tensors=TENSORS) -> SuiteResult:
    result = SuiteResult("factorization", entry.name, seed, [list(p) for p in points])
    rng = np.random.default_rng(seed)
    kw = {k: v for k, v in (("tol_abs", tol_abs), ("tol_rel", tol_rel)) if v is not None}
    counts = {}
    for idx, p in enumerate(points):
        ctx = PointContext(entry, p, **kw)
        for name, m in tensors:
            fr = factorization_check(ctx.pc, ctx.k_jet, ctx.pc.jet(name, m), ctx.E, rng=rng, **kw)
            label = _label(name, m)
            if fr.status == "zero tensor":
                result.checks.append(judge(f"factorization/{label}", idx, HOLDS, 0.0, tol, "zero tensor"))
                continue
            hyp = HOLDS if fr.status == "checked" else FAILS
            if hyp == HOLDS and fr.detail.startswith("marginal"):
                hyp = MARGINAL
            result.checks.append(judge(f"factorization/{label}", idx, hyp, fr.residual, tol,
                                       f"s = {fr.s}, {fr.count} components {fr.detail}".strip()))
            result.checks.append(judge("factorization/closed-form-vs-definition", idx, hyp,
                                       fr.definition_residual, 1e-12, f"T = {label}"))
            counts[label] = counts.get(label, 0) + fr.count
    result.extra["components_checked"] = dict(sorted(counts.items()))
    return result
