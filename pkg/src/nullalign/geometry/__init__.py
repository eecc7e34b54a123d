"""Curvature of a metric at a point: jets, symbolic fields and derived tensors."""

from .curvature import (
    MAX_NABLA,
    CurvatureBundle,
    PointCurvature,
    bianchi_cf_residual,
    cov_deriv_jet,
    expr_jet,
    plebanski,
    riemann_symmetry_residuals,
)
from .fields import TensorFieldExpr, christoffel, cov_deriv, inverse_metric, metric_field, riemann
from .jets import Jet

__all__ = [
    "MAX_NABLA",
    "CurvatureBundle",
    "Jet",
    "PointCurvature",
    "TensorFieldExpr",
    "bianchi_cf_residual",
    "christoffel",
    "cov_deriv",
    "cov_deriv_jet",
    "expr_jet",
    "inverse_metric",
    "metric_field",
    "plebanski",
    "riemann",
    "riemann_symmetry_residuals",
]
