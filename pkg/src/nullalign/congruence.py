"""Optical scalars of a null vector field: κ_i, ρ_ij and the Kundt / Robinson–Trautman flags."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bilinear import nabla_k
from .frames import FrameError, NullFrame
from .geometry import jets as J
from .geometry.jets import Jet
from .tensor_core import DOWN, TensorValue

FLAG_TOL = 1e-9
MARGIN = 10.0


@dataclass
class CongruenceReport:
    kappa: np.ndarray
    rho: np.ndarray
    theta: float
    sigma: np.ndarray
    omega: np.ndarray
    flags: dict
    tol: float
    marginal: list
    frame_fingerprint: str

    def to_json(self) -> dict:
        return {
            "kappa": [float(x) for x in self.kappa],
            "rho": [[float(x) for x in row] for row in self.rho],
            "expansion": float(self.theta),
            "shear": [[float(x) for x in row] for row in self.sigma],
            "twist": [[float(x) for x in row] for row in self.omega],
            "flags": dict(sorted(self.flags.items())),
            "label": classify_congruence(self),
            "tol": self.tol,
            "marginal": sorted(self.marginal),
            "frame": self.frame_fingerprint,
        }


def check_null_field(pc, k_jet: Jet, tol: float = 1e-10) -> None:
    """g(k, k) must vanish at the point and to the jet's order around it."""
    kv = np.asarray(k_jet.value, dtype=float)
    if not np.any(kv):
        raise FrameError("k vanishes at the point")
    kk = J.einsum("a,a->", J.einsum("ab,b->a", pc.g, k_jet), k_jet)
    scale = max(1.0, float(np.abs(pc.g.value).max())) * float(np.abs(kv).max()) ** 2
    if float(np.abs(kk.c).max()) > tol * scale:
        raise FrameError(f"k is not null near the point (max |g(k,k)| coefficient {np.abs(kk.c).max():.3e})")


def optical_matrices(pc, k_jet: Jet, f: NullFrame):
    Dk = nabla_k(pc, k_jet)  # [b, a] = ∇_b k^a
    m_low = f.lowered[2:]
    kappa = np.einsum("b,ba,ia->i", f.k, Dk, m_low)
    rho = np.einsum("jb,ba,ia->ij", f.m, Dk, m_low)
    return kappa, rho


def kappa_rho(pc, k_jet: Jet, f: NullFrame, tol: float = FLAG_TOL) -> CongruenceReport:
    check_null_field(pc, k_jet)
    if np.abs(f.k - k_jet.value).max() > 1e-12 * max(1.0, np.abs(f.k).max()):
        raise FrameError("frame does not complete k at the point")
    kappa, rho = optical_matrices(pc, k_jet, f)
    d = rho.shape[0]
    theta = float(np.trace(rho)) / d
    sym = 0.5 * (rho + rho.T)
    sigma = sym - theta * np.eye(d)
    omega = 0.5 * (rho - rho.T)
    nk = float(np.abs(kappa).max())
    nr = float(np.abs(rho).max())
    ns = float(np.abs(sigma).max())
    nw = float(np.abs(omega).max())
    flags = {
        "geodesic": nk <= tol,
        "twist_free": nw <= tol,
        "shear_free": ns <= tol,
        "expansion_free": abs(theta) <= tol,
        "kundt": max(nk, nr) <= tol,
    }
    flags["robinson_trautman"] = flags["geodesic"] and flags["twist_free"] and flags["shear_free"] and abs(theta) > tol
    marginal = [name for name, v in (("kappa", nk), ("rho", nr), ("theta", abs(theta)), ("shear", ns), ("twist", nw))
                if tol < v <= MARGIN * tol]
    return CongruenceReport(kappa, rho, theta, sigma, omega, flags, tol, marginal, f.fingerprint())


def classify_congruence(report: CongruenceReport) -> str:
    fl = report.flags
    if fl["kundt"]:
        return "Kundt"
    if fl["robinson_trautman"]:
        return "Robinson-Trautman"
    if fl["geodesic"]:
        return "geodesic-only"
    return "generic"


def kundt_tensor_residual(pc, k_jet: Jet) -> TensorValue:
    """k_[a ∇_b] k_[c k_d], all-down; vanishes exactly for Kundt congruences."""
    check_null_field(pc, k_jet)
    g = pc.g.value
    k = g @ k_jet.value
    Dk = nabla_k(pc, k_jet) @ g  # ∇_b k_c
    X = np.einsum("a,bc,d->abcd", k, Dk, k)
    X = (X - X.transpose(1, 0, 2, 3)) / 2
    X = (X - X.transpose(0, 1, 3, 2)) / 2
    return TensorValue(X, (DOWN,) * 4)
