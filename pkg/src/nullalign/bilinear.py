"""The bilinear map φ(X, Y), the bracket ⟨T|k|Q⟩ and the factorization check.

⟨T|k|Q⟩ takes a tensor T of boost order s and Q of boost order <= -s-1 to
the screen quotient c⊥/c, with components w_j = φ(T, Q)_{ab} m_j^a l^b in the
basis {π(m_j)}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .alignment import TOL_ABS, TOL_REL, boost_order_components, boost_weight, weight_array
from .frames import NullFrame, frame_components, frame_jet_components
from .geometry.jets import Jet
from .tensor_core import DOWN, UP, MetricAtPoint, TensorError, TensorValue, all_down, all_up

RANK_TOL = 1e-8


class DomainViolation(ValueError):
    pass


@dataclass
class QuotientVector:
    components: np.ndarray
    frame_fingerprint: str
    note: str = ""

    def norm2(self) -> float:
        return float(self.components @ self.components)

    def to_json(self) -> dict:
        return {
            "components": [float(x) for x in self.components],
            "frame": self.frame_fingerprint,
            "note": self.note,
        }


def phi(X: TensorValue, Y: TensorValue, m: MetricAtPoint) -> TensorValue:
    """φ(X,Y)_ab = Σ_i X_{..b..} Y^{..a..} − X_{..a..} Y^{..b..} (slot i free)."""
    if X.rank != Y.rank:
        raise TensorError(f"rank mismatch: {X.rank} vs {Y.rank}")
    if X.rank == 0:
        raise TensorError("φ needs rank >= 1")
    Xd = all_down(X, m)
    Yu = all_up(Y, m)
    r = X.rank
    acc = np.zeros((m.dim, m.dim), dtype=np.result_type(Xd, Yu, float))
    axes = list(range(r))
    for i in range(r):
        others = [a for a in axes if a != i]
        A = np.tensordot(Xd, Yu, axes=(others, others))  # A[b, a'] = X_{..b..} Y^{..a'..}
        A = A @ m.matrix  # lower a'
        acc += A.T - A
    return TensorValue(acc, (DOWN, DOWN))


def monomial_tensor(f: NullFrame, alpha) -> TensorValue:
    """Q = e_alpha1 ⊗ ... ⊗ e_alphar as a contravariant tensor."""
    comps = np.array(1.0)
    for a in alpha:
        comps = np.multiply.outer(comps, f.vectors[a])
    return TensorValue(comps, (UP,) * len(alpha))


def measured_bo(T: TensorValue, f: NullFrame, tol_abs=TOL_ABS, tol_rel=TOL_REL):
    return boost_order_components(frame_components(T, f), tol_abs, tol_rel).bo


def bracket(T: TensorValue, f: NullFrame, Q: TensorValue, tol_abs=TOL_ABS, tol_rel=TOL_REL,
            l_vector=None) -> QuotientVector:
    """⟨T|k|Q⟩ from the definition via φ.

    ``l_vector`` replaces the frame's l (any null vector with g(k, l) = 1).
    """
    s = measured_bo(T, f, tol_abs, tol_rel)
    if s is None:
        return QuotientVector(np.zeros(f.dim - 2), f.fingerprint(), "zero tensor")
    sq = measured_bo(Q, f, tol_abs, tol_rel)
    if sq is not None and sq > -s - 1:
        raise DomainViolation(f"bo(Q) = {sq} exceeds -bo(T) - 1 = {-s - 1}")
    l = f.l if l_vector is None else np.asarray(l_vector, dtype=float)  # noqa: E741
    P = phi(T, Q, f.metric).components
    w = np.einsum("ab,ja,b->j", P, f.m, l)
    return QuotientVector(w, f.fingerprint())


def image_array(F: np.ndarray, n: int) -> np.ndarray:
    """Closed-form bracket for every multi-index at once.

    Returns IM[alpha..., j-2] = Σ_i (δ(α_i = j) F_{α_i→1} − δ(α_i = 0) F_{α_i→j}),
    valid for bw(alpha) = s + 1 when bo(F) <= s.
    """
    r = F.ndim
    IM = np.zeros(F.shape + (n - 2,), dtype=F.dtype)
    for i in range(r):
        F1 = np.take(F, 1, axis=i)
        for j in range(2, n):
            Fj = np.take(F, j, axis=i)
            sl = [slice(None)] * r
            sl[i] = j
            IM[tuple(sl) + (j - 2,)] += F1
            sl[i] = 0
            IM[tuple(sl) + (j - 2,)] -= Fj
    return IM


def bracket_monomial(T: TensorValue, f: NullFrame, alpha, tol_abs=TOL_ABS, tol_rel=TOL_REL,
                     s: int | None = None) -> QuotientVector:
    """⟨T|k|e_alpha⟩ from the frame expansion."""
    F = frame_components(T, f)
    if s is None:
        s = boost_order_components(F, tol_abs, tol_rel).bo
    if s is None:
        return QuotientVector(np.zeros(f.dim - 2), f.fingerprint(), "zero tensor")
    bw = boost_weight(alpha)
    if bw < s + 1:
        raise DomainViolation(f"bw(alpha) = {bw} is below bo(T) + 1 = {s + 1}")
    if bw > s + 1:
        return QuotientVector(np.zeros(f.dim - 2), f.fingerprint())
    w = np.zeros(f.dim - 2)
    for i, a in enumerate(alpha):
        if a >= 2:
            w[a - 2] += F[tuple(alpha[:i]) + (1,) + tuple(alpha[i + 1:])]
        elif a == 0:
            for j in range(2, f.dim):
                w[j - 2] -= F[tuple(alpha[:i]) + (j,) + tuple(alpha[i + 1:])]
    return QuotientVector(w, f.fingerprint())


# --- K_N subspace -----------------------------------------------------------

def _contract_pair(A: np.ndarray, B: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    if A.ndim + B.ndim <= 6:
        return np.multiply.outer(A, B)
    return np.tensordot(A @ ginv, B, axes=([A.ndim - 1], [0]))


def curvature_generators(pc, N: int, policy: str = "curvature-basic") -> dict:
    """Named generator tensors (all-down arrays) for K_N."""
    if policy not in ("curvature-basic", "products-2"):
        raise ValueError(f"unknown generator policy {policy!r}")
    gens = {}
    for m in range(N):
        gens["nabla^%d Rm" % m if m else "Rm"] = pc.jet("Rm", m).value
    gens["Ric"] = pc.jet("Ric").value
    gens["S"] = pc.jet("S").value
    gens["C"] = pc.jet("C").value
    if policy == "products-2":
        base = {k: gens[k] for k in ("Ric", "S", "C", "Rm")}
        for (a, A), (b, B) in itertools.combinations_with_replacement(sorted(base.items()), 2):
            gens[f"{a}*{b}"] = _contract_pair(A, B, pc.ginv.value)
    return dict(sorted(gens.items()))


@dataclass
class KSubspace:
    basis: np.ndarray  # rows: orthonormal vectors in the π(m_j) basis
    d: int
    used: list
    skipped: dict
    frame_fingerprint: str
    lower_bound: bool = True
    singular_values: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "lower_bound": self.lower_bound,
            "basis": [[float(x) for x in row] for row in self.basis],
            "generators_used": self.used,
            "generators_skipped": self.skipped,
            "frame": self.frame_fingerprint,
        }


def k_subspace_from(gens: dict, f: NullFrame, tol_abs=TOL_ABS, tol_rel=TOL_REL, rank_tol=RANK_TOL) -> KSubspace:
    n = f.dim
    rows = []
    used, skipped = [], {}
    scale = 0.0
    for name in sorted(gens):
        T = np.asarray(gens[name])
        F = frame_components(T, f)
        bo = boost_order_components(F, tol_abs, tol_rel).bo
        if bo is None:
            skipped[name] = "zero tensor"
            continue
        if bo > 0:
            skipped[name] = f"bo = {bo} > 0"
            continue
        IM = image_array(F, n)
        mask = weight_array(n, F.ndim) == 1
        rows.append(IM[mask])
        scale = max(scale, float(np.abs(F).max()))
        used.append(name)
    if not rows:
        return KSubspace(np.zeros((0, n - 2)), 0, used, skipped, f.fingerprint())
    A = np.vstack(rows)
    if A.size == 0 or not np.any(A):
        return KSubspace(np.zeros((0, n - 2)), 0, used, skipped, f.fingerprint(), singular_values=[])
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    floor = tol_abs + tol_rel * scale  # images at noise level do not count
    d = int(np.sum((s >= rank_tol * s[0]) & (s > floor)))
    return KSubspace(vt[:d], d, used, skipped, f.fingerprint(), singular_values=[float(x) for x in s])


def k_subspace(pc, f: NullFrame, N: int, policy: str = "curvature-basic", tol_abs=TOL_ABS,
               tol_rel=TOL_REL) -> KSubspace:
    """Basis and dimension of K_N at a point (a lower bound on the full d_N)."""
    if not 1 <= N <= 3:
        raise ValueError("N must be 1, 2 or 3")
    return k_subspace_from(curvature_generators(pc, N, policy), f, tol_abs, tol_rel)


# --- factorization ------------------------------------------------------------

@dataclass
class FactorizationResult:
    status: str  # "checked", "zero tensor", "hypothesis fails"
    s: int | None
    residual: float
    definition_residual: float
    count: int
    detail: str = ""


def nabla_k(pc, k_jet: Jet) -> np.ndarray:
    """∇_b k^a at the point, derivative slot first."""
    return k_jet.grad().value + np.einsum("abc,c->ba", pc.gamma.value, k_jet.value)


def factorization_check(pc, k_jet: Jet, T_jet: Jet, E_jet: Jet, tol_abs=TOL_ABS, tol_rel=TOL_REL,
                        definition_samples: int = 4, rng: np.random.Generator | None = None) -> FactorizationResult:
    """Check X^a(∇_a T)Q = π(X^a∇_a k)·⟨T|k|Q⟩ for X = e_beta, Q = e_alpha, bw(alpha) >= s+1.

    ``E_jet`` is a frame field jet (order >= 1) completing ``k_jet``.  The
    hypothesis bo(T) = s is measured at the point and to first order.
    """
    from .frames import NullFrame  # local to keep the import graph flat

    n = pc.n
    E0 = E_jet.value
    f = NullFrame(E0, pc.metric_at)
    Tval = T_jet.value
    F = frame_components(np.asarray(Tval), f)
    scale = float(np.abs(F).max()) if F.size else 0.0
    rep = boost_order_components(F, tol_abs, tol_rel)
    s = rep.bo
    if s is None:
        return FactorizationResult("zero tensor", None, 0.0, 0.0, 0)
    r = F.ndim
    w = weight_array(n, r)
    FJ = frame_jet_components(T_jet.truncate(1), E_jet.truncate(1))
    dF = FJ.grad().value  # dF[c, alpha...] coordinate derivative of frame components
    high = w > s
    thr = tol_abs + tol_rel * max(scale, 1.0)
    drift = float(np.abs(dF[:, high]).max()) if high.any() else 0.0
    if drift > thr * 10:
        return FactorizationResult("hypothesis fails", s, np.nan, np.nan, 0,
                                   f"components with bw > {s} have non-zero derivative ({drift:.3e})")
    DT = frame_components(pc.nabla(T_jet).value, f)  # DT[beta, alpha...]
    Dk = nabla_k(pc, k_jet)  # [b, a]
    Dk_frame = np.einsum("yb,ba,ja->yj", E0, Dk, f.lowered[2:])  # (∇_beta k)^j
    IM = image_array(F, n)
    rhs = np.einsum("yj,...j->y...", Dk_frame, IM)
    rhs = np.where((w == s + 1)[None], rhs, 0.0)
    mask = w >= s + 1
    lhs = DT[:, mask]
    rr = rhs[:, mask]
    res = np.abs(lhs - rr) / (1.0 + np.abs(lhs) + np.abs(rr))
    residual = float(res.max()) if res.size else 0.0
    # cross-check the closed form against the φ-definition on a few multi-indices
    def_res = 0.0
    alphas = [a for a in itertools.product(range(n), repeat=r) if boost_weight(a) == s + 1]
    if alphas and definition_samples:
        rng = rng or np.random.default_rng(0)
        pick = rng.choice(len(alphas), size=min(definition_samples, len(alphas)), replace=False)
        Tv = TensorValue(np.asarray(Tval), (DOWN,) * r)
        for i in sorted(pick):
            a = alphas[i]
            q = bracket(Tv, f, monomial_tensor(f, a), tol_abs, tol_rel).components
            def_res = max(def_res, float(np.abs(q - IM[a]).max()) / (1.0 + scale))
    return FactorizationResult("checked", s, residual, def_res, int(lhs.size))
