"""Random Lorentzian data shared by the tests."""

import itertools

import numpy as np

from nullalign.alignment import boost_weight, from_frame_components, weight_array
from nullalign.frames import NullFrame, complete_null_frame
from nullalign.tensor_core import MetricAtPoint, down


def random_metric(n, rng, spread=0.3, max_cond=100.0) -> MetricAtPoint:
    """g = Lᵀ η L with L close to the identity, so the signature stays Lorentzian.

    Nearly degenerate draws (cond(g) > max_cond) are redrawn.
    """
    eta = np.diag([-1.0] + [1.0] * (n - 1))
    while True:
        L = np.eye(n) + spread * rng.normal(size=(n, n))
        g = L.T @ eta @ L
        if np.linalg.cond(g) <= max_cond:
            return MetricAtPoint.from_matrix(g)


def random_null(m: MetricAtPoint, rng) -> np.ndarray:
    w, V = np.linalg.eigh(m.matrix)
    basis = V / np.sqrt(np.abs(w))
    s = rng.normal(size=m.dim - 1)
    s /= np.linalg.norm(s)
    return basis[:, 0] + basis[:, 1:] @ s


def random_frame(n, rng, spread=0.3) -> NullFrame:
    m = random_metric(n, rng, spread)
    return complete_null_frame(random_null(m, rng), m)


def random_tensor(n, r, rng):
    return rng.normal(size=(n,) * r)


def sym_last_pair(A):
    return (A + np.swapaxes(A, -1, -2)) / 2


def tachyonic_s(m, rng, lam):
    """S = λ(uu − h/3) for a random unit spacelike u, h = g − uu."""
    g = m.matrix
    w, V = np.linalg.eigh(g)
    u = V[:, -1] / np.sqrt(w[-1])
    v = u + 0.1 * rng.normal(size=4)
    if m.dot(v, v) > 0.5:
        u = v / np.sqrt(m.dot(v, v))
    ul = g @ u
    h = g - np.outer(ul, ul)
    return lam * (np.outer(ul, ul) - h / 3)


def trace_free_s(m, rng):
    A = rng.normal(size=(4, 4))
    A = A + A.T
    return A - np.einsum("ab,ab->", m.inverse, A) / 4 * m.matrix


def truncated(f, r, s, rng):
    """Random rank-r covariant tensor of boost order exactly s."""
    F = rng.normal(size=(f.dim,) * r)
    F[weight_array(f.dim, r) > s] = 0.0
    F[(weight_array(f.dim, r) == s)] += 1.0  # keep bo = s exactly
    return down(from_frame_components(F, f))


def words(n, r, bw):
    return [a for a in itertools.product(range(n), repeat=r) if boost_weight(a) == bw]
