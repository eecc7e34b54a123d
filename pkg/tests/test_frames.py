import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_frame, random_metric, random_null
from nullalign import catalog
from nullalign.frames import (
    FrameError,
    boost,
    complete_frame_jet,
    complete_null_frame,
    frame_components,
    frame_connection,
    frame_gram,
    np_frame,
    null_rotation,
    spin,
)
from nullalign.geometry import jets as J
from nullalign.tensor_core import DOWN, UP, TensorValue

seeds = st.integers(0, 2**31 - 1)


class TestCompletion:
    @given(seeds, st.integers(3, 6))
    def test_normalized_and_completes_k(self, seed, n):
        rng = np.random.default_rng(seed)
        m = random_metric(n, rng)
        k = random_null(m, rng)
        f = complete_null_frame(k, m)
        assert f.normalization_residual() < 1e-10
        np.testing.assert_array_equal(f.k, k)

    def test_deterministic(self):
        rng = np.random.default_rng(4)
        m = random_metric(4, rng)
        k = random_null(m, rng)
        assert complete_null_frame(k, m).fingerprint() == complete_null_frame(k.copy(), m).fingerprint()

    def test_non_null_rejected(self):
        m = random_metric(4, np.random.default_rng(0))
        with pytest.raises(FrameError, match="not null"):
            complete_null_frame(np.array([1.0, 0, 0, 0]) + 0.5, m)

    def test_zero_rejected(self):
        m = random_metric(4, np.random.default_rng(0))
        with pytest.raises(FrameError, match="zero"):
            complete_null_frame(np.zeros(4), m)

    def test_seed_orthogonal_to_k_rejected(self):
        m = random_metric(4, np.random.default_rng(2))
        k = random_null(m, np.random.default_rng(3))
        with pytest.raises(FrameError, match="seed"):
            complete_null_frame(k, m, seed=k)

    def test_frame_field_jet_is_rigid(self):
        e = catalog.get("schwarzschild")
        pc = e.bundle().at([0.0, 3.3, 1.1, 0.4])
        E = complete_frame_jet(e.k_jet(pc.point), pc.g)
        gram = J.einsum("zb,yb->zy", J.einsum("za,ab->zb", E, pc.g.truncate(E.order)), E)
        np.testing.assert_allclose(gram.value, frame_gram(4), atol=1e-12)
        np.testing.assert_allclose(gram.c[..., 1:], 0.0, atol=1e-11)

    def test_frame_connection_antisymmetric(self):
        e = catalog.get("schwarzschild")
        pc = e.bundle().at([0.0, 3.3, 1.1, 0.4])
        E = complete_frame_jet(e.k_jet(pc.point), pc.g)
        G = frame_connection(E, pc.gamma, pc.g)
        # metric compatibility: g(e_a, ∇e_b) + g(e_b, ∇e_a) = 0 for a constant Gram matrix
        np.testing.assert_allclose(G + G.transpose(1, 0, 2), 0.0, atol=1e-11)


class TestLorentzTransformations:
    @given(seeds, st.integers(3, 6))
    def test_null_rotation(self, seed, n):
        rng = np.random.default_rng(seed)
        f = random_frame(n, rng)
        g = null_rotation(f, rng.normal(size=n - 2))
        assert g.normalization_residual() < 1e-9
        np.testing.assert_array_equal(g.k, f.k)

    @given(seeds, st.floats(0.1, 10))
    def test_boost(self, seed, lam):
        f = random_frame(4, np.random.default_rng(seed))
        g = boost(f, lam)
        assert g.normalization_residual() < 1e-9
        np.testing.assert_allclose(g.k, lam * f.k)

    def test_boost_zero_rejected(self):
        with pytest.raises(FrameError):
            boost(random_frame(4, np.random.default_rng(0)), 0.0)

    def test_spin(self):
        f = random_frame(5, np.random.default_rng(1))
        c, s = np.cos(0.3), np.sin(0.3)
        R = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        assert spin(f, R).normalization_residual() < 1e-10
        with pytest.raises(FrameError):
            spin(f, 2 * R)

    def test_wrong_rotation_size(self):
        with pytest.raises(FrameError):
            null_rotation(random_frame(4, np.random.default_rng(0)), [1.0])


class TestComponents:
    def test_up_and_down_slots_agree(self):
        rng = np.random.default_rng(7)
        f = random_frame(4, rng)
        A = rng.normal(size=(4, 4))
        Au = TensorValue(A @ f.metric.inverse, (DOWN, UP))
        np.testing.assert_allclose(frame_components(Au, f), frame_components(TensorValue(A, (DOWN, DOWN)), f),
                                   atol=1e-12)

    def test_metric_components_are_frame_gram(self):
        f = random_frame(5, np.random.default_rng(8))
        np.testing.assert_allclose(frame_components(f.metric.g, f), frame_gram(5), atol=1e-10)

    def test_complex_frame(self):
        nf = np_frame(random_frame(4, np.random.default_rng(9)))
        G = nf.gram()
        assert abs(G[2, 2]) < 1e-12 and G[2, 3] == pytest.approx(1.0)
        assert G[0, 1] == pytest.approx(1.0) and abs(G[0, 2]) < 1e-12

    def test_complex_frame_needs_dimension_4(self):
        with pytest.raises(FrameError):
            np_frame(random_frame(5, np.random.default_rng(0)))
