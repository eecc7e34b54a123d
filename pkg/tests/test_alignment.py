import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_frame
from nullalign import catalog
from nullalign.alignment import (
    boost_decomposition,
    boost_order,
    boost_order_components,
    boost_weight,
    from_frame_components,
    np_scalars,
    petrov_pattern,
    s_eigenstructure,
    sampled_bo_range,
    truncate_boost,
    type_label,
    weight_array,
    weyl_part,
    weyl_pnds_4d,
    weyl_symmetry_residual,
)
from nullalign.frames import boost, frame_components, null_rotation
from nullalign.tensor_core import DOWN, TensorError, TensorValue, antisymmetrize, down
from nullalign.verify.context import PointContext

seeds = st.integers(0, 2**31 - 1)


def truncated(f, r, s, rng):
    """Random all-down tensor whose frame components vanish above boost weight s."""
    F = rng.normal(size=(f.dim,) * r)
    F[weight_array(f.dim, r) > s] = 0.0
    return down(from_frame_components(F, f))


class TestWeights:
    @pytest.mark.parametrize("alpha, bw", [((0, 0, 1), 1), ((1, 1, 2), -2), ((2, 3), 0), ((0, 1, 0, 1), 0)])
    def test_boost_weight(self, alpha, bw):
        assert boost_weight(alpha) == bw

    def test_weight_array(self):
        w = weight_array(4, 3)
        for idx in itertools.product(range(4), repeat=3):
            assert w[idx] == boost_weight(idx)

    @pytest.mark.parametrize("bo, label", [(None, "zero"), (2, "not special"), (0, "II"), (-1, "III"), (-3, "N")])
    def test_labels(self, bo, label):
        assert type_label(bo) == label


class TestBoostOrder:
    @given(seeds, st.integers(3, 5), st.integers(1, 3), st.data())
    def test_invariant_under_null_rotation_about_k(self, seed, n, r, data):
        rng = np.random.default_rng(seed)
        f = random_frame(n, rng)
        s = data.draw(st.integers(-r, r))
        T = truncated(f, r, s, rng)
        g = null_rotation(f, rng.normal(size=n - 2))
        assert boost_order(T, f).bo == s
        assert boost_order(T, g).bo == s

    @given(seeds, st.floats(0.2, 5.0))
    def test_components_scale_with_boost(self, seed, lam):
        rng = np.random.default_rng(seed)
        f = random_frame(4, rng)
        T = down(rng.normal(size=(4, 4, 4)))
        F, G = frame_components(T, f), frame_components(T, boost(f, lam))
        np.testing.assert_allclose(G, F * lam ** weight_array(4, 3).astype(float), rtol=1e-9, atol=1e-10)

    @given(seeds, st.integers(3, 5))
    def test_decomposition_sums_to_tensor(self, seed, n):
        rng = np.random.default_rng(seed)
        f = random_frame(n, rng)
        T = down(rng.normal(size=(n, n, n)))
        parts = boost_decomposition(T, f)
        total = sum(p.components for p in parts.values())
        np.testing.assert_allclose(total, T.components, atol=1e-9)
        for b, p in parts.items():
            rep = boost_order(p, f)
            assert rep.bo in (b, None)

    def test_truncation(self):
        rng = np.random.default_rng(0)
        f = random_frame(4, rng)
        T = down(rng.normal(size=(4, 4)))
        assert boost_order(truncate_boost(T, f, lambda b: b <= -1), f).bo == -1

    def test_zero_tensor(self):
        rep = boost_order(down(np.zeros((4, 4))), random_frame(4, np.random.default_rng(0)))
        assert rep.is_zero and rep.label == "zero"

    def test_threshold_is_relative(self):
        F = np.zeros((4, 4))
        F[1, 1] = 1e6
        F[0, 2] = 1e-4  # bw 1, below tol_rel * 1e6
        assert boost_order_components(F).bo == -2

    @pytest.mark.parametrize("p", [2, 3])
    def test_p_forms_have_boost_order_one(self, p):
        rng = np.random.default_rng(p)
        f = random_frame(5, rng)
        T = antisymmetrize(down(rng.normal(size=(5,) * p)), tuple(range(p)))
        assert boost_order(T, f).bo == 1

    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_generic_tensor_attains_rank(self, r):
        rng = np.random.default_rng(r)
        assert boost_order(down(rng.normal(size=(4,) * r)), random_frame(4, rng)).bo == r


class TestWeyl:
    @given(seeds, st.integers(4, 6))
    def test_weyl_part_is_weyl_like(self, seed, n):
        from helpers import random_metric

        rng = np.random.default_rng(seed)
        m = random_metric(n, rng)
        W = weyl_part(rng.normal(size=(n,) * 4), m)
        assert weyl_symmetry_residual(W, m.inverse) < 1e-10

    def test_schwarzschild_psi2(self):
        ctx = PointContext(catalog.get("schwarzschild"), [0.0, 3.0, 1.0, 0.2])
        psi = np_scalars(ctx.pc.tensor("C"), ctx.f).psi
        assert psi[2] == pytest.approx(-1 / 27, abs=1e-12)
        assert max(abs(psi[i]) for i in (0, 1, 3, 4)) < 1e-12

    def test_ppwave_psi4(self):
        # g_uu = x² − y²: Ψ4 = −½ ∂_m̄∂_m̄ g_uu = −1
        ctx = PointContext(catalog.get("ppwave4"), [0.1, 0.2, 0.3, 0.4])
        psi = np_scalars(ctx.pc.tensor("C"), ctx.f).psi
        assert psi[4] == pytest.approx(-1.0, abs=1e-12)

    def test_np_rejects_non_weyl(self):
        f = random_frame(4, np.random.default_rng(0))
        with pytest.raises(TensorError):
            np_scalars(down(np.random.default_rng(1).normal(size=(4,) * 4)), f)

    @pytest.mark.parametrize("name, pattern", [
        ("schwarzschild", "D"), ("ppwave4", "N"), ("vsi4", "III"), ("kundt4", "II"),
    ])
    def test_petrov(self, name, pattern):
        e = catalog.get(name)
        ctx = PointContext(e, e.sample_points(1, 2)[0])
        pnds = weyl_pnds_4d(ctx.pc.tensor("C"), ctx.f)
        assert petrov_pattern(pnds) == pattern
        assert sum(p.multiplicity for p in pnds) == 4

    def test_pnds_of_zero_weyl(self):
        ctx = PointContext(catalog.get("warped4"), [0.1, 0.2, 0.3, 0.4])
        with pytest.raises(TensorError, match="zero"):
            weyl_pnds_4d(ctx.pc.tensor("C"), ctx.f)


class TestRicciEigenstructure:
    def test_generic_type_ii(self):
        ctx = PointContext(catalog.get("ds2r2"), [0.1, 0.2, 0.3, 0.4])
        rep = s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at, ctx.f)
        assert rep.aligned and rep.dim_E_lambda == 2 and rep.generic_type_ii

    def test_tachyonic_entry_has_zero_plebanski(self):
        ctx = PointContext(catalog.get("warped4"), [0.1, 0.2, 0.3, 0.4])
        assert s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at).plebanski_zero is True

    def test_finds_null_eigendirection_without_frame(self):
        ctx = PointContext(catalog.get("pprad4"), [0.1, 0.2, 0.3, 0.4])
        rep = s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at)
        assert rep.aligned and rep.lam == pytest.approx(0.0, abs=1e-12)

    def test_trivial(self):
        ctx = PointContext(catalog.get("ppwave4"), [0.1, 0.2, 0.3, 0.4])
        assert s_eigenstructure(ctx.pc.tensor("S"), ctx.pc.metric_at).trivial


class TestSampledRange:
    def test_ppwave_weyl(self):
        ctx = PointContext(catalog.get("ppwave4"), [0.1, 0.2, 0.3, 0.4])
        out = sampled_bo_range(ctx.pc.tensor("C"), ctx.pc.metric_at, count=50, extra=[ctx.f.k])
        assert out["bo_min"] == -2 and out["bo_max"] == 2 and out["sampled"]

    def test_zero_tensor(self):
        ctx = PointContext(catalog.get("minkowski4"), [0, 0, 0, 0])
        out = sampled_bo_range(ctx.pc.tensor("C"), ctx.pc.metric_at, count=5)
        assert out["bo_min"] is None
