import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import random_metric, tachyonic_s, trace_free_s
from nullalign import catalog
from nullalign.geometry import (
    CurvatureBundle,
    Jet,
    bianchi_cf_residual,
    christoffel,
    cov_deriv,
    plebanski,
    riemann,
    riemann_symmetry_residuals,
)
from nullalign.geometry import jets as J
from nullalign.metric_ir import NodeCapExceeded, parse_metric
from nullalign.tensor_core import DOWN, TensorError, TensorValue

ENTRIES = catalog.names()


def point(name, seed=3):
    return catalog.get(name).sample_points(1, seed)[0]


class TestJets:
    def test_product_rule_through_reciprocal(self):
        x = Jet.coordinate(0, 0.5, 2, 4)
        y = Jet.coordinate(1, -0.3, 2, 4)
        f = J.reciprocal(J.multiply(x, x) + y * 0 + 1.0)
        # d/dx 1/(1+x²) at 0.5
        assert f.grad().value[0] == pytest.approx(-2 * 0.5 / (1 + 0.25) ** 2)
        assert f.grad().value[1] == 0.0

    @pytest.mark.parametrize("fn, ref, dref", [
        (J.exp, np.exp, np.exp),
        (J.sin, np.sin, np.cos),
        (J.cosh, np.cosh, np.sinh),
        (J.log, np.log, lambda v: 1 / v),
        (J.sqrt, np.sqrt, lambda v: 0.5 / np.sqrt(v)),
        (J.cbrt, np.cbrt, lambda v: v ** (-2 / 3) / 3),
    ])
    def test_elementary_functions(self, fn, ref, dref):
        x = Jet.coordinate(0, 0.7, 1, 3)
        f = fn(x)
        assert f.value == pytest.approx(ref(0.7))
        assert f.grad().value[0] == pytest.approx(dref(0.7))

    def test_matrix_inverse(self):
        rng = np.random.default_rng(0)
        A = Jet(rng.normal(size=(3, 3, 10)) + np.eye(3)[:, :, None] * np.eye(10)[0] * 4, 3, 2)
        B = J.matrix_inverse(A)
        I = J.einsum("ab,bc->ac", A, B)
        np.testing.assert_allclose(I.c[..., 0], np.eye(3), atol=1e-12)
        np.testing.assert_allclose(I.c[..., 1:], 0.0, atol=1e-12)


class TestSymbolicAgainstJets:
    @pytest.mark.parametrize("name", ["schwarzschild", "kundt4", "warped4", "ppwave3"])
    def test_riemann(self, name):
        e = catalog.get(name)
        p = point(name)
        sym = riemann(e.metric).evaluate(p).components
        np.testing.assert_allclose(e.bundle().at(p).tensor("Rm").components, sym, atol=1e-11)

    @pytest.mark.parametrize("name", ["kundt4", "ppwave3"])
    def test_nabla_riemann(self, name):
        e = catalog.get(name)
        p = point(name)
        sym = cov_deriv(riemann(e.metric), e.metric).evaluate(p).components
        np.testing.assert_allclose(e.bundle().at(p).tensor("Rm", 1).components, sym, atol=1e-10)

    def test_christoffel_schwarzschild(self):
        e = catalog.get("schwarzschild")
        G = christoffel(e.metric).evaluate([0.0, 3.0, 1.0, 0.0]).components
        assert G[1, 0, 0] == pytest.approx((1 - 2 / 3) / 9)  # M(r−2M)/r³
        assert G[0, 0, 1] == pytest.approx(1 / (3 * (3 - 2)))  # M/(r(r−2M))

    def test_symbolic_node_cap(self):
        with pytest.raises(NodeCapExceeded):
            riemann(catalog.get("schwarzschild").metric, node_cap=100)


class TestCurvatureOracles:
    @pytest.mark.parametrize("r", [2.5, 3.0, 7.0])
    def test_schwarzschild_kretschmann(self, r):
        pc = catalog.get("schwarzschild").bundle().at([0.0, r, 1.0, 0.3])
        Rd = pc.tensor("Rm").components
        gi = pc.ginv.value
        Ru = np.einsum("ae,bf,cg,dh,efgh->abcd", gi, gi, gi, gi, Rd)
        assert float(np.einsum("abcd,abcd->", Rd, Ru)) == pytest.approx(48 / r**6, rel=1e-12)

    def test_schwarzschild_is_vacuum(self):
        pc = catalog.get("schwarzschild").bundle().at([0.0, 4.0, 1.0, 0.3])
        assert np.abs(pc.tensor("Ric").components).max() < 1e-13

    @pytest.mark.parametrize("text, R", [
        ("dim = 3\ncoords = a b c\nsignature = any\ng[0][0] = 1\ng[1][1] = sin(a)^2\ng[2][2] = 1\n", 2.0),
        ("dim = 3\ncoords = t r z\ng[0][0] = -(1 - r^2)\ng[1][1] = 1/(1 - r^2)\ng[2][2] = 1\n", 2.0),
    ])
    def test_sign_convention(self, text, R):
        # unit 2-sphere and static 2D de Sitter, each times a line: scalar curvature +2
        pc = CurvatureBundle(parse_metric(text)).at([1.0, 0.3, 0.0])
        assert float(pc.jet("R").value) == pytest.approx(R)

    def test_ads2_times_plane_ricci(self):
        # −v² du² + 2 du dv is 2D anti-de Sitter: Ric = −g on that factor
        pc = catalog.get("ds2r2").bundle().at([0.2, 0.4, 0.1, -0.3])
        ric = pc.tensor("Ric").components
        g = pc.g.value
        np.testing.assert_allclose(ric[:2, :2], -g[:2, :2], atol=1e-13)
        np.testing.assert_allclose(ric[2:, :], 0.0, atol=1e-13)
        assert float(pc.jet("R").value) == pytest.approx(-2.0)

    @pytest.mark.parametrize("name", ["warped4", "confflat4", "pprad4"])
    def test_conformally_flat_entries(self, name):
        pc = catalog.get(name).bundle().at(point(name))
        assert np.abs(pc.tensor("C").components).max() < 1e-12
        assert np.abs(bianchi_cf_residual(pc).components).max() < 1e-12

    @pytest.mark.parametrize("name", ENTRIES)
    def test_algebraic_symmetries(self, name):
        pc = catalog.get(name).bundle().at(point(name))
        assert riemann_symmetry_residuals(pc.tensor("Rm").components).max() < 1e-12
        C = pc.tensor("C").components
        assert riemann_symmetry_residuals(C, pc.ginv.value).max() < 1e-12

    @pytest.mark.parametrize("name", ENTRIES)
    def test_second_bianchi(self, name):
        pc = catalog.get(name).bundle().at(point(name))
        D = pc.tensor("Rm", 1).components  # D[e, a, b, c, d] = ∇_e R_abcd
        cyc = D + D.transpose(3, 1, 2, 4, 0) + D.transpose(4, 1, 2, 0, 3)
        scale = 1 + np.abs(D).max()
        assert np.abs(cyc).max() / scale < 1e-11

    def test_trace_free_ricci(self):
        pc = catalog.get("kundt4").bundle().at(point("kundt4"))
        assert abs(np.einsum("ab,ab->", pc.ginv.value, pc.tensor("S").components)) < 1e-12

    def test_nabla_metric_vanishes(self):
        pc = catalog.get("kundt4").bundle().at(point("kundt4"))
        assert np.abs(pc.nabla(pc.g.truncate(3)).value).max() < 1e-12

    def test_ceiling(self):
        pc = catalog.get("minkowski4").bundle().at([0, 0, 0, 0])
        with pytest.raises(ValueError, match="ceiling"):
            pc.jet("Rm", 4)

    def test_point_results_are_memoized(self):
        b = catalog.get("ppwave4").bundle()
        assert b.at([0.1, 0.2, 0.3, 0.4]) is b.at((0.1, 0.2, 0.3, 0.4))

    def test_bundle_rejects_large_ceiling(self):
        with pytest.raises(ValueError):
            CurvatureBundle(catalog.get("ppwave4").metric, m_max=4)

    def test_derivative_tables_within_node_cap(self):
        for name in ENTRIES:
            assert catalog.get(name).bundle().table.node_count < 10**6


class TestPlebanski:
    @given(st.integers(0, 2**31 - 1))
    def test_symmetries_and_traces(self, seed):
        rng = np.random.default_rng(seed)
        m = random_metric(4, rng)
        P = plebanski(TensorValue(trace_free_s(m, rng), (DOWN, DOWN)), m).components
        assert riemann_symmetry_residuals(P, m.inverse).max() < 1e-10 * max(1.0, np.abs(P).max())

    @given(st.integers(0, 2**31 - 1), st.floats(-3, 3).filter(lambda x: abs(x) > 0.1))
    def test_vanishes_on_tachyonic_form(self, seed, lam):
        rng = np.random.default_rng(seed)
        m = random_metric(4, rng)
        S = tachyonic_s(m, rng, lam)
        P = plebanski(TensorValue(S, (DOWN, DOWN)), m).components
        # P is quadratic in S through g⁻¹
        assert np.abs(P).max() <= 1e-12 * max(1.0, np.abs(S).max()) ** 2 * max(1.0, np.abs(m.inverse).max())

    def test_rejects_trace(self):
        m = random_metric(4, np.random.default_rng(0))
        with pytest.raises(TensorError, match="trace-free"):
            plebanski(TensorValue(m.matrix, (DOWN, DOWN)), m)


def test_metric_signature_any_allows_riemannian():
    m = parse_metric("dim = 3\ncoords = a b c\nsignature = any\ng[0][0] = 1\ng[1][1] = 1\ng[2][2] = 1\n")
    pc = CurvatureBundle(m).at([0, 0, 0])
    assert np.abs(pc.tensor("Rm").components).max() == 0.0
