import json

import numpy as np
import pytest

from nullalign import catalog
from nullalign.bilinear import image_array
from nullalign.catalog import CatalogEntry
from nullalign.frames import frame_components
from nullalign.geometry import jets as J
from nullalign.metric_ir import parse_metric
from nullalign.verify import ANCHORS, SUITES, diagnose, dumps, run_all
from nullalign.verify import props as P
from nullalign.verify import registry
from nullalign.verify.conformal import (
    DDS_IDENTITIES,
    DS_IDENTITIES,
    classify_udot,
    evaluate_terms,
    gauge_frame,
    tachyonic_field,
    u_structure,
    uniform_type_d,
)
from nullalign.verify.context import PointContext
from nullalign.verify.records import (
    FAIL,
    FAILS,
    HOLDS,
    MARGINAL,
    NOT_APPLICABLE,
    PASS,
    SKIPPED,
    SKIPPED_MARGINAL,
    SuiteResult,
    combine,
    judge,
)
from nullalign.verify.surjectivity import (
    Q_WORD_AS_PRINTED,
    Q_WORDS,
    all_down,
    generic_frame,
    image_check,
    q_coefficients,
    truncate_boost,
)


def _entry(name, text, k, box):
    return CatalogEntry(name, parse_metric(text, name), tuple(k), box, {})


SWIRL = _entry("swirl", "dim = 4\ncoords = t x y z\ng[0][0] = -1\ng[1][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n",
               ["1", "cos(y)", "sin(y)", "0"], {c: (-1.0, 1.0) for c in "txyz"})
VAIDYA = _entry("vaidya", "dim = 4\ncoords = u r θ φ\ng[0][0] = -(1 - 2*u/r)\ng[0][1] = -1\n"
                "g[2][2] = r^2\ng[3][3] = r^2*sin(θ)^2\n",
                ["0", "1", "0", "0"], {"u": (1.0, 2.0), "r": (5.0, 8.0), "θ": (1.0, 2.0), "φ": (0.0, 1.0)})
RT3 = _entry("rt3", "dim = 4\ncoords = u r x y\ng[0][0] = 3*x/2\ng[0][1] = -1\ng[2][2] = r^2/x^3\n"
             "g[3][3] = r^2/x^3\n",
             ["0", "1", "0", "0"], {"u": (0.0, 1.0), "r": (1.0, 2.0), "x": (1.0, 2.0), "y": (0.0, 1.0)})


# --- records ---------------------------------------------------------------------------

class TestRecords:
    @pytest.mark.parametrize("hyp, residual, status", [
        (HOLDS, 1e-12, PASS),
        (HOLDS, 1e-3, FAIL),
        (HOLDS, None, FAIL),
        (HOLDS, float("nan"), FAIL),
        (FAILS, 0.0, SKIPPED),
        (MARGINAL, 0.0, SKIPPED_MARGINAL),
    ])
    def test_judge(self, hyp, residual, status):
        assert judge("a", 0, hyp, residual, 1e-10).status == status

    def test_combine(self):
        assert combine() == HOLDS
        assert combine(HOLDS, MARGINAL) == MARGINAL
        assert combine(MARGINAL, FAILS, HOLDS) == FAILS

    def test_suite_status(self):
        r = SuiteResult("s", "m", 0, [[0.0]])
        assert r.status == NOT_APPLICABLE and r.ok
        r.checks.append(judge("a", 0, FAILS, 1.0, 0.1))
        assert r.status == NOT_APPLICABLE
        r.checks.append(judge("a", 0, HOLDS, 0.0, 0.1))
        assert r.status == PASS
        r.checks.append(judge("b", 0, HOLDS, 1.0, 0.1))
        assert r.status == FAIL and not r.ok
        assert r.max_residual("a") == 0.0
        r.error = "boom"
        assert r.status == "error"

    def test_dumps_is_json_and_nan_free(self):
        r = SuiteResult("s", "m", 3, [[1.0, 2.0]])
        r.checks.append(judge("a", 0, HOLDS, float("nan"), 0.1))
        text = dumps([r])
        data = json.loads(text)
        assert data[0]["checks"][0]["residual"] is None
        assert text == dumps([r])


# --- relation sides ----------------------------------------------------------------------

def _synthetic(ctx):
    """Aligned fields of each boost order built from the frame jets."""
    k = ctx.k_nabla(0)
    g = ctx.pc.g.truncate(ctx.E.order)
    X = J.einsum("ab,b->a", g, ctx.E[2])
    Y = J.einsum("ab,b->a", g, ctx.E[3])

    def outer(a, b):
        return J.einsum("a,b->ab", a, b)

    def o4(A, B):
        return J.einsum("ab,cd->abcd", A, B)

    F = outer(k, X) - outer(X, k)
    G = outer(X, Y) - outer(Y, X)
    return {"S3": outer(k, X) + outer(X, k), "SN": outer(k, k), "W3": o4(F, G) + o4(G, F), "WN": o4(F, F)}


THREE = [P.ric3_kappa_spatial, P.ric3_kappa_boost, P.ric3_rho, P.weyl3_kappa_spatial, P.weyl3_kappa_01ij,
         P.weyl3_kappa_0i1j, P.weyl3_rho_a, P.weyl3_rho_b]
NULL = [P.ricn_kappa, P.ricn_rho, P.weyln_kappa]


def _close(lhs, rhs, tol=1e-12):
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    return float(np.abs(lhs - rhs).max(initial=0.0)) <= tol * (1.0 + float(np.abs(lhs).max(initial=0.0)))


@pytest.fixture(scope="module", params=[(SWIRL, (0.1, 0.2, 0.3, 0.4)),
                                        (catalog.get("schwarzschild"), (0.1, 3.3, 1.1, 0.4))],
                ids=["swirl", "schwarzschild"])
def synth_ctx(request):
    entry, point = request.param
    ctx = PointContext(entry, list(point))
    return ctx, _synthetic(ctx)


class TestRelationSides:
    @pytest.mark.parametrize("fn", THREE, ids=lambda f: f.__name__)
    def test_boost_order_minus_one(self, synth_ctx, fn):
        ctx, fields = synth_ctx
        ctx.set_field("S", fields["S3"])
        ctx.set_field("C", fields["W3"])
        assert _close(*fn(ctx))

    @pytest.mark.parametrize("fn", NULL, ids=lambda f: f.__name__)
    def test_boost_order_minus_two(self, synth_ctx, fn):
        ctx, fields = synth_ctx
        ctx.set_field("S", fields["SN"])
        ctx.set_field("C", fields["WN"])
        assert _close(*fn(ctx))

    @pytest.mark.parametrize("fn", [P.ric3_kappa_spatial, P.ric3_rho, P.weyl3_kappa_01ij, P.weyl3_rho_b,
                                    P.ricn_kappa, P.ricn_rho, P.weyln_kappa], ids=lambda f: f.__name__)
    def test_swirl_sides_are_nontrivial(self, fn):
        ctx = PointContext(SWIRL, [0.1, 0.2, 0.3, 0.4])
        fields = _synthetic(ctx)
        null = fn in NULL
        ctx.set_field("S", fields["SN" if null else "S3"])
        ctx.set_field("C", fields["WN" if null else "W3"])
        lhs, _ = fn(ctx)
        assert np.abs(lhs).max() > 0.05

    def test_kappa_coefficient_is_two(self):
        # a coefficient of one in front of κκS_11 would miss by exactly half
        ctx = PointContext(SWIRL, [0.1, 0.2, 0.3, 0.4])
        ctx.set_field("S", _synthetic(ctx)["SN"])
        lhs, rhs = P.ricn_kappa(ctx)
        assert _close(lhs, rhs)
        assert not _close(lhs, rhs / 2, 1e-3)

    def test_schwarzschild_k_relations(self):
        ctx = PointContext(catalog.get("schwarzschild"), [0.1, 3.3, 1.1, 0.4])
        lhs, rhs = P.k_geodesic(ctx)
        assert np.abs(lhs).max() < 1e-12 and np.abs(rhs).max() < 1e-12
        lhs, rhs = P.k_rho_square(ctx)
        assert np.abs(lhs).max() > 0.05
        assert _close(lhs, rhs)

    def test_vaidya_null_ricci(self):
        ctx = PointContext(VAIDYA, [1.3, 6.0, 1.2, 0.3])
        assert ctx.equals("S", 0, -2) == HOLDS
        assert ctx.at_most("S", 2, 0) == HOLDS
        lhs, rhs = P.ricn_rho(ctx)
        assert np.abs(lhs).max() > 5e-4
        assert _close(lhs, rhs, 1e-13)
        assert _close(*P.ricn_kappa(ctx))

    def test_robinson_trautman_type_iii(self):
        ctx = PointContext(RT3, [0.3, 1.5, 1.3, 0.2])
        assert np.abs(ctx.comps("Ric")).max() < 1e-12
        assert ctx.equals("C", 0, -1) == HOLDS
        assert ctx.at_most("C", 1, 0) == HOLDS
        np.testing.assert_allclose(ctx.rho, np.eye(2) * 2 / 3, atol=1e-12)
        for fn in (P.weyl3_rho_a, P.weyl3_rho_b):
            lhs, rhs = fn(ctx)
            assert np.abs(lhs).max() > 0.5
            assert _close(lhs, rhs, 1e-12)

    @pytest.mark.parametrize("suite", ["prop:Ric-III", "prop:Ric-N", "prop:Weyl-III", "prop:Weyl-N"])
    def test_schwarzschild_not_applicable(self, suite):
        res = registry.run_suite(suite, catalog.get("schwarzschild"), seed=0, count=3)
        assert res.status == NOT_APPLICABLE
        assert "not applicable" in res.note


# --- conformally flat identities ---------------------------------------------------------

class TestBracketExpansions:
    @pytest.mark.parametrize("ident", [i for i in DS_IDENTITIES if i.word], ids=lambda i: i.anchor)
    def test_first_derivative(self, ident):
        rng = np.random.default_rng(11)
        for _ in range(5):
            A = rng.normal(size=(4, 4, 4))
            A = A + A.transpose(0, 2, 1)
            br = float(image_array(A, 4)[ident.word][1])
            assert br == pytest.approx(evaluate_terms(ident.expansion, {"dS": A}), abs=1e-12)

    @pytest.mark.parametrize("ident", [i for i in DDS_IDENTITIES if i.word], ids=lambda i: i.anchor)
    def test_second_derivative(self, ident):
        rng = np.random.default_rng(12)
        for _ in range(5):
            B = rng.normal(size=(4, 4, 4, 4))
            B = B + B.transpose(0, 1, 3, 2)
            br = float(image_array(B, 4)[ident.word][1])
            assert br == pytest.approx(evaluate_terms(ident.expansion, {"ddS": B}), abs=1e-12)

    def test_evaluate_terms(self):
        arrays = {"a": np.arange(4.0), "b": np.eye(2)}
        assert evaluate_terms(((2, (("a", (3,)), ("b", (1, 1)))), (-1, (("a", (1,)),))), arrays) == 5.0


@pytest.fixture(scope="module")
def warped_ctx():
    e = catalog.get("warped4")
    return PointContext(e, e.sample_points(1, seed=3)[0])


class TestConformallyFlat:
    def test_gauge_and_uniform_type_d_on_warped(self, warped_ctx):
        gauge = gauge_frame(warped_ctx)
        assert gauge.d3 == 1
        assert gauge.s12_residual < 1e-12
        pc = warped_ctx.pc
        utd = uniform_type_d([pc.tensor("S").components, pc.tensor("S", 1).components], gauge.frame)
        assert utd.holds
        assert utd.residual < 1e-10

    def test_uniform_type_d_fails_on_confflat(self):
        e = catalog.get("confflat4")
        ctx = PointContext(e, e.sample_points(1, seed=3)[0])
        pc = ctx.pc
        utd = uniform_type_d([pc.tensor("S").components, pc.tensor("S", 1).components], ctx.f)
        assert not utd.holds

    def test_tachyonic_field_on_warped(self, warped_ctx):
        pc = warped_ctx.pc
        tf = tachyonic_field(pc)
        us = u_structure(pc, tf)
        S = pc.tensor("S").components
        gi = pc.ginv.value
        assert us.unit_residual < 1e-12
        assert us.form_residual < 1e-12
        assert us.structure_residual < 1e-10
        assert np.einsum("ab,ac,bd,cd->", S, gi, gi, S) == pytest.approx(4 / 3 * us.lam**2, rel=1e-10)
        x = warped_ctx.point[0]
        assert abs(us.theta) == pytest.approx(abs(np.tanh(x)), abs=1e-10)
        assert us.case == 3

    def test_tachyonic_rejects_zero(self):
        pc = catalog.get("minkowski4").bundle().at([0.1, 0.2, 0.3, 0.4])
        with pytest.raises(ValueError):
            tachyonic_field(pc)


class TestClassifyUdot:
    ginv = np.diag([-1.0, 1.0, 1.0, 1.0])

    @pytest.mark.parametrize("udot, case", [
        ([0.0, 0.0, 0.0, 0.0], 3),
        ([0.0, 0.3, 0.0, 0.0], 1),
        ([0.5, 0.5, 0.0, 0.0], 2),
        ([0.2, 0.3, 0.1, 0.0], 1),
    ])
    def test_cases(self, udot, case):
        assert classify_udot(udot, self.ginv, 1e-9)[0] == case

    def test_norm(self):
        assert classify_udot([0.0, 0.0, 2.0, 0.0], self.ginv, 1e-9)[1] == pytest.approx(4.0)

    def test_timelike_raises(self):
        with pytest.raises(ValueError, match="timelike"):
            classify_udot([1.0, 0.1, 0.0, 0.0], self.ginv, 1e-9)


# --- surjectivity ------------------------------------------------------------------------

class TestSurjectivityWords:
    @staticmethod
    def _image(C, f, word):
        F = frame_components(all_down(C, f.metric), f)
        return np.einsum("abcd,abcdj->j", q_coefficients(-1, word), image_array(F, 4))

    def test_printed_word_gives_zero_image(self):
        e = catalog.get("schwarzschild")
        ctx = PointContext(e, [0.0, 3.0, 1.0, 0.5])
        C = ctx.pc.tensor("C")
        assert abs(image_check(C, ctx.f, 0).psi + 1 / 27) < 1e-8
        # truncating to boost order -1 in a frame where k is not principal leaves Ψ_3 and Ψ_4
        fr = generic_frame(ctx.f, 4)
        C = truncate_boost(C, fr, lambda b: b <= -1)
        ic = image_check(C, fr, -1)
        assert abs(ic.psi) > 1e-3
        assert ic.residual < 1e-9
        np.testing.assert_allclose(self._image(C, fr, Q_WORDS[-1]), ic.image, atol=1e-14)
        assert np.abs(self._image(C, fr, Q_WORD_AS_PRINTED[-1])).max() < 1e-14


# --- diagnose -----------------------------------------------------------------------------

ROUTES = {
    "confflat4": "special derivatives route (Kundt branch)",
    "ds2r2": "generic type II Ricci route",
    "kundt4": "generic type II Ricci route",
    "minkowski3": "∇k type III route",
    "minkowski4": "∇k type III route",
    "minkowski4null": "∇k type III route",
    "pprad4": "Ricci type N route",
    "ppwave3": "Ricci type N route",
    "ppwave4": "Weyl type N route",
    "vsi4": "Ricci type III route",
    "warped4": "conformally flat tachyonic route (type D branch)",
    "schwarzschild": None,
}


class TestDiagnose:
    @pytest.mark.parametrize("name", sorted(ROUTES))
    def test_route_at_center(self, name):
        e = catalog.get(name)
        d = diagnose(e, e.center())
        assert d.route == ROUTES[name]
        assert d.consistent
        json.dumps(d.to_json())
        assert "verdict" in d.summary()

    def test_schwarzschild_measured(self):
        e = catalog.get("schwarzschild")
        d = diagnose(e, e.center())
        assert d.verdict.startswith("no prediction")
        assert "Robinson-Trautman" in d.measured["label"]

    def test_measurements(self):
        e = catalog.get("kundt4")
        d = diagnose(e, e.center(), N=2)
        m = d.measurements
        assert m["dim_E_lambda"] == 2
        assert m["generic_type_ii"]
        assert d.N == 2


# --- registry ----------------------------------------------------------------------------

@pytest.fixture(scope="module")
def full_run():
    return run_all(seed=7, count=2)


class TestRegistry:
    def test_anchor_partition(self):
        owners = {}
        for spec in SUITES:
            for a in spec.anchors:
                owners.setdefault(a, []).append(spec.name)
        assert set(owners) == set(ANCHORS)
        assert all(len(v) == 1 for v in owners.values())

    def test_every_anchor_emitted_and_passing(self, full_run):
        emitted, passed = {}, set()
        for r in full_run:
            assert r.error is None, (r.suite, r.metric, r.error)
            assert r.status != FAIL, (r.suite, r.metric)
            for c in r.checks:
                emitted.setdefault(c.anchor, set()).add(r.suite)
                if c.status == PASS:
                    passed.add(c.anchor)
        assert set(emitted) == set(ANCHORS)
        assert all(len(s) == 1 for s in emitted.values())
        assert passed == set(ANCHORS)

    def test_emitted_anchor_belongs_to_suite(self, full_run):
        by_name = {s.name: set(s.anchors) for s in SUITES}
        for r in full_run:
            assert {c.anchor for c in r.checks} <= by_name[r.suite]

    def test_get_suite(self):
        assert registry.get_suite("Ric-N").name == "prop:Ric-N"
        assert registry.get_suite("factorization").name == "factorization"
        with pytest.raises(registry.UnknownSuite):
            registry.get_suite("nope")

    def test_run_suite_reports_errors(self):
        flat3 = catalog.get("minkowski3")
        res = registry.run_suite("surjectivity", flat3, points=[[0.1, 0.2, 0.3]])
        assert res.error is None and res.status == NOT_APPLICABLE
        res = registry.run_suite("factorization", flat3, points=[[0.1]])
        assert res.status == "error"
        assert res.error

    def test_deterministic(self):
        entries = [catalog.get("ppwave4"), catalog.get("warped4")]
        a = dumps(run_all(entries, ["factorization", "conformally_flat"], seed=5, count=2))
        b = dumps(run_all(entries, ["factorization", "conformally_flat"], seed=5, count=2))
        assert a == b
        c = dumps(run_all(entries, ["factorization", "conformally_flat"], seed=6, count=2))
        assert a != c
