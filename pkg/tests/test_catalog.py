import json

import numpy as np
import pytest

from nullalign import catalog
from nullalign.alignment import boost_order, petrov_pattern, s_eigenstructure, weyl_pnds_4d
from nullalign.congruence import classify_congruence, kappa_rho
from nullalign.metric_ir import parse_metric
from nullalign.verify import uniform_type_d
from nullalign.verify.context import PointContext

TYPE_BO = {"II": 0, "III": -1, "N": -2}


def measure(ctx, prop):
    """Re-derive one reference property from the pipeline at a point."""
    pc, f = ctx.pc, ctx.f
    if prop in ("curvature", "ricci", "weyl"):
        name = {"curvature": "Rm", "ricci": "Ric", "weyl": "C"}[prop]
        return "zero" if np.abs(pc.tensor(name).components).max() < 1e-12 else "non-zero"
    if prop == "weyl_type":
        return petrov_pattern(weyl_pnds_4d(pc.tensor("C"), f))
    if prop == "ricci_type":
        bo = boost_order(pc.tensor("S"), f).bo
        return {v: k for k, v in TYPE_BO.items()}.get(bo, str(bo))
    if prop in ("weyl_bo", "ricci_bo"):
        return boost_order(pc.tensor("C" if prop == "weyl_bo" else "S"), f).bo
    if prop == "congruence":
        return classify_congruence(kappa_rho(pc, ctx.k_jet, f))
    if prop in ("dim_E_lambda", "generic_type_ii"):
        rep = s_eigenstructure(pc.tensor("S"), pc.metric_at, f)
        return rep.dim_E_lambda if prop == "dim_E_lambda" else rep.generic_type_ii
    if prop == "s_structure":
        ud = uniform_type_d([pc.tensor("S").components, pc.tensor("S", 1).components], f)
        return "uniformly type D" if ud.holds else "not uniformly type D"
    raise KeyError(prop)


AUDIT = [(n, p) for n in catalog.names() for p in sorted(catalog.get(n).reference)]


class TestSelfAudit:
    @pytest.mark.parametrize("name, prop", AUDIT)
    def test_reference_property(self, name, prop):
        e = catalog.get(name)
        value, provenance = e.reference[prop]
        assert provenance in ("pipeline", "exact")
        for p in e.sample_points(3, seed=11):
            assert measure(PointContext(e, p), prop) == value

    @pytest.mark.parametrize("name", catalog.names())
    def test_k_is_null_in_the_box(self, name):
        e = catalog.get(name)
        for p in e.sample_points(4, seed=5):
            k = e.k_jet(p).value
            assert abs(e.bundle().at(p).metric_at.dot(k, k)) < 1e-12

    @pytest.mark.parametrize("name", catalog.names())
    def test_text_round_trip(self, name):
        e = catalog.get(name)
        again = parse_metric(e.to_text())
        assert all(again.g(a, b) is e.metric.g(a, b) for a in range(e.dim) for b in range(e.dim))

    @pytest.mark.parametrize("name", catalog.names())
    def test_json(self, name):
        data = json.loads(json.dumps(catalog.get(name).to_json()))
        assert data["name"] == name and len(data["k"]) == catalog.get(name).dim


class TestRegistry:
    def test_names_sorted(self):
        assert catalog.names() == sorted(catalog.names())

    def test_unknown(self):
        with pytest.raises(catalog.UnknownEntry, match="known"):
            catalog.get("kerr")

    def test_sampling_is_seeded_and_inside_box(self):
        e = catalog.get("schwarzschild")
        a, b = e.sample_points(10, seed=3), e.sample_points(10, seed=3)
        np.testing.assert_array_equal(a, b)
        assert np.all((a[:, 1] >= 2.5) & (a[:, 1] <= 10.0))

    def test_with_k_shares_the_bundle(self):
        e = catalog.get("schwarzschild")
        e.bundle()
        lower = e.with_k(["-1", "1/(1 - 2/r)", "0", "0"], k_lower=True)
        assert lower.bundle() is e.bundle()
        p = [0.0, 4.0, 1.0, 0.2]
        np.testing.assert_allclose(lower.k_jet(p).value, e.k_jet(p).value, atol=1e-14)

    def test_custom_entry(self):
        m = parse_metric("dim = 3\ncoords = u v x\ng[0][1] = 1\ng[2][2] = 1\ng[0][0] = x^3\n", "cubic")
        e = catalog.custom_entry(m, ["0", "1", "0"])
        assert e.name == "cubic" and e.box == {"u": (-1.0, 1.0), "v": (-1.0, 1.0), "x": (-1.0, 1.0)}
        with pytest.raises(ValueError):
            catalog.custom_entry(m, ["0", "1"])
