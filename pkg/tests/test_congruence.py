import numpy as np
import pytest

from nullalign import catalog
from nullalign.catalog import custom_entry
from nullalign.congruence import check_null_field, classify_congruence, kappa_rho, kundt_tensor_residual
from nullalign.frames import FrameError
from nullalign.metric_ir import parse_metric
from nullalign.verify.context import PointContext

FLAT = parse_metric("dim = 4\ncoords = t x y z\ng[0][0] = -1\ng[1][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n", "flat")


def report(entry, p):
    ctx = PointContext(entry, p)
    return kappa_rho(ctx.pc, ctx.k_jet, ctx.f), ctx


class TestGroundTruth:
    def test_ppwave_is_kundt(self):
        rep, _ = report(catalog.get("ppwave4"), [0.1, 0.2, 0.3, 0.4])
        assert classify_congruence(rep) == "Kundt"
        assert np.abs(rep.kappa).max() <= 1e-12 and np.abs(rep.rho).max() <= 1e-12

    @pytest.mark.parametrize("r", [2.7, 3.3, 8.0])
    def test_schwarzschild_radial_expansion(self, r):
        # k^r = 1 is affinely parametrized, so ρ = (1/r) δ
        rep, _ = report(catalog.get("schwarzschild"), [0.2, r, 1.0, 0.5])
        assert classify_congruence(rep) == "Robinson-Trautman"
        np.testing.assert_allclose(rep.rho, np.eye(2) / r, atol=1e-12)

    def test_rotating_field_is_generic(self):
        e = custom_entry(FLAT, ["1", "cos(y)", "sin(y)", "0"], name="swirl")
        rep, _ = report(e, [0.1, 0.2, 0.3, 0.4])
        assert not rep.flags["geodesic"]
        assert classify_congruence(rep) == "generic"

    def test_spherical_wave_in_flat_space(self):
        # k = ∂_t + x̂: geodesic, shear-free, twist-free, expanding
        e = custom_entry(FLAT, ["1", "x/sqrt(x^2+y^2+z^2)", "y/sqrt(x^2+y^2+z^2)", "z/sqrt(x^2+y^2+z^2)"],
                         box={c: (0.5, 1.0) for c in "txyz"})
        rep, _ = report(e, [0.0, 0.6, 0.7, 0.8])
        assert classify_congruence(rep) == "Robinson-Trautman"
        assert rep.theta == pytest.approx(1 / np.sqrt(0.36 + 0.49 + 0.64))


class TestKundtTensor:
    @pytest.mark.parametrize("name", catalog.names())
    def test_consistent_with_flags(self, name):
        e = catalog.get(name)
        for p in e.sample_points(3, seed=2):
            rep, ctx = report(e, p)
            X = kundt_tensor_residual(ctx.pc, ctx.k_jet).components
            small = np.abs(X).max() <= 1e-10
            assert small == rep.flags["kundt"]


class TestNullCheck:
    def test_non_null_field_rejected(self):
        e = custom_entry(FLAT, ["1", "1", "1", "0"])
        with pytest.raises(FrameError, match="not null"):
            PointContext(e, [0, 0, 0, 0])

    def test_null_only_at_the_point_rejected(self):
        # null at x = 0 but not nearby
        e = custom_entry(FLAT, ["1", "1 + x", "0", "0"])
        ctx_pc = e.bundle().at([0.0, 0.0, 0.0, 0.0])
        with pytest.raises(FrameError, match="near the point"):
            check_null_field(ctx_pc, e.k_jet([0.0, 0.0, 0.0, 0.0]))

    def test_json_fields(self):
        rep, _ = report(catalog.get("schwarzschild"), [0.2, 3.0, 1.0, 0.5])
        data = rep.to_json()
        assert data["label"] == "Robinson-Trautman"
        assert data["expansion"] == pytest.approx(1 / 3)
        assert set(data["flags"]) >= {"geodesic", "kundt", "robinson_trautman"}
