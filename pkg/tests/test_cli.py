import json

import pytest

from nullalign import cli
from nullalign.verify import registry
from nullalign.verify.records import HOLDS, SuiteResult, judge

SCHW_POINT = "t=0,r=3,θ=1,φ=0"
SCHW_K_LOWER = "-1,1/(1 - 2/r),0,0"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestClassify:
    def test_ppwave_json(self, capsys):
        code, out, _ = run(capsys, "classify", "--metric", "ppwave4", "--point", "u=0,v=0,x=0.3,y=0.2",
                           "--catalog-k", "--json")
        assert code == 0
        data = json.loads(out)
        assert data["reports"]["C"]["bo"] == -2
        assert data["reports"]["C"]["label"] == "N"
        assert data["k"] == [0.0, 1.0, 0.0, 0.0]

    def test_text(self, capsys):
        code, out, _ = run(capsys, "classify", "--metric", "schwarzschild", "--point", SCHW_POINT, "--catalog-k")
        assert code == 0
        assert "C" in out

    def test_metric_file(self, capsys, tmp_path):
        f = tmp_path / "pp.metric"
        f.write_text("dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1\n")
        code, out, _ = run(capsys, "classify", "--metric", str(f), "--point", "u=0,v=0,x=1/2,y=0",
                           "--k", "0,1,0,0", "--json")
        assert code == 0
        assert json.loads(out)["reports"]["C"]["bo"] == -2


class TestCongruence:
    def test_schwarzschild_robinson_trautman(self, capsys):
        code, out, _ = run(capsys, "congruence", "--metric", "schwarzschild", "--point", SCHW_POINT,
                           f"--k={SCHW_K_LOWER}", "--k-lower", "--json")
        assert code == 0
        data = json.loads(out)
        assert data["label"] == "Robinson-Trautman"
        assert data["flags"]["geodesic"] and not data["flags"]["kundt"]
        assert data["expansion"] == pytest.approx(1 / 3, abs=1e-12)

    def test_covector_read_as_vector_is_not_null(self, capsys):
        code, _, err = run(capsys, "congruence", "--metric", "schwarzschild", "--point", SCHW_POINT,
                           f"--k={SCHW_K_LOWER}")
        assert code == 3
        assert "not null" in err

    def test_pole(self, capsys):
        code, _, err = run(capsys, "congruence", "--metric", "schwarzschild", "--point", "t=0,r=2,θ=1,φ=0",
                           "--catalog-k")
        assert code == 3
        assert "pole" in err

    def test_ppwave_kundt(self, capsys):
        code, out, _ = run(capsys, "congruence", "--metric", "ppwave4", "--point", "u=0,v=0,x=0.1,y=0.1",
                           "--catalog-k", "--json")
        assert code == 0
        assert json.loads(out)["flags"]["kundt"]


class TestUsageErrors:
    @pytest.mark.parametrize("argv", [
        ("classify", "--metric", "nope", "--point", "x=1"),
        ("verify", "--suite", "nope", "--metric", "ppwave4"),
        ("verify", "--points", "0", "--metric", "ppwave4"),
        ("verify", "--k", "0,1,0,0"),
        ("catalog", "show", "nope"),
        ("catalog", "show"),
        ("bracket", "--metric", "ppwave4", "--point", "u=0,v=0,x=0.1,y=0.1", "--catalog-k", "--T", "S",
         "--Q", "0,9"),
    ])
    def test_exit_two(self, capsys, argv):
        code, _, err = run(capsys, *argv)
        assert code == 2
        assert "usage error" in err

    def test_bad_metric_file(self, capsys, tmp_path):
        f = tmp_path / "bad.metric"
        f.write_text("dim = 4\ncoords = u v x y\ng[0][0] = (x\n")
        code, _, _ = run(capsys, "classify", "--metric", str(f), "--point", "u=0,v=0,x=0,y=0", "--k", "0,1,0,0")
        assert code == 2


class TestCatalog:
    def test_list(self, capsys):
        code, out, _ = run(capsys, "catalog", "list", "--json")
        assert code == 0
        names = [e["name"] for e in json.loads(out)]
        assert "schwarzschild" in names and names == sorted(names)

    def test_show(self, capsys):
        code, out, _ = run(capsys, "catalog", "show", "warped4")
        assert code == 0
        assert "cosh(x)" in out
        code, out, _ = run(capsys, "catalog", "show", "warped4", "--json")
        assert json.loads(out)["name"] == "warped4"


class TestBracket:
    def test_weyl_bracket(self, capsys):
        code, out, _ = run(capsys, "bracket", "--metric", "ppwave4", "--point", "u=0,v=0,x=0.1,y=0.1",
                           "--catalog-k", "--T", "C", "--Q", "0,2,0,2", "--json")
        assert code == 0
        data = json.loads(out)
        assert data["status"] == "ok"
        assert data["components"] == pytest.approx(data["closed_form"], abs=1e-12)

    def test_zero_tensor(self, capsys):
        code, out, _ = run(capsys, "bracket", "--metric", "minkowski4", "--point", "t=0,x=0,y=0,z=0",
                           "--catalog-k", "--T", "C", "--Q", "0,2,0,2", "--json")
        assert code == 0
        assert json.loads(out)["status"] == "skipped"

    def test_domain_violation(self, capsys):
        code, _, err = run(capsys, "bracket", "--metric", "schwarzschild", "--point", SCHW_POINT,
                           "--catalog-k", "--T", "C", "--Q", "1,2,1,2")
        assert code == 3


class TestVerifyAndDiagnose:
    def test_verify_single_metric_json(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "congruence", "--metric", "ppwave4", "--points", "2",
                           "--json")
        assert code == 0
        data = json.loads(out)
        assert len(data) == 1
        assert data[0]["suite"] == "congruence" and data[0]["status"] == "pass"
        assert len(data[0]["points"]) == 2

    def test_verify_at_point(self, capsys):
        code, out, _ = run(capsys, "verify", "--suite", "Weyl-N", "--metric", "ppwave4", "--point",
                           "u=0,v=0,x=0.1,y=0.2")
        assert code == 0
        assert "prop:Weyl-N" in out

    def test_verify_failure_exit_code(self, capsys, monkeypatch):
        bad = SuiteResult("factorization", "ppwave4", 0, [[0.0] * 4])
        bad.checks.append(judge("factorization/S", 0, HOLDS, 1.0, 1e-8))
        monkeypatch.setattr(registry, "run_all", lambda *a, **k: [bad])
        code, out, _ = run(capsys, "verify", "--suite", "factorization", "--metric", "ppwave4")
        assert code == 1
        assert "FAIL factorization/S" in out

    def test_diagnose(self, capsys):
        code, out, _ = run(capsys, "diagnose", "--metric", "ppwave4", "--point", "u=0,v=0,x=0.1,y=0.2",
                           "--catalog-k", "--json")
        assert code == 0
        data = json.loads(out)
        assert data["route"] == "Weyl type N route"
        assert data["verdict"].startswith("consistent")
