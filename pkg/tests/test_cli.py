import io
import json
import math

import pytest

from cpg import cli, suites
from cpg.suites import SuiteResult


def call(argv):
    out = io.StringIO()
    code = cli.run(argv, out=out)
    return code, out.getvalue()


def test_classify_catalog():
    code, text = call(["classify", "--catalog", "parabola"])
    assert code == 0 and json.loads(text)["label"] == "PARABOLA"
    code, text = call(["classify", "--catalog", "quadrant-x-r", "--witness", "--verify", "--samples", "200"])
    res = json.loads(text)
    assert res["witness"]["exact"] and res["witness_check"]["passed"]


def test_hilbert_dist_log3():
    code, text = call(["hilbert-dist", "--catalog", "ball2", "--p", "0,0", "--q", "0.5,0"])
    assert code == 0 and json.loads(text)["distance"] == pytest.approx(math.log(3), rel=1e-12)


def test_orbit_distance_from_file(tmp_path):
    gens = tmp_path / "gens.json"
    gens.write_text(json.dumps({"generators": [[[2, 0, 0], [0, 4, 0], [0, 0, 1]]], "names": ["a"]}))
    code, text = call(["hilbert-dist", "--catalog", "parabola", "--p", "0,1", "--q", "0,4", "--generators", str(gens), "--radius", "1"])
    res = json.loads(text)
    assert code == 0 and res["orbit"]["word"] == "a" and res["orbit"]["distance"] == pytest.approx(0, abs=1e-12)


def test_domain_file_and_errors(tmp_path, capsys):
    good = tmp_path / "d.json"
    good.write_text('{"type": "paraboloid", "n": 3}')
    assert json.loads(call(["classify", str(good)])[1])["label"] == "PARABOLOID_3"
    bad = tmp_path / "bad.json"
    bad.write_text('{"type": "paraboloid",\n  "n": 3,,\n}')
    code, _ = call(["classify", str(bad)])
    err = json.loads(capsys.readouterr().err)["error"]
    assert code == 2 and "line 2, column 10" in err
    code, _ = call(["classify", "--catalog", "nope"])
    err = json.loads(capsys.readouterr().err)["error"]
    assert code == 2 and "parabola-x-rplus" in err and "quadrant" in err
    assert call(["hilbert-dist", "--catalog", "plane2", "--p", "0,0", "--q", "1,0"])[0] == 2
    assert call(["hilbert-dist", "--catalog", "ball2", "--p", "0,0,0", "--q", "1,0"])[0] == 2
    assert call(["classify"])[0] == 2
    assert call(["frobnicate"])[0] == 2
    assert call(["--help"])[0] == 0


def test_verify_foliation_example(capsys):
    code, text = call(["verify", "foliation", "--catalog", "parabola-x-rplus", "--samples", "1000", "--seed", "7"])
    res = json.loads(text)
    assert code == 0 and res["passed"] and res["seed"] == 7
    assert "seed 7" in capsys.readouterr().err


def test_verify_failure_exit_code(monkeypatch):
    monkeypatch.setitem(suites.SUITES, "foliation", lambda seed, samples, only: SuiteResult("foliation", 5, False, seed, "forced"))
    assert call(["verify", "foliation"])[0] == 3


def test_deterministic_output():
    argv = ["asymptotic-cone", "--catalog", "paraboloid3", "--check", "--samples", "50", "--seed", "3"]
    a, b = call(argv), call(argv)
    assert a == b and a[0] == 0
    keys = list(json.loads(a[1]))
    assert keys == sorted(keys)


def test_flow_trace_csv(tmp_path):
    trace = tmp_path / "flow.csv"
    code, text = call(["flow", "--catalog", "paraboloid3", "--point", "0.1,0.2,1", "--times", "0,1", "--trace", str(trace)])
    assert code == 0
    res = json.loads(text)
    assert res["base_point"] == pytest.approx([0.1, 0.2, 0.05])
    lines = trace.read_text().splitlines()
    assert lines[0] == "t,x1,x2,x3" and len(lines) == 3
    assert call(["flow", "--catalog", "hyperbola", "--point", "1,2"])[0] == 2


@pytest.mark.parametrize(
    "sequence, rank",
    [
        ({"kind": "diag-powers", "base": ["1/2", "1/4", 1]}, 1),
        ({"kind": "diag-powers", "exponents": [-1, -2]}, 1),
        ({"kind": "matrix-power", "matrix": [[2, 0, 0], [0, 4, 0], [0, 0, 1]]}, 1),
        ({"kind": "explicit-list", "matrices": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]] * 5}, 3),
    ],
)
def test_limit_analyze(tmp_path, sequence, rank):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"domain": "parabola", "sequence": sequence, "probes": 50}))
    trace = tmp_path / "orbit.csv"
    code, text = call(["limit-analyze", str(spec), "--trace", str(trace)])
    res = json.loads(text)
    assert code == 0 and res["report"]["rank"] == rank and res["report"]["consistent"]
    assert "kernel_check" in res
    assert trace.read_text().startswith("probe,k,x1,x2,distance")


def test_limit_analyze_rejects_bad_specs(tmp_path):
    spec = tmp_path / "spec.json"
    for body in [{"domain": "parabola"}, {"domain": "parabola", "sequence": {"kind": "spiral"}},
                 {"domain": "parabola", "sequence": {"kind": "diag-powers", "base": [1, 2, 3, 4]}},
                 {"domain": "quadrant", "sequence": {"kind": "explicit-list", "matrices": [[[1, 0, -5], [0, 1, 0], [0, 0, 1]]]}}]:
        spec.write_text(json.dumps(body))
        assert call(["limit-analyze", str(spec)])[0] == 2


def test_catalog_listing_and_table():
    code, text = call(["catalog"])
    rows = json.loads(text)
    assert code == 0 and len(rows) == 27 and rows[0]["name"] == "ball2"
    code, text = call(["catalog", "elliptic-cone3", "--format", "table"])
    assert code == 0 and "STRICT_CONE_3" in text
    assert call(["catalog", "missing"])[0] == 2
