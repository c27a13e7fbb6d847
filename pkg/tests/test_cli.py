import json
import math
import subprocess
import sys
from importlib import resources

import mpmath
import pytest

from hypoel.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


def test_envelope_layout(capsys):
    code, rep, _ = run(capsys, "analyze", "Dx^2+Dy^2")
    assert code == 0
    assert list(rep) == ["schema", "tool", "version", "command", "status", "inputs", "results",
                         "timing", "error"]
    assert rep["schema"] == "hypoel/1" and rep["timing"] is None and rep["error"] is None
    assert rep["results"]["ellipticity"]["verdict"] == "elliptic"


def test_analyze_tube(capsys):
    code, rep, _ = run(capsys, "analyze", "Dt^2 + t^2*Dx1^2 + Dx2^2", "--tube", "t")
    assert code == 0 and rep["results"]["tube"]["guards_satisfied"] is True


def test_analyze_irregularity(capsys):
    code, rep, _ = run(capsys, "analyze", "x^3*Dx - 2", "--irregularity", "--point", "0")
    assert code == 0
    assert rep["results"]["irregularity"]["sigma"] == "3"
    assert rep["results"]["nondegenerate"]["value"] is False


def test_analyze_fields(capsys):
    code, rep, _ = run(capsys, "analyze", "Dt^2 + t^2*Dx^2", "--fields", "Dt;t*Dx", "--point", "t=0,x=0")
    assert code == 0
    assert json.dumps(rep["results"]).count('"depth": 2') >= 1


def test_parse_error_is_a_usage_error(capsys):
    code, rep, _ = run(capsys, "analyze", "Dx^2 + (")
    assert code == 2 and rep["status"] == "error" and rep["error"]["kind"] == "usage"


def test_unknown_flag_is_a_usage_error(capsys):
    assert main(["analyze", "Dx", "--bogus"]) == 2


def test_classify_examples(capsys):
    code, rep, _ = run(capsys, "classify", "baouendi-goulaouic", "h(D'{2}, G{2})")
    assert code == 0 and rep["results"]["answer"] == "holds"
    assert "R6" in json.dumps(rep["results"]["holds_traces"])
    _, rep, _ = run(capsys, "classify", "lewy", "h(D', Cinf)")
    assert rep["results"]["answer"] == "fails"
    code, rep, _ = run(capsys, "classify", "unknown-op", "h(D', Cinf)")
    assert code == 0 and rep["results"]["answer"] == "unknown"


def test_classify_with_axioms(capsys, tmp_path):
    ax = tmp_path / "ax.txt"
    ax.write_text("myop: h(D', Cinf)\n")
    code, rep, _ = run(capsys, "classify", "myop", "h(L2, Cinf)", "--axioms", str(ax))
    assert code == 0 and rep["results"]["answer"] == "holds"
    ax.write_text("myop: h(D'\n")
    assert run(capsys, "classify", "myop", "h(L2, Cinf)", "--axioms", str(ax))[0] == 2


def test_symbol_matches_sinh(capsys):
    code, rep, _ = run(capsys, "spectral", "symbol", "--sigma", "const 1", "--s", "1", "--eval", "5.0")
    assert code == 0
    v = rep["results"]["values"][0]
    exact = mpmath.sinh(5 * mpmath.pi) / (5 * mpmath.pi)
    assert abs(float(v["abs"]) / float(exact) - 1) <= 1e-8


def test_symbol_cone_and_lower_bound(capsys):
    code, rep, _ = run(capsys, "spectral", "symbol", "--sigma", "power 1/17 1/2", "--s", "3/2",
                       "--cone", "100", "--lower-bound", "50")
    assert code == 0
    assert float(rep["results"]["cone"]["min_abs"]) >= 1
    assert rep["results"]["lower_bound"]["violations"] == 0


def test_bad_sigma_is_a_usage_error(capsys):
    assert run(capsys, "spectral", "symbol", "--sigma", "table 1:3, 2:1", "--s", "2")[0] == 2


def test_fit_kernel(capsys):
    code, rep, _ = run(capsys, "spectral", "fit", "--func", "exp(-1/x) for x>0", "--grid", "16384")
    assert code == 0 and abs(float(rep["results"]["fit"]["s_hat"]) - 2) <= 0.15


def test_fit_failure_is_a_computation_error(capsys):
    code, rep, _ = run(capsys, "spectral", "fit", "--decay", "2", "--grid", "4096", "--lo", "100", "--hi", "100.5")
    assert code == 3 and rep["error"]["kind"] == "computation"


def test_fit_writes_csv(capsys, tmp_path):
    p = tmp_path / "spectrum.csv"
    code, _, _ = run(capsys, "spectral", "fit", "--builtin", "square", "--grid", "1024", "--csv", str(p))
    assert code == 0
    lines = p.read_text().splitlines()
    assert lines[0] == "xi,re,im,abs,log_abs" and len(lines) == 1025


def test_represent_from_csv(capsys, tmp_path):
    p = tmp_path / "tri.csv"
    p.write_text("\n".join(repr(float(i % 64 < 32) - 0.5) for i in range(1024)))
    code, rep, _ = run(capsys, "spectral", "represent", "--input", str(p), "--s", "2", "--t", "3")
    assert code == 0
    r = rep["results"]["report"]
    assert r["decreasing"] is True and len(r["l2_errors"]) == 3


def test_represent_needs_input(capsys):
    assert run(capsys, "spectral", "represent", "--s", "2", "--t", "3")[0] == 2


def test_witness(capsys):
    code, rep, _ = run(capsys, "spectral", "witness", "--decay", "3", "--s", "2", "--j-max", "2")
    assert code == 0 and rep["results"]["found"] and rep["results"]["witness"]["ok"]
    _, rep, _ = run(capsys, "spectral", "witness", "--decay", "1", "--s", "2", "--j-max", "2")
    assert rep["results"]["found"] is False


def test_regress_full_catalog(capsys):
    code, rep, _ = run(capsys, "regress")
    assert code == 0 and rep["results"]["failed"] == 0 and rep["results"]["total"] > 0


def _catalog():
    return json.loads(resources.files("hypoel").joinpath("data/catalog.json").read_text())


def test_regress_injected_wrong_threshold(capsys, tmp_path):
    cat = _catalog()
    for e in cat["entries"]:
        if e["id"] == "baouendi-goulaouic":
            for ex in e["expect"]:
                if ex.get("question") == "h(D', G{s})":
                    ex["holds"] = "[3, inf)"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(cat))
    code, rep, _ = run(capsys, "regress", "--catalog", str(p))
    assert code == 1 and rep["status"] == "fail" and rep["results"]["failed"] >= 1


def test_regress_empty_catalog(capsys, tmp_path):
    cat = _catalog()
    cat["entries"] = []
    p = tmp_path / "empty.json"
    p.write_text(json.dumps(cat))
    assert run(capsys, "regress", "--catalog", str(p))[0] == 2


def test_regress_with_fuzz(capsys):
    code, rep, _ = run(capsys, "regress", "--fuzz", "50", "--seed", "4")
    assert code == 0


def test_output_is_byte_identical(capsys):
    argv = ["classify", "baouendi-goulaouic", "h(D', G{s})"]
    a = run(capsys, *argv)[2]
    b = run(capsys, *argv)[2]
    assert a == b
    # and across processes
    proc = subprocess.run([sys.executable, "-m", "hypoel", *argv], capture_output=True, text=True)
    assert proc.stdout == a


def test_timing_flag(capsys):
    _, rep, _ = run(capsys, "--timing", "analyze", "Dx")
    assert rep["timing"] is not None


def test_out_file(capsys, tmp_path):
    p = tmp_path / "r.json"
    assert main(["--out", str(p), "analyze", "Dx"]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(p.read_text())["status"] == "ok"


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("# defaults\n[spectral]\ngrid = 2048\n\n[analyze]\nresolution = 64\n")
    code, rep, _ = run(capsys, "--config", str(cfg), "spectral", "fit", "--decay", "2")
    assert code == 0 and rep["results"]["grid"] == 2048
    cfg.write_text("spectral.colour = 3\n")
    assert run(capsys, "--config", str(cfg), "analyze", "Dx")[0] == 2
    cfg.write_text("spectral.grid = lots\n")
    assert run(capsys, "--config", str(cfg), "analyze", "Dx")[0] == 2


def test_out_of_range_numbers_are_strings():
    from hypoel.cli import dumps, jsonable
    text = dumps(jsonable({"big": 10 ** 400, "inf": math.inf, "x": 1.5}))
    d = json.loads(text)
    assert isinstance(d["big"], str) and isinstance(d["inf"], str) and d["x"] == 1.5
