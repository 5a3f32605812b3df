import csv
import io
import json

from folia.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main, parse_eps_list, parse_times

from fixtures import broken_doc


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_validate_builtins(tmp_path):
    for name in ("hopf_s3", "heisenberg3"):
        path = tmp_path / f"{name}.json"
        code, text = run("validate", "--model", name, "--json", str(path))
        assert code == EXIT_OK and "overall" in text
        doc = json.loads(path.read_text())
        assert doc["schema"] == 1 and doc["status"] == "PASS"


def test_validate_broken_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(broken_doc()))
    code, text = run("validate", "--file", str(path))
    assert code == EXIT_FAIL
    assert "antisymmetry" in text and "FAIL" in text


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  \"n\": 2,\n  \"m\": ]")
    assert run("validate", "--file", str(bad))[0] == EXIT_INPUT
    assert "line 3" in capsys.readouterr().err
    assert run("validate", "--model", "nope")[0] == EXIT_INPUT
    assert run("verify", "--model", "hopf_s3", "--eps", "zero")[0] == EXIT_INPUT
    assert run("verify", "--model", "hopf_s3", "--eps", "-1")[0] == EXIT_INPUT
    assert run("heat", "--model", "hopf_s5")[0] == EXIT_INPUT
    assert run("frobnicate")[0] == EXIT_INPUT


def test_verify_hopf_s3(tmp_path):
    path = tmp_path / "v.json"
    code, _ = run("verify", "--model", "hopf_s3", "--eps", "1,4,inf", "--trials", "200",
                  "--seed", "7", "--json", str(path))
    assert code == EXIT_OK
    doc = json.loads(path.read_text())
    assert all(c["status"] == "PASS" for c in doc["checks"])
    names = {c["name"] for c in doc["checks"]}
    assert {"weitzenbock", "d_squared", "bianchi", "curv1", "commute_bott", "function_commutation",
            "bochner_equality", "adiabatic_q"} <= names


def test_verify_heisenberg_exact(tmp_path):
    path = tmp_path / "v.json"
    code, _ = run("verify", "--model", "heisenberg3", "--exact", "--trials", "50", "--json", str(path))
    assert code == EXIT_OK
    doc = json.loads(path.read_text())
    assert all(c.get("max_residual", "0") == "0" for c in doc["checks"])


def test_verify_negative_control(tmp_path):
    path = tmp_path / "v.json"
    code, _ = run("verify", "--model", "hopf_s3", "--no-commutator-constraints", "--trials", "50",
                  "--eps", "inf", "--json", str(path))
    assert code == EXIT_FAIL
    d2 = next(c for c in json.loads(path.read_text())["checks"] if c["name"] == "d_squared")
    assert d2["status"] == "FAIL"


def test_report_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("report", "--model", "hopf_s3", "--json", str(a))[0] == EXIT_OK
    assert run("report", "--model", "hopf_s3", "--json", str(b))[0] == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert doc["q_tensor"]["min_sym_eig"] == 2.0
    assert doc["horizontal_curvature_operator"]["matrix"] == [["4"]]
    assert doc["ricci_g_eps"]["1"] == [["2", "0", "0"], ["0", "2", "0"], ["0", "0", "2"]]


def test_report_on_jet_model():
    code, text = run("report", "--model", "hopf_s5")
    assert code == EXIT_OK and "c1 on (2,0)" in text


def test_verdict_commands(tmp_path):
    path = tmp_path / "v.json"
    code, text = run("verdict", "--model", "hopf_s3", "--json", str(path))
    assert code == EXIT_OK
    doc = json.loads(path.read_text())
    assert doc["degrees"]["1"]["status"] == doc["degrees"]["2"]["status"] == "VANISHES"
    code, _ = run("verdict", "--model", "heisenberg3_nilmanifold", "--json", str(path))
    doc = json.loads(path.read_text())
    assert all(d["status"] == "NO_CONCLUSION" for d in doc["degrees"].values())


def test_heat_csv(tmp_path):
    path = tmp_path / "curve.csv"
    code, _ = run("heat", "--model", "hopf_s3", "--k", "1", "--eps", "auto", "--t", "0:10:0.5",
                  "--csv", str(path))
    assert code == EXIT_OK
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 21 and rows[0]["t"] == "0.0" and rows[-1]["t"] == "10.0"
    norms = [float(r["norm"]) for r in rows]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert all(float(r["norm"]) <= float(r["bound"]) + 1e-12 for r in rows)


def test_heat_csv_to_stdout():
    code, text = run("heat", "--model", "hopf_s3", "--k", "2", "--eps", "2", "--t", "0,1")
    assert code == EXIT_OK and "t,norm,bound" in text


def test_parsers():
    assert [str(e) for e in parse_eps_list("1/4,1,4,inf")] == ["1/4", "1", "4", "inf"]
    assert parse_times("0:1:0.5") == [0.0, 0.5, 1.0]
    assert parse_times("1,2.5") == [1.0, 2.5]
