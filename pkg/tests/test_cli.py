import io
import json

import jsonschema
import pytest

from cstnet.cli import main
from cstnet.report import analysis_schema, analyze_network, dumps, validate
from cstnet.parser import load_network

from conftest import DATA

BASIC = DATA / "basic"
VEGFR = DATA / "vegfr"


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


def test_parse_round_trip():
    code, text = run("parse", BASIC / "ex3.crn")
    assert code == 0
    assert text.splitlines()[:2] == ["2 X1 + X2 -> 3 X1; k=1", "X1 -> X2; k=1"]


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.crn"
    bad.write_text("A -> A\n")
    code, _ = run("parse", bad)
    assert code == 2
    assert "line 1" in capsys.readouterr().err
    assert run("parse", tmp_path / "missing.crn")[0] == 2


def test_analyze_net1_text():
    code, text = run("analyze", BASIC / "net1.crn")
    assert code == 0
    assert "multistationary (non-injective-with-sequestration)" in text
    assert "D1=diag(1,2,2)" in text and "ε=1/8" in text


def test_analyze_seq_and_linear():
    assert "multistationary (" in run("analyze", BASIC / "seq_n3_m2.crn")[1]
    assert "not multistationary (non-injective-linear-transmutation)" in run("analyze", BASIC / "linear.crn")[1]


def test_analyze_require_cst(capsys):
    assert run("analyze", BASIC / "ex3.crn")[0] == 0
    code, _ = run("analyze", BASIC / "ex3.crn", "--require-cst")
    assert code == 2
    assert "not a CST" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["net1.crn", "transmutation.crn", "linear.crn", "ex3.crn", "seq1.crn"])
def test_json_schema_fixpoint(name):
    code, text = run("analyze", BASIC / name, "--json")
    assert code == 0
    doc = json.loads(text)
    assert doc["schema"] == 1
    validate(doc)
    again = json.loads(dumps(doc))
    validate(again)
    assert dumps(again) == dumps(doc) == text.rstrip("\n")


def test_schema_rejects_bad_documents():
    doc = analyze_network(load_network(BASIC / "net1.crn")).to_dict()
    validate(doc)
    for mutate in (
        lambda d: d.update(schema=2),
        lambda d: d["network"].update(deficiency=-1),
        lambda d: d["evidence"].update(epsilon=0.125),
        lambda d: d.update(extra=True),
    ):
        broken = json.loads(json.dumps(doc))
        mutate(broken)
        with pytest.raises(jsonschema.ValidationError):
            validate(broken)
    jsonschema.Draft202012Validator.check_schema(analysis_schema())


def test_batch_is_ordered_and_valid():
    code, text = run("analyze", "--batch", BASIC, "--json", "--jobs", "4")
    assert code == 0
    docs = json.loads(text)
    sources = [d["source"] for d in docs]
    assert sources == sorted(sources) and len(docs) == len(list(BASIC.glob("*.crn")))
    for d in docs:
        validate(d)
    code2, text2 = run("analyze", "--batch", BASIC, "--json", "--jobs", "1")
    assert text2 == text


def test_batch_with_bad_file(tmp_path):
    (tmp_path / "a.crn").write_text("A -> B\nB -> A\n")
    (tmp_path / "b.crn").write_text("A -> \n")
    code, text = run("analyze", "--batch", tmp_path)
    assert code == 2 and "a.crn" in text


def test_lift_success_and_failure(tmp_path):
    code, text = run("lift", VEGFR / "vegfr.plan")
    assert code == 0
    assert "target inherits nondegenerate multistationarity from seed net1" in text
    plan = tmp_path / "bad.plan"
    (tmp_path / "seed.crn").write_text("R -> V\n")
    plan.write_text("seed seed.crn\ntarget seed.crn\nadd-reaction R -> 0\n")
    code, text = run("lift", plan)
    assert code == 1 and "step 1" in text
    code, text = run("lift", plan, "--json")
    assert code == 1 and json.loads(text)["failed_step"] == 1


def test_witness_command():
    code, text = run("witness", BASIC / "transmutation.crn")
    assert code == 0 and "state a: (1, 3)" in text and "state b: (2, 12)" in text
    code, text = run("witness", BASIC / "net1.crn", "--json")
    doc = json.loads(text)
    assert code == 0 and doc["evidence"]["type"] == "determinant-certificate"
    assert doc["evidence"]["verified"]
    assert run("witness", BASIC / "linear.crn")[0] == 2
    assert run("witness", BASIC / "ex3.crn")[0] == 2


def test_simulate_csv(tmp_path):
    code, text = run("simulate", BASIC / "ex3.crn", "--x0", "3,0.5", "--t-end", "50")
    assert code == 0
    lines = text.splitlines()
    assert lines[0] == "t,X1,X2"
    t, x1, x2 = map(float, lines[-1].split(","))
    assert t == 50 and abs(x1 - 3.186) < 1e-3 and abs(x2 - 0.314) < 1e-3
    out = tmp_path / "traj.csv"
    plot = tmp_path / "traj.png"
    code, text = run("simulate", BASIC / "ex3.crn", "--rates", "1,1", "--x0", "3 0.5", "--t-end", "5",
                     "--out", out, "--plot", plot)
    assert code == 0 and text == ""
    assert out.read_text().startswith("t,X1,X2") and plot.stat().st_size > 0


def test_simulate_steady_state_columns_constant():
    code, text = run("simulate", BASIC / "ex3.crn", "--x0", "2,0.5", "--t-end", "5")
    rows = [list(map(float, line.split(","))) for line in text.splitlines()[1:]]
    assert all(abs(r[1] - 2) < 1e-6 and abs(r[2] - 0.5) < 1e-6 for r in rows)


def test_simulate_errors(tmp_path):
    assert run("simulate", BASIC / "ex3.crn", "--x0=-1,0.5", "--t-end", "5")[0] == 2
    assert run("simulate", BASIC / "ex3.crn", "--x0", "1", "--t-end", "5")[0] == 2
    assert run("simulate", BASIC / "ex3.crn", "--x0", "1,1", "--t-end", "5", "--tol", "0.5")[0] == 2
    blow = tmp_path / "blow.crn"
    blow.write_text("2 X -> 3 X; k=1\n")
    assert run("simulate", blow, "--x0", "1", "--t-end", "2")[0] == 3
    norates = tmp_path / "norates.crn"
    norates.write_text("A -> B\n")
    assert run("simulate", norates, "--x0", "1,1", "--t-end", "1")[0] == 2


def test_embed_command():
    code, text = run("embed", BASIC / "seq1.crn", "--remove-species", "X4", "--remove-reactions", "2")
    assert code == 0
    assert "X4" not in text and "X2 + 2 X3" not in text
    code, text = run("embed", BASIC / "seq1.crn", "--remove-species", "X4", "--remove-reactions", "2", "--json")
    assert json.loads(text)["injective_mass_action"] is True
    assert run("embed", BASIC / "seq1.crn", "--remove-reactions", "0")[0] == 2
    assert run("embed", BASIC / "seq1.crn", "--remove-species", "Q")[0] == 2


def test_color_disabled(monkeypatch):
    class Tty(io.StringIO):
        def isatty(self):
            return True

    out = Tty()
    main(["lift", str(VEGFR / "vegfr.plan")], out=out)
    assert "\033[" in out.getvalue()
    monkeypatch.setenv("CRN_COLOR", "0")
    out = Tty()
    main(["lift", str(VEGFR / "vegfr.plan")], out=out)
    assert "\033[" not in out.getvalue()


def test_usage_errors():
    assert run()[0] == 2
    assert run("analyze")[0] == 2
    assert run("frobnicate")[0] == 2


def test_console_script_entry_point():
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "cstnet.cli", "analyze", str(BASIC / "transmutation.crn")],
        capture_output=True, text=True, env={"CRN_COLOR": "0", "PATH": ""},
    )
    assert proc.returncode == 0
    assert "nondegenerate" not in proc.stderr
    assert "witness: two exact steady states" in proc.stdout
