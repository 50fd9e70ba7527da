import json

import numpy as np
import pytest

from recov import cli
from recov.errors import SolverError, StructuralError

EX = {"name": "t", "eps": 1.0,
      "space": {"norm": "SUP", "grid": {"type": "sequence", "N": 4}},
      "subspace": {"preset": "COORDINATE(0)"},
      "measurement": {"kind": "GENERAL", "params": {"rows": [[1, 0, 0, 0], [0, 1, 1, 1]]}},
      "tasks": [{"type": "GEOMETRY", "w": [0, 2]}, {"type": "MU"}]}


def _write(tmp_path, doc, name="doc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_expression_whitelist():
    t = np.array([0.0, np.pi / 2])
    assert np.allclose(cli.evaluate("abs(sin(t)) + 2*pi - pi*2", t), [0.0, 1.0])
    assert np.allclose(cli.evaluate("3", t), [3.0, 3.0])
    for bad in ("__import__('os')", "t.real", "[1, 2]", "lambda: 1", "open('x')", "nope(t)"):
        with pytest.raises(StructuralError):
            cli.evaluate(bad, t)
    with pytest.raises(StructuralError):
        cli.evaluate("log(t)", t)


def test_document_round_trip():
    doc = cli.ProblemDocument.from_dict(EX)
    assert cli.ProblemDocument.from_dict(doc.to_dict()) == doc
    assert doc.to_dict()["measurement"] == EX["measurement"]


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["space"].update(norm="L7"),
    lambda d: d["tasks"].append({"type": "FLY"}),
    lambda d: d.update(tasks=[])])
def test_schema_rejects(mutate):
    import jsonschema
    d = json.loads(json.dumps(EX))
    mutate(d)
    with pytest.raises(jsonschema.ValidationError):
        cli.ProblemDocument.from_dict(d)


def test_unknown_task_keys_rejected():
    d = json.loads(json.dumps(EX))
    d["tasks"][1]["bogus"] = 1
    with pytest.raises(StructuralError):
        cli.ProblemDocument.from_dict(d)


def test_number_formatting():
    assert cli.fnum(2 / 3) == 0.666666666667
    assert cli.fnum(float("inf")) == "INFINITE"
    assert cli.fnum(-0.0) == 0.0
    assert cli.csv_text(["a", "b"], [(1.0, 2 / 3)]) == "a,b\n1,0.666666666667\n"


def test_run_writes_report_and_tables(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", _write(tmp_path, EX), "--out", str(out)])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "OK" and not rep["partial"]
    assert (out / "geometry.csv").read_text().splitlines()[1] == "1,0.5,0.666666666667"
    assert (out / "mu.csv").exists()
    assert json.loads(capsys.readouterr().out) == rep


def test_fixture_list_and_determinism(capsys):
    assert cli.main(["fixtures", "list"]) == 0
    names = capsys.readouterr().out.split()
    assert {"example_2_4", "example_2_4_embedded", "trig_doubled", "rademacher_riesz", "hilbert_ls",
            "l1_totality", "sphere_linear", "sandwich_hilbert"} <= set(names)
    outs = []
    for _ in range(2):
        assert cli.main(["fixtures", "run", "sandwich_hilbert"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["tasks"][1]["all_pass"]


def test_seed_override_changes_random_rows(capsys):
    cli.main(["fixtures", "run", "sandwich_hilbert", "--seed", "1"])
    a = json.loads(capsys.readouterr().out)
    cli.main(["fixtures", "run", "sandwich_hilbert", "--seed", "2"])
    b = json.loads(capsys.readouterr().out)
    assert a["seed"] == 1 and b["seed"] == 2
    assert a["tasks"][1]["rows"] != b["tasks"][1]["rows"]


def test_validation_errors_exit_2(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2
    d = json.loads(json.dumps(EX))
    d["oops"] = True
    assert cli.main(["run", _write(tmp_path, d)]) == 2
    assert cli.main(["fixtures", "run", "no_such_fixture"]) == 2


def test_standing_assumption_prints_witness(tmp_path, capsys):
    d = json.loads(json.dumps(EX))
    d["subspace"] = {"preset": "COORDINATE(3)"}
    d["measurement"]["params"]["rows"] = [[1, 0, 0, 0], [0, 1, 0, 0]]
    assert cli.main(["run", _write(tmp_path, d)]) == 2
    err = capsys.readouterr().err
    assert "StandingAssumptionError" in err and "witness: [0.0, 0.0, 0.0, 1.0]" in err


def test_solver_failure_exit_3_with_partial_report(tmp_path, capsys, monkeypatch):
    def boom(model, task, rng):
        raise SolverError("simulated breakdown")
    monkeypatch.setitem(cli.TASKS, "MU", boom)
    out = tmp_path / "o"
    assert cli.main(["run", _write(tmp_path, EX), "--out", str(out)]) == 3
    rep = json.loads((out / "report.json").read_text())
    assert rep["partial"] and rep["status"] == "FAILED"
    assert [t["type"] for t in rep["tasks"]] == ["GEOMETRY"]
    assert rep["error"]["kind"] == "SolverError"


def test_recover_from_function_and_totality(tmp_path, capsys):
    d = {"eps": 0.5, "space": {"norm": "SUP", "grid": {"type": "interval", "a": "-pi", "b": "pi", "N": 120,
                                                         "rule": "periodic"}},
         "subspace": {"preset": "TRIG(1)"}, "measurement": {"kind": "POINT_EVAL", "params": {"m": 6}},
         "tasks": [{"type": "RECOVER", "f": "abs(sin(t))"}, {"type": "TOTALITY", "a": 2, "m": 2}]}
    assert cli.main(["run", _write(tmp_path, d)]) == 0
    rep = json.loads(capsys.readouterr().out)
    checks = {c["check"]: c["passed"] for c in rep["tasks"][0]["certificate"]}
    assert checks["data_residual"] and checks["instance_ratio"]
    assert rep["tasks"][1]["rows"][0]["dist"] == 0.5
