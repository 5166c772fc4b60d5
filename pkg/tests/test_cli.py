import json

import pytest

from kktz import cli
from kktz.errors import CancellationGap


def _run(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_report_envelope(capsys):
    code, out, _ = _run(capsys, "algebra", "dim", "--degree", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["schema_version"] == "1" and rep["command"] == "algebra dim"
    assert rep["config"]["degree"] == 2 and rep["dim"] == 2
    assert set(rep["versions"]) == {"kktz", "numpy", "scipy"}


def test_aut_and_faces(capsys):
    assert json.loads(_run(capsys, "diagrams", "aut", "--name", "theta")[1])["aut"] == 12
    rep = json.loads(_run(capsys, "faces", "enumerate", "--size", "3")[1])
    assert rep["count"] == rep["expected"] == 11


def test_csv_and_output_file(capsys, tmp_path):
    target = tmp_path / "r.csv"
    code, out, _ = _run(capsys, "--format", "csv", "--output", str(target),
                        "faces", "check", "--degree", "1")
    assert code == 0 and out == ""
    rows = dict(line.split(",", 1) for line in target.read_text().splitlines()[1:])
    assert rows["labelled_diagrams"] == "8" and rows["by_class.AnomalyFaceFV"] == "8"


def test_usage_errors_exit_one(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.run(["nosuch"])
    assert exc.value.code == 1
    code, _, err = _run(capsys, "algebra", "reduce", "--file", "/nonexistent.json")
    assert code == 1 and "cannot read" in err


def test_library_error_exits_one(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"terms": [{"coeff": "1", "diagram": {"vertices": [], "edges": []}}]}))
    code, _, err = _run(capsys, "algebra", "exp", "--file", str(p))
    assert code == 1 and "degree-0" in err


def test_failed_check_exits_two(capsys, monkeypatch):
    from kktz import faces

    def broken(n):
        raise CancellationGap("forced")

    monkeypatch.setattr(faces, "boundary_cancellation_check", broken)
    code, out, _ = _run(capsys, "faces", "check", "--degree", "1")
    assert code == 2 and json.loads(out)["error"] == "forced"


def test_exp_and_frame(capsys, tmp_path):
    code, out, _ = _run(capsys, "invariant", "frame", "--p1", "4", "--bound", "1")
    el = json.loads(out)["element"]
    p = tmp_path / "z.json"
    p.write_text(json.dumps(el))
    code, out, _ = _run(capsys, "algebra", "reduce", "--file", str(p))
    assert code == 0
    assert sorted(t["coeff"] for t in json.loads(out)["element"]["terms"]) == ["1/1", "1/12"]


def test_geometry_commands(capsys):
    rep = json.loads(_run(capsys, "geom", "linking", "--link", "hopf")[1])
    assert rep["integer"] == 1
    rep = json.loads(_run(capsys, "geom", "g3check", "--seed", "1", "--samples", "50")[1])
    assert rep["pass"]
    code, out, _ = _run(capsys, "geom", "degree", "--map", "identity", "--seed", "1", "--samples", "20000")
    assert code == 0 and abs(json.loads(out)["estimate"] - 1) < 0.05
