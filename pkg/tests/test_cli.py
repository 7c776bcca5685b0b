import csv
import io
import json

import pytest

from interfacelab.cli import main, parse_range, parse_tolerance


@pytest.mark.parametrize("text,expected", [("0:1:5", [0.0, 0.25, 0.5, 0.75, 1.0]), ("0.1,0.3", [0.1, 0.3]),
                                           ("2:2:1", [2.0])])
def test_parse_range(text, expected):
    assert parse_range(text) == pytest.approx(expected)


def test_parse_tolerance():
    assert parse_tolerance("winding=0.02") == ("winding", 0.02)


def test_chern_haldane(capsys, tmp_path):
    assert main(["chern", "--model", "haldane", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["haldane"]["integer"] == 1 and out["haldane"]["quantized"]
    assert json.loads((tmp_path / "chern.json").read_text()) == out


def test_chern_of_experiment_bulks(capsys):
    assert main(["chern", "--experiment", "harper_vs_harper"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["chern_plus"]["integer"] == 1 and out["chern_minus"]["integer"] == -1


def test_cocycle_table(capsys):
    code = main(["cocycle", "--cases", "5"])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].split()[0] == "identity"
    verdicts = {line.split()[0]: line.split()[-1] for line in lines[1:]}
    assert verdicts["xi_antisymmetry"] == "PASS" and verdicts["zeta_eq_eta"] == "PASS"
    assert verdicts["xi_eq_zeta"] == "FAIL" and code == 1


def test_sweep_mu(capsys, tmp_path):
    args = ["sweep", "--experiment", "trivial_vs_trivial", "--mu", "0:1:5", "--quantities", "index",
            "--out", str(tmp_path)]
    assert main(args) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 5
    assert len({round(float(r["index"])) for r in rows}) == 1
    assert (tmp_path / "sweep.csv").exists() and (tmp_path / "manifest.json").exists()


@pytest.mark.parametrize("command,key", [("winding", "winding"), ("index", "fredholm_index")])
def test_single_invariants(capsys, command, key):
    assert main([command, "--experiment", "trivial_vs_trivial"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["quantity"] == key and out["integer"] == 0


def test_interface_and_report(capsys, tmp_path):
    assert main(["interface", "--experiment", "trivial_vs_trivial"]) == 0
    assert json.loads(capsys.readouterr().out)["consistent"]
    assert main(["report", "--experiment", "trivial_vs_trivial", "--out", str(tmp_path),
                 "--tolerance", "index=0.2"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["config"]["tolerances"]["index"] == 0.2
    assert (tmp_path / "report.json").read_text() == json.dumps(report, indent=2, sort_keys=True) + "\n"


def test_decay(capsys, tmp_path):
    assert main(["decay", "--experiment", "trivial_vs_trivial", "--out", str(tmp_path)]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith("bin_kind,distance,max_abs_element")
    assert "alpha_row=" in captured.err and (tmp_path / "decay.csv").exists()


def test_bad_config_exit_code(capsys, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "haldane_vs_staggered", "samples": -1}))
    assert main(["report", "--config", str(path)]) == 2
    assert "samples" in capsys.readouterr().err
