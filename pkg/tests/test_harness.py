import csv
import io
import json

import numpy as np
import pytest

from interfacelab.errors import SampleFailure, SchemaError, UnknownModel
from interfacelab.harness import (
    CSV_COLUMNS,
    derive_seed,
    disorder_average,
    parse_config,
    run_experiment,
)

SMALL = {"experiment": "trivial_vs_trivial", "geometry": {"length_1": 16, "half_width_2": 8}, "index_window": 3}


def test_minimal_config_defaults():
    c = parse_config({"experiment": "haldane_vs_staggered"})
    assert c["geometry"] == {"length_1": 32, "half_width_2": 32}
    assert c["samples"] == 1 and c["lambda"] == [0.0] and c["mu"] == [1.0]
    assert c["quantities"] == ["current", "winding", "index", "chern"]
    assert c.tolerances["current"] == 0.05 and c.tolerances["index"] == 0.1


def test_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"experiment": "harper_vs_vacuum", "samples": 3, "master_seed": 11}))
    c = parse_config(path)
    assert c["geometry"]["length_1"] == 48 and len(c.seeds) == 3


@pytest.mark.parametrize("patch,path", [
    ({"samples": -1}, ("samples",)),
    ({"samples": 0}, ("samples",)),
    ({"geometry": {"length_1": "big"}}, ("geometry", "length_1")),
    ({"mu": [1.5]}, ("mu", 0)),
    ({"quantities": ["current", "entropy"]}, ("quantities", 1)),
    ({"tolerances": {"winding": 0}}, ("tolerances", "winding")),
    ({"master_seed": 2**64}, ("master_seed",)),
    ({"colour": "blue"}, ()),
])
def test_schema_errors_carry_the_path(patch, path):
    with pytest.raises(SchemaError) as info:
        parse_config({**SMALL, **patch})
    assert info.value.path == path


def test_missing_experiment():
    with pytest.raises(SchemaError):
        parse_config({"samples": 2})


def test_fermi_level_outside_gap():
    with pytest.raises(SchemaError) as info:
        parse_config({**SMALL, "window": {"gap": [-0.5, 0.5], "fermi_energy": 0.7}})
    assert info.value.path == ("window", "fermi_energy")


def test_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        parse_config(path)


@pytest.mark.parametrize("raw", [{"experiment": "graphene"}, {**SMALL, "upper": {"model": "graphene"}}])
def test_unknown_names(raw):
    with pytest.raises(UnknownModel):
        parse_config(raw)


def test_seed_derivation():
    # frozen from SeedSequence(master, spawn_key=(i,)).generate_state(1, uint64)
    assert derive_seed(0, 0) == int(np.random.SeedSequence(0, spawn_key=(0,)).generate_state(1, np.uint64)[0])
    c1 = parse_config({**SMALL, "samples": 3, "master_seed": 5})
    c2 = parse_config({**SMALL, "samples": 3, "master_seed": 5})
    c5 = parse_config({**SMALL, "samples": 5, "master_seed": 5})
    assert c1.seeds == c2.seeds == c5.seeds[:3]
    assert len(set(c5.seeds)) == 5
    assert parse_config({**SMALL, "master_seed": 6}).seeds != c1.seeds[:1]
    assert c1.config_hash == c2.config_hash != c5.config_hash


def test_override_models():
    c = parse_config({**SMALL, "upper": {"model": "haldane"}, "lower": {"model": "staggered", "params": {"mass": 0.9}}})
    exp = c.experiment()
    assert exp.upper.kind.value == "haldane" and exp.lower.params["mass"] == 0.9
    assert exp.coupling.pattern is exp.upper


# --- disorder averaging ---------------------------------------------------------------------


def test_average_statistics():
    vals = {1: 1.0, 2: 2.0, 3: 4.0}
    avg = disorder_average(lambda s: vals[s], seeds=[1, 2, 3])
    assert avg.mean == pytest.approx(7 / 3)
    assert avg.stdev == pytest.approx(np.std([1, 2, 4], ddof=1))
    assert avg.stderr == pytest.approx(avg.stdev / np.sqrt(3))
    assert avg.values == [1.0, 2.0, 4.0]


def test_single_sample_has_no_error_bar():
    avg = disorder_average(lambda s: 0.5, parse_config(SMALL))
    assert avg.stderr is None and avg.stdev is None and avg.mean == 0.5


def test_clean_samples_are_identical():
    avg = disorder_average(lambda s: 1.25, seeds=range(6))
    assert avg.stderr == 0.0


def test_parallel_equals_serial(monkeypatch):
    seeds = parse_config({**SMALL, "samples": 8}).seeds
    op = lambda s: float(np.random.default_rng(s).normal())  # noqa: E731
    serial = disorder_average(op, seeds=seeds, threads=1)
    monkeypatch.setenv("INTERFACELAB_THREADS", "4")
    parallel = disorder_average(op, seeds=seeds)
    assert serial.values == parallel.values and serial.mean == parallel.mean


def test_sample_failure_carries_seed():
    def op(seed):
        if seed == 7:
            raise RuntimeError("boom")
        return 0.0

    with pytest.raises(SampleFailure) as info:
        disorder_average(op, seeds=[3, 7, 9])
    assert info.value.seed == 7


# --- full runs -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def disordered_run(tmp_path_factory):
    config = parse_config({**SMALL, "samples": 2, "lambda": [0.0, 0.2], "master_seed": 3})
    out = tmp_path_factory.mktemp("run")
    return config, run_experiment(config, out_dir=out), out


def test_run_outputs(disordered_run):
    config, result, out = disordered_run
    assert result.exit_code == 0 and result.failures == []
    rows = list(csv.DictReader(io.StringIO((out / "sweep.csv").read_text())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 4
    assert {int(r["seed"]) for r in rows} == set(config.seeds)
    for r in rows:
        assert round(float(r["current_2pi"])) == 0 and round(float(r["chern_plus"])) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"]["passed"] and report["config_hash"] == config.config_hash
    stats = report["points"][1]["statistics"]["current_2pi"]
    assert stats["stdev"] is not None and stats["tolerance"] == 0.05
    for point in report["points"]:
        for sample in point["samples"]:
            for name in ("current_2pi", "winding", "index", "chern_plus", "chern_minus"):
                assert {"value", "tolerance", "quantized"} <= set(sample[name])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"] == config.seeds and "wall_clock_seconds" in manifest
    assert json.loads((out / "failures.json").read_text()) == []


def test_rerun_is_byte_identical(disordered_run, tmp_path):
    config, _, out = disordered_run
    run_experiment(config, out_dir=tmp_path, threads=2)
    for name in ("sweep.csv", "report.json"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_failures_give_nonzero_exit(tmp_path):
    # an absurd tolerance on the current makes every verdict fail
    config = parse_config({"experiment": "haldane_vs_staggered", "geometry": {"length_1": 24, "half_width_2": 24},
                           "quantities": ["current"], "tolerances": {"current": 1e-12}})
    result = run_experiment(config, out_dir=tmp_path)
    assert result.exit_code == 1
    failures = json.loads((tmp_path / "failures.json").read_text())
    assert failures[0]["quantity"] == "current_2pi" and failures[0]["error"] == "NotQuantized"


def test_errors_are_listed_not_raised(tmp_path):
    # window overlapping the bulk bands: the gap check fails for every point
    config = parse_config({**SMALL, "window": {"gap": [-1.6, 0.6], "fermi_energy": 0.0}, "quantities": ["winding"]})
    result = run_experiment(config)
    assert result.exit_code == 1 and result.failures[0]["error"] == "GapViolated"
