"""Configuration, disorder Monte-Carlo and report emission.

A run is described by a JSON document validated against
:data:`CONFIG_SCHEMA`. Every ``(mu, lambda, sample)`` triple is an
independent task; tasks run in a thread pool and are reduced in input order,
so serial and parallel runs write identical files. Per-sample seeds are
``SeedSequence(master_seed, spawn_key=(i,))``: adding samples never changes
the seeds of existing ones.

Data artifacts (``sweep.csv``, ``report.json``) hold no timings or host
information; those go to ``manifest.json``.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .catalog import EXPERIMENTS, MODELS, experiment, model
from .errors import InterfaceLabError, SampleFailure, SchemaError, UnknownModel
from .interface import (
    TOL_CURRENT,
    InterfaceExperiment,
    bulk_chern,
    current_report,
    interface_index,
    interface_winding,
)
from .lattice import Boundary, CouplingSpec, DisorderSample
from .topology import TOL_BOTT, TOL_FREDHOLM, TOL_PLAQUETTE, TOL_WINDING

SCHEMA_VERSION = 1
THREADS_ENV = "INTERFACELAB_THREADS"
QUANTITIES = ("current", "winding", "index", "chern")
CSV_COLUMNS = ("mu", "lambda", "seed", "current_2pi", "winding", "index", "chern_plus", "chern_minus")

_number = {"type": "number"}
_model_ref = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": {"type": "string"},
        "params": {"type": "object", "additionalProperties": _number},
    },
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "interfacelab run configuration",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"type": "string"},
        "upper": _model_ref,
        "lower": _model_ref,
        "geometry": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "length_1": {"type": "integer", "minimum": 2},
                "half_width_2": {"type": "integer", "minimum": 2},
            },
        },
        "window": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gap": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
                "fermi_energy": _number,
                "sharpness": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "coupling": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kappa": _number,
                "strip_width": {"type": ["integer", "null"], "minimum": 0},
            },
        },
        "trace_rows": {
            "type": ["array", "null"],
            "items": {"type": "integer"},
            "minItems": 2,
            "maxItems": 2,
        },
        "index_window": {"type": ["integer", "null"], "minimum": 1},
        "mu": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1},
        "lambda": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "samples": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "quantities": {
            "type": "array",
            "items": {"enum": list(QUANTITIES)},
            "uniqueItems": True,
            "minItems": 1,
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {q: {"type": "number", "exclusiveMinimum": 0} for q in (*QUANTITIES, "bott")},
        },
        "output_dir": {"type": ["string", "null"]},
    },
}

DEFAULT_TOLERANCES = {
    "current": TOL_CURRENT,
    "winding": TOL_WINDING,
    "index": TOL_FREDHOLM,
    "chern": TOL_PLAQUETTE,
    "bott": TOL_BOTT,
}


def derive_seed(master_seed: int, index: int) -> int:
    """64-bit seed of sample ``index``; independent of the sample count."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with every default filled in."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def seeds(self) -> list[int]:
        return [derive_seed(self.data["master_seed"], i) for i in range(self.data["samples"])]

    @property
    def tolerances(self) -> dict:
        return self.data["tolerances"]

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.data).encode()).hexdigest()

    def replace(self, **changes) -> "RunConfig":
        raw = copy.deepcopy(self.data)
        raw.update(changes)
        return parse_config(raw)

    def experiment(self) -> InterfaceExperiment:
        d = self.data
        upper = d.get("upper") or {}
        lower = d.get("lower") or {}
        exp = experiment(
            d["experiment"],
            length_1=d["geometry"]["length_1"],
            half_width_2=d["geometry"]["half_width_2"],
            gap=d["window"]["gap"],
            fermi_energy=d["window"]["fermi_energy"],
            sharpness=d["window"]["sharpness"],
            index_window=d["index_window"],
            trace_rows=d["trace_rows"],
            kappa=d["coupling"]["kappa"],
            strip_width=d["coupling"]["strip_width"],
        )
        if upper or lower:
            new_upper = model(upper["model"], **upper.get("params", {})) if upper else exp.upper
            new_lower = model(lower["model"], **lower.get("params", {})) if lower else exp.lower
            coupling = CouplingSpec(new_upper, exp.coupling.kappa, exp.coupling.strip_width)
            exp = exp.replace(upper=new_upper, lower=new_lower, coupling=coupling)
        return exp


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _fill_defaults(raw: dict) -> dict:
    d = EXPERIMENTS[raw["experiment"]]
    out = copy.deepcopy(raw)
    out.setdefault("schema_version", SCHEMA_VERSION)
    geom = out.setdefault("geometry", {})
    geom.setdefault("length_1", d.length_1)
    geom.setdefault("half_width_2", d.half_width_2)
    win = out.setdefault("window", {})
    win.setdefault("gap", list(d.gap))
    win.setdefault("fermi_energy", d.fermi_energy)
    win.setdefault("sharpness", d.sharpness)
    coup = out.setdefault("coupling", {})
    coup.setdefault("kappa", 1.0)
    coup.setdefault("strip_width", None)
    out.setdefault("trace_rows", None)
    out.setdefault("index_window", None)
    out.setdefault("mu", [1.0])
    out.setdefault("lambda", [0.0])
    out.setdefault("samples", 1)
    out.setdefault("master_seed", 0)
    out.setdefault("quantities", list(QUANTITIES))
    out["tolerances"] = {**DEFAULT_TOLERANCES, **out.get("tolerances", {})}
    out.setdefault("output_dir", None)
    return out


def parse_config(source) -> RunConfig:
    """Read (path or dict), validate and fill defaults.

    Raises :class:`SchemaError` with the offending field path, or
    :class:`UnknownModel` for names missing from the catalog.
    """
    if isinstance(source, (str, os.PathLike)):
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    else:
        raw = copy.deepcopy(source)
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(raw))
    if error is not None:
        raise SchemaError(error.message, tuple(error.absolute_path))
    if raw["experiment"] not in EXPERIMENTS:
        raise UnknownModel(f"unknown experiment {raw['experiment']!r}; known: {sorted(EXPERIMENTS)}")
    for side in ("upper", "lower"):
        if side in raw and raw[side]["model"] not in MODELS:
            model(raw[side]["model"], **raw[side].get("params", {}))
    data = _fill_defaults(raw)
    lo, hi = data["window"]["gap"]
    if not lo < data["window"]["fermi_energy"] < hi:
        raise SchemaError("fermi_energy must lie inside the gap", ("window", "fermi_energy"))
    return RunConfig(data)


# --- disorder averaging ------------------------------------------------------------


def thread_count(threads=None) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def _ordered_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass
class DisorderAverage:
    mean: float
    stderr: float | None
    stdev: float | None
    values: list
    seeds: list

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "stdev": self.stdev, "n": len(self.values)}


def disorder_average(op, config: RunConfig | None = None, *, seeds=None, threads=None) -> DisorderAverage:
    """Monte-Carlo mean of ``op(seed)`` over the configured samples.

    ``stderr`` is the sample standard deviation over ``sqrt(N)``; with one
    sample both spread estimates are ``None``.
    """
    if seeds is None:
        if config is None:
            raise ValueError("need a config or explicit seeds")
        seeds = config.seeds
    seeds = list(seeds)
    if not seeds:
        raise ValueError("at least one sample is required")

    def run(seed):
        try:
            return float(op(seed))
        except Exception as exc:  # noqa: BLE001 - re-raised with the seed attached
            raise SampleFailure(seed, exc) from exc

    values = _ordered_map(run, seeds, thread_count(threads))
    arr = np.array(values)
    if arr.size == 1:
        return DisorderAverage(float(arr[0]), None, None, values, seeds)
    stdev = float(np.std(arr, ddof=1))
    return DisorderAverage(float(np.mean(arr)), stdev / np.sqrt(arr.size), stdev, values, seeds)


# --- one sample -------------------------------------------------------------------------


def sample_experiment(base: InterfaceExperiment, mu: float, lam: float, seed: int) -> InterfaceExperiment:
    sample = DisorderSample(seed) if lam > 0 else None
    return base.with_mu(mu).with_sample(sample, disorder=lam)


def evaluate_sample(config: RunConfig, mu: float, lam: float, seed: int) -> dict:
    """All requested quantities for one ``(mu, lambda, seed)``; values are report dicts."""
    tol = config.tolerances
    exp = sample_experiment(config.experiment(), mu, lam, seed)
    out = {}
    q = config["quantities"]
    if "current" in q:
        out["current_2pi"] = current_report(exp, tolerance=tol["current"])
    if "winding" in q:
        out["winding"] = interface_winding(exp, tolerance=tol["winding"])
    if "index" in q:
        # free the periodic strip before the open one is diagonalized
        exp._cache.pop(("dec", Boundary.PERIODIC), None)
        exp._cache.pop(("H", Boundary.PERIODIC), None)
        out["index"] = interface_index(exp, tolerance=tol["index"])
    if "chern" in q:
        ef = exp.window.fermi_energy
        torus = exp.torus()
        for key, spec in (("chern_plus", exp.upper), ("chern_minus", exp.lower)):
            rep = bulk_chern(spec, ef, sample=exp.sample, torus=torus)
            if rep.quantity == "chern_bott":
                rep.tolerance = tol["bott"]
            else:
                rep.tolerance = tol["chern"]
            out[key] = rep
    exp.clear_cache()
    return out


# --- a full run ---------------------------------------------------------------------------


@dataclass
class RunResult:
    exit_code: int
    rows: list
    report: dict
    manifest: dict
    failures: list = field(default_factory=list)

    def csv_text(self) -> str:
        return rows_to_csv(self.rows)

    def json_text(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True) + "\n"


def _fmt(x):
    return "" if x is None else repr(float(x))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(r["mu"]), _fmt(r["lambda"]), str(r["seed"])] + [_fmt(r.get(c)) for c in CSV_COLUMNS[3:]])
    return buf.getvalue()


def run_experiment(config: RunConfig, *, out_dir=None, threads=None) -> RunResult:
    """Evaluate every ``(mu, lambda, sample)``; write CSV, JSON and manifest.

    The exit code is 0 iff every requested verdict of every sample is
    quantized within its tolerance. Failed samples are listed, not raised.
    """
    t_start = time.perf_counter()
    timings = {}
    seeds = config.seeds
    tasks = []
    for mu in config["mu"]:
        for lam in config["lambda"]:
            for i, seed in enumerate(seeds):
                tasks.append((float(mu), float(lam), i, seed))

    def run(task):
        mu, lam, i, seed = task
        t0 = time.perf_counter()
        try:
            res = evaluate_sample(config, mu, lam, seed)
            err = None
        except InterfaceLabError as exc:
            res, err = None, exc
        return task, res, err, time.perf_counter() - t0

    # with lambda = 0 all samples coincide; compute once per (mu, lambda)
    distinct = {}
    for task in tasks:
        key = task[:2] if task[1] == 0.0 else task
        distinct.setdefault(key, task)
    done = dict(zip(distinct, _ordered_map(run, distinct.values(), thread_count(threads))))
    timings["samples"] = time.perf_counter() - t_start

    rows, failures, points = [], [], {}
    for task in tasks:
        mu, lam, i, seed = task
        key = task[:2] if lam == 0.0 else task
        _, res, err, _ = done[key]
        row = {"mu": mu, "lambda": lam, "seed": seed}
        if err is not None:
            failures.append({"mu": mu, "lambda": lam, "seed": seed, "error": type(err).__name__, "message": str(err)})
            rows.append(row)
            continue
        for name, rep in res.items():
            row[name] = rep.value
            if not rep.quantized:
                failures.append({"mu": mu, "lambda": lam, "seed": seed, "error": "NotQuantized",
                                 "quantity": name, "value": rep.value, "tolerance": rep.tolerance})
        rows.append(row)
        points.setdefault((mu, lam), []).append({"seed": seed, "sample": i, **{k: v.to_dict() for k, v in res.items()}})

    summary = []
    for (mu, lam), samples in points.items():
        entry = {"mu": mu, "lambda": lam, "samples": samples, "statistics": {}}
        for name in samples[0]:
            if name in ("seed", "sample"):
                continue
            vals = np.array([s[name]["value"] for s in samples])
            tol = samples[0][name]["tolerance"]
            mean = float(vals.mean())
            stdev = float(vals.std(ddof=1)) if vals.size > 1 else None
            entry["statistics"][name] = {
                "mean": mean,
                "integer": int(np.rint(mean)),
                "tolerance": tol,
                "mean_quantized": bool(abs(mean - np.rint(mean)) < tol),
                "all_quantized": all(s[name]["quantized"] for s in samples),
                "stdev": stdev,
                "stderr": None if stdev is None else stdev / np.sqrt(vals.size),
                "stdev_below_tolerance": None if stdev is None else bool(stdev < tol),
            }
        summary.append(entry)

    report = {
        "schema_version": SCHEMA_VERSION,
        "software_version": __version__,
        "config": config.data,
        "config_hash": config.config_hash,
        "seeds": seeds,
        "points": summary,
        "verdict": {"passed": not failures, "failures": failures},
    }
    exit_code = 0 if not failures else 1
    timings["total"] = time.perf_counter() - t_start
    manifest = {
        "config_hash": config.config_hash,
        "seeds": seeds,
        "software_version": __version__,
        "numpy_version": np.__version__,
        "threads": thread_count(threads),
        "wall_clock_seconds": timings,
        "per_sample_seconds": [{"mu": t[0], "lambda": t[1], "seed": t[3], "seconds": dt}
                               for t, _, _, dt in done.values()],
        "exit_code": exit_code,
    }
    result = RunResult(exit_code, rows, report, manifest, failures)
    out_dir = out_dir if out_dir is not None else config["output_dir"]
    if out_dir is not None:
        write_artifacts(result, out_dir)
    return result


def write_artifacts(result: RunResult, out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "sweep.csv", "json": out / "report.json", "manifest": out / "manifest.json"}
    paths["csv"].write_text(result.csv_text())
    paths["json"].write_text(result.json_text())
    paths["manifest"].write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    paths["failures"] = out / "failures.json"
    paths["failures"].write_text(json.dumps(result.failures, indent=2, sort_keys=True) + "\n")
    return paths
