"""Command-line entry point: ``interfacelab <subcommand> [options]``.

Every subcommand prints JSON (or CSV for ``sweep`` and ``decay``) on stdout
and exits 0 iff every integer verdict it computed is quantized.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import EXPERIMENTS, MODELS, model
from .errors import InterfaceLabError
from .harness import QUANTITIES, parse_config, rows_to_csv, run_experiment, sample_experiment
from .interface import (
    bulk_chern,
    bulk_interface_report,
    interface_decay,
    interface_index,
    interface_winding,
)
from .lattice import Boundary, DisorderSample, LatticeGeometry, build_bulk_hamiltonian
from .spectral import fermi_projection
from .topology import chern_realspace_bott, cocycle_identity_suite


def parse_range(text: str) -> list[float]:
    """``start:stop:n`` (inclusive, ``n`` points) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected start:stop:n, got {text!r}")
        start, stop, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise argparse.ArgumentTypeError("n must be positive")
        return [float(x) for x in np.linspace(start, stop, n)]
    return [float(x) for x in text.split(",") if x]


def parse_tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    return name.strip(), float(value)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--experiment", help=f"catalog experiment ({', '.join(sorted(EXPERIMENTS))})")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--samples", type=int, help="number of disorder samples")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--tolerance", type=parse_tolerance, action="append", default=[], metavar="NAME=VALUE")
    p.add_argument("--length-1", type=int, help="interface length L1")
    p.add_argument("--half-width-2", type=int, help="half width L2 of the strip")
    p.add_argument("--mu", type=parse_range, help="coupling values, start:stop:n or a,b,c")
    p.add_argument("--lambda", dest="lam", type=parse_range, help="disorder strengths, start:stop:n or a,b,c")
    p.add_argument("--threads", type=int, help="worker threads (default: INTERFACELAB_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interfacelab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("chern", help="bulk Chern numbers (plaquette, or Bott with disorder)")
    _common(p)
    p.add_argument("--model", help=f"single catalog model ({', '.join(sorted(MODELS))})")
    p.add_argument("--fermi-energy", type=float)
    p.add_argument("--n-k", type=int, default=24)

    for name, text in (
        ("interface", "current, winding, index and both Chern numbers with chain residuals"),
        ("winding", "winding number of the flux unitary"),
        ("index", "Fredholm index of the half-line compression"),
        ("report", "full run: sweep.csv, report.json and manifest.json"),
    ):
        _common(sub.add_parser(name, help=text))

    p = sub.add_parser("sweep", help="verdicts over a mu and lambda grid, as CSV")
    _common(p)
    p.add_argument("--quantities", type=lambda s: s.split(","), help=f"subset of {','.join(QUANTITIES)}")

    p = sub.add_parser("decay", help="decay profile of g(H) away from the interface, as CSV")
    _common(p)
    p.add_argument("--tail-start", type=int)

    p = sub.add_parser("cocycle", help="pass/fail table for the cocycle identities")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--out", type=Path)
    return parser


def config_from_args(args, **extra):
    raw = json.loads(args.config.read_text()) if args.config else {}
    if args.experiment:
        raw["experiment"] = args.experiment
    raw.setdefault("experiment", "haldane_vs_staggered")
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.samples is not None:
        raw["samples"] = args.samples
    if args.out is not None:
        raw["output_dir"] = str(args.out)
    geom = raw.setdefault("geometry", {})
    if args.length_1 is not None:
        geom["length_1"] = args.length_1
    if args.half_width_2 is not None:
        geom["half_width_2"] = args.half_width_2
    if args.mu is not None:
        raw["mu"] = args.mu
    if args.lam is not None:
        raw["lambda"] = args.lam
    if args.tolerance:
        raw["tolerances"] = {**raw.get("tolerances", {}), **dict(args.tolerance)}
    raw.update({k: v for k, v in extra.items() if v is not None})
    return parse_config(raw)


def _emit(payload, args, filename):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if getattr(args, "out", None) is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / filename).write_text(text)


def _first_point(config):
    return config["mu"][0], config["lambda"][0], config.seeds[0]


def cmd_chern(args) -> int:
    config = config_from_args(args)
    _, lam, seed = _first_point(config)
    if args.model:
        spec = model(args.model)
        ef = 0.0 if args.fermi_energy is None else args.fermi_energy
        targets = {args.model: spec}
    else:
        exp = config.experiment()
        ef = exp.window.fermi_energy if args.fermi_energy is None else args.fermi_energy
        targets = {"chern_plus": exp.upper, "chern_minus": exp.lower}
    out = {}
    for key, spec in targets.items():
        if lam > 0:
            spec = spec.with_disorder(lam)
            L = config["geometry"]["length_1"]
            torus = LatticeGeometry(L, min(config["geometry"]["half_width_2"], 8), spec.orbitals)
            h = build_bulk_hamiltonian(spec, torus, DisorderSample(seed), bc_2=Boundary.PERIODIC)
            rep = chern_realspace_bott(fermi_projection(h, ef), torus, tolerance=config.tolerances["bott"],
                                       method="bott", seed=seed)
        else:
            rep = bulk_chern(spec, ef, n_k=args.n_k)
            rep.tolerance = config.tolerances["chern"]
        out[key] = rep.to_dict()
    _emit(out, args, "chern.json")
    return 0 if all(r["quantized"] for r in out.values()) else 1


def _single(args, compute, filename) -> int:
    config = config_from_args(args)
    mu, lam, seed = _first_point(config)
    exp = sample_experiment(config.experiment(), mu, lam, seed)
    rep = compute(exp, config.tolerances)
    _emit(rep.to_dict(), args, filename)
    return 0 if rep.quantized else 1


def cmd_interface(args) -> int:
    config = config_from_args(args)
    mu, lam, seed = _first_point(config)
    exp = sample_experiment(config.experiment(), mu, lam, seed)
    rep = bulk_interface_report(exp, tolerances=config.tolerances)
    _emit(rep.to_dict(), args, "interface.json")
    return 0 if rep.consistent else 1


def cmd_winding(args) -> int:
    return _single(args, lambda e, t: interface_winding(e, tolerance=t["winding"]), "winding.json")


def cmd_index(args) -> int:
    return _single(args, lambda e, t: interface_index(e, tolerance=t["index"]), "index.json")


def cmd_sweep(args) -> int:
    config = config_from_args(args, quantities=args.quantities)
    result = run_experiment(config, threads=args.threads)
    sys.stdout.write(rows_to_csv(result.rows))
    if result.failures:
        sys.stderr.write(json.dumps(result.failures, indent=2, sort_keys=True) + "\n")
    return result.exit_code


def cmd_report(args) -> int:
    config = config_from_args(args)
    result = run_experiment(config, threads=args.threads)
    sys.stdout.write(result.json_text())
    return result.exit_code


def cmd_decay(args) -> int:
    config = config_from_args(args)
    mu, lam, seed = _first_point(config)
    exp = sample_experiment(config.experiment(), mu, lam, seed)
    rep = interface_decay(exp, tail_start=args.tail_start)
    path = None
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "decay.csv"
        rep.to_csv(path)
    sys.stdout.write("bin_kind,distance,max_abs_element\n")
    for kind, d, v in rep.rows():
        sys.stdout.write(f"{kind},{d},{float(v)!r}\n")
    sys.stderr.write(f"alpha_row={rep.alpha_row:.3f} alpha_column={rep.alpha_column:.3f}\n")
    return 0


def cmd_cocycle(args) -> int:
    rows = cocycle_identity_suite(seed=args.seed, n_cases=args.cases)
    sys.stdout.write(f"{'identity':<26} {'max_defect':>12} {'tolerance':>10}  verdict\n")
    for r in rows:
        verdict = "PASS" if r["passed"] else "FAIL"
        sys.stdout.write(f"{r['identity']:<26} {r['max_defect']:>12.3e} {r['tolerance']:>10.1e}  {verdict}\n")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "cocycle.json").write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return 0 if all(r["passed"] for r in rows) else 1


COMMANDS = {
    "chern": cmd_chern,
    "interface": cmd_interface,
    "winding": cmd_winding,
    "index": cmd_index,
    "sweep": cmd_sweep,
    "decay": cmd_decay,
    "cocycle": cmd_cocycle,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InterfaceLabError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
