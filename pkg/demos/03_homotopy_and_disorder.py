"""The index survives decoupling the interface and adding disorder.

First the coupling across the interface is switched off step by step
(H(mu) = H_plus + H_minus + mu K); at mu = 0 the index splits into the
contributions of the two half-spaces. Then the current is averaged over
disorder samples with reproducible seeds.

    python3 demos/03_homotopy_and_disorder.py
"""

from interfacelab.catalog import experiment
from interfacelab.harness import disorder_average, parse_config, sample_experiment
from interfacelab.interface import current_report, homotopy_sweep

SIZE = {"length_1": 24, "half_width_2": 24}


def main():
    exp = experiment("haldane_vs_staggered", **SIZE)
    for rep in homotopy_sweep(exp, [0.0, 0.5, 1.0], methods=("winding", "index")):
        m = rep.metadata
        line = f"mu = {m['mu']:.2f}: winding {m['winding']:+.4f}, index {m['index']:+.4f}"
        if "split" in m:
            s = m["split"]
            line += f"  (halves: upper {s['upper']['winding']:+.4f}, lower {s['lower']['winding']:+.4f})"
        print(line)

    config = parse_config({"experiment": "haldane_vs_staggered", "geometry": SIZE, "samples": 4,
                           "lambda": [0.3], "master_seed": 7})
    base = config.experiment()

    def current(seed):
        return current_report(sample_experiment(base, 1.0, 0.3, seed)).value

    avg = disorder_average(current, config)
    print(f"\nlambda = 0.3, {len(avg.values)} samples: 2 pi * current = {avg.mean:.4f} +- {avg.stderr:.4f}")
    for seed, v in zip(avg.seeds, avg.values):
        print(f"  seed {seed:>20}  {v:.4f}")


if __name__ == "__main__":
    main()
