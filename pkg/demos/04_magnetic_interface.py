"""Two magnetic lattices with opposite flux, and one magnetic lattice against vacuum.

At flux 2 pi / 3 the lowest Harper band has Chern number +1, at -2 pi / 3
it has -1. Gluing them gives two interface channels; replacing the lower
half by a large on-site energy (vacuum) leaves the single edge channel of a
half-space. Each run takes about a minute at the catalog size.

    python3 demos/04_magnetic_interface.py
"""

from interfacelab.catalog import experiment
from interfacelab.interface import bulk_interface_report


def main():
    for name in ("harper_vs_harper", "harper_vs_vacuum"):
        exp = experiment(name)
        rep = bulk_interface_report(exp)
        print(f"{name}: Ch {rep.chern_plus.integer:+d} / {rep.chern_minus.integer:+d}, "
              f"2 pi * current {rep.current.value:.4f}, winding {rep.winding.value:.4f}, "
              f"index {rep.index.value:.4f}")
        exp.clear_cache()


if __name__ == "__main__":
    main()
