"""Named models and reference interface experiments.

Each experiment stores its Fermi level, window and reference sizes; these
are chosen, not computed. Sizes are set so that the window holds enough
interface levels and the interface states have decayed before the edge of
the trace band.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownModel
from .interface import InterfaceExperiment
from .lattice import (
    CouplingSpec,
    LatticeGeometry,
    ModelSpec,
    atomic_insulator_model,
    haldane_model,
    harper_model,
    staggered_honeycomb_model,
)
from .spectral import make_bump_window

_MODEL_FACTORIES = {
    "harper": harper_model,
    "haldane": haldane_model,
    "staggered_honeycomb": staggered_honeycomb_model,
    "atomic_insulator": atomic_insulator_model,
}

# name -> (factory, default parameters)
MODELS: dict[str, tuple[str, dict]] = {
    "haldane": ("haldane", {"t1": 1.0, "t2": 0.2, "phi": np.pi / 2, "mass": 0.0}),
    "staggered": ("staggered_honeycomb", {"t1": 1.0, "mass": 0.5}),
    "staggered_wide_gap": ("staggered_honeycomb", {"t1": 1.0, "mass": 1.0}),
    "harper_plus": ("harper", {"flux": 2 * np.pi / 3}),
    "harper_minus": ("harper", {"flux": -2 * np.pi / 3}),
    "harper_free": ("harper", {"flux": 0.0}),
    "vacuum": ("atomic_insulator", {"energy": 10.0}),
}


def model(name: str, **overrides) -> ModelSpec:
    """Catalog model by name, or a raw family name with explicit parameters."""
    if name in MODELS:
        family, params = MODELS[name]
        params = {**params, **overrides}
    elif name in _MODEL_FACTORIES:
        family, params = name, dict(overrides)
    else:
        raise UnknownModel(f"unknown model {name!r}; known: {sorted(MODELS) + sorted(_MODEL_FACTORIES)}")
    try:
        return _MODEL_FACTORIES[family](**params)
    except TypeError as exc:
        raise UnknownModel(f"bad parameters for model {name!r}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentDefaults:
    upper: str
    lower: str
    fermi_energy: float
    gap: tuple[float, float]
    sharpness: float
    length_1: int
    half_width_2: int
    index_window: int
    trace_rows: tuple[int, int] | None = None
    upper_params: dict = field(default_factory=dict)
    lower_params: dict = field(default_factory=dict)
    description: str = ""


EXPERIMENTS: dict[str, ExperimentDefaults] = {
    "haldane_vs_staggered": ExperimentDefaults(
        "haldane", "staggered_wide_gap", 0.0, (-0.6, 0.6), 0.6, 32, 32, 8,
        description="Chern insulator against a trivial insulator; one interface channel",
    ),
    "harper_vs_harper": ExperimentDefaults(
        "harper_plus", "harper_minus", -1.4, (-1.95, -0.78), 0.45, 48, 48, 12,
        description="opposite fluxes 2pi/3 and -2pi/3, lowest gap; two channels",
    ),
    "harper_vs_vacuum": ExperimentDefaults(
        "harper_plus", "vacuum", -1.4, (-1.95, -0.78), 0.45, 48, 48, 12,
        description="half-space limit: magnetic lattice against a large on-site energy",
    ),
    "trivial_vs_trivial": ExperimentDefaults(
        "staggered_wide_gap", "staggered_wide_gap", 0.0, (-0.6, 0.6), 0.6, 16, 16, 4,
        description="identical trivial insulators; the coupling restores the bulk",
    ),
}


def experiment(name: str, *, length_1=None, half_width_2=None, gap=None, fermi_energy=None, sharpness=None,
               index_window=None, trace_rows=None, kappa=1.0, strip_width=None, mu=1.0,
               upper_params=None, lower_params=None) -> InterfaceExperiment:
    """Build a catalog experiment, optionally overriding its defaults."""
    if name not in EXPERIMENTS:
        raise UnknownModel(f"unknown experiment {name!r}; known: {sorted(EXPERIMENTS)}")
    d = EXPERIMENTS[name]
    upper = model(d.upper, **{**d.upper_params, **(upper_params or {})})
    lower = model(d.lower, **{**d.lower_params, **(lower_params or {})})
    L1 = d.length_1 if length_1 is None else int(length_1)
    L2 = d.half_width_2 if half_width_2 is None else int(half_width_2)
    window = make_bump_window(
        d.gap if gap is None else tuple(gap),
        d.fermi_energy if fermi_energy is None else float(fermi_energy),
        d.sharpness if sharpness is None else float(sharpness),
    )
    if index_window is None:
        index_window = min(d.index_window, L1 // 4)
    if trace_rows is None and d.trace_rows is not None and L2 == d.half_width_2:
        trace_rows = d.trace_rows
    return InterfaceExperiment(
        upper, lower, window, LatticeGeometry(L1, L2, upper.orbitals),
        coupling=CouplingSpec(upper, kappa, strip_width), mu=mu, trace_rows=trace_rows,
        index_window=int(index_window), name=name,
    )
