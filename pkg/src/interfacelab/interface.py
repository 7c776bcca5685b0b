"""Interface experiments and the quantities of the bulk-interface chain.

An :class:`InterfaceExperiment` fixes two bulk models, the coupling, the
spectral window and a reference strip (periodic along the interface). From
it one gets ``H(mu) = H_plus (+) H_minus + mu K``, the interface current
density ``T(g(H) J1)``, the flux unitary, its winding number and the
Fredholm index of its half-line compression.

Traces over the strip are restricted to the band of rows ``trace_rows``
around the interface. The outer edges of a strip made of Chern materials
carry their own, counter-propagating boundary states; the band keeps them
out of every trace.

Sign of the unitary. For ``U = exp(2 pi i G(H))`` one finds
``Wind(U) = Ind(Pi U Pi*) = -2 pi T(g(H) J1)`` (a single chiral channel
already shows it: ``i int (1 - e^{2 pi i G}) dG = -1`` per unit velocity).
The chain therefore evaluates winding and index on
``exp(-2 pi i G(H))``, for which all three numbers agree;
:func:`flux_unitary` keeps ``+2 pi i`` as its default.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import LeakageAtBoundary, VerdictChange
from .lattice import (
    Boundary,
    CouplingSpec,
    DisorderSample,
    Half,
    HamiltonianMatrix,
    LatticeGeometry,
    ModelSpec,
    assemble_interface,
    bloch_hamiltonian,
    build_bulk_hamiltonian,
    build_coupling,
    displacement_matrix,
    restrict_half_space,
)
from .spectral import (
    DecayReport,
    EigenDecomposition,
    GapReport,
    SpectralWindow,
    decay_profile,
    eigendecompose,
    fermi_projection,
    verify_gap,
)
from .topology import (
    LEAKAGE_LIMIT,
    TOL_BOTT,
    TOL_FREDHOLM,
    TOL_PLAQUETTE,
    TOL_WINDING,
    TopologicalReport,
    boundary_leakage,
    chern_plaquette,
    chern_realspace_bott,
    fredholm_index_eta,
    winding_number,
)

#: exponent sign of the unitary fed to the winding number and the index
INDEX_SIGN = -1
TOL_CURRENT = 0.05
TOL_CHAIN_CURRENT_WINDING = 0.05
TOL_CHAIN_WINDING_CHERN = 0.1


@dataclass(frozen=True, eq=False)
class InterfaceExperiment:
    """Immutable description of one interface computation.

    ``geometry`` is the reference strip and must be periodic along the
    interface; the Fredholm index uses the same strip with open ends.
    Matrices and eigendecompositions are cached on the instance.
    """

    upper: ModelSpec
    lower: ModelSpec
    window: SpectralWindow
    geometry: LatticeGeometry
    coupling: CouplingSpec | None = None
    mu: float = 1.0
    sample: DisorderSample | None = None
    trace_rows: tuple[int, int] | None = None
    index_window: int = 8
    gap_rows: int = 8
    name: str = "custom"
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})
        if self.geometry.bc_1 is not Boundary.PERIODIC:
            raise ValueError("the reference geometry must be periodic along the interface")
        if self.geometry.row_span is not None:
            raise ValueError("the reference geometry must span both halves")
        if self.upper.orbitals != self.lower.orbitals or self.geometry.orbitals != self.upper.orbitals:
            raise ValueError("both models and the geometry need the same number of orbitals")
        if self.coupling is None:
            object.__setattr__(self, "coupling", CouplingSpec(self.upper))
        L2 = self.geometry.half_width_2
        rows = self.trace_rows
        rows = (-(L2 // 2), L2 // 2) if rows is None else (int(rows[0]), int(rows[1]))
        if not -L2 <= rows[0] < 0 <= rows[1] - 1 < L2:
            raise ValueError(f"trace rows {rows} must contain the interface and stay inside the strip")
        object.__setattr__(self, "trace_rows", rows)
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError(f"mu must lie in [0, 1], got {self.mu}")

    # -- variants -----------------------------------------------------------------

    def replace(self, **changes) -> "InterfaceExperiment":
        return dataclasses.replace(self, **changes)

    def with_mu(self, mu: float) -> "InterfaceExperiment":
        return self.replace(mu=float(mu))

    def with_sample(self, sample: DisorderSample | None, disorder: float | None = None) -> "InterfaceExperiment":
        upper, lower = self.upper, self.lower
        if disorder is not None:
            upper, lower = upper.with_disorder(disorder), lower.with_disorder(disorder)
        return self.replace(sample=sample, upper=upper, lower=lower)

    @property
    def disorder(self) -> float:
        return max(self.upper.disorder, self.lower.disorder)

    # -- matrices -----------------------------------------------------------------

    def strip(self, bc_1=Boundary.PERIODIC) -> LatticeGeometry:
        return self.geometry.with_bc(bc_1)

    def torus(self) -> LatticeGeometry:
        """Bulk torus used for gap checks and disordered Chern numbers."""
        g = self.geometry
        return LatticeGeometry(g.length_1, min(g.half_width_2, self.gap_rows), g.orbitals, Boundary.PERIODIC)

    def hamiltonian(self, bc_1=Boundary.PERIODIC) -> HamiltonianMatrix:
        key = ("H", Boundary(bc_1))
        if key not in self._cache:
            geom = self.strip(bc_1)
            h_plus = restrict_half_space(build_bulk_hamiltonian(self.upper, geom, self.sample), Half.UPPER)
            h_minus = restrict_half_space(build_bulk_hamiltonian(self.lower, geom, self.sample), Half.LOWER)
            k = build_coupling(self.coupling, geom, self.sample)
            self._cache[key] = assemble_interface(h_plus, h_minus, k, self.mu)
        return self._cache[key]

    def decomposition(self, bc_1=Boundary.PERIODIC) -> EigenDecomposition:
        """Eigenpairs of ``H(mu)`` inside the gap window."""
        key = ("dec", Boundary(bc_1))
        if key not in self._cache:
            self._cache[key] = eigendecompose(self.hamiltonian(bc_1), self.window.gap)
        return self._cache[key]

    def bulk_tori(self) -> tuple[HamiltonianMatrix, HamiltonianMatrix]:
        t = self.torus()
        return (
            build_bulk_hamiltonian(self.upper, t, self.sample, bc_2=Boundary.PERIODIC),
            build_bulk_hamiltonian(self.lower, t, self.sample, bc_2=Boundary.PERIODIC),
        )

    def verify_gap(self) -> GapReport:
        """Both bulk spectra avoid the window (cached; raises GapViolated)."""
        if "gap" not in self._cache:
            self._cache["gap"] = verify_gap(*self.bulk_tori(), self.window.gap)
        return self._cache["gap"]

    def clear_cache(self):
        self._cache.clear()


# --- current ----------------------------------------------------------------------


def _band(exp: InterfaceExperiment, geom: LatticeGeometry) -> np.ndarray:
    return geom.row_mask(*exp.trace_rows)


def interface_current_density(exp: InterfaceExperiment, *, check_leakage=True) -> float:
    """``T(g(H) J1)`` per unit length over the trace rows.

    The trace is the symmetrized ``(1/2) Tr(g J1 + J1 g)``, i.e. the real
    part of ``Tr(g J1)``. The quantized number is ``2 pi`` times the result.
    """
    exp.verify_gap()
    h = exp.hamiltonian()
    geom = h.geometry
    dec = exp.decomposition()
    gm = dec.function(exp.window.g)
    if check_leakage:
        leak = boundary_leakage(gm, geom, exp.trace_rows)
        if leak > LEAKAGE_LIMIT:
            raise LeakageAtBoundary(f"g(H) reaches the edge of the trace band (column norm {leak:.3g})", leak)
    sel = _band(exp, geom)
    j_cols = 1j * displacement_matrix(geom)[:, sel] * h.matrix[:, sel]
    tr = np.sum(gm[sel] * j_cols.T)
    return float(tr.real / geom.length_1)


def current_report(exp: InterfaceExperiment, tolerance=TOL_CURRENT, **kw) -> TopologicalReport:
    value = 2 * np.pi * interface_current_density(exp, **kw)
    return TopologicalReport("current_2pi", value, tolerance, _meta(exp))


# --- unitary, winding, index ---------------------------------------------------------


def unitary_minus_one(exp: InterfaceExperiment, *, sign=1, bc_1=Boundary.PERIODIC) -> np.ndarray:
    """``exp(2 pi i sign G(H)) - 1`` from the windowed eigenpairs."""
    dec = exp.decomposition(bc_1)
    return dec.function(lambda e: exp.window.unitary_symbol(e, power=sign))


def flux_unitary(exp: InterfaceExperiment, *, sign=1, bc_1=Boundary.PERIODIC) -> np.ndarray:
    """``U = exp(2 pi i G(H))`` (``sign=-1`` gives the adjoint)."""
    u = unitary_minus_one(exp, sign=sign, bc_1=bc_1)
    u[np.diag_indices_from(u)] += 1.0
    return u


def interface_winding(exp: InterfaceExperiment, *, tolerance=TOL_WINDING, sign=INDEX_SIGN,
                      check_leakage=True) -> TopologicalReport:
    exp.verify_gap()
    u = flux_unitary(exp, sign=sign)
    geom = exp.strip(Boundary.PERIODIC)
    rep = winding_number(u, geom, rows=exp.trace_rows, tolerance=tolerance, check_leakage=check_leakage,
                         **_meta(exp), unitary_sign=sign)
    return rep


def interface_index(exp: InterfaceExperiment, *, tolerance=TOL_FREDHOLM, sign=INDEX_SIGN,
                    window_halfwidth=None, check_window=True) -> TopologicalReport:
    """Fredholm index of ``Pi_1 U Pi_1*`` on the open strip."""
    exp.verify_gap()
    u = flux_unitary(exp, sign=sign, bc_1=Boundary.OPEN)
    geom = exp.strip(Boundary.OPEN)
    W = exp.index_window if window_halfwidth is None else window_halfwidth
    return fredholm_index_eta(u, geom, W, rows=exp.trace_rows, tolerance=tolerance, check_window=check_window,
                              **_meta(exp), unitary_sign=sign)


def _meta(exp: InterfaceExperiment) -> dict:
    g = exp.geometry
    meta = {"experiment": exp.name, "L1": g.length_1, "L2": g.half_width_2, "mu": float(exp.mu),
            "lambda": float(exp.disorder), "trace_rows": list(exp.trace_rows)}
    if exp.sample is not None:
        meta["seed"] = int(exp.sample.seed)
    return meta


# --- homotopy --------------------------------------------------------------------------


def half_space_split(exp: InterfaceExperiment, *, methods=("winding", "index")) -> dict:
    """Indices of the two decoupled half-space operators at ``mu = 0``.

    Each half is compressed to its own rows and diagonalized on its own; the
    traces run over the part of the band inside that half.
    """
    exp0 = exp.with_mu(0.0)
    lo, hi = exp.trace_rows
    out = {}
    for half, rows in ((Half.UPPER, (0, hi)), (Half.LOWER, (lo, 0))):
        vals = {}
        for method in methods:
            bc = Boundary.PERIODIC if method == "winding" else Boundary.OPEN
            h = exp0.hamiltonian(bc).compress(half)
            dec = eigendecompose(h, exp.window.gap)
            u = dec.function(lambda e: exp.window.unitary_symbol(e, power=INDEX_SIGN), plus_identity=1.0)
            if method == "winding":
                vals[method] = winding_number(u, h.geometry, rows=rows, check_leakage=False).value
            else:
                vals[method] = fredholm_index_eta(u, h.geometry, exp.index_window, rows=rows,
                                                  check_window=False).value
        out[half.value] = vals
    return out


def homotopy_sweep(exp: InterfaceExperiment, mu_list, *, methods=("winding", "index"),
                   split=True) -> list[TopologicalReport]:
    """Winding and index of ``U(mu)`` along ``H(mu)``; one report per ``mu``.

    The report value is the first requested method; the others are in the
    metadata. At ``mu = 0`` the metadata also holds the half-space split. A
    change of integer verdict along the sweep is reported with a
    :class:`VerdictChange` warning and flagged in every report.
    """
    reports = []
    for mu in mu_list:
        e = exp.with_mu(mu)
        vals = {}
        for method in methods:
            if method == "winding":
                vals[method] = interface_winding(e, check_leakage=False).value
            elif method == "index":
                vals[method] = interface_index(e, check_window=False).value
            else:
                raise ValueError(f"unknown method {method!r}")
        tol = TOL_WINDING if methods[0] == "winding" else TOL_FREDHOLM
        meta = {**_meta(e), **{m: float(v) for m, v in vals.items()}}
        if split and mu == 0.0:
            halves = half_space_split(e, methods=methods)
            meta["split"] = halves
            meta["split_defect"] = {m: float(abs(vals[m] - halves["upper"][m] - halves["lower"][m])) for m in methods}
        reports.append(TopologicalReport(f"homotopy_{methods[0]}", float(vals[methods[0]]), tol, meta))
        e.clear_cache()
    integers = {r.integer for r in reports}
    if len(integers) > 1:
        for r in reports:
            r.metadata["verdict_change"] = True
        warnings.warn(VerdictChange(f"integer verdict changes along the sweep: {sorted(integers)}"), stacklevel=2)
    return reports


# --- bulk Chern numbers and the chain -------------------------------------------------------


def bulk_chern(spec: ModelSpec, fermi_energy: float, *, sample=None, torus=None, n_k=24) -> TopologicalReport:
    """Plaquette Chern number for a clean model, Bott index of one sample otherwise."""
    if spec.disorder == 0.0 or sample is None:
        return chern_plaquette(bloch_hamiltonian(spec), fermi_energy, n_k, tolerance=TOL_PLAQUETTE,
                               method="plaquette", model=spec.kind.value)
    h = build_bulk_hamiltonian(spec, torus, sample, bc_2=Boundary.PERIODIC)
    p = fermi_projection(h, fermi_energy)
    return chern_realspace_bott(p, torus, tolerance=TOL_BOTT, method="bott", model=spec.kind.value,
                                seed=int(sample.seed))


@dataclass
class BulkInterfaceReport:
    current: TopologicalReport
    winding: TopologicalReport
    index: TopologicalReport
    chern_plus: TopologicalReport
    chern_minus: TopologicalReport
    gap: GapReport | None = None

    @property
    def chern_difference(self) -> int:
        return self.chern_plus.integer - self.chern_minus.integer

    @property
    def residuals(self) -> dict:
        return {
            "current_vs_winding": {"value": abs(self.current.value - self.winding.value),
                                   "tolerance": TOL_CHAIN_CURRENT_WINDING},
            "winding_vs_chern": {"value": abs(self.winding.value - self.chern_difference),
                                 "tolerance": TOL_CHAIN_WINDING_CHERN},
            "index_vs_chern": {"value": abs(self.index.value - self.chern_difference),
                               "tolerance": self.index.tolerance},
        }

    @property
    def consistent(self) -> bool:
        reps = (self.current, self.winding, self.index, self.chern_plus, self.chern_minus)
        return all(r.quantized for r in reps) and all(v["value"] < v["tolerance"] for v in self.residuals.values())

    def to_dict(self) -> dict:
        residuals = {k: {**v, "passed": bool(v["value"] < v["tolerance"])} for k, v in self.residuals.items()}
        out = {
            "current_2pi": self.current.to_dict(),
            "winding": self.winding.to_dict(),
            "index": self.index.to_dict(),
            "chern_plus": self.chern_plus.to_dict(),
            "chern_minus": self.chern_minus.to_dict(),
            "chern_difference": self.chern_difference,
            "chain_residuals": residuals,
            "consistent": self.consistent,
        }
        if self.gap is not None:
            out["gap"] = {"interval": list(self.gap.gap), "margins": dict(self.gap.margins)}
        return out


def bulk_interface_report(exp: InterfaceExperiment, *, tolerances=None, n_k=24) -> BulkInterfaceReport:
    """2 pi current, winding, index and both bulk Chern numbers, with chain residuals."""
    tol = {"current": TOL_CURRENT, "winding": TOL_WINDING, "index": TOL_FREDHOLM, **(tolerances or {})}
    gap = exp.verify_gap()
    cur = current_report(exp, tolerance=tol["current"])
    wind = interface_winding(exp, tolerance=tol["winding"])
    idx = interface_index(exp, tolerance=tol["index"])
    torus = exp.torus()
    ef = exp.window.fermi_energy
    ch_p = bulk_chern(exp.upper, ef, sample=exp.sample, torus=torus, n_k=n_k)
    ch_m = bulk_chern(exp.lower, ef, sample=exp.sample, torus=torus, n_k=n_k)
    return BulkInterfaceReport(cur, wind, idx, ch_p, ch_m, gap)


def interface_decay(exp: InterfaceExperiment, *, tail_start=None) -> DecayReport:
    """Decay profile of ``g(H)`` over the trace rows."""
    exp.verify_gap()
    return decay_profile(exp.hamiltonian(), exp.window, rows=exp.trace_rows, tail_start=tail_start,
                         decomposition=exp.decomposition())
