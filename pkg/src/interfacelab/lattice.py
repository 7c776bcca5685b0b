"""Finite tight-binding truncations of covariant lattice Hamiltonians.

Sites are labelled ``(n1, n2, orbital)``. Direction 1 runs along the
interface, direction 2 across it; rows ``n2 >= 0`` hold the upper material
and rows ``n2 < 0`` the lower one. The flat index is row-major in ``n2``::

    index = ((n2 - row_lo) * L1 + (n1 - n1_lo)) * F + orbital

Magnetic fields enter in the Landau gauge: a hop by ``m = (m1, m2)`` from
column ``n1`` picks up ``exp(-i B m2 (n1 + m1/2))`` (equivalently
``<n|H|n + e2>`` carries ``exp(i B n1)``), so every plaquette encloses flux ``B`` and translations along direction 1 stay (magnetic)
symmetries.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import (
    GapClosed,
    IncommensurateFlux,
    RangeTooLarge,
    StripTooWide,
    SupportOverlap,
)

MAX_RANGE = 2
_FLUX_TOL = 1e-9


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Half(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


class ModelKind(str, enum.Enum):
    HARPER = "harper"
    GENERAL_MAGNETIC = "general_magnetic"
    HALDANE = "haldane"
    STAGGERED_HONEYCOMB = "staggered_honeycomb"


class Provenance(str, enum.Enum):
    BULK = "bulk"
    HALF_SPACE = "half_space"
    COUPLING = "coupling"
    INTERFACE = "interface"


@dataclass(frozen=True)
class LatticeGeometry:
    """Strip of ``L1`` columns and ``2 * L2`` rows with ``F`` orbitals per site.

    ``row_span`` overrides the default row range ``[-L2, L2)``; it is used
    for half-space compressions and for magnetic unit cells.
    """

    length_1: int
    half_width_2: int
    orbitals: int = 1
    bc_1: Boundary = Boundary.PERIODIC
    row_span: tuple[int, int] | None = None

    def __post_init__(self):
        if self.length_1 < 1 or self.half_width_2 < 1 or self.orbitals < 1:
            raise ValueError(f"geometry sizes must be positive: {self}")
        object.__setattr__(self, "bc_1", Boundary(self.bc_1))
        if self.row_span is not None:
            lo, hi = self.row_span
            if hi <= lo:
                raise ValueError(f"empty row span {self.row_span}")
            object.__setattr__(self, "row_span", (int(lo), int(hi)))

    @property
    def rows(self) -> tuple[int, int]:
        if self.row_span is not None:
            return self.row_span
        return (-self.half_width_2, self.half_width_2)

    @property
    def n_rows(self) -> int:
        lo, hi = self.rows
        return hi - lo

    @property
    def n1_lo(self) -> int:
        # open strips are centred so that the cut n1 >= 0 sits mid-strip
        return 0 if self.bc_1 is Boundary.PERIODIC else -(self.length_1 // 2)

    @property
    def dim(self) -> int:
        return self.length_1 * self.n_rows * self.orbitals

    def index(self, n1, n2, orbital=0):
        lo, _ = self.rows
        return ((np.asarray(n2) - lo) * self.length_1 + (np.asarray(n1) - self.n1_lo)) * self.orbitals + np.asarray(orbital)

    def half(self, half: Half) -> "LatticeGeometry":
        lo, hi = self.rows
        span = (max(lo, 0), hi) if Half(half) is Half.UPPER else (lo, min(hi, 0))
        return LatticeGeometry(self.length_1, self.half_width_2, self.orbitals, self.bc_1, span)

    def with_bc(self, bc_1) -> "LatticeGeometry":
        return LatticeGeometry(self.length_1, self.half_width_2, self.orbitals, Boundary(bc_1), self.row_span)

    def site_n1(self) -> np.ndarray:
        return _site_arrays(self)[0]

    def site_n2(self) -> np.ndarray:
        return _site_arrays(self)[1]

    def site_orbital(self) -> np.ndarray:
        return _site_arrays(self)[2]

    def row_mask(self, lo=None, hi=None) -> np.ndarray:
        """Boolean mask of sites with ``lo <= n2 < hi``."""
        n2 = self.site_n2()
        mask = np.ones(self.dim, dtype=bool)
        if lo is not None:
            mask &= n2 >= lo
        if hi is not None:
            mask &= n2 < hi
        return mask


@functools.lru_cache(maxsize=32)
def _site_arrays(geom: LatticeGeometry):
    lo, hi = geom.rows
    n2, n1, orb = np.meshgrid(
        np.arange(lo, hi),
        np.arange(geom.length_1) + geom.n1_lo,
        np.arange(geom.orbitals),
        indexing="ij",
    )
    arrays = tuple(a.ravel() for a in (n1, n2, orb))
    for a in arrays:
        a.setflags(write=False)
    return arrays


def signed_displacement(a1, b1, length_1):
    """Representative of ``a1 - b1`` modulo ``L1`` in ``(-L1/2, L1/2]``."""
    d = np.mod(np.asarray(a1) - np.asarray(b1), length_1)
    d = np.where(d > length_1 / 2, d - length_1, d)
    return d if d.ndim else int(d)


@functools.lru_cache(maxsize=8)
def displacement_matrix(geom: LatticeGeometry) -> np.ndarray:
    """``D[n, m] = n1 - m1``, wrapped by :func:`signed_displacement` on a ring."""
    n1 = geom.site_n1()
    if geom.bc_1 is Boundary.PERIODIC:
        d = signed_displacement(n1[:, None], n1[None, :], geom.length_1)
    else:
        d = n1[:, None] - n1[None, :]
    d = d.astype(np.int32)
    d.setflags(write=False)
    return d


@dataclass(frozen=True)
class ModelSpec:
    """Hopping data of a covariant bulk model.

    ``hoppings`` maps ``(m1, m2, a, b)`` to ``<n + m, a|H|n, b>`` before
    the magnetic phase; the on-site block sits at ``m = (0, 0)``.
    """

    kind: ModelKind
    hoppings: Mapping[tuple[int, int, int, int], complex]
    orbitals: int = 1
    flux: float = 0.0
    disorder: float = 0.0
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        hops = {tuple(int(x) for x in k): complex(v) for k, v in self.hoppings.items() if v != 0}
        object.__setattr__(self, "hoppings", hops)
        object.__setattr__(self, "params", dict(self.params))
        if self.disorder < 0:
            raise ValueError("disorder strength must be non-negative")
        for (m1, m2, a, b), t in hops.items():
            if not (0 <= a < self.orbitals and 0 <= b < self.orbitals):
                raise ValueError(f"orbital index out of range in hop {(m1, m2, a, b)}")
            partner = hops.get((-m1, -m2, b, a), 0.0)
            if partner != t.conjugate():
                raise ValueError(f"hopping {(m1, m2, a, b)} lacks its Hermitian partner")
        if self.range > MAX_RANGE:
            raise RangeTooLarge(f"hopping range {self.range} exceeds {MAX_RANGE}")

    @property
    def range(self) -> int:
        return max((max(abs(m1), abs(m2)) for m1, m2, _, _ in self.hoppings), default=0)

    def with_disorder(self, disorder: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.hoppings, self.orbitals, self.flux, disorder, self.params)

    def with_flux(self, flux: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.hoppings, self.orbitals, flux, self.disorder, self.params)


def harper_model(t1=1.0, t2=1.0, flux=0.0, onsite=0.0, disorder=0.0) -> ModelSpec:
    hops = {(1, 0, 0, 0): t1, (-1, 0, 0, 0): t1, (0, 1, 0, 0): t2, (0, -1, 0, 0): t2, (0, 0, 0, 0): onsite}
    return ModelSpec(ModelKind.HARPER, hops, 1, flux, disorder, {"t1": t1, "t2": t2})


def _honeycomb_hops(t1, t2, phi, mass):
    # brick-wall embedding: Bravais a1 -> e1, a2 -> e2; A = orbital 0, B = orbital 1.
    # A(R) bonds to B(R), B(R - a1), B(R - a2).
    hops = {(0, 0, 0, 0): mass, (0, 0, 1, 1): -mass}
    for m1, m2 in ((0, 0), (1, 0), (0, 1)):
        hops[(m1, m2, 0, 1)] = t1
        hops[(-m1, -m2, 1, 0)] = t1
    # second neighbours: the C3 orbit {a1, a2 - a1, -a2} circulates one way
    # around the hexagon on A and the other way on B. The sign of the phase is
    # chosen so that phi = pi/2, M = 0 has Chern number +1.
    ccw = t2 * np.exp(1j * phi)
    for m1, m2 in ((1, 0), (-1, 1), (0, -1)):
        hops[(m1, m2, 0, 0)] = ccw
        hops[(-m1, -m2, 0, 0)] = np.conj(ccw)
        hops[(m1, m2, 1, 1)] = np.conj(ccw)
        hops[(-m1, -m2, 1, 1)] = ccw
    return hops


def haldane_model(t1=1.0, t2=0.2, phi=np.pi / 2, mass=0.0, disorder=0.0) -> ModelSpec:
    return ModelSpec(
        ModelKind.HALDANE,
        _honeycomb_hops(t1, t2, phi, mass),
        2,
        0.0,
        disorder,
        {"t1": t1, "t2": t2, "phi": phi, "mass": mass},
    )


def staggered_honeycomb_model(t1=1.0, mass=0.5, disorder=0.0) -> ModelSpec:
    return ModelSpec(
        ModelKind.STAGGERED_HONEYCOMB,
        _honeycomb_hops(t1, 0.0, 0.0, mass),
        2,
        0.0,
        disorder,
        {"t1": t1, "mass": mass},
    )


def atomic_insulator_model(energy=10.0, orbitals=1, disorder=0.0) -> ModelSpec:
    """Hopping-free insulator at large on-site energy; stands in for vacuum."""
    hops = {(0, 0, a, a): energy for a in range(orbitals)}
    return ModelSpec(ModelKind.GENERAL_MAGNETIC, hops, orbitals, 0.0, disorder, {"energy": energy})


@dataclass(frozen=True)
class DisorderSample:
    """Seeded i.i.d. uniform on-site values in ``[-1, 1]``.

    Each value is drawn from a Philox stream keyed by the seed with the
    site coordinates as counter, so a value depends only on
    ``(seed, n1, n2, orbital)``. ``shift`` re-indexes the sample, which is
    how the translation action on configurations is realized.
    """

    seed: int
    shift: tuple[int, int] = (0, 0)

    def translated(self, k1: int, k2: int = 0) -> "DisorderSample":
        return DisorderSample(self.seed, (self.shift[0] + k1, self.shift[1] + k2))

    def value(self, n1: int, n2: int, orbital: int = 0) -> float:
        key = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        counter = [(int(n1) + 2**31) & 0xFFFFFFFF, (int(n2) + 2**31) & 0xFFFFFFFF, int(orbital), 0]
        raw = np.random.Philox(key=key, counter=counter).random_raw()
        return 2.0 * ((raw >> 11) * 2.0**-53) - 1.0

    def values(self, geom: LatticeGeometry) -> np.ndarray:
        n1 = geom.site_n1() - self.shift[0]
        n2 = geom.site_n2() - self.shift[1]
        if geom.bc_1 is Boundary.PERIODIC:
            n1 = np.mod(n1 - geom.n1_lo, geom.length_1) + geom.n1_lo
        orb = geom.site_orbital()
        return np.array([self.value(a, b, c) for a, b, c in zip(n1, n2, orb)])


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Dense Hermitian matrix on a :class:`LatticeGeometry` (read-only)."""

    geometry: LatticeGeometry
    matrix: np.ndarray
    provenance: Provenance
    range_1: int = 0
    bc_2: Boundary = Boundary.OPEN

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.geometry.dim, self.geometry.dim):
            raise ValueError(f"matrix shape {m.shape} does not match geometry dim {self.geometry.dim}")
        if m.flags.writeable:
            m = m.copy()
            m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.conj().T))

    def compress(self, half: Half) -> "HamiltonianMatrix":
        """Sub-block on one half, as an operator on that half's geometry."""
        sub = self.geometry.half(half)
        lo, hi = sub.rows
        sel = self.geometry.row_mask(lo, hi)
        return HamiltonianMatrix(sub, self.matrix[np.ix_(sel, sel)], self.provenance, self.range_1, self.bc_2)


def _check_flux(flux, geom: LatticeGeometry):
    if geom.bc_1 is Boundary.PERIODIC and flux != 0.0:
        q = flux * geom.length_1 / (2 * np.pi)
        if abs(q - round(q)) > _FLUX_TOL:
            raise IncommensurateFlux(
                f"flux {flux} times L1={geom.length_1} is not a multiple of 2*pi"
            )


def _hop_entries(spec: ModelSpec, geom: LatticeGeometry, bc_2: Boundary, twist=(0.0, 0.0)):
    """Rows, columns and values of every hop of ``spec`` on ``geom``.

    Also returns, per entry, whether source and target lie on opposite
    sides of the interface row (used for half-space cuts and coupling).
    """
    L1 = geom.length_1
    lo, hi = geom.rows
    n_rows = hi - lo
    cells2, cells1 = np.meshgrid(np.arange(lo, hi), np.arange(L1) + geom.n1_lo, indexing="ij")
    cells1 = cells1.ravel()
    cells2 = cells2.ravel()
    rows, cols, vals, crossing = [], [], [], []
    for (m1, m2, a, b), t in spec.hoppings.items():
        t1 = cells1 + m1
        t2 = cells2 + m2
        keep = np.ones(cells1.shape, dtype=bool)
        if geom.bc_1 is Boundary.PERIODIC:
            w1 = np.floor_divide(t1 - geom.n1_lo, L1)
            t1 = t1 - w1 * L1
        else:
            w1 = np.zeros_like(t1)
            keep &= (t1 >= geom.n1_lo) & (t1 < geom.n1_lo + L1)
        if bc_2 is Boundary.PERIODIC:
            w2 = np.floor_divide(t2 - lo, n_rows)
            t2 = t2 - w2 * n_rows
        else:
            w2 = np.zeros_like(t2)
            keep &= (t2 >= lo) & (t2 < hi)
        phase = np.exp(-1j * spec.flux * m2 * (cells1 + 0.5 * m1))
        if twist[0] or twist[1]:
            phase = phase * np.exp(1j * (twist[0] * w1 + twist[1] * w2))
        rows.append(geom.index(t1[keep], t2[keep], a))
        cols.append(geom.index(cells1[keep], cells2[keep], b))
        vals.append(t * phase[keep])
        crossing.append((t2[keep] >= 0) != (cells2[keep] >= 0))
    if not rows:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0, dtype=complex), np.zeros(0, dtype=bool)
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), np.concatenate(crossing)


def _dense(geom, rows, cols, vals):
    h = np.zeros((geom.dim, geom.dim), dtype=complex)
    np.add.at(h, (rows, cols), vals)
    # exact Hermiticity: entry (i, j) and (j, i) are computed from the same two numbers
    return 0.5 * (h + h.conj().T)


def build_bulk_hamiltonian(
    spec: ModelSpec,
    geom: LatticeGeometry,
    sample: DisorderSample | None = None,
    bc_2=Boundary.OPEN,
) -> HamiltonianMatrix:
    """``sum_m t_m S^m + lambda sum_n v_n |n><n|`` on the finite strip."""
    bc_2 = Boundary(bc_2)
    if geom.orbitals != spec.orbitals:
        raise ValueError(f"model has {spec.orbitals} orbitals, geometry {geom.orbitals}")
    _check_flux(spec.flux, geom)
    if geom.bc_1 is Boundary.PERIODIC and spec.range >= geom.length_1 / 2:
        raise RangeTooLarge(f"range {spec.range} >= L1/2 = {geom.length_1 / 2} on a ring")
    rows, cols, vals, _ = _hop_entries(spec, geom, bc_2)
    h = _dense(geom, rows, cols, vals)
    if spec.disorder and sample is not None:
        h[np.diag_indices(geom.dim)] += spec.disorder * sample.values(geom)
    return HamiltonianMatrix(geom, h, Provenance.BULK, spec.range, bc_2)


def bloch_hamiltonian(spec: ModelSpec, max_cell: int = 64):
    """Return ``k -> H(k)`` on the magnetic unit cell (twisted boundary phases).

    The cell spans ``q`` columns, the smallest ``q`` with ``q B`` a multiple
    of ``2 pi``, and one row. ``H(k)`` is exactly ``2 pi``-periodic in both
    components of ``k``.
    """
    q = 1
    while q <= max_cell:
        x = spec.flux * q / (2 * np.pi)
        if abs(x - round(x)) < _FLUX_TOL:
            break
        q += 1
    else:
        raise IncommensurateFlux(f"flux {spec.flux} needs a cell wider than {max_cell}")
    cell = LatticeGeometry(q, 1, spec.orbitals, Boundary.PERIODIC, row_span=(0, 1))
    clean = spec.with_disorder(0.0)

    def h_of_k(k1, k2):
        rows, cols, vals, _ = _hop_entries(clean, cell, Boundary.PERIODIC, twist=(k1, k2))
        return _dense(cell, rows, cols, vals)

    h_of_k.cell = cell
    return h_of_k


def _dirac_gap_closed(spec: ModelSpec, fermi_energy: float) -> bool:
    p = spec.params
    if spec.kind is not ModelKind.HALDANE or fermi_energy != 0.0:
        return False
    return bool(np.isclose(abs(p["mass"]), 3 * np.sqrt(3) * abs(p["t2"] * np.sin(p["phi"])), atol=1e-12))


def clean_gap_at(spec: ModelSpec, fermi_energy: float, n_k: int = 48) -> float:
    """Distance from ``fermi_energy`` to the clean band structure on a k-grid."""
    h_of_k = bloch_hamiltonian(spec)
    ks = 2 * np.pi * np.arange(n_k) / n_k
    best = np.inf
    for k1 in ks:
        for k2 in ks:
            e = np.linalg.eigvalsh(h_of_k(k1, k2))
            best = min(best, float(np.min(np.abs(e - fermi_energy))))
    return best


def build_haldane(
    spec: ModelSpec,
    geom: LatticeGeometry,
    sample: DisorderSample | None = None,
    bc_2=Boundary.OPEN,
    fermi_energy: float = 0.0,
) -> HamiltonianMatrix:
    if spec.kind not in (ModelKind.HALDANE, ModelKind.STAGGERED_HONEYCOMB):
        raise ValueError(f"expected a honeycomb model, got {spec.kind}")
    # n_k divisible by 3 puts the Dirac points on the grid
    if _dirac_gap_closed(spec, fermi_energy) or clean_gap_at(spec, fermi_energy, n_k=48) < 1e-8:
        raise GapClosed(f"clean honeycomb model has no gap at E_F={fermi_energy}")
    return build_bulk_hamiltonian(spec, geom, sample, bc_2)


def _row_sides(geom: LatticeGeometry):
    return geom.site_n2() >= 0


def restrict_half_space(h_bulk: HamiltonianMatrix, half) -> HamiltonianMatrix:
    """``Pi H Pi*`` for one half, embedded in the full strip (other block zero)."""
    if h_bulk.bc_2 is not Boundary.OPEN:
        raise ValueError("half-space restriction needs an open direction 2")
    upper = _row_sides(h_bulk.geometry)
    keep = upper if Half(half) is Half.UPPER else ~upper
    m = np.where(keep[:, None] & keep[None, :], h_bulk.matrix, 0.0)
    return HamiltonianMatrix(h_bulk.geometry, m, Provenance.HALF_SPACE, h_bulk.range_1, Boundary.OPEN)


@dataclass(frozen=True)
class CouplingSpec:
    """Interface coupling ``K``: ``kappa`` times the row-crossing hops of ``pattern``.

    ``strip_width`` is ``N`` in the support condition ``rows in [-N, N]``;
    ``None`` means the pattern's range.
    """

    pattern: ModelSpec | None
    kappa: float = 1.0
    strip_width: int | None = None


def build_coupling(spec_k: CouplingSpec, geom: LatticeGeometry, sample: DisorderSample | None = None) -> HamiltonianMatrix:
    # K is taken non-random; ``sample`` is accepted for a disorder-dependent variant.
    pattern = spec_k.pattern
    width = spec_k.strip_width
    if width is None:
        width = pattern.range if pattern is not None else 0
    if width >= geom.half_width_2:
        raise StripTooWide(f"strip width {width} must be < L2 = {geom.half_width_2}")
    if pattern is None or spec_k.kappa == 0:
        return HamiltonianMatrix(geom, np.zeros((geom.dim, geom.dim)), Provenance.COUPLING, 0)
    _check_flux(pattern.flux, geom)
    rows, cols, vals, crossing = _hop_entries(pattern.with_disorder(0.0), geom, Boundary.OPEN)
    n2 = geom.site_n2()
    inside = (np.abs(n2[rows]) <= width) & (np.abs(n2[cols]) <= width)
    sel = crossing & inside
    h = _dense(geom, rows[sel], cols[sel], spec_k.kappa * vals[sel])
    return HamiltonianMatrix(geom, h, Provenance.COUPLING, pattern.range)


def assemble_interface(
    h_plus: HamiltonianMatrix,
    h_minus: HamiltonianMatrix,
    coupling: HamiltonianMatrix,
    mu: float = 1.0,
) -> HamiltonianMatrix:
    """``H(mu) = H_plus (+) H_minus + mu K``."""
    geom = h_plus.geometry
    if h_minus.geometry != geom or coupling.geometry != geom:
        raise ValueError("interface pieces live on different geometries")
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must lie in [0, 1], got {mu}")
    upper = _row_sides(geom)
    off_plus = ~(upper[:, None] & upper[None, :])
    off_minus = upper[:, None] | upper[None, :]
    if np.any(h_plus.matrix[off_plus]) or np.any(h_minus.matrix[off_minus]):
        raise SupportOverlap("H_plus must live on rows >= 0 and H_minus on rows < 0")
    m = h_plus.matrix + h_minus.matrix + mu * coupling.matrix
    rng = max(h_plus.range_1, h_minus.range_1, coupling.range_1)
    return HamiltonianMatrix(geom, m, Provenance.INTERFACE, rng, Boundary.OPEN)


def magnetic_translation(geom: LatticeGeometry, flux: float, k1: int = 1) -> np.ndarray:
    """Unitary ``S`` with ``S* H_omega S = H_{T omega}`` for shifts along direction 1.

    In this gauge a shift by ``k1`` columns is dressed by ``exp(-i B k1 n2)``;
    the shifted configuration is ``sample.translated(-k1)``.
    """
    if geom.bc_1 is not Boundary.PERIODIC:
        raise ValueError("translations are only unitary on a ring")
    n1 = geom.site_n1()
    n2 = geom.site_n2()
    orb = geom.site_orbital()
    target = geom.index(np.mod(n1 + k1 - geom.n1_lo, geom.length_1) + geom.n1_lo, n2, orb)
    s = np.zeros((geom.dim, geom.dim), dtype=complex)
    s[target, np.arange(geom.dim)] = np.exp(-1j * flux * k1 * n2)
    return s
