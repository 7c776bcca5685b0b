"""Exact spectral calculus for finite Hermitian matrices.

Functions of ``H`` are evaluated through an eigendecomposition. When the
function vanishes outside a window (the bump ``g``, or ``exp(2 pi i G) - 1``)
only the eigenpairs inside the window are computed, with LAPACK's
value-range driver.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import integrate

from .errors import EigensolveFailure, EigenvalueAtFermiLevel, EmptyInterval, GapViolated
from .lattice import Boundary, HamiltonianMatrix, LatticeGeometry, displacement_matrix


def _raw(h):
    return h.matrix if isinstance(h, HamiltonianMatrix) else np.asarray(h)


@dataclass(frozen=True)
class SpectralWindow:
    """Gap ``(lo, hi)``, Fermi level, and the smooth bump/step pair on it.

    ``g(E) = c * exp(-sharpness / (1 - x**2))`` with ``x`` the affine image
    of ``E`` in ``(-1, 1)`` and ``c`` fixed by unit integral.
    """

    gap: tuple[float, float]
    fermi_energy: float
    sharpness: float = 1.0
    norm: float = field(default=1.0, repr=False)

    @property
    def lo(self):
        return self.gap[0]

    @property
    def hi(self):
        return self.gap[1]

    def _x(self, e):
        return (2.0 * np.asarray(e, dtype=float) - (self.lo + self.hi)) / (self.hi - self.lo)

    def _shape(self, e):
        x = self._x(e)
        out = np.zeros_like(x)
        inside = np.abs(x) < 1
        out[inside] = np.exp(-self.sharpness / (1.0 - x[inside] ** 2))
        return out

    def g(self, e):
        return self.norm * self._shape(e)

    def G(self, e):
        e = np.atleast_1d(np.asarray(e, dtype=float))
        out = np.where(e >= self.hi, 1.0, 0.0)
        mid = 0.5 * (self.lo + self.hi)
        for i in np.flatnonzero((e > self.lo) & (e < self.hi)):
            if e[i] <= mid:
                out[i] = _quad(self.g, self.lo, e[i])
            else:
                out[i] = 1.0 - _quad(self.g, e[i], self.hi)
        return out

    def unitary_symbol(self, e, power=1):
        """``exp(2 pi i k G(E)) - 1``; zero outside the gap."""
        return np.exp(2j * np.pi * power * self.G(e)) - 1.0


def _quad(f, a, b):
    val, _ = integrate.quad(lambda x: float(f(np.array([x]))[0]), a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


def make_bump_window(gap, fermi_energy, sharpness=1.0) -> SpectralWindow:
    lo, hi = (float(x) for x in gap)
    if not lo < fermi_energy < hi:
        raise EmptyInterval(f"need lo < E_F < hi, got {lo} < {fermi_energy} < {hi}")
    if sharpness <= 0:
        raise ValueError("sharpness must be positive")
    unnormed = SpectralWindow((lo, hi), float(fermi_energy), float(sharpness))
    total = _quad(unnormed.g, lo, hi)
    return SpectralWindow((lo, hi), float(fermi_energy), float(sharpness), 1.0 / total)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Eigenpairs of a Hermitian matrix, complete or restricted to a window."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    window: tuple[float, float] | None = None

    @property
    def complete(self) -> bool:
        return self.window is None

    def function(self, f, *, plus_identity=0.0) -> np.ndarray:
        """``V f(Lambda) V*`` (plus a multiple of the identity)."""
        v = self.eigenvectors
        out = (v * f(self.eigenvalues)) @ v.conj().T
        if plus_identity:
            out[np.diag_indices_from(out)] += plus_identity
        return out


def eigendecompose(h, window=None) -> EigenDecomposition:
    m = _raw(h)
    try:
        if window is None:
            w, v = np.linalg.eigh(m)
        else:
            lo, hi = window
            w, v = scipy.linalg.eigh(m, subset_by_value=(lo, hi), driver="evr")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    return EigenDecomposition(w, v, None if window is None else tuple(window))


def apply_function(h, f, *, support=None, decomposition: EigenDecomposition | None = None) -> np.ndarray:
    """``f(H)`` via the spectral theorem.

    With ``support=(lo, hi)`` the caller promises ``f == 0`` outside the
    interval and only eigenpairs inside it are computed.
    """
    if decomposition is None:
        decomposition = eigendecompose(h, support)
    elif support is not None and decomposition.window is not None:
        lo, hi = decomposition.window
        if lo > support[0] or hi < support[1]:
            raise ValueError("decomposition window does not cover the support")
    return decomposition.function(f)


def fermi_projection(h, fermi_energy, *, decomposition: EigenDecomposition | None = None) -> np.ndarray:
    """``chi(H <= E_F)``."""
    dec = decomposition if decomposition is not None else eigendecompose(h)
    if not dec.complete:
        raise ValueError("Fermi projection needs a complete decomposition")
    w = dec.eigenvalues
    if w.size and np.min(np.abs(w - fermi_energy)) < 1e-8:
        raise EigenvalueAtFermiLevel(f"eigenvalue within 1e-8 of E_F={fermi_energy}")
    occ = dec.eigenvectors[:, w <= fermi_energy]
    return occ @ occ.conj().T


@dataclass
class GapReport:
    gap: tuple[float, float]
    margins: dict

    @property
    def margin(self):
        return min(self.margins.values())


def verify_gap(h_plus_bulk, h_minus_bulk, gap, labels=("upper", "lower")) -> GapReport:
    """Check that no eigenvalue of either bulk matrix lies inside ``gap``.

    Returns the distance from each spectrum to the interval.
    """
    lo, hi = gap
    margins = {}
    for label, h in zip(labels, (h_plus_bulk, h_minus_bulk)):
        if isinstance(h, HamiltonianMatrix) and (h.bc_2 is not Boundary.PERIODIC or h.geometry.bc_1 is not Boundary.PERIODIC):
            raise ValueError("gap verification needs bulk matrices on a torus")
        w = np.linalg.eigvalsh(_raw(h))
        inside = w[(w > lo) & (w < hi)]
        if inside.size:
            raise GapViolated(
                f"{label} bulk eigenvalue {inside[0]:.6g} lies in the gap ({lo}, {hi})",
                eigenvalue=float(inside[0]),
                which=label,
            )
        below = w[w <= lo]
        above = w[w >= hi]
        margins[label] = float(min(lo - below.max() if below.size else np.inf, above.min() - hi if above.size else np.inf))
    return GapReport((lo, hi), margins)


@dataclass
class DecayReport:
    """Maxima of ``|<n|g(H)|m>|`` binned by ``|n2| + |m2|`` ("row") and ``|n1 - m1|`` ("column")."""

    row_bins: dict
    column_bins: dict
    alpha_row: float
    alpha_column: float

    def rows(self):
        for kind, bins in (("row", self.row_bins), ("column", self.column_bins)):
            for d in sorted(bins):
                yield kind, d, bins[d]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_kind", "distance", "max_abs_element"])
            for kind, d, v in self.rows():
                writer.writerow([kind, d, repr(float(v))])

    def max_at_row_distance(self, d):
        return self.row_bins.get(d, 0.0)


def _fit_tail_exponent(bins: dict, start: int, floor: float = 1e-13) -> float:
    """Least-squares slope of ``-log(max)`` against ``log(distance)`` on the tail."""
    d = np.array([k for k in sorted(bins) if k >= max(start, 1) and bins[k] > floor], dtype=float)
    if d.size < 2:
        return np.inf
    v = np.array([bins[int(k)] for k in d])
    slope, _ = np.polyfit(np.log(d), np.log(v), 1)
    return float(-slope)


def decay_profile(h_interface, window: SpectralWindow, *, rows=None, tail_start=None,
                  decomposition: EigenDecomposition | None = None) -> DecayReport:
    """Bin the matrix elements of ``g(H)`` by distance from the interface.

    ``rows=(lo, hi)`` restricts both indices to an interior band, away from
    the outer edges of the strip (which carry their own boundary states when
    a material is topological).
    """
    geom: LatticeGeometry = h_interface.geometry
    gmat = np.abs(apply_function(h_interface, window.g, support=window.gap, decomposition=decomposition))
    n2 = geom.site_n2()
    sel = np.ones(geom.dim, dtype=bool) if rows is None else geom.row_mask(*rows)
    gmat = gmat[np.ix_(sel, sel)]
    a2 = np.abs(n2[sel])
    row_key = a2[:, None] + a2[None, :]
    col_key = np.abs(displacement_matrix(geom)[np.ix_(sel, sel)])
    row_bins = _bin_max(row_key, gmat)
    col_bins = _bin_max(col_key, gmat)
    if tail_start is None:
        tail_start = 4
    return DecayReport(row_bins, col_bins, _fit_tail_exponent(row_bins, tail_start), _fit_tail_exponent(col_bins, tail_start))


def _bin_max(keys, values):
    keys = keys.ravel()
    values = values.ravel()
    out = np.zeros(keys.max() + 1)
    np.maximum.at(out, keys, values)
    return {int(k): float(out[k]) for k in np.unique(keys)}
