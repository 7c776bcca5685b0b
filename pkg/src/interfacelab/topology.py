"""Invariants and 1-cocycles on the strip.

Conventions fixed project-wide:

* ``X1`` increases along the interface, ``X2`` from the lower to the upper
  material; ``grad_1 A = i [X1, A]`` has entries ``i (n1 - m1) A[n, m]``
  with the displacement wrapped into ``(-L1/2, L1/2]`` on a ring.
* ``F = sign(X1)`` with ``F = +1`` on column ``n1 = 0``; the half-line
  projection ``Pi_1`` keeps ``n1 >= 0``.
* Chern numbers carry the orientation of ``2 pi i Tr P [grad_1 P, grad_2 P]``
  per unit cell, with ``grad_j = i [X_j, .]``. In this orientation the
  interface current equals ``Ch(upper) - Ch(lower)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GapClosedOnGrid,
    LeakageAtBoundary,
    NonUnitaryInput,
    RangeTooLarge,
    SpectralObstruction,
    WindowTooSmall,
)
from .lattice import Boundary, LatticeGeometry, displacement_matrix

TOL_PLAQUETTE = 1e-6
TOL_WINDING = 0.05
TOL_FREDHOLM = 0.1
TOL_BOTT = 0.1
LEAKAGE_LIMIT = 1e-4


@dataclass
class TopologicalReport:
    quantity: str
    value: float
    tolerance: float
    metadata: dict = field(default_factory=dict)

    @property
    def integer(self) -> int:
        return int(np.rint(self.value))

    @property
    def residual(self) -> float:
        return float(abs(self.value - self.integer))

    @property
    def quantized(self) -> bool:
        return self.residual < self.tolerance

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "value": float(self.value),
            "integer": self.integer,
            "residual": self.residual,
            "tolerance": float(self.tolerance),
            "quantized": self.quantized,
            "metadata": dict(self.metadata),
        }


@dataclass(frozen=True, eq=False)
class CovariantOperator:
    """Finite-range operator on a strip, e.g. an element of the edge algebra.

    ``periodic_deterministic`` marks operators whose kernel depends only on
    ``n1 - m1`` (a single, translation-invariant configuration).
    """

    matrix: np.ndarray
    geometry: LatticeGeometry
    range_1: int
    periodic_deterministic: bool = True

    def __matmul__(self, other: "CovariantOperator") -> "CovariantOperator":
        return CovariantOperator(
            self.matrix @ other.matrix,
            self.geometry,
            self.range_1 + other.range_1,
            self.periodic_deterministic and other.periodic_deterministic,
        )

    def __add__(self, other):
        return CovariantOperator(self.matrix + other.matrix, self.geometry, max(self.range_1, other.range_1),
                                 self.periodic_deterministic and other.periodic_deterministic)

    def adjoint(self) -> "CovariantOperator":
        return CovariantOperator(self.matrix.conj().T, self.geometry, self.range_1, self.periodic_deterministic)

    @classmethod
    def identity(cls, geom: LatticeGeometry) -> "CovariantOperator":
        return cls(np.eye(geom.dim, dtype=complex), geom, 0, True)


def _mat(a):
    return a.matrix if hasattr(a, "matrix") else np.asarray(a)


def _geom(a, geom):
    if geom is not None:
        return geom
    g = getattr(a, "geometry", None)
    if g is None:
        raise ValueError("a geometry is required for a bare matrix")
    return g


def _row_select(geom: LatticeGeometry, rows):
    if rows is None:
        return np.ones(geom.dim, dtype=bool)
    return geom.row_mask(*rows)


# --- kernels for random edge-algebra elements -----------------------------------


def random_edge_kernel(rng: np.random.Generator, range_1: int, rows: tuple[int, int], orbitals: int = 1, n_columns=None):
    """Random complex kernel ``k[d, n2, m2, a, b]`` for ``d = n1 - m1`` in ``[-r, r]``.

    With ``n_columns`` set the kernel also depends on the column
    (``k[n1, d, ...]``), i.e. one sampled, non-invariant configuration.
    """
    n_rows = rows[1] - rows[0]
    shape = (2 * range_1 + 1, n_rows, n_rows, orbitals, orbitals)
    if n_columns is not None:
        shape = (n_columns,) + shape
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def realize_kernel(kernel, geom: LatticeGeometry, rows: tuple[int, int], range_1: int) -> CovariantOperator:
    """Place a kernel from :func:`random_edge_kernel` on ``geom``."""
    sampled = kernel.ndim == 6
    F = geom.orbitals
    a = np.zeros((geom.dim, geom.dim), dtype=complex)
    row_lo, row_hi = rows
    col_lo = geom.n1_lo
    for n1 in range(col_lo, col_lo + geom.length_1):
        k_col = kernel[(n1 - col_lo) % kernel.shape[0]] if sampled else kernel
        for d in range(-range_1, range_1 + 1):
            m1 = n1 - d
            if geom.bc_1 is Boundary.PERIODIC:
                m1 = (m1 - col_lo) % geom.length_1 + col_lo
            elif not col_lo <= m1 < col_lo + geom.length_1:
                continue
            for i2, n2 in enumerate(range(row_lo, row_hi)):
                for j2, m2 in enumerate(range(row_lo, row_hi)):
                    ni = geom.index(n1, n2, 0)
                    mi = geom.index(m1, m2, 0)
                    a[ni:ni + F, mi:mi + F] += k_col[d + range_1, i2, j2]
    return CovariantOperator(a, geom, range_1, not sampled)


# --- traces and derivations -------------------------------------------------------


def trace_per_length(a, geom: LatticeGeometry | None = None, rows=None):
    """``(1/L1) * sum`` of the diagonal over all columns and the selected rows."""
    geom = _geom(a, geom)
    diag = np.diagonal(_mat(a))[_row_select(geom, rows)]
    return diag.sum() / geom.length_1


def commutator_X1(a, geom: LatticeGeometry | None = None, *, exact: bool = False) -> np.ndarray:
    """``i [X1, A]``: entries ``i (n1 - m1) A[n, m]``.

    ``exact=True`` demands that ``A`` has no entries at ring displacement
    ``>= L1/2``, where the position operator on a ring is ambiguous.
    """
    geom = _geom(a, geom)
    m = _mat(a)
    d = displacement_matrix(geom)
    if exact and geom.bc_1 is Boundary.PERIODIC:
        if np.any(m[np.abs(d) * 2 >= geom.length_1]):
            raise RangeTooLarge("operator reaches displacement >= L1/2 on the ring")
    return 1j * d * m


def current_operator(h, geom: LatticeGeometry | None = None) -> np.ndarray:
    """``J1 = i [X1, H]``."""
    return commutator_X1(h, geom, exact=True)


# --- winding number and Fredholm index ---------------------------------------------


def _unitarity_residual(u: np.ndarray, n_probe: int = 4) -> float:
    rng = np.random.default_rng(0)
    x = rng.normal(size=(u.shape[0], n_probe)) + 1j * rng.normal(size=(u.shape[0], n_probe))
    y = u.conj().T @ (u @ x)
    return float(np.linalg.norm(y - x) / np.linalg.norm(x))


def boundary_leakage(u_minus_one: np.ndarray, geom: LatticeGeometry, rows=None) -> float:
    """Largest column norm of ``U - 1`` on the two rows next to each end of the band."""
    lo, hi = geom.rows if rows is None else rows
    if rows is None:
        check = (lo + 1, hi - 2)
    else:
        check = (lo, lo + 1, hi - 2, hi - 1)
    n2 = geom.site_n2()
    cols = np.isin(n2, check)
    return float(np.max(np.linalg.norm(u_minus_one[:, cols], axis=0), initial=0.0))


def winding_number(u, geom: LatticeGeometry | None = None, *, rows=None, tolerance=TOL_WINDING,
                   check_leakage=True, unitarity_tol=1e-10, **metadata) -> TopologicalReport:
    """``i * T((U* - 1) grad_1 U)`` on a ring, traced over ``rows``."""
    geom = _geom(u, geom)
    if geom.bc_1 is not Boundary.PERIODIC:
        raise ValueError("the winding number is taken on a ring (periodic direction 1)")
    u = _mat(u)
    res = _unitarity_residual(u)
    if res > unitarity_tol:
        raise NonUnitaryInput(f"unitarity residual {res:.3g}")
    a = u - np.eye(geom.dim)
    if check_leakage:
        leak = boundary_leakage(a, geom, rows)
        if leak > LEAKAGE_LIMIT:
            raise LeakageAtBoundary(f"U - 1 reaches the band boundary (column norm {leak:.3g})", leak)
    sel = _row_select(geom, rows)
    a_cols = a[:, sel]
    grad = 1j * displacement_matrix(geom)[:, sel] * a_cols
    # (U* - 1)[n, m] = conj(A[m, n]); the diagonal of the product at n is sum_m conj(A[m, n]) grad[m, n]
    value = 1j * np.sum(a_cols.conj() * grad) / geom.length_1
    if abs(value.imag) > 1e-8:
        raise ValueError(f"winding number has imaginary part {value.imag:.3g}")
    return TopologicalReport("winding", float(value.real), tolerance, {"L1": geom.length_1, **metadata})


def _cut_masks(geom: LatticeGeometry):
    n1 = geom.site_n1()
    return n1 >= 0, n1


def _eta_trace(a, b, geom, sel_n):
    """``Tr(Pi B (1-Pi) A Pi) - Tr(Pi A (1-Pi) B Pi)`` over the sites ``sel_n``."""
    right, _ = _cut_masks(geom)
    left = ~right
    bn = b[np.ix_(sel_n, left)]
    an = a[np.ix_(sel_n, left)]
    ab = a[np.ix_(left, sel_n)]
    bb = b[np.ix_(left, sel_n)]
    return np.sum(bn * ab.T) - np.sum(an * bb.T)


def fredholm_index_eta(u, geom: LatticeGeometry | None = None, window_halfwidth: int = 6, *, rows=None,
                       tolerance=TOL_FREDHOLM, check_window=True, **metadata) -> TopologicalReport:
    """Index of ``Pi_1 U Pi_1*`` from ``Tr(1 - T*T) - Tr(1 - TT*)``.

    Both traces run over ``0 <= n1 <= W`` and the selected rows; the cut
    sits at ``n1 = 0`` in the middle of an open strip.
    """
    geom = _geom(u, geom)
    if geom.bc_1 is not Boundary.OPEN:
        raise ValueError("the half-line compression needs an open direction 1")
    W = int(window_halfwidth)
    if geom.length_1 < 4 * W:
        raise ValueError(f"L1={geom.length_1} must be at least 4W={4 * W}")
    u = _mat(u)
    right, n1 = _cut_masks(geom)
    rsel = _row_select(geom, rows)

    def index_at(w):
        sel = right & (n1 <= w) & rsel
        return _eta_trace(u, u.conj().T, geom, sel)

    value = index_at(W)
    if abs(value.imag) > 1e-8:
        raise ValueError(f"index trace has imaginary part {value.imag:.3g}")
    meta = {"L1": geom.length_1, "W": W, **metadata}
    if check_window and W + 4 <= geom.length_1 // 2 - 1:
        wider = index_at(W + 4).real
        meta["value_W_plus_4"] = float(wider)
        if abs(wider - value.real) > tolerance / 2:
            raise WindowTooSmall(f"index moves from {value.real:.4f} to {wider:.4f} when W grows by 4")
    return TopologicalReport("fredholm_index", float(value.real), tolerance, meta)


def index_additivity_check(u, v, geom: LatticeGeometry | None = None, *, rows=None) -> dict:
    """Compare ``Wind(UV)`` with ``Wind(U) + Wind(V)``."""
    geom = _geom(u, geom)
    u = _mat(u)
    v = _mat(v)
    kw = dict(rows=rows, check_leakage=False)
    wu = winding_number(u, geom, **kw).value
    wv = winding_number(v, geom, **kw).value
    wuv = winding_number(u @ v, geom, **kw).value
    return {"wind_u": wu, "wind_v": wv, "wind_uv": wuv, "defect": abs(wuv - wu - wv)}


def local_interface_unitary(geom: LatticeGeometry, rng: np.random.Generator, *, rows=(-1, 1), shift=1,
                            shift_row=0) -> np.ndarray:
    """Finite-range unitary ``D1 S D2`` with support in ``rows``.

    ``D1``, ``D2`` are Haar-random within each column on the given rows (range
    zero along the interface) and ``S`` shifts row ``shift_row`` by ``shift``
    columns (every orbital), so the winding number is ``-shift * orbitals``. Ranges stay far below
    ``L1/2``, so the ring derivative is exact on products of a few factors.
    """
    from scipy.stats import unitary_group

    if geom.bc_1 is not Boundary.PERIODIC:
        raise ValueError("local interface unitaries are built on a ring")
    lo, hi = rows
    if not lo <= shift_row < hi:
        raise ValueError("the shifted row must lie inside the support rows")
    n1, n2, orb = geom.site_n1(), geom.site_n2(), geom.site_orbital()
    block = (hi - lo) * geom.orbitals

    def column_mixer():
        d = np.eye(geom.dim, dtype=complex)
        for c in range(geom.n1_lo, geom.n1_lo + geom.length_1):
            idx = np.flatnonzero((n1 == c) & (n2 >= lo) & (n2 < hi))
            d[np.ix_(idx, idx)] = unitary_group.rvs(block, random_state=rng) if block > 1 else np.exp(
                2j * np.pi * rng.random())
        return d

    s = np.eye(geom.dim, dtype=complex)
    for i in np.flatnonzero(n2 == shift_row):
        j = geom.index((n1[i] + shift - geom.n1_lo) % geom.length_1 + geom.n1_lo, shift_row, orb[i])
        s[i, i] = 0.0
        s[j, i] = 1.0
    return column_mixer() @ s @ column_mixer()


# --- the three 1-cocycles --------------------------------------------------------


def cocycle_xi(a, b, *, rows=None):
    """``xi(A, B) = i T(A grad_1 B)`` per unit length on a ring."""
    geom = a.geometry
    if geom.bc_1 is not Boundary.PERIODIC:
        raise ValueError("xi is evaluated with the trace per unit length on a ring")
    for op in (a, b):
        if 4 * op.range_1 >= geom.length_1:
            raise RangeTooLarge(f"range {op.range_1} too large for L1={geom.length_1} (need 4r < L1)")
    grad_b = 1j * displacement_matrix(geom) * b.matrix
    sel = _row_select(geom, rows)
    # diagonal of A @ grad_b
    return 1j * np.sum(a.matrix[sel] * grad_b[:, sel].T) / geom.length_1


def sign_x1(geom: LatticeGeometry) -> np.ndarray:
    return np.where(geom.site_n1() >= 0, 1.0, -1.0)


def _sign_commutator(f, m):
    return (f[:, None] - f[None, :]) * m


def cocycle_zeta(a, b, *, rows=None):
    """``(1/4) Tr(F [F, A] [F, B])`` over the selected rows (all rows by default)."""
    geom = a.geometry
    if geom.bc_1 is not Boundary.OPEN:
        raise ValueError("zeta needs an open direction 1")
    f = sign_x1(geom)
    fa = _sign_commutator(f, a.matrix)
    fb = _sign_commutator(f, b.matrix)
    sel = _row_select(geom, rows)
    prod_diag = np.sum(fa[sel] * fb[:, sel].T, axis=1)
    return 0.25 * np.sum(f[sel] * prod_diag)


def compression_defect(a, b) -> np.ndarray:
    """``Pi A B Pi* - Pi A Pi* Pi B Pi*`` as a matrix on the full strip."""
    p = (a.geometry.site_n1() >= 0).astype(float)
    am, bm = a.matrix, b.matrix
    return p[:, None] * (am @ bm - am @ (p[:, None] * bm)) * p[None, :]


def cocycle_eta(a, b, *, rows=None):
    """``Tr_Pi(Pi B A Pi - Pi B Pi A Pi) - Tr_Pi(Pi A B Pi - Pi A Pi B Pi)``."""
    geom = a.geometry
    if geom.bc_1 is not Boundary.OPEN:
        raise ValueError("eta needs an open direction 1")
    right, _ = _cut_masks(geom)
    sel = right & _row_select(geom, rows)
    return _eta_trace(a.matrix, b.matrix, geom, sel)


def hochschild_boundary_xi(a, b, c, **kw):
    """``b xi(A, B, C) = xi(AB, C) - xi(A, BC) + xi(CA, B)``."""
    return cocycle_xi(a @ b, c, **kw) - cocycle_xi(a, b @ c, **kw) + cocycle_xi(c @ a, b, **kw)


def sgn_identity_sum(n1: int, cutoff: int | None = None) -> int:
    """``sum_{m1} sgn(m1) (sgn(m1) - sgn(m1 + n1))**2`` with ``sgn(0) = +1``.

    The summand vanishes for ``|m1| > |n1|`` so a cutoff above ``|n1|`` is exact.
    """
    cutoff = abs(n1) + 2 if cutoff is None else cutoff
    m = np.arange(-cutoff, cutoff + 1)
    s = np.where(m >= 0, 1, -1)
    t = np.where(m + n1 >= 0, 1, -1)
    return int(np.sum(s * (s - t) ** 2))


def cocycle_identity_suite(seed: int = 0, n_cases: int = 50, *, length_1: int = 24, rows=(-2, 2),
                           range_1: int = 2, orbitals: int = 1) -> list[dict]:
    """Check the cocycle identities on ``n_cases`` random finite-range operators.

    Returns one row per identity with the largest defect seen, its tolerance
    and a pass flag. ``xi_eq_minus_zeta`` is a diagnostic: with the sign
    operator ``F = +1`` on ``n1 >= 0`` the two pairings differ by a sign
    (the shift ``S`` gives ``xi(S, S*) = 1`` and ``zeta(S, S*) = -1``).
    Kernels are scaled to entries of order ``1/sqrt(size)`` so that absolute
    tolerances are meaningful.
    """
    rng = np.random.default_rng(seed)
    half = max(-rows[0], rows[1])
    ring = LatticeGeometry(length_1, half, orbitals, Boundary.PERIODIC)
    strip = ring.with_bc(Boundary.OPEN)
    scale = 1.0 / np.sqrt((2 * range_1 + 1) * (rows[1] - rows[0]) * orbitals)

    def kernel(sampled):
        return scale * random_edge_kernel(rng, range_1, rows, orbitals, length_1 if sampled else None)

    defects = {"xi_antisymmetry": 0.0, "xi_hochschild": 0.0, "zeta_eq_eta": 0.0, "eta_eq_half_zeta_antisym": 0.0,
               "xi_eq_zeta": 0.0, "xi_eq_minus_zeta": 0.0}
    for _ in range(n_cases):
        ka, kb, kc = kernel(False), kernel(False), kernel(False)
        a, b, c = (realize_kernel(k, ring, rows, range_1) for k in (ka, kb, kc))
        defects["xi_antisymmetry"] = max(defects["xi_antisymmetry"], abs(cocycle_xi(a, b) + cocycle_xi(b, a)))
        defects["xi_hochschild"] = max(defects["xi_hochschild"], abs(hochschild_boundary_xi(a, b, c)))
        a_open, b_open = realize_kernel(ka, strip, rows, range_1), realize_kernel(kb, strip, rows, range_1)
        xi, zeta = cocycle_xi(a, b), cocycle_zeta(a_open, b_open)
        defects["xi_eq_zeta"] = max(defects["xi_eq_zeta"], abs(xi - zeta))
        defects["xi_eq_minus_zeta"] = max(defects["xi_eq_minus_zeta"], abs(xi + zeta))
        sa, sb = realize_kernel(kernel(True), strip, rows, range_1), realize_kernel(kernel(True), strip, rows, range_1)
        z_ab, z_ba, e_ab = cocycle_zeta(sa, sb), cocycle_zeta(sb, sa), cocycle_eta(sa, sb)
        defects["zeta_eq_eta"] = max(defects["zeta_eq_eta"], abs(z_ab - e_ab))
        defects["eta_eq_half_zeta_antisym"] = max(defects["eta_eq_half_zeta_antisym"], abs(e_ab - 0.5 * (z_ab - z_ba)))
    tolerances = {"xi_antisymmetry": 1e-12, "xi_hochschild": 1e-12, "zeta_eq_eta": 1e-8,
                  "eta_eq_half_zeta_antisym": 1e-8, "xi_eq_zeta": 1e-8, "xi_eq_minus_zeta": 1e-8}
    out = [{"identity": k, "max_defect": float(v), "tolerance": tolerances[k], "passed": bool(v < tolerances[k]),
            "cases": n_cases} for k, v in defects.items()]
    sgn = max(abs(sgn_identity_sum(n) + 4 * n) for n in range(-10, 11))
    out.append({"identity": "sgn_sum", "max_defect": float(sgn), "tolerance": 0.0, "passed": sgn == 0, "cases": 21})
    return out


# --- Chern numbers -------------------------------------------------------------


def chern_plaquette(bloch, fermi_energy, n_k: int = 24, *, tolerance=TOL_PLAQUETTE, gap_tol=1e-6,
                    **metadata) -> TopologicalReport:
    """Lattice-gauge (link variable) Chern number of the bands below ``fermi_energy``.

    ``bloch(k1, k2)`` must be ``2 pi``-periodic in both arguments.
    """
    ks = 2 * np.pi * np.arange(n_k) / n_k
    frames = np.empty((n_k, n_k), dtype=object)
    n_occ = None
    for i, k1 in enumerate(ks):
        for j, k2 in enumerate(ks):
            w, v = np.linalg.eigh(bloch(k1, k2))
            if np.min(np.abs(w - fermi_energy)) < gap_tol:
                raise GapClosedOnGrid(f"band within {gap_tol} of E_F at k=({k1:.4f}, {k2:.4f})")
            occ = w < fermi_energy
            if n_occ is None:
                n_occ = int(occ.sum())
            elif occ.sum() != n_occ:
                raise GapClosedOnGrid("number of occupied bands changes across the grid")
            frames[i, j] = v[:, occ]

    def link(x, y):
        d = np.linalg.det(x.conj().T @ y) if x.shape[1] else 1.0
        return d / abs(d)

    total = 0.0
    for i in range(n_k):
        for j in range(n_k):
            ip, jp = (i + 1) % n_k, (j + 1) % n_k
            u1 = link(frames[i, j], frames[ip, j])
            u2 = link(frames[ip, j], frames[ip, jp])
            u3 = link(frames[ip, jp], frames[i, jp])
            u4 = link(frames[i, jp], frames[i, j])
            total += np.angle(u1 * u2 * u3 * u4)
    # orientation: Ch = 2 pi i Tr P[d1 P, d2 P] with d_j = i[X_j, .]
    value = -total / (2 * np.pi)
    return TopologicalReport("chern_plaquette", float(value), tolerance, {"n_k": n_k, "n_occ": n_occ, **metadata})


def chern_realspace_bott(p, geom: LatticeGeometry, *, tolerance=TOL_BOTT, **metadata) -> TopologicalReport:
    """Bott index of ``(P e^{2 pi i X1/L1} P, P e^{2 pi i X2/L2} P)`` on a torus."""
    p = _mat(p)
    w, v = np.linalg.eigh(p)
    occ = v[:, w > 0.5]
    if occ.shape[1] == 0:
        return TopologicalReport("chern_bott", 0.0, tolerance, {"n_occ": 0, **metadata})
    lo, _ = geom.rows
    theta1 = 2 * np.pi * (geom.site_n1() - geom.n1_lo) / geom.length_1
    theta2 = 2 * np.pi * (geom.site_n2() - lo) / geom.n_rows
    ux = occ.conj().T @ (np.exp(1j * theta1)[:, None] * occ)
    uy = occ.conj().T @ (np.exp(1j * theta2)[:, None] * occ)
    smin = min(np.linalg.svd(ux, compute_uv=False).min(), np.linalg.svd(uy, compute_uv=False).min())
    if smin < 1e-3:
        raise SpectralObstruction(f"compressed exponential nearly singular (s_min={smin:.3g})")
    ev = np.linalg.eigvals(uy @ ux @ uy.conj().T @ ux.conj().T)
    value = np.sum(np.angle(ev)) / (2 * np.pi)
    return TopologicalReport("chern_bott", float(value), tolerance, {"n_occ": int(occ.shape[1]), "s_min": float(smin), **metadata})


def chern_local_marker(p, geom: LatticeGeometry, region) -> float:
    """Trace per unit cell of ``2 pi i P [i[X1, P], i[X2, P]]`` over ``region``.

    Meant for an open sample: ``region`` is a boolean site mask well inside
    it, where the average converges to the bulk Chern number.
    """
    if geom.bc_1 is not Boundary.OPEN:
        raise ValueError("the local marker needs open boundaries")
    p = _mat(p)
    x1 = geom.site_n1().astype(float)
    x2 = geom.site_n2().astype(float)
    c1 = x1[:, None] * p - p * x1[None, :]
    c2 = x2[:, None] * p - p * x2[None, :]
    pr = p[region]
    marker = np.sum(pr * (c1 @ c2 - c2 @ c1)[:, region].T, axis=1)
    cells = region.sum() / geom.orbitals
    return float((-2j * np.pi * marker.sum() / cells).real)
