import warnings

import numpy as np
import pytest

from interfacelab.catalog import EXPERIMENTS, experiment, model
from interfacelab.errors import GapViolated, UnknownModel
from interfacelab.interface import (
    INDEX_SIGN,
    bulk_chern,
    bulk_interface_report,
    current_report,
    flux_unitary,
    half_space_split,
    homotopy_sweep,
    interface_decay,
    interface_index,
    interface_winding,
)
from interfacelab.lattice import Boundary, DisorderSample, LatticeGeometry
from interfacelab.spectral import make_bump_window
from interfacelab.topology import index_additivity_check, local_interface_unitary, winding_number


def test_catalog_names():
    assert set(EXPERIMENTS) == {"haldane_vs_staggered", "harper_vs_harper", "harper_vs_vacuum", "trivial_vs_trivial"}
    with pytest.raises(UnknownModel):
        experiment("nope")
    with pytest.raises(UnknownModel):
        model("nope")
    assert model("staggered", mass=0.7).params["mass"] == 0.7


def test_experiment_validation():
    exp = experiment("haldane_vs_staggered", length_1=16, half_width_2=8)
    with pytest.raises(ValueError):
        exp.replace(geometry=exp.geometry.with_bc(Boundary.OPEN))
    with pytest.raises(ValueError):
        exp.with_mu(1.5)
    with pytest.raises(ValueError):
        exp.replace(trace_rows=(1, 4))
    assert exp.trace_rows == (-4, 4)


def test_chain_on_a_small_strip(small_haldane):
    rep = bulk_interface_report(small_haldane)
    assert rep.chern_plus.integer == 1 and rep.chern_minus.integer == 0
    assert rep.current.value == pytest.approx(1.0, abs=0.05)
    assert rep.winding.value == pytest.approx(1.0, abs=0.05)
    assert rep.index.value == pytest.approx(1.0, abs=0.1)
    assert rep.consistent
    d = rep.to_dict()
    assert d["chern_difference"] == 1
    assert all(v["passed"] for v in d["chain_residuals"].values())


def test_flux_unitary_properties(small_haldane):
    u = flux_unitary(small_haldane)
    h = small_haldane.hamiltonian().matrix
    np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-10)
    np.testing.assert_allclose(u @ h, h @ u, atol=1e-9)


def test_unitary_sign_flips_winding(small_haldane):
    geom = small_haldane.geometry
    rows = small_haldane.trace_rows
    w_plus = winding_number(flux_unitary(small_haldane, sign=1), geom, rows=rows).value
    w_minus = winding_number(flux_unitary(small_haldane, sign=-1), geom, rows=rows).value
    # U(+) = U(-)* exactly; the two windings agree up to the finite-ring tail of the kernel
    assert w_plus == pytest.approx(-w_minus, abs=0.01)
    assert INDEX_SIGN == -1 and w_minus == pytest.approx(1.0, abs=0.05)


def test_block_disjoint_product_is_additive(small_haldane):
    geom, rows = small_haldane.geometry, small_haldane.trace_rows
    u = flux_unitary(small_haldane, sign=INDEX_SIGN)
    v = local_interface_unitary(geom, np.random.default_rng(4), rows=(rows[0] + 1, rows[0] + 3),
                                shift_row=rows[0] + 2)
    rep = index_additivity_check(u, v, geom, rows=rows)
    assert rep["wind_v"] == pytest.approx(-2.0, abs=1e-12)
    assert rep["defect"] < 1e-6


def test_half_space_split(small_haldane):
    halves = half_space_split(small_haldane, methods=("winding",))
    assert halves["upper"]["winding"] == pytest.approx(1.0, abs=0.1)
    assert halves["lower"]["winding"] == pytest.approx(0.0, abs=0.1)


def test_homotopy_keeps_the_verdict(small_haldane):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        reps = homotopy_sweep(small_haldane, [0.0, 1.0], methods=("winding",))
    assert [r.integer for r in reps] == [1, 1]
    assert "split" in reps[0].metadata and "split" not in reps[1].metadata


def test_decay_away_from_the_interface(small_haldane):
    rep = interface_decay(small_haldane)
    assert rep.max_at_row_distance(0) > 1e-2
    assert rep.max_at_row_distance(16) < 1e-5
    assert rep.alpha_row > 3


def test_trivial_interface_is_trivial():
    exp = experiment("trivial_vs_trivial")
    rep = bulk_interface_report(exp)
    for r in (rep.current, rep.winding, rep.index, rep.chern_plus, rep.chern_minus):
        assert r.integer == 0 and r.quantized


def test_window_inside_a_band_is_rejected():
    exp = experiment("haldane_vs_staggered", length_1=16, half_width_2=8)
    bad = exp.replace(window=make_bump_window((-1.5, 0.6), 0.0, 0.6))
    with pytest.raises(GapViolated):
        interface_winding(bad)


def test_metadata_records_the_run():
    exp = experiment("trivial_vs_trivial").with_sample(DisorderSample(17), disorder=0.2)
    rep = current_report(exp)
    assert rep.metadata["seed"] == 17 and rep.metadata["lambda"] == 0.2
    assert rep.metadata["L1"] == 16 and rep.metadata["trace_rows"] == [-8, 8]


def test_disorder_enters_both_halves():
    exp = experiment("trivial_vs_trivial")
    dirty = exp.with_sample(DisorderSample(5), disorder=0.3)
    diff = dirty.hamiltonian().matrix - exp.hamiltonian().matrix
    assert np.count_nonzero(diff - np.diag(np.diag(diff))) == 0
    v = np.diag(diff).real
    g = exp.geometry
    np.testing.assert_allclose(v, 0.3 * DisorderSample(5).values(g), atol=1e-14)


def test_bulk_chern_uses_bott_with_disorder():
    spec = model("haldane").with_disorder(0.3)
    torus = LatticeGeometry(16, 8, 2, Boundary.PERIODIC)
    rep = bulk_chern(spec, 0.0, sample=DisorderSample(2), torus=torus)
    assert rep.quantity == "chern_bott" and rep.integer == 1 and rep.quantized
    clean = bulk_chern(model("haldane"), 0.0)
    assert clean.quantity == "chern_plaquette" and clean.integer == 1


def test_index_on_open_strip(small_haldane):
    rep = interface_index(small_haldane)
    assert rep.metadata["W"] == 6 and "value_W_plus_4" in rep.metadata
    assert rep.value == pytest.approx(1.0, abs=0.1)
