"""Photon-resolved dot-cavity dynamics: initial-state algebra, the hierarchy
equations, observables and the density-matrix reference."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qdlab.sjcm as sjcm
from qdlab.integrate import RK4_FIXED, IntegratorConfig
from qdlab.sjcm import (
    EXACT,
    HARTREE_FOCK,
    QdInitSpec,
    SjcmHierarchyState,
    SjcmParams,
    coeffs_from_oci,
    evolve_hierarchy,
    grid_co_triangle,
    grid_delta0_path,
    grid_fixed_o,
    hierarchy_init,
    hierarchy_rhs,
    observables,
    oci_from_coeffs,
    oracle_evolve,
    sweep_g2max,
)

G = 0.5
FIG_SPEC = QdInitSpec.from_occupations(0.3, 0.1, 0.0, (0.0, 1.0))


def short_cfg(periods=2.0):
    return IntegratorConfig.rabi(G, periods=periods, method=RK4_FIXED)


# ---------------------------------------------------------------- initial data

def test_oci_transform_examples():
    # fully oscillating, no inversion: equal G / Xs mixture
    assert coeffs_from_oci(1.0, 0.0, 0.0) == pytest.approx((0.5, 0.5, 0.0, 0.0))
    # no oscillating sector, all charge in the hole
    assert coeffs_from_oci(0.0, 1.0, 0.0) == pytest.approx((0.0, 0.0, 1.0, 0.0))
    # pure exciton
    assert coeffs_from_oci(1.0, 0.0, 1.0) == pytest.approx((0.0, 1.0, 0.0, 0.0))


def test_oci_inverse_is_exact():
    o, c, i = oci_from_coeffs(0.63, 0.03, 0.07, 0.27)
    assert (o, c, i) == pytest.approx((0.66, -0.2, -0.6))
    assert coeffs_from_oci(o, c, i) == pytest.approx((0.63, 0.03, 0.07, 0.27))


@given(
    o=st.floats(0.0, 1.0),
    fc=st.floats(-1.0, 1.0),
    fi=st.floats(-1.0, 1.0),
)
@settings(max_examples=200, deadline=None)
def test_oci_round_trip_property(o, fc, fi):
    """Any point of the admissible wedge survives the round trip."""
    c = fc * (1.0 - o)
    i = fi * o
    weights = coeffs_from_oci(o, c, i)
    assert all(0.0 <= w <= 1.0 for w in weights)
    assert sum(weights) == pytest.approx(1.0, abs=1e-12)
    o2, c2, i2 = oci_from_coeffs(*weights)
    assert (o2, c2, i2) == pytest.approx((o, c, i), abs=1e-12)


def test_oci_rejects_outside_wedge():
    with pytest.raises(ValueError, match="c_-"):
        coeffs_from_oci(0.5, 0.8, 0.0)
    with pytest.raises(ValueError, match="c_G"):
        coeffs_from_oci(0.5, 0.0, 0.8)


def test_from_occupations_weights():
    assert FIG_SPEC.c_xs == pytest.approx(0.03)
    assert FIG_SPEC.c_minus == pytest.approx(0.27)
    assert FIG_SPEC.c_plus == pytest.approx(0.07)
    assert FIG_SPEC.c_g == pytest.approx(0.63)
    assert FIG_SPEC.f_e == pytest.approx(0.3)
    assert FIG_SPEC.f_h == pytest.approx(0.1)
    assert FIG_SPEC.delta == pytest.approx(0.0)
    assert FIG_SPEC.n_support == 1


def test_uncorrelated_oscillating_state():
    spec = QdInitSpec.from_oci(1.0, 0.0, 0.0, (1.0,))
    assert spec.f_e == pytest.approx(0.5)
    assert spec.f_h == pytest.approx(0.5)
    assert spec.delta == pytest.approx(0.25)


def test_inconsistent_delta_reports_interval():
    with pytest.raises(ValueError, match=r"delta must lie in \[-0.09, 0.01\]"):
        QdInitSpec.from_occupations(0.9, 0.1, 0.3, (1.0,))


def test_photon_dist_validation():
    with pytest.raises(ValueError, match="sums to"):
        QdInitSpec.from_occupations(0.3, 0.1, 0.0, (0.5, 0.4))
    with pytest.raises(ValueError, match="negative"):
        QdInitSpec.from_occupations(0.3, 0.1, 0.0, (1.5, -0.5))
    with pytest.raises(ValueError, match="empty"):
        QdInitSpec.from_occupations(0.3, 0.1, 0.0, ())


# ----------------------------------------------------------------- hierarchy

def test_hierarchy_init_layout():
    state = hierarchy_init(FIG_SPEC)
    assert state.n_levels == 3  # support 1, one spare level above
    np.testing.assert_allclose(state.p, [0.0, 1.0, 0.0])
    np.testing.assert_allclose(state.f_e, [0.0, 0.3, 0.0])
    np.testing.assert_allclose(state.f_h, [0.0, 0.1, 0.0])
    np.testing.assert_allclose(state.psi, 0.0)
    np.testing.assert_allclose(state.c_x, [0.0, 0.03, 0.0])


def test_hierarchy_init_trailing_zeros_ok():
    padded = QdInitSpec.from_occupations(0.3, 0.1, 0.0, (0.0, 1.0, 0.0, 0.0))
    state = hierarchy_init(padded)
    assert state.n_levels == 3
    np.testing.assert_allclose(state.p, hierarchy_init(FIG_SPEC).p)


def test_n_max_must_cover_support():
    spec = QdInitSpec.from_occupations(0.3, 0.1, 0.0, (0.0, 0.0, 1.0))
    with pytest.raises(ValueError, match="n_max=2 too small"):
        hierarchy_init(spec, SjcmParams(n_max=2))


def test_initial_polarization_build_up():
    """At t = 0 the only motion is the polarization feeding on the inversion
    gap: d_t psi_0 = -g (p_1 - f_1^e - f_1^h + C_1^X - C_0^X)."""
    state = hierarchy_init(FIG_SPEC)
    d = hierarchy_rhs(state, SjcmParams(g=G))
    np.testing.assert_allclose(d.p, 0.0, atol=1e-15)
    np.testing.assert_allclose(d.f_e, 0.0, atol=1e-15)
    np.testing.assert_allclose(d.f_h, 0.0, atol=1e-15)
    np.testing.assert_allclose(d.c_x, 0.0, atol=1e-15)
    assert d.psi[0] == pytest.approx(-0.63 * G)
    # the occupied n = 1 exciton can also emit upward into n = 2
    assert d.psi[1] == pytest.approx(0.03 * math.sqrt(2.0) * G)
    assert d.psi[2] == 0.0


def test_rhs_modes_agree_on_factorized_state():
    """Where C^X_n = f^e_n f^h_n / p_n holds exactly, the truncation changes
    nothing in the time derivative of the shared variables."""
    exact = hierarchy_init(FIG_SPEC, mode=EXACT)
    hf = hierarchy_init(FIG_SPEC, mode=HARTREE_FOCK)
    d_exact = hierarchy_rhs(exact, SjcmParams(g=G))
    d_hf = hierarchy_rhs(hf, SjcmParams(g=G))
    np.testing.assert_allclose(d_exact.psi, d_hf.psi, atol=1e-15)
    np.testing.assert_allclose(d_exact.p, d_hf.p, atol=1e-15)


def test_hierarchy_state_validation():
    z = np.zeros(3)
    with pytest.raises(ValueError, match="share one 1-D shape"):
        SjcmHierarchyState(z, z, z, z, np.zeros(4))
    with pytest.raises(ValueError, match="mode"):
        SjcmHierarchyState(z, z, z, z, z, mode="approximate")


def test_observables_two_photon_fock():
    state = SjcmHierarchyState(
        np.array([0.0, 0.0, 1.0]), np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3)
    )
    obs = observables(state)
    assert obs.N == pytest.approx(2.0)
    assert obs.g2 == pytest.approx(0.5)


def test_g2_undefined_for_empty_cavity():
    state = SjcmHierarchyState(
        np.array([1.0, 0.0]), np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(2)
    )
    assert math.isnan(observables(state).g2)
    assert observables(state).N == 0.0


def test_vacuum_rabi_oscillation():
    """Pure exciton, empty cavity: p_1 = sin^2(gt), f_e = cos^2(gt)."""
    spec = QdInitSpec.from_occupations(1.0, 1.0, 0.0, (1.0,))
    series = evolve_hierarchy(spec, SjcmParams(g=G), short_cfg())
    gt = G * series.times
    np.testing.assert_allclose(series["N"], np.sin(gt) ** 2, atol=1e-9)
    np.testing.assert_allclose(series["f_e"], np.cos(gt) ** 2, atol=1e-9)
    np.testing.assert_allclose(series["psi0"], np.sin(gt) * np.cos(gt), atol=1e-9)
    # electron and hole leave together: they stay perfectly correlated
    np.testing.assert_allclose(series["delta"], (np.sin(gt) * np.cos(gt)) ** 2, atol=1e-9)


def test_charged_configurations_are_frozen():
    """A dot holding only a lone carrier cannot talk to the cavity."""
    spec = QdInitSpec(0.0, 0.0, 1.0, 0.0, (0.0, 1.0))
    series = evolve_hierarchy(spec, SjcmParams(g=G), short_cfg())
    np.testing.assert_allclose(series["N"], 1.0, atol=1e-12)
    np.testing.assert_allclose(series["f_h"], 1.0, atol=1e-12)
    np.testing.assert_allclose(series["f_e"], 0.0, atol=1e-12)
    ref = oracle_evolve(spec, SjcmParams(g=G), short_cfg())
    np.testing.assert_allclose(ref["N"], 1.0, atol=1e-12)


def test_hierarchy_matches_density_matrix_engine():
    """Shared-step runs of both engines agree column by column."""
    cfg = short_cfg()
    h = evolve_hierarchy(FIG_SPEC, SjcmParams(g=G), cfg)
    r = oracle_evolve(FIG_SPEC, SjcmParams(g=G), cfg)
    for name in ("N", "f_e", "f_h", "C", "delta", "p0", "p1", "p2", "psi0", "psi1"):
        np.testing.assert_allclose(h[name], r[name], atol=1e-12, err_msg=name)
    np.testing.assert_allclose(h["g2"][1:], r["g2"][1:], atol=1e-10)
    # the reference also tracks the oscillation ability, conserved exactly
    np.testing.assert_allclose(r["O"], 0.66, atol=1e-12)


def test_trajectory_stays_physical():
    """Occupations stay inside [0, p_n] and C^X within its Cauchy-Schwarz
    style bounds along the flow, for a handful of random valid states."""
    rng = np.random.default_rng(11)
    for _ in range(5):
        c = rng.dirichlet(np.ones(4))
        p = rng.dirichlet(np.ones(3))
        spec = QdInitSpec(c[0], c[1], c[2], c[3], tuple(p))
        series = evolve_hierarchy(spec, SjcmParams(g=G), short_cfg())
        levels = 1 + max(
            int(name[1:]) for name in series.names if name.startswith("p") and name[1:].isdigit()
        )
        for n in range(levels):
            pn = series[f"p{n}"]
            assert pn.min() > -1e-9
        assert series["f_e"].min() > -1e-9 and series["f_e"].max() < 1 + 1e-9
        assert series["f_h"].min() > -1e-9 and series["f_h"].max() < 1 + 1e-9


def test_conserved_quantities_along_flow():
    series = evolve_hierarchy(FIG_SPEC, SjcmParams(g=G), short_cfg())
    np.testing.assert_allclose(series["C"], -0.2, atol=1e-12)
    np.testing.assert_allclose(series["N"] + series["f_e"], 1.3, atol=1e-12)
    np.testing.assert_allclose(series["N"] + series["f_h"], 1.1, atol=1e-12)


# --------------------------------------------------------------------- sweeps

def test_sweep_matches_direct_maximum():
    grid = grid_fixed_o(0.5, 0.5)
    cfg = short_cfg(4.0)
    points = sweep_g2max(grid, SjcmParams(g=G), cfg)
    assert len(points) == len(grid)
    for spec, pt in zip(grid, points):
        series = evolve_hierarchy(spec, SjcmParams(g=G), cfg)
        direct = np.nanmax(series["g2"])
        assert pt.g2_max == pytest.approx(direct, abs=1e-12)
        assert pt.O == pytest.approx(0.5)
        assert pt.delta == pytest.approx(spec.delta)


def test_sweep_without_oscillating_sector_is_flat():
    """O = 0 leaves only charged configurations: g2 never moves off its
    initial single-photon value of zero."""
    points = sweep_g2max(grid_fixed_o(0.0, 0.5), SjcmParams(g=G), short_cfg())
    assert all(pt.g2_max == pytest.approx(0.0, abs=1e-12) for pt in points)


def test_sweep_thread_count(monkeypatch):
    grid = grid_delta0_path(0.5)
    cfg = short_cfg()
    base = sweep_g2max(grid, SjcmParams(g=G), cfg)
    monkeypatch.setenv("QDLAB_THREADS", "3")
    threaded = sweep_g2max(grid, SjcmParams(g=G), cfg)
    for a, b in zip(base, threaded):
        assert a.g2_max == pytest.approx(b.g2_max, abs=1e-12)
    monkeypatch.setenv("QDLAB_THREADS", "many")
    with pytest.raises(ValueError, match="QDLAB_THREADS"):
        sweep_g2max(grid, SjcmParams(g=G), cfg)


def test_grid_families():
    path = grid_delta0_path(0.25)
    assert len(path) == 9
    assert all(s.delta == pytest.approx(0.0, abs=1e-15) for s in path)
    assert all(s.f_e + s.f_h == pytest.approx(1.0) for s in path)

    tri = grid_co_triangle(0.5, 0.5)
    os = sorted({round(s.oci[0], 6) for s in tri})
    assert os == [0.0, 0.5, 1.0]
    # the admissible charge range shrinks as O grows
    assert sum(1 for s in tri if s.oci[0] == pytest.approx(1.0)) == 1


def test_truncation_tripwire(monkeypatch):
    """The reference engine refuses to continue once exciton weight reaches
    the top photon level (here forced by a hostile threshold)."""
    monkeypatch.setattr(sjcm, "LEAK_TOL", -1.0)
    with pytest.raises(RuntimeError, match="increase n_max"):
        oracle_evolve(FIG_SPEC, SjcmParams(g=G), short_cfg())
