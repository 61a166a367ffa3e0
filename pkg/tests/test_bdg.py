import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sqpc.analytic import btk_coefficients
from sqpc.bdg import (BdGDevice, ReflectionBlocks, _scatter, barrier_height,
                      build_bdg_lattice, delta_vs_field, landauer_conductance, lead_channels,
                      ns_conductance, reflection_matrix)
from sqpc.constants import hopping_energy
from sqpc.core import DeviceGeometry, fermi_energy
from sqpc.errors import ConfigurationError, DomainError
from sqpc.gates import PotentialField

from conftest import small_config

A = 5.0
T_HOP = hopping_energy(0.037, A)
E_F = fermi_energy(2.24e15, 0.037)


def strip(n_x, n_y, delta=0.0, Z=0.0, x_s=None, V=None, B=0.0, gauge="landau",
          disorder=0.0, seed=0, E_F=E_F):
    x = A * np.arange(n_x)
    y = A * (np.arange(n_y) - 0.5 * (n_y - 1))
    if V is None:
        V = np.zeros((n_x, n_y))
    geom = DeviceGeometry(L_c=100, W_c=50, L_J=1.4, W_J=5, interfaces="one", Z=Z)
    return build_bdg_lattice(geom, PotentialField(x, y, np.asarray(V, dtype=float)), delta, B,
                             A, m_eff=0.037, E_F=E_F, x_s=x_s, gauge=gauge,
                             disorder=disorder, seed=seed)


def transverse_levels(n_y):
    n = np.arange(1, n_y + 1)
    return 2 * T_HOP * (1 - np.cos(n * np.pi / (n_y + 1)))


def single_mode_strip(n_x=40, delta=1.0, Z=0.0, x_s=None):
    """Three-row strip shifted so only the lowest transverse mode is open."""
    shift = -transverse_levels(3)[0]
    return strip(n_x, 3, delta=delta, Z=Z, x_s=x_s, V=np.full((n_x, 3), shift))


# --- lattice construction -----------------------------------------------------

def test_normal_lattice_is_particle_hole_block_diagonal():
    lat = strip(6, 4)
    assert not np.any(lat.pairing)
    H = lat.hamiltonian("bdg").toarray()
    n = lat.onsite.size
    # column ordering: per column (e..., h...)
    m = 2 * lat.dims[1]
    e_idx = np.concatenate([np.arange(i * m, i * m + m // 2) for i in range(lat.dims[0])])
    h_idx = np.setdiff1d(np.arange(2 * n), e_idx)
    assert np.all(H[np.ix_(e_idx, h_idx)] == 0)
    assert np.allclose(H, H.conj().T)


def test_peierls_phase_per_plaquette():
    lat = strip(4, 4, B=1.0)
    # circulation around plaquette (0,0)-(1,0)-(1,1)-(0,1)
    ph = (np.angle(lat.hop_x[0, 0]) + np.angle(lat.hop_y[1, 0]) - np.angle(lat.hop_x[0, 1])
          - np.angle(lat.hop_y[0, 0]))
    expected = 2 * math.pi * 25e-18 / 4.135667696e-15
    assert abs(abs(ph) - expected) < 1e-9
    assert abs(ph) == pytest.approx(0.0380, abs=5e-5)


def test_spacing_mismatch_rejected():
    x = np.array([0.0, 4.0, 8.0])
    pot = PotentialField(x, np.array([0.0]), np.zeros((3, 1)))
    with pytest.raises(ConfigurationError):
        build_bdg_lattice(DeviceGeometry(100, 50, 1.4, 5), pot, 0.0, 0.0, A, E_F=E_F)


def test_resolution_guard():
    with pytest.raises(ConfigurationError):
        strip_a = build_bdg_lattice(
            DeviceGeometry(100, 50, 1.4, 5),
            PotentialField(np.arange(3) * 10.0, np.array([0.0]), np.zeros((3, 1))),
            0.0, 0.0, 10.0, E_F=E_F, lambda_F=53.0)


# --- lead modes ---------------------------------------------------------------

@pytest.mark.parametrize("n_y", [4, 9, 19])
def test_strip_mode_count(n_y):
    lat = strip(3, n_y)
    m = lead_channels(lat, "left", sector="e")
    assert m.n_prop == np.count_nonzero(transverse_levels(n_y) < E_F)
    W = (n_y + 1) * A
    k_F = math.sqrt(E_F / 38.1 * 0.037)
    if n_y == 19:
        assert m.n_prop == math.floor(k_F * W / math.pi)


def test_modes_closed_below_band():
    lat = strip(3, 5, V=np.full((3, 5), 100.0))
    assert lead_channels(lat, "left", sector="e").n_prop == 0


def test_mode_count_non_decreasing_in_energy():
    counts = []
    for shift in np.linspace(20, -60, 17):
        lat = strip(3, 8, V=np.full((3, 8), shift))
        counts.append(lead_channels(lat, "left", sector="e").n_prop)
    assert counts == sorted(counts) and counts[-1] > counts[0]


def test_combined_normal_lead_labels():
    lat = strip(3, 8)
    m = lead_channels(lat, "left")
    assert m.count(1) == m.count(-1) == lead_channels(lat, "left", sector="e").n_prop


def test_flux_normalisation():
    lat = strip(3, 12, B=0.5)
    m = lead_channels(lat, "left", sector="e")
    F = m.flux_matrix()
    n = m.n_prop
    assert np.allclose(F, np.diag(np.diag(F).real), atol=1e-10)
    assert np.allclose(np.diag(F).real, np.r_[np.ones(n), -np.ones(n)], atol=1e-10)


# --- scattering ---------------------------------------------------------------

def test_clean_strip_transmits_every_mode():
    lat = strip(5, 20)
    G = landauer_conductance(lat)
    assert G == pytest.approx(lead_channels(lat, "left", sector="e").n_prop, abs=1e-10)
    b = reflection_matrix(lat)
    assert np.abs(b.r_ee).max() < 1e-8 and b.r_he.size == 0


def test_single_barrier_row_matches_z():
    # one barrier site on a chain transmits 1/(1 + Z^2) exactly
    Z = 0.8
    # a single row has no transverse energy: shift the band bottom from 4t to 2t
    lat = strip(9, 1, V=np.full((9, 1), -2 * T_HOP), Z=Z, x_s=A * 5)
    assert landauer_conductance(lat) == pytest.approx(1 / (1 + Z * Z), rel=1e-10)
    assert barrier_height(Z, E_F, T_HOP) == pytest.approx(
        Z * 2 * T_HOP * math.sin(math.acos(1 - E_F / (2 * T_HOP))))


def test_transparent_ns_single_mode_andreev():
    lat = single_mode_strip(delta=1.0, x_s=A * 20)
    b = reflection_matrix(lat)
    assert b.N == 1
    assert np.abs(b.r_he[0, 0]) ** 2 >= 0.95


@pytest.mark.parametrize("Z", [0.5, 1.0, 2.0])
def test_barrier_ns_single_mode_btk(Z):
    lat = single_mode_strip(delta=1.0, Z=Z, x_s=A * 20)
    G = ns_conductance(reflection_matrix(lat))
    oracle = 2 * btk_coefficients(0.0, 1.0, Z).A
    assert G == pytest.approx(oracle, rel=0.1)


def random_lattice(rng, normal=False):
    n_x = int(rng.integers(6, 14))
    n_y = int(rng.integers(6, 12))
    V = rng.uniform(-8, 8, (n_x, n_y))
    delta = 0.0 if normal else float(rng.uniform(0.3, 2.0))
    return strip(n_x, n_y, delta=delta, Z=float(rng.uniform(0, 1.5)),
                 x_s=A * (n_x - 3), V=V, B=float(rng.uniform(-1.5, 1.5)),
                 gauge=("landau", "landau_y")[int(rng.integers(2))],
                 disorder=float(rng.uniform(0, 5)), seed=int(rng.integers(1000)))


def unitarity_defect(lat, E=0.0):
    """Max deviation of the scattering matrix from unitarity for left injection."""
    worst = 0.0
    for inc in ("e", "h"):
        b = reflection_matrix(lat, E, inc)
        assert b.N > 0
        S = b.stacked()
        worst = max(worst, np.abs(S.conj().T @ S - np.eye(S.shape[1])).max())
    return worst


def test_unitarity_random_devices():
    rng = np.random.default_rng(2024)
    defects = [unitarity_defect(random_lattice(rng, normal=(k % 4 == 0)),
                                E=float(rng.uniform(0, 0.2))) for k in range(20)]
    assert max(defects) < 1e-8


def test_particle_hole_equivalence_at_zero_energy():
    rng = np.random.default_rng(11)
    for _ in range(5):
        lat = random_lattice(rng)
        Ge = ns_conductance(reflection_matrix(lat, 0.0, "e"))
        Gh = ns_conductance(reflection_matrix(lat, 0.0, "h"))
        assert Ge == pytest.approx(Gh, abs=1e-9)


@pytest.mark.parametrize("delta", [0.0, 1.4])
def test_gauge_invariance_device(delta):
    cfg = small_config(delta_0=max(delta, 1e-9) if delta else 0.0)
    ga = BdGDevice(cfg, gauge="landau").conductance(-0.3, B=0.7)
    gb = BdGDevice(cfg, gauge="landau_y").conductance(-0.3, B=0.7)
    assert ga == pytest.approx(gb, abs=1e-8)


def full_bdg_conductance(lat, E=0.0):
    """NS formula evaluated through the full particle-hole solve, without sector shortcuts."""
    mL = lead_channels(lat, "left", E)
    mR = lead_channels(lat, "right", E)
    inject = np.flatnonzero(mL.kind_plus[:mL.n_prop] == 1)
    r, _ = _scatter(lat, "bdg", E, mL, mR, inject)
    out = mL.kind_minus[:mL.n_prop]
    r_ee, r_he = r[out == 1], r[out == -1]
    return len(inject) - np.sum(np.abs(r_ee) ** 2) + np.sum(np.abs(r_he) ** 2), r_he


def test_delta_to_zero_landauer_reduction():
    rng = np.random.default_rng(5)
    for _ in range(4):
        lat = random_lattice(rng, normal=True)
        G_bdg, r_he = full_bdg_conductance(lat)
        assert np.abs(r_he).max(initial=0) < 1e-10
        assert G_bdg == pytest.approx(landauer_conductance(lat), abs=1e-10)


def test_small_gap_continuity():
    cfg = small_config()
    dev = BdGDevice(cfg)
    g0 = dev.conductance(-0.2, delta=0.0)
    g_small = dev.conductance(-0.2, delta=1e-6)
    assert g0 <= g_small <= 2 * g0 + 1e-6


# --- conductance formula ------------------------------------------------------

def blocks(r_ee, r_he, N):
    r_ee, r_he = np.atleast_2d(r_ee), np.atleast_2d(r_he)
    return ReflectionBlocks(r_ee, r_he, np.zeros((0, N)), N)


def test_ns_conductance_formula():
    assert ns_conductance(blocks([[0.0]], [[1.0]], 1)) == 2.0
    U = np.array([[0, 1], [1, 0]], dtype=complex)
    assert ns_conductance(blocks(U, np.zeros((2, 2)), 2)) == 0.0
    assert ns_conductance(blocks(np.zeros((2, 2)), np.eye(2), 2)) == 4.0


# --- gap suppression ----------------------------------------------------------

def test_delta_vs_field():
    assert delta_vs_field(0.0, 1.4, 1.7) == 1.4
    assert delta_vs_field(1.7, 1.4, 1.7) == 0.0
    assert delta_vs_field(2.5, 1.4, 1.7) == 0.0
    assert delta_vs_field(0.6, 1.4, 1.7) == pytest.approx(1.4 * (1 - (0.6 / 1.7) ** 2))
    assert 1 - (0.6 / 1.7) ** 2 == pytest.approx(0.875, abs=1e-3)
    with pytest.raises(DomainError):
        delta_vs_field(-1.0, 1.4, 1.7)


@given(st.floats(0, 3), st.floats(0, 3))
def test_delta_vs_field_monotone(b1, b2):
    lo, hi = sorted((b1, b2))
    assert delta_vs_field(hi, 1.4, 1.7) <= delta_vs_field(lo, 1.4, 1.7)
