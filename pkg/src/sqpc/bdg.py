"""Bogoliubov-de Gennes tight-binding scattering on the gated 2DEG.

The scattering region is a square lattice of ``n_x`` columns by ``n_y``
rows with hard transverse walls.  A normal lead is attached to the left of
column 0 and a second lead to the right of the last column; the right lead
is superconducting for NS devices.  Lead modes come from the transfer
matrix of one lead cell, and the region is eliminated column by column with
the recursive Green's function.  Wavefunction matching to the lead Bloch
matrices then gives the reflection and transmission amplitudes in flux
normalisation.

BdG basis per column: ``(psi_e[0..n_y-1], psi_h[0..n_y-1])`` with

    H = [[h, Delta], [Delta^*, -h^*]].

Magnetic fields enter through Peierls phases ``2 pi int A.dl / Phi0`` on
the electron hoppings and the conjugate phases on the hole hoppings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .constants import PEIERLS_COEFF, hopping_energy
from .core import derive_2deg_parameters, fermi_energy
from .errors import ConfigurationError, DomainError, NumericError
from .gates import GateResponse, constriction_layout

ELECTRON, HOLE, QUASI = 1, -1, 0
GAUGES = ("landau", "landau_y")


def delta_vs_field(B, delta_0, B_c):
    """Field-suppressed gap Delta_0 * max(0, 1 - (B/B_c)^2) in meV."""
    if B < 0:
        raise DomainError("B must be non-negative")
    if not B_c > 0:
        raise DomainError("B_c must be positive")
    return delta_0 * max(0.0, 1.0 - (B / B_c) ** 2)


def lattice_fermi_momentum(E_F, t):
    """k_F a of the lattice dispersion 2t(1 - cos ka) = E_F."""
    c = 1.0 - E_F / (2.0 * t)
    if not -1.0 < c < 1.0:
        raise DomainError("E_F outside the lattice band")
    return float(np.arccos(c))


def barrier_height(Z, E_F, t):
    """Onsite energy of a one-row barrier with BTK strength ``Z``.

    A single site of height U on a chain transmits 1/(1 + (U / 2t sin ka)^2),
    so U = Z * 2t sin(k_F a) = Z hbar v_F / a with the lattice velocity.
    """
    return Z * 2.0 * t * np.sin(lattice_fermi_momentum(E_F, t))


# --- lattice records ----------------------------------------------------------

@dataclass
class LeadSpec:
    """One cell of a translation-invariant lead (electron part plus pairing)."""

    onsite: np.ndarray  # (n_y,) meV
    hop_x: np.ndarray  # (n_y,) complex, H_{j+1, j}
    hop_y: np.ndarray  # (n_y - 1,) complex, H_{y+1, y}
    pairing: np.ndarray  # (n_y,) complex

    @property
    def is_normal(self):
        return not np.any(self.pairing)

    def cell(self, sector):
        h = _column_matrix(self.onsite, self.hop_y)
        if sector == "e":
            return h, self.hop_x.astype(complex)
        if sector == "h":
            return -h.conj(), -self.hop_x.conj()
        return _bdg_block(h, self.pairing), np.concatenate([self.hop_x, -self.hop_x.conj()])


@dataclass
class BdGLattice:
    """Tight-binding BdG description of one device at fixed (V_g, B).

    ``onsite[i, j]`` is the electron onsite energy 4t + V - E_F (plus
    barrier and disorder) at ``(x[i], y[j])``.
    """

    x: np.ndarray
    y: np.ndarray
    a: float
    t: float
    E_F: float
    B: float
    onsite: np.ndarray  # (n_x, n_y)
    hop_x: np.ndarray  # (n_x - 1, n_y) complex, H_{(i+1, j), (i, j)}
    hop_y: np.ndarray  # (n_x, n_y - 1) complex, H_{(i, j+1), (i, j)}
    pairing: np.ndarray  # (n_x, n_y) complex
    lead_left: LeadSpec
    lead_right: LeadSpec
    couple_left: np.ndarray  # (n_y,) H_{0, -1}
    couple_right: np.ndarray  # (n_y,) H_{N, N-1}
    gauge: str = "landau"
    meta: dict = field(default_factory=dict)

    @property
    def dims(self):
        return self.onsite.shape

    @property
    def n_orbitals(self):
        return 2 * self.onsite.size

    @property
    def is_normal(self):
        return (not np.any(self.pairing)) and self.lead_left.is_normal and self.lead_right.is_normal

    def column(self, i, sector="bdg"):
        h = _column_matrix(self.onsite[i], self.hop_y[i])
        if sector == "e":
            return h
        if sector == "h":
            return -h.conj()
        return _bdg_block(h, self.pairing[i])

    def column_hops(self, sector="bdg"):
        """(n_x - 1, m) diagonals of the forward hoppings H_{i+1, i}."""
        if sector == "e":
            return self.hop_x.astype(complex)
        if sector == "h":
            return -self.hop_x.conj()
        return np.concatenate([self.hop_x, -self.hop_x.conj()], axis=1)

    def hamiltonian(self, sector="bdg"):
        """Sparse Hamiltonian of the closed scattering region."""
        n_x = self.dims[0]
        blocks = [[None] * n_x for _ in range(n_x)]
        hops = self.column_hops(sector)
        for i in range(n_x):
            blocks[i][i] = sp.csr_matrix(self.column(i, sector))
            if i + 1 < n_x:
                blocks[i + 1][i] = sp.diags(hops[i])
                blocks[i][i + 1] = sp.diags(hops[i].conj())
        if n_x == 1:
            return sp.csr_matrix(blocks[0][0])
        return sp.bmat(blocks, format="csr")


def _column_matrix(onsite, hop_y):
    h = np.diag(np.asarray(onsite, dtype=complex))
    if len(hop_y):
        h += np.diag(hop_y, -1) + np.diag(np.conj(hop_y), 1)
    return h


def _bdg_block(h, pairing):
    d = np.diag(np.asarray(pairing, dtype=complex))
    return np.block([[h, d], [d.conj(), -h.conj()]])


# --- lead modes ---------------------------------------------------------------

@dataclass
class LeadModes:
    """Bloch modes of a lead at one energy.

    ``U_plus`` holds right-moving propagating modes (first ``n_prop``
    columns, flux-normalised) followed by right-decaying evanescent modes;
    ``U_minus`` likewise for left-moving and left-decaying modes.  ``kind``
    arrays label each column as electron (+1), hole (-1) or mixed (0).
    """

    lam_plus: np.ndarray
    U_plus: np.ndarray
    kind_plus: np.ndarray
    lam_minus: np.ndarray
    U_minus: np.ndarray
    kind_minus: np.ndarray
    n_prop: int
    velocities: np.ndarray  # of the right movers, in units of a/hbar meV
    vh: np.ndarray  # forward hopping diagonal of the lead cell

    @property
    def N(self):
        return self.n_prop

    def count(self, kind):
        return int(np.count_nonzero(self.kind_plus[:self.n_prop] == kind))

    @property
    def momenta(self):
        """k a of the right movers in (-pi, pi]."""
        return np.angle(self.lam_plus[:self.n_prop])

    def bloch_plus(self):
        return self.U_plus @ np.diag(self.lam_plus) @ _inv(self.U_plus)

    def bloch_minus_inv(self):
        return self.U_minus @ np.diag(1.0 / self.lam_minus) @ _inv(self.U_minus)

    def flux_matrix(self):
        """Current form between all propagating modes; +-identity when normalised."""
        right = self.U_plus[:, :self.n_prop], self.lam_plus[:self.n_prop]
        left = self.U_minus[:, :self.n_prop], self.lam_minus[:self.n_prop]
        phi = np.concatenate([right[0], left[0]], axis=1)
        lam = np.concatenate([right[1], left[1]])
        P = phi.conj().T @ (self.vh.conj()[:, None] * phi)
        Q = phi.conj().T @ (self.vh[:, None] * phi)
        return 1j * (P * lam[None, :] - Q * lam.conj()[:, None])


def _inv(M):
    try:
        out = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular matrix in lead or Green's function solve: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite inverse", condition=np.inf)
    return out


def compute_modes(H0, vh, E, kind=QUASI, tol=1e-7):
    """Propagating and evanescent modes of the lead cell ``(H0, vh)`` at ``E``."""
    H0 = np.asarray(H0, dtype=complex)
    vh = np.asarray(vh, dtype=complex)
    m = len(vh)
    if np.any(vh == 0):
        raise NumericError("lead hopping must be invertible")
    vinv = 1.0 / vh.conj()
    T = np.zeros((2 * m, 2 * m), dtype=complex)
    T[:m, :m] = vinv[:, None] * (E * np.eye(m) - H0)
    T[:m, m:] = -np.diag(vinv * vh)
    T[m:, :m] = np.eye(m)
    lam, vec = sla.eig(T)
    big = np.abs(lam) > 1.0
    phi = np.where(big[None, :], vec[:m] / np.where(big, lam, 1.0)[None, :], vec[m:])
    phi = phi / np.linalg.norm(phi, axis=0)[None, :]

    mod = np.abs(lam)
    prop = np.abs(mod - 1.0) < tol
    right, left, vel = [], [], []
    idx = list(np.flatnonzero(prop))
    while idx:
        i0 = idx[0]
        group = [i for i in idx if abs(lam[i] - lam[i0]) < 1e3 * tol]
        idx = [i for i in idx if i not in group]
        l0 = lam[group].mean()
        l0 = l0 / abs(l0)
        Phi = phi[:, group]
        P = Phi.conj().T @ (vh.conj()[:, None] * Phi)
        Q = Phi.conj().T @ (vh[:, None] * Phi)
        C = 1j * (l0 * P - l0.conjugate() * Q)
        v, w = np.linalg.eigh(0.5 * (C + C.conj().T))
        modes = Phi @ w
        for k in range(len(v)):
            if abs(v[k]) < 1e-9:
                raise NumericError(f"zero-velocity mode at E={E!r}; energy sits on a band edge")
            col = modes[:, k] / np.sqrt(abs(v[k]))
            (right if v[k] > 0 else left).append((np.angle(l0), l0, col, abs(v[k])))
    right.sort(key=lambda r: r[0])
    left.sort(key=lambda r: r[0])
    ev_plus = [i for i in np.flatnonzero(~prop) if mod[i] < 1.0]
    ev_minus = [i for i in np.flatnonzero(~prop) if mod[i] > 1.0]
    if len(right) != len(left) or len(right) + len(ev_plus) != m:
        raise NumericError(f"lead mode count mismatch at E={E!r} "
                           f"({len(right)} right, {len(left)} left, {len(ev_plus)} decaying)")

    def assemble(prop_modes, ev):
        lam_all = np.array([p[1] for p in prop_modes] + list(lam[ev]), dtype=complex)
        cols = [p[2] for p in prop_modes] + [phi[:, i] for i in ev]
        U = np.array(cols).T if cols else np.zeros((m, 0), dtype=complex)
        return lam_all, U.reshape(m, len(cols))

    lp, Up = assemble(right, ev_plus)
    lm, Um = assemble(left, ev_minus)
    kinds = np.full(m, kind)
    return LeadModes(lp, Up, kinds.copy(), lm, Um, kinds.copy(), len(right),
                     np.array([r[3] for r in right]), vh)


def _combine_sectors(me, mh):
    """Block-diagonal BdG modes from separate electron and hole sector modes."""
    ne, nh = me.n_prop, mh.n_prop
    m_e, m_h = me.U_plus.shape[0], mh.U_plus.shape[0]

    def merge(Ue, Uh, le, lh):
        # propagating electron, propagating hole, then the evanescent rest
        order = ([(ELECTRON, i) for i in range(ne)] + [(HOLE, i) for i in range(nh)]
                 + [(ELECTRON, i) for i in range(ne, m_e)] + [(HOLE, i) for i in range(nh, m_h)])
        U = np.zeros((m_e + m_h, m_e + m_h), dtype=complex)
        lam = np.empty(m_e + m_h, dtype=complex)
        kind = np.array([k for k, _ in order])
        for c, (k, i) in enumerate(order):
            if k == ELECTRON:
                U[:m_e, c] = Ue[:, i]
                lam[c] = le[i]
            else:
                U[m_e:, c] = Uh[:, i]
                lam[c] = lh[i]
        return lam, U, kind

    lp, Up, kp = merge(me.U_plus, mh.U_plus, me.lam_plus, mh.lam_plus)
    lm, Um, km = merge(me.U_minus, mh.U_minus, me.lam_minus, mh.lam_minus)
    return LeadModes(lp, Up, kp, lm, Um, km, ne + nh,
                     np.concatenate([me.velocities, mh.velocities]),
                     np.concatenate([me.vh, mh.vh]))


def _lead_of(lattice, side):
    if side not in ("left", "right"):
        raise DomainError("lead side must be 'left' or 'right'")
    return lattice.lead_left if side == "left" else lattice.lead_right


def lead_channels(lattice, side, E=0.0, sector=None):
    """Modes of the ``side`` lead at energy ``E``.

    Normal leads are solved per particle sector and combined, so every
    propagating mode carries an electron/hole label.  ``sector`` = "e" or
    "h" restricts the result to one sector of a normal lead.
    """
    lead = _lead_of(lattice, side)
    if sector in ("e", "h"):
        if not lead.is_normal:
            raise DomainError("particle sectors are only defined in a normal lead")
        H0, vh = lead.cell(sector)
        return compute_modes(H0, vh, E, ELECTRON if sector == "e" else HOLE)
    if lead.is_normal:
        return _combine_sectors(compute_modes(*lead.cell("e"), E, ELECTRON),
                                compute_modes(*lead.cell("h"), E, HOLE))
    H0, vh = lead.cell("bdg")
    return compute_modes(H0, vh, E, QUASI)


# --- scattering solve ---------------------------------------------------------

def _scatter(lattice, sector, E, modes_L, modes_R, inject):
    """Amplitudes for waves injected from the left lead in modes ``inject``.

    Returns ``(r, t)`` with rows over outgoing propagating modes of the left
    and right lead.
    """
    n_x = lattice.dims[0]
    hops = lattice.column_hops(sector)
    wL = _coupling(lattice.couple_left, sector)
    wR = _coupling(lattice.couple_right, sector)
    m = len(wL)

    Fp_L = modes_L.bloch_plus()
    Fm_inv_L = modes_L.bloch_minus_inv()
    Fp_R = modes_R.bloch_plus()
    sigma_L = wL[:, None] * Fm_inv_L * (wL.conj() / modes_L.vh.conj())[None, :]
    sigma_R = wR.conj()[:, None] * Fp_R * (wR / modes_R.vh)[None, :]

    psi_in = modes_L.U_plus[:, inject]
    src = wL[:, None] * (psi_in - Fm_inv_L @ (Fp_L @ psi_in))

    eye = E * np.eye(m)
    g = [None] * n_x
    for i in range(n_x - 1, -1, -1):
        A = eye - lattice.column(i, sector)
        if i == n_x - 1:
            A = A - sigma_R
        else:
            d = hops[i]
            A = A - d.conj()[:, None] * g[i + 1] * d[None, :]
        if i == 0:
            A = A - sigma_L
        g[i] = _inv(A)

    psi = g[0] @ src
    psi0 = psi
    for i in range(n_x - 1):
        psi = g[i + 1] @ (hops[i][:, None] * psi)
        g[i] = None

    psi_r = Fm_inv_L @ ((wL.conj() / modes_L.vh.conj())[:, None] * psi0 - Fp_L @ psi_in)
    r = np.linalg.solve(modes_L.U_minus, psi_r)[:modes_L.n_prop]
    psi_N = Fp_R @ ((wR / modes_R.vh)[:, None] * psi)
    t = np.linalg.solve(modes_R.U_plus, psi_N)[:modes_R.n_prop]
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
        raise NumericError("non-finite scattering amplitudes")
    return r, t


def _coupling(c, sector):
    if sector == "e":
        return c.astype(complex)
    if sector == "h":
        return -c.conj()
    return np.concatenate([c, -c.conj()])


@dataclass
class ReflectionBlocks:
    """Left-lead reflection amplitudes, split by particle type.

    ``r_ee[i, j]`` is the amplitude for an incoming electron mode ``j`` to
    leave as electron mode ``i``; ``r_he`` leaves as a hole.  ``t`` holds
    the transmitted amplitudes into the right lead (empty below the gap).
    """

    r_ee: np.ndarray
    r_he: np.ndarray
    t: np.ndarray
    N: int
    incoming: str = "e"

    def column_norms(self):
        """Outgoing probability per incoming mode; one for a unitary S-matrix."""
        return (np.sum(np.abs(self.r_ee) ** 2, axis=0) + np.sum(np.abs(self.r_he) ** 2, axis=0)
                + np.sum(np.abs(self.t) ** 2, axis=0))

    def stacked(self):
        return np.vstack([self.r_ee, self.r_he, self.t])


def reflection_matrix(lattice, E=0.0, incoming="e"):
    """Reflection blocks for particles of type ``incoming`` sent in from the left lead.

    With ``incoming = "h"`` the blocks returned are (r_hh, r_eh) in the
    ``r_ee``/``r_he`` slots, i.e. the roles of the particle types swap.
    """
    if incoming not in ("e", "h"):
        raise DomainError("incoming must be 'e' or 'h'")
    if not lattice.lead_left.is_normal:
        raise ConfigurationError("the probe (left) lead must be normal")
    if lattice.is_normal:
        sec = incoming
        mL = lead_channels(lattice, "left", E, sector=sec)
        mR = lead_channels(lattice, "right", E, sector=sec)
        n_in = mL.n_prop
        r, t = _scatter(lattice, sec, E, mL, mR, np.arange(n_in))
        return ReflectionBlocks(r, np.zeros((0, n_in), dtype=complex), t, n_in, incoming)
    mL = lead_channels(lattice, "left", E)
    mR = lead_channels(lattice, "right", E)
    kind_in = ELECTRON if incoming == "e" else HOLE
    labels = mL.kind_plus[:mL.n_prop]
    inject = np.flatnonzero(labels == kind_in)
    r, t = _scatter(lattice, "bdg", E, mL, mR, inject)
    out = mL.kind_minus[:mL.n_prop]
    return ReflectionBlocks(r[out == kind_in], r[out == -kind_in], t, len(inject), incoming)


def ns_conductance(blocks):
    """Sub-gap two-terminal conductance N - tr(r_ee^+ r_ee) + tr(r_he^+ r_he) in G0."""
    return float(blocks.N - np.sum(np.abs(blocks.r_ee) ** 2) + np.sum(np.abs(blocks.r_he) ** 2))


def transmission_matrix(lattice, E=0.0):
    """Electron transmission amplitudes between two normal leads."""
    if not lattice.is_normal:
        raise ConfigurationError("Landauer transmission needs a normal device")
    return reflection_matrix(lattice, E, "e").t


def landauer_conductance(lattice, E=0.0):
    t = transmission_matrix(lattice, E)
    return float(np.sum(np.abs(t) ** 2))


# --- device assembly ----------------------------------------------------------

@dataclass
class DeviceLayout:
    """Site grid and region bookkeeping of a lattice device."""

    x: np.ndarray
    y: np.ndarray
    x_s: float  # superconductor begins at |x| >= x_s
    s_left: bool  # finite superconducting slab next to the left lead
    width: float


def device_layout(geometry, a, width, margin, s_length, coherent_two=False):
    """Grid of the scattering region around a constriction centred at x = 0.

    The left normal lead is attached at x = -x_s (or beyond the left slab of
    a coherent two-interface device) and the superconductor occupies
    x >= x_s, with x_s = L_c/2 + margin.  Hard walls sit at y = +-width/2.
    """
    n_y = int(round(width / a)) - 1
    if n_y < 1:
        raise ConfigurationError("window narrower than two lattice spacings")
    y = (np.arange(n_y) - 0.5 * (n_y - 1)) * a
    x_s = 0.5 * geometry.L_c + margin
    x_lo = -x_s - (s_length if coherent_two else 0.0)
    x_hi = x_s + s_length
    n_x = int(round((x_hi - x_lo) / a)) + 1
    x = x_lo + np.arange(n_x) * a
    return DeviceLayout(x=x, y=y, x_s=x_s, s_left=coherent_two, width=width)


def build_bdg_lattice(geometry, potential, delta_0, B, a, *, m_eff=0.037, E_F=None,
                      x_s=None, s_left=False, field_in_superconductor=False,
                      gauge="landau", disorder=0.0, seed=0, lambda_F=None):
    """Assemble the BdG lattice of a one- or two-interface device.

    Parameters
    ----------
    geometry : DeviceGeometry
        Supplies ``Z``; the interface count is encoded by ``s_left``.
    potential : PotentialField
        Gate potential (meV) on the site grid; its spacing must equal ``a``.
    delta_0 : float
        Pair potential in the superconducting regions (meV); 0 gives a fully
        normal device with a normal right lead.
    B : float
        Perpendicular field (T).
    x_s : float
        Sites with x >= x_s (and x <= -x_s when ``s_left``) are superconducting.
    gauge : {"landau", "landau_y"}
        ``landau`` uses A = -B y x everywhere in the field region;
        ``landau_y`` adds grad(B x y) on the scattering-region sites.
    """
    x = np.asarray(potential.x, dtype=float)
    y = np.asarray(potential.y, dtype=float)
    V = np.asarray(potential.energy, dtype=float)
    if gauge not in GAUGES:
        raise ConfigurationError(f"unknown gauge {gauge!r}")
    if len(x) > 1 and not np.allclose(np.diff(x), a, rtol=1e-9, atol=0):
        raise ConfigurationError("potential grid spacing in x does not match a")
    if len(y) > 1 and not np.allclose(np.diff(y), a, rtol=1e-9, atol=0):
        raise ConfigurationError("potential grid spacing in y does not match a")
    if lambda_F is not None and a > lambda_F / 8.0:
        raise ConfigurationError(f"lattice spacing {a} nm exceeds lambda_F/8 = {lambda_F / 8:.3g} nm")
    if delta_0 < 0:
        raise DomainError("delta_0 must be non-negative")
    t = hopping_energy(m_eff, a)
    if E_F is None:
        raise ConfigurationError("E_F is required")
    n_x, n_y = V.shape
    if x_s is None:
        x_s = np.inf

    in_s = x[:, None] >= x_s - 1e-9 * a
    if s_left:
        in_s = in_s | (x[:, None] <= -x_s + 1e-9 * a)
    in_s = np.broadcast_to(in_s, (n_x, n_y))

    onsite = 4.0 * t + V - E_F
    if geometry.Z > 0 and np.isfinite(x_s):
        Ub = barrier_height(geometry.Z, E_F, t)
        edge = np.flatnonzero(in_s[:, 0])
        rows = set()
        if edge.size:
            right = edge[edge > n_x // 2]
            if right.size and right[0] > 0:
                rows.add(right[0] - 1)
            left = edge[edge < n_x // 2]
            if left.size and left[-1] + 1 < n_x:
                rows.add(left[-1] + 1)
        for i in rows:
            onsite[i] += Ub
    if disorder > 0:
        rng = np.random.default_rng(seed)
        onsite = onsite + disorder * (rng.random((n_x, n_y)) - 0.5)

    pairing = np.where(in_s, delta_0, 0.0).astype(complex)

    # Landau gauge A = -B y x_hat, switched off inside the superconductor
    phase_x = PEIERLS_COEFF * (-B * y * a)  # per x-link at height y
    if field_in_superconductor:
        field_link = np.ones(n_x - 1, dtype=bool)
    else:
        field_link = ~(in_s[:-1, 0] & in_s[1:, 0]) if n_x > 1 else np.zeros(0, bool)
    ph_x = np.where(field_link[:, None], phase_x[None, :], 0.0)
    ph_y = np.zeros((n_x, max(n_y - 1, 0)))
    lead_phase_L = phase_x.copy()
    s_right = bool(in_s[-1, 0])
    lead_phase_R = np.zeros(n_y) if (s_right and not field_in_superconductor) else phase_x.copy()
    # lead-region couplings carry the lead gauge
    cL_phase = lead_phase_L.copy()
    cR_phase = lead_phase_R.copy()

    if gauge == "landau_y":
        chi = PEIERLS_COEFF * B * x[:, None] * y[None, :]
        ph_x = ph_x + (chi[1:] - chi[:-1])
        ph_y = ph_y + (chi[:, 1:] - chi[:, :-1])
        cL_phase = cL_phase + chi[0]
        cR_phase = cR_phase - chi[-1]
        pairing = pairing * np.exp(2j * chi)

    hop_x = -t * np.exp(1j * ph_x)
    hop_y = -t * np.exp(1j * ph_y)

    lead_left = LeadSpec(onsite=4.0 * t + V[0] - E_F, hop_x=-t * np.exp(1j * lead_phase_L),
                         hop_y=-t * np.ones(n_y - 1, dtype=complex),
                         pairing=np.zeros(n_y, dtype=complex))
    right_pair = np.full(n_y, delta_0 if s_right else 0.0, dtype=complex)
    lead_right = LeadSpec(onsite=4.0 * t + V[-1] - E_F, hop_x=-t * np.exp(1j * lead_phase_R),
                          hop_y=-t * np.ones(n_y - 1, dtype=complex), pairing=right_pair)
    return BdGLattice(
        x=x, y=y, a=a, t=t, E_F=E_F, B=B, onsite=onsite, hop_x=hop_x, hop_y=hop_y,
        pairing=pairing, lead_left=lead_left, lead_right=lead_right,
        couple_left=-t * np.exp(1j * cL_phase), couple_right=-t * np.exp(1j * cR_phase),
        gauge=gauge, meta={"x_s": x_s, "s_left": s_left, "Z": geometry.Z},
    )


class BdGDevice:
    """Lattice model of one configured device, reusable across (V_g, B, E).

    ``mode`` selects the layout: ``"one"`` (normal lead | constriction |
    superconductor) or ``"coherent"`` (normal lead | finite S slab |
    constriction | superconductor).  Instances are read-only after
    construction and safe to share between threads.
    """

    def __init__(self, config, mode="one", gauge="landau"):
        if mode not in ("one", "coherent"):
            raise ConfigurationError(f"unknown BdG layout {mode!r}")
        self.config = config
        self.mode = mode
        self.gauge = gauge
        derived = derive_2deg_parameters(config.n_s, config.m_eff, 1.0)
        a = config.lattice_a
        if a > derived.lambda_F / 8.0:
            raise ConfigurationError("lattice_a violates the lambda_F/8 resolution guard")
        self.lambda_F = derived.lambda_F
        self.E_F = fermi_energy(config.n_s, config.m_eff)
        self.layout = device_layout(config.device, a, config.width, config.window_margin,
                                    config.s_length, coherent_two=(mode == "coherent"))
        self.response = GateResponse(constriction_layout(config.device), config.device.depth_d,
                                     self.layout.x, self.layout.y, config.screening)

    @property
    def n_orbitals(self):
        return 2 * len(self.layout.x) * len(self.layout.y)

    def lattice(self, V_g, B=0.0, delta=None, V_g2=None):
        """Lattice at gate voltage ``V_g`` (both gates unless ``V_g2``) and field ``B``."""
        cfg = self.config
        if delta is None:
            delta = delta_vs_field(abs(B), cfg.delta, cfg.B_c)
        pot = self.response.field(V_g, V_g if V_g2 is None else V_g2)
        return build_bdg_lattice(
            cfg.device, pot, delta, B, cfg.lattice_a, m_eff=cfg.m_eff, E_F=self.E_F,
            x_s=self.layout.x_s, s_left=self.layout.s_left,
            field_in_superconductor=cfg.field_in_superconductor, gauge=self.gauge,
            disorder=cfg.disorder, seed=cfg.seed, lambda_F=self.lambda_F)

    def conductance(self, V_g, B=0.0, E=0.0, delta=None):
        """Two-terminal conductance (G0) probed from the normal lead."""
        lat = self.lattice(V_g, B, delta)
        return ns_conductance(reflection_matrix(lat, E))
