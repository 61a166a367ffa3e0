"""Closed-form transport models.

Saddle-point constriction transmissions (Buttiker, PRB 41, 7906, 1990),
BTK coefficients of a delta barrier at an N-S interface (Blonder, Tinkham &
Klapwijk, PRB 25, 4515, 1982), the Beenakker sub-gap conductance of a
normal scatterer in front of a superconductor, incoherent series
composition and thermal smearing.  Conductances are in units of 2e^2/h.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import expit

from .constants import HBAR, E_CHARGE, M_E, MEV, kT
from .errors import DomainError


@dataclass(frozen=True)
class TransmissionSet:
    """Per-mode transmission probabilities of a two-terminal scatterer."""

    T_n: np.ndarray

    def __post_init__(self):
        T = np.atleast_1d(np.asarray(self.T_n, dtype=float))
        if T.ndim != 1:
            raise DomainError("T_n must be one-dimensional")
        if np.any(~np.isfinite(T)) or np.any(T < 0) or np.any(T > 1):
            raise DomainError("transmissions must lie in [0, 1]")
        object.__setattr__(self, "T_n", T)

    def __len__(self):
        return len(self.T_n)

    @property
    def n_open(self):
        """Number of modes with T_n > 1/2."""
        return int(np.count_nonzero(self.T_n > 0.5))


@dataclass(frozen=True)
class BTKCoeffs:
    A: float  # Andreev reflection
    B: float  # normal reflection
    C: float  # electron-like transmission
    D: float  # hole-like transmission

    @property
    def conductance(self):
        """Normalised conductance per mode, 1 + A - B, in G0.

        Evaluated as 2A + C + D, equal by unitarity and free of the
        cancellation that 1 - B suffers for opaque barriers.
        """
        return 2.0 * self.A + self.C + self.D


def saddle_transmissions(E_F, V0, hbar_omega_x, hbar_omega_y, n_modes):
    """Transmissions of the lowest ``n_modes`` subbands of a saddle constriction.

    T_n = 1 / (1 + exp(-2 pi (E_F - V0 - hbar_omega_y (n + 1/2)) / hbar_omega_x))
    """
    if not (hbar_omega_x > 0 and hbar_omega_y > 0):
        raise DomainError("saddle frequencies must be positive")
    n = np.arange(int(n_modes))
    eps = (E_F - V0 - hbar_omega_y * (n + 0.5)) / hbar_omega_x
    return TransmissionSet(expit(2.0 * np.pi * eps))


def magnetic_saddle_energies(hbar_omega_x, hbar_omega_y, hbar_omega_c):
    """Effective (E_1, E_2) of a saddle in a perpendicular field.

    E_1 replaces hbar omega_x in the tunnelling exponent and E_2 the subband
    spacing; both reduce to the zero-field values at omega_c = 0.
    """
    wx2, wy2 = hbar_omega_x ** 2, hbar_omega_y ** 2
    om2 = hbar_omega_c ** 2 + wy2 - wx2
    root = np.sqrt(om2 * om2 + 4.0 * wx2 * wy2)
    E1 = np.sqrt(np.maximum(root - om2, 0.0) / 2.0)
    E2 = np.sqrt((root + om2) / 2.0)
    return E1, E2


def cyclotron_energy(B, m_eff):
    """hbar e B / m* in meV."""
    return HBAR * E_CHARGE * abs(B) / (m_eff * M_E) / MEV


def normal_conductance(T):
    """Landauer conductance sum(T_n) in G0."""
    return float(np.sum(T.T_n))


def btk_coefficients(E, Delta, Z):
    """BTK probabilities at quasiparticle energy ``E`` (meV) for gap ``Delta``.

    At E = Delta the sub-gap branch is used; it is the continuous left limit
    and gives A = 1 for every Z.
    """
    if not Delta > 0:
        raise DomainError(f"Delta must be positive, got {Delta!r}")
    if Z < 0 or E < 0:
        raise DomainError("BTK needs E >= 0 and Z >= 0")
    Z2 = Z * Z
    if E <= Delta:
        with np.errstate(over="ignore"):
            # an opaque barrier overflows to inf, giving A = 0 as it should
            A = float(Delta ** 2 / (E ** 2 + (Delta ** 2 - E ** 2) * (1.0 + 2.0 * Z2) ** 2))
        return BTKCoeffs(A, 1.0 - A, 0.0, 0.0)
    u2 = 0.5 * (1.0 + np.sqrt(E ** 2 - Delta ** 2) / E)
    v2 = 1.0 - u2
    d = u2 - v2
    with np.errstate(over="ignore", invalid="ignore"):
        g2 = (u2 + Z2 * d) ** 2
        A = u2 * v2 / g2
        B = d * d * Z2 * (1.0 + Z2) / g2
        C = u2 * d * (1.0 + Z2) / g2
        D = v2 * d * Z2 / g2
    if not np.isfinite(B):
        A, B, C, D = 0.0, 1.0, 0.0, 0.0
    return BTKCoeffs(float(A), float(B), float(C), float(D))


def beenakker_ns_conductance(T):
    """Sub-gap NS conductance sum 2 T_n^2 / (2 - T_n)^2 in G0."""
    t = T.T_n
    return float(np.sum(2.0 * t * t / (2.0 - t) ** 2))


def series_nsn(G_left, G_right):
    """Incoherent series combination of two conductances (G0 units)."""
    if G_left < 0 or G_right < 0:
        raise DomainError("conductances must be non-negative")
    if G_left == 0 or G_right == 0:
        return 0.0
    if np.isinf(G_right):
        return float(G_left)
    if np.isinf(G_left):
        return float(G_right)
    # exactly G/2 for equal halves
    return G_left / (1.0 + G_left / G_right)


def effective_barrier(T_qpc, Z):
    """Barrier strength equivalent to a constriction in series with a delta barrier.

    The two normal scatterers are combined incoherently,
    1/T_eff - 1 = (1/T_qpc - 1) + Z^2, and the result is returned as the
    BTK strength Z_eff with T_eff = 1 / (1 + Z_eff^2).  Closed modes give inf.
    """
    T_qpc = np.asarray(T_qpc, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        z2 = np.where(T_qpc > 0, 1.0 / T_qpc - 1.0, np.inf) + Z * Z
    return np.sqrt(z2)


def ns_mode_conductance(T_qpc, Z, E, Delta):
    """Per-mode NS conductance 1 + A - B for each constriction mode.

    At E = 0 this reproduces the Beenakker formula for the combined
    transmission; at Delta = 0 it reduces to the normal transmission.
    """
    z = effective_barrier(T_qpc, Z)
    T_eff = np.where(np.isinf(z), 0.0, 1.0 / (1.0 + np.where(np.isinf(z), 0.0, z) ** 2))
    if Delta <= 0:
        return T_eff
    out = np.empty_like(T_eff)
    for i, zi in enumerate(z):
        if np.isinf(zi):
            out[i] = 0.0
        else:
            out[i] = btk_coefficients(abs(E), Delta, zi).conductance
    return out


def thermal_kernel(energies, T):
    """-df/dE at temperature ``T`` kelvin sampled on ``energies`` (meV)."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    x = np.asarray(energies, dtype=float) / (2.0 * kT(T))
    return 1.0 / (4.0 * kT(T) * np.cosh(x) ** 2)


def thermal_broaden(energies, G, T):
    """Fermi-window average of G(E), with E measured from the Fermi level.

    Trapezoidal quadrature; the kernel is renormalised to unit weight on the
    sample window, which must cover at least +-10 kT.
    """
    E = np.asarray(energies, dtype=float)
    G = np.asarray(G, dtype=float)
    if E.shape != G.shape or E.ndim != 1 or E.size < 3:
        raise DomainError("energies and G must be matching 1D samples")
    if np.any(np.diff(E) <= 0):
        raise DomainError("energies must be strictly increasing")
    width = 10.0 * kT(T) * (1.0 - 1e-12)
    if E[0] > -width or E[-1] < width:
        raise DomainError(f"sample window [{E[0]}, {E[-1]}] meV narrower than +-10 kT")
    w = thermal_kernel(E, T)
    return float(trapezoid(w * G, E) / trapezoid(w, E))


def thermal_energy_grid(T, n_points=21, span=10.0):
    """Symmetric energy grid covering +-``span`` kT."""
    if n_points < 3:
        raise DomainError("need at least three energy points")
    return np.linspace(-span * kT(T), span * kT(T), n_points)
