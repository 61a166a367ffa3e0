"""Physical constants in the package unit system.

Lengths are nm, energies meV, magnetic fields T, temperatures K and
conductances are expressed in units of G0 = 2e^2/h.
"""

import math

from scipy import constants as _sc

HBAR = _sc.hbar  # J s
E_CHARGE = _sc.e  # C
M_E = _sc.m_e  # kg
EPS0 = _sc.epsilon_0  # F/m
K_B = _sc.k / _sc.e * 1e3  # meV/K
FLUX_QUANTUM = _sc.h / _sc.e  # Wb, normal-metal flux quantum h/e

MEV = _sc.e * 1e-3  # J per meV
NM = 1e-9

# hbar^2 / (2 m_e) in meV nm^2 (~38.1)
HBAR2_2ME = HBAR**2 / (2.0 * M_E) / MEV / NM**2

# e / eps0 expressed so that d2U/dx2 [meV/nm^2] = POISSON_COEFF * n[nm^-3] / eps_r
POISSON_COEFF = E_CHARGE / EPS0 * 1e3 * NM**-3 * NM**2

# magnetic field T times nm^2, converted to Peierls phase in rad: 2*pi*B*S/Phi0
PEIERLS_COEFF = 2.0 * math.pi * NM**2 / FLUX_QUANTUM

CM2_TO_M2 = 1e4  # multiply a density in cm^-2 to obtain m^-2
CM3_TO_NM3 = 1e-21  # multiply a density in cm^-3 to obtain nm^-3


def kT(temperature):
    """Thermal energy in meV at ``temperature`` kelvin."""
    return K_B * temperature


def hopping_energy(m_eff, a):
    """Nearest-neighbour hopping t = hbar^2/(2 m* a^2) in meV for spacing ``a`` nm."""
    return HBAR2_2ME / (m_eff * a * a)
