"""Electrostatics of surface split gates seen by a buried 2DEG.

The surface is an equipotential plane held at the gate voltage under the
metal and at zero elsewhere.  A point at depth ``d`` then sees each gate
rectangle with a weight given by four corner kernels

    g(u, v) = arctan(u v / (d R)) / (2 pi),   R = sqrt(u^2 + v^2 + d^2)

(Davies, Larkin & Sukhorukov, J. Appl. Phys. 77, 4504, 1995).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HBAR2_2ME
from .errors import ConfigurationError, DomainError

_BIG = 1e12  # infinite gate edges are clipped to this many depths


def rect_gate_kernel(u, v, d):
    """Corner kernel of a semi-infinite quadrant gate, in [-1/4, 1/4]."""
    if not d > 0:
        raise DomainError(f"depth must be positive, got {d!r}")
    u = np.clip(np.asarray(u, dtype=float), -_BIG * d, _BIG * d)
    v = np.clip(np.asarray(v, dtype=float), -_BIG * d, _BIG * d)
    R = np.sqrt(u * u + v * v + d * d)
    return np.arctan(u * v / (d * R)) / (2.0 * np.pi)


@dataclass(frozen=True)
class GateRect:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    voltage_source: int = 1

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigurationError(f"degenerate gate rectangle {self}")
        if self.voltage_source not in (1, 2):
            raise ConfigurationError("voltage_source must be 1 or 2")

    def fraction(self, x, y, d):
        """Fraction of the gate voltage felt at (x, y) at depth ``d``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g = rect_gate_kernel
        return (g(self.x_max - x, self.y_max - y, d) - g(self.x_min - x, self.y_max - y, d)
                - g(self.x_max - x, self.y_min - y, d) + g(self.x_min - x, self.y_min - y, d))

    def overlaps(self, other):
        return (self.x_min < other.x_max and other.x_min < self.x_max
                and self.y_min < other.y_max and other.y_min < self.y_max)


@dataclass
class PotentialField:
    """Electron potential energy (meV) on a rectangular grid at the 2DEG depth.

    ``energy[i, j]`` is the value at ``(x[i], y[j])``.
    """

    x: np.ndarray
    y: np.ndarray
    energy: np.ndarray

    def __add__(self, other):
        if not (np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)):
            raise DomainError("potential fields live on different grids")
        return PotentialField(self.x, self.y, self.energy + other.energy)


def _check_layout(layout):
    if not layout:
        raise ConfigurationError("gate layout is empty")
    for i, a in enumerate(layout):
        for b in layout[i + 1:]:
            if a.voltage_source != b.voltage_source and a.overlaps(b):
                raise ConfigurationError(f"gates {a} and {b} overlap with different sources")


class GateResponse:
    """Per-source lever-arm maps of a layout, reusable across voltages."""

    def __init__(self, layout, depth, x, y, screening=1.0):
        _check_layout(layout)
        if not depth > 0:
            raise DomainError("depth must be positive")
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        self.lever = {1: np.zeros(X.shape), 2: np.zeros(X.shape)}
        for rect in layout:
            self.lever[rect.voltage_source] += rect.fraction(X, Y, depth)
        self.screening = screening

    def field(self, V_g1, V_g2):
        # -e * phi in meV: a negative gate voltage raises the electron energy
        energy = -1e3 * self.screening * (V_g1 * self.lever[1] + V_g2 * self.lever[2])
        return PotentialField(self.x, self.y, energy)


def split_gate_potential(layout, V_g1, V_g2, depth, x, y, screening=1.0):
    """Potential energy landscape (meV) of ``layout`` biased at (V_g1, V_g2) volts."""
    return GateResponse(layout, depth, x, y, screening).field(V_g1, V_g2)


def constriction_layout(geometry):
    """Two gates of length L_c separated by a gap W_c, spanning the junction width."""
    half_len = 0.5 * geometry.L_c
    gap = 0.5 * geometry.W_c
    outer = 500.0 * geometry.W_J  # W_J/2 in nm
    if outer <= gap:
        raise ConfigurationError("junction width must exceed the constriction width")
    return [
        GateRect(-half_len, half_len, gap, outer, voltage_source=1),
        GateRect(-half_len, half_len, -outer, -gap, voltage_source=2),
    ]


def constriction_profile(geometry, V_g, x, y, screening=1.0):
    """Split-gate landscape for ``geometry`` with both gates at ``V_g``."""
    return split_gate_potential(constriction_layout(geometry), V_g, V_g, geometry.depth_d,
                                x, y, screening)


@dataclass(frozen=True)
class SaddleFit:
    """Quadratic expansion of the gate potential at the constriction centre, per volt.

    U(x, y) ~ V_g * (u0 - 0.5 kx x^2 + 0.5 ky y^2)  with U in meV.
    """

    u0: float  # meV/V
    kx: float  # meV nm^-2 V^-1
    ky: float  # meV nm^-2 V^-1

    def barrier(self, V_g):
        return self.u0 * V_g

    def frequencies(self, V_g, m_eff):
        """(hbar omega_x, hbar omega_y) in meV; zero where the saddle is not confining."""
        c = 2.0 * HBAR2_2ME / m_eff
        wx = np.sqrt(np.clip(c * self.kx * np.asarray(V_g, dtype=float), 0.0, None))
        wy = np.sqrt(np.clip(c * self.ky * np.asarray(V_g, dtype=float), 0.0, None))
        return wx, wy


def fit_saddle(geometry, screening=1.0, h=1.0):
    """Central value and curvatures of the split-gate potential per volt."""
    layout = constriction_layout(geometry)
    d = geometry.depth_d
    pts = np.array([-h, 0.0, h])

    def per_volt(x, y):
        resp = GateResponse(layout, d, x, y, screening)
        return resp.field(1.0, 1.0).energy

    along_x = per_volt(pts, [0.0])[:, 0]
    along_y = per_volt([0.0], pts)[0]
    u0 = along_x[1]
    uxx = (along_x[0] - 2 * u0 + along_x[2]) / h**2
    uyy = (along_y[0] - 2 * u0 + along_y[2]) / h**2
    return SaddleFit(u0=float(u0), kx=float(-uxx), ky=float(uyy))
