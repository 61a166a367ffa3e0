"""Material parameters, device geometry and derived 2DEG quantities.

All downstream solvers read their physical inputs from the records defined
here.  Units follow the package convention (nm, meV, T, K, G0 = 2e^2/h);
sheet densities on the public records are SI (m^-2) with ``*_cm2`` helpers
for the customary semiconductor units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

from .constants import CM2_TO_M2, HBAR, HBAR2_2ME, M_E, MEV, NM
from .errors import DomainError, ValidationError


def _require(ok, name, constraint, value):
    if not ok:
        raise ValidationError(name, constraint, value)


@dataclass(frozen=True)
class MaterialParams:
    name: str
    m_eff: float  # units of m_e
    cb_offset: float  # meV, relative to the In0.75Ga0.25As well
    eps_r: float

    def __post_init__(self):
        _require(self.m_eff > 0, "m_eff", "m_eff > 0", self.m_eff)
        _require(self.eps_r >= 1, "eps_r", "eps_r >= 1", self.eps_r)


@dataclass(frozen=True)
class Layer:
    """One epitaxial layer.

    ``doping`` is an ionised donor volume density in cm^-3.  A graded layer
    sets ``grade_to``; its properties then interpolate linearly from
    ``material`` at the top face to ``grade_to`` at the bottom face.
    """

    material: MaterialParams
    thickness: float  # nm
    doping: float = 0.0  # cm^-3
    grade_to: Optional[MaterialParams] = None

    def __post_init__(self):
        _require(self.thickness > 0, "thickness", "thickness > 0", self.thickness)
        _require(self.doping >= 0, "doping", "doping >= 0", self.doping)


@dataclass(frozen=True)
class WaferStack:
    """Layer sequence listed from the surface downwards (reverse growth order).

    Position 0 is the top of the cap.  The surface conduction-band edge is
    pinned ``surface_pinning`` meV above the Fermi level.
    """

    layers: tuple
    surface_pinning: float = 200.0  # meV

    def __post_init__(self):
        _require(len(self.layers) > 0, "layers", "at least one layer", len(self.layers))
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def thickness(self):
        return sum(layer.thickness for layer in self.layers)

    def layer_bounds(self):
        """Return ``[(top, bottom), ...]`` depths of each layer in nm."""
        bounds, z = [], 0.0
        for layer in self.layers:
            bounds.append((z, z + layer.thickness))
            z += layer.thickness
        return bounds

    def well_bounds(self):
        """Depth interval of the quantum well: the thickest lowest-offset layer."""
        ranked = [(l.material.cb_offset, -l.thickness, i)
                  for i, l in enumerate(self.layers) if l.grade_to is None]
        _, _, i = min(ranked)
        return self.layer_bounds()[i]

    def with_doping(self, doping):
        """Copy with every doped layer's density replaced by ``doping`` cm^-3."""
        layers = tuple(replace(l, doping=doping) if l.doping > 0 else l for l in self.layers)
        return replace(self, layers=layers)


INTERFACE_KINDS = ("one", "two")


@dataclass(frozen=True)
class DeviceGeometry:
    L_c: float  # constriction (gate) length, nm
    W_c: float  # constriction width (gate gap), nm
    L_J: float  # junction length, um
    W_J: float  # junction width, um
    depth_d: float = 120.0  # 2DEG depth below surface, nm
    interfaces: str = "two"
    Z: float = 0.0

    def __post_init__(self):
        for name in ("L_c", "W_c", "L_J", "W_J", "depth_d"):
            value = getattr(self, name)
            _require(value > 0, name, f"{name} > 0", value)
        _require(self.interfaces in INTERFACE_KINDS, "interfaces",
                 "interfaces in {one, two}", self.interfaces)
        _require(self.Z >= 0, "Z", "Z >= 0", self.Z)


@dataclass(frozen=True)
class Derived2DEG:
    n_s: float  # m^-2
    mu_e: Optional[float]  # cm^2/Vs, provenance only
    k_F: float  # m^-1
    lambda_F: float  # nm
    v_F: float  # m/s
    E_F: float  # meV
    xi_0: float  # nm

    @property
    def n_s_cm2(self):
        return self.n_s / CM2_TO_M2


def derive_2deg_parameters(n_s, m_eff, delta_0, mu_e=None):
    """Fermi-surface quantities of a spin-degenerate 2DEG.

    Parameters
    ----------
    n_s : float
        Sheet density in m^-2.
    m_eff : float
        Effective mass in units of the free-electron mass.
    delta_0 : float
        Superconducting gap in meV used for the coherence length
        ``xi_0 = hbar v_F / (2 pi delta_0)``.
    mu_e : float, optional
        Mobility in cm^2/Vs; stored, never used.
    """
    for name, value in (("n_s", n_s), ("m_eff", m_eff), ("delta_0", delta_0)):
        if not value > 0:
            raise DomainError(f"{name} must be positive, got {value!r}")
    k_F = math.sqrt(2.0 * math.pi * n_s)
    lambda_F = 2.0 * math.pi / k_F / NM
    v_F = HBAR * k_F / (m_eff * M_E)
    E_F = (HBAR * k_F) ** 2 / (2.0 * m_eff * M_E) / MEV
    xi_0 = HBAR * v_F / (2.0 * math.pi * delta_0 * MEV) / NM
    return Derived2DEG(n_s=n_s, mu_e=mu_e, k_F=k_F, lambda_F=lambda_F,
                       v_F=v_F, E_F=E_F, xi_0=xi_0)


def estimate_mode_count(width, lambda_F):
    """Number of transverse subbands, floor(2 width / lambda_F)."""
    if not (width > 0 and lambda_F > 0):
        raise DomainError("width and lambda_F must be positive")
    return max(0, math.floor(2.0 * width / lambda_F))


# --- Built-in materials and the measured wafer --------------------------------

IN_GA_AS = MaterialParams("In0.75Ga0.25As", m_eff=0.037, cb_offset=0.0, eps_r=14.6)
IN_AL_AS = MaterialParams("In0.75Al0.25As", m_eff=0.05, cb_offset=520.0, eps_r=13.9)
IN_AL_AS_BOTTOM = MaterialParams("InAlAs(graded, bottom)", m_eff=0.08, cb_offset=900.0, eps_r=12.5)
GA_AS = MaterialParams("GaAs", m_eff=0.067, cb_offset=600.0, eps_r=12.9)
AL_AS = MaterialParams("AlAs", m_eff=0.15, cb_offset=1000.0, eps_r=10.1)

MATERIALS = {m.name: m for m in (IN_GA_AS, IN_AL_AS, IN_AL_AS_BOTTOM, GA_AS, AL_AS)}

# Donor density of the 15 nm modulation-doped layer (cm^-3).  Not a measured
# value: calibrated once (scripts/calibrate_doping.py) so the self-consistent
# sheet density is 2.1e11 cm^-2 at 0.28 K with the default pinning.
CALIBRATED_DOPING = 5.46596e17


def reference_wafer(doping=CALIBRATED_DOPING, surface_pinning=200.0):
    """The In0.75Ga0.25As quantum-well wafer, surface first."""
    return WaferStack(
        layers=(
            Layer(IN_GA_AS, 2.0),
            Layer(IN_AL_AS, 45.0),
            Layer(IN_AL_AS, 15.0, doping=doping),
            Layer(IN_AL_AS, 60.0),
            Layer(IN_GA_AS, 30.0),
            Layer(IN_AL_AS, 250.0),
            Layer(IN_AL_AS, 1300.0, grade_to=IN_AL_AS_BOTTOM),
            Layer(GA_AS, 250.0),
            Layer(AL_AS, 70.0),
            Layer(GA_AS, 50.0),
        ),
        surface_pinning=surface_pinning,
    )


_TABLE1_WC = (400.0, 300.0, 200.0, 100.0, 100.0, 100.0, 100.0, 100.0)
_TABLE1_LJ = (1.4, 1.4, 1.4, 1.4, 1.4, 1.4, 1.4, 3.2)


def device_preset(index, interfaces="two", Z=0.0, depth_d=120.0):
    """Geometry of chip device ``index`` (1-8); L_c = 400 nm, W_J = 5 um for all."""
    if not (isinstance(index, int) and 1 <= index <= 8):
        raise ValidationError("device", "device index in 1..8", index)
    return DeviceGeometry(L_c=400.0, W_c=_TABLE1_WC[index - 1], L_J=_TABLE1_LJ[index - 1],
                          W_J=5.0, depth_d=depth_d, interfaces=interfaces, Z=Z)


MODELS = ("analytic", "bdg", "series")


@dataclass
class SweepConfig:
    V_start: float = 0.0
    V_stop: float = -1.0
    V_step: float = 0.005
    B_start: float = 0.0
    B_stop: float = 2.0
    B_step: float = 0.2
    model: str = "analytic"
    thermal: bool = False
    energy_points: int = 21  # used for thermal smearing of BdG traces

    def validate(self):
        _require(self.V_step > 0, "V_step", "V_step > 0", self.V_step)
        _require(self.B_step > 0, "B_step", "B_step > 0", self.B_step)
        _require(self.V_start != self.V_stop, "V_stop", "V_stop != V_start", self.V_stop)
        _require(self.B_start >= 0 and self.B_stop >= 0, "B_start", "B >= 0", self.B_start)
        _require(self.model in MODELS, "model", "model in {analytic, bdg, series}", self.model)
        _require(self.energy_points >= 3, "energy_points", "energy_points >= 3",
                 self.energy_points)


@dataclass
class AnalysisConfig:
    slope_eps: float = 10.0  # G0 per V
    min_width: float = 0.01  # V
    threshold: float = 0.05  # G0

    def validate(self):
        _require(self.slope_eps > 0, "slope_eps", "slope_eps > 0", self.slope_eps)
        _require(self.min_width >= 0, "min_width", "min_width >= 0", self.min_width)
        _require(self.threshold > 0, "threshold", "threshold > 0", self.threshold)


@dataclass
class SimulationConfig:
    """Complete physical and numerical description of one simulation."""

    device: DeviceGeometry = field(default_factory=lambda: device_preset(5))
    wafer: WaferStack = field(default_factory=reference_wafer)
    delta_0: float = 1.4  # meV, Nb gap; 0 disables superconductivity
    gap_scale: float = 1.0  # induced-gap reduction factor
    B_c: float = 1.7  # T
    temperature: float = 0.28  # K
    m_eff: float = 0.037
    n_s_cm2: float = 2.24e11
    mu_e: float = 2.5e5
    lattice_a: float = 5.0  # nm
    screening: float = 0.05  # uniform gate-lever factor (2DEG screening, see README)
    window_width: Optional[float] = None  # nm, default W_c + 200
    window_margin: float = 100.0  # nm of normal 2DEG beyond each gate edge
    s_length: float = 50.0  # nm of superconductor inside the scattering region
    field_in_superconductor: bool = False
    disorder: float = 0.0  # meV, uniform onsite disorder amplitude
    seed: int = 1234
    sweep: SweepConfig = field(default_factory=SweepConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    def __post_init__(self):
        self.validate()

    @property
    def n_s(self):
        return self.n_s_cm2 * CM2_TO_M2

    @property
    def delta(self):
        """Induced gap at zero field in meV."""
        return self.delta_0 * self.gap_scale

    @property
    def width(self):
        return self.window_width if self.window_width is not None else self.device.W_c + 200.0

    def derived(self):
        if self.delta > 0:
            return derive_2deg_parameters(self.n_s, self.m_eff, self.delta, mu_e=self.mu_e)
        # no gap: the coherence length diverges
        d = derive_2deg_parameters(self.n_s, self.m_eff, 1.0, mu_e=self.mu_e)
        return replace(d, xi_0=math.inf)

    def validate(self):
        _require(self.delta_0 >= 0, "delta_0", "delta_0 >= 0", self.delta_0)
        _require(self.gap_scale > 0, "gap_scale", "gap_scale > 0", self.gap_scale)
        _require(self.B_c > 0, "B_c", "B_c > 0", self.B_c)
        _require(self.temperature > 0, "temperature", "temperature > 0", self.temperature)
        _require(self.m_eff > 0, "m_eff", "m_eff > 0", self.m_eff)
        _require(self.n_s_cm2 > 0, "n_s", "n_s > 0", self.n_s_cm2)
        _require(self.lattice_a > 0, "lattice_a", "lattice_a > 0", self.lattice_a)
        _require(self.screening >= 0, "screening", "screening >= 0", self.screening)
        _require(self.window_margin >= 0, "window_margin", "window_margin >= 0",
                 self.window_margin)
        _require(self.s_length >= 0, "s_length", "s_length >= 0", self.s_length)
        _require(self.disorder >= 0, "disorder", "disorder >= 0", self.disorder)
        _require(self.width > self.device.W_c, "window_width", "window_width > W_c", self.width)
        lam = derive_2deg_parameters(self.n_s, self.m_eff, 1.0).lambda_F
        _require(self.lattice_a <= lam / 8.0, "lattice_a", "lattice_a <= lambda_F/8",
                 self.lattice_a)
        self.sweep.validate()
        self.analysis.validate()


def fermi_energy(n_s, m_eff):
    """E_F in meV for sheet density ``n_s`` (m^-2); shortcut used by solvers."""
    return HBAR2_2ME / m_eff * 2.0 * math.pi * n_s * NM**2
