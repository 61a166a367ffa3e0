"""Gate and field sweeps, and plateau metrics of conductance traces.

A sweep evaluates one conductance model point by point.  Points are
independent; they can run on a thread pool (``SQPC_THREADS``) and are always
reduced in row-major (B, V_g) order, so results do not depend on
scheduling.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import analytic
from .bdg import BdGDevice, delta_vs_field
from .core import MODELS, derive_2deg_parameters, estimate_mode_count, fermi_energy
from .errors import ConfigurationError, DomainError, NotFoundError, SQPCError, SweepError
from .gates import fit_saddle

THREADS_ENV = "SQPC_THREADS"


# --- records ------------------------------------------------------------------

@dataclass
class Trace:
    """Conductance (G0) versus gate voltage (V) at fixed field."""

    V_g: np.ndarray
    G: np.ndarray
    B: float = 0.0
    model: str = "analytic"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.V_g = np.asarray(self.V_g, dtype=float)
        self.G = np.asarray(self.G, dtype=float)
        if self.V_g.ndim != 1 or self.V_g.shape != self.G.shape or len(self.V_g) < 2:
            raise DomainError("trace needs equal-length 1D arrays with at least two points")
        dv = np.diff(self.V_g)
        if not (np.all(dv > 0) or np.all(dv < 0)):
            raise DomainError("V_g must be strictly monotone")

    def __len__(self):
        return len(self.V_g)

    def sorted(self):
        """Copy ordered by increasing V_g."""
        if self.V_g[0] < self.V_g[-1]:
            return self
        return replace(self, V_g=self.V_g[::-1].copy(), G=self.G[::-1].copy())


@dataclass
class FieldMap:
    B: np.ndarray
    traces: list

    def __post_init__(self):
        self.B = np.asarray(self.B, dtype=float)
        if len(self.B) != len(self.traces) or not self.traces:
            raise DomainError("one trace per field value is required")
        ref = self.traces[0].V_g
        for tr in self.traces[1:]:
            if tr.V_g.shape != ref.shape or not np.array_equal(tr.V_g, ref):
                raise DomainError("field map traces must share the V_g grid")

    @property
    def V_g(self):
        return self.traces[0].V_g

    @property
    def G(self):
        """(n_B, n_V) conductance array."""
        return np.array([tr.G for tr in self.traces])


@dataclass(frozen=True)
class Plateau:
    V_min: float
    V_max: float
    height: float

    @property
    def width(self):
        return self.V_max - self.V_min


@dataclass
class PlateauReport:
    plateaus: list
    V_p1: Optional[float] = None
    V_p2: Optional[float] = None
    H1: Optional[float] = None
    H2: Optional[float] = None
    G_off: Optional[float] = None

    def to_dict(self):
        return {
            "plateaus": [{"V_min": p.V_min, "V_max": p.V_max, "height": p.height}
                         for p in self.plateaus],
            "V_p1": self.V_p1, "V_p2": self.V_p2, "H1": self.H1, "H2": self.H2,
            "G_off": self.G_off,
        }


# --- conductance models -------------------------------------------------------

class AnalyticModel:
    """Saddle-point constriction with BTK/Beenakker interfaces.

    The saddle height and curvatures come from the gate-potential fit of the
    configured device.  The perpendicular field shifts the saddle energies
    (magnetic depopulation) and suppresses the gap through ``delta_vs_field``.
    Two-interface devices are two identical halves in incoherent series.
    """

    def __init__(self, config):
        self.config = config
        self.saddle = fit_saddle(config.device, config.screening)
        self.E_F = fermi_energy(config.n_s, config.m_eff)
        lam = derive_2deg_parameters(config.n_s, config.m_eff, 1.0).lambda_F
        self.n_max = max(1, estimate_mode_count(1e3 * config.device.W_J, lam))

    def transmissions(self, V_g, B=0.0, E=0.0):
        cfg = self.config
        wx, wy = self.saddle.frequencies(V_g, cfg.m_eff)
        if not (wx > 0 and wy > 0):
            # no confining saddle: the whole junction width is open
            return np.ones(self.n_max)
        wc = analytic.cyclotron_energy(B, cfg.m_eff)
        E1, E2 = analytic.magnetic_saddle_energies(float(wx), float(wy), wc)
        return analytic.saddle_transmissions(self.E_F + E, float(self.saddle.barrier(V_g)),
                                             E1, E2, self.n_max).T_n

    def half_conductance(self, V_g, B=0.0, E=0.0, delta=None):
        cfg = self.config
        T = self.transmissions(V_g, B, E)
        if delta is None:
            delta = delta_vs_field(abs(B), cfg.delta, cfg.B_c)
        return float(np.sum(analytic.ns_mode_conductance(T, cfg.device.Z, E, delta)))

    def conductance(self, V_g, B=0.0, E=0.0):
        cfg = self.config
        delta = delta_vs_field(abs(B), cfg.delta, cfg.B_c)
        if cfg.device.interfaces == "one":
            return self.half_conductance(V_g, B, E, delta)
        if delta == 0:
            # normal contacts: one constriction between two barriers
            T = self.transmissions(V_g, B, E)
            Z2 = np.sqrt(2.0) * cfg.device.Z
            return float(np.sum(analytic.ns_mode_conductance(T, Z2, E, 0.0)))
        g = self.half_conductance(V_g, B, E, delta)
        return analytic.series_nsn(g, g)


class LatticeModel:
    """BdG lattice conductance.

    One-interface devices are solved directly.  A two-interface device is
    either solved in one piece (``coherent``: normal lead, finite
    superconducting slab, constriction, superconducting lead) or taken as
    the incoherent series of its two halves.  The left half is the mirror
    image of the right one, which maps B to -B for the symmetric layout.
    Without a gap the two-interface layout is the normal constriction
    between two barriers and is always solved in one piece.
    """

    def __init__(self, config, coherent=False):
        self.config = config
        self.two = config.device.interfaces == "two"
        self.coherent = coherent and self.two
        self.one_device = None if self.coherent else BdGDevice(config, mode="one")
        self.two_device = BdGDevice(config, mode="coherent") if self.two else None

    def conductance(self, V_g, B=0.0, E=0.0):
        cfg = self.config
        delta = delta_vs_field(abs(B), cfg.delta, cfg.B_c)
        if not self.two:
            return self.one_device.conductance(V_g, B, E, delta)
        if self.coherent or delta == 0:
            return self.two_device.conductance(V_g, B, E, delta)
        g = self.one_device.conductance(V_g, B, E, delta)
        g_left = self.one_device.conductance(V_g, -B, E, delta) if B != 0 else g
        return analytic.series_nsn(max(g, 0.0), max(g_left, 0.0))


def is_short_junction(config):
    """True when a gap is present and the junction is shorter than xi_0."""
    return config.delta > 0 and 1e3 * config.device.L_J < config.derived().xi_0


def make_model(config, model=None):
    """Conductance engine for ``model`` (default: the config sweep model).

    ``bdg`` solves two-interface devices coherently only for junctions
    shorter than xi_0; long junctions use the series composition, which is
    what ``series`` always does.
    """
    model = model or config.sweep.model
    if model not in MODELS:
        raise ConfigurationError(f"unknown model {model!r}; choose from {MODELS}")
    if model == "analytic":
        return AnalyticModel(config)
    if model == "bdg":
        return LatticeModel(config, coherent=is_short_junction(config))
    return LatticeModel(config, coherent=False)


def point_conductance(engine, V_g, B, thermal=False, energy_points=21):
    """Conductance at one (V_g, B), optionally smeared over the Fermi window."""
    if not thermal:
        return engine.conductance(V_g, B, 0.0)
    T = engine.config.temperature
    E = analytic.thermal_energy_grid(T, energy_points)
    G = [engine.conductance(V_g, B, e) for e in E]
    return analytic.thermal_broaden(E, G, T)


# --- orchestration ------------------------------------------------------------

def thread_count():
    """Worker count from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


def _map_ordered(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def voltage_grid(V_start, V_stop, V_step):
    """Inclusive grid from ``V_start`` towards ``V_stop`` in steps of ``V_step``."""
    if not V_step > 0:
        raise DomainError("V_step must be positive")
    span = V_stop - V_start
    n = int(math.floor(abs(span) / V_step + 1e-9)) + 1
    if n < 2:
        raise DomainError("sweep range shorter than one step")
    # rounding strips accumulated float noise so grid values print cleanly
    return np.round(V_start + math.copysign(V_step, span) * np.arange(n), 12)


def field_grid(B_start, B_stop, B_step):
    if B_start == B_stop:
        return np.array([float(B_start)])
    return voltage_grid(B_start, B_stop, B_step)


def _metadata(config, model, engine):
    return {"device_W_c": config.device.W_c, "interfaces": config.device.interfaces,
            "delta_0": config.delta_0, "Z": config.device.Z, "T": config.temperature,
            "model": model, "thermal": config.sweep.thermal}


def _evaluate(engine, config, points, workers):
    thermal = config.sweep.thermal
    n_e = config.sweep.energy_points

    def run(p):
        V, B = p
        try:
            return point_conductance(engine, V, B, thermal, n_e)
        except SQPCError as exc:
            raise SweepError(float(V), float(B), exc) from exc

    return np.array(_map_ordered(run, points, workers), dtype=float)


def gate_sweep(config, model=None, B=0.0, V_start=None, V_stop=None, V_step=None,
               workers=None, engine=None):
    """Conductance trace over the configured (or given) gate-voltage range."""
    sw = config.sweep
    model = model or sw.model
    V = voltage_grid(sw.V_start if V_start is None else V_start,
                     sw.V_stop if V_stop is None else V_stop,
                     sw.V_step if V_step is None else V_step)
    engine = engine or make_model(config, model)
    workers = thread_count() if workers is None else workers
    G = _evaluate(engine, config, [(v, B) for v in V], workers)
    return Trace(V_g=V, G=G, B=float(B), model=model, metadata=_metadata(config, model, engine))


def field_gate_map(config, model=None, B_values=None, V_values=None, workers=None):
    """One trace per field value; points run row-major over (B, V_g)."""
    sw = config.sweep
    model = model or sw.model
    B = np.asarray(field_grid(sw.B_start, sw.B_stop, sw.B_step) if B_values is None
                   else B_values, dtype=float)
    V = np.asarray(voltage_grid(sw.V_start, sw.V_stop, sw.V_step) if V_values is None
                   else V_values, dtype=float)
    engine = make_model(config, model)
    workers = thread_count() if workers is None else workers
    points = [(v, b) for b in B for v in V]
    G = _evaluate(engine, config, points, workers).reshape(len(B), len(V))
    meta = _metadata(config, model, engine)
    return FieldMap(B=B, traces=[Trace(V_g=V.copy(), G=G[i], B=float(b), model=model,
                                       metadata=dict(meta)) for i, b in enumerate(B)])


# --- plateau analysis ---------------------------------------------------------

def detect_plateaus(trace, slope_eps=10.0, min_width=0.01):
    """Maximal V_g intervals with |dG/dV_g| < ``slope_eps`` and width >= ``min_width``.

    Slopes are central differences (one-sided at the ends); heights are the
    mean conductance over each interval.  Plateaus are returned in order of
    increasing V_g.
    """
    tr = trace.sorted()
    V, G = tr.V_g, tr.G
    flat = np.abs(np.gradient(G, V)) < slope_eps
    out = []
    i, n = 0, len(V)
    while i < n:
        if not flat[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and flat[j + 1]:
            j += 1
        if V[j] - V[i] >= min_width * (1.0 - 1e-9):
            out.append(Plateau(float(V[i]), float(V[j]), float(np.mean(G[i:j + 1]))))
        i = j + 1
    return out


def pinch_off(trace, threshold):
    """Gate voltage where G first drops below ``threshold`` coming from the open side.

    The open side is the less negative end of the sweep.  The crossing is
    linearly interpolated between the bracketing samples.
    """
    tr = trace.sorted()
    V, G = tr.V_g[::-1], tr.G[::-1]
    for k in range(len(V) - 1):
        g0, g1 = G[k], G[k + 1]
        if g0 >= threshold > g1:
            return float(V[k] + (threshold - g0) * (V[k + 1] - V[k]) / (g1 - g0))
    raise NotFoundError(f"conductance never crosses {threshold!r} G0 in the swept range")


def off_conductance(trace, window):
    """Mean conductance over the V_g interval ``window``."""
    lo, hi = sorted(window)
    sel = (trace.V_g >= lo) & (trace.V_g <= hi)
    if not np.any(sel):
        raise DomainError(f"no samples in window [{lo}, {hi}] V")
    return float(np.mean(trace.G[sel]))


def analyze_trace(trace, slope_eps=10.0, min_width=0.01, threshold=0.05):
    """Plateau list plus the pinch-off metrics V_p1, V_p2, H1, H2 and G_off."""
    plateaus = detect_plateaus(trace, slope_eps, min_width)
    off = [p for p in plateaus if p.height < threshold]
    steps = [p for p in plateaus if p.height >= threshold]
    report = PlateauReport(plateaus=plateaus)
    base = off[0].height if off else 0.0
    heights = [p.height for p in steps[:2]]
    if heights:
        report.H1 = heights[0]
    if len(heights) > 1:
        report.H2 = heights[1]
    lows = [base] + heights
    for k, name in enumerate(("V_p1", "V_p2")[:len(heights)]):
        level = 0.5 * (lows[k] + lows[k + 1])
        try:
            setattr(report, name, pinch_off(trace, level))
        except NotFoundError:
            pass
    if off:
        report.G_off = off_conductance(trace, (off[0].V_min, off[0].V_max))
    elif report.V_p1 is not None:
        tr = trace.sorted()
        below = tr.V_g < report.V_p1
        if np.count_nonzero(below) >= 1:
            report.G_off = off_conductance(tr, (tr.V_g[0], tr.V_g[below][-1]))
    return report

