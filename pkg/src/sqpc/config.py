"""TOML configuration files.

A config file has up to seven tables: ``wafer``, ``device``, ``physics``,
``numerics``, ``sweep``, ``analysis`` and ``output``.  Every key is optional;
omitted keys take the documented defaults, which are reported back to the
caller.  Unknown tables or keys are rejected.  A bare integer ``device = 5``
at top level selects a chip preset, as does ``[device] preset = 5``.
"""

from __future__ import annotations

import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import (CALIBRATED_DOPING, MATERIALS, AnalysisConfig, DeviceGeometry, Layer,
                   MaterialParams, SimulationConfig, SweepConfig, WaferStack, device_preset,
                   reference_wafer)
from .errors import ConfigurationError, ValidationError

log = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).with_name("data") / "default.toml"


@dataclass
class OutputConfig:
    directory: str = "sqpc_out"
    plot: bool = False
    plot_format: str = "png"


@dataclass
class LoadedConfig:
    simulation: SimulationConfig
    output: OutputConfig
    defaults: list  # "section.key = value" strings for every default applied


# key -> (type, default); "physics" and "numerics" map onto SimulationConfig fields
_PHYSICS = {
    "delta_0": (float, 1.4),
    "gap_scale": (float, 1.0),
    "B_c": (float, 1.7),
    "temperature": (float, 0.28),
    "m_eff": (float, 0.037),
    "n_s": (float, 2.24e11),
    "mu_e": (float, 2.5e5),
}
_NUMERICS = {
    "lattice_a": (float, 5.0),
    "screening": (float, 0.05),
    "window_width": (float, None),
    "window_margin": (float, 100.0),
    "s_length": (float, 50.0),
    "field_in_superconductor": (bool, False),
    "disorder": (float, 0.0),
    "seed": (int, 1234),
}
_DEVICE = {
    "preset": (int, 5),
    "L_c": (float, None),
    "W_c": (float, None),
    "L_J": (float, None),
    "W_J": (float, None),
    "depth_d": (float, 120.0),
    "interfaces": (str, "two"),
    "Z": (float, 0.0),
}
_WAFER = {
    "preset": (str, "reference"),
    "doping": (float, CALIBRATED_DOPING),
    "surface_pinning": (float, 200.0),
    "layers": (list, None),
    "materials": (dict, None),
}
_SWEEP = {f.name: (f.type, f.default) for f in fields(SweepConfig)}
_ANALYSIS = {f.name: (float, f.default) for f in fields(AnalysisConfig)}
_OUTPUT = {f.name: (f.type, f.default) for f in fields(OutputConfig)}

_SECTIONS = {"wafer": _WAFER, "device": _DEVICE, "physics": _PHYSICS, "numerics": _NUMERICS,
             "sweep": _SWEEP, "analysis": _ANALYSIS, "output": _OUTPUT}
_TYPES = {"float": float, "int": int, "bool": bool, "str": str}


def _coerce(section, key, value, kind):
    name = f"{section}.{key}"
    kind = _TYPES.get(kind, kind)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(name, "number", value)
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(name, "integer", value)
        return value
    if not isinstance(value, kind):
        raise ValidationError(name, kind.__name__, value)
    return value


def _section(raw, section, defaults):
    table = raw.get(section, {})
    if not isinstance(table, dict):
        raise ValidationError(section, "table", table)
    schema = _SECTIONS[section]
    unknown = sorted(set(table) - set(schema))
    if unknown:
        raise ConfigurationError(f"unknown key {section}.{unknown[0]}")
    out = {}
    for key, (kind, default) in schema.items():
        if key in table:
            out[key] = _coerce(section, key, table[key], kind)
        else:
            out[key] = default
            if default is not None:
                defaults.append(f"{section}.{key} = {default!r}")
    return out


def _material(name, custom):
    if name in custom:
        return custom[name]
    if name in MATERIALS:
        return MATERIALS[name]
    raise ValidationError("wafer.layers.material", "known material name", name)


def _build_wafer(w):
    if w["preset"] != "reference":
        raise ValidationError("wafer.preset", "preset in {reference}", w["preset"])
    if w["layers"] is None:
        if w["materials"]:
            raise ConfigurationError("wafer.materials given without wafer.layers")
        return reference_wafer(doping=w["doping"], surface_pinning=w["surface_pinning"])
    custom = {}
    for name, spec in (w["materials"] or {}).items():
        extra = set(spec) - {"m_eff", "cb_offset", "eps_r"}
        if extra:
            raise ConfigurationError(f"unknown key wafer.materials.{name}.{sorted(extra)[0]}")
        custom[name] = MaterialParams(name, float(spec["m_eff"]), float(spec["cb_offset"]),
                                      float(spec["eps_r"]))
    layers = []
    for spec in w["layers"]:
        extra = set(spec) - {"material", "thickness", "doping", "grade_to"}
        if extra:
            raise ConfigurationError(f"unknown key wafer.layers.{sorted(extra)[0]}")
        grade = spec.get("grade_to")
        layers.append(Layer(_material(spec["material"], custom), float(spec["thickness"]),
                            float(spec.get("doping", 0.0)),
                            _material(grade, custom) if grade else None))
    return WaferStack(tuple(layers), surface_pinning=w["surface_pinning"])


def _build_device(d):
    explicit = {k: d[k] for k in ("L_c", "W_c", "L_J", "W_J") if d[k] is not None}
    base = device_preset(d["preset"], d["interfaces"], d["Z"], d["depth_d"])
    if not explicit:
        return base
    values = {"L_c": base.L_c, "W_c": base.W_c, "L_J": base.L_J, "W_J": base.W_J}
    values.update(explicit)
    return DeviceGeometry(depth_d=d["depth_d"], interfaces=d["interfaces"], Z=d["Z"], **values)


def load_toml(text, source="<string>"):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # tomli reports "... (at line L, column C)"
        raise ConfigurationError(f"{source}: parse error: {exc}") from exc


def config_from_dict(raw, defaults=None):
    """Build a validated LoadedConfig from a parsed TOML mapping."""
    raw = dict(raw)
    defaults = [] if defaults is None else defaults
    if "device" in raw and not isinstance(raw["device"], dict):
        raw["device"] = {"preset": raw["device"]}
    unknown = sorted(set(raw) - set(_SECTIONS))
    if unknown:
        raise ConfigurationError(f"unknown section {unknown[0]}")
    sec = {name: _section(raw, name, defaults) for name in _SECTIONS}
    phys, num = sec["physics"], sec["numerics"]
    sim = SimulationConfig(
        device=_build_device(sec["device"]),
        wafer=_build_wafer(sec["wafer"]),
        delta_0=phys["delta_0"], gap_scale=phys["gap_scale"], B_c=phys["B_c"],
        temperature=phys["temperature"], m_eff=phys["m_eff"], n_s_cm2=phys["n_s"],
        mu_e=phys["mu_e"],
        sweep=SweepConfig(**sec["sweep"]),
        analysis=AnalysisConfig(**sec["analysis"]),
        **num,
    )
    return LoadedConfig(sim, OutputConfig(**sec["output"]), defaults)


def load_config(path):
    """Parse ``path`` into a LoadedConfig, recording every default applied."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    loaded = config_from_dict(load_toml(text, str(path)))
    for line in loaded.defaults:
        log.info("default %s", line)
    return loaded


def parse_config(path):
    """Validated SimulationConfig from a TOML file (defaults logged at INFO)."""
    return load_config(path).simulation


def config_snapshot(config):
    """JSON-ready dict of a SimulationConfig, used in run records."""
    return asdict(config)
