"""Serialization of traces, field maps, plateau reports and run records.

CSV numbers are written with ``%.17g`` so every float64 survives a round
trip.  Trace metadata goes into ``#`` comment lines above the header.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import DomainError
from .sweep import FieldMap, Trace

TRACE_HEADER = ("V_g[V]", "G[2e^2/h]")
MAP_HEADER = ("B[T]", "V_g[V]", "G[2e^2/h]")
POTENTIAL_HEADER = ("x[nm]", "y[nm]", "U[meV]")


def _fmt(x):
    return format(float(x), ".17g")


def _jsonable(obj):
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _dump_json(obj, path):
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def write_trace(trace, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(f"# B[T] = {_fmt(trace.B)}\n")
        fh.write(f"# model = {trace.model}\n")
        fh.write(f"# metadata = {json.dumps(_jsonable(trace.metadata), sort_keys=True)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for v, g in zip(trace.V_g, trace.G):
            w.writerow((_fmt(v), _fmt(g)))
    return path


def _read_rows(path, header):
    comments, rows = [], []
    with Path(path).open(newline="") as fh:
        lines = [ln for ln in fh if ln.strip()]
    body = []
    for ln in lines:
        if ln.startswith("#"):
            comments.append(ln[1:].strip())
        else:
            body.append(ln)
    reader = csv.reader(body)
    first = next(reader, None)
    if first is None or tuple(c.strip() for c in first) != header:
        raise DomainError(f"{path}: expected header {','.join(header)}, got {first}")
    for row in reader:
        if len(row) != len(header):
            raise DomainError(f"{path}: malformed row {row}")
        rows.append([float(c) for c in row])
    return comments, np.array(rows, dtype=float).reshape(-1, len(header))


def read_trace(path):
    """Trace from a CSV written by :func:`write_trace` or a measured file of the same columns."""
    comments, data = _read_rows(path, TRACE_HEADER)
    info = {}
    for c in comments:
        key, sep, value = c.partition("=")
        if sep:
            info[key.strip()] = value.strip()
    meta = json.loads(info["metadata"]) if "metadata" in info else {}
    return Trace(V_g=data[:, 0], G=data[:, 1], B=float(info.get("B[T]", 0.0)),
                 model=info.get("model", "measured"), metadata=meta)


def write_map(fmap, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MAP_HEADER)
        for b, tr in zip(fmap.B, fmap.traces):
            for v, g in zip(tr.V_g, tr.G):
                w.writerow((_fmt(b), _fmt(v), _fmt(g)))
    return path


def read_map(path):
    _, data = _read_rows(path, MAP_HEADER)
    B = np.unique(data[:, 0])
    traces = []
    for b in B:
        rows = data[data[:, 0] == b]
        traces.append(Trace(V_g=rows[:, 1], G=rows[:, 2], B=float(b), model="measured"))
    return FieldMap(B=B, traces=traces)


def write_report(report, path):
    return _dump_json(report.to_dict(), path)


def write_potential(potential, path):
    """Long-format CSV of a PotentialField, x fastest within each y row."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(POTENTIAL_HEADER)
        for i, x in enumerate(potential.x):
            for j, y in enumerate(potential.y):
                w.writerow((_fmt(x), _fmt(y), _fmt(potential.energy[i, j])))
    return path


def write_band(profile, directory):
    """Band edge and density CSV plus a JSON summary; returns the written paths."""
    directory = Path(directory)
    csv_path = directory / "band.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("z[nm]", "E_c[meV]", "n[m^-3]"))
        for z, e, n in zip(profile.positions, profile.cb_edge, profile.density):
            w.writerow((_fmt(z), _fmt(e), _fmt(n)))
    summary = {
        "sheet_density_cm2": profile.sheet_density_cm2,
        "subband_energies_meV": profile.energies,
        "iterations": profile.iterations,
        "donor_sheet_cm2": profile.donor_sheet * 1e-4,
        "well_nm": list(profile.well),
    }
    json_path = _dump_json(summary, directory / "band.json")
    return [csv_path, json_path]


def sha256_file(path):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunRecord:
    command: str
    config: dict
    version: str
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: dict = field(default_factory=dict)  # file name -> sha256

    def add(self, path):
        path = Path(path)
        self.outputs[path.name] = sha256_file(path)

    def write(self, directory):
        return _dump_json({"command": self.command, "config": self.config,
                           "version": self.version, "timestamp": self.timestamp,
                           "outputs": self.outputs}, Path(directory) / "run.json")
