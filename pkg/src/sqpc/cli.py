"""Command-line interface: ``sqpc {params,band,trace,map,analyze}``.

Every run writes its outputs and a ``run.json`` record (config snapshot,
version, timestamp, sha256 of each output) to the output directory.  On
failure a single JSON error line goes to stderr and the exit status is 1;
usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import config_from_dict, config_snapshot, load_toml
from .errors import SQPCError
from .output import (RunRecord, read_trace, write_band, write_map, write_potential,
                     write_report, write_trace, _jsonable)


def _common(parser):
    parser.add_argument("--config", type=Path, help="TOML configuration file")
    parser.add_argument("--device", type=int, help="chip device index 1-8")
    parser.add_argument("--delta0", type=float, help="superconducting gap in meV")
    parser.add_argument("--bc", type=float, help="critical field in T")
    parser.add_argument("--model", choices=("analytic", "bdg", "series"))
    parser.add_argument("--interfaces", choices=("one", "two"))
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--plot", action="store_true", help="also write a static plot")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="echo every default applied")


def build_parser():
    parser = argparse.ArgumentParser(prog="sqpc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sqpc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    p = sub.add_parser("params", help="print derived 2DEG parameters")
    _common(p)
    p = sub.add_parser("band", help="self-consistent band profile of the wafer")
    _common(p)
    p = sub.add_parser("trace", help="conductance versus gate voltage")
    _common(p)
    p.add_argument("--B", type=float, default=0.0, help="perpendicular field in T")
    p.add_argument("--dump-potential", type=float, metavar="V_G",
                   help="also write the gate potential at this voltage")
    p = sub.add_parser("map", help="conductance over field and gate voltage")
    _common(p)
    p = sub.add_parser("analyze", help="plateau metrics of a trace CSV")
    _common(p)
    p.add_argument("csv", type=Path, help="trace CSV with columns V_g[V],G[2e^2/h]")
    return parser


def _load(args):
    raw = load_toml(args.config.read_text(), str(args.config)) if args.config else {}
    if "device" in raw and not isinstance(raw["device"], dict):
        raw["device"] = {"preset": raw["device"]}
    overrides = [("device", "preset", args.device), ("device", "interfaces", args.interfaces),
                 ("physics", "delta_0", args.delta0), ("physics", "B_c", args.bc),
                 ("sweep", "model", args.model),
                 ("output", "directory", None if args.out is None else str(args.out))]
    for section, key, value in overrides:
        if value is not None:
            raw.setdefault(section, {})[key] = value
    if args.plot:
        raw.setdefault("output", {})["plot"] = True
    loaded = config_from_dict(raw)
    if args.verbose:
        for line in loaded.defaults:
            print(f"sqpc: default {line}", file=sys.stderr)
    elif args.config and loaded.defaults:
        print(f"sqpc: {len(loaded.defaults)} defaults applied (-v to list)", file=sys.stderr)
    return loaded


def _plot_trace(traces, path, fmt):
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise SQPCError("plotting needs matplotlib (pip install artifact[plot])") from exc
    fig, ax = plt.subplots(figsize=(5, 4))
    for tr in traces:
        ax.plot(tr.V_g, tr.G, lw=1, label=f"B = {tr.B:g} T")
    ax.set_xlabel("V_g (V)")
    ax.set_ylabel("G (2e$^2$/h)")
    if len(traces) > 1:
        ax.legend(fontsize=6)
    fig.tight_layout()
    out = path.with_suffix("." + fmt)
    fig.savefig(out, metadata={"Software": None} if fmt == "png" else None)
    plt.close(fig)
    return out


def cmd_params(loaded, args, outdir):
    from .constants import hopping_energy
    from .core import estimate_mode_count
    cfg = loaded.simulation
    d = cfg.derived()
    info = {
        "n_s_cm2": d.n_s_cm2, "k_F_per_nm": d.k_F * 1e-9, "lambda_F_nm": d.lambda_F,
        "v_F_m_per_s": d.v_F, "E_F_meV": d.E_F, "xi_0_nm": d.xi_0, "delta_meV": cfg.delta,
        "modes_W_c": estimate_mode_count(cfg.device.W_c, d.lambda_F),
        "modes_W_J": estimate_mode_count(1e3 * cfg.device.W_J, d.lambda_F),
        "hopping_meV": hopping_energy(cfg.m_eff, cfg.lattice_a),
    }
    print(json.dumps(_jsonable(info), sort_keys=True))
    path = outdir / "params.json"
    path.write_text(json.dumps(_jsonable(info), indent=2, sort_keys=True) + "\n")
    return [path]


def cmd_band(loaded, args, outdir):
    from .bands import self_consistent_band
    cfg = loaded.simulation
    profile = self_consistent_band(cfg.wafer, T=cfg.temperature)
    print(json.dumps({"sheet_density_cm2": profile.sheet_density_cm2,
                      "iterations": profile.iterations}))
    return write_band(profile, outdir)


def cmd_trace(loaded, args, outdir):
    from .sweep import analyze_trace, gate_sweep
    cfg = loaded.simulation
    trace = gate_sweep(cfg, B=args.B)
    paths = [write_trace(trace, outdir / "trace.csv")]
    a = cfg.analysis
    report = analyze_trace(trace, a.slope_eps, a.min_width, a.threshold)
    paths.append(write_report(report, outdir / "report.json"))
    if args.dump_potential is not None:
        from .bdg import device_layout
        from .gates import constriction_profile
        lay = device_layout(cfg.device, cfg.lattice_a, cfg.width, cfg.window_margin,
                            cfg.s_length)
        field = constriction_profile(cfg.device, args.dump_potential, lay.x, lay.y,
                                     cfg.screening)
        paths.append(write_potential(field, outdir / "potential.csv"))
    if loaded.output.plot:
        paths.append(_plot_trace([trace], outdir / "trace", loaded.output.plot_format))
    return paths


def cmd_map(loaded, args, outdir):
    from .sweep import field_gate_map
    fmap = field_gate_map(loaded.simulation)
    paths = [write_map(fmap, outdir / "map.csv")]
    if loaded.output.plot:
        paths.append(_plot_trace(fmap.traces, outdir / "map", loaded.output.plot_format))
    return paths


def cmd_analyze(loaded, args, outdir):
    from .sweep import analyze_trace
    a = loaded.simulation.analysis
    report = analyze_trace(read_trace(args.csv), a.slope_eps, a.min_width, a.threshold)
    print(json.dumps(_jsonable(report.to_dict()), sort_keys=True))
    return [write_report(report, outdir / "report.json")]


COMMANDS = {"params": cmd_params, "band": cmd_band, "trace": cmd_trace, "map": cmd_map,
            "analyze": cmd_analyze}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        loaded = _load(args)
        outdir = Path(loaded.output.directory)
        outdir.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](loaded, args, outdir)
        record = RunRecord(command=args.command, config=config_snapshot(loaded.simulation),
                           version=__version__)
        for p in paths:
            record.add(p)
        record.write(outdir)
    except (SQPCError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "field"):
            err["field"] = exc.field
            err["constraint"] = exc.constraint
        print(json.dumps(_jsonable(err)), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
