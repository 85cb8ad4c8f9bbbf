"""Command-line entry point: ``subcelldg run|converge|presets|dump-operators|dump-subdivision``.

Options may come from an INI file (``--config``); keys of its ``[run]``
section use the long flag names with underscores, and explicit flags win.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .driver import RunOptions, Simulation, convergence_study, submean_errors
from .errors import SubcellDGError
from .io import radial_spread, subcell_fields, write_profile, write_table, write_vtk
from .mesh import load_mesh
from .operators import build_operators, condition_numbers
from .presets import PRESETS, get_preset
from .subdivision import SubdivisionScheme, build_subdivision

log = logging.getLogger("subcelldg")

# option name -> (type, default); shared by flags and the INI [run] section
RUN_KEYS: dict[str, tuple[type, object]] = {
    "preset": (str, "smooth_advection"),
    "order": (int, 2),
    "scheme": (str, "structured_uniform"),
    "correction": (str, "blended"),
    "resolution": (int, None),
    "mesh": (str, None),
    "t_end": (float, None),
    "cfl": (float, 0.95),
    "max_steps": (int, None),
    "convergence_dt": (bool, False),
    "neighbours": (str, "subcell"),
    "relax": (bool, True),
    "relax_level": (str, "subcell"),
    "max_iter": (int, 10),
    "volume_flux": (str, "exact"),
    "output": (str, "output"),
    "profile": (str, None),
    "vtk_every": (int, 0),
}


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _add_run_flags(p: argparse.ArgumentParser, skip: tuple[str, ...] = ()) -> None:
    p.add_argument("--config", help="INI file with a [run] section")
    for key, (typ, _) in RUN_KEYS.items():
        if key in skip:
            continue
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, type=_parse_bool if typ is bool else typ, default=None)


def resolve_options(args: argparse.Namespace) -> dict:
    """Defaults, then the INI file, then explicit flags."""
    values = {k: d for k, (_, d) in RUN_KEYS.items()}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise SubcellDGError(f"cannot read config {args.config}")
        if cp.has_section("run"):
            for key, raw in cp.items("run"):
                key = key.replace("-", "_")
                if key not in RUN_KEYS:
                    raise SubcellDGError(f"unknown config key {key!r}")
                typ = RUN_KEYS[key][0]
                values[key] = _parse_bool(raw) if typ is bool else typ(raw)
    for key in RUN_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _run_options(v: dict) -> RunOptions:
    return RunOptions(
        order=v["order"], scheme=v["scheme"], correction=v["correction"], cfl=v["cfl"],
        t_end=v["t_end"], max_steps=v["max_steps"], convergence_dt=v["convergence_dt"],
        neighbours=v["neighbours"], relax=v["relax"], relax_level=v["relax_level"],
        max_iter=v["max_iter"], volume_flux=v["volume_flux"],
    )


def cmd_run(args: argparse.Namespace) -> int:
    v = resolve_options(args)
    preset = get_preset(v["preset"])
    mesh = load_mesh(v["mesh"]) if v["mesh"] else preset.mesh(v["resolution"] or preset.default_resolution)
    sim = Simulation(preset, mesh, _run_options(v))
    out = Path(v["output"])
    out.mkdir(parents=True, exist_ok=True)
    model = preset.model
    state0 = sim.initial_state()
    write_vtk(out / "initial.vtk", sim.space, subcell_fields(model, sim.solver.submeans(state0.moments)))

    def snapshot(step, state):
        if v["vtk_every"] and step % v["vtk_every"] == 0:
            write_vtk(out / f"step_{step:06d}.vtk", sim.space, subcell_fields(model, sim.solver.submeans(state.moments)))

    res = sim.run(state0, callback=snapshot)
    ubar = res.submeans
    fields = subcell_fields(model, ubar)
    write_vtk(out / "final.vtk", sim.space, fields)
    recent = [sim.corrector.subcell_theta(t) for t in sim.corrector.recent_theta]
    if recent:
        write_vtk(out / "detection.vtk", sim.space, {"theta": np.max(recent, axis=0)}, "blending weight, last step")
    kind = v["profile"] or preset.profile
    write_profile(out / "profile.csv", sim.space, fields, kind)
    write_table(out / "corrections.csv", [
        {"stage": i, "troubled": s.troubled, "recomputed": s.recomputed, "iterations": s.iterations,
         "forced": int(s.forced), "fraction": s.recomputed / sim.space.n_subcells}
        for i, s in enumerate(sim.corrector.log.stages)
    ])
    summary = {
        "preset": preset.name, "order": v["order"], "scheme": v["scheme"], "correction": v["correction"],
        "cells": sim.space.n_cells, "subcells": sim.space.n_subcells, "t": res.state.t, "steps": res.steps,
        "wall_time": res.wall_time, "recomputed_total": sim.corrector.log.total_recomputed,
        "mean_iterations": sim.corrector.log.mean_iterations(),
        "min": ubar.min(axis=0).tolist(), "max": ubar.max(axis=0).tolist(),
    }
    if preset.exact is not None:
        summary["errors"] = submean_errors(res, lambda x: preset.exact(x, res.state.t))
    if kind == "radius":
        spread = radial_spread(sim.space, ubar[:, 0])
        summary["max_radial_spread"] = float((spread[:, 2] / np.abs(spread[:, 1])).max())
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_converge(args: argparse.Namespace) -> int:
    v = resolve_options(args)
    preset = get_preset(v["preset"])
    levels = args.levels
    if len(levels) < 2:
        raise SubcellDGError("need at least two mesh levels")
    rows = convergence_study(preset, levels, _run_options(v))
    out = Path(v["output"])
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "convergence.csv", rows)
    print(f"{'n':>5} {'h':>10} {'L1':>10} {'q1':>6} {'L2':>10} {'q2':>6} {'Linf':>10} {'qinf':>6}")
    for r in rows:
        q = [f"{r.get('order_' + k, float('nan')):6.2f}" for k in ("L1", "L2", "Linf")]
        print(f"{r['n']:5d} {r['h']:10.4g} {r['L1']:10.3e} {q[0]} {r['L2']:10.3e} {q[1]} {r['Linf']:10.3e} {q[2]}")
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    for name in PRESETS:
        p = get_preset(name)
        print(f"{name:18s} model={type(p.model).__name__:18s} t_end={p.t_end:<8.4g} "
              f"resolution={p.default_resolution} bounds={p.bounds}")
    return 0


def cmd_dump_operators(args: argparse.Namespace) -> int:
    topo = build_subdivision(args.scheme, args.order)
    ops = build_operators(topo)
    np.set_printoptions(precision=args.digits, suppress=True, linewidth=160)
    cond = condition_numbers(ops.proj)
    print(f"scheme={topo.scheme.value} k={topo.k} subcells={topo.n_subcells} faces={len(topo.interior_faces)}")
    print(f"cond_inf(P) literal={cond['literal']:.6g} abs={cond['abs']:.6g}")
    for name in ("proj", "incidence", "lap_pinv", "recon_b", "recon_phi"):
        print(f"{name} =")
        print(getattr(ops, name))
    return 0


def cmd_dump_subdivision(args: argparse.Namespace) -> int:
    topo = build_subdivision(args.scheme, args.order)
    print(f"scheme={topo.scheme.value} k={topo.k}")
    for m, poly in enumerate(topo.polygons):
        pts = " ".join(f"({x:.6f},{y:.6f})" for x, y in topo.points[poly])
        print(f"S{m}: area={topo.areas[m]:.8f} vertices {pts}")
    for (m, p), pts in zip(topo.interior_faces, topo.face_points):
        print(f"face {m}-{p}: " + " ".join(f"({x:.6f},{y:.6f})" for x, y in topo.points[pts]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subcelldg", description="DG with a posteriori subcell correction")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark preset and write VTK/CSV output")
    _add_run_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("converge", help="error table over several mesh resolutions")
    _add_run_flags(p, skip=("resolution", "mesh"))
    p.add_argument("--levels", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("presets", help="list benchmark presets")
    p.set_defaults(func=cmd_presets)

    for name, func in (("dump-operators", cmd_dump_operators), ("dump-subdivision", cmd_dump_subdivision)):
        p = sub.add_parser(name, help=f"print reference-cell {name.split('-')[1]}")
        p.add_argument("--order", type=int, default=2)
        p.add_argument("--scheme", type=SubdivisionScheme.parse, default=SubdivisionScheme.STRUCTURED_UNIFORM)
        p.add_argument("--digits", type=int, default=6)
        p.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except SubcellDGError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
