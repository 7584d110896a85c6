"""Command-line frontend: analyze, critical, sweep, phase.

Exit codes: 0 success, 2 usage error, 3 numerical non-convergence
(stalled relaxation or a bisection bracket that does not straddle).
Output formats: human table (default), CSV with a fixed header, JSON
with schema_version 1.  A plain-text config file of `key = value` lines
can supply defaults for any flag of the active subcommand; explicit
flags always win.  The BEC_LAB_THREADS environment variable sets the
default worker count for sweeps; --threads overrides it.

Physical flags are SI at the boundary: --mass kg, --scattering-length
meters, --trap-frequency Hz (converted to angular frequency inside).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from . import sweep as sweep_mod
from . import units, variational
from .gpesolve import (
    BracketError,
    CollapseDetected,
    NonConverged,
    SolverConfig,
    critical_coupling_grid,
    gaussian_state,
    observables,
    relax,
    save_profile,
)
from .sweep import Engine, SweepRow, SweepSpec
from .variational import AnsatzProblem, PointKind

SCHEMA_VERSION = 1
CSV_HEADER = (
    "dimension,coupling,atoms,classification,sigma_min,"
    "rms_var,rms_grid,energy_var,energy_grid,barrier"
)
DEFAULT_BRACKETS = {2: (-8.0, -4.0), 3: (-10.0, -4.0)}
DEFAULT_TOL_G = {2: 0.05, 3: 0.02}

_BOOL_DESTS = {"grid"}
_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, variational.Classification):
        return value.value
    return str(value)


def _csv_line(row: SweepRow) -> str:
    return ",".join(
        _cell(v)
        for v in (
            row.dimension,
            row.coupling,
            row.atom_count,
            row.classification,
            row.sigma_min,
            row.rms_radius_variational,
            row.rms_radius_grid,
            row.energy_variational,
            row.energy_grid,
            row.barrier,
        )
    )


def _rows_csv(rows: Sequence[SweepRow]) -> str:
    return "\n".join([CSV_HEADER, *(_csv_line(r) for r in rows)]) + "\n"


def _row_json(row: SweepRow) -> Dict:
    return {
        "dimension": row.dimension,
        "coupling": row.coupling,
        "atoms": row.atom_count,
        "classification": row.classification.value,
        "sigma_min": row.sigma_min,
        "rms_var": row.rms_radius_variational,
        "rms_grid": row.rms_radius_grid,
        "energy_var": row.energy_variational,
        "energy_grid": row.energy_grid,
        "barrier": row.barrier,
        "grid_status": row.grid_status,
    }


def _rows_table(rows: Sequence[SweepRow]) -> str:
    header = CSV_HEADER.split(",")
    cells = [header] + [_csv_line(r).split(",") for r in rows]
    widths = [max(len(line[i]) for line in cells) for i in range(len(header))]
    out = []
    for line in cells:
        out.append("  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip())
    return "\n".join(out) + "\n"


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_doc(command: str, payload: Dict) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "command": command}
    doc.update(payload)
    return json.dumps(doc, indent=2) + "\n"


def _add_format_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--output", help="write the document to this path instead of stdout")
    p.add_argument("--config", help="key = value file supplying flag defaults")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rmax", type=float, default=8.0, help="grid extent (oscillator lengths)")
    p.add_argument("--points", type=int, default=1024, help="grid nodes")
    p.add_argument("--dt", type=float, default=1e-3, help="flow time step")
    p.add_argument("--tol", type=float, default=1e-9, help="energy convergence tolerance")
    p.add_argument("--max-iters", type=int, default=2_000_000, help="flow step budget")


def _add_physical_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scattering-length", type=float, help="s-wave scattering length (m)")
    p.add_argument("--trap-frequency", type=float, help="trap frequency (Hz)")
    p.add_argument("--mass", type=float, help="atomic mass (kg)")


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="bec-lab",
        description="Trapped-condensate stability analysis: variational and grid engines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="classify a single (dimension, coupling) point")
    pa.add_argument("--dimension", type=int, choices=(1, 2, 3), required=True)
    pa.add_argument("--coupling", type=float, help="dimensionless interaction strength g")
    pa.add_argument("--atoms", type=int, help="atom number (with the physical flags)")
    _add_physical_flags(pa)
    pa.add_argument("--grid", action="store_true", help="also relax on the radial grid")
    _add_solver_flags(pa)
    pa.add_argument("--initial-width", type=float, help="starting Gaussian width for the flow")
    pa.add_argument("--profile-out", help="write the converged (r, psi) profile here")
    _add_format_flags(pa)

    pc = sub.add_parser("critical", help="locate the collapse threshold")
    pc.add_argument("--dimension", type=int, choices=(1, 2, 3), required=True)
    pc.add_argument("--engine", choices=("variational", "grid", "both"), default="variational")
    pc.add_argument("--bracket", help="initial grid bisection bracket lo:hi")
    pc.add_argument("--tol-g", type=float, help="terminal bisection bracket width")
    _add_solver_flags(pc)
    _add_physical_flags(pc)
    _add_format_flags(pc)

    ps = sub.add_parser("sweep", help="radius and energy versus coupling")
    ps.add_argument("--dimension", type=int, choices=(1, 2, 3), required=True)
    ps.add_argument("--coupling-range", help="lo:hi:steps (inclusive, ascending)")
    ps.add_argument("--coupling-list", help="comma-separated couplings, ascending")
    ps.add_argument("--engine", choices=("variational", "grid", "both"), default="variational")
    ps.add_argument("--threads", type=int, default=None, help="worker threads (default BEC_LAB_THREADS or 1)")
    _add_solver_flags(ps)
    _add_format_flags(ps)

    pp = sub.add_parser("phase", help="classification map over dimensions and couplings")
    pp.add_argument("--dimension", type=int, choices=(1, 2, 3), help="restrict to one dimension")
    pp.add_argument("--coupling-range", help="lo:hi:steps (inclusive, ascending)")
    pp.add_argument("--coupling-list", help="comma-separated couplings, ascending")
    pp.add_argument("--threads", type=int, default=None, help="accepted for symmetry; classification is cheap")
    _add_format_flags(pp)

    # Every flag here starts with a letter, so any token of the shape
    # -<digit>... is a value: plain negatives, scientific notation
    # (--scattering-length -1.45e-9), lists (-6,-4,0), brackets (-10:-4).
    # `--flag=value` works regardless of this matcher.
    number = re.compile(r"^-[\d.]")
    for p in (parser, pa, pc, ps, pp):
        p._negative_number_matcher = number

    return parser, {"analyze": pa, "critical": pc, "sweep": ps, "phase": pp}


def _dests_of(sub_parser: argparse.ArgumentParser) -> set:
    return {a.dest for a in sub_parser._actions if a.dest != "help"}


def _read_config(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
                key, val = line.split("=", 1)
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    return values


def _apply_config(parser, sub_name: str, sub_parser, config: Dict[str, str]) -> None:
    known = _dests_of(sub_parser)
    defaults = {}
    for key, val in config.items():
        if key not in known:
            parser.error(f"config key {key!r} is not a flag of {sub_name!r}")
        if key in _BOOL_DESTS:
            low = val.lower()
            if low in _BOOL_TRUE:
                defaults[key] = True
            elif low in _BOOL_FALSE:
                defaults[key] = False
            else:
                parser.error(f"config key {key!r} expects a boolean, got {val!r}")
        else:
            defaults[key] = val
    sub_parser.set_defaults(**defaults)


def _parse_range(parser, text: str) -> List[float]:
    parts = text.split(":")
    if len(parts) != 3:
        parser.error(f"--coupling-range expects lo:hi:steps, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        parser.error(f"--coupling-range expects numbers lo:hi:steps, got {text!r}")
    if lo > hi:
        parser.error(f"--coupling-range needs lo <= hi, got {text!r}")
    if steps < 1 or (steps == 1 and lo != hi):
        parser.error(f"--coupling-range needs steps >= 2 (or lo == hi), got {text!r}")
    if steps == 1:
        return [lo]
    return [lo + i * (hi - lo) / (steps - 1) for i in range(steps)]


def _parse_list(parser, text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        parser.error(f"--coupling-list expects comma-separated numbers, got {text!r}")


def _coupling_values(parser, args) -> List[float]:
    has_range = args.coupling_range is not None
    has_list = args.coupling_list is not None
    if has_range == has_list:
        parser.error("give exactly one of --coupling-range or --coupling-list")
    if has_range:
        return _parse_range(parser, args.coupling_range)
    return _parse_list(parser, args.coupling_list)


def _solver_from(args) -> SolverConfig:
    return SolverConfig(
        r_max=args.rmax,
        n_points=args.points,
        time_step=args.dt,
        energy_tol=args.tol,
        max_iters=args.max_iters,
    )


def _system_from(parser, args, atoms: int = 1) -> units.PhysicalSystem:
    return units.PhysicalSystem(
        mass=args.mass,
        trap_frequency=2.0 * math.pi * args.trap_frequency,
        scattering_length=args.scattering_length,
        atom_count=atoms,
    )


def _threads_from(parser, args) -> int:
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        return args.threads
    env = os.environ.get("BEC_LAB_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        parser.error(f"BEC_LAB_THREADS must be an integer, got {env!r}")
    if n < 1:
        parser.error(f"BEC_LAB_THREADS must be >= 1, got {env!r}")
    return n


def _cmd_analyze(parser, args) -> int:
    physical = [args.atoms, args.scattering_length, args.trap_frequency, args.mass]
    has_physical = any(v is not None for v in physical)
    if (args.coupling is None) == (not has_physical):
        parser.error("give exactly one of --coupling or the physical flag set")
    atoms = None
    if has_physical:
        if any(v is None for v in physical):
            parser.error(
                "physical input needs all of --atoms, --scattering-length, "
                "--trap-frequency, --mass"
            )
        system = _system_from(parser, args, atoms=args.atoms)
        coupling = units.coupling_from_physical(system, dimension=args.dimension).g
        atoms = args.atoms
    else:
        coupling = args.coupling

    report = variational.classify(AnsatzProblem(args.dimension, coupling))
    minima = [p for p in report.points if p.kind is PointKind.LOCAL_MIN]
    best = min(minima, key=lambda p: p.energy.total) if minima else None

    grid_payload = None
    grid_status = None
    rms_grid = energy_grid = None
    if args.grid:
        config = _solver_from(args)
        initial = None
        if args.initial_width is not None:
            initial = gaussian_state(config, args.dimension, coupling, width=args.initial_width)
        try:
            state = relax(config, args.dimension, coupling, initial=initial)
        except CollapseDetected as exc:
            grid_status = "collapsed"
            grid_payload = {
                "status": "collapsed",
                "iterations": exc.iterations,
                "rms_radius": exc.rms_radius,
                "energy": exc.energy,
            }
        else:
            grid_status = "converged"
            obs = observables(state)
            rms_grid = obs.rms_radius
            energy_grid = obs.energy.total
            grid_payload = {
                "status": "converged",
                "iterations": state.iterations,
                "energy": obs.energy.total,
                "kinetic": obs.energy.kinetic,
                "potential": obs.energy.potential,
                "interaction": obs.energy.interaction,
                "chemical_potential": obs.chemical_potential,
                "rms_radius": obs.rms_radius,
                "central_density_amplitude": obs.central_density_amplitude,
            }
            if args.profile_out:
                save_profile(state, args.profile_out)

    row = SweepRow(
        dimension=args.dimension,
        coupling=coupling,
        atom_count=atoms,
        classification=report.classification,
        sigma_min=best.sigma if best else None,
        rms_radius_variational=report.mean_radius,
        rms_radius_grid=rms_grid,
        energy_variational=best.energy.total if best else None,
        energy_grid=energy_grid,
        barrier=report.barrier_height,
        grid_status=grid_status,
    )

    if args.format == "csv":
        _emit(_rows_csv([row]), args.output)
    elif args.format == "json":
        payload = _row_json(row)
        payload["points"] = [
            {
                "sigma": p.sigma,
                "energy": p.energy.total,
                "curvature": p.curvature,
                "kind": p.kind.value,
            }
            for p in report.points
        ]
        payload["grid"] = grid_payload
        _emit(_json_doc("analyze", payload), args.output)
    else:
        lines = [
            f"dimension        {row.dimension}",
            f"coupling         {_cell(row.coupling)}",
            f"classification   {row.classification.value}",
        ]
        if atoms is not None:
            lines.append(f"atoms            {atoms}")
        if best is not None:
            lines.append(f"sigma_min        {_cell(row.sigma_min)}")
            lines.append(f"mean_radius_var  {_cell(row.rms_radius_variational)}")
            lines.append(f"energy_var       {_cell(row.energy_variational)}")
        if row.barrier is not None:
            lines.append(f"barrier          {_cell(row.barrier)}")
        if grid_payload is not None:
            for key, val in grid_payload.items():
                lines.append(f"grid_{key:<12} {_cell(val)}")
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def _parse_bracket(parser, text: str) -> Tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        parser.error(f"--bracket expects lo:hi, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        parser.error(f"--bracket expects numbers lo:hi, got {text!r}")
    return lo, hi


def _cmd_critical(parser, args) -> int:
    engine = args.engine
    if args.dimension == 1 and engine in ("grid", "both"):
        parser.error("no grid threshold exists in 1D (the flow never collapses)")
    physical = [args.scattering_length, args.trap_frequency, args.mass]
    has_physical = any(v is not None for v in physical)
    if has_physical and any(v is None for v in physical):
        parser.error(
            "physical input needs all of --scattering-length, --trap-frequency, --mass"
        )
    if has_physical and args.dimension == 2:
        parser.error("no physical coupling mapping exists for d = 2")
    if args.format == "csv":
        parser.error("critical has no row table; use --format table or json")

    var_payload = None
    if engine in ("variational", "both"):
        crit = variational.critical_coupling(args.dimension)
        if crit is not None:
            var_payload = {"g_c": crit.g_c, "sigma_c": crit.sigma_c}

    grid_payload = None
    if engine in ("grid", "both"):
        lo, hi = DEFAULT_BRACKETS[args.dimension]
        if args.bracket is not None:
            lo, hi = _parse_bracket(parser, args.bracket)
        tol_g = args.tol_g if args.tol_g is not None else DEFAULT_TOL_G[args.dimension]
        blo, bhi = critical_coupling_grid(_solver_from(args), args.dimension, lo, hi, tol_g)
        grid_payload = {"bracket_lo": blo, "bracket_hi": bhi, "center": 0.5 * (blo + bhi)}

    n_max_var = n_max_grid = None
    unbounded = args.dimension == 1
    if has_physical and not unbounded:
        system = _system_from(parser, args)
        if var_payload is not None:
            n_max_var = int(math.floor(units.critical_atom_number(system, var_payload["g_c"])))
        if grid_payload is not None:
            n_max_grid = int(math.floor(units.critical_atom_number(system, grid_payload["center"])))

    if args.format == "json":
        payload = {
            "dimension": args.dimension,
            "engine": engine,
            "variational": var_payload,
            "grid": grid_payload,
            "n_max_variational": "Unbounded" if unbounded and has_physical else n_max_var,
            "n_max_grid": n_max_grid,
        }
        _emit(_json_doc("critical", payload), args.output)
        return 0

    lines = [f"dimension        {args.dimension}", f"engine           {engine}"]
    if args.dimension == 1:
        lines.append("threshold        none (bounded for every finite g)")
        if has_physical:
            lines.append("n_max            Unbounded")
    else:
        if var_payload is not None:
            lines.append(f"g_c_variational  {_cell(var_payload['g_c'])}")
            if var_payload["sigma_c"] is not None:
                lines.append(f"sigma_c          {_cell(var_payload['sigma_c'])}")
        if grid_payload is not None:
            lines.append(
                f"g_c_grid         [{_cell(grid_payload['bracket_lo'])}, "
                f"{_cell(grid_payload['bracket_hi'])}]"
            )
            lines.append(f"bracket_center   {_cell(grid_payload['center'])}")
        if n_max_var is not None:
            lines.append(f"n_max_var        {n_max_var}")
        if n_max_grid is not None:
            lines.append(f"n_max_grid       {n_max_grid}")
    _emit("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_sweep(parser, args) -> int:
    values = _coupling_values(parser, args)
    try:
        spec = SweepSpec(
            dimension=args.dimension,
            coupling_values=tuple(values),
            engine=Engine(args.engine),
            solver=_solver_from(args),
        )
    except ValueError as exc:
        parser.error(str(exc))
    rows = sweep_mod.radius_vs_coupling(spec, threads=_threads_from(parser, args))
    if args.format == "csv":
        _emit(_rows_csv(rows), args.output)
    elif args.format == "json":
        payload = {
            "dimension": args.dimension,
            "engine": args.engine,
            "rows": [_row_json(r) for r in rows],
        }
        _emit(_json_doc("sweep", payload), args.output)
    else:
        _emit(_rows_table(rows), args.output)
    return 0


def _cmd_phase(parser, args) -> int:
    values = _coupling_values(parser, args)
    d_list = [args.dimension] if args.dimension is not None else [1, 2, 3]
    cells = sweep_mod.phase_diagram(d_list, values)
    if args.format == "csv":
        rows = []
        for c in cells:
            rows.append(
                SweepRow(
                    dimension=c.dimension,
                    coupling=c.coupling,
                    atom_count=None,
                    classification=c.classification,
                    sigma_min=None,
                    rms_radius_variational=None,
                    rms_radius_grid=None,
                    energy_variational=None,
                    energy_grid=None,
                    barrier=None,
                )
            )
        _emit(_rows_csv(rows), args.output)
    elif args.format == "json":
        payload = {
            "dimensions": d_list,
            "cells": [
                {
                    "dimension": c.dimension,
                    "coupling": c.coupling,
                    "classification": c.classification.value,
                    "boundary": c.boundary,
                }
                for c in cells
            ],
        }
        _emit(_json_doc("phase", payload), args.output)
    else:
        lines = ["dimension  coupling              classification  boundary"]
        for c in cells:
            lines.append(
                f"{c.dimension:<9}  {_cell(c.coupling):<20}  {c.classification.value:<14}  "
                f"{'*' if c.boundary else ''}".rstrip()
            )
        _emit("\n".join(lines) + "\n", args.output)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()

    # Config pre-pass: defaults must be installed before the real parse.
    # The subcommand is always the first token (the top parser takes no
    # flags of its own besides --help).
    if "--config" in argv:
        idx = argv.index("--config")
        if idx + 1 >= len(argv):
            parser.error("--config expects a path")
        if not argv or argv[0] not in subs:
            parser.error("a subcommand must precede --config")
        try:
            config = _read_config(argv[idx + 1])
        except ValueError as exc:
            parser.error(str(exc))
        _apply_config(parser, argv[0], subs[argv[0]], config)

    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(parser, args)
        if args.command == "critical":
            return _cmd_critical(parser, args)
        if args.command == "sweep":
            return _cmd_sweep(parser, args)
        return _cmd_phase(parser, args)
    except NonConverged as exc:
        print(f"bec-lab: non-convergence: {exc}", file=sys.stderr)
        return 3
    except BracketError as exc:
        print(f"bec-lab: bracket failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
