"""Command-line front end: ``xlris dict build | trajectory | run <experiment> | gain-curve``.

Every ``SystemConfig`` field is a flag (``--ris-ny 256``); ``--config`` loads a
JSON or TOML file of the same keys, and flags override it.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import bench
from .config import SystemConfig
from .dictionary import CACHE_ENV, build_spherical_dictionary, save_spherical_dictionary
from .geometry import SphericalPoint
from .squint import trajectory

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


def _pair(text: str) -> tuple[float, float]:
    a, b = (float(x) for x in text.split(","))
    return a, b


def add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system configuration")
    g.add_argument("--config", type=Path, help="JSON or TOML file with SystemConfig keys")
    defaults = SystemConfig()
    for f in dataclasses.fields(SystemConfig):
        flag = "--" + f.name.replace("_", "-")
        val = getattr(defaults, f.name)
        if isinstance(val, tuple):
            g.add_argument(flag, dest=f.name, type=_pair, default=None, metavar="A,B")
        else:
            kind = int if f.name.startswith("g_") else type(val)
            g.add_argument(flag, dest=f.name, type=kind, default=None)


def load_config_file(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    return tomllib.loads(text)


def config_from_args(args) -> SystemConfig:
    data = load_config_file(args.config) if getattr(args, "config", None) else {}
    names = {f.name for f in dataclasses.fields(SystemConfig)}
    for n in names:
        v = getattr(args, n, None)
        if v is not None:
            data[n] = v
    return SystemConfig.from_dict(data)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_dict_build(args) -> int:
    cfg = config_from_args(args)
    d = build_spherical_dictionary(cfg, cache_dir=args.cache_dir)
    if args.output:
        save_spherical_dictionary(d, args.output)
    rings = np.bincount(d.i_r)
    print(f"G_R={d.size} directions={d.g_y * d.g_z} ring histogram={rings.tolist()}")
    return 0


def cmd_trajectory(args) -> int:
    cfg = config_from_args(args)
    th, ph, r = args.desired
    rows = trajectory(cfg, SphericalPoint(np.radians(th), np.radians(ph), r))
    text = bench.rows_to_csv(rows)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    values = None
    if args.values:
        sep = ";" if args.experiment == "trajectory_map" else ","
        values = [json.loads(v) for v in args.values.split(sep) if v.strip()]
    spec = bench.ExperimentSpec(args.experiment, values=values,
                                methods=args.methods.split(",") if args.methods else None)
    rows = bench.run_experiment(spec, cfg, out_dir=args.out)
    if args.out is None:
        sys.stdout.write(bench.rows_to_csv(rows))
    else:
        print(f"wrote {Path(args.out) / (spec.experiment + '.csv')}")
    return 0


def cmd_gain_curve(args) -> int:
    cfg = config_from_args(args)
    pts = bench.gain_vs_distance(cfg, [int(s) for s in _floats(args.sizes)], _floats(args.distances),
                                 draws=args.draws)
    text = bench.rows_to_csv([dataclasses.asdict(p) for p in pts])
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xlris", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dict", help="dictionary tools")
    dsub = d.add_subparsers(dest="dict_command", required=True)
    b = dsub.add_parser("build", help="build (and cache) the spherical-domain dictionary")
    b.add_argument("--cache-dir", default=None, help=f"label cache directory (default ${CACHE_ENV})")
    b.add_argument("--output", default=None, help="also write the label table to this .npz")
    add_config_flags(b)
    b.set_defaults(func=cmd_dict_build)

    t = sub.add_parser("trajectory", help="beam trajectory across subcarriers")
    t.add_argument("--desired", type=float, nargs=3, default=(45.0, 45.0, 20.0),
                   metavar=("THETA_DEG", "PHI_DEG", "R_M"))
    t.add_argument("--output", default=None)
    add_config_flags(t)
    t.set_defaults(func=cmd_trajectory)

    r = sub.add_parser("run", help="run a Monte-Carlo experiment")
    r.add_argument("experiment", choices=sorted(bench.EXPERIMENTS))
    r.add_argument("--values", default=None,
                   help="comma-separated swept values (trajectory_map: ';'-separated JSON triples)")
    r.add_argument("--methods", default=None, help=f"comma-separated subset of {','.join(bench.METHODS)}")
    r.add_argument("--out", default=None, help="directory for the CSV and JSON manifest")
    add_config_flags(r)
    r.set_defaults(func=cmd_run)

    g = sub.add_parser("gain-curve", help="planar-vs-spherical support gain against distance")
    g.add_argument("--sizes", default="128,256,512", help="RIS n_y values")
    g.add_argument("--distances", default=",".join(str(x) for x in range(5, 101, 5)))
    g.add_argument("--draws", type=int, default=1000)
    g.add_argument("--output", default=None)
    add_config_flags(g)
    g.set_defaults(func=cmd_gain_curve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, MemoryError, OSError, np.linalg.LinAlgError) as exc:
        print(f"xlris: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
