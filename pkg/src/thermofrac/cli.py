"""Command-line interface.

Subcommands:
  run CONFIG        run a JSON configuration
  example NAME      run a named built-in benchmark
  mesh-info PATH    summarize a Gmsh MSH 2.2 file

Exit codes: 0 success, 1 configuration/parse error, 2 solver failure. The
THERMOFRAC_THREADS environment variable caps assembly parallelism (0 = auto);
the current assembly kernels are vectorized single-threaded, so any cap is
honored trivially.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .benchmarks import EXAMPLE_NAMES, build_example
from .config import parse_config, serialize
from .driver import run_config
from .errors import ConfigError, MeshError, SolveError
from .mesh import load_gmsh
from .report import peak_load

log = logging.getLogger("thermofrac")


def _parse_overrides(items):
    out = []
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like key.path=value")
        key, _, value = item.partition("=")
        out.append((key.strip(), value.strip()))
    return out


def _thread_cap() -> int:
    raw = os.environ.get("THERMOFRAC_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        log.warning("ignoring non-integer THERMOFRAC_THREADS=%r", raw)
        return 0
    if cap < 0:
        log.warning("ignoring negative THERMOFRAC_THREADS=%d", cap)
        return 0
    return cap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermofrac",
        description="2D phase-field solver for thermo-mechanical brittle fracture",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true",
                        help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a JSON configuration")
    p_run.add_argument("config", help="path to the configuration file")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--override", action="append", metavar="KEY=VALUE",
                       help="set a dotted config key (value parsed as JSON)")

    p_ex = sub.add_parser("example", help="run a built-in benchmark")
    p_ex.add_argument("name", help="one of: " + ", ".join(EXAMPLE_NAMES))
    p_ex.add_argument("--scale", type=float, default=1.0,
                      help="resolution factor in (0, 1]; 1 = paper resolution")
    p_ex.add_argument("--out", default=None, help="output directory override")
    p_ex.add_argument("--override", action="append", metavar="KEY=VALUE",
                      help="set a dotted config key after materialization")

    p_info = sub.add_parser("mesh-info", help="summarize a Gmsh mesh file")
    p_info.add_argument("path")
    return parser


def _run_and_report(cfg, out_dir) -> int:
    records, state, out = run_config(cfg, out_dir)
    u_peak, f_peak = peak_load(records)
    log.info("finished %d steps; peak reaction %.6g N/m at u = %.6g m",
             len(records) - 1, f_peak, u_peak)
    print(f"run complete: {len(records) - 1} steps, outputs in {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else (
        logging.WARNING if args.quiet else logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    cap = _thread_cap()
    if cap:
        log.debug("assembly thread cap: %d", cap)

    try:
        if args.command == "run":
            if not os.path.exists(args.config):
                raise ConfigError(f"config file not found: {args.config}")
            cfg = parse_config(args.config, overrides=_parse_overrides(args.override))
            return _run_and_report(cfg, args.out)

        if args.command == "example":
            cfg = build_example(args.name, scale=args.scale, out_dir=args.out)
            if args.override:
                cfg = parse_config(json.loads(serialize(cfg)),
                                   overrides=_parse_overrides(args.override))
            return _run_and_report(cfg, args.out)

        if args.command == "mesh-info":
            if not os.path.exists(args.path):
                raise ConfigError(f"mesh file not found: {args.path}")
            info = load_gmsh(args.path).info()
            print(f"nodes: {info['nodes']}")
            print(f"elements: {info['elements']}")
            print(f"boundary edges: {info['boundary_edges']}")
            print(f"area: {info['area']:.12g}")
            print(f"bbox: {info['bbox']}")
            print("tags: " + ", ".join(f"{k}={v}" for k, v in info["tags"].items()))
            return 0
    except (ConfigError, MeshError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolveError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
