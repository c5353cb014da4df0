"""Command line entry point: ``foldplate run | presets | export-mesh``.

Exit codes: 0 on success, 1 for configuration errors, 2 for numerical failures.
``FOLDPLATE_THREADS`` caps the BLAS/OpenMP thread pools.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path

from threadpoolctl import threadpool_limits

from .experiments import PRESETS, ConfigError, load_config, parse_assignments, problem_for_level, run
from .mesh import MeshError, build_structured_mesh, classify_edges, refine_uniform
from .vtk import write_vtk

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="foldplate", description="Folding plate interior penalty dG solver.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment")
    r.add_argument("--config", type=Path, help="key = value config file")
    r.add_argument("--preset", help="start from a built-in preset")
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    r.add_argument("--output-dir", type=Path, default=Path("."))
    r.add_argument("--quiet", action="store_true")

    sub.add_parser("presets", help="list built-in presets")

    m = sub.add_parser("export-mesh", help="write a mesh as legacy VTK")
    m.add_argument("--level", type=int, default=0)
    m.add_argument("--preset", default="table1-nofold")
    m.add_argument("--config", type=Path)
    m.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    m.add_argument("--output", type=Path)
    return p


def _threads():
    value = os.environ.get("FOLDPLATE_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"FOLDPLATE_THREADS must be an integer, got {value!r}") from None
    return threadpool_limits(limits=max(n, 1))


def _config(args):
    overrides = parse_assignments(args.overrides)
    return load_config(args.config, overrides, preset=args.preset)


def _cmd_run(args):
    config = _config(args)
    log = None if args.quiet else (lambda msg: print(msg, flush=True))
    manifest = run(config, args.output_dir, log=log)
    if not args.quiet:
        for row in manifest["rows"]:
            print("  ".join(f"{k}={v}" for k, v in row.items() if v not in (None, "")))
        print(f"wrote {args.output_dir / config.name}")


def _cmd_presets(args):
    for name, cfg in PRESETS.items():
        print(f"{name:22s} k={cfg.k} interface={cfg.interface}/fit{cfg.fit} bc={cfg.bc} f={cfg.f} levels={cfg.levels}")


def _cmd_export_mesh(args):
    config = _config(args)
    if args.level < 0:
        raise ConfigError("level must be non-negative")
    mesh = build_structured_mesh(config.base_n, config.interface_spec, config.k)
    for _ in range(args.level):
        mesh = refine_uniform(mesh)
    mesh = classify_edges(mesh, problem_for_level(config).dirichlet)
    path = args.output or Path(f"{config.name}-mesh-level{args.level}.vtk")
    write_vtk(path, mesh, title=f"{config.name} mesh level {args.level}")
    print(f"wrote {path} ({mesh.n_elements} elements)")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handlers = {"run": _cmd_run, "presets": _cmd_presets, "export-mesh": _cmd_export_mesh}
    try:
        with _threads():
            handlers[args.command](args)
    except (ConfigError, MeshError) as exc:
        # mesh errors at this level come from bad geometry or boundary specs
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, ValueError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
