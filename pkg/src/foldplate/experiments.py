"""Declarative experiment configs, built-in presets and the level loop.

A config file holds ``key = value`` lines (``#`` starts a comment). Keys:

``name``, ``k``, ``gamma0``, ``gamma1``, ``interface`` (none, straight,
quadratic, sine), ``fit`` (1 or 2), ``bc`` (clamped_all, clamped_two_sides_grad,
clamped_two_sides_lift, clamped_right_point), ``f`` (a number, ``zero`` or
``manufactured``), ``levels``, ``base_n``, ``solver`` (auto, cg, direct),
``start_level`` (coarse levels refined through but not solved), ``tol``,
``outputs`` (comma list of csv, vtk, energy), ``preset``.
"""
from __future__ import annotations

import enum
import json
import math
import platform
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .analysis import ExtrapolationError, dg_error, dg_norm, energy_density, error_series, write_convergence_csv
from .assembly import ProblemSpec, assemble
from .mesh import InterfaceKind, InterfaceSpec, build_structured_mesh, classify_edges, refine_uniform
from .solver import solve
from .spaces import SolutionField
from .vtk import write_vtk

__all__ = [
    "BoundaryCase",
    "ConfigError",
    "ExperimentConfig",
    "PRESETS",
    "load_config",
    "problem_for_level",
    "manufactured_solution",
    "run",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


class BoundaryCase(str, enum.Enum):
    CLAMPED_ALL = "clamped_all"
    CLAMPED_TWO_SIDES_GRAD = "clamped_two_sides_grad"
    CLAMPED_TWO_SIDES_LIFT = "clamped_two_sides_lift"
    CLAMPED_RIGHT_POINT = "clamped_right_point"


POINT_CONSTRAINT = ((0.0, 0.5), 0.3)
OUTPUTS = ("csv", "vtk", "energy")


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    k: int = 2
    gamma0: float = 10.0
    gamma1: float = 10.0
    interface: str = "none"
    fit: int = 2
    bc: str = "clamped_all"
    f: str = "100"
    levels: int = 6
    base_n: int = 4
    start_level: int = 0
    solver: str = "auto"
    tol: float = 1e-10
    outputs: tuple = ("csv",)

    def __post_init__(self):
        try:
            self.k = int(self.k)
            self.gamma0 = float(self.gamma0)
            self.gamma1 = float(self.gamma1)
            self.fit = int(self.fit)
            self.levels = int(self.levels)
            self.base_n = int(self.base_n)
            self.start_level = int(self.start_level)
            self.tol = float(self.tol)
            self.interface = InterfaceKind(str(self.interface).lower()).value
            self.bc = BoundaryCase(str(self.bc).lower()).value
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if isinstance(self.outputs, str):
            self.outputs = tuple(o.strip() for o in self.outputs.split(",") if o.strip())
        self.outputs = tuple(self.outputs)
        self.f = str(self.f).strip().lower()
        if self.k not in (2, 3):
            raise ConfigError("k must be 2 or 3")
        if self.start_level < 0:
            raise ConfigError("start_level must be non-negative")
        if self.levels - self.start_level < 3:
            raise ConfigError("at least three solved levels are needed for extrapolation")
        if self.base_n < 2 or self.base_n % 2:
            raise ConfigError("base_n must be even and at least 2")
        if self.fit not in (1, 2):
            raise ConfigError("fit must be 1 or 2")
        if self.solver not in ("auto", "cg", "direct"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.gamma0 <= 0 or self.gamma1 < 0:
            raise ConfigError("penalty parameters must be positive")
        if self.f not in ("zero", "manufactured"):
            try:
                float(self.f)
            except ValueError:
                raise ConfigError(f"f must be a number, 'zero' or 'manufactured', got {self.f!r}") from None
        bad = set(self.outputs) - set(OUTPUTS)
        if bad:
            raise ConfigError(f"unknown outputs {sorted(bad)}")
        if self.bc == BoundaryCase.CLAMPED_RIGHT_POINT.value and self.interface == "none":
            raise ConfigError("clamped_right_point needs a fold")

    @property
    def interface_spec(self) -> InterfaceSpec:
        return InterfaceSpec(self.interface, self.fit)

    @property
    def homogeneous(self) -> bool:
        """Zero boundary data and no point value, so the error estimate applies."""
        return self.bc == BoundaryCase.CLAMPED_ALL.value

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(self)}
        unknown = set(overrides) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return replace(self, **overrides)


def _table1(name, interface, fit=2):
    return ExperimentConfig(name=name, interface=interface, fit=fit, f="100", levels=6)


def _figure(name, interface, bc, f="zero"):
    return ExperimentConfig(name=name, interface=interface, bc=bc, f=f, levels=5, outputs=("csv", "vtk", "energy"))


PRESETS = {
    "table1-nofold": _table1("table1-nofold", "none"),
    "table1-straight": _table1("table1-straight", "straight"),
    "table1-pwlinear": _table1("table1-pwlinear", "sine", fit=1),
    "table1-pwquadratic": _table1("table1-pwquadratic", "sine", fit=2),
    # homogeneous clamping needs a load, otherwise the solution vanishes
    "fig2-fold": _figure("fig2-fold", "quadratic", "clamped_all", f="100"),
    "fig2-nofold": _figure("fig2-nofold", "none", "clamped_all", f="100"),
    "fig3-fold": _figure("fig3-fold", "quadratic", "clamped_two_sides_grad"),
    "fig3-nofold": _figure("fig3-nofold", "none", "clamped_two_sides_grad"),
    "fig4-fold": _figure("fig4-fold", "quadratic", "clamped_two_sides_lift"),
    "fig4-nofold": _figure("fig4-nofold", "none", "clamped_two_sides_lift"),
    "fig5-fold": _figure("fig5-fold", "quadratic", "clamped_right_point"),
    "manufactured-k2": ExperimentConfig(name="manufactured-k2", f="manufactured", levels=6),
    "manufactured-k3": ExperimentConfig(
        name="manufactured-k3", k=3, gamma0=500.0, gamma1=20.0, f="manufactured", levels=5
    ),
}


def _parse_value(text):
    return text.strip().strip('"').strip("'")


def parse_assignments(lines) -> dict:
    out = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = _parse_value(value)
    return out


def load_config(path=None, overrides=None, preset: str | None = None) -> ExperimentConfig:
    """Config from a preset and/or key-value file, then ``overrides`` on top."""
    values = {}
    if path is not None:
        try:
            values = parse_assignments(Path(path).read_text().splitlines())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    preset = values.pop("preset", preset)
    overrides = dict(overrides or {})
    preset = overrides.pop("preset", preset)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        base = PRESETS[preset]
    else:
        base = ExperimentConfig()
    return base.with_overrides({**values, **overrides})


# -- problem data ------------------------------------------------------------


def _bump(t):
    return t**2 * (1 - t) ** 2


def _dbump(t):
    return 2 * t * (1 - t) * (1 - 2 * t)


def _ddbump(t):
    return 2 - 12 * t + 12 * t * t


def manufactured_solution():
    """``u = x^2 (1-x)^2 y^2 (1-y)^2`` with its derivatives and load ``f = lap^2 u``."""

    def value(X):
        return _bump(X[:, 0]) * _bump(X[:, 1])

    def gradient(X):
        x, y = X[:, 0], X[:, 1]
        return np.column_stack([_dbump(x) * _bump(y), _bump(x) * _dbump(y)])

    def hessian(X):
        x, y = X[:, 0], X[:, 1]
        H = np.empty((len(X), 2, 2))
        H[:, 0, 0] = _ddbump(x) * _bump(y)
        H[:, 1, 1] = _bump(x) * _ddbump(y)
        H[:, 0, 1] = H[:, 1, 0] = _dbump(x) * _dbump(y)
        return H

    def load(X):
        x, y = X[:, 0], X[:, 1]
        return 24 * _bump(y) + 2 * _ddbump(x) * _ddbump(y) + 24 * _bump(x)

    return {"value": value, "gradient": gradient, "hessian": hessian, "load": load}


def _grad_phi(X):
    # outward unit slope on x=0 and x=1
    return np.column_stack([np.where(X[:, 0] < 0.5, -1.0, 1.0), np.zeros(len(X))])


def _lift_g(X):
    return np.where(X[:, 0] < 0.5, 0.3, 0.0)


def problem_for_level(config: ExperimentConfig) -> ProblemSpec:
    """Problem data for ``config``; the mesh is classified by ``assemble``."""
    if config.f == "zero":
        f = 0.0
    elif config.f == "manufactured":
        f = manufactured_solution()["load"]
    else:
        f = float(config.f)
    bc = BoundaryCase(config.bc)
    kw = dict(k=config.k, gamma0=config.gamma0, gamma1=config.gamma1, f=f)
    if bc is BoundaryCase.CLAMPED_ALL:
        return ProblemSpec(dirichlet="all", **kw)
    if bc is BoundaryCase.CLAMPED_TWO_SIDES_GRAD:
        return ProblemSpec(dirichlet="left+right", phi=_grad_phi, **kw)
    if bc is BoundaryCase.CLAMPED_TWO_SIDES_LIFT:
        return ProblemSpec(dirichlet="left+right", g=_lift_g, **kw)
    return ProblemSpec(dirichlet="x>=2/3", point_constraint=POINT_CONSTRAINT, **kw)


BOUNDARY_DATA = {
    "clamped_all": "u = 0 and grad u = 0 on the whole boundary",
    "clamped_two_sides_grad": "u = 0 and grad u = outward unit normal on x=0 and x=1, free elsewhere",
    "clamped_two_sides_lift": "u = 0.3 on x=0, u = 0 on x=1, grad u = 0 on both, free elsewhere",
    "clamped_right_point": "u = 0 and grad u = 0 on the boundary part with x >= 2/3, u(0, 0.5) = 0.3",
}


# -- runner ------------------------------------------------------------------


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, enum.Enum):
        return obj.value
    raise TypeError(f"not serializable: {type(obj)}")


def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _write_manifest(path: Path, manifest: dict):
    path.write_text(json.dumps(manifest, indent=2, default=_json_default) + "\n")


def run(config: ExperimentConfig, output_dir=".", log=None) -> dict:
    """Run the level loop for ``config`` and write its artifacts under ``output_dir/name``.

    Returns the manifest dict. Any failure is recorded in the manifest before
    the exception propagates.
    """
    out = Path(output_dir) / config.name
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "config": asdict(config),
        "boundary_data": BOUNDARY_DATA[config.bc],
        "point_constraint": list(POINT_CONSTRAINT) if config.bc == "clamped_right_point" else None,
        "environment": {"python": platform.python_version(), "numpy": np.__version__},
        "levels": [],
        "status": "running",
    }
    exact = manufactured_solution() if config.f == "manufactured" else None
    spec = problem_for_level(config)
    norms, n_dofs, h_max = [], [], []
    level = None
    try:
        mesh = build_structured_mesh(config.base_n, config.interface_spec, config.k)
        for level in range(config.levels):
            if level:
                mesh = refine_uniform(mesh)
            if level < config.start_level:
                continue
            mesh = classify_edges(mesh, spec.dirichlet)
            t0 = time.perf_counter()
            system = assemble(mesh, spec)
            t1 = time.perf_counter()
            coef, report = solve(system, method=config.solver, tol=config.tol)
            t2 = time.perf_counter()
            field = SolutionField(mesh, config.k, coef)
            s = dg_norm(field, config.gamma0, config.gamma1)
            record = {
                "level": level,
                "n_elements": mesh.n_elements,
                "n_dofs": system.n,
                "h_max": mesh.h_max(),
                "s": s,
                "solver": report.as_dict(),
                "assemble_time": t1 - t0,
                "solve_time": t2 - t1,
            }
            if exact is not None:
                record["direct_error"] = dg_error(field, exact, config.gamma0, config.gamma1)
            if spec.point_constraint is not None:
                record["point_value"] = field(*mesh.locate(spec.point_constraint[0]))["value"]
            density = None
            if "energy" in config.outputs or "vtk" in config.outputs:
                density = energy_density(field)
                arg = int(np.argmax(density))
                record["energy_max"] = float(density[arg])
                record["energy_argmax_element"] = arg
                record["energy_argmax_centroid"] = mesh.vertices[mesh.elements[arg]].mean(axis=0)
            if "vtk" in config.outputs:
                cells = {"energy_density": density} if "energy" in config.outputs else None
                write_vtk(out / f"level{level}.vtk", mesh, field, cells, title=f"{config.name} level {level}")
            record["analysis_time"] = time.perf_counter() - t2
            manifest["levels"].append(record)
            norms.append(s)
            n_dofs.append(system.n)
            h_max.append(mesh.h_max())
            if log is not None:
                log(f"level {level}: {system.n} dofs, s = {s:.10g}, {report.method} {report.wall_time:.2f}s")
        level = None
        try:
            rows = error_series(norms, n_dofs, h_max, estimate_error=config.homogeneous)
        except ExtrapolationError as exc:
            # e.g. zero data: the norms are valid, only the error estimate is not
            rows = error_series(norms, n_dofs, h_max, estimate_error=False)
            manifest["warnings"] = [f"no error estimate: {exc}"]
        for row in rows:
            row.level += config.start_level
        manifest["rows"] = [{k: _clean(v) for k, v in r.as_dict().items()} | {"flag": r.flag} for r in rows]
        if "csv" in config.outputs:
            write_convergence_csv(rows, out / "convergence.csv")
        manifest["status"] = "ok"
    except Exception as exc:
        manifest["status"] = "error"
        manifest["error"] = {"type": type(exc).__name__, "message": str(exc), "level": level}
        report = getattr(exc, "report", None)
        if report is not None:
            manifest["error"]["solver"] = report.as_dict()
        raise
    finally:
        _write_manifest(out / "manifest.json", manifest)
    return manifest
