"""Command line runner: JSON config in, result files out.

    freesurf --config run.json [--output DIR] [--end-time T] [--write-interval T] [--validate-only]

Exit status: 0 success, 1 solver failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional


from . import io
from .expr import ExprSyntaxError, UnknownIdentifierError, parse
from .mesh import Mesh, MeshError, parse_msh, uniform_interval
from .model import (
    MAX_LEVEL,
    ModelDef,
    ModelError,
    extrapolation,
    periodic,
    poisson_model,
    prescribe,
    sme_model,
    swe_model,
    vam_models,
)
from .solver import (
    GmresSettings,
    NewtonSettings,
    SolverSettings,
    snapshot,
    steady_residual_solve,
    transient_hyperbolic_solve,
    vam_solve,
)

MODELS = ("swe", "sme", "vam", "poisson")
SOLVERS = {"swe": "transient", "sme": "transient", "vam": "vam", "poisson": "steady"}
FORMATS = ("vtk", "csv", "lifted_vtk", "checkpoint")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` is the dotted path of the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass
class RunConfig:
    """A validated run: built model(s), mesh, settings and output choices."""

    model: ModelDef
    mesh: Mesh
    solver_type: str
    settings: SolverSettings
    out_dir: Path
    formats: List[str]
    nz: int = 10
    corrector: Optional[ModelDef] = None
    raw: Dict[str, Any] = field(default_factory=dict)


def _get(d, key, path, kind=None, default=...):
    if not isinstance(d, dict):
        raise ConfigError(path, "expected an object")
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing required key")
        return default
    v = d[key]
    numeric = kind in (int, float, (int, float))
    if kind is not None and (not isinstance(v, kind) or numeric and isinstance(v, bool)):
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {_kind_name(kind)}, got {v!r}")
    return v


def _kind_name(kind):
    names = {str: "a string", int: "an integer", float: "a number", list: "a list", dict: "an object"}
    if isinstance(kind, tuple):
        return " or ".join(names.get(k, k.__name__) for k in kind)
    return names.get(kind, kind.__name__)


def _expr(text, layout, key):
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return text
    if not isinstance(text, str):
        raise ConfigError(key, f"expected an expression string, got {text!r}")
    try:
        return parse(text, layout)
    except UnknownIdentifierError as exc:
        raise ConfigError(key, f"unknown identifier {exc.name!r} at position {exc.offset} in {text!r}") from None
    except ExprSyntaxError as exc:
        raise ConfigError(key, f"{exc} in {text!r}") from None


def _build_model(cfg):
    m = _get(cfg, "model", "")
    name = _get(m, "name", "model", str)
    if name not in MODELS:
        raise ConfigError("model.name", f"unknown model {name!r}; choose from {', '.join(MODELS)}")
    dim = _get(m, "dimension", "model", int, 1)
    if dim not in (1, 2):
        raise ConfigError("model.dimension", f"must be 1 or 2, got {dim}")
    params = _get(m, "parameters", "model", dict, {})
    corrector = None
    if name == "swe":
        model = swe_model(dim)
    elif name == "sme":
        level = _get(m, "level", "model", int)
        if not 0 <= level <= MAX_LEVEL:
            raise ConfigError("model.level", f"must lie in [0, {MAX_LEVEL}], got {level}")
        model = sme_model(dim, level)
    elif name == "vam":
        if dim != 1:
            raise ConfigError("model.dimension", "the vam model is one-dimensional")
        model, corrector = vam_models()
    else:
        if dim != 1:
            raise ConfigError("model.dimension", "the poisson model is one-dimensional")
        model = poisson_model()
    known = dict(model.layout.params)
    for k, v in params.items():
        if k not in known:
            raise ConfigError(f"model.parameters.{k}",
                              f"unknown parameter; {model.name} has {', '.join(known) or 'none'}")
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"model.parameters.{k}", f"expected a number, got {v!r}")
    model = model.with_params(**params)
    if corrector is not None and "g" in params:
        corrector = corrector.with_params(g=params["g"])
    return model, corrector


def _build_mesh(cfg, base: Path) -> Mesh:
    m = _get(cfg, "mesh", "")
    kind = _get(m, "kind", "mesh", str)
    if kind == "interval":
        a = _get(m, "a", "mesh", (int, float))
        b = _get(m, "b", "mesh", (int, float))
        n = _get(m, "n", "mesh", int)
        if not a < b:
            raise ConfigError("mesh.b", f"need a < b, got a={a}, b={b}")
        if n < 1:
            raise ConfigError("mesh.n", f"need at least one cell, got {n}")
        return uniform_interval(a, b, n, _get(m, "left_tag", "mesh", str, "left"),
                                _get(m, "right_tag", "mesh", str, "right"))
    if kind == "msh":
        path = Path(_get(m, "path", "mesh", str))
        if not path.is_absolute():
            path = base / path
        if not path.exists():
            raise ConfigError("mesh.path", f"file not found: {path}")
        try:
            return parse_msh(path)
        except MeshError as exc:
            raise ConfigError("mesh.path", str(exc)) from None
    raise ConfigError("mesh.kind", f"expected 'interval' or 'msh', got {kind!r}")


def _build_bcs(cfg, model: ModelDef, mesh: Mesh):
    items = _get(cfg, "bcs", "", list)
    bcs = []
    for i, b in enumerate(items):
        key = f"bcs[{i}]"
        tag = _get(b, "tag", key, str)
        kind = _get(b, "type", key, str)
        if kind == "extrapolation":
            bcs.append(extrapolation(tag))
        elif kind == "periodic":
            bcs.append(periodic(tag, _get(b, "partner", key, str)))
        elif kind == "prescribe":
            vals = _get(b, "values", key, dict)
            out = {}
            for k, text in vals.items():
                try:
                    idx = int(k)
                except ValueError:
                    if k not in model.field_names:
                        raise ConfigError(f"{key}.values.{k}", "not a field index or field name") from None
                    idx = model.field_names.index(k)
                if not 0 <= idx < model.n_fields:
                    raise ConfigError(f"{key}.values.{k}", f"field index out of range 0..{model.n_fields - 1}")
                out[idx] = _expr(text, model.layout, f"{key}.values.{k}")
            bcs.append(prescribe(tag, out))
        else:
            raise ConfigError(f"{key}.type", f"expected extrapolation, periodic or prescribe, got {kind!r}")
    given = [b.tag for b in bcs]
    if len(set(given)) != len(given):
        raise ConfigError("bcs", f"duplicate tags in {given}")
    if set(given) != set(mesh.tags):
        raise ConfigError("bcs", f"boundary tags {sorted(set(given))} do not match mesh tags {sorted(mesh.tags)}")
    for b in bcs:
        if b.kind == "periodic" and b.partner not in given:
            raise ConfigError("bcs", f"periodic partner {b.partner!r} of {b.tag!r} has no entry")
    return bcs


def _corrector_bcs(bcs):
    """Pressure keeps periodic pairs; every other boundary extrapolates."""
    return [b if b.kind == "periodic" else extrapolation(b.tag) for b in bcs]


def _build_settings(cfg, model_name: str, args) -> tuple:
    s = _get(cfg, "solver", "", dict, {})
    expect = SOLVERS[model_name]
    stype = _get(s, "type", "solver", str, expect)
    if stype != expect:
        raise ConfigError("solver.type", f"model {model_name} needs solver type {expect!r}, got {stype!r}")
    kw = {}
    for key, kind in (("cfl", (int, float)), ("t_end", (int, float)), ("output_interval", (int, float)),
                      ("fixed_dt", (int, float)), ("max_steps", int)):
        if key in s:
            kw[key] = _get(s, key, "solver", kind)
    if "implicit_source" in s:
        kw["implicit_source"] = bool(s["implicit_source"])
    if args is not None and args.end_time is not None:
        kw["t_end"] = args.end_time
    if args is not None and args.write_interval is not None:
        kw["output_interval"] = args.write_interval
    try:
        newton = NewtonSettings(**_get(s, "newton", "solver", dict, {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver.newton", str(exc)) from None
    try:
        gmres = GmresSettings(**_get(s, "gmres", "solver", dict, {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError("solver.gmres", str(exc)) from None
    try:
        settings = SolverSettings(newton=newton, gmres=gmres, **kw)
    except ValueError as exc:
        raise ConfigError("solver", str(exc)) from None
    return stype, settings


def load_config(path, args=None) -> RunConfig:
    """Read, validate and build everything a run needs. Raises ConfigError."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError("--config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("--config", "top level must be an object")
    model, corrector = _build_model(raw)
    mesh = _build_mesh(raw, path.parent)
    if mesh.dimension != model.dimension:
        raise ConfigError("mesh", f"mesh is {mesh.dimension}D but model.dimension is {model.dimension}")
    bcs = _build_bcs(raw, model, mesh)
    model = model.with_bcs(*bcs)
    if corrector is not None:
        corrector = corrector.with_bcs(*_corrector_bcs(bcs))
    if "ic" in raw:
        ic = _get(raw, "ic", "", list)
        if len(ic) != model.n_fields:
            raise ConfigError("ic", f"expected {model.n_fields} expressions ({', '.join(model.field_names)}), got {len(ic)}")
        model = model.with_initial_condition([_expr(e, model.layout, f"ic[{i}]") for i, e in enumerate(ic)])
    if "aux_ic" in raw:
        aux = list(model.aux_initial)
        for k, e in _get(raw, "aux_ic", "", dict).items():
            if k not in model.aux_names:
                raise ConfigError(f"aux_ic.{k}", f"unknown aux field; {model.name} has {', '.join(model.aux_names)}")
            aux[model.aux_names.index(k)] = _expr(e, model.layout, f"aux_ic.{k}")
        model = model.replace(aux_initial=tuple(aux))
    stype, settings = _build_settings(raw, raw["model"]["name"], args)
    out = _get(raw, "output", "", dict, {})
    out_dir = Path(_get(out, "dir", "output", str, "output"))
    if args is not None and args.output is not None:
        out_dir = Path(args.output)
    formats = _get(out, "formats", "output", list, ["csv"] if model.dimension == 1 else ["vtk"])
    for i, f in enumerate(formats):
        if f not in FORMATS:
            raise ConfigError(f"output.formats[{i}]", f"unknown format {f!r}; choose from {', '.join(FORMATS)}")
    if "vtk" in formats and model.dimension != 2:
        raise ConfigError("output.formats", "vtk cell output needs a 2D mesh; use csv in 1D")
    if "csv" in formats and model.dimension != 1:
        raise ConfigError("output.formats", "csv output needs a 1D mesh; use vtk in 2D")
    if "lifted_vtk" in formats and model.lift is None:
        raise ConfigError("output.formats", f"model {model.name} has no lifting map")
    nz = _get(out, "nz", "output", int, 10)
    if nz < 2:
        raise ConfigError("output.nz", f"need at least 2 levels, got {nz}")
    return RunConfig(model, mesh, stype, settings, out_dir, list(formats), nz, corrector, raw)


def layout_report(rc: RunConfig) -> str:
    m = rc.model
    lines = [
        f"model   {m.name} ({m.dimension}D)",
        f"fields  {', '.join(m.field_names)}",
        f"aux     {', '.join(m.aux_names) or '-'}",
        "params  " + (", ".join(f"{k}={v:g}" for k, v in m.layout.params) or "-"),
        f"mesh    {rc.mesh.n_inner} cells, {rc.mesh.n_ghost} ghosts, tags {', '.join(rc.mesh.tags)}",
        f"solver  {rc.solver_type}",
    ]
    if rc.corrector is not None:
        c = rc.corrector
        lines.append(f"corrector fields {', '.join(c.field_names)}; aux {', '.join(c.aux_names)}")
    return "\n".join(lines)


class Writer:
    """io sink writing one numbered file per snapshot in each requested format."""

    def __init__(self, rc: RunConfig):
        self.rc = rc
        self.count = 0
        rc.out_dir.mkdir(parents=True, exist_ok=True)

    def __call__(self, snap):
        rc, stem = self.rc, f"{self.rc.model.name}_{self.count:05d}"
        if "csv" in rc.formats:
            io.write_csv_1d(rc.mesh, snap, rc.out_dir / f"{stem}.csv")
        if "vtk" in rc.formats:
            io.write_vtk(rc.mesh, snap, rc.out_dir / f"{stem}.vtk")
        if "lifted_vtk" in rc.formats:
            io.write_lifted_vtk(rc.mesh, rc.model, snap, rc.nz, rc.out_dir / f"{stem}_3d.vtk")
        self.count += 1


def execute(rc: RunConfig, log=print):
    sink = Writer(rc)
    t0 = time.perf_counter()
    if rc.solver_type == "transient":
        res = transient_hyperbolic_solve(rc.mesh, rc.model, rc.settings, sink, log=log)
    elif rc.solver_type == "vam":
        res = vam_solve(rc.mesh, rc.model, rc.corrector, rc.settings, sink, log=log)
    else:
        res = steady_residual_solve(rc.mesh, rc.model, rc.settings)
        for r in res.newton.history:
            log(f"newton  |R| = {r:.3e}")
        sink(snapshot(rc.model, rc.mesh, 0.0, res.step, res.Q, res.Qaux))
    if "checkpoint" in rc.formats:
        io.checkpoint_write(io.SolverState.of(rc.model, rc.mesh, res.Q, res.Qaux), res.t, res.step,
                            rc.out_dir / f"{rc.model.name}.ckpt")
    wall = time.perf_counter() - t0
    log(f"done: t={res.t:.6g}, {res.step} steps, {sink.count} snapshots in {rc.out_dir}, wall {wall:.2f} s")
    return res


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freesurf", description="Run a depth-averaged flow simulation from a JSON config.")
    p.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    p.add_argument("--output", metavar="DIR", help="override output.dir")
    p.add_argument("--end-time", type=float, metavar="T", help="override solver.t_end")
    p.add_argument("--write-interval", type=float, metavar="T", help="override solver.output_interval")
    p.add_argument("--validate-only", action="store_true", help="check the config and print the layout")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)  # argparse exits with 2 on bad flags
    try:
        rc = load_config(args.config, args)
    except (ConfigError, ModelError, MeshError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    if args.validate_only:
        print("OK")
        print(layout_report(rc))
        return 0
    try:
        execute(rc)
    except Exception as exc:  # solver and io failures
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
