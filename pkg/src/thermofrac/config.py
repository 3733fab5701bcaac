"""Run configuration: strict JSON schema, validation and serialization.

A configuration names the mesh source, per-region materials, boundary
conditions, the load program, staggered-solver settings and output options.
Validation is strict: unknown keys are rejected and every error names the
offending dotted key path. Geometry may be given in any unit via
``unit_scale`` (the factor converting mesh coordinates to meters); material
parameters are always SI.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError
from .materials import ElasticLaw, FractureLaw, Material, ThermalLaw
from .solver import LoadProgram, Pin, StaggeredConfig

_MISSING = object()


@dataclass(frozen=True)
class BoundaryCondition:
    """Per-tag constraint: displacement components and temperature source.

    Each displacement component is None (free), a number (fixed), or
    ("ramp", scale) following the applied displacement. The temperature is
    None (natural), a number (fixed), "reference" (T0), or ("ramp", scale)
    giving T0 + scale * (TApp - T0).
    """

    tag: str
    u: tuple = (None, None)
    T: object = None


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    cadence: int = 10
    vtk: bool = True
    figures: bool = True
    csv: str = "load_displacement.csv"
    reaction_tag: str | None = "TopEdge"


@dataclass(frozen=True)
class RunConfig:
    mesh: dict
    materials: dict
    boundary_conditions: tuple
    load: LoadProgram
    staggered: StaggeredConfig = field(default_factory=StaggeredConfig)
    pins: tuple = ()
    unit_scale: float = 1.0
    output: OutputConfig = field(default_factory=OutputConfig)


def _fail(path, msg):
    raise ConfigError(f"{path}: {msg}")


def _get(obj, key, path, kind=None, default=_MISSING):
    if key not in obj:
        if default is _MISSING:
            _fail(f"{path}.{key}" if path else key, "missing required key")
        return default
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        if kind is float and isinstance(val, int) and not isinstance(val, bool):
            return float(val)
        names = kind.__name__ if not isinstance(kind, tuple) else \
            "/".join(k.__name__ for k in kind)
        _fail(f"{path}.{key}" if path else key, f"expected {names}, got {type(val).__name__}")
    return val


def _no_unknown(obj, allowed, path):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        _fail(f"{path}.{extra[0]}" if path else extra[0], "unknown key (strict mode)")


def _parse_material(obj, path):
    _no_unknown(obj, ("elastic", "thermal", "fracture", "degrade_k"), path)
    el = _get(obj, "elastic", path, dict)
    _no_unknown(el, ("E", "nu", "mode"), f"{path}.elastic")
    th = _get(obj, "thermal", path, dict)
    _no_unknown(th, ("k0", "rho", "c", "alpha", "T0"), f"{path}.thermal")
    fr = _get(obj, "fracture", path, dict)
    _no_unknown(fr, ("Gc", "ls", "eta"), f"{path}.fracture")
    try:
        elastic = ElasticLaw(
            E=_get(el, "E", f"{path}.elastic", float),
            nu=_get(el, "nu", f"{path}.elastic", float),
            mode=_get(el, "mode", f"{path}.elastic", str, default="plane_strain"),
        )
        thermal = ThermalLaw(
            k0=_get(th, "k0", f"{path}.thermal", float),
            rho=_get(th, "rho", f"{path}.thermal", float),
            c=_get(th, "c", f"{path}.thermal", float),
            alpha=_get(th, "alpha", f"{path}.thermal", float),
            T0=_get(th, "T0", f"{path}.thermal", float),
        )
        fracture = FractureLaw(
            Gc=_get(fr, "Gc", f"{path}.fracture", float),
            ls=_get(fr, "ls", f"{path}.fracture", float),
            eta=_get(fr, "eta", f"{path}.fracture", float, default=1e-8),
        )
    except ValueError as exc:
        _fail(path, str(exc))
    return Material(elastic, thermal, fracture,
                    degrade_k=_get(obj, "degrade_k", path, bool, default=True))


def _parse_u_component(val, path):
    if val is None or isinstance(val, (int, float)) and not isinstance(val, bool):
        return None if val is None else float(val)
    if val == "ramp":
        return ("ramp", 1.0)
    if isinstance(val, dict) and set(val) == {"ramp"}:
        return ("ramp", float(val["ramp"]))
    _fail(path, f"expected null, number, \"ramp\" or {{\"ramp\": scale}}, got {val!r}")


def _parse_T(val, path):
    if val is None or val == "reference":
        return val
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if val == "ramp":
        return ("ramp", 1.0)
    if isinstance(val, dict):
        _no_unknown(val, ("kind", "scale"), path)
        if _get(val, "kind", path, str) != "ramp":
            _fail(f"{path}.kind", "only \"ramp\" is supported")
        return ("ramp", _get(val, "scale", path, float, default=1.0))
    _fail(path, f"expected null, number, \"reference\", \"ramp\" or ramp object, got {val!r}")


def _parse_bc(obj, path):
    _no_unknown(obj, ("tag", "u", "T"), path)
    tag = _get(obj, "tag", path, str)
    u_raw = _get(obj, "u", path, list, default=[None, None])
    if len(u_raw) != 2:
        _fail(f"{path}.u", "expected two displacement components")
    u = tuple(_parse_u_component(v, f"{path}.u[{i}]") for i, v in enumerate(u_raw))
    T = _parse_T(_get(obj, "T", path, default=None), f"{path}.T")
    return BoundaryCondition(tag=tag, u=u, T=T)


def _parse_pin(obj, path):
    _no_unknown(obj, ("at", "components", "value"), path)
    at = _get(obj, "at", path, list)
    if len(at) != 2:
        _fail(f"{path}.at", "expected a coordinate pair")
    comps = tuple(int(c) for c in _get(obj, "components", path, list))
    if not comps or any(c not in (0, 1) for c in comps):
        _fail(f"{path}.components", "components must be 0 and/or 1")
    return Pin(at=(float(at[0]), float(at[1])), components=comps,
               value=_get(obj, "value", path, float, default=0.0))


def parse_config(source, overrides=None) -> RunConfig:
    """Parse and validate a JSON configuration (text, dict or file path)."""
    if isinstance(source, dict):
        raw = json.loads(json.dumps(source))
    else:
        text = source
        if isinstance(source, str) and not source.lstrip().startswith("{"):
            with open(source) as fh:
                text = fh.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object")

    for key, value in overrides or []:
        _apply_override(raw, key, value)

    _no_unknown(raw, ("mesh", "unit_scale", "materials", "boundary_conditions",
                      "pins", "load", "staggered", "output"), "")

    mesh = _get(raw, "mesh", "", dict)
    if set(mesh) not in ({"gmsh"}, {"generate"}):
        _fail("mesh", "expected exactly one of \"gmsh\" or \"generate\"")
    if "generate" in mesh:
        gen = _get(mesh, "generate", "mesh", dict)
        kind = _get(gen, "kind", "mesh.generate", str)
        if kind not in ("rect", "cruciform"):
            _fail("mesh.generate.kind", f"unknown generator {kind!r}")

    unit_scale = _get(raw, "unit_scale", "", float, default=1.0)
    if unit_scale <= 0:
        _fail("unit_scale", "must be positive")

    mats_raw = _get(raw, "materials", "", dict)
    if not mats_raw:
        _fail("materials", "at least one region is required")
    materials = {name: _parse_material(spec, f"materials.{name}")
                 for name, spec in mats_raw.items()}
    t0s = {m.thermal.T0 for m in materials.values()}
    if len(t0s) > 1:
        _fail("materials", f"all regions must share one reference temperature, got {sorted(t0s)}")
    T0 = t0s.pop()

    bcs = tuple(_parse_bc(b, f"boundary_conditions[{i}]")
                for i, b in enumerate(_get(raw, "boundary_conditions", "", list,
                                           default=[])))
    pins = tuple(_parse_pin(p, f"pins[{i}]")
                 for i, p in enumerate(_get(raw, "pins", "", list, default=[])))

    ld = _get(raw, "load", "", dict)
    _no_unknown(ld, ("uMax", "tMax", "delt", "uTran", "TAppMax", "ramp", "T_end"), "load")
    uMax = _get(ld, "uMax", "load", float)
    try:
        load = LoadProgram(
            uMax=uMax,
            tMax=_get(ld, "tMax", "load", float),
            delt=_get(ld, "delt", "load", float),
            T0=T0,
            TAppMax=_get(ld, "TAppMax", "load", float, default=T0),
            uTran=_get(ld, "uTran", "load", float, default=0.2 * uMax),
            ramp_kind=_get(ld, "ramp", "load", str, default="none"),
            T_end=_get(ld, "T_end", "load", float, default=None),
        )
    except ValueError as exc:
        _fail("load", str(exc))

    st = _get(raw, "staggered", "", dict, default={})
    _no_unknown(st, ("tol", "innerMax"), "staggered")
    try:
        staggered = StaggeredConfig(
            tol=_get(st, "tol", "staggered", float, default=1e-8),
            innerMax=int(_get(st, "innerMax", "staggered", int, default=10)),
        )
    except ValueError as exc:
        _fail("staggered", str(exc))

    out = _get(raw, "output", "", dict, default={})
    _no_unknown(out, ("dir", "cadence", "vtk", "figures", "csv", "reaction_tag"), "output")
    output = OutputConfig(
        dir=_get(out, "dir", "output", str, default="out"),
        cadence=int(_get(out, "cadence", "output", int, default=10)),
        vtk=_get(out, "vtk", "output", bool, default=True),
        figures=_get(out, "figures", "output", bool, default=True),
        csv=_get(out, "csv", "output", str, default="load_displacement.csv"),
        reaction_tag=_get(out, "reaction_tag", "output", (str, type(None)),
                          default="TopEdge"),
    )

    return RunConfig(mesh=mesh, materials=materials, boundary_conditions=bcs,
                     load=load, staggered=staggered, pins=pins,
                     unit_scale=unit_scale, output=output)


def _apply_override(raw: dict, dotted: str, value):
    """Set a dotted path in the raw dict, parsing the value as JSON."""
    try:
        parsed = json.loads(value) if isinstance(value, str) else value
    except json.JSONDecodeError:
        parsed = value
    node = raw
    parts = dotted.split(".")
    for part in parts[:-1]:
        nxt = node.get(part)
        if not isinstance(nxt, dict):
            nxt = {}
            node[part] = nxt
        node = nxt
    node[parts[-1]] = parsed


def _u_component_json(spec):
    if spec is None or isinstance(spec, float):
        return spec
    kind, scale = spec
    return "ramp" if scale == 1.0 else {"ramp": scale}


def _T_json(spec):
    if spec is None or spec == "reference" or isinstance(spec, float):
        return spec
    kind, scale = spec
    return "ramp" if scale == 1.0 else {"kind": "ramp", "scale": scale}


def serialize(cfg: RunConfig) -> str:
    """JSON text whose parse reproduces the configuration exactly."""
    mats = {}
    for name, m in cfg.materials.items():
        mats[name] = {
            "elastic": {"E": m.elastic.E, "nu": m.elastic.nu, "mode": m.elastic.mode},
            "thermal": {"k0": m.thermal.k0, "rho": m.thermal.rho, "c": m.thermal.c,
                        "alpha": m.thermal.alpha, "T0": m.thermal.T0},
            "fracture": {"Gc": m.fracture.Gc, "ls": m.fracture.ls,
                         "eta": m.fracture.eta},
            "degrade_k": m.degrade_k,
        }
    doc = {
        "mesh": cfg.mesh,
        "unit_scale": cfg.unit_scale,
        "materials": mats,
        "boundary_conditions": [
            {"tag": bc.tag, "u": [_u_component_json(c) for c in bc.u],
             "T": _T_json(bc.T)}
            for bc in cfg.boundary_conditions
        ],
        "pins": [
            {"at": list(p.at), "components": list(p.components), "value": p.value}
            for p in cfg.pins
        ],
        "load": {
            "uMax": cfg.load.uMax, "tMax": cfg.load.tMax, "delt": cfg.load.delt,
            "uTran": cfg.load.uTran, "TAppMax": cfg.load.TAppMax,
            "ramp": cfg.load.ramp_kind,
            **({"T_end": cfg.load.T_end} if cfg.load.T_end is not None else {}),
        },
        "staggered": {"tol": cfg.staggered.tol, "innerMax": cfg.staggered.innerMax},
        "output": {"dir": cfg.output.dir, "cadence": cfg.output.cadence,
                   "vtk": cfg.output.vtk, "figures": cfg.output.figures,
                   "csv": cfg.output.csv, "reaction_tag": cfg.output.reaction_tag},
    }
    return json.dumps(doc, indent=2)
