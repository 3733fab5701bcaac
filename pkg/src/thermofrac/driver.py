"""Orchestration: build a problem from a configuration and run it to files.

A run writes, in order: the manifest (before any field output), VTK field
snapshots at the configured cadence, the final VTK, the load-displacement CSV
and the report figures.
"""

from __future__ import annotations

import datetime
import logging
import os

from . import __version__, fem, output, report
from .config import RunConfig, serialize
from .errors import ConfigError
from .mesh import Mesh, generate_cruciform, generate_rect, load_gmsh
from .solver import DisplacementBC, Problem, TemperatureBC, run

log = logging.getLogger(__name__)


def build_mesh(cfg: RunConfig) -> Mesh:
    spec = cfg.mesh
    if "gmsh" in spec:
        mesh = load_gmsh(spec["gmsh"])
    else:
        gen = dict(spec["generate"])
        kind = gen.pop("kind")
        try:
            if kind == "rect":
                if "regions" in gen:
                    gen["regions"] = [(name, tuple(box))
                                      for name, box in gen["regions"].items()]
                for key in ("refine_band", "notch"):
                    if key in gen and gen[key] is not None:
                        gen[key] = tuple(gen[key])
                mesh = generate_rect(gen.pop("width"), gen.pop("height"),
                                     gen.pop("h"), **gen)
            else:
                mesh = generate_cruciform(gen.pop("L"), gen.pop("h"),
                                          gen.pop("h_fine"), **gen)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"mesh.generate: bad generator parameters: {exc}") from exc
    if cfg.unit_scale != 1.0:
        mesh = mesh.scaled(cfg.unit_scale)
    return mesh


def build_problem(cfg: RunConfig, mesh: Mesh | None = None) -> Problem:
    mesh = mesh if mesh is not None else build_mesh(cfg)
    disc = fem.Discretization(mesh, cfg.materials)

    for bc in cfg.boundary_conditions:
        mesh.tag_id(bc.tag)  # fail early on unknown tags
    if cfg.output.reaction_tag is not None:
        mesh.tag_id(cfg.output.reaction_tag)

    scale = cfg.unit_scale
    return Problem(
        disc=disc,
        prog=cfg.load,
        staggered=cfg.staggered,
        displacement_bcs=[DisplacementBC(bc.tag, bc.u)
                          for bc in cfg.boundary_conditions
                          if any(c is not None for c in bc.u)],
        temperature_bcs=[TemperatureBC(bc.tag, bc.T)
                         for bc in cfg.boundary_conditions if bc.T is not None],
        pins=[type(p)(at=(p.at[0] * scale, p.at[1] * scale),
                      components=p.components, value=p.value)
              for p in cfg.pins],
        reaction_tag=cfg.output.reaction_tag,
    )


def run_config(cfg: RunConfig, out_dir: str | None = None):
    """Run a configuration and write all outputs.

    Returns (records, final_state, out_dir).
    """
    out = out_dir or cfg.output.dir
    os.makedirs(out, exist_ok=True)
    mesh = build_mesh(cfg)
    problem = build_problem(cfg, mesh)

    planned = {"csv": cfg.output.csv}
    if cfg.output.vtk:
        planned["vtk"] = "fields_<step>.vtk"
    if cfg.output.figures:
        planned["figures"] = ["load_displacement.png", "field_s.png", "field_T.png"]
    output.write_manifest(
        os.path.join(out, "manifest.json"),
        config_json=serialize(cfg),
        mesh=mesh,
        version=__version__,
        started=datetime.datetime.now().astimezone().isoformat(timespec="seconds"),
        summary_csv=cfg.output.csv,
        outputs=planned,
    )

    last = {}

    def snapshot(step_idx, state):
        last["state"] = state
        if cfg.output.vtk:
            path = os.path.join(out, f"fields_{step_idx:06d}.vtk")
            output.write_vtk(mesh, state.u, state.s, state.T, path)
            log.info("wrote %s", path)

    records, _ = run(problem, snapshot_every=cfg.output.cadence, snapshot_cb=snapshot)
    output.write_csv(records, os.path.join(out, cfg.output.csv))

    state = last.get("state")
    if cfg.output.figures and state is not None:
        report.save_load_displacement(records,
                                      os.path.join(out, "load_displacement.png"))
        report.save_field(mesh, state.s, os.path.join(out, "field_s.png"),
                          "phase field s", cmap="RdYlBu", vmin=0.0, vmax=1.0)
        report.save_field(mesh, state.T, os.path.join(out, "field_T.png"),
                          "temperature [K]", cmap="inferno")
    return records, state, out
