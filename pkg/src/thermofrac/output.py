"""File outputs: legacy VTK fields, the load-displacement CSV and the manifest.

All files are written atomically (temporary file in the target directory, then
rename). Floats are printed with 17 significant digits so values survive a
write/parse round trip bit-identically.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .mesh import Mesh
from .solver import RunRecord

CSV_HEADER = "t,u_app,T_app,Fx,Fy,inner_iters,rel_err"


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_vtk(mesh: Mesh, u: np.ndarray, s: np.ndarray, T: np.ndarray, path: str):
    """Legacy ASCII UNSTRUCTURED_GRID with point data u (3-vector, z = 0),
    s and T."""
    n = len(mesh.nodes)
    u = np.asarray(u, dtype=float)
    s = np.asarray(s, dtype=float)
    T = np.asarray(T, dtype=float)
    if u.shape != (n, 2):
        raise ValueError(f"displacement field has shape {u.shape}, expected ({n}, 2)")
    for name, f in (("s", s), ("T", T)):
        if f.shape != (n,):
            raise ValueError(f"field {name!r} has length {f.shape}, expected ({n},)")

    lines = [
        "# vtk DataFile Version 3.0",
        "thermofrac fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    lines.extend(f"{_fmt(x)} {_fmt(y)} 0" for x, y in mesh.nodes)
    ne = len(mesh.elements)
    lines.append(f"CELLS {ne} {4 * ne}")
    lines.extend(f"3 {a} {b} {c}" for a, b, c in mesh.elements)
    lines.append(f"CELL_TYPES {ne}")
    lines.extend("5" for _ in range(ne))
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS u double")
    lines.extend(f"{_fmt(ux)} {_fmt(uy)} 0" for ux, uy in u)
    for name, f in (("s", s), ("T", T)):
        lines.append(f"SCALARS {name} double")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(v) for v in f)
    _atomic_write(path, "\n".join(lines) + "\n")


def write_csv(records: list[RunRecord], path: str):
    """One row per record under the fixed header; the leading zero row is the
    caller-provided first record."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(",".join([
            _fmt(r.t), _fmt(r.u_app), _fmt(r.T_app), _fmt(r.Fx), _fmt(r.Fy),
            str(int(r.inner_iters)), _fmt(r.rel_err),
        ]))
    _atomic_write(path, "\n".join(lines) + "\n")


def read_csv(path: str) -> dict[str, np.ndarray]:
    """Columns of a load-displacement CSV keyed by header name."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    data = np.array(rows, dtype=float)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_manifest(path: str, *, config_json: str, mesh: Mesh, version: str,
                   started: str, summary_csv: str, outputs: dict | None = None):
    """Run manifest: config echo, code version, mesh statistics, the
    wall-clock start stamp and the per-step summary reference. Written once,
    before any field output."""
    doc = {
        "version": version,
        "started": started,
        "mesh": mesh.info(),
        "summary_csv": summary_csv,
        "outputs": outputs or {},
        "config": json.loads(config_json),
    }
    _atomic_write(path, json.dumps(doc, indent=2) + "\n")
