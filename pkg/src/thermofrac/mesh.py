"""Triangle meshes: Gmsh MSH 2.2 I/O and parametric benchmark geometries.

Meshes hold 3-node triangles with a per-element region tag and tagged boundary
edges. Node ids are dense, elements are counter-clockwise, and a shared tag
table maps physical names (``"TopEdge"``, ``"Notch"``, region names) to ids.

The generators build tensor-product grids whose axes are graded geometrically
into refinement bands, so local refinement never creates hanging nodes. Notches
are cut geometrically by removing elements; for axis-aligned notches the grid
is snapped to the notch rectangle, making the removed area exact.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import MeshError, MeshParseError

_GEOM_TOL = 1e-9


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass
class Mesh:
    """Immutable triangulation with boundary and region tags.

    Attributes:
        nodes: (N, 2) coordinates.
        elements: (E, 3) node ids, counter-clockwise.
        regions: (E,) region tag id per element.
        boundary_edges: (B, 2) node ids of tagged boundary edges.
        boundary_tags: (B,) tag id per boundary edge.
        tag_table: physical name -> tag id (regions and boundaries share it).
    """

    nodes: np.ndarray
    elements: np.ndarray
    regions: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    tag_table: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.elements = np.ascontiguousarray(self.elements, dtype=np.int64)
        self.regions = np.ascontiguousarray(self.regions, dtype=np.int64)
        self.boundary_edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        self.boundary_tags = np.asarray(self.boundary_tags, dtype=np.int64).reshape(-1)
        self._validate()

    # -- validation -----------------------------------------------------------

    def _validate(self):
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise MeshError("nodes must be an (N, 2) array")
        if not np.all(np.isfinite(self.nodes)):
            raise MeshError("node coordinates must be finite")
        n = len(self.nodes)
        for name, arr in (("element", self.elements), ("boundary edge", self.boundary_edges)):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise MeshError(f"{name} references node id outside 0..{n - 1}")
        if len(self.regions) != len(self.elements):
            raise MeshError("regions must have one entry per element")
        if len(self.boundary_tags) != len(self.boundary_edges):
            raise MeshError("boundary_tags must have one entry per boundary edge")

        self._check_duplicate_nodes()
        self._fix_orientation()
        self._check_boundary_incidence()

    def _check_duplicate_nodes(self):
        if len(self.nodes) < 2:
            return
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0)
        diag = float(np.hypot(*span))
        tol = 1e-12 * max(diag, 1e-300)
        pairs = cKDTree(self.nodes).query_pairs(tol)
        if pairs:
            a, b = sorted(pairs)[0]
            raise MeshError(f"duplicate node coordinates: nodes {a} and {b}")

    def _fix_orientation(self):
        if not len(self.elements):
            return
        p = self.nodes[self.elements]
        two_a = _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        flip = two_a < 0
        if flip.any():
            self.elements[flip] = self.elements[flip][:, [0, 2, 1]]
            two_a = np.abs(two_a)
        span = self.nodes.max(axis=0) - self.nodes.min(axis=0) if len(self.nodes) else (1, 1)
        scale = max(float(span[0]) * float(span[1]), 1e-300)
        if np.any(two_a <= 1e-14 * scale):
            bad = int(np.argmin(two_a))
            raise MeshError(f"element {bad} is degenerate (zero area)")

    def _check_boundary_incidence(self):
        counts = self.edge_counts()
        for i, (a, b) in enumerate(self.boundary_edges):
            key = (min(a, b), max(a, b))
            c = counts.get(key, 0)
            if c != 1:
                raise MeshError(
                    f"boundary edge {i} ({a},{b}) touches {c} elements, expected 1"
                )

    # -- queries --------------------------------------------------------------

    def edge_counts(self) -> dict[tuple[int, int], int]:
        """Number of incident triangles for every element edge."""
        counts: dict[tuple[int, int], int] = {}
        for tri in self.elements:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                counts[key] = counts.get(key, 0) + 1
        return counts

    def areas(self) -> np.ndarray:
        p = self.nodes[self.elements]
        return 0.5 * _cross2(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def total_area(self) -> float:
        return float(self.areas().sum())

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    def tag_id(self, name: str) -> int:
        try:
            return self.tag_table[name]
        except KeyError:
            known = ", ".join(sorted(self.tag_table)) or "<none>"
            raise MeshError(f"unknown tag {name!r}; known tags: {known}") from None

    def scaled(self, factor: float) -> "Mesh":
        """Copy of the mesh with all coordinates multiplied by ``factor``."""
        return Mesh(self.nodes * factor, self.elements.copy(), self.regions.copy(),
                    self.boundary_edges.copy(), self.boundary_tags.copy(),
                    dict(self.tag_table))

    def info(self) -> dict:
        lo, hi = self.bbox()
        return {
            "nodes": len(self.nodes),
            "elements": len(self.elements),
            "boundary_edges": len(self.boundary_edges),
            "tags": dict(sorted(self.tag_table.items())),
            "bbox": [list(map(float, lo)), list(map(float, hi))],
            "area": self.total_area(),
        }


def boundary_nodes(mesh: Mesh, tag_name: str) -> np.ndarray:
    """Sorted ids of all nodes incident to boundary edges carrying the tag."""
    tid = mesh.tag_id(tag_name)
    sel = mesh.boundary_edges[mesh.boundary_tags == tid]
    return np.unique(sel)


# -- Gmsh MSH 2.2 ASCII -------------------------------------------------------


def load_gmsh(source) -> Mesh:
    """Read a Gmsh MSH 2.2 ASCII file (path, text, or file-like).

    Supported blocks: $MeshFormat, $PhysicalNames, $Nodes, $Elements with
    element types 1 (boundary line) and 2 (triangle); point elements (type 15)
    are ignored.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    elif isinstance(source, str) and "\n" in source:
        lines = source.splitlines()
    else:
        with open(source, "r") as fh:
            lines = fh.read().splitlines()

    sections: dict[str, tuple[int, list[str]]] = {}
    i = 0
    while i < len(lines):
        token = lines[i].strip()
        if token.startswith("$") and not token.startswith("$End"):
            name = token[1:]
            end = f"$End{name}"
            body = []
            j = i + 1
            while j < len(lines) and lines[j].strip() != end:
                body.append((j + 1, lines[j]))
                j += 1
            if j >= len(lines):
                raise MeshParseError(f"section ${name} is not closed", line=i + 1)
            sections[name] = (i + 1, body)
            i = j + 1
        else:
            i += 1

    if "MeshFormat" not in sections:
        raise MeshParseError("missing $MeshFormat section", line=1)
    fmt_line, fmt_body = sections["MeshFormat"]
    if not fmt_body:
        raise MeshParseError("empty $MeshFormat section", line=fmt_line)
    version = fmt_body[0][1].split()
    if not version or version[0] != "2.2":
        raise MeshParseError(
            f"unsupported MSH version {version[0] if version else '?'}; only 2.2 ASCII",
            line=fmt_body[0][0],
        )

    tag_table: dict[str, int] = {}
    if "PhysicalNames" in sections:
        _, body = sections["PhysicalNames"]
        for lineno, text in body[1:]:
            parts = text.split(maxsplit=2)
            if len(parts) < 3:
                raise MeshParseError("malformed physical name record", line=lineno)
            tag_table[parts[2].strip().strip('"')] = int(parts[1])

    if "Nodes" not in sections:
        raise MeshParseError("missing $Nodes section", line=1)
    _, body = sections["Nodes"]
    if not body:
        raise MeshParseError("empty $Nodes section", line=sections["Nodes"][0])
    id_map: dict[int, int] = {}
    coords = []
    for lineno, text in body[1:]:
        parts = text.split()
        if len(parts) < 3:
            raise MeshParseError("malformed node record", line=lineno)
        id_map[int(parts[0])] = len(coords)
        coords.append((float(parts[1]), float(parts[2])))

    if "Elements" not in sections:
        raise MeshParseError("missing $Elements section", line=1)
    _, body = sections["Elements"]
    tris, tri_tags, edges, edge_tags = [], [], [], []
    for lineno, text in body[1:]:
        parts = text.split()
        if len(parts) < 3:
            raise MeshParseError("malformed element record", line=lineno)
        etype = int(parts[1])
        ntags = int(parts[2])
        phys = int(parts[3]) if ntags >= 1 else 0
        conn = parts[3 + ntags:]
        if etype == 15:
            continue
        if etype not in (1, 2):
            raise MeshParseError(f"unsupported element type {etype}", line=lineno)
        want = 2 if etype == 1 else 3
        if len(conn) != want:
            raise MeshParseError(
                f"element type {etype} expects {want} nodes, got {len(conn)}", line=lineno
            )
        try:
            ids = [id_map[int(c)] for c in conn]
        except KeyError as exc:
            raise MeshParseError(
                f"element references undefined node {exc.args[0]}", line=lineno
            ) from None
        if etype == 1:
            edges.append(ids)
            edge_tags.append(phys)
        else:
            tris.append(ids)
            tri_tags.append(phys)

    if not tris:
        raise MeshParseError("mesh contains no triangles", line=sections["Elements"][0])

    return Mesh(
        nodes=np.array(coords),
        elements=np.array(tris),
        regions=np.array(tri_tags),
        boundary_edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        boundary_tags=np.array(edge_tags, dtype=np.int64),
        tag_table=tag_table,
    )


def write_gmsh(mesh: Mesh, path_or_stream=None) -> str:
    """Write the mesh as MSH 2.2 ASCII; returns the text."""
    out = io.StringIO()
    out.write("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n")
    if mesh.tag_table:
        region_ids = set(map(int, np.unique(mesh.regions)))
        out.write(f"$PhysicalNames\n{len(mesh.tag_table)}\n")
        for name, tid in sorted(mesh.tag_table.items(), key=lambda kv: kv[1]):
            dim = 2 if tid in region_ids else 1
            out.write(f'{dim} {tid} "{name}"\n')
        out.write("$EndPhysicalNames\n")
    out.write(f"$Nodes\n{len(mesh.nodes)}\n")
    for i, (x, y) in enumerate(mesh.nodes):
        out.write(f"{i + 1} {float(x)!r} {float(y)!r} 0\n")
    out.write("$EndNodes\n")
    total = len(mesh.elements) + len(mesh.boundary_edges)
    out.write(f"$Elements\n{total}\n")
    eid = 1
    for (a, b), tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        out.write(f"{eid} 1 2 {tag} {tag} {a + 1} {b + 1}\n")
        eid += 1
    for tri, tag in zip(mesh.elements, mesh.regions):
        out.write(f"{eid} 2 2 {tag} {tag} {tri[0] + 1} {tri[1] + 1} {tri[2] + 1}\n")
        eid += 1
    out.write("$EndElements\n")
    text = out.getvalue()
    if path_or_stream is not None:
        if hasattr(path_or_stream, "write"):
            path_or_stream.write(text)
        else:
            with open(path_or_stream, "w") as fh:
                fh.write(text)
    return text


# -- graded tensor grids ------------------------------------------------------


def _segment_spacings(length: float, target: float, h_left: float | None,
                      h_right: float | None, ratio: float = 1.5) -> list[float]:
    """Spacings covering ``length``, geometrically grown away from finer
    neighbours toward ``target``; always sums exactly to ``length``."""
    if length <= target * (1.0 + 1e-9):
        return [length]

    def ramp(h_from):
        sizes = []
        if h_from is None or h_from >= target:
            return sizes
        cur = h_from * ratio
        while cur < target and sum(sizes) + cur < 0.4 * length:
            sizes.append(cur)
            cur *= ratio
        return sizes

    left = ramp(h_left)
    right = ramp(h_right)
    rem = length - sum(left) - sum(right)
    if rem <= 0:
        n = max(1, math.ceil(length / target - 1e-9))
        return [length / n] * n
    n = max(1, round(rem / target))
    spacings = left + [rem / n] * n + right[::-1]
    total = sum(spacings)
    return [s * (length / total) for s in spacings]


def graded_axis(start: float, stop: float, h: float,
                fine: list[tuple[float, float, float]] | None = None,
                snap: list[float] | None = None) -> np.ndarray:
    """1D coordinates from ``start`` to ``stop`` with spacing ``h``, refined to
    ``hf`` inside each ``(a, b, hf)`` interval and snapped to listed points."""
    fine = [(max(a, start), min(b, stop), hf) for a, b, hf in (fine or [])
            if min(b, stop) > max(a, start)]
    breaks = {start, stop}
    for a, b, _ in fine:
        breaks.update((a, b))
    for p in snap or []:
        if start < p < stop:
            breaks.add(p)
    pts = sorted(breaks)
    # collapse breakpoints closer than a tolerance
    tol = _GEOM_TOL * (stop - start)
    merged = [pts[0]]
    for p in pts[1:]:
        if p - merged[-1] > tol:
            merged.append(p)
    merged[-1] = stop

    def spacing_at(a, b):
        mid = 0.5 * (a + b)
        hs = [hf for lo, hi, hf in fine if lo - tol <= mid <= hi + tol]
        return min(hs) if hs else h

    targets = [spacing_at(a, b) for a, b in zip(merged[:-1], merged[1:])]
    coords = [start]
    for k, (a, b) in enumerate(zip(merged[:-1], merged[1:])):
        h_left = targets[k - 1] if k > 0 and targets[k - 1] < targets[k] else None
        h_right = (targets[k + 1]
                   if k + 1 < len(targets) and targets[k + 1] < targets[k] else None)
        spac = _segment_spacings(b - a, targets[k], h_left, h_right)
        for s in spac:
            coords.append(coords[-1] + s)
        coords[-1] = b
    return np.array(coords)


DEFAULT_EDGE_TAGS = {
    "bottom": "BottomEdge",
    "right": "RightEdge",
    "top": "TopEdge",
    "left": "LeftEdge",
    "notch": "Notch",
}


def _grid_mesh(xs: np.ndarray, ys: np.ndarray,
               keep_cell,
               region_of,
               classify_edge,
               tag_names: list[str]) -> Mesh:
    """Assemble a mesh from a tensor grid: alternate-diagonal triangles, cells
    filtered by ``keep_cell`` on centroids, regions and boundary tags assigned
    by callbacks."""
    nx, ny = len(xs) - 1, len(ys) - 1
    node_id = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    tris = []
    for i in range(nx):
        for j in range(ny):
            cx, cy = 0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])
            if not keep_cell(cx, cy):
                continue
            n00, n10 = node_id[i, j], node_id[i + 1, j]
            n01, n11 = node_id[i, j + 1], node_id[i + 1, j + 1]
            if (i + j) % 2 == 0:
                tris.append((n00, n10, n11))
                tris.append((n00, n11, n01))
            else:
                tris.append((n00, n10, n01))
                tris.append((n10, n11, n01))
    if not tris:
        raise MeshError("no cells left after cut-outs; check generator parameters")
    tris = np.array(tris, dtype=np.int64)

    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    all_nodes = np.column_stack([gx.ravel(), gy.ravel()])
    used = np.unique(tris)
    remap = -np.ones(len(all_nodes), dtype=np.int64)
    remap[used] = np.arange(len(used))
    nodes = all_nodes[used]
    tris = remap[tris]

    centroids = nodes[tris].mean(axis=1)
    tag_table = {name: k + 1 for k, name in enumerate(tag_names)}
    regions = np.array([tag_table[region_of(cx, cy)] for cx, cy in centroids])

    counts: dict[tuple[int, int], int] = {}
    for tri in tris:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            counts[key] = counts.get(key, 0) + 1
    edges, etags = [], []
    for (a, b), c in sorted(counts.items()):
        if c != 1:
            continue
        name = classify_edge(nodes[a], nodes[b])
        edges.append((a, b))
        etags.append(tag_table[name])

    return Mesh(nodes, tris, regions, np.array(edges, dtype=np.int64),
                np.array(etags, dtype=np.int64), tag_table)


def generate_rect(width: float, height: float, h: float, *,
                  refine_band: tuple[float, float, float, float, float] | None = None,
                  notch: tuple[float, float, float, float] | None = None,
                  regions: list[tuple[str, tuple[float, float, float, float]]] | None = None,
                  tags: dict[str, str] | None = None) -> Mesh:
    """Structured triangulation of ``[0, width] x [0, height]``.

    Args:
        h: coarse element size.
        refine_band: ``(x0, y0, x1, y1, h_fine)`` box meshed at ``h_fine``; the
            surrounding grid grades geometrically back to ``h``.
        notch: ``(x0, y0, x1, y1)`` axis-aligned rectangle removed from the
            mesh; the grid is snapped to it so the removed area is exact, and
            the cut faces are tagged ``"Notch"``.
        regions: list of ``(name, (x0, y0, x1, y1))`` assigning region tags by
            element centroid; remaining elements fall into ``"domain"``.
    """
    if h <= 0:
        raise MeshError(f"element size must be positive, got h={h}")
    if width <= 0 or height <= 0:
        raise MeshError("domain dimensions must be positive")
    if h > width or h > height:
        raise MeshError(f"element size h={h} exceeds the domain {width} x {height}")

    snap_x, snap_y = [], []
    fine_x, fine_y = [], []
    if refine_band is not None:
        x0, y0, x1, y1, hf = refine_band
        if hf > h:
            raise MeshError("h_fine of the refinement band must not exceed h")
        fine_x.append((x0, x1, hf))
        fine_y.append((y0, y1, hf))
    if notch is not None:
        nx0, ny0, nx1, ny1 = notch
        if nx1 <= nx0 or ny1 <= ny0:
            raise MeshError("degenerate notch: zero width or height")
        if nx0 < -_GEOM_TOL or ny0 < -_GEOM_TOL or nx1 > width + _GEOM_TOL \
                or ny1 > height + _GEOM_TOL:
            raise MeshError("notch must lie inside the domain")
        snap_x.extend((nx0, nx1))
        snap_y.extend((ny0, ny1))
    for _, (rx0, ry0, rx1, ry1) in regions or []:
        snap_x.extend((rx0, rx1))
        snap_y.extend((ry0, ry1))

    xs = graded_axis(0.0, width, h, fine_x, snap_x)
    ys = graded_axis(0.0, height, h, fine_y, snap_y)

    def keep(cx, cy):
        if notch is None:
            return True
        nx0, ny0, nx1, ny1 = notch
        return not (nx0 < cx < nx1 and ny0 < cy < ny1)

    def region_of(cx, cy):
        for name, (rx0, ry0, rx1, ry1) in regions or []:
            if rx0 <= cx <= rx1 and ry0 <= cy <= ry1:
                return name
        return "domain"

    names = dict(DEFAULT_EDGE_TAGS)
    names.update(tags or {})
    tol = _GEOM_TOL * max(width, height)

    def classify(p, q):
        mx, my = 0.5 * (p + q)
        if abs(my) <= tol:
            return names["bottom"]
        if abs(my - height) <= tol:
            return names["top"]
        if abs(mx) <= tol:
            return names["left"]
        if abs(mx - width) <= tol:
            return names["right"]
        return names["notch"]

    tag_names = [names[k] for k in ("bottom", "right", "top", "left", "notch")]
    region_names = list(dict.fromkeys([name for name, _ in regions or []] + ["domain"]))
    mesh = _grid_mesh(xs, ys, keep, region_of, classify, region_names + tag_names)

    if notch is not None:
        nx0, ny0, nx1, ny1 = notch
        expected = width * height - (nx1 - nx0) * (ny1 - ny0)
        if abs(mesh.total_area() - expected) > 1e-10 * expected:
            raise MeshError("notch removal failed the area bookkeeping check")
    return mesh


def generate_cruciform(L: float, h: float, h_fine: float, *,
                       refine_half: float | None = None,
                       notch_len: float | None = None,
                       notch_angle_deg: float = 135.0,
                       notch_width: float | None = None) -> Mesh:
    """Cross-shaped plate of arm width ``L`` spanning ``3L x 3L`` with an
    inclined center notch.

    The notch is a slit of length ``notch_len`` (default ``0.2 L``) through the
    specimen center at ``notch_angle_deg`` from horizontal, cut by removing
    elements within ``notch_width / 2`` of the segment. Outer arm ends are
    tagged ``BottomEdge``/``RightEdge``/``TopEdge``/``LeftEdge``; remaining
    outline is ``Sides``; cut faces are ``Notch``.
    """
    span = 3.0 * L
    c = 1.5 * L
    refine_half = 0.3 * L if refine_half is None else refine_half
    notch_len = 0.2 * L if notch_len is None else notch_len
    notch_width = h_fine if notch_width is None else notch_width
    if notch_width <= 0 or notch_len <= 0:
        raise MeshError("degenerate notch: zero length or width")
    if h_fine > h:
        raise MeshError("h_fine must not exceed h")

    fine = [(c - refine_half, c + refine_half, h_fine)]
    snap = [L, 2.0 * L]
    xs = graded_axis(0.0, span, h, fine, snap)
    ys = graded_axis(0.0, span, h, fine, snap)

    theta = math.radians(notch_angle_deg)
    half = 0.5 * notch_len * np.array([math.cos(theta), math.sin(theta)])
    p0, p1 = np.array([c, c]) - half, np.array([c, c]) + half

    def dist_to_slit(x, y):
        pt = np.array([x, y])
        d = p1 - p0
        t = np.clip(np.dot(pt - p0, d) / np.dot(d, d), 0.0, 1.0)
        return float(np.hypot(*(pt - (p0 + t * d))))

    def keep(cx, cy):
        in_cross = (L <= cy <= 2.0 * L) or (L <= cx <= 2.0 * L)
        return in_cross and dist_to_slit(cx, cy) > 0.5 * notch_width

    tol = _GEOM_TOL * span

    def classify(p, q):
        mx, my = 0.5 * (p + q)
        if abs(my) <= tol:
            return "BottomEdge"
        if abs(my - span) <= tol:
            return "TopEdge"
        if abs(mx) <= tol:
            return "LeftEdge"
        if abs(mx - span) <= tol:
            return "RightEdge"
        if dist_to_slit(mx, my) <= 0.5 * notch_width + max(h_fine, notch_width):
            return "Notch"
        return "Sides"

    mesh = _grid_mesh(xs, ys, keep, lambda cx, cy: "domain", classify,
                      ["domain", "BottomEdge", "RightEdge", "TopEdge", "LeftEdge",
                       "Sides", "Notch"])
    if "Notch" in mesh.tag_table and not np.any(
            mesh.boundary_tags == mesh.tag_table["Notch"]):
        raise MeshError("notch did not remove any elements; widen notch_width")
    return mesh
