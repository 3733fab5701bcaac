import numpy as np
import pytest

from thermofrac.errors import MeshError, MeshParseError
from thermofrac.mesh import (
    Mesh,
    boundary_nodes,
    generate_cruciform,
    generate_rect,
    load_gmsh,
    write_gmsh,
)

SINGLE_TRI = """$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "BottomEdge"
2 2 "domain"
$EndPhysicalNames
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
2
1 1 2 1 1 1 2
2 2 2 2 2 1 2 3
$EndElements
"""


def test_load_single_triangle():
    mesh = load_gmsh(SINGLE_TRI)
    assert len(mesh.nodes) == 3
    assert len(mesh.elements) == 1
    assert mesh.total_area() == pytest.approx(0.5)
    assert mesh.tag_table == {"BottomEdge": 1, "domain": 2}
    assert len(mesh.boundary_edges) == 1


def test_load_clockwise_triangle_reoriented():
    text = SINGLE_TRI.replace("2 2 2 2 2 1 2 3", "2 2 2 2 2 1 3 2")
    mesh = load_gmsh(text)
    assert mesh.areas()[0] == pytest.approx(0.5)
    p = mesh.nodes[mesh.elements[0]]
    assert (p[1] - p[0])[0] * (p[2] - p[0])[1] - (p[1] - p[0])[1] * (p[2] - p[0])[0] > 0


def test_load_dangling_node_reference():
    text = SINGLE_TRI.replace("2 2 2 2 2 1 2 3", "2 2 2 2 2 1 2 99")
    with pytest.raises(MeshParseError, match="99"):
        load_gmsh(text)


def test_load_unsupported_version():
    with pytest.raises(MeshParseError, match="2.2"):
        load_gmsh(SINGLE_TRI.replace("2.2 0 8", "4.1 0 8"))


def test_load_missing_nodes_section():
    text = SINGLE_TRI.replace("$Nodes", "$Junk").replace("$EndNodes", "$EndJunk")
    with pytest.raises(MeshParseError, match="Nodes"):
        load_gmsh(text)


def test_gmsh_round_trip(tmp_path):
    mesh = generate_rect(1.0, 1.0, 0.25)
    path = tmp_path / "square.msh"
    write_gmsh(mesh, str(path))
    back = load_gmsh(str(path))
    assert len(back.nodes) == len(mesh.nodes)
    assert len(back.elements) == len(mesh.elements)
    assert len(back.boundary_edges) == len(mesh.boundary_edges)
    assert back.tag_table == mesh.tag_table
    assert back.total_area() == pytest.approx(mesh.total_area(), rel=1e-14)


class TestGenerateRect:
    def test_unit_square_coarsest(self):
        mesh = generate_rect(1.0, 1.0, 1.0)
        assert len(mesh.elements) == 2
        assert mesh.total_area() == pytest.approx(1.0, rel=1e-14)

    def test_unit_square_half_spacing(self):
        mesh = generate_rect(1.0, 1.0, 0.5)
        assert len(mesh.elements) == 8  # 2 (1/h)^2 by construction
        assert mesh.total_area() == pytest.approx(1.0, rel=1e-14)

    def test_notch_area_bookkeeping(self):
        mesh = generate_rect(1.0, 1.0, 0.25, notch=(0.25, 0.45, 0.75, 0.55))
        assert mesh.total_area() == pytest.approx(0.95, rel=1e-10)
        notch_id = mesh.tag_table["Notch"]
        assert np.count_nonzero(mesh.boundary_tags == notch_id) > 0

    def test_refine_band_spacing(self):
        mesh = generate_rect(1.0, 1.0, 0.25,
                             refine_band=(0.0, 0.4, 1.0, 0.6, 0.05))
        ys = np.unique(mesh.nodes[:, 1])
        in_band = ys[(ys >= 0.4 - 1e-12) & (ys <= 0.6 + 1e-12)]
        assert np.all(np.diff(in_band) <= 0.05 + 1e-12)
        assert mesh.total_area() == pytest.approx(1.0, rel=1e-12)

    def test_regions_assigned_by_centroid(self):
        mesh = generate_rect(1.0, 1.0, 0.25,
                             regions=[("lower", (0.0, 0.0, 1.0, 0.5)),
                                      ("upper", (0.0, 0.5, 1.0, 1.0))])
        lower = mesh.tag_table["lower"]
        upper = mesh.tag_table["upper"]
        cen = mesh.nodes[mesh.elements].mean(axis=1)
        assert np.all(mesh.regions[cen[:, 1] < 0.5] == lower)
        assert np.all(mesh.regions[cen[:, 1] > 0.5] == upper)

    def test_oversized_h_rejected(self):
        with pytest.raises(MeshError, match="exceeds"):
            generate_rect(1.0, 1.0, 2.0)

    def test_degenerate_notch_rejected(self):
        with pytest.raises(MeshError, match="degenerate"):
            generate_rect(1.0, 1.0, 0.5, notch=(0.2, 0.5, 0.8, 0.5))

    def test_notch_outside_rejected(self):
        with pytest.raises(MeshError, match="inside"):
            generate_rect(1.0, 1.0, 0.5, notch=(0.5, 0.5, 1.5, 0.6))


class TestBoundaryNodes:
    def test_bottom_of_unit_square(self):
        mesh = generate_rect(1.0, 1.0, 1.0)
        ids = boundary_nodes(mesh, "BottomEdge")
        got = sorted(map(tuple, mesh.nodes[ids]))
        assert got == [(0.0, 0.0), (1.0, 0.0)]

    def test_top_row_count_matches_grid(self):
        mesh = generate_rect(1.0, 1.0, 0.25)
        ids = boundary_nodes(mesh, "TopEdge")
        assert len(ids) == 5
        assert np.all(mesh.nodes[ids, 1] == 1.0)
        assert np.all(np.diff(ids) > 0)

    def test_unknown_tag(self):
        mesh = generate_rect(1.0, 1.0, 1.0)
        with pytest.raises(MeshError, match="Left2"):
            boundary_nodes(mesh, "Left2")


class TestMeshInvariants:
    def test_edge_sharing(self):
        mesh = generate_rect(2.0, 1.0, 0.25, notch=(0.5, 0.25, 1.5, 0.5))
        counts = mesh.edge_counts()
        assert set(counts.values()) <= {1, 2}
        tagged = {tuple(sorted(e)) for e in mesh.boundary_edges}
        free = {e for e, c in counts.items() if c == 1}
        assert tagged == free

    def test_duplicate_nodes_rejected(self):
        nodes = np.array([[0, 0], [1, 0], [0, 1], [1e-15, 0]])
        with pytest.raises(MeshError, match="duplicate"):
            Mesh(nodes, np.array([[0, 1, 2]]), np.array([1]),
                 np.zeros((0, 2)), np.zeros(0))

    def test_degenerate_element_rejected(self):
        nodes = np.array([[0, 0], [1, 0], [2, 0]])
        with pytest.raises(MeshError, match="degenerate"):
            Mesh(nodes, np.array([[0, 1, 2]]), np.array([1]),
                 np.zeros((0, 2)), np.zeros(0))

    def test_invalid_node_reference_rejected(self):
        nodes = np.array([[0, 0], [1, 0], [0, 1]])
        with pytest.raises(MeshError, match="outside"):
            Mesh(nodes, np.array([[0, 1, 7]]), np.array([1]),
                 np.zeros((0, 2)), np.zeros(0))


class TestCruciform:
    def test_shape_and_tags(self):
        L = 1.0
        mesh = generate_cruciform(L, h=0.25, h_fine=0.125)
        for tag in ("TopEdge", "BottomEdge", "LeftEdge", "RightEdge", "Sides", "Notch"):
            assert tag in mesh.tag_table
        # cross area is 5 L^2 minus the slit cut-out
        assert mesh.total_area() < 5.0 * L**2
        assert mesh.total_area() > 4.8 * L**2
        top = boundary_nodes(mesh, "TopEdge")
        assert np.all(mesh.nodes[top, 1] == 3.0 * L)
        assert np.all((mesh.nodes[top, 0] >= L) & (mesh.nodes[top, 0] <= 2.0 * L))

    def test_notch_is_cut(self):
        mesh = generate_cruciform(1.0, h=0.25, h_fine=0.0625)
        notch_id = mesh.tag_table["Notch"]
        pts = mesh.nodes[np.unique(mesh.boundary_edges[mesh.boundary_tags == notch_id])]
        # cut faces cluster around the specimen center
        assert np.all(np.hypot(pts[:, 0] - 1.5, pts[:, 1] - 1.5) < 0.35)
