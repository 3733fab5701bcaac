import json

import numpy as np
import pytest

from thermofrac.config import parse_config, serialize
from thermofrac.errors import ConfigError
from thermofrac.output import CSV_HEADER, read_csv, write_csv, write_manifest, write_vtk
from thermofrac.mesh import generate_rect, load_gmsh
from thermofrac.solver import RunRecord

MINIMAL = {
    "mesh": {"generate": {"kind": "rect", "width": 1.0, "height": 1.0, "h": 0.5}},
    "materials": {
        "domain": {
            "elastic": {"E": 1.0, "nu": 0.2, "mode": "plane_stress"},
            "thermal": {"k0": 1.0, "rho": 1.0, "c": 1.0, "alpha": 0.0, "T0": 300.0},
            "fracture": {"Gc": 1.0, "ls": 0.1},
        }
    },
    "boundary_conditions": [
        {"tag": "BottomEdge", "u": [0.0, 0.0], "T": "reference"},
        {"tag": "TopEdge", "u": [None, "ramp"], "T": {"kind": "ramp", "scale": -1.0}},
    ],
    "load": {"uMax": 1e-3, "tMax": 1.0, "delt": 0.1, "TAppMax": 350.0,
             "ramp": "smooth"},
}


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config(json.dumps(MINIMAL))
        assert cfg.staggered.tol == 1e-8
        assert cfg.staggered.innerMax == 10
        assert cfg.unit_scale == 1.0
        assert cfg.load.T0 == 300.0
        assert cfg.load.uTran == pytest.approx(0.2e-3)
        assert cfg.materials["domain"].fracture.eta == 1e-8
        assert cfg.boundary_conditions[1].u == (None, ("ramp", 1.0))
        assert cfg.boundary_conditions[1].T == ("ramp", -1.0)

    def test_missing_gc_names_path(self):
        raw = json.loads(json.dumps(MINIMAL))
        del raw["materials"]["domain"]["fracture"]["Gc"]
        with pytest.raises(ConfigError, match=r"fracture\.Gc"):
            parse_config(raw)

    def test_unknown_key_rejected(self):
        raw = json.loads(json.dumps(MINIMAL))
        raw["materials"]["domain"]["fracture"]["Gcc"] = 2.0
        with pytest.raises(ConfigError, match="Gcc"):
            parse_config(raw)

    def test_bad_unit_scale(self):
        raw = json.loads(json.dumps(MINIMAL))
        raw["unit_scale"] = -2.0
        with pytest.raises(ConfigError, match="unit_scale"):
            parse_config(raw)

    def test_round_trip_identity(self):
        cfg = parse_config(json.dumps(MINIMAL))
        again = parse_config(serialize(cfg))
        assert again == cfg

    def test_overrides_applied_and_validated(self):
        cfg = parse_config(json.dumps(MINIMAL),
                           overrides=[("staggered.tol", "1e-6"),
                                      ("load.TAppMax", "375.0")])
        assert cfg.staggered.tol == 1e-6
        assert cfg.load.TAppMax == 375.0
        with pytest.raises(ConfigError):
            parse_config(json.dumps(MINIMAL), overrides=[("load.delt", "-1.0")])

    def test_mixed_reference_temperature_rejected(self):
        raw = json.loads(json.dumps(MINIMAL))
        raw["materials"]["other"] = json.loads(
            json.dumps(raw["materials"]["domain"]))
        raw["materials"]["other"]["thermal"]["T0"] = 200.0
        with pytest.raises(ConfigError, match="reference temperature"):
            parse_config(raw)


class TestVTK:
    def test_single_triangle_round_trip(self, tmp_path):
        mesh = load_gmsh("""$MeshFormat
2.2 0 8
$EndMeshFormat
$Nodes
3
1 0 0 0
2 1 0 0
3 0 1 0
$EndNodes
$Elements
1
1 2 2 1 1 1 2 3
$EndElements
""")
        path = tmp_path / "out.vtk"
        s = np.array([0.12345678901234567, 1.0, 0.5])
        write_vtk(mesh, np.zeros((3, 2)), s, np.full(3, 300.0), str(path))
        text = path.read_text().splitlines()
        assert text[3] == "DATASET UNSTRUCTURED_GRID"
        assert "POINTS 3 double" in text
        assert "CELLS 1 4" in text
        assert "CELL_TYPES 1" in text
        # the s values survive the round trip bit-identically
        idx = text.index("SCALARS s double")
        values = [float(v) for v in text[idx + 2: idx + 5]]
        assert values == list(s)

    def test_mismatched_length_rejected(self, tmp_path):
        mesh = generate_rect(1.0, 1.0, 1.0)
        with pytest.raises(ValueError, match="length"):
            write_vtk(mesh, np.zeros((4, 2)), np.zeros(3), np.zeros(4),
                      str(tmp_path / "bad.vtk"))
        assert not (tmp_path / "bad.vtk").exists()


class TestCSV:
    def zero(self):
        return RunRecord(t=0.0, u_app=0.0, T_app=300.0, Fx=0.0, Fy=0.0,
                         inner_iters=0, rel_err=0.0)

    def test_empty_run(self, tmp_path):
        path = tmp_path / "r.csv"
        write_csv([self.zero()], str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 2
        assert lines[1].startswith("0,0,300,")

    def test_row_count_and_round_trip(self, tmp_path):
        records = [self.zero()]
        for k in range(1, 4):
            records.append(RunRecord(t=0.1 * k, u_app=1.23456789012345e-7 * k,
                                     T_app=300.0 + k, Fx=0.5 * k, Fy=-2.0 * k,
                                     inner_iters=k, rel_err=1e-9 / k))
        path = tmp_path / "r.csv"
        write_csv(records, str(path))
        cols = read_csv(str(path))
        assert len(cols["t"]) == 4
        np.testing.assert_array_equal(cols["u_app"],
                                      [r.u_app for r in records])
        np.testing.assert_array_equal(cols["rel_err"],
                                      [r.rel_err for r in records])


class TestManifest:
    def test_contents(self, tmp_path):
        mesh = generate_rect(1.0, 1.0, 0.5)
        cfg = parse_config(json.dumps(MINIMAL))
        path = tmp_path / "manifest.json"
        write_manifest(str(path), config_json=serialize(cfg), mesh=mesh,
                       version="0.1.0", started="2026-01-01T00:00:00",
                       summary_csv="load_displacement.csv")
        doc = json.loads(path.read_text())
        assert doc["version"] == "0.1.0"
        assert doc["mesh"]["nodes"] == len(mesh.nodes)
        assert doc["summary_csv"] == "load_displacement.csv"
        assert doc["config"]["load"]["tMax"] == 1.0
