import json
import os

import pytest

from thermofrac.cli import main
from thermofrac.benchmarks import build_example
from thermofrac.config import parse_config, serialize
from thermofrac.driver import run_config

SINGLE_TRI = """$MeshFormat
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
"""


def test_mesh_info(tmp_path, capsys):
    path = tmp_path / "tri.msh"
    path.write_text(SINGLE_TRI)
    assert main(["mesh-info", str(path)]) == 0
    out = capsys.readouterr().out
    assert "nodes: 3" in out
    assert "elements: 1" in out


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert "not found" in capsys.readouterr().err


def test_unknown_example_lists_names(capsys):
    assert main(["example", "sentx"]) == 1
    err = capsys.readouterr().err
    assert "quench-880" in err and "cruciform-mech" in err


def test_bad_override_shape(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{}")
    assert main(["run", str(cfg), "--override", "novalue"]) == 1


def test_example_smoke_run(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["-q", "example", "sent", "--scale", "0.05",
                 "--out", str(out),
                 "--override", "load.tMax=0.05",
                 "--override", "output.cadence=2"])
    assert code == 0
    assert (out / "manifest.json").exists()
    assert (out / "load_displacement.csv").exists()
    assert (out / "load_displacement.png").exists()
    assert (out / "field_s.png").exists()
    vtks = sorted(p.name for p in out.glob("fields_*.vtk"))
    assert vtks == ["fields_000002.vtk", "fields_000004.vtk", "fields_000005.vtk"]
    lines = (out / "load_displacement.csv").read_text().splitlines()
    assert len(lines) == 7  # header + zero row + 5 steps
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["load"]["tMax"] == 0.05


def test_run_config_file_end_to_end(tmp_path):
    cfg = build_example("sent", scale=0.05, out_dir=str(tmp_path / "a"))
    cfg_path = tmp_path / "sent.json"
    cfg_path.write_text(serialize(cfg))
    code = main(["-q", "run", str(cfg_path), "--out", str(tmp_path / "a"),
                 "--override", "load.tMax=0.03", "--override", "output.vtk=false",
                 "--override", "output.figures=false"])
    assert code == 0
    assert (tmp_path / "a" / "load_displacement.csv").exists()
    assert not list((tmp_path / "a").glob("fields_*.vtk"))


def test_deterministic_csv_bytes(tmp_path):
    paths = []
    for sub in ("one", "two"):
        cfg = build_example("sent", scale=0.05, out_dir=str(tmp_path / sub))
        cfg = parse_config(json.loads(serialize(cfg)),
                           overrides=[("load.tMax", "0.03"),
                                      ("output.vtk", "false"),
                                      ("output.figures", "false")])
        run_config(cfg, str(tmp_path / sub))
        paths.append(tmp_path / sub / "load_displacement.csv")
    assert paths[0].read_bytes() == paths[1].read_bytes()
