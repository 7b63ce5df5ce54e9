import json
import subprocess
import sys

import pytest

from transbend.cli import main
from transbend.fixtures import fixture_specs


@pytest.fixture
def specs(tmp_path):
    def write(name):
        path, prof = fixture_specs(name)
        p, q = tmp_path / f"{name}-path.json", tmp_path / f"{name}-profile.json"
        p.write_text(json.dumps(path))
        q.write_text(json.dumps(prof))
        return ["--path", str(p), "--profile", str(q)]
    return write


def test_build(specs, tmp_path):
    out = tmp_path / "out"
    assert main(["build", *specs("helicoid"), "--out", str(out)]) == 0
    obj = (out / "surface.obj").read_text().splitlines()
    assert sum(l.startswith("v ") for l in obj) == 121
    assert sum(l.startswith("f ") for l in obj) == 100
    assert (out / "forms.csv").read_text().startswith("u,v,x,y,z,E,F,G,e,f,g\n")


def test_build_errors(specs, tmp_path, capsys):
    assert main(["build", *specs("degenerate-helicoid"), "--out", str(tmp_path)]) == 2
    assert "degenerate-surface" in capsys.readouterr().err
    assert main(["build", "--path", str(tmp_path / "missing.json"), "--profile", "x.json"]) == 2
    assert "not found" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"family": "helix", "interval": [0, 1], "params": {"radius": -2}}))
    args = specs("plane")
    assert main(["build", "--path", str(bad), "--profile", args[3], "--out", str(tmp_path)]) == 2
    assert "path.params.radius" in capsys.readouterr().err


@pytest.mark.parametrize("name", ["plane", "helicoid", "circular-cone", "miura"])
def test_infbend_universal(specs, tmp_path, name):
    assert main(["infbend", "--kind", "universal", *specs(name), "--out", str(tmp_path)]) == 0
    report = (tmp_path / "report.csv").read_text()
    assert "burgers_norm" in report
    head = (tmp_path / "velocity.csv").read_text().splitlines()[0]
    assert head.startswith("u,v,xdot_x,xdot_y,xdot_z,xdot_u_x")


@pytest.mark.parametrize("kind,name", [("perp-planes", "parabolic"), ("cone", "circular-cone"),
                                       ("cone", "tilted-planes"), ("two-slope", "eggbox"),
                                       ("planar-normal", "planar-normal")])
def test_infbend_kinds(specs, tmp_path, kind, name):
    assert main(["infbend", "--kind", kind, *specs(name), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "report.csv").read_text().splitlines()[1:]
    assert all(r.endswith("true") for r in rows)


def test_infbend_hypotheses(specs, tmp_path, capsys):
    assert main(["infbend", "--kind", "cone", *specs("non-cone"), "--out", str(tmp_path)]) == 3
    assert "residual" in capsys.readouterr().err
    assert main(["infbend", "--kind", "two-slope", *specs("three-slope"), "--out", str(tmp_path)]) == 3
    assert "'has exactly two slopes' violated" in capsys.readouterr().err


def test_sweep_miura(specs, tmp_path):
    out = tmp_path / "sweep"
    code = main(["sweep", "--kind", "koko", *specs("miura"), "--t-min", "-0.4", "--t-max", "0.9",
                 "--t-steps", "20", "--out", str(out)])
    assert code == 0
    assert sorted(p.name for p in out.glob("frame_*.obj")) == sorted(f"frame_{k}.obj" for k in range(20))
    rows = (out / "sweep_report.csv").read_text().splitlines()
    assert len(rows) == 21 and all(r.endswith(",true") for r in rows[1:])


def test_sweep_out_of_range(specs, tmp_path, capsys):
    code = main(["sweep", "--kind", "bianchi", *specs("bianchi-arc"), "--t-min", "0.5", "--out", str(tmp_path)])
    assert code == 4
    assert "[0.707106781187, inf]" in capsys.readouterr().err


def test_sweep_crease_event(specs, tmp_path):
    assert main(["sweep", "--kind", "bianchi", *specs("bianchi-crease"), "--t-steps", "3",
                 "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "sweep_report.csv").read_text().splitlines()
    assert all("path@1.5707963267948966e+00" in r for r in rows[1:])


def test_sweep_signs(specs, tmp_path, capsys):
    args = ["sweep", "--kind", "koko", *specs("koko-crease"), "--t-steps", "2", "--out", str(tmp_path)]
    assert main(args + ["--signs=-1,-1"]) == 0
    assert main(args + ["--signs", "1,1"]) == 3
    assert "forced" in capsys.readouterr().err
    assert main(args + ["--signs", "1,2"]) == 2


def test_bend_single_frame(specs, tmp_path):
    assert main(["bend", "--kind", "bianchi", *specs("bianchi-arc"), "--t", "1.3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "bent.obj").exists()
    rows = (tmp_path / "bend_report.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("0,1.3000000000000000e+00,")
    assert rows[1].endswith(",false,,true")


def test_bend_errors(specs, tmp_path, capsys):
    args = ["bend", "--kind", "koko", *specs("miura"), "--out", str(tmp_path)]
    assert main(args) == 2
    assert "t:" in capsys.readouterr().err
    assert main(args + ["--t", "1.5"]) == 4
    assert main(args + ["--t", "0.3"]) == 0


def test_config_file_and_overrides(specs, tmp_path, monkeypatch):
    paths = specs("miura")
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"path": paths[1], "profile": paths[3], "kind": "koko",
                               "t-steps": 3, "output_dir": str(tmp_path / "fromfile")}))
    assert main(["sweep", "--config", str(cfg)]) == 0
    assert len(list((tmp_path / "fromfile").glob("frame_*.obj"))) == 3
    monkeypatch.setenv("TRANSBEND_OUT", str(tmp_path / "fromenv"))
    assert main(["sweep", "--config", str(cfg), "--t-steps", "2"]) == 0
    assert len(list((tmp_path / "fromenv").glob("frame_*.obj"))) == 2
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "fromflag")]) == 0
    assert (tmp_path / "fromflag" / "sweep_report.csv").exists()


def test_deterministic_output(specs, tmp_path):
    args = specs("eggbox")
    for run in ("a", "b"):
        assert main(["sweep", "--kind", "bianchi", *args, "--t-steps", "4", "--out", str(tmp_path / run)]) == 0
        assert main(["infbend", "--kind", "two-slope", *args, "--out", str(tmp_path / run)]) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_module_entry_point(specs, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "transbend", "build", *specs("plane"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "surface.obj").exists()
