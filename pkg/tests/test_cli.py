import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from sxsine.cli import main
from sxsine.sx_io import parse_gen, parse_sx

SVG = "{http://www.w3.org/2000/svg}"
SIMULINK_FLAGS = ["--amplitude", "10", "--omega", "0.5", "--bias", "20", "--phase", "0"]


def run(*argv):
    return main([str(a) for a in argv])


def test_generate_small_example(tmp_path, capsys):
    assert run("generate", "--amplitude", 0.5, "--omega", 1, "--bias", 2, "--phase", 0,
               "--out-dir", tmp_path) == 0
    assert "x0 = -0.5" in capsys.readouterr().out
    cfg = (tmp_path / "model.cfg").read_text()
    assert 'initially = "sin_1.x==-0.5 & y==2 & sin_1.t==0 & t_gl==0"' in cfg
    m = parse_sx((tmp_path / "model.xml").read_text())
    assert dict(m.network.binds[0].map)["omega"].text == "1"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "generate" and manifest["parameters"]["amplitude"] == 0.5
    assert "duration_s" in manifest and "version" in manifest


def test_generate_simulink_flags(tmp_path):
    assert run("generate", "--simulink", "--amplitude", 10, "--bias", 20, "--frequency", 0.5,
               "--phase", 0, "--sample-time", 0, "--out-dir", tmp_path) == 0
    binds = dict(parse_sx((tmp_path / "model.xml").read_text()).network.binds[0].map)
    assert binds["omega"].text == "0.5" and binds["mu"].text == "20"


def test_generate_rejects_sample_time(tmp_path, capsys):
    assert run("generate", "--simulink", "--sample-time", 0.1, "--out-dir", tmp_path) == 2
    assert "continuous-time" in capsys.readouterr().err
    assert not (tmp_path / "model.xml").exists()


def test_generate_rejects_zero_omega(tmp_path):
    assert run("generate", "--omega", 0, "--out-dir", tmp_path) == 2


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        run("generate", *SIMULINK_FLAGS, "--enlarge", 0.2, "--out-dir", d)
    for name in ("model.xml", "model.cfg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_check_simulink_example(tmp_path):
    code = run("check", *SIMULINK_FLAGS, "--enlarge", 0.2, "--step", 0.01, "--horizon", 10,
               "--out-dir", tmp_path)
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["contained"] is True and report["margin"] > 0 and report["residual_ok"]


def test_check_small_example_no_enlarge(tmp_path):
    assert run("check", "--out-dir", tmp_path) == 0
    assert json.loads((tmp_path / "report.json").read_text())["margin"] > 0


def test_check_detects_wrong_dynamics(tmp_path, capsys):
    assert run("check", "--sim-omega", 1.1, "--horizon", 2, "--out-dir", tmp_path) == 1
    assert "containment violated" in capsys.readouterr().err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["contained"] is False and "first_violation" in report


def test_check_monte_carlo(tmp_path):
    assert run("check", *SIMULINK_FLAGS, "--enlarge", 0.2, "--horizon", 2, "--mc-samples", 20,
               "--out-dir", tmp_path) == 0
    mc = json.loads((tmp_path / "report.json").read_text())["monte_carlo"]
    assert mc["uncontained"] == 0 and mc["min_margin"] > 0


def test_check_report_is_deterministic(tmp_path):
    for d in ("a", "b"):
        run("check", "--horizon", 1, "--out-dir", tmp_path / d)
    assert (tmp_path / "a/report.json").read_bytes() == (tmp_path / "b/report.json").read_bytes()


def test_check_bad_arguments(tmp_path):
    assert run("check", "--step", -1, "--out-dir", tmp_path) == 2
    assert run("check", "--enlarge", -0.2, "--out-dir", tmp_path) == 2


def _points(attr):
    return [tuple(float(c) for c in pair.split(",")) for pair in attr.split()]


def _inside_convex(pt, poly, tol=1e-6):
    if len(poly) < 3:
        return False
    n = len(poly)
    signs = []
    for i in range(n):
        (x1, y1), (x2, y2) = poly[i], poly[(i + 1) % n]
        signs.append((x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1))
    return all(s >= -tol for s in signs) or all(s <= tol for s in signs)


def test_plot_overlay_lies_inside_polygons(tmp_path):
    out = tmp_path / "fig8.svg"
    assert run("plot", *SIMULINK_FLAGS, "--enlarge", 0.2, "--overlay", "--out", out) == 0
    root = ET.parse(out).getroot()
    polys = [_points(p.get("points")) for p in root.iter(SVG + "polygon")]
    (line,) = list(root.iter(SVG + "polyline"))
    assert len(polys) == 1000
    mins = np.array([np.min(p, axis=0) for p in polys])
    maxs = np.array([np.max(p, axis=0) for p in polys])
    for pt in _points(line.get("points")):
        cand = np.flatnonzero(np.all((mins <= pt) & (pt <= maxs), axis=1))
        assert any(_inside_convex(pt, polys[i]) for i in cand), pt


def test_plot_gen_source(tmp_path):
    gen = tmp_path / "reach.gen"
    gen.write_text("0 1\n1 2\n\n3 4\n5 6\n")
    out = tmp_path / "reach.svg"
    assert run("plot", "--source", "gen", "--file", gen, "--out", out) == 0
    assert len(list(ET.parse(out).getroot().iter(SVG + "polygon"))) == 2


def test_plot_gen_errors(tmp_path):
    bad = tmp_path / "bad.gen"
    bad.write_text("0 1\nfoo\n")
    assert run("plot", "--source", "gen", "--file", bad, "--out", tmp_path / "x.svg") == 2
    assert run("plot", "--source", "gen", "--file", tmp_path / "missing.gen", "--out", tmp_path / "x.svg") == 2
    assert run("plot", "--dims", "t,q", "--out", tmp_path / "x.svg") == 2
    assert run("plot", "--dims", "t,t", "--out", tmp_path / "x.svg") == 2


def test_plot_csv_three_segments(tmp_path):
    out = tmp_path / "fp.csv"
    assert run("plot", "--horizon", 0.03, "--step", 0.01, "--format", "csv", "--out", out) == 0
    text = out.read_text()
    assert len(parse_gen(text)) == 3
    assert text.count("\n\n") == 2


def test_plot_trajectory_csv(tmp_path):
    out = tmp_path / "tr.csv"
    assert run("plot", "--source", "trajectory", "--horizon", 1, "--format", "csv", "--out", out) == 0
    (poly,) = parse_gen(out.read_text())
    assert len(poly) == 1001


def test_plot_is_deterministic(tmp_path):
    for name in ("a.svg", "b.svg"):
        run("plot", "--overlay", "--horizon", 2, "--out", tmp_path / name)
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_module_entry_point_exit_codes(tmp_path):
    ok = subprocess.run([sys.executable, "-m", "sxsine", "generate", "--out-dir", str(tmp_path)],
                        capture_output=True, text=True)
    assert ok.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "sxsine", "generate", "--bogus"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
