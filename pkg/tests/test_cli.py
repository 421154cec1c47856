import json
import subprocess
import sys

import pytest

from roadmetric.cli import main
from roadmetric.io import path_from_text, read_jsonl, read_scene


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def config_of(err):
    line = next(ln for ln in err.splitlines() if ln.startswith("config: "))
    return json.loads(line[len("config: "):])


def test_sample_writes_scene(capsys, tmp_path):
    f = tmp_path / "s.txt"
    code, _, err = run(capsys, "sample", "--beta", "3", "--radius", "1", "--vmin", "0.1",
                       "--seed", "7", "--out", str(f))
    assert code == 0
    s = read_scene(f)
    assert f"roads: {len(s)}" in err
    cfg = config_of(err)
    # defaulted values are part of the printed configuration
    assert cfg["seed"] == 7 and cfg["eps"] == 0.1 and cfg["center"] == [0.0, 0.0]


def test_geodesic_record(capsys, tmp_path):
    f = tmp_path / "s.txt"
    run(capsys, "sample", "--vmin", "0.1", "--seed", "7", "--out", str(f))
    code, out, _ = run(capsys, "geodesic", "--scene", str(f), "--from", "0,0", "--to", "1,0",
                       "--eps", "0.05")
    assert code == 0
    p, head = path_from_text(out)
    assert "containment_ok" in head and "double_refraction_margin" in head
    assert p.total_time <= 1 / 0.05


def test_sweep_records(capsys):
    code, out, _ = run(capsys, "sweep", "--vmin", "0.1", "--from", "0.2,0.1", "--to=-0.3,0.4",
                       "--eps-list", "0.4,0.2,0.1")
    assert code == 0
    recs = [json.loads(ln) for ln in out.splitlines()]
    ts = [r["t_eps"] for r in recs]
    assert ts == sorted(ts) and len(recs) == 3


@pytest.mark.parametrize("argv", [
    ["ball", "--eps", "0.2", "--radii", "1,2", "--resolution", "32"],
    ["hubs", "--limit", "3"],
    ["confluence", "--vmin", "0.2", "--eps", "0.2", "--sources", "4"],
    ["cutlocus", "--vmin", "0.3", "--eps", "0.3", "--spacing", "0.25", "--extent", "0.25",
     "--box-sizes", "0.1"],
    ["stars", "--point", "0.1,0.2", "--eps", "0.001"],
    ["scaling", "--radii", "1,2", "--trials", "3", "--eps0", "0.5"],
])
def test_subcommands_emit_records(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    for ln in out.splitlines():
        assert "kind" in json.loads(ln)
    assert config_of(err)["command"] == argv[0]


def test_render_svg(capsys, tmp_path):
    f = tmp_path / "x.svg"
    code, _, _ = run(capsys, "render", "--vmin", "0.2", "--eps", "0.2", "--target", "0,0",
                     "--ball", "0,0", "--radii", "1,2", "--resolution", "32", "--out", str(f))
    assert code == 0
    assert f.read_text().startswith("<?xml")


def test_ball_svg_and_jsonl(capsys, tmp_path):
    svg, rec = tmp_path / "b.svg", tmp_path / "b.jsonl"
    code, _, _ = run(capsys, "ball", "--eps", "0.2", "--radii", "1", "--resolution", "32",
                     "--svg", str(svg), "--out", str(rec))
    assert code == 0 and svg.exists()
    assert read_jsonl(rec)[0]["kind"] == "BallLevel"


@pytest.mark.parametrize("argv", [
    ["sample", "--radius", "-1"],
    ["sample", "--beta", "2"],
    ["geodesic", "--from", "0,0"],
    ["geodesic", "--from", "zero", "--to", "1,0"],
    ["nonsense"],
    ["sweep", "--from", "0,0", "--to", "1,0", "--eps-list", "0.1,0.2"],
    ["sweep", "--vmin", "0.5", "--from", "0,0", "--to", "1,0", "--eps-list", "0.4"],
    ["ball", "--resolution", "8"],
    ["geodesic", "--scene", "/nonexistent/s.txt", "--from", "0,0", "--to", "1,0"],
    ["render", "--out", "/nonexistent/dir/x.svg"],
])
def test_validation_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "error" in err


def test_check_arcs_passes(capsys):
    code, out, _ = run(capsys, "check", "arcs")
    assert code == 0 and json.loads(out)["pass"]


def test_check_poisson_passes(capsys):
    code, out, _ = run(capsys, "check", "poisson", "--trials", "2000")
    assert code == 0
    assert all(json.loads(ln)["pass"] for ln in out.splitlines())


def test_check_poisson_fails_with_wrong_beta(capsys, monkeypatch):
    # counts drawn at beta=3 judged against the beta=4 law fail the check
    from roadmetric import analysis

    real = analysis.road_count
    monkeypatch.setattr(analysis, "road_count", lambda R, v, b, s: real(R, v, 3.0, s))
    code, _, _ = run(capsys, "check", "poisson", "--trials", "2000", "--beta", "4")
    assert code == 2


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "roadmetric.cli", "check", "arcs"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "config:" in r.stderr
