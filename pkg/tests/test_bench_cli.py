import csv

import numpy as np
import pytest

from rotorgym import cli
from rotorgym.bench import (
    TRAJECTORY_COLUMNS,
    BenchReport,
    bench_physics,
    read_trajectory,
    record_trajectory,
    run_task,
)
from rotorgym.render import read_pgm16


def test_report_arithmetic():
    rep = BenchReport("bench-physics", 64, 100, 0.25, 0, 1024)
    assert rep.sps == 64 * 100 / 0.25
    text = rep.format()
    assert "physics_sps     25600.0" in text and "render_fps" not in text
    rep = BenchReport("bench-render", 8, 10, 0.5, 0, 1024, frames=10, reference="reference: x")
    assert rep.fps == 8 * 10 / 0.5 and "render_fps      160.0" in rep.format()
    assert rep.format().endswith("-- reference: x")


def test_bench_physics_deterministic(quad):
    a = bench_physics(quad, 8, 20, seed=3)
    b = bench_physics(quad, 8, 20, seed=3, workers=4)
    assert a.digest == b.digest and a.peak_memory_bytes > 0


def test_run_task_digest_stable(quad):
    a = run_task("position", quad, 4, 30, seed=1)
    b = run_task("position", quad, 4, 30, seed=1, workers=2)
    c = run_task("position", quad, 4, 30, seed=2)
    assert a["sha256"] == b["sha256"] != c["sha256"]


def test_record_csv(quad, tmp_path):
    path = record_trajectory("position", "scripted-waypoints", 50, tmp_path, quad)
    assert path.name == "position_scripted-waypoints.csv"
    with open(path, encoding="utf-8") as f:
        header = next(csv.reader(f))
    assert header == TRAJECTORY_COLUMNS + ["a0", "a1", "a2", "a3", "reward", "terminated", "truncated"]
    data = read_trajectory(path)
    assert len(data["step"]) == 50 and data["step"][-1] == 50
    assert data["px"][-1] > 0.1  # the square path starts along +x


def test_record_motor_hover_stays_put(quad, tmp_path):
    path = record_trajectory("motor", "hover", 100, tmp_path / "m.csv", quad, num_envs=2)
    data = read_trajectory(path)
    assert set(data["env"]) == {0.0, 1.0}
    assert np.max(np.abs(data["pz"])) < 1e-3


def test_unknown_policy(quad, tmp_path):
    with pytest.raises(ValueError):
        record_trajectory("position", "wander", 5, tmp_path, quad)
    with pytest.raises(ValueError):
        record_trajectory("motor", "scripted-waypoints", 5, tmp_path, quad)


# ------------------------------------------------------------------------- CLI


def test_cli_bench_physics(capsys):
    assert cli.main(["bench-physics", "--num-envs", "16", "--steps", "10", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    fields = dict(line.split(None, 1) for line in out.splitlines()[1:] if not line.startswith("--"))
    sps = float(fields["physics_sps"])
    wall = float(fields["wall_time_s"])
    assert sps == pytest.approx(16 * 10 / wall, rel=1e-3)
    assert "not comparable" in out and fields["seed"] == "4"


def test_cli_bench_render(capsys):
    argv = ["bench-render", "--num-envs", "4", "--frames", "2", "--resolution", "16x12", "--workers", "2"]
    assert cli.main(argv) == 0
    out = capsys.readouterr().out
    assert "render_fps" in out and "frames          2" in out


def test_cli_run_task(capsys):
    assert cli.main(["run-task", "--task", "motor", "--num-envs", "2", "--steps", "5"]) == 0
    out = capsys.readouterr().out
    assert "sha256" in out and "resets" in out


def test_cli_record(tmp_path, capsys):
    assert cli.main(["record", "--task", "position", "--policy", "random", "--steps", "7",
                     "--output", str(tmp_path)]) == 0
    path = tmp_path / "position_random.csv"
    assert path.exists() and len(path.read_text(encoding="utf-8").splitlines()) == 8


def test_cli_dump_frames(tmp_path):
    argv = ["dump-frames", "--env", "src/rotorgym/data/cubes20.yaml", "--resolution", "32x18",
            "--pose", "0,0,0", "--pose", "0,0,0,0,0,0.5", "--output", str(tmp_path)]
    assert cli.main(argv) == 0
    depth = read_pgm16(tmp_path / "depth_000.pgm")
    assert depth.shape == (18, 32) and depth.max() > 0
    assert (tmp_path / "depth_001.pgm").read_bytes()[:2] == b"P5"
    seg = np.loadtxt(tmp_path / "segmentation_000.csv", delimiter=",", skiprows=1)
    assert seg.shape == (18, 32) and set(np.unique(seg)) <= set(range(-1, 21))
    assert (tmp_path / "points_000.csv").read_text(encoding="utf-8").startswith("x,y,z,seg")


def test_cli_dump_lidar(tmp_path):
    assert cli.main(["dump-frames", "--sensor", "src/rotorgym/data/lidar_dome.yaml", "--env",
                     "src/rotorgym/data/nav.yaml", "--pose", "0.5,0,1", "--output", str(tmp_path)]) == 0
    rng = read_pgm16(tmp_path / "range_000.pgm")
    assert rng.shape == (128, 512) and not (tmp_path / "depth_000.pgm").exists()


def test_cli_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("mass: -1\n")
    assert cli.main(["bench-physics", "--robot", str(bad), "--steps", "1"]) == 2
    assert "error:" in capsys.readouterr().err
    assert cli.main(["dump-frames", "--sensor", "src/rotorgym/data/lidar_dome.yaml", "--resolution", "4x4",
                     "--output", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        cli.main(["bench-render", "--resolution", "wide"])
    with pytest.raises(SystemExit):
        cli.main(["dump-frames", "--pose", "1,2"])
