"""``rotorgym`` command line: benchmarks, task rollouts, recordings and sensor dumps."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .config import ConfigError, builtin, load_environment_config, load_robot_config, load_sensor_config
from .render.sensors import CameraModel


def resolution(text: str) -> tuple[int, int]:
    """Parse ``WxH`` into ``(width, height)``."""
    try:
        w, h = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"resolution must look like 480x270, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise argparse.ArgumentTypeError("resolution must be positive")
    return w, h


def pose(text: str) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Parse ``x,y,z[,roll,pitch,yaw]``."""
    vals = [float(x) for x in text.split(",")]
    if len(vals) not in (3, 6):
        raise argparse.ArgumentTypeError("pose needs 3 or 6 comma-separated numbers")
    return tuple(vals[:3]), tuple(vals[3:] or (0.0, 0.0, 0.0))


def _common(p: argparse.ArgumentParser, num_envs: int = 16) -> None:
    p.add_argument("--num-envs", type=int, default=num_envs)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--robot", type=Path, default=builtin("quad.yaml"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotorgym", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bench-physics", help="constant-RPM physics throughput")
    _common(p)
    p.add_argument("--steps", type=int, default=1000)

    p = sub.add_parser("bench-render", help="depth+segmentation throughput in the 20-cube scene")
    _common(p)
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--env", type=Path, default=builtin("cubes20.yaml"))
    p.add_argument("--sensor", type=Path, default=builtin("camera_d455_like.yaml"))
    p.add_argument("--resolution", type=resolution, default=None, metavar="WxH")

    p = sub.add_parser("run-task", help="seeded task rollout with a result digest")
    _common(p)
    p.add_argument("--task", choices=sorted(bench.TASK_NAMES), default="position")
    p.add_argument("--policy", default="random", choices=["hover", "random", "scripted-waypoints"])
    p.add_argument("--steps", type=int, default=500)

    p = sub.add_parser("record", help="write a trajectory CSV")
    _common(p, num_envs=1)
    p.add_argument("--task", choices=sorted(bench.TASK_NAMES), default="position")
    p.add_argument("--policy", default="hover", choices=["hover", "random", "scripted-waypoints"])
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--output", type=Path, default=Path("."))

    p = sub.add_parser("dump-frames", help="write sensor channels as PGM/CSV")
    p.add_argument("--env", type=Path, default=None, help="environment config (default: empty scene)")
    p.add_argument("--sensor", type=Path, default=builtin("camera_d455_like.yaml"))
    p.add_argument("--resolution", type=resolution, default=None, metavar="WxH")
    p.add_argument("--pose", type=pose, action="append", default=None, metavar="X,Y,Z[,R,P,Y]")
    p.add_argument("--seed", type=int, default=None, help="override the environment seed")
    p.add_argument("--output", type=Path, default=Path("frames"))
    return ap


def _sensor(path: Path, res):
    sensor = load_sensor_config(path)
    if res is not None:
        if not isinstance(sensor, CameraModel):
            raise ConfigError("resolution", "only cameras take --resolution")
        sensor = sensor.with_resolution(*res)
    return sensor


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bench-physics":
            robot = load_robot_config(args.robot)
            rep = bench.bench_physics(robot, args.num_envs, args.steps, args.dt, args.seed, args.workers)
            print(rep.format())
        elif args.command == "bench-render":
            robot = load_robot_config(args.robot)
            sensor = _sensor(args.sensor, args.resolution)
            if not isinstance(sensor, CameraModel):
                raise ConfigError("sensor", "bench-render needs a camera")
            scene = load_environment_config(args.env)
            rep = bench.bench_render(robot, scene, sensor, args.num_envs, args.frames, args.dt, args.seed,
                                     args.workers)
            print(rep.format())
        elif args.command == "run-task":
            robot = load_robot_config(args.robot)
            res = bench.run_task(args.task, robot, args.num_envs, args.steps, args.seed, args.workers, args.policy)
            print("== run-task ==")
            for k, v in res.items():
                print(f"{k:<15} {v:.6f}" if isinstance(v, float) else f"{k:<15} {v}")
        elif args.command == "record":
            robot = load_robot_config(args.robot)
            path = bench.record_trajectory(args.task, args.policy, args.steps, args.output, robot, args.num_envs,
                                           args.seed, args.dt, args.workers)
            print(f"wrote {path}")
        elif args.command == "dump-frames":
            scene = load_environment_config(args.env) if args.env else None
            if scene is not None and args.seed is not None:
                from dataclasses import replace

                scene = replace(scene, seed=args.seed)
            sensor = _sensor(args.sensor, args.resolution)
            files = bench.dump_sensor_frames(scene, sensor, args.pose or bench.DEFAULT_POSES, args.output)
            print(f"wrote {len(files)} files to {args.output}")
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
