"""Throughput benchmarks, trajectory recording and sensor dumps."""

from __future__ import annotations

import csv
import hashlib
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import EnvironmentConfig, RobotConfig
from .control import ControlCommand
from .render.export import write_matrix, write_pgm16, write_point_cloud
from .render.sensors import CameraModel, render_camera, render_camera_batch, render_lidar
from .render.world import build_world
from .rotations import matTvec, quat_from_euler, quat_to_rotmat, rot_z, yaw_from_rotmat
from .scene import build_environment, build_environments, world_rng
from .sim import Simulator
from .state import ResetSpec, reset_envs
from .tasks import TASKS, MotorTask, PositionTask, TaskConfig, make_task

TASK_NAMES = tuple(TASKS)

# External GPU figures, printed for context only and never asserted.
REFERENCE_PHYSICS = "reference: 65536 envs at 4.43e6 SPS (desktop GPU figure, not comparable)"
REFERENCE_RENDER = "reference: 2048 envs, 8x8 depth at 37597 FPS (desktop GPU figure, not comparable)"


@dataclass
class BenchReport:
    kind: str
    num_envs: int
    steps: int
    wall_time: float
    seed: int
    peak_memory_bytes: int
    frames: int = 0
    machine_note: str = field(default_factory=lambda: f"{platform.machine()} {platform.python_implementation()} "
                                                       f"{platform.python_version()}")
    reference: str = ""
    digest: str = ""

    @property
    def sps(self) -> float:
        return self.num_envs * self.steps / self.wall_time

    @property
    def fps(self) -> float:
        return self.num_envs * self.frames / self.wall_time

    def format(self) -> str:
        lines = [
            f"== {self.kind} ==",
            f"num_envs        {self.num_envs}",
            f"steps           {self.steps}",
        ]
        if self.frames:
            lines.append(f"frames          {self.frames}")
        lines += [
            f"wall_time_s     {self.wall_time:.6f}",
            f"physics_sps     {self.sps:.1f}",
        ]
        if self.frames:
            lines.append(f"render_fps      {self.fps:.1f}")
        lines += [
            f"peak_memory_b   {self.peak_memory_bytes}",
            f"seed            {self.seed}",
            f"result_sha256   {self.digest}",
            f"machine         {self.machine_note}",
        ]
        if self.reference:
            lines.append(f"-- {self.reference}")
        return "\n".join(lines)


def state_digest(*arrays: np.ndarray) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


def bench_physics(robot: RobotConfig, num_envs: int, steps: int, dt: float = 0.01, seed: int = 0,
                  workers: int = 1) -> BenchReport:
    """Motor and rigid-body loop only, every motor held at its hover RPM setpoint."""
    sim = Simulator(robot, num_envs, seed=seed, dt=dt, substeps=1, workers=workers)
    reset_envs(sim.store, None, ResetSpec(), robot)
    rpm = np.full(robot.num_motors, robot.hover_rpm())
    sim.step(rpm_setpoints=rpm)  # warm-up: compile and touch every buffer
    t0 = time.perf_counter()
    for _ in range(steps):
        sim.step(rpm_setpoints=rpm)
    wall = time.perf_counter() - t0
    s = sim.store
    return BenchReport("bench-physics", num_envs, steps, wall, seed, s.nbytes(), reference=REFERENCE_PHYSICS,
                       digest=state_digest(s.positions, s.orientations, s.linear_velocities, s.angular_velocities))


def bench_render(robot: RobotConfig, scene: EnvironmentConfig, camera: CameraModel, num_envs: int, frames: int,
                 dt: float = 0.01, seed: int = 0, workers: int = 1, worlds=None) -> BenchReport:
    """Depth and segmentation per env per frame with the position controller holding each robot in place.

    ``worlds`` may pass prebuilt scenes (one per env) to keep scene
    construction out of repeated runs; it is never part of the timing.
    """
    if worlds is None:
        worlds, _ = build_environments(scene, range(num_envs), workers)
    elif len(worlds) != num_envs:
        raise ValueError("need one world per env")
    sim = Simulator(robot, num_envs, seed=seed, dt=dt, workers=workers)
    reset_envs(sim.store, None, ResetSpec(), robot)
    cmd = ControlCommand("position", np.zeros((num_envs, 4)))
    s = sim.store
    render_camera_batch(worlds[:1], camera, s.positions[:1], s.orientations[:1])
    h = hashlib.sha256()
    t0 = time.perf_counter()
    for _ in range(frames):
        sim.step(cmd)
        depth, seg = render_camera_batch(worlds, camera, s.positions, s.orientations, workers)
        h.update(depth.tobytes())
        h.update(seg.tobytes())
    wall = time.perf_counter() - t0
    mem = s.nbytes() + sum(w.tris.nbytes + sum(a.nbytes for a in w.bvh) for w in worlds if w is not None)
    mem += num_envs * camera.width * camera.height * (8 + 8 + 8 * 3)
    return BenchReport("bench-render", num_envs, frames, wall, seed, int(mem), frames=frames,
                       reference=REFERENCE_RENDER, digest=h.hexdigest())


# ----------------------------------------------------------------- recording

TRAJECTORY_COLUMNS = (
    ["step", "time", "env", "px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"]
)
SQUARE_SIDE = 1.0
WAYPOINT_TOLERANCE = 0.03


def square_waypoints(origin: np.ndarray, side: float = SQUARE_SIDE) -> np.ndarray:
    """Corners of a square in the horizontal plane, ending back at ``origin``."""
    offs = np.array([[side, 0, 0], [side, side, 0], [0, side, 0], [0, 0, 0]], dtype=float)
    return origin[:, None, :] + offs[None]


class ScriptedWaypoints:
    """Proportional velocity command toward the current corner, in the vehicle frame."""

    def __init__(self, task, gain: float = 1.5, max_speed: float = 1.0):
        self.task = task
        self.gain = gain
        self.max_speed = max_speed
        self.waypoints = square_waypoints(task.store.positions.copy())
        self.index = np.zeros(task.num_envs, dtype=np.int64)

    def __call__(self) -> np.ndarray:
        s = self.task.store
        rows = np.arange(self.task.num_envs)
        idx = np.minimum(self.index, self.waypoints.shape[1] - 1)
        err = self.waypoints[rows, idx] - s.positions
        dist = np.sqrt(np.sum(err * err, axis=1))
        advance = (dist < WAYPOINT_TOLERANCE) & (self.index < self.waypoints.shape[1] - 1)
        self.index = self.index + advance
        idx = np.minimum(self.index, self.waypoints.shape[1] - 1)
        err = self.waypoints[rows, idx] - s.positions
        v = self.gain * err
        speed = np.sqrt(np.sum(v * v, axis=1, keepdims=True))
        v = np.where(speed > self.max_speed, v * (self.max_speed / np.maximum(speed, 1e-12)), v)
        yaw = yaw_from_rotmat(quat_to_rotmat(s.orientations))
        out = np.zeros((self.task.num_envs, 4))
        out[:, :3] = matTvec(rot_z(yaw), v)
        return out


def make_policy(task, name: str, seed: int = 0):
    """Callable returning a batch of actions for ``task``."""
    n, k = task.num_envs, task.action_dim
    if name == "hover":
        if isinstance(task, MotorTask):
            a = task.hover_action()
            return lambda: a
        return lambda: np.zeros((n, k))
    if name == "random":
        rng = np.random.Generator(np.random.Philox(key=seed))
        if isinstance(task, MotorTask):
            hover = task.hover_action()
            return lambda: hover * rng.uniform(0.9, 1.1, (n, k))
        return lambda: rng.uniform(-0.5, 0.5, (n, k))
    if name in ("scripted-waypoints", "waypoints"):
        if not isinstance(task, PositionTask):
            raise ValueError("scripted-waypoints drives the position task")
        return ScriptedWaypoints(task)
    raise ValueError(f"unknown policy {name!r}")


def record_trajectory(task_name: str, policy: str, steps: int, output, robot: RobotConfig, num_envs: int = 1,
                      seed: int = 0, dt: float = 0.01, workers: int = 1) -> Path:
    """Roll out ``policy`` and write one stacked CSV (``env`` column) of states, actions and rewards."""
    cfg = TaskConfig(episode_length=steps + 1, dt=dt)
    kw = {"config": cfg, "workers": workers}
    if task_name == "nav":
        kw.pop("config")
    task = make_task(task_name, robot, num_envs, seed, **kw)
    task.reset()
    act = make_policy(task, policy, seed)
    out = Path(output)
    if out.suffix.lower() != ".csv":
        out = out / f"{task_name}_{policy}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    header = TRAJECTORY_COLUMNS + [f"a{j}" for j in range(task.action_dim)] + ["reward", "terminated", "truncated"]
    s = task.store
    with open(out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        for k in range(steps):
            a = act()
            res = task.step(a)
            for i in range(num_envs):
                row = [k + 1, f"{(k + 1) * task.config.dt:.6f}", i]
                row += [repr(float(x)) for x in s.positions[i]]
                row += [repr(float(x)) for x in s.orientations[i]]
                row += [repr(float(x)) for x in s.linear_velocities[i]]
                row += [repr(float(x)) for x in s.angular_velocities[i]]
                row += [repr(float(x)) for x in a[i]]
                row += [repr(float(res.rewards[i])), int(res.terminated[i]), int(res.truncated[i])]
                w.writerow(row)
    return out


def read_trajectory(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, j] for j, name in enumerate(header)}


def run_task(task_name: str, robot: RobotConfig, num_envs: int, steps: int, seed: int = 0, workers: int = 1,
             policy: str = "random") -> dict:
    """Seeded rollout; the digest covers every observation and reward, so equal digests mean bitwise-equal runs."""
    task = make_task(task_name, robot, num_envs, seed, workers=workers)
    obs = task.reset()
    act = make_policy(task, policy, seed)
    h = hashlib.sha256(obs.tobytes())
    total, resets = 0.0, 0
    t0 = time.perf_counter()
    for _ in range(steps):
        res = task.step(act())
        h.update(res.observations.tobytes())
        h.update(res.rewards.tobytes())
        h.update(res.terminated.tobytes())
        h.update(res.truncated.tobytes())
        total += float(res.rewards.sum())
        resets += int(res.info["reset"].sum())
    wall = time.perf_counter() - t0
    return {"task": task_name, "num_envs": num_envs, "steps": steps, "seed": seed, "workers": workers,
            "wall_time_s": wall, "mean_reward": total / (num_envs * steps), "resets": resets,
            "sha256": h.hexdigest()}


# ------------------------------------------------------------------- dumps

DEFAULT_POSES = (((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),)


def dump_sensor_frames(scene: EnvironmentConfig | None, sensor, poses: Sequence = DEFAULT_POSES, output_dir=".",
                       env_id: int = 0) -> list[Path]:
    """Write every channel of the sensor at each ``(position, rpy)`` pose.

    Distances go to 16-bit PGM in millimetres (0 = no return); ids, normals
    and points go to CSV.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    world = build_environment(scene, world_rng(scene, env_id), env_id) if scene is not None else None
    if world is None:
        world = build_world([])
    files = []
    for k, (pos, rpy) in enumerate(poses):
        pose = (np.asarray(pos, dtype=float), quat_from_euler(np.asarray(rpy, dtype=float)))
        img = render_camera(world, sensor, pose) if isinstance(sensor, CameraModel) else render_lidar(world, sensor, pose)
        H, W = img.shape
        if img.depth is not None:
            files.append(out / f"depth_{k:03d}.pgm")
            write_pgm16(files[-1], img.depth)
        files.append(out / f"range_{k:03d}.pgm")
        write_pgm16(files[-1], img.range)
        files.append(out / f"segmentation_{k:03d}.csv")
        write_matrix(files[-1], img.segmentation)
        files.append(out / f"face_index_{k:03d}.csv")
        write_matrix(files[-1], img.face_index)
        files.append(out / f"normal_{k:03d}.csv")
        write_matrix(files[-1], img.normal.reshape(H * W, 3), fmt="%.6f")
        files.append(out / f"points_{k:03d}.csv")
        write_point_cloud(files[-1], img)
    return files
