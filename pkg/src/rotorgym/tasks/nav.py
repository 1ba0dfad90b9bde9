"""Fly through a cluttered corridor to a goal using a downsampled depth image."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import ControlMode, EnvironmentConfig, builtin, load_environment_config
from ..control import ControlCommand
from ..dynamics import check_collisions
from ..render.sensors import CameraModel, depth_downsample, render_depth_batch
from ..render.world import closest_distance
from ..rotations import euler_from_rotmat, matTvec, quat_to_rotmat, rot_z
from ..scene import build_environments, rerandomize
from .base import TaskConfig, VecTask
from .position import vehicle_to_world

DEPTH_SHAPE = (12, 16)


@dataclass(frozen=True)
class NavConfig:
    """Scene, sensor and sampling settings of the navigation task."""

    environment: EnvironmentConfig | None = None
    camera: CameraModel = CameraModel.from_fov(16, 12, 1.5184, t_min=0.2, t_max=10.0, position=(0.1, 0.0, 0.0))
    start: tuple = ((0.0, -2.0, 1.0), (1.5, 2.0, 2.5))
    goal: tuple = ((10.5, -2.0, 1.0), (12.0, 2.0, 2.5))
    min_goal_distance: float = 5.0
    clearance: float = 0.5
    max_tries: int = 200
    max_speed: float = 2.0
    max_yaw_rate: float = 1.0
    rerandomize_on_reset: bool = True
    render_every: int = 1

    def resolved_environment(self) -> EnvironmentConfig:
        return self.environment or load_environment_config(builtin("nav.yaml"))


def squash_action(actions: np.ndarray, max_speed: float, max_yaw_rate: float) -> np.ndarray:
    """Clip raw outputs to [-1, 1] and scale them affinely to command bounds."""
    a = np.clip(actions, -1.0, 1.0)
    scale = np.array([max_speed, max_speed, max_speed, max_yaw_rate])
    return a * scale


class NavTask(VecTask):
    """Observation ``[n_hat_V, |n|, roll, pitch, v_B, omega, a_prev, depth]`` (16 + 192 wide).

    ``n`` is goal minus position; ``n_hat_V`` is its direction in the vehicle
    frame. Actions are raw outputs squashed to vehicle-frame velocity and yaw
    rate commands.
    """

    action_dim = 4
    obs_dim = 3 + 1 + 2 + 3 + 3 + 4 + DEPTH_SHAPE[0] * DEPTH_SHAPE[1]

    def __init__(self, robot, num_envs, seed=0, config: TaskConfig | None = None, nav: NavConfig | None = None,
                 env_ids=None, workers=1, **kw):
        self.nav = nav or NavConfig()
        self.env_cfg = self.nav.resolved_environment()
        lo, hi = self.env_cfg.bounds_array
        config = config or TaskConfig(bounds=(tuple(lo), tuple(hi)))
        super().__init__(robot, num_envs, seed, config, env_ids=env_ids, workers=workers, **kw)
        self.worlds, self.world_rngs = build_environments(self.env_cfg, self.store.env_ids, workers)
        self.depth = np.ones((num_envs,) + DEPTH_SHAPE)
        self.sensor_counter = 0

    def _free(self, i: int, p: np.ndarray) -> bool:
        w = self.worlds[i]
        return w is None or w.num_faces == 0 or closest_distance(w, p) > self.nav.clearance

    def _reset_rows(self, rows):
        if self.nav.rerandomize_on_reset:
            for i in rows:
                rerandomize(self.worlds[i], self.env_cfg, self.world_rngs[i])
        super()._reset_rows(rows)
        for i in rows:
            self.store.positions[i], self.goals[i] = self.sample_start_goal(i)

    def sample_start_goal(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Rejection-sample a collision-free start and goal at least ``min_goal_distance`` apart."""
        g = self.store.rng_streams[i]
        for _ in range(self.nav.max_tries):
            start = g.uniform(self.nav.start[0], self.nav.start[1])
            goal = g.uniform(self.nav.goal[0], self.nav.goal[1])
            d = goal - start
            if np.sqrt(np.dot(d, d)) < self.nav.min_goal_distance:
                continue
            if self._free(i, start) and self._free(i, goal):
                return start, goal
        raise RuntimeError(f"env {int(self.store.env_ids[i])}: no free start/goal after {self.nav.max_tries} tries")

    def _after_physics(self, rows=None):
        if rows is None:
            self.sensor_counter += 1
            if (self.sensor_counter - 1) % self.nav.render_every:
                return
            rows = np.arange(self.num_envs)
        if len(rows) == 0:
            return
        s = self.store
        depth = render_depth_batch([self.worlds[i] for i in rows], self.nav.camera, s.positions[rows],
                                   s.orientations[rows], self.workers)
        for j, i in enumerate(rows):
            self.depth[i] = depth_downsample(depth[j], DEPTH_SHAPE, self.nav.camera.t_max)

    def _collisions(self):
        lo, hi = self.env_cfg.bounds_array
        return check_collisions(self.store, self.worlds, self.robot.collision_radius, bounds=(lo, hi))

    def _command(self, actions):
        a = squash_action(actions, self.nav.max_speed, self.nav.max_yaw_rate)
        cmd = np.empty_like(a)
        cmd[:, :3] = vehicle_to_world(self.store, a[:, :3])
        cmd[:, 3] = a[:, 3]
        return ControlCommand(ControlMode.VELOCITY, cmd)

    def _observe(self):
        s = self.store
        R = quat_to_rotmat(s.orientations)
        rpy = euler_from_rotmat(R)
        n_w = self.goals - s.positions
        n_v = matTvec(rot_z(rpy[:, 2]), n_w)
        dist = np.sqrt(np.sum(n_v * n_v, axis=1))
        safe = np.where(dist > 1e-9, dist, 1.0)
        n_hat = np.where((dist > 1e-9)[:, None], n_v / safe[:, None], 0.0)
        return np.concatenate([n_hat, dist[:, None], rpy[:, :2], matTvec(R, s.linear_velocities),
                               s.angular_velocities, s.previous_actions,
                               self.depth.reshape(self.num_envs, -1)], axis=1)
