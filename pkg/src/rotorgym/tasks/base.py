"""Vectorized reset/step loop shared by every task."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..config import RobotConfig
from ..control import ControlCommand
from ..sim import Simulator
from ..state import ResetSpec, reset_envs


@dataclass(frozen=True)
class RewardWeights:
    progress: float = 1.0
    rate: float = 0.05
    action_delta: float = 0.05
    goal_bonus: float = 1.0
    collision_penalty: float = 10.0
    goal_radius: float = 0.2


def compute_reward(prev_dist, dist, omega, action, prev_action, collision, weights: RewardWeights = RewardWeights()):
    """Progress toward the goal minus rate and action-jerk costs, plus goal bonus and collision penalty."""
    omega = np.asarray(omega, dtype=float)
    da = np.asarray(action, dtype=float) - np.asarray(prev_action, dtype=float)
    r = (weights.progress * (np.asarray(prev_dist) - np.asarray(dist))
         - weights.rate * np.sqrt(np.sum(omega * omega, axis=-1))
         - weights.action_delta * np.sqrt(np.sum(da * da, axis=-1)))
    r = r + weights.goal_bonus * (np.asarray(dist) < weights.goal_radius)
    return r - weights.collision_penalty * np.asarray(collision, dtype=bool)


@dataclass
class StepResult:
    observations: np.ndarray
    rewards: np.ndarray
    terminated: np.ndarray
    truncated: np.ndarray
    info: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class TaskConfig:
    """Knobs shared by all tasks. ``goal`` ranges are per-axis ``(lo, hi)``."""

    episode_length: int = 500
    dt: float = 0.01
    substeps: int = 2
    reset: ResetSpec = ResetSpec()
    goal: tuple = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    bounds: tuple | None = ((-10.0, -10.0, -10.0), (10.0, 10.0, 10.0))
    reward: RewardWeights = RewardWeights()
    nan_penalty: float = 10.0

    def __post_init__(self):
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        lo, hi = self.goal
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("goal range must be ordered")


class VecTask:
    """Gymnasium-style batched task.

    Subclasses define ``action_dim``, ``obs_dim``, :meth:`_command` and
    :meth:`_observe`. Finished envs are reset inside :meth:`step`; their last
    observation goes to ``info["final_observation"]`` and ``info["reset"]``
    flags them.
    """

    action_dim: int = 0
    obs_dim: int = 0

    def __init__(self, robot: RobotConfig, num_envs: int, seed: int = 0, config: TaskConfig | None = None,
                 env_ids: Sequence[int] | None = None, workers: int = 1, **sim_kw):
        self.robot = robot
        self.config = config or TaskConfig()
        self.workers = workers
        self.sim = Simulator(robot, num_envs, seed=seed, dt=self.config.dt, substeps=self.config.substeps,
                             env_ids=env_ids, workers=workers, action_dim=self.action_dim, **sim_kw)
        self.goals = np.zeros((num_envs, 3))
        self.prev_dist = np.zeros(num_envs)
        self._needs_reset = True

    @property
    def num_envs(self) -> int:
        return self.sim.num_envs

    @property
    def store(self):
        return self.sim.store

    # -- hooks
    def _command(self, actions: np.ndarray) -> ControlCommand:
        raise NotImplementedError

    def _observe(self) -> np.ndarray:
        raise NotImplementedError

    def _sample_goals(self, rows: np.ndarray) -> None:
        g = self.config.goal
        for i in rows:
            self.goals[i] = self.store.rng_streams[i].uniform(g[0], g[1])

    def _reset_rows(self, rows: np.ndarray) -> None:
        reset_envs(self.store, rows, self.config.reset, self.robot)
        self._sample_goals(rows)

    def _collisions(self) -> np.ndarray:
        b = self.config.bounds
        if b is None:
            return np.zeros(self.num_envs, dtype=bool)
        p = self.store.positions
        return np.any(p < np.asarray(b[0]), axis=1) | np.any(p > np.asarray(b[1]), axis=1)

    def _after_physics(self, rows: np.ndarray | None = None) -> None:
        """Sensor refresh hook; ``rows=None`` means every env."""

    # -- API
    def goal_distance(self) -> np.ndarray:
        d = self.goals - self.store.positions
        return np.sqrt(np.sum(d * d, axis=1))

    def reset(self, env_ids=None) -> np.ndarray:
        """Reset the given rows (all by default) and return the full observation batch."""
        rows = np.arange(self.num_envs) if env_ids is None else np.asarray(env_ids, dtype=np.int64).reshape(-1)
        if len(rows) and (rows.min() < 0 or rows.max() >= self.num_envs):
            raise IndexError("env ids out of range")
        self._reset_rows(rows)
        self.sim.reset_rows(rows)
        self.prev_dist[rows] = self.goal_distance()[rows]
        self._needs_reset = False
        self._after_physics(rows)
        return self._observe()

    def step(self, actions) -> StepResult:
        if self._needs_reset:
            raise RuntimeError("call reset() before step()")
        a = np.asarray(actions, dtype=float)
        if a.shape != (self.num_envs, self.action_dim):
            raise ValueError(f"actions must have shape ({self.num_envs}, {self.action_dim}), got {a.shape}")
        bad = ~np.all(np.isfinite(a), axis=1)
        a = np.where(bad[:, None], 0.0, a)
        s = self.store
        self.sim.step(self._command(a))
        s.episode_step += 1
        self._after_physics()

        collision = self._collisions()
        dist = self.goal_distance()
        rewards = compute_reward(self.prev_dist, dist, s.angular_velocities, a, s.previous_actions, collision,
                                 self.config.reward)
        rewards = rewards - self.config.nan_penalty * bad
        diverged = ~np.all(np.isfinite(s.positions), axis=1)
        terminated = collision | bad | diverged
        truncated = (s.episode_step >= self.config.episode_length) & ~terminated
        s.previous_actions[:] = a
        self.prev_dist[:] = dist

        obs = self._observe()
        done = terminated | truncated
        info: dict[str, Any] = {"reset": done, "collision": collision, "nan_action": bad, "distance": dist}
        if np.any(done):
            info["final_observation"] = obs[done].copy()
            obs = self.reset(np.flatnonzero(done))
        return StepResult(obs, rewards, terminated, truncated, info)
