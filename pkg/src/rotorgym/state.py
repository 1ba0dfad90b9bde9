"""Env-major batched simulation state, updated in place by every phase."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .config import RobotConfig
from .rotations import quat_from_euler, quat_norm

DEFAULT_MEMORY_BUDGET = 4 * 1024**3


class CapacityError(MemoryError):
    pass


class DegenerateQuaternionError(FloatingPointError):
    pass


@dataclass
class StateStore:
    """All per-env arrays share leading dimension ``num_envs``.

    Linear velocity is kept in the world frame, angular velocity in the body
    frame. ``env_ids`` are the global env indices the rows stand for; they
    seed the per-env random streams, so a store holding only env 5 draws the
    same numbers as row 5 of a larger store.
    """

    num_envs: int
    positions: np.ndarray
    orientations: np.ndarray
    linear_velocities: np.ndarray
    angular_velocities: np.ndarray
    motor_rpm: np.ndarray
    previous_actions: np.ndarray
    imu_bias_accel: np.ndarray
    imu_bias_gyro: np.ndarray
    imu_accel: np.ndarray
    imu_gyro: np.ndarray
    episode_step: np.ndarray
    rng_streams: list[np.random.Generator]
    env_ids: np.ndarray
    base_seed: int = 0

    def nbytes(self) -> int:
        return sum(v.nbytes for v in vars(self).values() if isinstance(v, np.ndarray))

    def rng_states(self) -> list[dict]:
        return [g.bit_generator.state for g in self.rng_streams]

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in vars(self).items() if isinstance(v, np.ndarray)}


def make_rng(base_seed: int, env_id: int) -> np.random.Generator:
    key = (int(base_seed) ^ int(env_id)) & ((1 << 64) - 1)
    return np.random.Generator(np.random.Philox(key=key))


def state_width(num_motors: int, action_dim: int) -> int:
    return 3 + 4 + 3 + 3 + num_motors + action_dim + 3 * 4 + 1


def allocate(
    num_envs: int,
    robot: RobotConfig,
    seed: int = 0,
    action_dim: int | None = None,
    env_ids: Sequence[int] | None = None,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> StateStore:
    if num_envs < 1:
        raise ValueError("num_envs must be >= 1")
    n = robot.num_motors
    a = n if action_dim is None else action_dim
    need = num_envs * state_width(n, a) * 8
    if need > memory_budget:
        raise CapacityError(f"{num_envs} envs need {need} bytes of state, budget is {memory_budget}")
    ids = np.arange(num_envs) if env_ids is None else np.asarray(env_ids, dtype=np.int64)
    if len(ids) != num_envs:
        raise ValueError("env_ids length must equal num_envs")
    quat = np.zeros((num_envs, 4))
    quat[:, 0] = 1.0
    z3 = lambda: np.zeros((num_envs, 3))  # noqa: E731
    return StateStore(
        num_envs=num_envs,
        positions=z3(),
        orientations=quat,
        linear_velocities=z3(),
        angular_velocities=z3(),
        motor_rpm=np.zeros((num_envs, n)),
        previous_actions=np.zeros((num_envs, a)),
        imu_bias_accel=z3(),
        imu_bias_gyro=z3(),
        imu_accel=z3(),
        imu_gyro=z3(),
        episode_step=np.zeros(num_envs, dtype=np.int64),
        rng_streams=[make_rng(seed, int(i)) for i in ids],
        env_ids=ids,
        base_seed=int(seed),
    )


Range3 = tuple[Sequence[float], Sequence[float]]


@dataclass(frozen=True)
class ResetSpec:
    """Per-axis uniform ranges ``(lo, hi)`` used when an env is reset.

    ``motor_rpm`` is either a number or ``"hover"`` for the hover trim.
    """

    position: Range3 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    attitude: Range3 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    velocity: Range3 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    angular_rate: Range3 = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    motor_rpm: Union[float, str] = "hover"

    def __post_init__(self):
        for name in ("position", "attitude", "velocity", "angular_rate"):
            lo, hi = getattr(self, name)
            if len(lo) != 3 or len(hi) != 3 or any(a > b for a, b in zip(lo, hi)):
                raise ValueError(f"{name}: range must be two ordered 3-vectors")
        if isinstance(self.motor_rpm, str) and self.motor_rpm != "hover":
            raise ValueError("motor_rpm must be a number or 'hover'")

    @classmethod
    def from_dict(cls, d: dict) -> "ResetSpec":
        kw = {k: tuple(tuple(float(x) for x in r) for r in d[k]) for k in ("position", "attitude", "velocity", "angular_rate") if k in d}
        if "motor_rpm" in d:
            kw["motor_rpm"] = d["motor_rpm"] if d["motor_rpm"] == "hover" else float(d["motor_rpm"])
        return cls(**kw)


def _check_ids(store: StateStore, env_ids) -> np.ndarray:
    ids = np.arange(store.num_envs) if env_ids is None else np.asarray(env_ids, dtype=np.int64).reshape(-1)
    if len(ids) and (ids.min() < 0 or ids.max() >= store.num_envs):
        raise IndexError(f"env ids out of range [0, {store.num_envs})")
    return ids


def reset_envs(store: StateStore, env_ids, spec: ResetSpec, robot: RobotConfig) -> np.ndarray:
    """Resample the named rows from their own streams. Returns the row ids."""
    ids = _check_ids(store, env_ids)
    rpm = robot.hover_rpm() if spec.motor_rpm == "hover" else float(spec.motor_rpm)
    for i in ids:
        g = store.rng_streams[i]
        store.positions[i] = g.uniform(spec.position[0], spec.position[1])
        rpy = g.uniform(spec.attitude[0], spec.attitude[1])
        store.linear_velocities[i] = g.uniform(spec.velocity[0], spec.velocity[1])
        store.angular_velocities[i] = g.uniform(spec.angular_rate[0], spec.angular_rate[1])
        store.orientations[i] = quat_from_euler(rpy)
    if len(ids):
        store.motor_rpm[ids] = rpm
        store.previous_actions[ids] = 0.0
        store.imu_bias_accel[ids] = 0.0
        store.imu_bias_gyro[ids] = 0.0
        store.imu_accel[ids] = 0.0
        store.imu_gyro[ids] = 0.0
        store.episode_step[ids] = 0
    return ids


def renormalize_orientations(store: StateStore, env_ids=None) -> None:
    ids = _check_ids(store, env_ids) if env_ids is not None else slice(None)
    q = store.orientations[ids]
    n = quat_norm(q)
    if np.any(n <= 0.5) or not np.all(np.isfinite(n)):
        bad = np.flatnonzero(~(n > 0.5))
        raise DegenerateQuaternionError(f"quaternion norm collapsed in rows {bad.tolist()}")
    store.orientations[ids] = q / n[:, None]
