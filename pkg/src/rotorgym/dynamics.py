"""Rigid-body 6-DOF integration, motor and drag wrenches, collision flags."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import RobotConfig
from .motors import MotorArrays, motor_forces
from .rotations import cross, matvec, quat_exp, quat_mul, quat_to_rotmat
from .state import StateStore, renormalize_orientations

E3 = np.array([0.0, 0.0, 1.0])


class DivergenceError(FloatingPointError):
    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"state diverged in rows {self.rows}")


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray
    frame: str = "B"

    def __add__(self, other: "Wrench") -> "Wrench":
        if other.frame != self.frame:
            raise ValueError("cannot add wrenches in different frames")
        return Wrench(self.force + other.force, self.torque + other.torque, self.frame)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque], axis=-1)


@dataclass(frozen=True)
class RigidBodyParams:
    mass: float
    inertia: np.ndarray
    inertia_inv: np.ndarray
    gravity: float = 9.81
    drag_linear: np.ndarray = field(default_factory=lambda: np.zeros(3))
    drag_quadratic: np.ndarray = field(default_factory=lambda: np.zeros(3))
    collision_radius: float = 0.2
    # divergence ceilings: position (m), velocity (m/s), body rate (rad/s)
    max_position: float = 1e6
    max_velocity: float = 1e4
    max_rate: float = 1e5

    @classmethod
    def from_robot(cls, robot: RobotConfig, **kw) -> "RigidBodyParams":
        J = robot.inertia_matrix
        return cls(
            mass=robot.mass,
            inertia=J,
            inertia_inv=np.linalg.inv(J),
            gravity=robot.gravity,
            drag_linear=np.array(robot.drag_linear),
            drag_quadratic=np.array(robot.drag_quadratic),
            collision_radius=robot.collision_radius,
            **kw,
        )


def aggregate_motor_wrench(rpm, motors: MotorArrays) -> Wrench:
    """Body-frame force and torque of all motors at the given speeds."""
    rpm = np.asarray(rpm, dtype=float)
    u, reaction = motor_forces(rpm, motors)
    force = np.zeros(rpm.shape[:-1] + (3,))
    torque = np.zeros(rpm.shape[:-1] + (3,))
    for k in range(rpm.shape[-1]):
        f_k = u[..., k, None] * motors.axes[k]
        force = force + f_k
        torque = torque + cross(np.broadcast_to(motors.positions[k], f_k.shape), f_k)
        torque = torque + reaction[..., k, None] * motors.axes[k]
    return Wrench(force, torque)


def drag_wrench(v_body, params: RigidBodyParams) -> Wrench:
    v = np.asarray(v_body, dtype=float)
    force = -params.drag_linear * v - params.drag_quadratic * (np.abs(v) * v)
    return Wrench(force, np.zeros_like(force))


def step_rigid_body(store: StateStore, wrench: Wrench, params: RigidBodyParams, dt: float, rows=None) -> None:
    """One semi-implicit Euler step of the rows given (all rows by default).

    ``wrench`` is the total body-frame wrench on those rows, drag included.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if wrench.frame != "B":
        raise ValueError("step_rigid_body expects a body-frame wrench")
    sel = slice(None) if rows is None else rows
    q = store.orientations[sel]
    R = quat_to_rotmat(q)
    acc = matvec(R, wrench.force) / params.mass - params.gravity * E3
    v = store.linear_velocities[sel] + dt * acc
    p = store.positions[sel] + dt * v

    w = store.angular_velocities[sel]
    J = np.broadcast_to(params.inertia, w.shape[:-1] + (3, 3))
    Jinv = np.broadcast_to(params.inertia_inv, J.shape)
    w_dot = matvec(Jinv, wrench.torque - cross(w, matvec(J, w)))
    w = w + dt * w_dot
    q = quat_mul(q, quat_exp(dt * w))

    bad = ~(
        np.all(np.abs(p) <= params.max_position, axis=-1)
        & np.all(np.abs(v) <= params.max_velocity, axis=-1)
        & np.all(np.abs(w) <= params.max_rate, axis=-1)
        & np.all(np.isfinite(q), axis=-1)
    )
    if np.any(bad):
        base = np.arange(store.num_envs)[sel]
        raise DivergenceError(base[bad])
    store.linear_velocities[sel] = v
    store.positions[sel] = p
    store.angular_velocities[sel] = w
    store.orientations[sel] = q
    renormalize_orientations(store, None if rows is None else rows)


def kinetic_energy(store: StateStore, params: RigidBodyParams) -> np.ndarray:
    v, w = store.linear_velocities, store.angular_velocities
    Jw = matvec(np.broadcast_to(params.inertia, w.shape[:-1] + (3, 3)), w)
    return 0.5 * params.mass * np.sum(v * v, axis=-1) + 0.5 * np.sum(w * Jw, axis=-1)


def angular_momentum_world(store: StateStore, params: RigidBodyParams) -> np.ndarray:
    w = store.angular_velocities
    R = quat_to_rotmat(store.orientations)
    return matvec(R, matvec(np.broadcast_to(params.inertia, R.shape), w))


def check_collisions(store: StateStore, worlds: Sequence, radius: float, bounds=None, rows=None) -> np.ndarray:
    """True where the robot sphere touches its env's mesh or leaves ``bounds``.

    ``worlds[i]`` is the :class:`~rotorgym.render.WorldMesh` of row ``i``
    (``None`` for an empty env).
    """
    from .render.world import closest_distance

    idx = np.arange(store.num_envs) if rows is None else np.asarray(rows)
    out = np.zeros(len(idx), dtype=bool)
    pos = store.positions[idx]
    if bounds is not None:
        lo, hi = np.asarray(bounds[0]), np.asarray(bounds[1])
        out |= np.any(pos < lo, axis=1) | np.any(pos > hi, axis=1)
    for j, i in enumerate(idx):
        world = worlds[i]
        if world is None or world.num_faces == 0 or out[j]:
            continue
        out[j] = closest_distance(world, pos[j], radius) <= radius
    return out
