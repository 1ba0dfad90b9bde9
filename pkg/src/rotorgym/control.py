"""Batched geometric controllers and pseudoinverse control allocation.

Errors follow the "desired minus actual" convention for position and
velocity (``e_x = x_d - x``), so the commanded force vector is
``k_x e_x + k_v e_v + m g e3 + m a_d`` and the thrust is its projection onto
the body z axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ControlGains, ControlMode, MotorSpec
from .dynamics import RigidBodyParams
from .rotations import (
    cross,
    dot3,
    matmul3,
    matTvec,
    matvec,
    norm3,
    quat_to_rotmat,
    transpose,
    vee,
    yaw_from_rotmat,
)
from .state import StateStore

E3 = np.array([0.0, 0.0, 1.0])
FORCE_EPS = 1e-8
HEADING_EPS = 1e-6


class SingularHeadingError(ArithmeticError):
    def __init__(self, rows):
        self.rows = list(rows)
        super().__init__(f"thrust axis parallel to heading in rows {self.rows}")


# ------------------------------------------------------------------ errors


def attitude_error(R, R_d):
    """``0.5 * vee(R_d^T R - R^T R_d)``."""
    E = matmul3(transpose(R_d), R)
    return 0.5 * vee(E - transpose(E))


def rate_error(omega, omega_d, R, R_d):
    """``omega - R^T R_d omega_d``."""
    return omega - matTvec(R, matvec(R_d, omega_d))


def body_torque(e_R, e_omega, omega, inertia, k_R, k_omega):
    """``-k_R e_R - k_omega e_omega + omega x J omega`` with per-axis gains."""
    J = np.broadcast_to(inertia, np.shape(omega)[:-1] + (3, 3))
    return -np.asarray(k_R) * e_R - np.asarray(k_omega) * e_omega + cross(omega, matvec(J, omega))


def desired_force(e_x, e_v, acc_d, mass: float, gravity: float, gains: ControlGains):
    """World-frame force the translational loop asks for."""
    kx, kv = np.asarray(gains.k_x), np.asarray(gains.k_v)
    return kx * e_x + kv * e_v + (mass * gravity) * E3 + mass * acc_d


def position_thrust(e_x, e_v, acc_d, R, mass: float, gravity: float, gains: ControlGains):
    """Collective thrust: the desired force projected on the body z axis."""
    F = desired_force(e_x, e_v, acc_d, mass, gravity, gains)
    return dot3(F, R[..., :, 2])


def _desired_orientation(force, yaw):
    """Returns ``(R_d, singular)``; singular rows hold the identity."""
    F = np.asarray(force, dtype=float)
    yaw = np.asarray(yaw, dtype=float)
    n = norm3(F)
    tiny = n <= FORCE_EPS
    b3 = F / np.where(tiny, 1.0, n)[..., None]
    chi = np.stack([np.cos(yaw), np.sin(yaw), np.zeros_like(yaw)], axis=-1)
    b2 = cross(b3, chi)
    m = norm3(b2)
    singular = tiny | (m < HEADING_EPS)
    b2 = b2 / np.where(singular, 1.0, m)[..., None]
    b1 = cross(b2, b3)
    R_d = np.stack([b1, b2, b3], axis=-1)
    if np.any(singular):
        R_d = np.where(singular[..., None, None], np.eye(3), R_d)
    return R_d, singular


def desired_orientation(force, yaw):
    """Rotation whose z axis is along ``force`` and whose heading follows ``yaw``.

    Columns are ``[b2 x b3, b2, b3]`` with ``b3 = force/|force|`` and
    ``b2 = b3 x chi / |b3 x chi|``, ``chi = (cos yaw, sin yaw, 0)``.
    """
    R_d, singular = _desired_orientation(force, yaw)
    if np.any(singular):
        raise SingularHeadingError(np.flatnonzero(np.atleast_1d(singular)))
    return R_d


# ------------------------------------------------------------------ allocation


@dataclass(frozen=True)
class AllocationMatrix:
    B: np.ndarray
    B_pinv: np.ndarray
    rank: int

    @property
    def num_motors(self) -> int:
        return self.B.shape[1]


def effectiveness_matrix(motors: Sequence[MotorSpec]) -> np.ndarray:
    """6 x n map from per-motor thrust to body wrench ``[f; M]``."""
    if len(motors) < 1:
        raise ValueError("at least one motor required")
    cols = []
    for m in motors:
        axis = np.asarray(m.thrust_axis, dtype=float)
        pos = np.asarray(m.position, dtype=float)
        torque = np.cross(pos, axis) - m.direction * m.torque_coefficient * axis
        cols.append(np.concatenate([axis, torque]))
    return np.array(cols).T


def build_allocation(motors: Sequence[MotorSpec], rcond: float = 1e-10) -> AllocationMatrix:
    B = effectiveness_matrix(motors)
    s = np.linalg.svd(B, compute_uv=False)
    rank = int(np.sum(s > rcond * s[0])) if s[0] > 0 else 0
    return AllocationMatrix(B, np.linalg.pinv(B, rcond=rcond), rank)


def allocate_unclamped(W_ref, alloc: AllocationMatrix):
    """``B^+ W_ref`` row by row, summed in a fixed order."""
    W = np.asarray(W_ref, dtype=float)
    return np.sum(alloc.B_pinv * W[..., None, :], axis=-1)


def allocate(W_ref, alloc: AllocationMatrix, u_max=np.inf):
    """Least-squares motor thrusts for a body wrench, clamped to ``[0, u_max]``."""
    return np.clip(allocate_unclamped(W_ref, alloc), 0.0, u_max)


# ------------------------------------------------------------------ controllers

COMMAND_WIDTH = {
    ControlMode.POSITION: 4,  # x, y, z, yaw
    ControlMode.VELOCITY: 4,  # vx, vy, vz (world), yaw rate
    ControlMode.ACCELERATION: 4,  # ax, ay, az (world), yaw rate
    ControlMode.ATTITUDE_THRUST: 5,  # qw, qx, qy, qz, thrust
    ControlMode.RATE_THRUST: 4,  # p, q, r, thrust
    ControlMode.BODY_WRENCH: 6,  # fx, fy, fz, mx, my, mz
}


@dataclass(frozen=True)
class ControlCommand:
    """Batched setpoints for one control mode. ``values`` is ``(N, width)``."""

    mode: ControlMode
    values: np.ndarray

    def __post_init__(self):
        mode = ControlMode(self.mode)
        object.__setattr__(self, "mode", mode)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if mode is not ControlMode.MOTOR and vals.shape[-1] != COMMAND_WIDTH[mode]:
            raise ValueError(f"{mode.value} command needs width {COMMAND_WIDTH[mode]}, got {vals.shape[-1]}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("command values must be finite")


def geometric_control(e_x, e_v, acc_d, yaw_d, omega_d, R, omega, params: RigidBodyParams, gains: ControlGains):
    """Shared core of the position, velocity and acceleration controllers.

    Returns ``(W_ref, singular)`` with ``W_ref = [0, 0, f, M]``.
    """
    F = desired_force(e_x, e_v, acc_d, params.mass, params.gravity, gains)
    f = dot3(F, R[..., :, 2])
    R_d, singular = _desired_orientation(F, yaw_d)
    e_R = attitude_error(R, R_d)
    e_w = rate_error(omega, omega_d, R, R_d)
    M = body_torque(e_R, e_w, omega, params.inertia, gains.k_R, gains.k_omega)
    z = np.zeros_like(f)
    return np.concatenate([np.stack([z, z, f], axis=-1), M], axis=-1), singular


def attitude_rate_control(R, R_d, omega, omega_d, thrust, params: RigidBodyParams, gains: ControlGains):
    e_R = attitude_error(R, R_d)
    e_w = rate_error(omega, omega_d, R, R_d)
    M = body_torque(e_R, e_w, omega, params.inertia, gains.k_R, gains.k_omega)
    z = np.zeros_like(thrust)
    return np.concatenate([np.stack([z, z, thrust], axis=-1), M], axis=-1)


def run_controller(store: StateStore, command: ControlCommand, params: RigidBodyParams, gains: ControlGains, rows=None):
    """Body wrench setpoints for the rows of ``store`` (all rows by default).

    ``gains`` must already be effective (see :meth:`ControlGains.effective`).
    Returns ``(W_ref, singular)``; singular rows hit the heading singularity.
    """
    sel = slice(None) if rows is None else rows
    mode = command.mode
    cmd = command.values
    p = store.positions[sel]
    v = store.linear_velocities[sel]
    w = store.angular_velocities[sel]
    R = quat_to_rotmat(store.orientations[sel])
    zero3 = np.zeros_like(p)
    no_sing = np.zeros(len(p), dtype=bool)

    if mode is ControlMode.POSITION:
        return geometric_control(cmd[:, :3] - p, zero3 - v, zero3, cmd[:, 3], zero3, R, w, params, gains)
    if mode is ControlMode.VELOCITY:
        omega_d = np.concatenate([zero3[:, :2], cmd[:, 3:4]], axis=1)
        return geometric_control(zero3, cmd[:, :3] - v, zero3, yaw_from_rotmat(R), omega_d, R, w, params, gains)
    if mode is ControlMode.ACCELERATION:
        omega_d = np.concatenate([zero3[:, :2], cmd[:, 3:4]], axis=1)
        return geometric_control(zero3, zero3, cmd[:, :3], yaw_from_rotmat(R), omega_d, R, w, params, gains)
    if mode is ControlMode.ATTITUDE_THRUST:
        q = cmd[:, :4] / np.linalg.norm(cmd[:, :4], axis=1, keepdims=True)
        W = attitude_rate_control(R, quat_to_rotmat(q), w, zero3, cmd[:, 4], params, gains)
        return W, no_sing
    if mode is ControlMode.RATE_THRUST:
        return attitude_rate_control(R, R, w, cmd[:, :3], cmd[:, 3], params, gains), no_sing
    if mode is ControlMode.BODY_WRENCH:
        return cmd.copy(), no_sing
    raise ValueError("motor mode bypasses the controller; feed thrusts to the motors directly")


class Controller:
    """Wraps :func:`run_controller` and holds the previous wrench for rows that
    hit the heading singularity."""

    def __init__(self, num_envs: int, params: RigidBodyParams, gains: ControlGains):
        self.params = params
        self.gains = gains
        self.last_wrench = np.zeros((num_envs, 6))
        self.last_wrench[:, 2] = params.mass * params.gravity
        self.singular_count = np.zeros(num_envs, dtype=np.int64)

    def __call__(self, store: StateStore, command: ControlCommand, rows=None):
        W, singular = run_controller(store, command, self.params, self.gains, rows)
        sel = np.arange(store.num_envs) if rows is None else np.asarray(rows)
        if np.any(singular):
            W = np.where(singular[:, None], self.last_wrench[sel], W)
            self.singular_count[sel] += singular
        self.last_wrench[sel] = W
        return W

    def reset(self, rows) -> None:
        self.last_wrench[rows] = 0.0
        self.last_wrench[rows, 2] = self.params.mass * self.params.gravity
