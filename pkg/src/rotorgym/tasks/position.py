"""Reach a 3-D goal with velocity or acceleration commands given in the vehicle frame."""

from __future__ import annotations

import numpy as np

from ..config import ControlMode
from ..control import ControlCommand
from ..rotations import matTvec, matvec, quat_to_rotmat, rot_z, yaw_from_rotmat
from .base import VecTask


def vehicle_to_world(store, vec_v: np.ndarray) -> np.ndarray:
    """Rotate vehicle-frame vectors (yaw-only frame of the body) into the world frame."""
    R = quat_to_rotmat(store.orientations)
    return matvec(rot_z(yaw_from_rotmat(R)), vec_v)


class PositionTask(VecTask):
    """Observation ``[e, q, v_B, omega, a_prev]`` (17 wide); action ``[x, y, z, yaw_rate]``.

    ``e`` is goal minus position in the world frame. The first three action
    entries are a velocity (``action_mode="velocity"``) or an acceleration in
    the vehicle frame.
    """

    action_dim = 4
    obs_dim = 17

    def __init__(self, robot, num_envs, seed=0, config=None, action_mode: str = "velocity", **kw):
        self.action_mode = ControlMode(action_mode)
        if self.action_mode not in (ControlMode.VELOCITY, ControlMode.ACCELERATION):
            raise ValueError("position task actions are velocity or acceleration commands")
        super().__init__(robot, num_envs, seed, config, **kw)

    def _command(self, actions):
        cmd = np.empty_like(actions)
        cmd[:, :3] = vehicle_to_world(self.store, actions[:, :3])
        cmd[:, 3] = actions[:, 3]
        return ControlCommand(self.action_mode, cmd)

    def _observe(self):
        s = self.store
        R = quat_to_rotmat(s.orientations)
        v_b = matTvec(R, s.linear_velocities)
        return np.concatenate([self.goals - s.positions, s.orientations, v_b, s.angular_velocities,
                               s.previous_actions], axis=1)
