"""Hold a goal by commanding per-motor thrusts directly."""

from __future__ import annotations

import numpy as np

from ..config import ControlMode
from ..control import ControlCommand
from ..rotations import quat_to_rotmat
from .base import VecTask


def rotation_to_6d(R) -> np.ndarray:
    """First two columns of ``R`` stacked: ``(R[:,0], R[:,1])``."""
    R = np.asarray(R, dtype=float)
    return np.concatenate([R[..., :, 0], R[..., :, 1]], axis=-1)


class MotorTask(VecTask):
    """Observation ``[e_W, R6, v_W, omega]`` (15 wide); action: one thrust (N) per motor.

    Thrusts outside ``[0, max_thrust]`` are clamped by the motor stage.
    """

    obs_dim = 15

    def __init__(self, robot, num_envs, seed=0, config=None, **kw):
        self.action_dim = robot.num_motors
        super().__init__(robot, num_envs, seed, config, **kw)

    def hover_action(self) -> np.ndarray:
        return np.tile(self.sim.hover_thrusts(), (self.num_envs, 1))

    def _command(self, actions):
        return ControlCommand(ControlMode.MOTOR, actions)

    def _observe(self):
        s = self.store
        R = quat_to_rotmat(s.orientations)
        return np.concatenate([self.goals - s.positions, rotation_to_6d(R), s.linear_velocities,
                               s.angular_velocities], axis=1)
