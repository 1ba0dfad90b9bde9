"""Batched multirotor simulation: controller, allocation, motors, IMU and rigid body."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import ControlMode, RobotConfig
from .control import AllocationMatrix, ControlCommand, Controller, allocate, build_allocation
from .dynamics import RigidBodyParams, Wrench, aggregate_motor_wrench, drag_wrench, step_rigid_body
from .imu import sample_imu
from .motors import Integrator, MotorArrays, MotorDiagnostics, step_motor, thrust_to_rpm
from .parallel import map_chunks
from .rotations import matTvec, matvec, quat_to_rotmat
from .state import StateStore, allocate as allocate_store

E3 = np.array([0.0, 0.0, 1.0])


class Simulator:
    """Owns a :class:`StateStore` and advances it one control step at a time.

    A control step is ``substeps`` physics steps of ``dt / substeps`` each;
    the controller, allocation, motor model and (optionally) the IMU run at
    the physics rate.
    """

    def __init__(
        self,
        robot: RobotConfig,
        num_envs: int,
        seed: int = 0,
        dt: float = 0.01,
        substeps: int = 2,
        env_ids: Sequence[int] | None = None,
        motor_integrator: Integrator | str = Integrator.RK4,
        imu: bool = False,
        workers: int = 1,
        action_dim: int | None = None,
        **store_kw,
    ):
        if dt <= 0 or substeps < 1:
            raise ValueError("dt must be > 0 and substeps >= 1")
        self.robot = robot
        self.dt = float(dt)
        self.substeps = int(substeps)
        self.physics_dt = self.dt / self.substeps
        self.workers = int(workers)
        self.integrator = Integrator(motor_integrator)
        self.imu_enabled = imu
        self.store: StateStore = allocate_store(num_envs, robot, seed, action_dim, env_ids, **store_kw)
        self.params = RigidBodyParams.from_robot(robot)
        self.motors = MotorArrays.from_specs(robot.motors)
        self.allocation: AllocationMatrix = build_allocation(robot.motors)
        self.gains = robot.gains.effective(robot.mass, robot.inertia_matrix)
        self.controller = Controller(num_envs, self.params, self.gains)
        self.diagnostics = MotorDiagnostics()
        self.substep_count = 0
        self.last_net_force = np.zeros((num_envs, 3))

    @property
    def num_envs(self) -> int:
        return self.store.num_envs

    @property
    def u_max(self) -> np.ndarray:
        return self.motors.max_thrust

    def hover_thrusts(self) -> np.ndarray:
        W = np.zeros(6)
        W[2] = self.robot.mass * self.robot.gravity
        return allocate(W, self.allocation, self.u_max)

    def _substep(self, command: ControlCommand | None, rpm_ref_fixed, rows: np.ndarray, imu_now: bool) -> None:
        s = self.store
        if rpm_ref_fixed is not None:
            rpm_ref = rpm_ref_fixed[rows]
        else:
            if command.mode is ControlMode.MOTOR:
                thrust = np.clip(command.values[rows], 0.0, self.u_max)
            else:
                sub = ControlCommand(command.mode, command.values[rows])
                W = self.controller(s, sub, rows)
                thrust = allocate(W, self.allocation, self.u_max)
            rpm_ref = thrust_to_rpm(thrust, self.motors.thrust_constant, self.motors.rpm_max, self.diagnostics)
        m = self.motors
        rpm = step_motor(s.motor_rpm[rows], rpm_ref, m.tau_inc, m.tau_dec, self.physics_dt, self.integrator, m.rpm_max)
        s.motor_rpm[rows] = rpm
        wrench = aggregate_motor_wrench(rpm, m)
        R = quat_to_rotmat(s.orientations[rows])
        v_body = matTvec(R, s.linear_velocities[rows])
        total = wrench + drag_wrench(v_body, self.params)
        net = matvec(R, total.force) - (self.params.mass * self.params.gravity) * E3
        self.last_net_force[rows] = net
        if imu_now:
            sample_imu(net, s.angular_velocities[rows], s, self.robot.imu, self.params.mass,
                       self.params.gravity, rows=rows, R=R)
        step_rigid_body(s, total, self.params, self.physics_dt, rows=rows)

    def step(self, command: ControlCommand | None = None, rpm_setpoints=None) -> None:
        """Advance every env by one control step.

        Either a :class:`ControlCommand` (any mode) or raw ``rpm_setpoints``
        of shape ``(N, n)`` is required.
        """
        if (command is None) == (rpm_setpoints is None):
            raise ValueError("pass exactly one of command or rpm_setpoints")
        if command is not None and len(command.values) != self.num_envs:
            raise ValueError("command batch size must equal num_envs")
        fixed = None if rpm_setpoints is None else np.broadcast_to(
            np.asarray(rpm_setpoints, dtype=float), self.store.motor_rpm.shape)
        for _ in range(self.substeps):
            imu_now = self.imu_enabled and self.substep_count % self.robot.imu.decimation == 0
            map_chunks(lambda rows: self._substep(command, fixed, rows, imu_now), self.num_envs, self.workers)
            self.substep_count += 1

    def reset_rows(self, rows) -> None:
        self.controller.reset(rows)
        self.last_net_force[rows] = 0.0


def body_wrench_of(sim: Simulator) -> Wrench:
    return aggregate_motor_wrench(sim.store.motor_rpm, sim.motors)
