"""Thrust/RPM conversion and first-order motor speed dynamics."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import MotorSpec


class Integrator(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class MotorArrays:
    """Column-stacked motor parameters, broadcastable against ``(N, n)`` RPM arrays."""

    thrust_constant: np.ndarray
    torque_coefficient: np.ndarray
    direction: np.ndarray
    tau_inc: np.ndarray
    tau_dec: np.ndarray
    rpm_max: np.ndarray
    positions: np.ndarray
    axes: np.ndarray

    @classmethod
    def from_specs(cls, specs: Sequence[MotorSpec]) -> "MotorArrays":
        col = lambda name: np.array([getattr(s, name) for s in specs], dtype=float)  # noqa: E731
        return cls(
            thrust_constant=col("thrust_constant"),
            torque_coefficient=col("torque_coefficient"),
            direction=col("direction"),
            tau_inc=col("tau_inc"),
            tau_dec=col("tau_dec"),
            rpm_max=col("rpm_max"),
            positions=np.array([s.position for s in specs], dtype=float),
            axes=np.array([s.thrust_axis for s in specs], dtype=float),
        )

    @property
    def max_thrust(self) -> np.ndarray:
        return self.thrust_constant * self.rpm_max**2


class MotorDiagnostics:
    """Counts negative thrust requests that were clamped to zero."""

    def __init__(self):
        self.negative_thrust_clamps = 0

    def reset(self):
        self.negative_thrust_clamps = 0


def thrust_to_rpm(u_ref, thrust_constant, rpm_max=np.inf, diagnostics: MotorDiagnostics | None = None):
    """Solve ``u = c_f r^2`` for ``r``, clamped to ``[0, rpm_max]``."""
    u_ref = np.asarray(u_ref, dtype=float)
    neg = u_ref < 0
    if diagnostics is not None:
        diagnostics.negative_thrust_clamps += int(np.count_nonzero(neg))
    u = np.where(neg, 0.0, u_ref)
    return np.minimum(np.sqrt(u / thrust_constant), rpm_max)


def rpm_to_thrust(rpm, thrust_constant):
    rpm = np.asarray(rpm, dtype=float)
    return thrust_constant * rpm * rpm


def motor_forces(rpm, motors: MotorArrays):
    """Per-motor thrust ``c_f r^2`` and reaction torque ``-d c_tau u``."""
    u = rpm_to_thrust(rpm, motors.thrust_constant)
    return u, -motors.direction * motors.torque_coefficient * u


def step_motor(rpm, rpm_ref, tau_inc, tau_dec, dt: float, method: Integrator | str = Integrator.RK4, rpm_max=np.inf):
    """Advance ``dr/dt = (r_ref - r) / tau`` by one step.

    The time constant is picked once from the sign of ``r_ref - r`` at the
    start of the step and held for every RK4 stage.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    r = np.asarray(rpm, dtype=float)
    ref = np.asarray(rpm_ref, dtype=float)
    tau = np.where(ref >= r, tau_inc, tau_dec)
    method = Integrator(method)
    if method is Integrator.EULER:
        out = r + dt * (ref - r) / tau
    else:
        f = lambda x: (ref - x) / tau  # noqa: E731
        k1 = f(r)
        k2 = f(r + 0.5 * dt * k1)
        k3 = f(r + 0.5 * dt * k2)
        k4 = f(r + dt * k3)
        out = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return np.clip(out, 0.0, rpm_max)
