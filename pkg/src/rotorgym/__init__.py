"""Batched n-rotor simulation with geometric control, motor/IMU models and a BVH ray-caster."""

from .config import (
    ControlMode,
    EnvironmentConfig,
    RobotConfig,
    load_environment_config,
    load_mesh,
    load_robot_config,
    load_sensor_config,
)
from .sim import Simulator
from .state import ResetSpec, StateStore

__version__ = "0.1.0"

__all__ = [
    "ControlMode",
    "EnvironmentConfig",
    "RobotConfig",
    "ResetSpec",
    "Simulator",
    "StateStore",
    "load_environment_config",
    "load_mesh",
    "load_robot_config",
    "load_sensor_config",
]
