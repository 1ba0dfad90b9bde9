"""Accelerometer/gyroscope model: Gaussian white noise plus random-walk bias."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .config import IMU_PRESETS, ImuParams
from .rotations import matTvec, quat_to_rotmat, random_rotation, rotmat_from_euler
from .state import StateStore

__all__ = ["ImuParams", "ImuSample", "IMU_PRESETS", "sample_imu", "configure_mounting"]

E3 = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class ImuSample:
    accel: np.ndarray
    gyro: np.ndarray


def specific_force(net_force_world, R, mass: float, gravity: float):
    """Body-frame accelerometer measurand ``R^T (F / m + g e3)``."""
    return matTvec(R, net_force_world / mass + gravity * E3)


def _draw_normals(store: StateStore, rows: np.ndarray, k: int) -> np.ndarray:
    out = np.empty((len(rows), k))
    for j, i in enumerate(rows):
        out[j] = store.rng_streams[i].standard_normal(k)
    return out


def sample_imu(
    net_force_world,
    omega_body,
    store: StateStore,
    params: ImuParams,
    mass: float,
    gravity: float = 9.81,
    rows=None,
    R=None,
) -> ImuSample:
    """Sample the IMU for the given rows and advance their biases in place.

    The bias random walk steps first and the fresh bias is added to this
    sample. Truth is rotated into the sensor frame by ``mount^T``; bias and
    noise are sensor-frame quantities. Each row draws 12 normals from its
    own stream per call, in a fixed order, even when a sigma is zero.
    """
    idx = np.arange(store.num_envs) if rows is None else np.asarray(rows)
    if R is None:
        R = quat_to_rotmat(store.orientations[idx])
    mount = params.mount
    a_true = matTvec(np.broadcast_to(mount, R.shape), specific_force(np.asarray(net_force_world), R, mass, gravity))
    w_true = matTvec(np.broadcast_to(mount, R.shape), np.asarray(omega_body))

    z = _draw_normals(store, idx, 12)
    store.imu_bias_accel[idx] = store.imu_bias_accel[idx] + np.asarray(params.sigma_bias_accel) * z[:, 0:3]
    store.imu_bias_gyro[idx] = store.imu_bias_gyro[idx] + np.asarray(params.sigma_bias_gyro) * z[:, 3:6]
    accel = a_true + store.imu_bias_accel[idx] + np.asarray(params.sigma_accel) * z[:, 6:9]
    gyro = w_true + store.imu_bias_gyro[idx] + np.asarray(params.sigma_gyro) * z[:, 9:12]
    store.imu_accel[idx] = accel
    store.imu_gyro[idx] = gyro
    return ImuSample(accel, gyro)


def configure_mounting(
    params: ImuParams,
    mount=None,
    rpy_range=None,
    rng: np.random.Generator | None = None,
) -> ImuParams:
    """Set the sensor-to-body rotation, optionally perturbed by random roll/pitch/yaw.

    ``rpy_range`` is ``(lo, hi)`` per axis in radians; ``"uniform"`` draws a
    uniformly distributed rotation instead.
    """
    M = np.eye(3) if mount is None else np.asarray(mount, dtype=float)
    if not np.allclose(M.T @ M, np.eye(3), atol=1e-9) or np.linalg.det(M) < 0:
        raise ValueError("mount must be a proper rotation")
    if rpy_range is not None:
        rng = rng if rng is not None else np.random.default_rng()
        if isinstance(rpy_range, str) and rpy_range == "uniform":
            P = random_rotation(rng)
        else:
            P = rotmat_from_euler(rng.uniform(rpy_range[0], rpy_range[1]))
        M = M @ P
    return replace(params, mount_rotation=tuple(tuple(float(x) for x in row) for row in M))
