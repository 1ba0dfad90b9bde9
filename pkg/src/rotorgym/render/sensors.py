"""Camera and lidar projection models on top of :mod:`rotorgym.render.world`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..parallel import map_chunks, map_items
from ..rotations import matmul3, matvec, quat_to_rotmat, rotmat_from_euler
from . import bvh as _bvh
from .world import MISS, WorldMesh, cast_rays, occluded, pack_worlds

SHADOW_EPS = 1e-4

# optical frame (x right, y down, z forward) expressed in the sensor frame
# (x forward, y left, z up)
R_SENSOR_OPTICAL = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera. ``position``/``rotation`` place the sensor frame in the body frame."""

    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float
    t_min: float = 0.1
    t_max: float = 10.0
    position: tuple = (0.0, 0.0, 0.0)
    rotation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    stereo_baseline: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("camera dimensions must be positive")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be < t_max")
        if self.stereo_baseline < 0:
            raise ValueError("stereo_baseline must be >= 0")

    @classmethod
    def from_fov(cls, width: int, height: int, hfov: float, **kw) -> "CameraModel":
        """Square pixels, principal point at the image centre, ``hfov`` in radians."""
        fx = (width / 2.0) / math.tan(hfov / 2.0)
        return cls(width, height, fx, fx, (width - 1) / 2.0, (height - 1) / 2.0, **kw)

    def with_resolution(self, width: int, height: int) -> "CameraModel":
        sx, sy = width / self.width, height / self.height
        return replace(self, width=width, height=height, fx=self.fx * sx, fy=self.fy * sy,
                       cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)

    def pixel_rays(self) -> tuple[np.ndarray, np.ndarray]:
        """Unit optical-frame ray per pixel ``(H, W, 3)`` and the unnormalised ``(x', y')``."""
        u = np.arange(self.width, dtype=float)
        v = np.arange(self.height, dtype=float)
        xp = (u[None, :] - self.cx) / self.fx
        yp = (v[:, None] - self.cy) / self.fy
        xp, yp = np.broadcast_arrays(xp, yp)
        d = np.stack([xp, yp, np.ones_like(xp)], axis=-1)
        d = d / np.sqrt(xp * xp + yp * yp + 1.0)[..., None]
        return d, np.stack([xp, yp], axis=-1)

    def body_rotation(self) -> np.ndarray:
        """Optical frame to body frame."""
        return np.asarray(self.rotation, dtype=float) @ R_SENSOR_OPTICAL


@dataclass(frozen=True)
class LidarPattern:
    azimuths: tuple
    elevations: tuple
    t_min: float = 0.2
    t_max: float = 20.0
    position: tuple = (0.0, 0.0, 0.0)
    rotation: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))

    def __post_init__(self):
        if len(self.azimuths) == 0 or len(self.elevations) == 0:
            raise ValueError("lidar needs at least one azimuth and one elevation")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be < t_max")

    @classmethod
    def grid(cls, n_azimuth: int, n_elevation: int, elevation_range=(-math.pi / 4, math.pi / 4),
             azimuth_range=(-math.pi, math.pi), **kw) -> "LidarPattern":
        """Evenly spaced beams; a full 2*pi azimuth sweep excludes the duplicate end point."""
        full = math.isclose(azimuth_range[1] - azimuth_range[0], 2 * math.pi)
        az = np.linspace(azimuth_range[0], azimuth_range[1], n_azimuth, endpoint=not full)
        el = np.linspace(elevation_range[0], elevation_range[1], n_elevation)
        return cls(tuple(az.tolist()), tuple(el.tolist()), **kw)

    def sensor_rays(self) -> np.ndarray:
        a = np.asarray(self.azimuths, dtype=float)[None, :]
        e = np.asarray(self.elevations, dtype=float)[:, None]
        return np.stack(np.broadcast_arrays(np.cos(e) * np.cos(a), np.cos(e) * np.sin(a), np.sin(e)), axis=-1)


@dataclass
class SensorImage:
    """Per-pixel channels. Invalid pixels hold -1 (distances) or -1 (ids).

    ``normal`` and ``points`` are world-frame; ``depth`` is ``None`` for lidars.
    """

    range: np.ndarray
    segmentation: np.ndarray
    normal: np.ndarray
    face_index: np.ndarray
    barycentric: np.ndarray
    valid: np.ndarray
    points: np.ndarray
    origin: np.ndarray
    rotation: np.ndarray
    depth: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.range.shape

    def invalidate(self, mask: np.ndarray) -> None:
        """Mark extra pixels invalid, writing the sentinels into every channel."""
        m = mask & self.valid
        self.valid = self.valid & ~mask
        self.range[m] = MISS
        if self.depth is not None:
            self.depth[m] = MISS
        self.segmentation[m] = -1
        self.face_index[m] = -1
        self.barycentric[m] = MISS
        self.normal[m] = 0.0
        self.points[m] = np.nan


def _pose(robot_pose):
    """``(position, quaternion or 3x3 rotation)`` -> ``(p, R)``."""
    p, r = robot_pose
    r = np.asarray(r, dtype=float)
    R = quat_to_rotmat(r) if r.shape == (4,) else r
    return np.asarray(p, dtype=float), R


def _fill(world, origin, dirs_world, t_range, shape):
    hits = cast_rays(world, origin, dirs_world.reshape(-1, 3), t_range)
    H, W = shape
    pts = np.where(hits.hit[:, None], origin + hits.t[:, None] * dirs_world.reshape(-1, 3), np.nan)
    return hits, dict(
        range=hits.t.reshape(H, W),
        segmentation=hits.segmentation.reshape(H, W),
        normal=hits.normal.reshape(H, W, 3),
        face_index=hits.face_index.reshape(H, W),
        barycentric=hits.barycentric.reshape(H, W, 2),
        valid=hits.hit.reshape(H, W),
        points=pts.reshape(H, W, 3),
    )


def render_camera(world: WorldMesh, cam: CameraModel, robot_pose) -> SensorImage:
    p, R_WB = _pose(robot_pose)
    R_WO = matmul3(R_WB, cam.body_rotation())
    origin = p + matvec(R_WB, np.asarray(cam.position, dtype=float))
    d_opt, _ = cam.pixel_rays()
    d_world = matvec(np.broadcast_to(R_WO, d_opt.shape[:-1] + (3, 3)), d_opt)
    hits, ch = _fill(world, origin, d_world, (cam.t_min, cam.t_max), (cam.height, cam.width))
    depth = np.where(ch["valid"], ch["range"] * d_opt[..., 2], MISS)
    img = SensorImage(origin=origin, rotation=R_WO, depth=depth, **ch)
    if cam.stereo_baseline > 0:
        img.invalidate(~stereo_shadow_mask(img, world, cam.stereo_baseline))
    return img


def render_lidar(world: WorldMesh, pattern: LidarPattern, robot_pose) -> SensorImage:
    p, R_WB = _pose(robot_pose)
    R_WS = matmul3(R_WB, np.asarray(pattern.rotation, dtype=float))
    origin = p + matvec(R_WB, np.asarray(pattern.position, dtype=float))
    d_s = pattern.sensor_rays()
    d_world = matvec(np.broadcast_to(R_WS, d_s.shape[:-1] + (3, 3)), d_s)
    _, ch = _fill(world, origin, d_world, (pattern.t_min, pattern.t_max), d_s.shape[:2])
    return SensorImage(origin=origin, rotation=R_WS, **ch)


def stereo_shadow_mask(image: SensorImage, world: WorldMesh, baseline: float, eps: float = SHADOW_EPS) -> np.ndarray:
    """Validity after removing pixels whose surface point the second camera cannot see.

    The second camera sits ``baseline`` metres along the optical x axis of the
    rendered (left) camera. A pixel is shadowed when the segment from its
    surface point back to the second camera hits geometry strictly between
    ``eps`` and ``dist - eps``.
    """
    valid = image.valid.copy()
    if baseline == 0.0 or not np.any(valid):
        return valid
    right = image.origin + baseline * image.rotation[:, 0]
    P = image.points[valid]
    d = right - P
    dist = np.sqrt(np.sum(d * d, axis=1))
    d = d / dist[:, None]
    blocked = occluded(world, P, d, eps, dist - eps)
    out = valid.copy()
    out[valid] = ~blocked
    return out


def depth_downsample(depth: np.ndarray, out_shape=(12, 16), max_range: float = 10.0) -> np.ndarray:
    """Block min-pool of a depth image scaled to ``[0, 1]``; invalid pixels count as far."""
    H, W = depth.shape
    oh, ow = out_shape
    if H % oh or W % ow:
        raise ValueError(f"image {H}x{W} not divisible into {oh}x{ow} blocks")
    d = np.where(depth < 0, max_range, np.minimum(depth, max_range))
    pooled = d.reshape(oh, H // oh, ow, W // ow).min(axis=(1, 3))
    return pooled / max_range


def render_batch(worlds: Sequence[WorldMesh], sensor, positions, orientations, workers: int = 1) -> list[SensorImage]:
    """Render one sensor per env; env ``i`` only ever reads ``worlds[i]``."""
    fn = render_camera if isinstance(sensor, CameraModel) else render_lidar

    def one(i):
        return fn(worlds[i], sensor, (positions[i], orientations[i]))

    return map_items(one, list(range(len(worlds))), workers)


def render_camera_batch(worlds: Sequence[WorldMesh | None], cam: CameraModel, positions, orientations,
                        workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Depth and segmentation images ``(N, H, W)`` of one camera per env in one packed traversal.

    Matches ``render_camera`` bitwise for cameras without a stereo baseline;
    env chunks are traced on ``workers`` threads.
    """
    if cam.stereo_baseline > 0:
        raise ValueError("batched rendering does not model stereo shadows; use render_camera")
    N = len(worlds)
    packed = pack_worlds(worlds)
    R_WB = quat_to_rotmat(np.asarray(orientations, dtype=float))
    p = np.asarray(positions, dtype=float)
    R_WO = matmul3(R_WB, np.broadcast_to(cam.body_rotation(), R_WB.shape))
    origin = p + matvec(R_WB, np.broadcast_to(np.asarray(cam.position, dtype=float), p.shape))
    d_opt, _ = cam.pixel_rays()
    K = cam.width * cam.height
    d_flat = d_opt.reshape(1, K, 3)
    d_world = matvec(np.broadcast_to(R_WO[:, None], (N, K, 3, 3)), np.broadcast_to(d_flat, (N, K, 3)))
    d_world = np.ascontiguousarray(d_world)
    origin = np.ascontiguousarray(origin)
    t = np.empty((N, K))
    face = np.empty((N, K), dtype=np.int64)

    def run(rows):
        face[rows], t[rows] = _bvh.cast_packed_kernel(origin[rows], d_world[rows], float(cam.t_min),
                                                      float(cam.t_max), packed.roots[rows], *packed.kernel_args())

    map_chunks(run, N, workers)
    hit = face >= 0
    depth = np.where(hit, t * d_flat[..., 2], MISS)
    seg_table = np.concatenate([np.zeros(0, np.int64)] + [w.face_segmentation for w in worlds
                                                          if w is not None and w.num_faces])
    seg = np.where(hit, seg_table[np.where(hit, face, 0)] if len(seg_table) else -1, -1)
    shape = (N, cam.height, cam.width)
    return depth.reshape(shape), seg.reshape(shape)


def render_depth_batch(worlds, cam: CameraModel, positions, orientations, workers: int = 1) -> np.ndarray:
    return render_camera_batch(worlds, cam, positions, orientations, workers)[0]


# --------------------------------------------------------------- config


def _placement(d: dict):
    pos = tuple(float(x) for x in d.get("position", (0.0, 0.0, 0.0)))
    R = rotmat_from_euler(np.asarray(d.get("rpy", (0.0, 0.0, 0.0)), dtype=float))
    return pos, tuple(tuple(float(x) for x in row) for row in R)


def sensor_from_dict(d: dict):
    """Build a :class:`CameraModel` or :class:`LidarPattern` from a config mapping."""
    if "preset" in d:
        base = SENSOR_PRESETS[d["preset"]]
        d = {**base, **{k: v for k, v in d.items() if k != "preset"}}
    kind = d.get("type")
    pos, rot = _placement(d)
    if kind == "camera":
        w, h = int(d["width"]), int(d["height"])
        kw = dict(t_min=float(d.get("t_min", 0.1)), t_max=float(d.get("t_max", 10.0)), position=pos, rotation=rot,
                  stereo_baseline=float(d.get("stereo_baseline", 0.0)))
        if "fx" in d:
            return CameraModel(w, h, float(d["fx"]), float(d.get("fy", d["fx"])),
                               float(d.get("cx", (w - 1) / 2)), float(d.get("cy", (h - 1) / 2)), **kw)
        return CameraModel.from_fov(w, h, float(d["hfov"]), **kw)
    if kind == "lidar":
        az = d["azimuth"]
        el = d["elevation"]
        return LidarPattern.grid(int(az["count"]), int(el["count"]), (float(el["min"]), float(el["max"])),
                                 (float(az["min"]), float(az["max"])), t_min=float(d.get("t_min", 0.2)),
                                 t_max=float(d.get("t_max", 20.0)), position=pos, rotation=rot)
    raise ValueError(f"sensor type must be 'camera' or 'lidar', got {kind!r}")


# Idealised sensors; field of view and resolution only, no noise.
SENSOR_PRESETS: dict[str, dict] = {
    "depth_270x480": dict(type="camera", width=480, height=270, hfov=math.radians(87.0), t_min=0.2, t_max=10.0),
    "depth_stereo_270x480": dict(type="camera", width=480, height=270, hfov=math.radians(87.0), t_min=0.2,
                                 t_max=10.0, stereo_baseline=0.095),
    "lidar_128x512": dict(type="lidar", azimuth=dict(min=-math.pi, max=math.pi, count=512),
                          elevation=dict(min=-math.pi / 4, max=math.pi / 4, count=128), t_min=0.3, t_max=35.0),
    "dome_lidar_128x512": dict(type="lidar", azimuth=dict(min=-math.pi, max=math.pi, count=512),
                               elevation=dict(min=0.0, max=math.pi / 2, count=128), t_min=0.3, t_max=35.0),
    "tof_8x8": dict(type="camera", width=8, height=8, hfov=math.radians(45.0), t_min=0.02, t_max=4.0),
}
