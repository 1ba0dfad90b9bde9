"""Robot, environment, sensor and task configuration plus OBJ mesh loading.

Configs are YAML documents with SI units and angles in radians. Every loader
validates the result and raises :class:`ConfigError` naming the offending
field. Loaded objects are frozen dataclasses and safe to share.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import yaml

log = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

Vec3 = tuple[float, float, float]


class ConfigError(ValueError):
    """Malformed or invalid configuration. ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class MeshError(ValueError):
    pass


class ControlMode(str, enum.Enum):
    POSITION = "position"
    VELOCITY = "velocity"
    ACCELERATION = "acceleration"
    ATTITUDE_THRUST = "attitude_thrust"
    RATE_THRUST = "rate_thrust"
    BODY_WRENCH = "body_wrench"
    MOTOR = "motor"


@dataclass(frozen=True)
class MotorSpec:
    position: Vec3
    thrust_axis: Vec3
    direction: int
    thrust_constant: float
    torque_coefficient: float
    tau_inc: float
    tau_dec: float
    rpm_max: float

    @property
    def max_thrust(self) -> float:
        return self.thrust_constant * self.rpm_max**2


@dataclass(frozen=True)
class ControlGains:
    """Per-axis controller gains.

    When ``normalized`` is set the translational gains are multiplied by the
    mass and the rotational gains by the inertia diagonal before use, so the
    same numbers work across airframes of different size.
    """

    k_x: Vec3 = (6.0, 6.0, 6.0)
    k_v: Vec3 = (4.0, 4.0, 4.0)
    k_R: Vec3 = (80.0, 80.0, 40.0)
    k_omega: Vec3 = (14.0, 14.0, 10.0)
    normalized: bool = True

    def effective(self, mass: float, inertia: np.ndarray) -> "ControlGains":
        if not self.normalized:
            return self
        jd = np.diag(np.asarray(inertia, dtype=float))
        return ControlGains(
            k_x=_vec3(np.multiply(self.k_x, mass)),
            k_v=_vec3(np.multiply(self.k_v, mass)),
            k_R=_vec3(np.multiply(self.k_R, jd)),
            k_omega=_vec3(np.multiply(self.k_omega, jd)),
            normalized=False,
        )


@dataclass(frozen=True)
class ImuParams:
    """Per-step noise levels of the accelerometer and gyroscope.

    ``sigma_*`` are discrete-step standard deviations. A datasheet noise
    density converts as ``density * sqrt(1 / dt)``; a bias instability
    random walk as ``density * sqrt(dt)``.
    """

    sigma_accel: Vec3 = (0.0, 0.0, 0.0)
    sigma_gyro: Vec3 = (0.0, 0.0, 0.0)
    sigma_bias_accel: Vec3 = (0.0, 0.0, 0.0)
    sigma_bias_gyro: Vec3 = (0.0, 0.0, 0.0)
    mount_rotation: tuple[Vec3, Vec3, Vec3] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    decimation: int = 1

    @property
    def mount(self) -> np.ndarray:
        return np.array(self.mount_rotation, dtype=float)


# Placeholder presets. The numbers are invented, shaped like a tactical-grade
# and a consumer-grade MEMS part at a 200 Hz step; they are not datasheet values.
IMU_PRESETS: dict[str, ImuParams] = {
    "vn100_like": ImuParams(
        sigma_accel=(0.0196,) * 3,
        sigma_gyro=(0.0037,) * 3,
        sigma_bias_accel=(4.0e-5,) * 3,
        sigma_bias_gyro=(2.0e-6,) * 3,
    ),
    "bmi085_like": ImuParams(
        sigma_accel=(0.0226,) * 3,
        sigma_gyro=(0.0028,) * 3,
        sigma_bias_accel=(1.4e-4,) * 3,
        sigma_bias_gyro=(4.0e-6,) * 3,
    ),
}


@dataclass(frozen=True)
class RobotConfig:
    mass: float
    inertia: tuple[Vec3, Vec3, Vec3]
    motors: tuple[MotorSpec, ...]
    drag_linear: Vec3 = (0.0, 0.0, 0.0)
    drag_quadratic: Vec3 = (0.0, 0.0, 0.0)
    collision_radius: float = 0.2
    control_mode: ControlMode = ControlMode.POSITION
    gains: ControlGains = field(default_factory=ControlGains)
    imu: ImuParams = field(default_factory=ImuParams)
    gravity: float = 9.81

    @property
    def num_motors(self) -> int:
        return len(self.motors)

    @property
    def inertia_matrix(self) -> np.ndarray:
        return np.array(self.inertia, dtype=float)

    def hover_rpm(self) -> float:
        """RPM at which all motors together cancel gravity along their axes."""
        axes = np.array([m.thrust_axis for m in self.motors])
        cf = np.array([m.thrust_constant for m in self.motors])
        lift = float(np.sum(cf * axes[:, 2]))
        if lift <= 0.0:
            raise ConfigError("motors", "no upward thrust component; hover undefined")
        return math.sqrt(self.mass * self.gravity / lift)


@dataclass(frozen=True)
class EnvironmentConfig:
    bounds: tuple[Vec3, Vec3] = ((-10.0, -10.0, 0.0), (10.0, 10.0, 10.0))
    obstacle_assets: tuple[str, ...] = ()
    obstacle_count: int = 0
    position_range: tuple[Vec3, Vec3] = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    rotation_range: tuple[Vec3, Vec3] = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    scale_range: tuple[float, float] = (1.0, 1.0)
    walls: bool = False
    seed: int = 0

    @property
    def bounds_array(self) -> np.ndarray:
        return np.array(self.bounds, dtype=float)


@dataclass(frozen=True)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray
    vertex_annotations: np.ndarray | None = None
    segmentation_id: int = 0
    dropped_faces: int = 0

    def __post_init__(self):
        validate_mesh(self)

    @property
    def num_faces(self) -> int:
        return len(self.faces)


# ---------------------------------------------------------------- validation


def _vec3(value: Any, name: str = "vector") -> Vec3:
    try:
        arr = np.asarray(value, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected 3 numbers, got {value!r}") from exc
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(name, f"expected 3 finite numbers, got {value!r}")
    return (float(arr[0]), float(arr[1]), float(arr[2]))


def _scalar(value: Any, name: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, f"expected a number, got {value!r}") from exc
    if not math.isfinite(out):
        raise ConfigError(name, "must be finite")
    return out


def _range3(value: Any, name: str) -> tuple[Vec3, Vec3]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(name, "expected [lo, hi] pair of 3-vectors")
    lo, hi = _vec3(value[0], name), _vec3(value[1], name)
    if any(a > b for a, b in zip(lo, hi)):
        raise ConfigError(name, f"range not ordered: lo={lo} hi={hi}")
    return lo, hi


def _inertia(value: Any) -> tuple[Vec3, Vec3, Vec3]:
    arr = np.asarray(value, dtype=float)
    if arr.shape == (3,):
        J = np.diag(arr)
    elif arr.shape == (6,):
        xx, xy, xz, yy, yz, zz = arr
        J = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
    elif arr.shape == (3, 3):
        J = 0.5 * (arr + arr.T)
    else:
        raise ConfigError("inertia", "expected 3 diagonal values, 6 upper-triangle values or a 3x3 matrix")
    if not np.all(np.isfinite(J)):
        raise ConfigError("inertia", "must be finite")
    if np.min(np.linalg.eigvalsh(J)) <= 0.0:
        raise ConfigError("inertia", "must be positive definite")
    return tuple(_vec3(row, "inertia") for row in J)  # type: ignore[return-value]


def validate_motor(spec: MotorSpec, idx: int = 0) -> None:
    name = f"motors[{idx}]"
    if abs(math.sqrt(sum(c * c for c in spec.thrust_axis)) - 1.0) > 1e-9:
        raise ConfigError(f"{name}.thrust_axis", "must be unit length")
    if spec.direction not in (-1, 1):
        raise ConfigError(f"{name}.direction", "must be -1 or +1")
    if spec.thrust_constant <= 0:
        raise ConfigError(f"{name}.thrust_constant", "must be > 0")
    if spec.torque_coefficient < 0:
        raise ConfigError(f"{name}.torque_coefficient", "must be >= 0")
    if spec.tau_inc <= 0:
        raise ConfigError(f"{name}.tau_inc", "must be > 0")
    if spec.tau_dec <= 0:
        raise ConfigError(f"{name}.tau_dec", "must be > 0")
    if spec.rpm_max <= 0:
        raise ConfigError(f"{name}.rpm_max", "must be > 0")


def validate_robot(cfg: RobotConfig) -> None:
    if not cfg.mass > 0:
        raise ConfigError("mass", "must be > 0")
    if not cfg.motors:
        raise ConfigError("motors", "at least one motor required")
    for i, m in enumerate(cfg.motors):
        validate_motor(m, i)
    if not cfg.collision_radius > 0:
        raise ConfigError("collision_radius", "must be > 0")
    if any(c < 0 for c in cfg.drag_linear):
        raise ConfigError("drag_linear", "coefficients must be >= 0")
    if any(c < 0 for c in cfg.drag_quadratic):
        raise ConfigError("drag_quadratic", "coefficients must be >= 0")
    J = cfg.inertia_matrix
    if not np.allclose(J, J.T) or np.min(np.linalg.eigvalsh(J)) <= 0:
        raise ConfigError("inertia", "must be symmetric positive definite")
    g = cfg.gains
    for key in ("k_x", "k_v", "k_R", "k_omega"):
        if any(v < 0 for v in getattr(g, key)):
            raise ConfigError(f"gains.{key}", "must be >= 0")
    imu = cfg.imu
    for key in ("sigma_accel", "sigma_gyro", "sigma_bias_accel", "sigma_bias_gyro"):
        if any(v < 0 for v in getattr(imu, key)):
            raise ConfigError(f"imu.{key}", "must be >= 0")
    M = imu.mount
    if not np.allclose(M.T @ M, np.eye(3), atol=1e-9) or np.linalg.det(M) < 0:
        raise ConfigError("imu.mount_rotation", "must be a proper rotation")
    if imu.decimation < 1:
        raise ConfigError("imu.decimation", "must be >= 1")
    if cfg.gravity < 0:
        raise ConfigError("gravity", "must be >= 0")


def validate_environment(cfg: EnvironmentConfig) -> None:
    lo, hi = cfg.bounds
    if any(a >= b for a, b in zip(lo, hi)):
        raise ConfigError("bounds", "degenerate or reversed box")
    if cfg.obstacle_count < 0:
        raise ConfigError("obstacle_count", "must be >= 0")
    if cfg.obstacle_count > 0 and not cfg.obstacle_assets:
        raise ConfigError("obstacle_assets", "obstacles requested but no assets listed")
    for name in ("position_range", "rotation_range"):
        a, b = getattr(cfg, name)
        if any(x > y for x, y in zip(a, b)):
            raise ConfigError(name, "range not ordered")
    s0, s1 = cfg.scale_range
    if s0 > s1:
        raise ConfigError("scale_range", "range not ordered")
    if s0 <= 0:
        raise ConfigError("scale_range", "scales must be > 0")


def validate_mesh(mesh: TriangleMesh) -> None:
    v, f = mesh.vertices, mesh.faces
    if v.ndim != 2 or v.shape[1] != 3:
        raise MeshError("vertices must be (n, 3)")
    if f.ndim != 2 or f.shape[1] != 3:
        raise MeshError("faces must be (m, 3)")
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise MeshError("face index out of range")
    if mesh.vertex_annotations is not None and len(mesh.vertex_annotations) != len(v):
        raise MeshError("annotation count must equal vertex count")


# ---------------------------------------------------------------- parsing


def _read_yaml(path: str | Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc}") from exc
    return parse_yaml(text)


def parse_yaml(text: str) -> dict:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("document", f"parse error: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("document", "top level must be a mapping")
    return doc


def _require(doc: dict, key: str, where: str = "") -> Any:
    if key not in doc:
        raise ConfigError(where + key, "missing required field")
    return doc[key]


def motor_from_dict(d: dict, idx: int = 0) -> MotorSpec:
    p = f"motors[{idx}]."
    axis = np.asarray(_vec3(d.get("thrust_axis", (0.0, 0.0, 1.0)), p + "thrust_axis"))
    spec = MotorSpec(
        position=_vec3(_require(d, "position", p), p + "position"),
        thrust_axis=_vec3(axis, p + "thrust_axis"),
        direction=int(_require(d, "direction", p)),
        thrust_constant=_scalar(_require(d, "thrust_constant", p), p + "thrust_constant"),
        torque_coefficient=_scalar(d.get("torque_coefficient", 0.0), p + "torque_coefficient"),
        tau_inc=_scalar(d.get("tau_inc", 0.03), p + "tau_inc"),
        tau_dec=_scalar(d.get("tau_dec", 0.05), p + "tau_dec"),
        rpm_max=_scalar(_require(d, "rpm_max", p), p + "rpm_max"),
    )
    validate_motor(spec, idx)
    return spec


def _gains_from_dict(d: dict | None) -> ControlGains:
    if d is None:
        return ControlGains()
    base = ControlGains()
    kw = {}
    for key in ("k_x", "k_v", "k_R", "k_omega"):
        if key in d:
            kw[key] = _vec3(d[key], f"gains.{key}")
    if "normalized" in d:
        kw["normalized"] = bool(d["normalized"])
    return replace(base, **kw)


def _imu_from_dict(d: dict | None) -> ImuParams:
    if d is None:
        return ImuParams()
    if "preset" in d:
        if d["preset"] not in IMU_PRESETS:
            raise ConfigError("imu.preset", f"unknown preset {d['preset']!r}; known {sorted(IMU_PRESETS)}")
        base = IMU_PRESETS[d["preset"]]
    else:
        base = ImuParams()
    kw: dict[str, Any] = {}
    for key in ("sigma_accel", "sigma_gyro", "sigma_bias_accel", "sigma_bias_gyro"):
        if key in d:
            kw[key] = _vec3(d[key], f"imu.{key}")
    if "mount_rotation" in d:
        m = np.asarray(d["mount_rotation"], dtype=float)
        if m.shape != (3, 3):
            raise ConfigError("imu.mount_rotation", "expected a 3x3 matrix")
        kw["mount_rotation"] = tuple(_vec3(r) for r in m)
    elif "mount_rpy" in d:
        from .rotations import rotmat_from_euler

        rpy = _vec3(d["mount_rpy"], "imu.mount_rpy")
        m = rotmat_from_euler(np.array([rpy]))[0]
        kw["mount_rotation"] = tuple(_vec3(r) for r in m)
    if "decimation" in d:
        kw["decimation"] = int(d["decimation"])
    return replace(base, **kw)


def robot_from_dict(doc: dict) -> RobotConfig:
    motors_doc = _require(doc, "motors")
    if not isinstance(motors_doc, list) or not motors_doc:
        raise ConfigError("motors", "must be a non-empty list")
    try:
        mode = ControlMode(doc.get("control_mode", "position"))
    except ValueError as exc:
        raise ConfigError("control_mode", f"unknown mode {doc.get('control_mode')!r}") from exc
    cfg = RobotConfig(
        mass=_scalar(_require(doc, "mass"), "mass"),
        inertia=_inertia(_require(doc, "inertia")),
        motors=tuple(motor_from_dict(m, i) for i, m in enumerate(motors_doc)),
        drag_linear=_vec3(doc.get("drag_linear", (0, 0, 0)), "drag_linear"),
        drag_quadratic=_vec3(doc.get("drag_quadratic", (0, 0, 0)), "drag_quadratic"),
        collision_radius=_scalar(doc.get("collision_radius", 0.2), "collision_radius"),
        control_mode=mode,
        gains=_gains_from_dict(doc.get("gains")),
        imu=_imu_from_dict(doc.get("imu")),
        gravity=_scalar(doc.get("gravity", 9.81), "gravity"),
    )
    validate_robot(cfg)
    return cfg


def robot_to_dict(cfg: RobotConfig) -> dict:
    d = asdict(cfg)
    d["control_mode"] = cfg.control_mode.value
    d["inertia"] = [list(r) for r in cfg.inertia]
    d["motors"] = [{k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(m).items()} for m in cfg.motors]
    d["gains"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg.gains).items()}
    imu = asdict(cfg.imu)
    imu["mount_rotation"] = [list(r) for r in cfg.imu.mount_rotation]
    d["imu"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in imu.items()}
    for key in ("drag_linear", "drag_quadratic"):
        d[key] = list(d[key])
    return d


def dump_robot_config(cfg: RobotConfig) -> str:
    return yaml.safe_dump(robot_to_dict(cfg), sort_keys=False)


def parse_robot_config(text: str) -> RobotConfig:
    return robot_from_dict(parse_yaml(text))


def load_robot_config(path: str | Path) -> RobotConfig:
    return robot_from_dict(_read_yaml(path))


def environment_from_dict(doc: dict, base_dir: Path | None = None) -> EnvironmentConfig:
    assets = []
    for a in doc.get("obstacle_assets", []) or []:
        p = Path(a)
        if not p.is_absolute():
            cand = (base_dir / p) if base_dir is not None else p
            p = cand if cand.exists() else DATA_DIR / a
        assets.append(str(p))
    try:
        count = int(doc.get("obstacle_count", 0))
        seed = int(doc.get("seed", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError("obstacle_count", str(exc)) from exc
    scale = doc.get("scale_range", (1.0, 1.0))
    if not isinstance(scale, (list, tuple)) or len(scale) != 2:
        raise ConfigError("scale_range", "expected [lo, hi]")
    cfg = EnvironmentConfig(
        bounds=_range3(_require(doc, "bounds"), "bounds"),
        obstacle_assets=tuple(assets),
        obstacle_count=count,
        position_range=_range3(doc.get("position_range", [[0, 0, 0], [0, 0, 0]]), "position_range"),
        rotation_range=_range3(doc.get("rotation_range", [[0, 0, 0], [0, 0, 0]]), "rotation_range"),
        scale_range=(_scalar(scale[0], "scale_range"), _scalar(scale[1], "scale_range")),
        walls=bool(doc.get("walls", False)),
        seed=seed,
    )
    validate_environment(cfg)
    return cfg


def environment_to_dict(cfg: EnvironmentConfig) -> dict:
    return {
        "bounds": [list(cfg.bounds[0]), list(cfg.bounds[1])],
        "obstacle_assets": list(cfg.obstacle_assets),
        "obstacle_count": cfg.obstacle_count,
        "position_range": [list(cfg.position_range[0]), list(cfg.position_range[1])],
        "rotation_range": [list(cfg.rotation_range[0]), list(cfg.rotation_range[1])],
        "scale_range": list(cfg.scale_range),
        "walls": cfg.walls,
        "seed": cfg.seed,
    }


def dump_environment_config(cfg: EnvironmentConfig) -> str:
    return yaml.safe_dump(environment_to_dict(cfg), sort_keys=False)


def parse_environment_config(text: str) -> EnvironmentConfig:
    return environment_from_dict(parse_yaml(text))


def load_environment_config(path: str | Path) -> EnvironmentConfig:
    path = Path(path)
    return environment_from_dict(_read_yaml(path), base_dir=path.parent)


def load_sensor_config(path: str | Path):
    """Load a camera or lidar description; see :func:`rotorgym.render.sensor_from_dict`."""
    from .render.sensors import sensor_from_dict

    return sensor_from_dict(_read_yaml(path))


def builtin(name: str) -> Path:
    """Path of a config or mesh shipped with the package."""
    p = DATA_DIR / name
    if not p.exists():
        raise FileNotFoundError(f"no bundled asset {name!r}")
    return p


# ---------------------------------------------------------------- meshes


def parse_obj(text: str, segmentation_id: int = 0) -> TriangleMesh:
    """Parse Wavefront OBJ text. Quads are fan-triangulated; n-gons rejected.

    Annotations may be carried as extra numbers after x y z on ``v`` lines
    (k values per vertex, all vertices the same k).
    """
    verts: list[list[float]] = []
    annots: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "v":
                vals = [float(t) for t in tok[1:]]
                if len(vals) < 3:
                    raise MeshError(f"line {lineno}: vertex needs 3 coordinates")
                verts.append(vals[:3])
                annots.append(vals[3:])
            elif tok[0] == "f":
                idx = []
                for t in tok[1:]:
                    i = int(t.split("/")[0])
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) == 3:
                    faces.append((idx[0], idx[1], idx[2]))
                elif len(idx) == 4:
                    faces.append((idx[0], idx[1], idx[2]))
                    faces.append((idx[0], idx[2], idx[3]))
                else:
                    raise MeshError(f"line {lineno}: only triangles and quads supported, got {len(idx)}-gon")
        except ValueError as exc:
            if isinstance(exc, MeshError):
                raise
            raise MeshError(f"line {lineno}: parse error: {exc}") from exc
    if not verts or not faces:
        raise MeshError("empty mesh")
    V = np.array(verts, dtype=float)
    F = np.array(faces, dtype=np.int64)
    if F.min() < 0 or F.max() >= len(V):
        raise MeshError("face index out of range")
    e1 = V[F[:, 1]] - V[F[:, 0]]
    e2 = V[F[:, 2]] - V[F[:, 0]]
    area2 = np.linalg.norm(np.cross(e1, e2), axis=1)
    keep = area2 > 1e-12 * max(1.0, float(np.max(np.abs(V))) ** 2)
    dropped = int(np.count_nonzero(~keep))
    if dropped:
        log.warning("dropped %d degenerate face(s)", dropped)
    F = F[keep]
    if len(F) == 0:
        raise MeshError("empty mesh after dropping degenerate faces")
    widths = {len(a) for a in annots}
    A = None
    if widths != {0}:
        if len(widths) != 1:
            raise MeshError("inconsistent per-vertex annotation width")
        A = np.array(annots, dtype=float)
    return TriangleMesh(V, F, A, segmentation_id, dropped)


def load_mesh(path: str | Path, segmentation_id: int = 0) -> TriangleMesh:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeshError(f"cannot read {path}: {exc}") from exc
    return parse_obj(text, segmentation_id)


def box_mesh(half_extents: Sequence[float] = (0.5, 0.5, 0.5), center: Sequence[float] = (0, 0, 0),
             segmentation_id: int = 0) -> TriangleMesh:
    """Axis-aligned box as 12 outward-wound triangles."""
    h = np.asarray(half_extents, dtype=float)
    c = np.asarray(center, dtype=float)
    corners = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    V = c + corners * h
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    F = []
    for a, b, cc, d in quads:
        F += [(a, b, cc), (a, cc, d)]
    return TriangleMesh(V, np.array(F, dtype=np.int64), None, segmentation_id)
