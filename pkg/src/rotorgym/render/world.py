"""Per-environment triangle world: submeshes, transforms, BVH and ray queries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from ..config import TriangleMesh
from ..rotations import rotmat_from_euler
from . import bvh as _bvh

MISS = -1.0


class AnnotationError(LookupError):
    pass


def make_transform(position=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0), scale: float = 1.0) -> np.ndarray:
    """4x4 homogeneous rigid transform with uniform scale."""
    T = np.eye(4)
    T[:3, :3] = rotmat_from_euler(np.asarray(rpy, dtype=float)) * scale
    T[:3, 3] = position
    return T


def apply_transform(T: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    return vertices @ T[:3, :3].T + T[:3, 3]


class WorldMesh:
    """Triangle soup of one environment with a BVH over it.

    Faces are numbered globally in submesh order; ``face_submesh`` maps a
    face back to its submesh and ``face_segmentation`` to its label.
    """

    def __init__(self, meshes: Sequence[TriangleMesh], transforms=None, env_id: int = 0,
                 segmentation_ids: Sequence[int] | None = None):
        self.env_id = env_id
        self.meshes = list(meshes)
        if transforms is None:
            transforms = [np.eye(4)] * len(self.meshes)
        if len(transforms) != len(self.meshes):
            raise ValueError("need one transform per submesh")
        self.transforms = [np.array(T, dtype=float) for T in transforms]
        self.segmentation_ids = np.array(
            [m.segmentation_id for m in self.meshes] if segmentation_ids is None else list(segmentation_ids),
            dtype=np.int64,
        )
        counts = [m.num_faces for m in self.meshes]
        self.face_offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.face_submesh = np.repeat(np.arange(len(self.meshes)), counts).astype(np.int64)
        self.face_segmentation = self.segmentation_ids[self.face_submesh] if counts else np.zeros(0, np.int64)
        self.vertex_cache: list[np.ndarray] = [np.empty((0, 3))] * len(self.meshes)
        self.tris = np.zeros((int(self.face_offsets[-1]), 3, 3))
        self.bvh: _bvh.BVH | None = None
        self.dirty = True
        self._refresh(range(len(self.meshes)))

    @property
    def num_faces(self) -> int:
        return len(self.tris)

    @property
    def num_submeshes(self) -> int:
        return len(self.meshes)

    def _refresh(self, changed) -> None:
        for j in changed:
            V = apply_transform(self.transforms[j], self.meshes[j].vertices)
            self.vertex_cache[j] = V
            s, e = self.face_offsets[j], self.face_offsets[j + 1]
            self.tris[s:e] = V[self.meshes[j].faces]
        self.bvh = _bvh.build_bvh(self.tris)
        self.dirty = False

    def face_vertex_ids(self, faces: np.ndarray):
        """Submesh index and submesh-local vertex ids of global faces."""
        sub = self.face_submesh[faces]
        local = faces - self.face_offsets[sub]
        verts = np.stack([self.meshes[s].faces[l] for s, l in zip(sub, local)]) if len(faces) else np.zeros((0, 3), int)
        return sub, verts

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.num_faces == 0:
            return np.zeros(3), np.zeros(3)
        v = self.tris.reshape(-1, 3)
        return v.min(axis=0), v.max(axis=0)


def build_world(meshes: Sequence[TriangleMesh], transforms=None, env_id: int = 0, segmentation_ids=None) -> WorldMesh:
    return WorldMesh(meshes, transforms, env_id, segmentation_ids)


def update_transforms(world: WorldMesh, transforms: Mapping[int, np.ndarray] | Sequence[np.ndarray]) -> None:
    """Replace submesh transforms and rebuild the BVH from scratch."""
    items = transforms.items() if isinstance(transforms, Mapping) else enumerate(transforms)
    changed = []
    for j, T in items:
        world.transforms[j] = np.array(T, dtype=float)
        changed.append(j)
    world.dirty = True
    world._refresh(changed)


@dataclass
class RayHits:
    """Struct-of-arrays ray results. Misses carry ``t = -1``, ids ``-1``."""

    hit: np.ndarray
    t: np.ndarray
    face_index: np.ndarray
    barycentric: np.ndarray
    normal: np.ndarray
    segmentation: np.ndarray


def _bvh_args(world: WorldMesh):
    b = world.bvh
    return (world.tris, b.node_min, b.node_max, b.left, b.right, b.start, b.count, b.order)


def face_normals(world: WorldMesh, faces: np.ndarray) -> np.ndarray:
    tri = world.tris[faces]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def cast_rays(world: WorldMesh, origins, directions, t_range=(0.0, np.inf)) -> RayHits:
    """Nearest hit per ray with ``t`` in ``t_range``; ties go to the lowest face id."""
    if world.dirty:
        raise RuntimeError("world BVH is stale; call update_transforms")
    o = np.ascontiguousarray(np.broadcast_to(origins, np.shape(directions)), dtype=np.float64).reshape(-1, 3)
    d = np.ascontiguousarray(directions, dtype=np.float64).reshape(-1, 3)
    k = len(d)
    if world.num_faces == 0:
        face = np.full(k, -1, dtype=np.int64)
        t = np.full(k, np.inf)
        bary = np.zeros((k, 2))
    else:
        face, t, bary = _bvh.cast_kernel(o, d, float(t_range[0]), float(t_range[1]), *_bvh_args(world))
    hit = face >= 0
    normal = np.zeros((k, 3))
    seg = np.full(k, -1, dtype=np.int64)
    if np.any(hit):
        n = face_normals(world, face[hit])
        flip = np.sum(n * d[hit], axis=1) > 0
        n[flip] *= -1.0
        normal[hit] = n
        seg[hit] = world.face_segmentation[face[hit]]
    t = np.where(hit, t, MISS)
    bary = np.where(hit[:, None], bary, MISS)
    return RayHits(hit, t, face, bary, normal, seg)


def occluded(world: WorldMesh, origins, directions, t_min: float, t_max) -> np.ndarray:
    """Whether anything lies on each ray between ``t_min`` and its ``t_max``."""
    o = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    d = np.ascontiguousarray(directions, dtype=np.float64).reshape(-1, 3)
    tm = np.ascontiguousarray(np.broadcast_to(t_max, (len(d),)), dtype=np.float64)
    if world.num_faces == 0 or len(d) == 0:
        return np.zeros(len(d), dtype=bool)
    return _bvh.occluded_kernel(o, d, float(t_min), tm, *_bvh_args(world))


class PackedWorlds(NamedTuple):
    """Several worlds' triangles and BVH nodes concatenated, with one root per world."""

    roots: np.ndarray
    tris: np.ndarray
    node_min: np.ndarray
    node_max: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    order: np.ndarray
    face_offsets: np.ndarray

    def kernel_args(self):
        return self[1:9]


def pack_worlds(worlds: Sequence[WorldMesh | None]) -> PackedWorlds:
    """Concatenate BVHs so one kernel call can serve many envs (``None`` is an empty world)."""
    roots, parts = [], []
    n_off = f_off = 0
    face_offsets = [0]
    for w in worlds:
        if w is None or w.num_faces == 0:
            roots.append(-1)
            face_offsets.append(f_off)
            continue
        if w.dirty:
            raise RuntimeError("world BVH is stale; call update_transforms")
        b = w.bvh
        inner = b.left >= 0
        parts.append((w.tris, b.node_min, b.node_max, np.where(inner, b.left + n_off, -1),
                      np.where(inner, b.right + n_off, -1), b.start + f_off, b.count, b.order + f_off))
        roots.append(n_off)
        n_off += b.num_nodes
        f_off += w.num_faces
        face_offsets.append(f_off)
    if parts:
        cols = [np.ascontiguousarray(np.concatenate(c)) for c in zip(*parts)]
    else:
        cols = [np.zeros((0, 3, 3)), np.zeros((0, 3)), np.zeros((0, 3))] + [np.zeros(0, np.int64)] * 5
    return PackedWorlds(np.asarray(roots, dtype=np.int64), *cols, np.asarray(face_offsets, dtype=np.int64))


def closest_distance(world: WorldMesh, points, radius: float | None = None):
    """Exact distance from point(s) to the nearest triangle (``inf`` for an empty world)."""
    p = np.ascontiguousarray(points, dtype=np.float64)
    single = p.ndim == 1
    p = p.reshape(-1, 3)
    if world.num_faces == 0:
        d = np.full(len(p), np.inf)
    else:
        d, _ = _bvh.closest_kernel(p, *_bvh_args(world))
    return float(d[0]) if single else d


def leaf_face_multiset(world: WorldMesh) -> np.ndarray:
    if world.num_faces == 0:
        return np.zeros(0, dtype=np.int64)
    b = world.bvh
    return _bvh.leaf_faces(b.left, b.right, b.start, b.count, b.order)


def query_annotation(world: WorldMesh, face_index, barycentric) -> np.ndarray:
    """Interpolate per-vertex annotations at hit points.

    ``barycentric`` holds the weights of a face's first two vertices; the
    third weight is ``1 - w0 - w1``.
    """
    faces = np.atleast_1d(np.asarray(face_index, dtype=np.int64))
    w = np.asarray(barycentric, dtype=float).reshape(-1, 2)
    if np.any(faces < 0) or np.any(faces >= world.num_faces):
        raise AnnotationError("face index out of range (miss?)")
    sub, verts = world.face_vertex_ids(faces)
    out = []
    for s, vids, (w0, w1) in zip(sub, verts, w):
        A = world.meshes[s].vertex_annotations
        if A is None:
            raise AnnotationError(f"submesh {s} carries no vertex annotations")
        out.append(w0 * A[vids[0]] + w1 * A[vids[1]] + (1.0 - w0 - w1) * A[vids[2]])
    res = np.array(out)
    return res[0] if np.ndim(face_index) == 0 else res
