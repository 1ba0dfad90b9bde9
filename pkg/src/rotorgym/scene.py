"""Randomised obstacle worlds built from an :class:`EnvironmentConfig`."""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import EnvironmentConfig, TriangleMesh, box_mesh, load_mesh
from .parallel import map_items
from .render.world import WorldMesh, build_world, make_transform, update_transforms
from .state import make_rng

WALL_SEGMENTATION_ID = 0
# xor-ed into the env config seed so world streams never coincide with robot streams
WORLD_STREAM_SALT = 0x5EED_0F_3A11


@lru_cache(maxsize=64)
def _asset(path: str) -> TriangleMesh:
    return load_mesh(path)


def world_rng(cfg: EnvironmentConfig, env_id: int) -> np.random.Generator:
    return make_rng(cfg.seed ^ WORLD_STREAM_SALT, env_id)


def sample_obstacle_transforms(cfg: EnvironmentConfig, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for _ in range(cfg.obstacle_count):
        pos = rng.uniform(cfg.position_range[0], cfg.position_range[1])
        rpy = rng.uniform(cfg.rotation_range[0], cfg.rotation_range[1])
        scale = rng.uniform(cfg.scale_range[0], cfg.scale_range[1])
        out.append(make_transform(pos, rpy, scale))
    return out


def environment_meshes(cfg: EnvironmentConfig) -> tuple[list[TriangleMesh], list[int]]:
    """Base submeshes and their segmentation ids: walls (0) then obstacles (1..k)."""
    meshes, seg = [], []
    if cfg.walls:
        lo, hi = cfg.bounds_array
        meshes.append(box_mesh((hi - lo) / 2.0, (hi + lo) / 2.0, WALL_SEGMENTATION_ID))
        seg.append(WALL_SEGMENTATION_ID)
    for k in range(cfg.obstacle_count):
        meshes.append(_asset(cfg.obstacle_assets[k % len(cfg.obstacle_assets)]))
        seg.append(k + 1)
    return meshes, seg


def build_environment(cfg: EnvironmentConfig, rng: np.random.Generator, env_id: int = 0) -> WorldMesh | None:
    """World of one env, or ``None`` when it has no geometry at all."""
    meshes, seg = environment_meshes(cfg)
    if not meshes:
        return None
    transforms = ([np.eye(4)] if cfg.walls else []) + sample_obstacle_transforms(cfg, rng)
    return build_world(meshes, transforms, env_id, seg)


def rerandomize(world: WorldMesh | None, cfg: EnvironmentConfig, rng: np.random.Generator) -> None:
    if world is None or cfg.obstacle_count == 0:
        return
    first = 1 if cfg.walls else 0
    new = sample_obstacle_transforms(cfg, rng)
    update_transforms(world, {first + k: T for k, T in enumerate(new)})


def build_environments(cfg: EnvironmentConfig, env_ids: Sequence[int], workers: int = 1):
    """Worlds and their randomisation streams for the given global env ids."""
    rngs = [world_rng(cfg, int(i)) for i in env_ids]
    worlds = map_items(lambda j: build_environment(cfg, rngs[j], int(env_ids[j])), list(range(len(env_ids))), workers)
    return worlds, rngs
