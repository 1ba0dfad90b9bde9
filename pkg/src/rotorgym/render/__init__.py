from .bvh import BVH, build_bvh
from .export import read_matrix, read_pgm16, write_matrix, write_pgm16, write_point_cloud
from .sensors import (
    SENSOR_PRESETS,
    CameraModel,
    LidarPattern,
    SensorImage,
    depth_downsample,
    render_batch,
    render_camera,
    render_camera_batch,
    render_depth_batch,
    render_lidar,
    sensor_from_dict,
    stereo_shadow_mask,
)
from .world import (
    AnnotationError,
    RayHits,
    WorldMesh,
    build_world,
    cast_rays,
    closest_distance,
    leaf_face_multiset,
    make_transform,
    occluded,
    pack_worlds,
    query_annotation,
    update_transforms,
)

__all__ = [
    "BVH",
    "build_bvh",
    "read_matrix",
    "read_pgm16",
    "write_matrix",
    "write_pgm16",
    "write_point_cloud",
    "SENSOR_PRESETS",
    "CameraModel",
    "LidarPattern",
    "SensorImage",
    "depth_downsample",
    "render_batch",
    "render_camera",
    "render_camera_batch",
    "render_depth_batch",
    "render_lidar",
    "sensor_from_dict",
    "stereo_shadow_mask",
    "AnnotationError",
    "RayHits",
    "WorldMesh",
    "build_world",
    "cast_rays",
    "closest_distance",
    "leaf_face_multiset",
    "make_transform",
    "occluded",
    "pack_worlds",
    "query_annotation",
    "update_transforms",
]
