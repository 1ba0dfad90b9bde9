"""Independent reference computations the package is checked against.

Nothing here imports the code under test: ray casting is plain
Moller-Trumbore over every triangle, distances use plane projection plus
edge clamping, and box occlusion is an analytic slab test.
"""

from __future__ import annotations

import numpy as np


def brute_force_cast(tris, origins, dirs, t_min=0.0, t_max=np.inf, chunk=64):
    """Nearest two-sided hit of every ray against every triangle.

    Returns ``(face, t)``; misses carry face -1 and t -1. Exact ties go to
    the lowest face index (``argmin`` picks the first minimum).
    """
    tris = np.asarray(tris, dtype=float)
    v0, e1, e2 = tris[:, 0], tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
    faces, ts = [], []
    for s in range(0, len(dirs), chunk):
        o = origins[s:s + chunk, None, :]
        d = dirs[s:s + chunk, None, :]
        p = np.cross(d, e2[None])
        det = np.sum(e1[None] * p, axis=-1)
        ok = np.abs(det) > 1e-300
        inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
        tv = o - v0[None]
        u = np.sum(tv * p, axis=-1) * inv
        q = np.cross(tv, e1[None])
        v = np.sum(d * q, axis=-1) * inv
        t = np.sum(e2[None] * q, axis=-1) * inv
        hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t >= t_min) & (t <= t_max)
        t = np.where(hit, t, np.inf)
        f = np.argmin(t, axis=1)
        best = t[np.arange(len(f)), f]
        miss = ~np.isfinite(best)
        faces.append(np.where(miss, -1, f))
        ts.append(np.where(miss, -1.0, best))
    return np.concatenate(faces), np.concatenate(ts)


def _segment_dist2(p, a, b):
    ab = b - a
    denom = np.sum(ab * ab, axis=-1)
    s = np.clip(np.sum((p - a) * ab, axis=-1) / np.where(denom > 0, denom, 1.0), 0.0, 1.0)
    c = a + s[..., None] * ab
    return np.sum((p - c) ** 2, axis=-1)


def point_triangles_distance(p, tris):
    """Smallest Euclidean distance from point ``p`` to a set of triangles."""
    tris = np.asarray(tris, dtype=float)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    n = np.cross(b - a, c - a)
    n = n / np.linalg.norm(n, axis=1, keepdims=True)
    h = np.sum((p - a) * n, axis=1)
    proj = p - h[:, None] * n
    # inside test: same orientation of the three sub-triangles
    s0 = np.sum(np.cross(b - a, proj - a) * n, axis=1)
    s1 = np.sum(np.cross(c - b, proj - b) * n, axis=1)
    s2 = np.sum(np.cross(a - c, proj - c) * n, axis=1)
    inside = (s0 >= 0) & (s1 >= 0) & (s2 >= 0)
    edge = np.minimum(np.minimum(_segment_dist2(p, a, b), _segment_dist2(p, b, c)), _segment_dist2(p, c, a))
    d2 = np.where(inside, h * h, edge)
    return float(np.sqrt(d2.min()))


def motor_exponential(r0, r_ref, tau, t):
    """Closed-form first-order response."""
    return r_ref + (r0 - r_ref) * np.exp(-np.asarray(t) / tau)


def ray_box(origins, dirs, lo, hi):
    """Entry and exit distances of rays through an axis-aligned box (entry > exit means miss)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t0 = (lo - origins) * inv
        t1 = (hi - origins) * inv
    t0 = np.where(np.isnan(t0), -np.inf, t0)
    t1 = np.where(np.isnan(t1), np.inf, t1)
    near = np.max(np.minimum(t0, t1), axis=-1)
    far = np.min(np.maximum(t0, t1), axis=-1)
    return near, far


def first_box_hit(origins, dirs, boxes, t_min, t_max):
    """Nearest entry distance over boxes for rays starting outside all of them; -1 when nothing is hit."""
    best = np.full(len(dirs), np.inf)
    for lo, hi in boxes:
        near, far = ray_box(origins, dirs, np.asarray(lo), np.asarray(hi))
        hit = (near <= far) & (near >= t_min) & (near <= t_max)
        best = np.where(hit & (near < best), near, best)
    return np.where(np.isfinite(best), best, -1.0)


def segment_blocked(points, target, boxes, eps):
    """True where the open segment from each point to ``target`` passes through a box."""
    d = target - points
    L = np.sqrt(np.sum(d * d, axis=1))
    d = d / L[:, None]
    out = np.zeros(len(points), dtype=bool)
    for lo, hi in boxes:
        near, far = ray_box(points, d, np.asarray(lo), np.asarray(hi))
        enter = np.maximum(near, eps)
        leave = np.minimum(far, L - eps)
        out |= enter <= leave
    return out


def box_triangles(lo, hi):
    """12 triangles of an axis-aligned box, built without the package helpers."""
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    c = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    quads = [(0, 1, 3, 2), (4, 6, 7, 5), (0, 4, 5, 1), (2, 3, 7, 6), (0, 2, 6, 4), (1, 5, 7, 3)]
    out = []
    for a, b, cc, d in quads:
        out += [c[[a, b, cc]], c[[a, cc, d]]]
    return np.array(out)
