"""Numba kernels: BVH build, ray/triangle intersection and BVH traversal.

Triangles are a float64 ``(F, 3, 3)`` array, ``tris[f, j]`` being vertex j of
face f. The BVH is a set of flat node arrays; leaves index into ``order``,
a permutation of face ids.
"""

from __future__ import annotations

from typing import NamedTuple

import numba as nb
import numpy as np

LEAF_SIZE = 4
# relative padding of node boxes so rounding in t*d cannot push a hit point
# outside the box of its own triangle
BOX_PAD = 1e-9
STACK_SIZE = 128


class BVH(NamedTuple):
    node_min: np.ndarray  # (M, 3)
    node_max: np.ndarray  # (M, 3)
    left: np.ndarray  # (M,) child index, -1 for leaves
    right: np.ndarray  # (M,)
    start: np.ndarray  # (M,) first slot in ``order`` for leaves
    count: np.ndarray  # (M,) number of faces for leaves, 0 for inner nodes
    order: np.ndarray  # (F,) face ids

    @property
    def num_nodes(self) -> int:
        return len(self.left)


@nb.njit(cache=True, nogil=True)
def _build(tris, leaf_size):
    F = tris.shape[0]
    M = max(2 * F - 1, 1)
    node_min = np.zeros((M, 3))
    node_max = np.zeros((M, 3))
    left = -np.ones(M, dtype=np.int64)
    right = -np.ones(M, dtype=np.int64)
    start = np.zeros(M, dtype=np.int64)
    count = np.zeros(M, dtype=np.int64)
    order = np.arange(F)
    if F == 0:
        return node_min[:0], node_max[:0], left[:0], right[:0], start[:0], count[:0], order

    tmin = np.empty((F, 3))
    tmax = np.empty((F, 3))
    cent = np.empty((F, 3))
    for f in range(F):
        for a in range(3):
            lo = min(tris[f, 0, a], tris[f, 1, a], tris[f, 2, a])
            hi = max(tris[f, 0, a], tris[f, 1, a], tris[f, 2, a])
            tmin[f, a] = lo
            tmax[f, a] = hi
            cent[f, a] = (tris[f, 0, a] + tris[f, 1, a] + tris[f, 2, a]) / 3.0

    stack_node = np.empty(M, dtype=np.int64)
    stack_s = np.empty(M, dtype=np.int64)
    stack_e = np.empty(M, dtype=np.int64)
    sp = 0
    stack_node[0] = 0
    stack_s[0] = 0
    stack_e[0] = F
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = stack_node[sp]
        s = stack_s[sp]
        e = stack_e[sp]
        bmin = np.full(3, np.inf)
        bmax = np.full(3, -np.inf)
        cmin = np.full(3, np.inf)
        cmax = np.full(3, -np.inf)
        for i in range(s, e):
            f = order[i]
            for a in range(3):
                bmin[a] = min(bmin[a], tmin[f, a])
                bmax[a] = max(bmax[a], tmax[f, a])
                cmin[a] = min(cmin[a], cent[f, a])
                cmax[a] = max(cmax[a], cent[f, a])
        for a in range(3):
            pad = BOX_PAD * (1.0 + abs(bmin[a]) + abs(bmax[a]))
            node_min[node, a] = bmin[a] - pad
            node_max[node, a] = bmax[a] + pad
        n = e - s
        if n <= leaf_size:
            start[node] = s
            count[node] = n
            continue
        axis = 0
        ext = cmax[0] - cmin[0]
        for a in range(1, 3):
            if cmax[a] - cmin[a] > ext:
                ext = cmax[a] - cmin[a]
                axis = a
        keys = np.empty(n)
        for i in range(n):
            keys[i] = cent[order[s + i], axis]
        perm = np.argsort(keys, kind="mergesort")
        seg = order[s:e].copy()
        for i in range(n):
            order[s + i] = seg[perm[i]]
        mid = s + n // 2
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        stack_node[sp] = rc
        stack_s[sp] = mid
        stack_e[sp] = e
        sp += 1
        stack_node[sp] = lc
        stack_s[sp] = s
        stack_e[sp] = mid
        sp += 1
    return (
        node_min[:n_nodes],
        node_max[:n_nodes],
        left[:n_nodes],
        right[:n_nodes],
        start[:n_nodes],
        count[:n_nodes],
        order,
    )


def build_bvh(tris: np.ndarray, leaf_size: int = LEAF_SIZE) -> BVH:
    """Median split on the longest axis of the centroid bounds."""
    tris = np.ascontiguousarray(tris, dtype=np.float64).reshape(-1, 3, 3)
    return BVH(*_build(tris, leaf_size))


@nb.njit(cache=True, nogil=True, inline="always")
def _pick(x, y, z, k):
    if k == 0:
        return x
    if k == 1:
        return y
    return z


@nb.njit(cache=True, nogil=True, inline="always")
def ray_triangle(ox, oy, oz, dx, dy, dz, kx, ky, kz, sx, sy, sz, tri):
    """Watertight ray/triangle test in a ray-aligned sheared frame.

    Returns ``(t, w0, w1)`` with ``w0, w1`` the weights of vertices 0 and 1,
    or ``t = inf`` on a miss. Both faces of a triangle are hit.
    """
    ax = tri[0, 0] - ox
    ay = tri[0, 1] - oy
    az = tri[0, 2] - oz
    bx = tri[1, 0] - ox
    by = tri[1, 1] - oy
    bz = tri[1, 2] - oz
    cx = tri[2, 0] - ox
    cy = tri[2, 1] - oy
    cz = tri[2, 2] - oz
    Akz = _pick(ax, ay, az, kz)
    Bkz = _pick(bx, by, bz, kz)
    Ckz = _pick(cx, cy, cz, kz)
    Ax = _pick(ax, ay, az, kx) - sx * Akz
    Ay = _pick(ax, ay, az, ky) - sy * Akz
    Bx = _pick(bx, by, bz, kx) - sx * Bkz
    By = _pick(bx, by, bz, ky) - sy * Bkz
    Cx = _pick(cx, cy, cz, kx) - sx * Ckz
    Cy = _pick(cx, cy, cz, ky) - sy * Ckz
    U = Cx * By - Cy * Bx
    V = Ax * Cy - Ay * Cx
    W = Bx * Ay - By * Ax
    if min(U, V, W) < 0.0 and max(U, V, W) > 0.0:
        return np.inf, 0.0, 0.0
    det = U + V + W
    if det == 0.0:
        return np.inf, 0.0, 0.0
    T = U * (sz * Akz) + V * (sz * Bkz) + W * (sz * Ckz)
    inv = 1.0 / det
    return T * inv, U * inv, V * inv


@nb.njit(cache=True, nogil=True, inline="always")
def _shear(dx, dy, dz):
    adx, ady, adz = abs(dx), abs(dy), abs(dz)
    kz = 0
    if ady > adx and ady >= adz:
        kz = 1
    elif adz > adx and adz > ady:
        kz = 2
    kx = (kz + 1) % 3
    ky = (kx + 1) % 3
    d = (dx, dy, dz)
    if d[kz] < 0.0:
        kx, ky = ky, kx
    sx = d[kx] / d[kz]
    sy = d[ky] / d[kz]
    sz = 1.0 / d[kz]
    return kx, ky, kz, sx, sy, sz


@nb.njit(cache=True, nogil=True, inline="always")
def _axis(o, i, z, lo_b, hi_b, lo, hi):
    if z:
        if o < lo_b or o > hi_b:
            return 1.0, 0.0
        return lo, hi
    t0 = (lo_b - o) * i
    t1 = (hi_b - o) * i
    return max(lo, min(t0, t1)), min(hi, max(t0, t1))


@nb.njit(cache=True, nogil=True, inline="always")
def _slab(ox, oy, oz, ix, iy, iz, zx, zy, zz, node_min, node_max, node, tmin, tmax):
    """Entry distance of the ray into box ``node`` clipped to ``[tmin, tmax]``, inf on a miss.

    ``i*`` are reciprocal direction components, ``z*`` flag zero components.
    """
    lo, hi = _axis(ox, ix, zx, node_min[node, 0], node_max[node, 0], tmin, tmax)
    lo, hi = _axis(oy, iy, zy, node_min[node, 1], node_max[node, 1], lo, hi)
    lo, hi = _axis(oz, iz, zz, node_min[node, 2], node_max[node, 2], lo, hi)
    if lo > hi:
        return np.inf
    return lo


@nb.njit(cache=True, nogil=True)
def _closest_hit(o, d, tmin, tmax, tris, node_min, node_max, left, right, start, count, order, any_hit, stack, near_stack,
                 root=0):
    best_t = np.inf
    best_f = -1
    best_u = 0.0
    best_v = 0.0
    if left.shape[0] == 0 or root < 0:
        return best_f, best_t, best_u, best_v
    ox, oy, oz = o[0], o[1], o[2]
    dx, dy, dz = d[0], d[1], d[2]
    kx, ky, kz, sx, sy, sz = _shear(dx, dy, dz)
    zx, zy, zz = dx == 0.0, dy == 0.0, dz == 0.0
    ix = 0.0 if zx else 1.0 / dx
    iy = 0.0 if zy else 1.0 / dy
    iz = 0.0 if zz else 1.0 / dz
    near = _slab(ox, oy, oz, ix, iy, iz, zx, zy, zz, node_min, node_max, root, tmin, tmax)
    if near == np.inf:
        return best_f, best_t, best_u, best_v
    # entry distances travel with the node ids so no box is tested twice
    stack[0] = root
    near_stack[0] = near
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if near_stack[sp] > best_t:
            continue
        if left[node] < 0:
            for i in range(start[node], start[node] + count[node]):
                f = order[i]
                t, u, v = ray_triangle(ox, oy, oz, dx, dy, dz, kx, ky, kz, sx, sy, sz, tris[f])
                if t >= tmin and t <= tmax:
                    if t < best_t or (t == best_t and f < best_f):
                        best_t = t
                        best_f = f
                        best_u = u
                        best_v = v
                        if any_hit:
                            return best_f, best_t, best_u, best_v
            continue
        lc = left[node]
        rc = right[node]
        tl = _slab(ox, oy, oz, ix, iy, iz, zx, zy, zz, node_min, node_max, lc, tmin, tmax)
        tr = _slab(ox, oy, oz, ix, iy, iz, zx, zy, zz, node_min, node_max, rc, tmin, tmax)
        # push the farther child first so the nearer one is popped next
        if tl <= tr:
            if tr <= best_t:
                stack[sp] = rc
                near_stack[sp] = tr
                sp += 1
            if tl <= best_t:
                stack[sp] = lc
                near_stack[sp] = tl
                sp += 1
        else:
            if tl <= best_t:
                stack[sp] = lc
                near_stack[sp] = tl
                sp += 1
            if tr <= best_t:
                stack[sp] = rc
                near_stack[sp] = tr
                sp += 1
    return best_f, best_t, best_u, best_v


@nb.njit(cache=True, nogil=True)
def cast_kernel(origins, dirs, tmin, tmax, tris, node_min, node_max, left, right, start, count, order):
    k = origins.shape[0]
    face = np.full(k, -1, dtype=np.int64)
    t_out = np.full(k, np.inf)
    bary = np.zeros((k, 2))
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    near_stack = np.empty(STACK_SIZE)
    for r in range(k):
        f, t, u, v = _closest_hit(
            origins[r], dirs[r], tmin, tmax, tris, node_min, node_max, left, right, start, count, order, False, stack, near_stack
        )
        face[r] = f
        t_out[r] = t
        bary[r, 0] = u
        bary[r, 1] = v
    return face, t_out, bary


@nb.njit(cache=True, nogil=True)
def cast_packed_kernel(origins, dirs, tmin, tmax, roots, tris, node_min, node_max, left, right, start, count, order):
    """Closest hits of ``dirs[e, k]`` from ``origins[e]`` in the BVH rooted at ``roots[e]``.

    The node and face arrays hold several BVHs back to back (see
    :func:`rotorgym.render.world.pack_worlds`); a negative root is an empty world.
    """
    E, K = dirs.shape[0], dirs.shape[1]
    face = np.full((E, K), -1, dtype=np.int64)
    t_out = np.full((E, K), np.inf)
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    near_stack = np.empty(STACK_SIZE)
    for e in range(E):
        for k in range(K):
            f, t, u, v = _closest_hit(origins[e], dirs[e, k], tmin, tmax, tris, node_min, node_max, left, right,
                                      start, count, order, False, stack, near_stack, roots[e])
            face[e, k] = f
            t_out[e, k] = t
    return face, t_out


@nb.njit(cache=True, nogil=True)
def occluded_kernel(origins, dirs, tmin, tmax, tris, node_min, node_max, left, right, start, count, order):
    """Any-hit query per ray; ``tmax`` is per ray."""
    k = origins.shape[0]
    out = np.zeros(k, dtype=np.bool_)
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    near_stack = np.empty(STACK_SIZE)
    for r in range(k):
        f, t, u, v = _closest_hit(
            origins[r], dirs[r], tmin, tmax[r], tris, node_min, node_max, left, right, start, count, order, True, stack, near_stack
        )
        out[r] = f >= 0
    return out


@nb.njit(cache=True, nogil=True, inline="always")
def point_triangle_dist2(p, tri):
    """Squared distance from ``p`` to a triangle (region test on the closest feature)."""
    a = tri[0]
    b = tri[1]
    c = tri[2]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = ab[0] * ap[0] + ab[1] * ap[1] + ab[2] * ap[2]
    d2 = ac[0] * ap[0] + ac[1] * ap[1] + ac[2] * ap[2]
    if d1 <= 0.0 and d2 <= 0.0:
        q = a
    else:
        bp = p - b
        d3 = ab[0] * bp[0] + ab[1] * bp[1] + ab[2] * bp[2]
        d4 = ac[0] * bp[0] + ac[1] * bp[1] + ac[2] * bp[2]
        cp = p - c
        d5 = ab[0] * cp[0] + ab[1] * cp[1] + ab[2] * cp[2]
        d6 = ac[0] * cp[0] + ac[1] * cp[1] + ac[2] * cp[2]
        vc = d1 * d4 - d3 * d2
        vb = d5 * d2 - d1 * d6
        va = d3 * d6 - d5 * d4
        if d3 >= 0.0 and d4 <= d3:
            q = b
        elif vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
            q = a + (d1 / (d1 - d3)) * ab
        elif d6 >= 0.0 and d5 <= d6:
            q = c
        elif vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
            q = a + (d2 / (d2 - d6)) * ac
        elif va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
            q = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b)
        else:
            denom = 1.0 / (va + vb + vc)
            q = a + ab * (vb * denom) + ac * (vc * denom)
    diff = p - q
    return diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2]


@nb.njit(cache=True, nogil=True)
def closest_kernel(points, tris, node_min, node_max, left, right, start, count, order):
    """Exact distance from each point to the nearest triangle, and that face."""
    k = points.shape[0]
    dist = np.full(k, np.inf)
    faces = np.full(k, -1, dtype=np.int64)
    if left.shape[0] == 0:
        return dist, faces
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    near_stack = np.empty(STACK_SIZE)
    for r in range(k):
        p = points[r]
        best = np.inf
        best_f = -1
        stack[0] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            node = stack[sp]
            bd = 0.0
            for a in range(3):
                if p[a] < node_min[node, a]:
                    bd += (node_min[node, a] - p[a]) ** 2
                elif p[a] > node_max[node, a]:
                    bd += (p[a] - node_max[node, a]) ** 2
            if bd > best:
                continue
            if left[node] < 0:
                for i in range(start[node], start[node] + count[node]):
                    f = order[i]
                    d2 = point_triangle_dist2(p, tris[f])
                    if d2 < best or (d2 == best and f < best_f):
                        best = d2
                        best_f = f
                continue
            stack[sp] = right[node]
            sp += 1
            stack[sp] = left[node]
            sp += 1
        dist[r] = np.sqrt(best)
        faces[r] = best_f
    return dist, faces


@nb.njit(cache=True, nogil=True)
def leaf_faces(left, right, start, count, order):
    """Face ids in leaf order, by walking the tree from the root."""
    out = np.empty(order.shape[0], dtype=np.int64)
    if left.shape[0] == 0:
        return out
    n = 0
    stack = np.empty(STACK_SIZE, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if left[node] < 0:
            for i in range(start[node], start[node] + count[node]):
                out[n] = order[i]
                n += 1
            continue
        stack[sp] = right[node]
        sp += 1
        stack[sp] = left[node]
        sp += 1
    return out[:n]
