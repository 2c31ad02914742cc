"""Volumes of anisotropic tubes ``cloud + rC``.

Two estimators share one bounding box (the cloud box grown by the reach of
rC along each axis plus a few whole voxels):

* ``grid``: voxel centres are classified exactly. For each cloud point and
  each voxel line (parallel to one axis) that crosses its copy of rC, the
  facet inequalities give an interval of the line parameter; the union of
  these intervals per line is counted in whole voxels. The result is an
  integer count times h^n, independent of how the work is split.
* ``mc``: uniform samples from a counter-based generator keyed by
  ``(seed, block)``, so sample i is the same whatever the worker count.
  Membership uses a KD-tree with the sandwich |v|/beta <= gauge <= |v|/alpha.

A body of lower dimension than the ambient space turns the cloud tube into
a finite union of lower-dimensional sets, which has Lebesgue measure zero;
both estimators then return exactly 0.
"""

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .convex import gauge, unit_ball_volume
from .errors import BadResolution, DimMismatch, EmptyCloud, NonpositiveRadius

MC_BLOCK = 1 << 16
GRID_CHUNK = 1 << 22  # (point, line, facet) triples handled per batch
EPS_RATIO = 0.01


@dataclass(frozen=True)
class TubeVolumeEstimate:
    r: float
    volume: float
    stderr: float
    method: str
    resolution: float
    seed: Optional[int] = None


def default_threads():
    env = os.environ.get("AMINK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _check_cloud(cloud, C):
    if len(cloud) == 0:
        raise EmptyCloud("point cloud is empty")
    if cloud.ambient_dim != C.ambient_dim:
        raise DimMismatch("cloud and body live in different ambient dimensions")


def halfspaces(C):
    """Ambient facet form ``A z <= b`` of a full-dimensional body, |a_i| = 1."""
    if C.has_facets:
        return C.facet_normals @ C.span_basis, C.facet_offsets
    eq = ConvexHull(C.span_vertices).equations
    return eq[:, :-1] @ C.span_basis, -eq[:, -1]


def aniso_distance(z, cloud, C):
    """min over cloud points s of gauge(C, z - s); +inf if no s works."""
    _check_cloud(cloud, C)
    z = np.asarray(z, dtype=float)
    P = cloud.points
    if not C.is_full_dim:
        D = z - P
        resid = np.linalg.norm(D - (D @ C.span_basis.T) @ C.span_basis, axis=1)
        cand = resid <= 1e-9 * np.linalg.norm(D, axis=1)
        if not cand.any():
            return math.inf
        return float(gauge(C, D[cand]).min())
    alpha, beta = C.inradius, C.circumradius
    tree = cKDTree(P)
    d0, _ = tree.query(z)
    idx = tree.query_ball_point(z, d0 * beta / alpha * (1 + 1e-12) + 1e-300)
    return float(gauge(C, z - P[idx]).min())


def _bbox(cloud, C, r, h):
    """Cloud box grown by the reach of rC along each axis plus whole voxels.

    Using the per-axis extent of C (at most its circumradius) instead of a
    uniform pad keeps voxel faces aligned with tube faces for axis-parallel
    data when r / h is an integer.
    """
    n = C.ambient_dim
    V = C.vertices
    whole = math.ceil(math.sqrt(n)) * h
    lo = cloud.points.min(axis=0) + r * V.min(axis=0) - whole
    hi = cloud.points.max(axis=0) + r * V.max(axis=0) + whole
    return lo, hi


def _merge(iv):
    """Union of integer intervals given as rows (start, end), sorted output."""
    if len(iv) == 0:
        return iv
    iv = iv[np.argsort(iv[:, 0], kind="stable")]
    ends = np.maximum.accumulate(iv[:, 1])
    new = np.ones(len(iv), dtype=bool)
    new[1:] = iv[1:, 0] > ends[:-1] + 1
    starts = iv[new, 0]
    last = np.flatnonzero(np.r_[new[1:], True])
    return np.column_stack([starts, ends[last]])


def _grid_volume(cloud, C, r, h, bbox, threads):
    n = C.ambient_dim
    lo, hi = bbox
    shape = tuple(int(s) for s in np.maximum(1, np.ceil((hi - lo) / h)))
    A, b = halfspaces(C)
    V = C.vertices
    axis = int(np.argmax(V.max(axis=0) - V.min(axis=0)))
    perp = [a for a in range(n) if a != axis]
    reach = (-r * V[:, perp].min(axis=0), r * V[:, perp].max(axis=0))
    chains = _chains_2d(C, axis) if n == 2 else None
    P = cloud.points
    lines_per_point = np.prod([(reach[0][q] + reach[1][q]) / h + 1 for q in range(len(perp))])
    cost = 8 if chains is not None else len(b)
    step = max(1, int(GRID_CHUNK / (cost * max(lines_per_point, 1.0))))
    chunks = [P[i:i + step] for i in range(0, len(P), step)]

    def work(chunk):
        return _merge(_intervals(chunk, A, b, r, lo, h, shape, axis, perp, reach, chains))

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    merged = _merge(np.vstack(parts)) if parts else np.zeros((0, 2), np.int64)
    count = int((merged[:, 1] - merged[:, 0] + 1).sum())
    return count * h ** n, count


def _chains_2d(C, axis):
    """Right and left boundary chains of a polygon as functions of the
    perpendicular coordinate y: (y, x) arrays with y strictly increasing."""
    V = C.vertices[:, [axis, 1 - axis]]  # columns: (x along scan axis, y)
    x, y = V[:, 0], V[:, 1]
    ccw = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)) > 0
    m = len(V)
    tol = 1e-12 * np.abs(V).max()
    bottom = np.flatnonzero(y <= y.min() + tol)
    top = np.flatnonzero(y >= y.max() - tol)
    br, bl = bottom[np.argmax(x[bottom])], bottom[np.argmin(x[bottom])]
    tr, tl = top[np.argmax(x[top])], top[np.argmin(x[top])]

    def walk(i, j, step):
        idx = [i]
        while idx[-1] != j:
            idx.append((idx[-1] + step) % m)
        return np.array(idx)

    # hull vertices are in cyclic order; counter-clockwise from the
    # bottom-right vertex climbs the right side
    step = 1 if ccw else -1
    right = walk(br, tr, step)
    left = walk(bl, tl, -step)
    return (y[right], x[right]), (y[left], x[left])


def _intervals(P, A, b, r, lo, h, shape, axis, perp, reach, chains=None):
    """Voxel-centre index intervals on lines parallel to ``axis``.

    Each row is (key * stride + i_start, key * stride + i_end), where key
    numbers the line and stride exceeds the line length, so intervals of
    different lines never touch.
    """
    rb = r * b
    dims = np.array([shape[a] for a in perp], dtype=np.int64)
    Q = P[:, perp]
    j_lo = np.maximum(np.ceil((Q - reach[0] - lo[perp]) / h - 0.5).astype(np.int64), 0)
    j_hi = np.minimum(np.floor((Q + reach[1] - lo[perp]) / h - 0.5).astype(np.int64), dims - 1)
    counts = np.maximum(j_hi - j_lo + 1, 0)
    per_point = counts.prod(axis=1)
    total = int(per_point.sum())
    if total == 0:
        return np.zeros((0, 2), dtype=np.int64)
    pid = np.repeat(np.arange(len(P)), per_point)
    local = np.arange(total) - np.repeat(np.cumsum(per_point) - per_point, per_point)
    J = np.empty((total, len(perp)), dtype=np.int64)
    for q in range(len(perp) - 1, -1, -1):
        c = counts[pid, q]
        J[:, q] = j_lo[pid, q] + local % c
        local //= c
    offset = lo[perp] + (J + 0.5) * h - Q[pid]
    if chains is not None:
        # planar body: the chord of rC at height y is r * chord_C(y / r)
        y = offset[:, 0] / r
        (yr, xr), (yl, xl) = chains
        ok = (y >= yr[0]) & (y <= yr[-1])
        t_hi = r * np.interp(y, yr, xr)
        t_lo = r * np.interp(y, yl, xl)
    else:
        slack = rb - offset @ A[:, perp].T
        a = A[:, axis]
        pos, neg = a > 1e-14, a < -1e-14
        t_hi = (slack[:, pos] / a[pos]).min(axis=1) if pos.any() else np.full(total, np.inf)
        t_lo = (slack[:, neg] / a[neg]).max(axis=1) if neg.any() else np.full(total, -np.inf)
        ok = t_lo <= t_hi
        par = ~(pos | neg)
        if par.any():
            ok &= (slack[:, par] >= 0).all(axis=1)
    ps = P[pid, axis]
    i_lo = np.maximum(np.ceil((ps + t_lo - lo[axis]) / h - 0.5), 0)
    i_hi = np.minimum(np.floor((ps + t_hi - lo[axis]) / h - 0.5), shape[axis] - 1)
    ok &= i_lo <= i_hi
    key = np.ravel_multi_index(tuple(J[ok].T), tuple(dims)).astype(np.int64)
    base = key * np.int64(shape[axis] + 1)
    return np.column_stack([base + i_lo[ok].astype(np.int64), base + i_hi[ok].astype(np.int64)])


def _mc_block(tree, P, C, r, lo, hi, seed, block, size, alpha, beta):
    gen = np.random.Generator(np.random.Philox(key=int(seed) + (int(block) << 64)))
    Z = lo + (hi - lo) * gen.random((size, len(lo)))
    # only distances up to r * beta matter; the bound also prunes the search
    d, _ = tree.query(Z, distance_upper_bound=r * beta * (1 + 1e-12))
    inside = d <= r * alpha
    unsure = np.flatnonzero(~inside & (d <= r * beta))
    if unsure.size:
        A, b = halfspaces(C)
        Ab = A.T / b
        for part in np.array_split(unsure, max(1, unsure.size // 256)):
            near = tree.query_ball_point(Z[part], r * beta)
            owner = np.repeat(np.arange(part.size), [len(ix) for ix in near])
            idx = np.concatenate([np.asarray(ix, dtype=np.intp) for ix in near])
            g = ((Z[part][owner] - P[idx]) @ Ab).max(axis=1)
            best = np.full(part.size, np.inf)
            np.minimum.at(best, owner, g)
            inside[part] = best <= r
    return int(inside.sum())


def _mc_volume(cloud, C, r, N, seed, bbox, threads):
    lo, hi = bbox
    box_vol = float(np.prod(hi - lo))
    tree = cKDTree(cloud.points)
    alpha, beta = C.inradius, C.circumradius
    blocks = [(i, min(MC_BLOCK, N - i * MC_BLOCK)) for i in range((N + MC_BLOCK - 1) // MC_BLOCK)]

    def work(blk):
        return _mc_block(tree, cloud.points, C, r, lo, hi, seed, blk[0], blk[1], alpha, beta)

    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as ex:
            hits = sum(ex.map(work, blocks))
    else:
        hits = sum(work(blk) for blk in blocks)
    p = hits / N
    return box_vol * p, box_vol * math.sqrt(p * (1 - p) / N)


def tube_volume(cloud, C, r, method="grid", h=None, h_rel=None, N=None, seed=None,
                bbox=None, threads=None):
    """Estimate lambda^n(cloud + rC).

    ``h`` is the voxel size, or ``h_rel * r`` when ``h_rel`` is given.
    ``N`` and ``seed`` configure the Monte Carlo estimator.
    """
    _check_cloud(cloud, C)
    if not r > 0:
        raise NonpositiveRadius(f"radius must be positive, got {r}")
    threads = default_threads() if threads is None else max(1, int(threads))
    if method == "grid":
        if h_rel is not None:
            h = h_rel * r
        if h is None or not h > 0:
            raise BadResolution("grid method needs a positive voxel size")
        resolution = float(h)
    elif method == "mc":
        if N is None or int(N) < 1:
            raise BadResolution("mc method needs a sample count N >= 1")
        if seed is None:
            raise BadResolution("mc method needs a seed")
        N = int(N)
        resolution = float(N)
    else:
        raise BadResolution(f"unknown method {method!r}")

    if not C.is_full_dim:
        return TubeVolumeEstimate(r, 0.0, 0.0, method, resolution, seed)
    if cloud.density_eps > EPS_RATIO * r:
        warnings.warn(f"cloud spacing {cloud.density_eps:.3g} exceeds r/100; the "
                      "tube of the cloud may differ from the tube of the set", stacklevel=2)
    box = _bbox(cloud, C, r, h if method == "grid" else 0.0) if bbox is None else \
        (np.asarray(bbox[0], float), np.asarray(bbox[1], float))
    if method == "grid":
        vol, _ = _grid_volume(cloud, C, r, h, box, threads)
        return TubeVolumeEstimate(r, vol, 0.0, method, resolution, None)
    vol, err = _mc_volume(cloud, C, r, N, seed, box, threads)
    return TubeVolumeEstimate(r, vol, err, method, resolution, int(seed))


def normalized(volume, n, k, r):
    return volume / (unit_ball_volume(n - k) * r ** (n - k))


def normalized_content(cloud, C, k, r, method="grid", **params):
    """M^k_{r,C} = lambda^n(cloud + rC) / (omega_{n-k} r^{n-k})."""
    n = C.ambient_dim
    if not 0 <= k <= n:
        raise DimMismatch(f"k must lie in [0, {n}], got {k}")
    est = tube_volume(cloud, C, r, method=method, **params)
    return normalized(est.volume, n, k, r)
