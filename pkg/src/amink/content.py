"""Minkowski content numbers and their independent cross-checks.

``content_estimate`` follows the tube-volume definition down a schedule of
radii and extrapolates. ``phi_functional`` integrates the local density
H^{n-k}(P_N C) over the set, ``phi_codim1`` is its support-function form
for hypersurfaces, ``slicing_content`` handles the case dim S + dim C = n,
and the AFP estimators measure lower density ratios.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from . import _quadrature as quad
from .convex import Subspace, body_volume, project_body, radial, support, unit_ball_volume
from .errors import (DimMismatch, DimTooLarge, EmptyCloud, NonpositiveRadius, RankDeficient,
                     ResolutionTooCoarse, ScheduleNotDecreasing, ScheduleTooShort,
                     UnsupportedShape)
from .rectifiable import RANK_TOL, _gram_jacobian, _svd_frames, sample_cloud
from .tube import EPS_RATIO, normalized, tube_volume

FIT_POINTS = 5
GROWTH = 1.2


@dataclass
class ContentEstimate:
    k: int
    schedule: np.ndarray
    values: np.ndarray
    extrapolated: float
    residual: float
    lower_tail: float
    upper_tail: float
    divergence_flag: bool
    rows: list = field(default_factory=list, repr=False)


@dataclass
class AfpReport:
    gamma: float
    argmin_center: Optional[np.ndarray]
    argmin_radius: Optional[float]
    relative_mode: bool = False
    subspace: Optional[Subspace] = None


def validate_schedule(schedule):
    r = np.asarray(schedule, dtype=float).ravel()
    if r.size < 4:
        raise ScheduleTooShort("schedule needs at least 4 radii")
    if np.any(r <= 0):
        raise NonpositiveRadius("radii must be positive")
    if np.any(np.diff(r) >= 0):
        raise ScheduleNotDecreasing("schedule not decreasing")
    return r


def extrapolate(schedule, values, q=FIT_POINTS):
    """Fit M(r) = M0 + c r on the q smallest radii.

    Returns (M0, rms residual, tail min, tail max, divergence flag). The
    flag is raised when each of the last three values exceeds its
    predecessor by more than 20 percent; M0 is then reported as +inf.
    """
    r = np.asarray(schedule, dtype=float)
    v = np.asarray(values, dtype=float)
    q = min(q, len(r))
    rt, vt = r[-q:], v[-q:]
    X = np.column_stack([np.ones(q), rt])
    coef, *_ = np.linalg.lstsq(X, vt, rcond=None)
    resid = float(np.sqrt(np.mean((X @ coef - vt) ** 2)))
    diverging = len(v) >= 4 and all(v[i] > GROWTH * v[i - 1] for i in range(len(v) - 3, len(v)))
    m0 = math.inf if diverging else float(coef[0])
    return m0, resid, float(vt.min()), float(vt.max()), bool(diverging)


def content_estimate(S, C, k=None, schedule=(0.1, 0.05, 0.025, 0.0125, 0.00625, 0.003125),
                     method="grid", h=None, h_rel=None, N=None, seed=None,
                     cloud_ratio=EPS_RATIO, cloud_eps=None, q=FIT_POINTS, threads=None):
    """Tube-volume estimate of M^k_C(S) along a decreasing radius schedule.

    ``k`` defaults to the dimension of S; a smaller k makes the normalised
    values blow up, which the divergence flag reports.

    One cloud with spacing ``cloud_ratio * r`` is drawn per radius, or a
    single cloud with spacing ``cloud_eps`` when that is given. With a
    lower-dimensional C the cloud tube is Lebesgue-null, which is the right
    answer only when k + dim C < n; the other cases go to
    :func:`slicing_content`.
    """
    k = S.k if k is None else int(k)
    n = S.ambient_dim
    if not 0 <= k <= n:
        raise DimMismatch(f"k must lie in [0, {n}], got {k}")
    if C.ambient_dim != n:
        raise DimMismatch("set and body live in different ambient dimensions")
    r = validate_schedule(schedule)
    if not C.is_full_dim and S.k + C.intrinsic_dim >= n:
        raise UnsupportedShape("lower-dimensional C with k + dim C >= n: use slicing_content")
    if method == "grid" and C.is_full_dim:
        hs = h_rel * r if h_rel is not None else np.full(r.size, np.nan if h is None else h)
        if k < n and np.any(hs > 2.0 * r * C.inradius):
            raise ResolutionTooCoarse("voxel size exceeds the tube thickness 2 r inradius(C)")
    ratio = cloud_ratio if cloud_eps is None else cloud_eps / r.min()
    if ratio > EPS_RATIO and C.is_full_dim:
        warnings.warn(f"cloud spacing exceeds {EPS_RATIO} r", stacklevel=2)

    rows, values = [], []
    fixed = None if cloud_eps is None else sample_cloud(S, cloud_eps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # already reported once above
        for ri in r:
            cloud = fixed if fixed is not None else sample_cloud(S, cloud_ratio * ri)
            est = tube_volume(cloud, C, ri, method=method, h=h, h_rel=h_rel, N=N,
                              seed=seed, threads=threads)
            rows.append(est)
            values.append(normalized(est.volume, n, k, ri))
    values = np.array(values)
    m0, resid, lo, hi, flag = extrapolate(r, values, q)
    return ContentEstimate(k, r, values, m0, resid, lo, hi, flag, rows)


def _projected_volumes(V, N):
    """H^d of the projection of the vertex set V onto each normal frame.

    ``N`` has shape (m, d, n). Vectorised for d <= 1, hull per node above.
    """
    m, d, _ = N.shape
    if d == 0:
        return np.ones(m)
    Y = np.einsum("vn,mdn->mvd", V, N)
    if d == 1:
        return Y[:, :, 0].max(axis=1) - Y[:, :, 0].min(axis=1)
    out = np.zeros(m)
    for i in range(m):
        Z = Y[i] - Y[i].mean(axis=0)
        s = np.linalg.svd(Z, compute_uv=False)
        if s.size >= d and s[d - 1] > 1e-9 * max(1.0, s[0]):
            out[i] = ConvexHull(Y[i]).volume
    return out


def _patch_integral(p, integrand, order, tol):
    if p.param_dim == 0:
        pts, jac = p.evaluate(np.zeros((1, 0)))
        T, N, _ = _svd_frames(jac)
        return float(integrand(pts, T, N)[0])

    def f(U):
        pts, jac = p.evaluate(U)
        T, N, s = _svd_frames(jac)
        if s.min() < RANK_TOL:
            raise RankDeficient("Jacobian rank deficient at a quadrature node")
        return integrand(pts, T, N) * _gram_jacobian(jac)

    return quad.integrate_box(f, p.domain[:, 0], p.domain[:, 1], order, tol=tol)


def phi_functional(S, C, k=None, order=16, tol=1e-12):
    """Phi_S(C) = (1/omega_{n-k}) integral over S of H^{n-k}(P_{N_x} C) dH^k.

    Integrated patch by patch with adaptive composite Gauss-Legendre of the
    given order; ``tol`` is an absolute tolerance per unit of H^k.
    """
    k = S.k if k is None else int(k)
    if k != S.k:
        raise DimMismatch(f"set has dimension {S.k}, asked for k={k}")
    n = S.ambient_dim
    V = C.vertices

    def integrand(pts, T, N):
        return _projected_volumes(V, N)

    total = sum(_patch_integral(p, integrand, order, tol) for p in S.patches)
    return total / unit_ball_volume(n - k)


def phi_codim1(S, C, order=16, tol=1e-12):
    """Hypersurface form: 1/2 integral of h_C(nu) + h_C(-nu) over S."""
    n = S.ambient_dim
    if S.k != n - 1:
        raise DimMismatch(f"phi_codim1 needs k = n - 1, got k={S.k}, n={n}")

    def integrand(pts, T, N):
        nu = N[:, 0, :]
        return 0.5 * (support(C, nu) + support(C, -nu))

    return sum(_patch_integral(p, integrand, order, tol) for p in S.patches)


def radial_average_area(C, N, order=32, count=400_000):
    """H^d(P_N C) as (1/d) integral over the unit sphere of N of rho^d.

    d = 1 sums the two endpoints, d = 2 integrates exactly between
    consecutive vertex angles with Gauss-Legendre, d = 3 averages over a
    Fibonacci lattice.
    """
    d = N.dim
    if d < 1 or d > 3:
        raise DimTooLarge(f"normal space dimension must be 1, 2 or 3, got {d}")
    Cx = project_body(C, N)
    if Cx.intrinsic_dim < d:
        return 0.0
    B = N.basis
    if d == 1:
        return float(radial(Cx, B[0]) + radial(Cx, -B[0]))
    if d == 2:
        Y = Cx.vertices @ B.T
        ang = np.sort(np.arctan2(Y[:, 1], Y[:, 0]))
        edges = np.r_[ang, ang[0] + 2 * math.pi]
        x, w = np.polynomial.legendre.leggauss(order)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        theta = (mid[:, None] + half[:, None] * x).ravel()
        wts = (half[:, None] * w).ravel()
        U = np.column_stack([np.cos(theta), np.sin(theta)]) @ B
        return float(wts @ radial(Cx, U) ** 2 / 2.0)
    U = quad.fibonacci_sphere(count) @ B
    return float(4 * math.pi * np.mean(radial(Cx, U) ** 3) / 3.0)


def _count_crossings(s, mids):
    """Number of sample intervals of the scalar sequence s that cross each
    level in ``mids`` (sorted): a level x is crossed by [s_i, s_i+1] when
    min < x <= max."""
    lo = np.minimum(s[:-1], s[1:])
    hi = np.maximum(s[:-1], s[1:])
    a = np.searchsorted(mids, lo, side="right")
    b = np.searchsorted(mids, hi, side="right")
    diff = np.zeros(len(mids) + 1, dtype=np.int64)
    np.add.at(diff, a, 1)
    np.add.at(diff, b, -1)
    return np.cumsum(diff[:-1])


def _graze_bands(s):
    """Level bands around sampled local extrema where a crossing count may
    miss a tangency inside one sample interval."""
    ds = np.diff(s)
    turn = np.flatnonzero(ds[:-1] * ds[1:] < 0) + 1
    width = np.abs(s[turn + 1] - s[turn - 1])
    sign = np.sign(ds[turn - 1])  # + for a maximum
    lo = np.where(sign > 0, s[turn], s[turn] - width)
    hi = np.where(sign > 0, s[turn] + width, s[turn])
    return lo, hi


def slicing_content(S, C, cells=4096, subdivisions=10_000, refine=16, return_flags=False):
    """M^k_C(S) for k + dim C = n via the slicing formula.

    M = H^m(C)/omega_m * integral over L-perp of #(S cap (x + L)) dx with
    L = span C and m = dim C. The count is integrated by the midpoint rule
    on ``cells`` cells; crossings are detected as sign changes over
    ``subdivisions`` parameter steps per patch. Cells near a sampled local
    extremum (possible tangency) are recounted on two half cells with a
    ``refine`` times finer parameter grid.
    """
    n = S.ambient_dim
    m = C.intrinsic_dim
    k = S.k
    if k + m != n:
        raise DimMismatch(f"slicing needs k + dim C = n, got {k} + {m} != {n}")
    if n > 3 or k > 1:
        raise UnsupportedShape("slicing supports n <= 3 and k in {0, 1}")
    factor = body_volume(C) / unit_ball_volume(m)
    if k == 0:
        count = len(S.patches)
        return (factor * count, 0) if return_flags else factor * count

    e = C.span.complement().basis[0]
    samples = []
    for p in S.patches:
        u = np.linspace(p.domain[0, 0], p.domain[0, 1], subdivisions + 1)[:, None]
        samples.append(p.evaluate(u)[0] @ e)
    lo = min(s.min() for s in samples)
    hi = max(s.max() for s in samples)
    if hi <= lo:
        return (0.0, 0) if return_flags else 0.0
    w = (hi - lo) / cells
    mids = lo + (np.arange(cells) + 0.5) * w
    counts = sum(_count_crossings(s, mids) for s in samples).astype(float)

    flagged = np.zeros(cells, dtype=bool)
    for s in samples:
        blo, bhi = _graze_bands(s)
        for a, b in zip(blo, bhi):
            flagged |= (mids + w / 2 >= a) & (mids - w / 2 <= b)
    if flagged.any():
        fine = []
        for p in S.patches:
            u = np.linspace(p.domain[0, 0], p.domain[0, 1], refine * subdivisions + 1)[:, None]
            fine.append(p.evaluate(u)[0] @ e)
        idx = np.flatnonzero(flagged)
        sub = np.concatenate([mids[idx] - w / 4, mids[idx] + w / 4])
        order = np.argsort(sub)
        c = np.zeros(sub.size)
        c[order] = sum(_count_crossings(s, sub[order]) for s in fine)
        counts[idx] = 0.5 * (c[:idx.size] + c[idx.size:])
    value = factor * float(counts.sum() * w)
    return (value, int(flagged.sum())) if return_flags else value


def _centers(cloud, max_centers):
    """Strided subset of cloud points plus the first and last point of
    every patch (the endpoints are where density ratios are smallest)."""
    step = max(1, len(cloud) // max_centers)
    idx = set(range(0, len(cloud), step))
    pid = cloud.patch_index
    starts = np.flatnonzero(np.r_[True, pid[1:] != pid[:-1]])
    ends = np.r_[starts[1:] - 1, len(pid) - 1]
    idx.update(starts.tolist())
    idx.update(ends.tolist())
    return np.array(sorted(idx))


def _afp_setup(S, radii, eps, patch_weights):
    radii = np.asarray(radii, dtype=float).ravel()
    if radii.size == 0 or np.any(radii <= 0) or np.any(radii >= 1):
        raise NonpositiveRadius("AFP radii must lie in (0, 1)")
    eps = radii.min() / 100 if eps is None else eps
    cloud = sample_cloud(S, eps, patch_weights)
    total = cloud.weights.sum()
    if len(cloud) == 0 or total <= 0:
        raise EmptyCloud("sampling measure has no mass")
    return radii, cloud, cloud.weights / total


def afp_gamma(S, radii, k=None, eps=None, max_centers=2000, patch_weights=None):
    """Largest gamma with mu(B(x, r)) >= gamma r^k over sampled x and radii.

    mu is the cloud quadrature measure normalised to total mass 1, i.e.
    normalised H^k on S, optionally reweighted per patch.
    """
    k = S.k if k is None else int(k)
    radii, cloud, mu = _afp_setup(S, radii, eps, patch_weights)
    tree = cKDTree(cloud.points)
    centers = _centers(cloud, max_centers)
    best = (math.inf, None, None)
    for r in radii:
        balls = tree.query_ball_point(cloud.points[centers], r)
        mass = np.array([mu[b].sum() for b in balls])
        ratio = mass / r ** k
        i = int(np.argmin(ratio))
        if ratio[i] < best[0]:
            best = (float(ratio[i]), cloud.points[centers[i]].copy(), float(r))
    return AfpReport(best[0], best[1], best[2], False, None)


def _projected_measure(Y, h, d):
    """Occupied h-cells of the projected points times h^d; 0 when the
    points span less than d dimensions."""
    if d == 0:
        return 1.0 if len(Y) else 0.0
    if len(Y) < d + 1:
        return 0.0
    Z = Y - Y.mean(axis=0)
    s = np.linalg.svd(Z, compute_uv=False)
    if s[d - 1] <= 1e-9 * max(1.0, np.abs(Y).max()):
        return 0.0
    cells = np.unique(np.floor(Y / h).astype(np.int64), axis=0)
    return len(cells) * h ** d


def afp_gamma_relative(S, L, radii, k=None, h=None, eps=None, max_centers=2000,
                       patch_weights=None):
    """gamma for mu(B(x,r)) >= gamma r^{k+m-n} H^{n-m}(P_{L-perp}(S cap B(x,r))).

    The projected measure counts occupied cells of an h-grid on L-perp
    (default h = min radius / 100, cloud spacing h). Centres where the
    right-hand side vanishes make the inequality vacuous; they are skipped
    and gamma stays +inf if every centre is vacuous.
    """
    k = S.k if k is None else int(k)
    n = S.ambient_dim
    m = L.dim
    if k + m < n:
        raise DimMismatch(f"relative AFP needs k + dim L >= n, got {k} + {m} < {n}")
    radii = np.asarray(radii, dtype=float).ravel()
    h = radii.min() / 100 if h is None else h
    eps = h if eps is None else eps
    radii, cloud, mu = _afp_setup(S, radii, eps, patch_weights)
    perp = L.complement().basis
    Y = cloud.points @ perp.T
    d = n - m
    tree = cKDTree(cloud.points)
    centers = _centers(cloud, max_centers)
    best = (math.inf, None, None)
    for r in radii:
        balls = tree.query_ball_point(cloud.points[centers], r)
        for c, b in zip(centers, balls):
            meas = _projected_measure(Y[b], h, d)
            if meas <= 0:
                continue
            ratio = mu[b].sum() / (r ** (k + m - n) * meas)
            if ratio < best[0]:
                best = (float(ratio), cloud.points[c].copy(), float(r))
    return AfpReport(best[0], best[1], best[2], True, L)
