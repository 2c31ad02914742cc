"""Rectifiable sets as finite unions of parametrised C^1 patches.

Each patch maps a parameter box in R^k into R^n. Points and Jacobians are
evaluated in batches: ``patch.evaluate(U)`` takes an ``(m, k)`` array of
parameters and returns ``(m, n)`` points and ``(m, n, k)`` Jacobians.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _quadrature as quad
from .convex import Subspace
from .errors import DimMismatch, EmptyInput, OutOfDomain, RankDeficient, UnsupportedShape

RANK_TOL = 1e-8
FD_STEP = 1e-6
DEFAULT_ORDER = 16


class Patch:
    kind = None

    def __init__(self, domain, ambient_dim):
        self.domain = np.asarray(domain, dtype=float).reshape(-1, 2)
        self.ambient_dim = int(ambient_dim)

    @property
    def param_dim(self):
        return self.domain.shape[0]

    def evaluate(self, U):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(k={self.param_dim}, n={self.ambient_dim})"


class Point(Patch):
    kind = "point"

    def __init__(self, p):
        self.p = np.asarray(p, dtype=float)
        super().__init__(np.zeros((0, 2)), self.p.size)

    def evaluate(self, U):
        m = len(U)
        return np.tile(self.p, (m, 1)), np.zeros((m, self.ambient_dim, 0))


class Segment(Patch):
    """g(u) = a + u (b - a), u in [0, 1]."""

    kind = "segment"

    def __init__(self, a, b):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        super().__init__([[0.0, 1.0]], self.a.size)

    def evaluate(self, U):
        u = U[:, 0]
        d = self.b - self.a
        return self.a + u[:, None] * d, np.tile(d[:, None], (len(u), 1, 1))


class PolylinePiece(Segment):
    kind = "polyline-piece"


class CircleArc(Patch):
    """Planar arc c + rho (cos t, sin t), t in [t0, t1]."""

    kind = "circle_arc"

    def __init__(self, center=(0.0, 0.0), radius=1.0, theta=(0.0, 2 * math.pi)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        super().__init__([theta], 2)

    def evaluate(self, U):
        t = U[:, 0]
        c, s = np.cos(t), np.sin(t)
        pts = self.center + self.radius * np.column_stack([c, s])
        jac = self.radius * np.column_stack([-s, c])[:, :, None]
        return pts, jac


class ParametricCurve(Patch):
    """User curve t -> f(t) in R^n; ``f`` takes and returns arrays.

    Without ``derivative`` the Jacobian comes from central differences with
    one Richardson step, accurate to about 1e-10 for smooth f.
    """

    kind = "parametric_curve"

    def __init__(self, f, interval, ambient_dim, derivative=None):
        self.f = f
        self.derivative = derivative
        super().__init__([interval], ambient_dim)

    def _fd(self, t):
        def central(h):
            return (self.f(t + h) - self.f(t - h)) / (2.0 * h)
        return (4.0 * central(FD_STEP / 2) - central(FD_STEP)) / 3.0

    def evaluate(self, U):
        t = U[:, 0]
        pts = np.asarray(self.f(t), dtype=float).reshape(len(t), self.ambient_dim)
        if self.derivative is not None:
            d = np.asarray(self.derivative(t), dtype=float)
        else:
            d = self._fd(t)
        return pts, d.reshape(len(t), self.ambient_dim, 1)


def helix(radius=1.0, pitch=1.0, turns=1.0):
    """Helix arc (rho cos t, rho sin t, pitch t / 2pi) in R^3."""
    c = pitch / (2 * math.pi)

    def f(t):
        return np.column_stack([radius * np.cos(t), radius * np.sin(t), c * t])

    def df(t):
        return np.column_stack([-radius * np.sin(t), radius * np.cos(t), np.full_like(t, c)])

    return ParametricCurve(f, (0.0, 2 * math.pi * turns), 3, derivative=df)


class GraphSurface(Patch):
    """Graph g(w) = (w, f(w)) of a polynomial f over a box in R^k.

    ``coeffs`` maps exponent tuples to coefficients, e.g. ``{(2, 0): 1,
    (0, 2): -1}`` for x^2 - y^2.
    """

    kind = "graph_surface"

    def __init__(self, coeffs, domain):
        domain = np.asarray(domain, dtype=float).reshape(-1, 2)
        k = domain.shape[0]
        self.exps = np.array([tuple(e) for e in coeffs], dtype=int).reshape(-1, k)
        self.coefs = np.array(list(coeffs.values()), dtype=float)
        super().__init__(domain, k + 1)

    def evaluate(self, U):
        m, k = U.shape
        mono = np.prod(U[:, None, :] ** self.exps[None, :, :], axis=2)
        f = mono @ self.coefs
        grad = np.zeros((m, k))
        for i in range(k):
            e = self.exps[:, i]
            shifted = self.exps.copy()
            shifted[:, i] = np.maximum(e - 1, 0)
            grad[:, i] = (np.prod(U[:, None, :] ** shifted[None, :, :], axis=2) * e) @ self.coefs
        pts = np.column_stack([U, f])
        jac = np.concatenate([np.broadcast_to(np.eye(k), (m, k, k)), grad[:, None, :]], axis=1)
        return pts, jac


class SpherePatch(Patch):
    """c + rho (sin p cos t, sin p sin t, cos p) over (p, t) in a box."""

    kind = "sphere_patch"

    def __init__(self, center=(0.0, 0.0, 0.0), radius=1.0, phi=(0.0, math.pi),
                 theta=(0.0, 2 * math.pi)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        super().__init__([phi, theta], 3)

    def evaluate(self, U):
        p, t = U[:, 0], U[:, 1]
        sp, cp, st, ct = np.sin(p), np.cos(p), np.sin(t), np.cos(t)
        pts = self.center + self.radius * np.column_stack([sp * ct, sp * st, cp])
        dp = np.column_stack([cp * ct, cp * st, -sp])
        dt = np.column_stack([-sp * st, sp * ct, np.zeros_like(p)])
        return pts, self.radius * np.stack([dp, dt], axis=2)


class Triangle(Patch):
    """Flat triangle abc through the collapsed-square map
    g(u, v) = a + u (b - a) + u v (c - b) on [0, 1]^2."""

    kind = "triangle"

    def __init__(self, a, b, c):
        self.a, self.b, self.c = (np.asarray(x, dtype=float) for x in (a, b, c))
        super().__init__([[0.0, 1.0], [0.0, 1.0]], self.a.size)

    def evaluate(self, U):
        u, v = U[:, 0:1], U[:, 1:2]
        e1, e2 = self.b - self.a, self.c - self.b
        pts = self.a + u * e1 + u * v * e2
        jac = np.stack([e1 + v * e2, u * e2], axis=2)
        return pts, jac


class AffinePatch(Patch):
    """Parallelotope p + U E over [0, 1]^k (rows of E are the edge vectors)."""

    kind = "affine"

    def __init__(self, origin, edges):
        self.origin = np.asarray(origin, dtype=float)
        self.edges = np.atleast_2d(np.asarray(edges, dtype=float))
        k = self.edges.shape[0]
        super().__init__(np.tile([0.0, 1.0], (k, 1)), self.origin.size)

    def evaluate(self, U):
        pts = self.origin + U @ self.edges
        return pts, np.broadcast_to(self.edges.T, (len(U),) + self.edges.T.shape).copy()


def polyline(points):
    pts = np.asarray(points, dtype=float)
    return [PolylinePiece(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]


def _check_domain(p, u):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if u.size != p.param_dim:
        raise OutOfDomain(f"expected {p.param_dim} parameters, got {u.size}")
    lo, hi = p.domain[:, 0], p.domain[:, 1]
    slack = 1e-12 * np.maximum(1.0, np.abs(p.domain).max(axis=1))
    if np.any(u < lo - slack) or np.any(u > hi + slack):
        raise OutOfDomain(f"parameter {u} outside domain {p.domain.tolist()}")
    return u


def eval_patch(p, u):
    """Point g(u) and Jacobian Dg(u) (n x k) of one patch."""
    u = _check_domain(p, u)
    pts, jac = p.evaluate(u[None, :])
    return pts[0], jac[0]


def _svd_frames(jac):
    """Batched SVD of Jacobians: tangent frames, normal frames, singular values."""
    Uf, s, _ = np.linalg.svd(jac, full_matrices=True)
    k = jac.shape[2]
    return np.swapaxes(Uf[:, :, :k], 1, 2), np.swapaxes(Uf[:, :, k:], 1, 2), s


def _rank_checked(p, u):
    _, jac = eval_patch(p, u)
    T, N, s = _svd_frames(jac[None])
    if s.size and s[0].min() < RANK_TOL:
        raise RankDeficient(f"Jacobian rank below {p.param_dim} at {u}")
    return T[0], N[0]


def tangent_space(p, u):
    T, _ = _rank_checked(p, u)
    return Subspace(T, p.ambient_dim)


def normal_space(p, u):
    _, N = _rank_checked(p, u)
    return Subspace(N, p.ambient_dim)


def _gram_jacobian(jac):
    G = np.swapaxes(jac, 1, 2) @ jac
    return np.sqrt(np.maximum(np.linalg.det(G), 0.0))


def jacobian_k(p, u):
    """J_k g(u) = sqrt(det(Dg^T Dg))."""
    _, jac = eval_patch(p, u)
    J = float(_gram_jacobian(jac[None])[0])
    if p.param_dim and J < RANK_TOL ** p.param_dim:
        raise RankDeficient(f"Jacobian rank below {p.param_dim} at {u}")
    return J


def patch_quadrature(p, order):
    """Gauss-Legendre nodes on the domain with points, frames and J_k.

    Returns ``(points, weights, tangents, normals)`` where the weights
    already include J_k. Raises RankDeficient at singular nodes.
    """
    U, w = quad.gauss_box(p.domain[:, 0], p.domain[:, 1], order)
    pts, jac = p.evaluate(U)
    T, N, s = _svd_frames(jac)
    if s.size and s.min() < RANK_TOL:
        raise RankDeficient("Jacobian rank deficient at a quadrature node")
    return pts, w * _gram_jacobian(jac), T, N


@dataclass
class RectifiableSet:
    patches: list

    def __post_init__(self):
        self.patches = list(self.patches)
        if not self.patches:
            raise EmptyInput("a rectifiable set needs at least one patch")
        n = {p.ambient_dim for p in self.patches}
        k = {p.param_dim for p in self.patches}
        if len(n) != 1 or len(k) != 1:
            raise DimMismatch("patches disagree on ambient or parameter dimension")

    @property
    def ambient_dim(self):
        return self.patches[0].ambient_dim

    @property
    def k(self):
        return self.patches[0].param_dim

    def __add__(self, other):
        return RectifiableSet(self.patches + other.patches)


def hausdorff_measure(S, order=DEFAULT_ORDER):
    """H^k(S) as the sum of area-formula integrals over the patches."""
    if order < 2:
        raise ValueError("quadrature order must be at least 2")
    total = 0.0
    for p in S.patches:
        U, w = quad.gauss_box(p.domain[:, 0], p.domain[:, 1], order)
        _, jac = p.evaluate(U)
        total += float(w @ _gram_jacobian(jac))
    return total


@dataclass
class PointCloud:
    points: np.ndarray
    weights: np.ndarray
    density_eps: float
    patch_index: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.points)

    @property
    def ambient_dim(self):
        return self.points.shape[1]


def _sigma_max(p, per_axis=17):
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in p.domain]
    U = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    _, jac = p.evaluate(U)
    return float(np.linalg.norm(jac, ord=2, axis=(1, 2)).max())


def _patch_cloud(p, eps):
    k = p.param_dim
    if k == 0:
        pts, _ = p.evaluate(np.zeros((1, 0)))
        return pts, np.ones(1)
    smax = _sigma_max(p)
    lo, hi = p.domain[:, 0], p.domain[:, 1]
    if smax == 0.0:
        pts, _ = p.evaluate(lo[None, :])
        return pts, np.zeros(1)
    h = eps / (1.5 * smax * math.sqrt(k))
    counts = np.maximum(1, np.ceil((hi - lo) / h).astype(int))
    axes, wts = [], []
    for i in range(k):
        x = np.linspace(lo[i], hi[i], counts[i] + 1)
        w = np.full(x.size, (hi[i] - lo[i]) / counts[i])
        w[[0, -1]] *= 0.5
        axes.append(x)
        wts.append(w)
    U = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    W = np.ones(len(U))
    for g in np.meshgrid(*wts, indexing="ij"):
        W *= g.ravel()
    pts, jac = p.evaluate(U)
    return pts, W * _gram_jacobian(jac)


def sample_cloud(S, eps, patch_weights=None):
    """eps-dense point cloud of S with trapezoid weights for H^k.

    Each patch is sampled on a parameter grid (endpoints included) whose
    spacing h satisfies 1.5 h sigma_max sqrt(k) <= eps, so every point of
    the set lies within eps of the cloud. ``patch_weights`` optionally
    multiplies the weights of each patch (used for non-uniform measures).
    """
    if eps <= 0:
        raise ValueError("cloud spacing eps must be positive")
    pts, wts, idx = [], [], []
    for i, p in enumerate(S.patches):
        P, W = _patch_cloud(p, eps)
        if patch_weights is not None:
            W = W * float(patch_weights[i])
        pts.append(P)
        wts.append(W)
        idx.append(np.full(len(P), i))
    return PointCloud(np.vstack(pts), np.concatenate(wts), float(eps), np.concatenate(idx))


def e1_family(M=64, include_limit=True):
    """Segments conv{(-1/j, 1/j), (1/j, 1/j)}, j = 1..M, plus the origin.

    The limit point is stored as a degenerate segment so the set keeps a
    single parameter dimension.
    """
    patches = [Segment((-1.0 / j, 1.0 / j), (1.0 / j, 1.0 / j)) for j in range(1, M + 1)]
    if include_limit:
        patches.append(Segment((0.0, 0.0), (0.0, 0.0)))
    return RectifiableSet(patches)


def patches_from_body(K):
    """Flat patches covering a convex body of intrinsic dim 1 or 2."""
    V = K.vertices
    if K.intrinsic_dim == 1:
        t = K.span_vertices[:, 0]
        return RectifiableSet([Segment(V[np.argmin(t)], V[np.argmax(t)])])
    if K.intrinsic_dim == 2:
        # 2D hull vertices are stored in cyclic order
        return RectifiableSet([Triangle(V[0], V[i], V[i + 1]) for i in range(1, len(V) - 1)])
    raise UnsupportedShape("only segments and polygons convert to patches")

