"""Vertex-represented convex bodies.

A body is stored by its extreme points together with an orthonormal frame
of its linear span. Facet inequalities ``a . y <= b`` (in span coordinates)
are cached when the intrinsic dimension is at most 3; above that, gauge and
radial evaluations fall back to a small linear program.

The origin must lie in the relative interior, so the span of the body and
its affine hull coincide.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from . import _quadrature as quad
from ._simplex import LPInfeasible, LPUnbounded, simplex_max
from .errors import (DimMismatch, DimTooLarge, EmptyInput, NegativeDim,
                     OriginNotInteriorError, ZeroDirection, ZeroScale)

RANK_TOL = 1e-9
SPAN_TOL = 1e-9
MAX_FACET_DIM = 3


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of R^n spanned by the orthonormal rows of ``basis``."""

    basis: np.ndarray
    ambient_dim: int

    def __post_init__(self):
        B = _frozen(np.asarray(self.basis, dtype=float).reshape(-1, self.ambient_dim))
        if B.shape[0] and not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-12, rtol=0):
            raise ValueError("subspace basis rows are not orthonormal")
        object.__setattr__(self, "basis", B)

    @property
    def dim(self):
        return self.basis.shape[0]

    @classmethod
    def span(cls, vectors, ambient_dim=None, tol=1e-10):
        """Orthonormal basis of the span of ``vectors`` (rows)."""
        V = np.atleast_2d(np.asarray(vectors, dtype=float))
        n = V.shape[1] if ambient_dim is None else ambient_dim
        V = V.reshape(-1, n)
        if V.size == 0:
            return cls(np.zeros((0, n)), n)
        _, s, Vt = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > tol * max(1.0, s[0])))
        return cls(Vt[:rank], n)

    @classmethod
    def full(cls, n):
        return cls(np.eye(n), n)

    def complement(self):
        n = self.ambient_dim
        if self.dim == 0:
            return Subspace.full(n)
        _, _, Vt = np.linalg.svd(self.basis, full_matrices=True)
        return Subspace(Vt[self.dim:], n)

    def project(self, x):
        """Orthogonal projection of ``x`` (one vector or rows) onto the subspace."""
        x = np.asarray(x, dtype=float)
        return (x @ self.basis.T) @ self.basis

    def coords(self, x):
        return np.asarray(x, dtype=float) @ self.basis.T


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Convex polytope with 0 in its relative interior."""

    vertices: np.ndarray
    ambient_dim: int
    intrinsic_dim: int
    span_basis: np.ndarray
    facet_normals: Optional[np.ndarray] = None
    facet_offsets: Optional[np.ndarray] = None

    @property
    def span(self):
        return Subspace(self.span_basis, self.ambient_dim)

    @property
    def span_vertices(self):
        return self.vertices @ self.span_basis.T

    @property
    def has_facets(self):
        return self.facet_normals is not None

    @property
    def circumradius(self):
        """Largest vertex norm: C is inside the ball of this radius."""
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @property
    def inradius(self):
        """Radius of the largest centred ball (within the span) inside C."""
        if self.intrinsic_dim == 0:
            return 0.0
        if self.has_facets:
            return float(self.facet_offsets.min())
        hull = ConvexHull(self.span_vertices)
        return float((-hull.equations[:, -1]).min())

    @property
    def diameter(self):
        if len(self.vertices) < 2:
            return 0.0
        return float(pdist(self.vertices).max())

    @property
    def is_full_dim(self):
        return self.intrinsic_dim == self.ambient_dim


def _unique_facets(eq, scale):
    """Merge the coplanar simplices qhull reports into unique facets."""
    a = eq[:, :-1]
    b = -eq[:, -1]
    key = np.round(np.column_stack([a, b / scale]), 8)
    _, keep = np.unique(key, axis=0, return_index=True)
    keep = np.sort(keep)
    return a[keep], b[keep]


def make_body(points, ambient_dim=None, recenter=False, require_facets=False):
    """Convex hull of ``points`` as a :class:`ConvexBody`.

    With ``recenter`` the hull is translated by the centroid of its vertices;
    otherwise the origin must already lie in the relative interior.
    """
    P = np.asarray(points, dtype=float)
    if P.size == 0:
        raise EmptyInput("no points given")
    if P.ndim == 1:
        P = P.reshape(1, -1) if ambient_dim is None else P.reshape(-1, ambient_dim)
    n = P.shape[1] if ambient_dim is None else int(ambient_dim)
    if P.shape[1] != n:
        raise DimMismatch(f"points have dimension {P.shape[1]}, expected {n}")

    scale = float(np.abs(P).max())
    tol = RANK_TOL * max(scale, 1e-300)
    D = P - P[0]
    if scale == 0.0 or np.abs(D).max() <= tol:
        d, basis = 0, np.zeros((0, n))
    else:
        _, s, Vt = np.linalg.svd(D, full_matrices=False)
        d = int(np.sum(s > tol))
        basis = Vt[:d]
    if require_facets and d > MAX_FACET_DIM:
        raise DimTooLarge(f"facet enumeration needs intrinsic dim <= {MAX_FACET_DIM}, got {d}")

    # affine hull must pass through 0 unless we translate
    base = P[0] - (P[0] @ basis.T) @ basis
    if not recenter and np.linalg.norm(base) > tol * math.sqrt(n):
        raise OriginNotInteriorError("origin is not in the affine hull of the points")

    Y = (P - base) @ basis.T
    if d == 0:
        idx = np.array([0])
    elif d == 1:
        idx = np.unique([int(np.argmin(Y[:, 0])), int(np.argmax(Y[:, 0]))])
    else:
        hull = ConvexHull(Y)
        idx = hull.vertices if d == 2 else np.sort(hull.vertices)

    V = P[idx] - base
    if recenter:
        V = V - V.mean(axis=0)
    elif d == 0 and np.abs(V).max() > tol:
        raise OriginNotInteriorError("a single point body must be the origin")
    Yv = V @ basis.T

    normals = offsets = None
    if d == 1:
        normals = np.array([[1.0], [-1.0]])
        offsets = np.array([Yv[:, 0].max(), -Yv[:, 0].min()])
    elif d >= 2:
        hull = ConvexHull(Yv)
        normals, offsets = _unique_facets(hull.equations, max(scale, 1e-300))
    if d >= 1 and offsets.min() <= tol:
        raise OriginNotInteriorError("origin is not in the relative interior of the hull")
    if d > MAX_FACET_DIM:
        normals = offsets = None

    return ConvexBody(
        vertices=_frozen(V),
        ambient_dim=n,
        intrinsic_dim=d,
        span_basis=_frozen(basis),
        facet_normals=None if normals is None else _frozen(normals),
        facet_offsets=None if offsets is None else _frozen(offsets),
    )


def ball_polytope(dim, radius=1.0, count=256):
    """Inscribed polytope approximating the ball B(0, radius) in R^dim.

    A regular ``count``-gon in the plane, the Fibonacci lattice on the sphere
    in 3D, Sobol directions above that.
    """
    if dim == 1:
        pts = np.array([[-1.0], [1.0]])
    elif dim == 2:
        pts = quad.circle_directions(count)
    elif dim == 3:
        pts = quad.fibonacci_sphere(count)
    else:
        pts = quad.sphere_directions(dim, count)
    return make_body(radius * pts)


def box(half_widths):
    """Centred axis-parallel box with the given half widths (zeros allowed)."""
    h = np.asarray(half_widths, dtype=float)
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * h.size, indexing="ij")).reshape(h.size, -1).T
    return make_body(np.unique(corners * h, axis=0), ambient_dim=h.size)


def _as_rows(y, n):
    y = np.asarray(y, dtype=float)
    return y.reshape(-1, n), y.ndim == 1


def support(C, y):
    """Support function h_C(y) = max over vertices of v . y (vectorised over rows)."""
    Y, single = _as_rows(y, C.ambient_dim)
    h = (Y @ C.vertices.T).max(axis=1)
    return float(h[0]) if single else h


def _span_split(C, X):
    """Span coordinates of rows of X and a mask of rows that leave the span."""
    Z = X @ C.span_basis.T
    resid = np.linalg.norm(X - Z @ C.span_basis, axis=1)
    off = resid > SPAN_TOL * np.linalg.norm(X, axis=1)
    return Z, off


def _lp_radial(C, z):
    """max{s : s z in C} for z in span coordinates, by the simplex method."""
    Yv = C.span_vertices
    sv = np.abs(Yv).max()
    zn = np.linalg.norm(z)
    m, d = Yv.shape
    A = np.zeros((d + 1, m + 1))
    A[:d, :m] = Yv.T / sv
    A[:d, m] = -z / zn
    A[d, :m] = 1.0
    b = np.zeros(d + 1)
    b[d] = 1.0
    c = np.zeros(m + 1)
    c[m] = 1.0
    try:
        _, s = simplex_max(c, A, b)
    except (LPInfeasible, LPUnbounded):  # pragma: no cover - 0 in relint
        raise RuntimeError("radial LP failed on a valid body")
    return s * sv / zn


def _span_gauge(C, Z):
    """Gauge of span-coordinate rows Z (all assumed nonzero)."""
    if C.has_facets:
        return np.maximum((Z @ C.facet_normals.T / C.facet_offsets).max(axis=1), 0.0)
    return np.array([1.0 / _lp_radial(C, z) for z in Z])


def gauge(C, v):
    """Minkowski functional inf{t > 0 : v in tC}; +inf off the span."""
    X, single = _as_rows(v, C.ambient_dim)
    out = np.zeros(len(X))
    nz = np.linalg.norm(X, axis=1) > 0
    if C.intrinsic_dim == 0:
        out[nz] = np.inf
    elif nz.any():
        Z, off = _span_split(C, X[nz])
        g = np.full(len(Z), np.inf)
        if (~off).any():
            g[~off] = _span_gauge(C, Z[~off])
        out[nz] = g
    return float(out[0]) if single else out


def radial(C, x):
    """Radial function max{t >= 0 : t x in C}; 0 when x leaves the span."""
    X, single = _as_rows(x, C.ambient_dim)
    if (np.linalg.norm(X, axis=1) == 0).any():
        raise ZeroDirection("radial function of the zero vector")
    out = np.zeros(len(X))
    if C.intrinsic_dim > 0:
        Z, off = _span_split(C, X)
        if (~off).any():
            if C.has_facets:
                out[~off] = 1.0 / _span_gauge(C, Z[~off])
            else:
                out[~off] = [_lp_radial(C, z) for z in Z[~off]]
    return float(out[0]) if single else out


def minkowski_sum(C, K):
    if C.ambient_dim != K.ambient_dim:
        raise DimMismatch("bodies live in different ambient dimensions")
    sums = (C.vertices[:, None, :] + K.vertices[None, :, :]).reshape(-1, C.ambient_dim)
    return make_body(sums, ambient_dim=C.ambient_dim)


def scale(C, a):
    """The body aC; a negative factor reflects through the origin."""
    if a == 0:
        raise ZeroScale("scale factor must be nonzero")
    return make_body(a * C.vertices, ambient_dim=C.ambient_dim)


def project_body(C, L):
    """Orthogonal projection P_L(C), in ambient coordinates."""
    if L.ambient_dim != C.ambient_dim:
        raise DimMismatch("subspace and body live in different ambient dimensions")
    return make_body(L.project(C.vertices), ambient_dim=C.ambient_dim)


def _polygon_area(Y):
    x, y = Y[:, 0], Y[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _polyhedron_volume(Y):
    hull = ConvexHull(Y)
    # fan of tetrahedra from the interior origin; qhull does not orient them
    return np.abs(np.linalg.det(Y[hull.simplices])).sum() / 6.0


def body_volume(C, method="exact", count=200_000):
    """H^d measure of C in its own span (d = intrinsic dimension).

    ``method="exact"`` handles d <= 3; ``method="quadrature"`` integrates
    rho^d / d over the unit sphere of the span and works in any dimension.
    A single point has measure 1 (counting measure).
    """
    d = C.intrinsic_dim
    if d == 0:
        return 1.0
    if method == "quadrature":
        U = quad.sphere_directions(d, 2 if d == 1 else count)
        if C.has_facets or d == 1:
            rho = radial(C, U @ C.span_basis)
        else:
            # one hull instead of one LP per direction
            eq = ConvexHull(C.span_vertices).equations
            rho = 1.0 / (U @ eq[:, :-1].T / -eq[:, -1]).max(axis=1)
        return float(quad.sphere_area(d) * np.mean(rho ** d) / d)
    if d > 3:
        raise DimTooLarge(f"exact volume needs intrinsic dim <= 3, got {d}")
    Y = C.span_vertices
    if d == 1:
        return float(Y[:, 0].max() - Y[:, 0].min())
    if d == 2:
        return float(_polygon_area(Y))
    return float(_polyhedron_volume(Y))


def lebesgue_volume(C):
    """lambda^n of C: zero unless C is full dimensional."""
    return body_volume(C) if C.is_full_dim else 0.0


def _candidate_normals_2d(B):
    if B.intrinsic_dim == 2:
        return B.facet_normals @ B.span_basis
    if B.intrinsic_dim == 1:
        t = B.span_basis[0]
        p = np.array([-t[1], t[0]])
        return np.array([p, -p])
    return np.zeros((0, 2))


def hausdorff_distance(C, K, count=40_000, return_bound=False):
    """Hausdorff distance sup_u |h_C(u) - h_K(u)| over unit u.

    Exact in R^1 and R^2. In R^2 the difference of support functions is
    linear in u on each arc between consecutive edge normals, so its
    maximum modulus sits at an edge normal or at u = +-(v - w)/|v - w|.
    In R^3 and above the sphere is sampled and ``return_bound`` also
    returns the additive error bound (diam C + diam K) * theta.
    """
    if C.ambient_dim != K.ambient_dim:
        raise DimMismatch("bodies live in different ambient dimensions")
    n = C.ambient_dim
    if n == 1:
        U = np.array([[1.0], [-1.0]])
        bound = 0.0
    elif n == 2:
        diff = (C.vertices[:, None, :] - K.vertices[None, :, :]).reshape(-1, 2)
        nrm = np.linalg.norm(diff, axis=1)
        diff = diff[nrm > 0] / nrm[nrm > 0, None]
        U = np.vstack([diff, -diff, _candidate_normals_2d(C), _candidate_normals_2d(K),
                       np.eye(2)])
        bound = 0.0
    else:
        U = quad.sphere_directions(n, count)
        theta = quad.fibonacci_gap(count) if n == 3 else math.pi / 2
        bound = (C.diameter + K.diameter) * theta
    value = float(np.abs(support(C, U) - support(K, U)).max())
    return (value, bound) if return_bound else value


def unit_ball_volume(d):
    """omega_d, the volume of the unit ball in R^d."""
    if d < 0:
        raise NegativeDim("dimension must be nonnegative")
    w = [1.0, 2.0]
    for j in range(2, d + 1):
        w.append(w[j - 2] * 2.0 * math.pi / j)
    return w[d]


def mixed_volumes(K, C):
    """[V_n(K[i], C[n-i]) for i = 0..n] by interpolating lambda^n(K + rC).

    The volume of K + rC is a polynomial of degree n in r; it is evaluated
    exactly at r = 1, ..., n+1 and the coefficients recovered from the
    Vandermonde system.
    """
    n = K.ambient_dim
    if C.ambient_dim != n:
        raise DimMismatch("bodies live in different ambient dimensions")
    if n > 3:
        raise DimTooLarge("mixed volumes need ambient dim <= 3")
    r = np.arange(1, n + 2, dtype=float)
    vols = np.array([lebesgue_volume(minkowski_sum(K, scale(C, ri))) for ri in r])
    coef = np.linalg.solve(np.vander(r, n + 1, increasing=True), vols)
    # coef[j] multiplies r^j and equals binom(n, n-j) V(K[n-j], C[j])
    return [float(coef[n - i] / math.comb(n, i)) for i in range(n + 1)]
