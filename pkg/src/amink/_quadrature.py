"""Quadrature rules: tensor Gauss-Legendre on boxes, sphere lattices."""

import itertools
import math
import warnings
from functools import lru_cache

import numpy as np

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


@lru_cache(maxsize=64)
def _leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_box(lo, hi, order):
    """Tensor Gauss-Legendre nodes and weights on the box ``[lo, hi]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.size == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, w = _leggauss(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    axes = [mid[i] + half[i] * x for i in range(lo.size)]
    wts = [half[i] * w for i in range(lo.size)]
    nodes = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    weights = np.ones(nodes.shape[0])
    for g in np.meshgrid(*wts, indexing="ij"):
        weights *= g.ravel()
    return nodes, weights


def integrate_box(f, lo, hi, order, tol=1e-11, max_depth=30, max_boxes=4096):
    """Adaptive composite Gauss-Legendre integral of ``f`` over a box.

    ``f`` maps an ``(m, k)`` array of nodes to ``m`` values. A box is split
    into ``2**k`` children until the children's sum agrees with the parent
    estimate to within the box's share of ``tol``. Integrands with kinks
    (support functions of polytopes) need this; smooth ones stop at once.
    Refinement also stops once more than ``max_boxes`` boxes are pending;
    kinks along curves in 2D parameter domains would otherwise make the
    box count grow geometrically.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    k = lo.size
    total_vol = float(np.prod(hi - lo))
    if total_vol == 0.0:
        return 0.0
    ref_nodes, ref_w = gauss_box(np.zeros(k), np.ones(k), order)
    corners = np.array(list(itertools.product((0.0, 0.5), repeat=k)))

    def estimate(los, his):
        size = his - los
        nodes = los[:, None, :] + ref_nodes[None, :, :] * size[:, None, :]
        vals = np.asarray(f(nodes.reshape(-1, k)), dtype=float).reshape(len(los), -1)
        return (vals @ ref_w) * np.prod(size, axis=1)

    los, his = lo[None, :], hi[None, :]
    parent = estimate(los, his)
    result = 0.0
    for depth in range(max_depth + 1):
        size = his - los
        clo = (los[:, None, :] + corners[None, :, :] * size[:, None, :]).reshape(-1, k)
        chi = clo + np.repeat(size, len(corners), axis=0) / 2.0
        child = estimate(clo, chi)
        child_sum = child.reshape(len(los), -1).sum(axis=1)
        share = tol * np.prod(size, axis=1) / total_vol
        done = np.abs(child_sum - parent) <= share
        if depth == max_depth or (~done).sum() * len(corners) > max_boxes:
            done[:] = True
        result += child_sum[done].sum()
        if done.all():
            break
        todo = np.repeat(~done, len(corners))
        los, his, parent = clo[todo], chi[todo], child[todo]
    return float(result)


def fibonacci_sphere(count):
    """``count`` nearly uniform unit vectors on the 2-sphere (equal weights)."""
    i = np.arange(count)
    z = 1.0 - (2.0 * i + 1.0) / count
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = GOLDEN_ANGLE * i
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def fibonacci_gap(count):
    """Upper bound on the covering angle of ``fibonacci_sphere(count)``.

    Measured numerically for the lattice: the widest holes sit at the poles
    and give a constant of about 2.72 for every count; 3.0 adds a margin.
    """
    return 3.0 / math.sqrt(count)


def circle_directions(count, offset=0.0):
    theta = offset + 2.0 * math.pi * np.arange(count) / count
    return np.column_stack([np.cos(theta), np.sin(theta)])


def sphere_directions(dim, count, seed=0):
    """Unit vectors on S^{dim-1} with equal weights.

    Exact small rules for dim 1, an equispaced circle for dim 2, the Fibonacci
    lattice for dim 3, and scrambled Sobol points pushed through the normal
    inverse CDF above that.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        return circle_directions(count)
    if dim == 3:
        return fibonacci_sphere(count)
    from scipy.stats import norm, qmc

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # non power-of-two counts
        pts = qmc.Sobol(d=dim, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_area(dim):
    """H^{dim-1} of the unit sphere in R^dim, i.e. dim * omega_dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)
