import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import dblquad
from scipy.spatial import cKDTree

from amink import (CircleArc, GraphSurface, ParametricCurve, RectifiableSet, Segment,
                   SpherePatch, Triangle, e1_family, eval_patch, hausdorff_measure, helix,
                   jacobian_k, normal_space, sample_cloud, tangent_space)
from amink import _quadrature as quad
from amink.errors import DimMismatch, EmptyInput, OutOfDomain, RankDeficient
from amink.rectifiable import AffinePatch, Point, polyline

saddle = GraphSurface({(2, 0): 1.0, (0, 2): -1.0}, [[-2, 2], [-2, 2]])
paraboloid = GraphSurface({(2, 0): 1.0, (0, 2): 1.0}, [[-1, 1], [-1, 1]])


def span_equal(sub, rows):
    """Same subspace: projections onto both agree."""
    B = np.atleast_2d(np.asarray(rows, dtype=float))
    B = np.linalg.qr(B.T)[0].T
    return np.allclose(sub.basis.T @ sub.basis, B.T @ B, atol=1e-10)


class TestEvaluation:
    def test_examples(self):
        x, J = eval_patch(Segment([-1, 0], [1, 0]), 0.5)
        assert_allclose(x, [0, 0])
        assert_allclose(J[:, 0], [2, 0])
        t = 0.7
        x, J = eval_patch(CircleArc(), t)
        assert_allclose(x, [math.cos(t), math.sin(t)])
        assert_allclose(J[:, 0], [-math.sin(t), math.cos(t)])
        x, J = eval_patch(saddle, [1, 1])
        assert_allclose(x, [1, 1, 0])
        assert_allclose(J.T, [[1, 0, 2], [0, 1, -2]])

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            eval_patch(Segment([0, 0], [1, 0]), 1.5)
        with pytest.raises(OutOfDomain):
            eval_patch(saddle, [0.0])

    def test_finite_differences_match_analytic_derivative(self):
        h = helix(1.0, 2.0, 1.5)
        fd = ParametricCurve(h.f, (0.0, 3 * math.pi), 3)
        T = np.linspace(0, 3 * math.pi, 50)[:, None]
        assert_allclose(fd.evaluate(T)[1], h.evaluate(T)[1], atol=1e-9)

    def test_sphere_and_triangle_points(self):
        x, _ = eval_patch(SpherePatch(radius=2.0), [math.pi / 2, 0.0])
        assert_allclose(x, [2, 0, 0], atol=1e-15)
        tri = Triangle([0, 0], [1, 0], [0, 1])
        assert_allclose(eval_patch(tri, [1, 1])[0], [0, 1])
        assert_allclose(eval_patch(tri, [0, 0.3])[0], [0, 0])


class TestFrames:
    def test_tangent_examples(self):
        assert span_equal(tangent_space(Segment([0, 0], [1, 0]), 0.5), [[1, 0]])
        assert span_equal(tangent_space(CircleArc(), math.pi / 2), [[-1, 0]])
        assert span_equal(tangent_space(paraboloid, [0, 0]), [[1, 0, 0], [0, 1, 0]])

    def test_normal_examples(self):
        assert span_equal(normal_space(Segment([0, 0], [1, 0]), 0.2), [[0, 1]])
        t = 1.1
        assert span_equal(normal_space(CircleArc(), t), [[math.cos(t), math.sin(t)]])
        flat = AffinePatch([0, 0, 0], [[1, 0, 0], [0, 1, 0]])
        assert span_equal(normal_space(flat, [0.5, 0.5]), [[0, 0, 1]])

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            tangent_space(SpherePatch(), [0.0, 1.0])  # the pole
        with pytest.raises(RankDeficient):
            normal_space(Segment([1, 1], [1, 1]), 0.5)
        with pytest.raises(RankDeficient):
            jacobian_k(Triangle([0, 0], [1, 0], [0, 1]), [0.0, 0.5])

    @given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
    def test_tangent_and_normal_split_space(self, p, t):
        for patch, u in ((SpherePatch(), [p, t]), (saddle, [p - 1.5, t - 1.5]),
                         (helix(), [t])):
            T, N = tangent_space(patch, u), normal_space(patch, u)
            assert T.dim + N.dim == patch.ambient_dim
            assert np.abs(T.basis @ N.basis.T).max() <= 1e-10
            Q = np.vstack([T.basis, N.basis])
            assert_allclose(Q @ Q.T, np.eye(patch.ambient_dim), atol=1e-12)


class TestJacobian:
    def test_examples(self):
        assert_allclose(jacobian_k(Segment([0, 0], [1, 1]), 0.3), math.sqrt(2))
        assert_allclose(jacobian_k(CircleArc(), 2.0), 1.0)
        plane = GraphSurface({(1, 0): 2.0, (0, 1): 2.0}, [[0, 1], [0, 1]])
        assert_allclose(jacobian_k(plane, [0.3, 0.8]), 3.0)

    @given(st.floats(0.05, 3.0), st.floats(0.05, 3.0))
    def test_matches_product_of_singular_values(self, p, t):
        for patch, u in ((SpherePatch(radius=1.7), [p, t]), (saddle, [p - 1.5, t - 1.5]),
                         (Triangle([0, 0, 0], [1, 2, 0], [0, 1, 3]), [p / 3, t / 3])):
            _, J = eval_patch(patch, u)
            assert_allclose(jacobian_k(patch, u), np.prod(np.linalg.svd(J, compute_uv=False)),
                            rtol=1e-10)


class TestHausdorffMeasure:
    def test_examples(self):
        assert_allclose(hausdorff_measure(RectifiableSet([Segment([0, 0], [1, 0])])), 1.0)
        assert_allclose(hausdorff_measure(RectifiableSet([CircleArc()]), 32), 2 * math.pi,
                        atol=1e-10)
        assert_allclose(hausdorff_measure(RectifiableSet([SpherePatch()]), 32), 4 * math.pi,
                        atol=1e-6)

    def test_triangle_and_polyline(self):
        tri = RectifiableSet([Triangle([0, 0, 0], [2, 0, 0], [0, 3, 0])])
        assert_allclose(hausdorff_measure(tri), 3.0)
        path = RectifiableSet(polyline([[0, 0], [3, 4], [3, 0]]))
        assert_allclose(hausdorff_measure(path), 9.0)

    def test_helix_length(self):
        S = RectifiableSet([helix(1.0, 2.0, 1.0)])
        assert_allclose(hausdorff_measure(S), 2 * math.pi * math.sqrt(1 + (1 / math.pi) ** 2))

    def test_additive_over_patches(self):
        a = RectifiableSet([CircleArc(theta=(0, 1.0))])
        b = RectifiableSet([CircleArc(theta=(1.0, 2 * math.pi))])
        assert_allclose(hausdorff_measure(a + b), hausdorff_measure(a) + hausdorff_measure(b),
                        rtol=1e-14)
        assert_allclose(hausdorff_measure(a + b), 2 * math.pi, atol=1e-9)

    @given(st.floats(-10.0, 10.0))
    def test_circle_reparametrization(self, offset):
        S = RectifiableSet([CircleArc(theta=(offset, offset + 2 * math.pi))])
        assert_allclose(hausdorff_measure(S, 32), 2 * math.pi, atol=1e-9)

    def test_graph_area_against_closed_form(self):
        tilted = GraphSurface({(1, 0): 1.0}, [[0, 1], [0, 1]])
        assert_allclose(hausdorff_measure(RectifiableSet([tilted])), math.sqrt(2))
        ref, _ = dblquad(lambda y, x: math.sqrt(1 + 4 * x * x + 4 * y * y), -1, 1, -1, 1,
                         epsabs=1e-12)
        assert_allclose(hausdorff_measure(RectifiableSet([paraboloid]), 32), ref, rtol=1e-9)

    def test_coarea_for_vertical_projection(self):
        # integral over the circle of the projection Jacobian |sin t| ...
        arc = CircleArc()
        f = lambda U: np.abs(arc.evaluate(U)[1][:, 0, 0])
        lhs = quad.integrate_box(f, np.array([0.0]), np.array([2 * math.pi]), 32)
        # ... equals the integral over x of the number of points over x
        t = np.linspace(0, 2 * math.pi, 20001)
        xs = (np.arange(4000) + 0.5) / 2000 - 1.0
        crossings = np.diff(np.sign(np.cos(t)[None, :] - xs[:, None]), axis=1) != 0
        rhs = crossings.sum() / 2000
        assert_allclose(lhs, 4.0, atol=1e-6)
        assert_allclose(rhs, lhs, atol=1e-6)

    def test_set_validation(self):
        with pytest.raises(EmptyInput):
            RectifiableSet([])
        with pytest.raises(DimMismatch):
            RectifiableSet([Segment([0, 0], [1, 0]), saddle])


class TestCloud:
    def test_segment_example(self):
        c = sample_cloud(RectifiableSet([Segment([0, 0], [1, 0])]), 0.01)
        assert len(c) >= 67
        assert_allclose(c.weights.sum(), 1.0, atol=1e-6)
        assert c.density_eps == 0.01

    def test_circle_example(self):
        c = sample_cloud(RectifiableSet([CircleArc()]), 0.01)
        assert_allclose(c.weights.sum(), 2 * math.pi, atol=1e-3)

    def test_degenerate_point(self):
        c = sample_cloud(RectifiableSet([Segment([0.5, 0.5], [0.5, 0.5])]), 0.01)
        assert len(c) == 1
        assert c.weights[0] == 0.0
        p = sample_cloud(RectifiableSet([Point([1.0, 2.0])]), 0.01)
        assert_allclose(p.points, [[1.0, 2.0]])

    @given(st.floats(0.005, 0.2))
    def test_covering_radius(self, eps):
        rng = np.random.default_rng(0)
        for patch in (CircleArc(radius=1.3), saddle, SpherePatch(), helix(0.5, 1.0, 2.0)):
            S = RectifiableSet([patch])
            if patch.param_dim == 2 and eps < 0.05:
                continue  # keep the surface clouds small
            c = sample_cloud(S, eps)
            lo, hi = patch.domain[:, 0], patch.domain[:, 1]
            probe, _ = patch.evaluate(lo + (hi - lo) * rng.random((2000, patch.param_dim)))
            d, _ = cKDTree(c.points).query(probe)
            assert d.max() <= eps

    def test_weights_approximate_area(self):
        c = sample_cloud(RectifiableSet([SpherePatch()]), 0.05)
        assert_allclose(c.weights.sum(), 4 * math.pi, rtol=1e-3)

    def test_patch_weights_and_index(self):
        S = RectifiableSet([Segment([0, 0], [1, 0]), Segment([0, 1], [1, 1])])
        c = sample_cloud(S, 0.05, patch_weights=[1.0, 0.0])
        assert_allclose(c.weights[c.patch_index == 1], 0.0)
        assert_allclose(c.weights.sum(), 1.0, atol=1e-12)

    def test_e1_family(self):
        S = e1_family(8)
        assert len(S.patches) == 9
        assert_allclose(hausdorff_measure(S), sum(2 / j for j in range(1, 9)))
        x, _ = eval_patch(S.patches[2], 0.0)
        assert_allclose(x, [-1 / 3, 1 / 3])
