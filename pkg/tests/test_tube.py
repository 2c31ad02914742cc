import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.spatial import cKDTree

from amink import (CircleArc, RectifiableSet, Segment, aniso_distance, ball_polytope, box,
                   e1_family, gauge, make_body, normalized_content, sample_cloud, scale,
                   tube_volume)
from amink.errors import BadResolution, EmptyCloud, NonpositiveRadius
from amink.rectifiable import AffinePatch, PointCloud
from conftest import random_polygon

H = 1 / 512


def cloud_of(S, eps=1e-4):
    return sample_cloud(S, eps)


def voxel_centers(bbox, h):
    lo, hi = (np.asarray(b, float) for b in bbox)
    shape = np.maximum(1, np.ceil((hi - lo) / h)).astype(int)
    axes = [lo[i] + (np.arange(shape[i]) + 0.5) * h for i in range(len(lo))]
    return np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)


@pytest.fixture(scope="module")
def segment_cloud():
    return cloud_of(RectifiableSet([Segment([0.0, 0.0], [1.0, 0.0])]))


class TestAnisoDistance:
    def test_examples(self, segment_cloud):
        z = [0.0, 0.3]
        assert_allclose(aniso_distance(z, segment_cloud, ball_polytope(2, 1.0, 256)), 0.3,
                        rtol=1e-4)
        assert_allclose(aniso_distance(z, segment_cloud, box([1, 1])), 0.3)
        assert aniso_distance(z, segment_cloud, make_body([[-1, 0], [1, 0]])) == math.inf

    def test_matches_brute_force(self, rng):
        S = RectifiableSet([CircleArc(radius=0.7)])
        cloud = sample_cloud(S, 0.01)
        for _ in range(10):
            C = scale(random_polygon(rng), 0.3)
            for z in rng.uniform(-1.2, 1.2, size=(20, 2)):
                ref = gauge(C, z - cloud.points).min()
                assert_allclose(aniso_distance(z, cloud, C), ref, rtol=1e-12)

    def test_lower_dimensional_body(self, segment_cloud):
        C = make_body([[-1, 0], [1, 0]])
        assert_allclose(aniso_distance([1.5, 0.0], segment_cloud, C), 0.5)

    def test_empty_cloud(self):
        empty = PointCloud(np.zeros((0, 2)), np.zeros(0), 0.1)
        with pytest.raises(EmptyCloud):
            aniso_distance([0, 0], empty, box([1, 1]))


class TestTubeVolume:
    def test_stadium(self, segment_cloud):
        est = tube_volume(segment_cloud, ball_polytope(2, 1.0, 256), 0.1, h=H)
        assert_allclose(est.volume, 0.2 + math.pi * 0.01, rtol=0.02)
        assert est.stderr == 0.0 and est.method == "grid" and est.resolution == H

    def test_box_tube(self, segment_cloud):
        est = tube_volume(segment_cloud, box([1, 1]), 0.1, h=H)
        assert_allclose(est.volume, 1.2 * 0.2, rtol=0.02)

    def test_e1_with_flat_body_is_zero(self):
        cloud = sample_cloud(e1_family(16), 1e-3)
        C = make_body([[-0.5, 0], [0.5, 0]])
        for r in (0.5, 0.1, 0.01):
            assert tube_volume(cloud, C, r, h=H).volume == 0.0
            assert tube_volume(cloud, C, r, method="mc", N=100, seed=1).volume == 0.0

    def test_grid_volume_is_a_voxel_multiple(self, segment_cloud):
        for h in (1 / 97, 1 / 256):
            v = tube_volume(segment_cloud, ball_polytope(2, 1.0, 64), 0.13, h=h).volume
            count = v / h ** 2
            assert_allclose(count, round(count), atol=1e-6)

    def test_grid_counts_voxel_centers(self, rng):
        C = scale(random_polygon(rng), 0.2)
        r, h = 0.5, 1 / 64
        cloud = sample_cloud(RectifiableSet([CircleArc(radius=0.5)]), 0.004)
        bbox = ([-1.5, -1.5], [1.5, 1.5])
        Z = voxel_centers(bbox, h)
        g = np.array([gauge(C, z - cloud.points).min() for z in Z])
        est = tube_volume(cloud, C, r, h=h, bbox=bbox)
        assert_allclose(est.volume, (g <= r).sum() * h ** 2, rtol=1e-12)

    def test_full_dimensional_set(self):
        # k = n: the normalised tube is the area of the grown square
        S = RectifiableSet([AffinePatch([0, 0], [[1, 0], [0, 1]])])
        cloud = sample_cloud(S, 0.01)
        r = 0.05
        laws = ((box([1, 1]), (1 + 2 * r) ** 2),
                (ball_polytope(2, 1.0, 256), 1 + 4 * r + math.pi * r * r))
        with pytest.warns(UserWarning):
            for C, law in laws:
                assert_allclose(normalized_content(cloud, C, 2, r, h=1 / 256), law, rtol=0.02)

    def test_normalized_examples(self, segment_cloud):
        disk = ball_polytope(2, 1.0, 256)
        assert_allclose(normalized_content(segment_cloud, disk, 1, 0.05, h=H),
                        1 + math.pi * 0.05 / 2, rtol=0.02)
        assert_allclose(normalized_content(segment_cloud, box([1, 1]), 1, 0.05, h=H), 1.1,
                        rtol=0.02)

    def test_errors(self, segment_cloud):
        C = box([1, 1])
        with pytest.raises(NonpositiveRadius):
            tube_volume(segment_cloud, C, 0.0, h=H)
        with pytest.raises(BadResolution):
            tube_volume(segment_cloud, C, 0.1)
        with pytest.raises(BadResolution):
            tube_volume(segment_cloud, C, 0.1, method="mc", N=100)
        with pytest.raises(BadResolution):
            tube_volume(segment_cloud, C, 0.1, method="mc", N=0, seed=1)
        with pytest.raises(BadResolution):
            tube_volume(segment_cloud, C, 0.1, method="sobol", h=H)

    def test_coarse_cloud_warns(self):
        cloud = sample_cloud(RectifiableSet([Segment([0, 0], [1, 0])]), 0.05)
        with pytest.warns(UserWarning):
            tube_volume(cloud, box([1, 1]), 0.1, h=1 / 64)


class TestProperties:
    def test_monotone_in_r(self, segment_cloud):
        C = ball_polytope(2, 1.0, 32)
        h = 1 / 256
        vols = [tube_volume(segment_cloud, C, r, h=h).volume for r in (0.02, 0.05, 0.1, 0.2)]
        # boundary voxels of the larger tube bound the discretisation error
        for (r1, v1), (r2, v2) in zip(zip((0.02, 0.05, 0.1), vols), zip((0.05, 0.1, 0.2), vols[1:])):
            boundary = 2 * (1 + 2 * r2) / h + 2 * (2 * r2) / h
            assert v1 <= v2 + 2 * h ** 2 * boundary

    def test_monotone_in_body(self, rng):
        cloud = sample_cloud(RectifiableSet([CircleArc(radius=0.6)]), 0.002)
        bbox = ([-1.2, -1.2], [1.2, 1.2])
        for _ in range(5):
            C = scale(random_polygon(rng), 0.25)
            Cbig = make_body(np.vstack([C.vertices, 0.3 * rng.normal(size=(3, 2))]))
            assert (gauge(Cbig, C.vertices) <= 1 + 1e-12).all()
            small = tube_volume(cloud, C, 0.5, h=1 / 256, bbox=bbox).volume
            big = tube_volume(cloud, Cbig, 0.5, h=1 / 256, bbox=bbox).volume
            assert small <= big

    def test_sandwich_by_euclidean_tubes(self, rng):
        cloud = sample_cloud(RectifiableSet([CircleArc(radius=0.6)]), 0.002)
        bbox = ([-1.2, -1.2], [1.2, 1.2])
        h, r = 1 / 200, 0.4
        Z = voxel_centers(bbox, h)
        d, _ = cKDTree(cloud.points).query(Z)
        for _ in range(5):
            C = scale(random_polygon(rng), 0.3)
            alpha, beta = C.inradius, C.circumradius
            inner = (d <= alpha * r).sum() * h ** 2
            outer = (d <= beta * r).sum() * h ** 2
            v = tube_volume(cloud, C, r, h=h, bbox=bbox).volume
            assert inner <= v <= outer

    def test_mc_is_independent_of_threads(self, segment_cloud):
        C = ball_polytope(2, 1.0, 64)
        runs = [tube_volume(segment_cloud, C, 0.1, method="mc", N=300_001, seed=7, threads=t)
                for t in (1, 2, 4)]
        assert runs[0].volume == runs[1].volume == runs[2].volume
        assert runs[0].stderr == runs[2].stderr
        other = tube_volume(segment_cloud, C, 0.1, method="mc", N=300_001, seed=8)
        assert other.volume != runs[0].volume

    def test_grid_threads_agree(self, segment_cloud):
        C = ball_polytope(2, 1.0, 64)
        a = tube_volume(segment_cloud, C, 0.1, h=H, threads=1).volume
        b = tube_volume(segment_cloud, C, 0.1, h=H, threads=3).volume
        assert a == b

    def test_grid_and_mc_agree_on_random_scenes(self):
        rng = np.random.default_rng(2024)
        for trial in range(20):
            n = 2 if trial < 14 else 3
            if n == 2:
                a, b = rng.uniform(-1, 1, size=(2, 2))
                S = RectifiableSet([Segment(a, b), CircleArc(rng.uniform(-1, 1, 2),
                                                             rng.uniform(0.2, 0.8))])
            else:
                a, b = rng.uniform(-1, 1, size=(2, 3))
                S = RectifiableSet([Segment(a, b)])
            C = scale(random_polygon(rng, dim=n, count=8), rng.uniform(0.5, 1.0))
            r = rng.uniform(0.1, 0.3)
            cloud = sample_cloud(S, r / 100)
            h = 1 / 256 if n == 2 else 1 / 96
            grid = tube_volume(cloud, C, r, h=h)
            mc = tube_volume(cloud, C, r, method="mc", N=40_000, seed=trial)
            assert abs(grid.volume - mc.volume) <= 3 * math.hypot(grid.stderr, mc.stderr)
