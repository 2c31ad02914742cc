import numpy as np
import pytest
from hypothesis import settings

from amink import RectifiableSet, box, make_body
from amink.rectifiable import CircleArc, Segment

settings.register_profile("amink", max_examples=40, deadline=None)
settings.load_profile("amink")


@pytest.fixture
def square():
    return box([1.0, 1.0])


@pytest.fixture
def unit_segment():
    return RectifiableSet([Segment([0.0, 0.0], [1.0, 0.0])])


@pytest.fixture
def circle():
    return RectifiableSet([CircleArc()])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_polygon(rng, count=None, dim=2):
    """Centred hull of Gaussian points; the origin is the vertex centroid."""
    count = count or int(rng.integers(dim + 1, 10))
    return make_body(rng.normal(size=(count, dim)), recenter=True)
