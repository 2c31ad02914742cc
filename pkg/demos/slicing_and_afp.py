"""Lower-dimensional bodies: slicing, vanishing contents and density bounds.

When dim C + dim S equals the ambient dimension the content counts how
often S meets translates of span C. When the sum is smaller the tube has
zero volume. The AFP constant measures how much mass small balls carry.
"""

import math

import numpy as np

from amink import (CircleArc, RectifiableSet, Segment, Subspace, afp_gamma, afp_gamma_relative,
                   content_estimate, helix, make_body, slicing_content)

circle = RectifiableSet([CircleArc()])
vertical = make_body([[0.0, -1.0], [0.0, 1.0]])
diagonal = make_body(np.array([[1.0, 1.0], [-1.0, -1.0]]) / math.sqrt(2))
print("circle, vertical segment:", slicing_content(circle, vertical))
print("circle, diagonal segment:", slicing_content(circle, diagonal))

# a helix in space and a segment: the tube is a ruled surface of volume zero
spiral = RectifiableSet([helix(1.0, 1.0, 1.0)])
axis = make_body([[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
est = content_estimate(spiral, axis, schedule=[0.1, 0.05, 0.025, 0.0125], h=0.01, cloud_eps=0.002)
print("helix with a segment:", est.values)

segment = RectifiableSet([Segment([0.0, 0.0], [1.0, 0.0])])
rep = afp_gamma(segment, [0.5, 0.25, 0.1])
print(f"segment: gamma {rep.gamma:.4f} at {rep.argmin_center} with r = {rep.argmin_radius}")
rep = afp_gamma(circle, [0.1, 0.05])
print(f"circle: gamma * pi = {rep.gamma * math.pi:.4f}")
rep = afp_gamma_relative(circle, Subspace.span([[0.0, 1.0]]), [0.1])
print(f"circle relative to the vertical axis: gamma * 2 pi = {rep.gamma * 2 * math.pi:.4f}")
