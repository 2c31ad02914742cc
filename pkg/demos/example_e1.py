"""A countable union of horizontal segments and a flat or fattened C.

The set S is the union of the segments [-1/j, 1/j] x {1/j} and the origin.
With the flat body C = [-1/2, 1/2] x {0} every tube S + rC is a union of
segments, so its area and the normalised content are 0 at every radius.
Thickening C to a box of height 2 eps makes the content at least the sum
of 2/j times eps, which grows without bound with the number of segments.
"""

import warnings

from amink import (box, content_estimate, e1_family, make_body, normalized_content,
                   sample_cloud)

flat = make_body([[-0.5, 0.0], [0.5, 0.0]])
cloud = sample_cloud(e1_family(64), 1 / 1024)
for r in (0.1, 0.01, 0.001):
    print(f"flat C, r = {r}: normalised content {normalized_content(cloud, flat, 1, r, h=1 / 256)}")

eps = 0.1
fat = box([0.5, eps])
for M in (64, 512, 4096):
    partial = sum(2.0 / j for j in range(1, M + 1)) * eps
    with warnings.catch_warnings():
        # the pieces are straight, so a coarse cloud already has the exact tube
        warnings.simplefilter("ignore")
        est = content_estimate(e1_family(M), fat, schedule=[0.02 * 2.0 ** -j for j in range(6)],
                               h_rel=0.01, cloud_ratio=1.0)
    print(f"M = {M:5d}: partial sum {partial:.4f}, values {est.values.round(4)}, "
          f"extrapolated {est.extrapolated:.4f}")
