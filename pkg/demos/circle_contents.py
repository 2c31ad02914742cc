"""Anisotropic contents of the unit circle for three gauge bodies.

For each convex body C the tube S + rC is measured on a voxel grid at a
few radii, normalised by 2r and extrapolated to r = 0. The limit is
compared with the integral of the width of C across the circle.
"""

import math

from amink import (CircleArc, RectifiableSet, ball_polytope, box, content_estimate,
                   phi_codim1, phi_functional)

S = RectifiableSet([CircleArc()])
schedule = [0.1, 0.05, 0.025, 0.0125, 0.00625]

bodies = {
    "square": box([1.0, 1.0]),
    "hexagon": ball_polytope(2, 1.0, 6),
    "256-gon": ball_polytope(2, 1.0, 256),
}

print(f"{'body':>8} {'content':>10} {'phi':>10} {'gap':>9}")
for name, C in bodies.items():
    est = content_estimate(S, C, schedule=schedule, h=1 / 512)
    phi = phi_functional(S, C)
    print(f"{name:>8} {est.extrapolated:10.6f} {phi:10.6f} {abs(est.extrapolated - phi) / phi:9.2e}")

# For a curve in the plane the integrand is the width of C across the normal,
# so the general formula and the support-function form agree.
C = bodies["square"]
print("square: phi_functional", phi_functional(S, C, order=32), "phi_codim1", phi_codim1(S, C))

# With a round C the content is the length of the circle.
print("2 pi =", 2 * math.pi)

# The normalised values along the schedule; the fit is linear in r.
est = content_estimate(S, bodies["square"], schedule=schedule, h=1 / 512)
for r, v in zip(est.schedule, est.values):
    print(f"r = {r:.5f}  M(r) = {v:.6f}")
print("residual", est.residual, "tails", est.lower_tail, est.upper_tail)
