"""Anisotropic Minkowski contents of rectifiable sets.

The tube volume of ``S + rC`` for a convex body C, normalised by
``omega_{n-k} r^{n-k}``, is estimated on grids or by Monte Carlo and
compared against the integral of ``H^{n-k}(P_{N_x} C)`` over S.
"""

from .content import (AfpReport, ContentEstimate, afp_gamma, afp_gamma_relative,
                      content_estimate, phi_codim1, phi_functional, radial_average_area,
                      slicing_content)
from .convex import (ConvexBody, Subspace, ball_polytope, body_volume, box, gauge,
                     hausdorff_distance, make_body, minkowski_sum, mixed_volumes,
                     project_body, radial, scale, support, unit_ball_volume)
from .errors import AminkError, NumericFailure
from .rectifiable import (CircleArc, GraphSurface, ParametricCurve, PointCloud, RectifiableSet,
                          Segment, SpherePatch, Triangle, e1_family, eval_patch,
                          hausdorff_measure, helix, jacobian_k, normal_space, sample_cloud,
                          tangent_space)
from .scenarios import ScenarioReport, run_scenario, scenario_names
from .tube import TubeVolumeEstimate, aniso_distance, normalized_content, tube_volume

__version__ = "0.1.0"
