"""Named, reproducible experiments with closed-form targets.

``run_scenario(name, overrides)`` returns a :class:`ScenarioReport` whose
claims compare an observed number against an expected one. Defaults are
chosen so every claim holds at its stated tolerance; any keyword can be
overridden (for instance ``{"method": "mc", "N": 200000, "seed": 3}``).
"""

import io
import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import content as ct
from . import convex as cv
from . import rectifiable as rc
from .errors import AminkError, UnknownScenario
from .tube import normalized, tube_volume

CSV_COLUMNS = ("r", "volume", "stderr", "normalized", "method", "resolution", "seed")


@dataclass
class Claim:
    desc: str
    expected: object
    observed: object
    tol: float
    passed: bool

    def as_dict(self):
        return {"desc": self.desc, "expected": _jsonable(self.expected),
                "observed": _jsonable(self.observed), "tol": _jsonable(self.tol),
                "pass": bool(self.passed)}


def close(desc, expected, observed, tol):
    expected, observed = float(expected), float(observed)
    return Claim(desc, expected, observed, float(tol), abs(observed - expected) <= tol)


def holds(desc, condition):
    return Claim(desc, True, bool(condition), 0.0, bool(condition))


@dataclass
class ScenarioReport:
    name: str
    claims: list
    artifacts: list = field(default_factory=list)
    runtime_seconds: float = 0.0
    tables: dict = field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return all(c.passed for c in self.claims)

    def as_dict(self, include_runtime=True):
        d = {"name": self.name, "claims": [c.as_dict() for c in self.claims],
             "artifacts": list(self.artifacts)}
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def to_json(self, include_runtime=True):
        return json.dumps(self.as_dict(include_runtime), indent=2, sort_keys=False)

    def write_tables(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.artifacts = []
        for name, text in self.tables.items():
            path = out / f"{self.name}_{name}.csv"
            path.write_text(text, encoding="utf-8")
            self.artifacts.append(str(path))
        return self.artifacts


def _jsonable(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _fmt(x):
    return "%.17g" % x


def schedule_csv(rows, n, k):
    """CSV text with one row per tube evaluation."""
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for e in rows:
        seed = "" if e.seed is None else str(int(e.seed))
        buf.write(",".join([_fmt(e.r), _fmt(e.volume), _fmt(e.stderr),
                            _fmt(normalized(e.volume, n, k, e.r)), e.method,
                            _fmt(e.resolution), seed]) + "\n")
    return buf.getvalue()


def _schedule(r0, count):
    return r0 * 2.0 ** -np.arange(count)


def _estimator(p):
    """Tube-estimator keywords picked out of the scenario parameters."""
    if p["method"] == "mc":
        return {"method": "mc", "N": p["N"], "seed": p["seed"], "threads": p["threads"]}
    out = {"method": "grid", "threads": p["threads"]}
    if p.get("h_rel") is not None:
        out["h_rel"] = p["h_rel"]
    else:
        out["h"] = p["h"]
    return out


COMMON = {"method": "grid", "h": 1 / 512, "h_rel": None, "N": 200_000, "seed": 0,
          "threads": None}


def _content(S, C, p, k=None):
    return ct.content_estimate(S, C, k=k, schedule=p["schedule"],
                               cloud_ratio=p["cloud_ratio"], **_estimator(p))


# --- scenarios -------------------------------------------------------------

def federer_circle(p):
    S = rc.RectifiableSet([rc.CircleArc()])
    C = cv.ball_polytope(2, 1.0, p["facets"])
    est = _content(S, C, p)
    phi = ct.phi_codim1(S, C)
    target = 2 * math.pi
    claims = [
        close("extrapolated content equals 2 pi (H^1 of the circle)", target,
              est.extrapolated, p["rel_tol"] * target),
        close("hausdorff_measure of the circle", target, rc.hausdorff_measure(S, 32), 1e-10),
        holds(f"content {est.extrapolated:.6f} >= phi - 2% ({phi:.6f})",
              est.extrapolated >= phi * (1 - p["rel_tol"])),
    ]
    return claims, {"schedule": schedule_csv(est.rows, 2, 1)}


federer_circle.defaults = dict(COMMON, schedule=_schedule(0.1, 6), facets=256, cloud_ratio=0.01,
                               rel_tol=0.02)


def convex_k_body(p):
    K = cv.make_body([[0.0, 0.0], [1.0, 0.0]], recenter=True)
    S = rc.RectifiableSet([rc.Segment([0.0, 0.0], [1.0, 0.0])])
    C = cv.box([1.0, 1.0])
    est = _content(S, C, p)
    claims = []
    for r, v in zip(est.schedule, est.values):
        law = 1 + 2 * r
        claims.append(close(f"M(r) = 1 + 2r at r = {r:g}", law, v, p["point_tol"] * law))
    claims.append(close("extrapolated content equals H^1 = 1", 1.0, est.extrapolated,
                        p["limit_tol"]))
    V = cv.mixed_volumes(K, C)
    mixed = math.comb(2, 1) * V[1] / cv.unit_ball_volume(1)
    claims.append(close("binom(2,1) V(K,C) / omega_1 equals 1", 1.0, mixed, 1e-9))
    claims.append(close("phi_functional equals 1", 1.0, ct.phi_functional(S, C), 1e-9))
    return claims, {"schedule": schedule_csv(est.rows, 2, 1)}


convex_k_body.defaults = dict(COMMON, schedule=_schedule(0.1, 6), h_rel=0.1, cloud_ratio=0.01,
                              point_tol=0.02, limit_tol=0.01)


def square_gauge_circle(p):
    S = rc.RectifiableSet([rc.CircleArc()])
    C = cv.box([1.0, 1.0])
    phi = ct.phi_functional(S, C, order=p["order"])
    phi1 = ct.phi_codim1(S, C, order=p["order"])
    est = _content(S, C, p)
    claims = [
        close("phi_functional equals 8", 8.0, phi, 1e-6),
        close("phi_codim1 equals phi_functional", phi, phi1, 1e-9),
        close("extrapolated content equals phi", phi, est.extrapolated, p["rel_tol"] * phi),
    ]
    # the integrand: radial averages against exact areas
    full2 = cv.Subspace.full(2)
    disk = cv.ball_polytope(2, 1.0, 256)
    claims.append(close("radial average of the square equals 4", 4.0,
                        ct.radial_average_area(C, full2), 1e-6))
    claims.append(close("radial average of the 256-gon equals its area", cv.body_volume(disk),
                        ct.radial_average_area(disk, full2), 1e-6))
    cube = cv.box([1.0, 1.0, 1.0])
    claims.append(close("radial average of the cube equals 8 (Fibonacci lattice)", 8.0,
                        ct.radial_average_area(cube, cv.Subspace.full(3)), 1e-3))
    return claims, {"schedule": schedule_csv(est.rows, 2, 1)}


square_gauge_circle.defaults = dict(COMMON, schedule=_schedule(0.1, 6), cloud_ratio=0.01,
                                    order=32, rel_tol=0.02)


def random_body(rng, n, count):
    return cv.make_body(rng.normal(size=(count, n)), recenter=True)


def hc_identity(p):
    rng = np.random.default_rng(p["seed"])
    worst = 0.0
    ok = 0
    for _ in range(p["trials"]):
        C = random_body(rng, 3, p["vertices"])
        nu = rng.normal(size=3)
        nu /= np.linalg.norm(nu)
        proj = cv.project_body(C, cv.Subspace.span(nu[None, :]))
        err = abs(cv.radial(proj, nu) - cv.support(C, nu))
        worst = max(worst, err)
        ok += err <= p["tol"]
    return [close("passing trials", p["trials"], ok, 0),
            close("max |rho_{P C}(nu) - h_C(nu)|", 0.0, worst, p["tol"])], {}


hc_identity.defaults = {"seed": 0, "trials": 100, "vertices": 12, "tol": 1e-9}


def mixed_volume_rep(p):
    claims = []
    # a segment in the plane against the square
    K = cv.make_body([[-0.5, 0.0], [0.5, 0.0]])
    C = cv.box([1.0, 1.0])
    V = cv.mixed_volumes(K, C)
    lhs = math.comb(2, 1) * V[1] / cv.unit_ball_volume(1)
    phi = ct.phi_functional(rc.patches_from_body(K), C)
    claims.append(close("2D: binom(2,1) V(K,C)/omega_1 equals phi", phi, lhs, 1e-9))
    # a flat square in space against the cube and against a ball polytope
    K3 = cv.box([1.0, 1.0, 0.0])
    for label, C3 in (("cube", cv.box([1.0, 1.0, 1.0])),
                      ("ball polytope", cv.ball_polytope(3, 1.0, p["ball_points"]))):
        V3 = cv.mixed_volumes(K3, C3)
        lhs3 = math.comb(3, 2) * V3[2] / cv.unit_ball_volume(1)
        phi3 = ct.phi_functional(rc.patches_from_body(K3), C3)
        claims.append(close(f"3D square vs {label}: binom(3,2) V(K[2],C)/omega_1 equals phi",
                            phi3, lhs3, 1e-6))
    return claims, {}


mixed_volume_rep.defaults = {"ball_points": 200}


def continuity_bound(p):
    rng = np.random.default_rng(p["seed"])
    S = rc.RectifiableSet([rc.CircleArc()])
    Hk = rc.hausdorff_measure(S, 32)
    n, k = 2, 1
    worst = -math.inf
    violations = 0
    for _ in range(p["pairs"]):
        C = random_body(rng, n, int(rng.integers(3, 10)))
        K = random_body(rng, n, int(rng.integers(3, 10)))
        gap = abs(ct.phi_codim1(S, K) - ct.phi_codim1(S, C))
        diam = C.diameter + K.diameter
        bound = cv.hausdorff_distance(C, K) * Hk * sum(
            math.comb(n - k, j) * diam ** j for j in range(n - k))
        worst = max(worst, gap - bound)
        violations += gap > bound + p["slack"]
    return [close("violations of the continuity bound", 0, violations, 0),
            holds(f"max(gap - bound) = {worst:.3e} <= slack", worst <= p["slack"])], {}


continuity_bound.defaults = {"seed": 0, "pairs": 50, "slack": 1e-9}


def e1_flat(p):
    S = rc.e1_family(p["M"])
    C = cv.box([0.5, 0.0])
    claims = []
    rows = []
    for r in p["radii"]:
        cloud = rc.sample_cloud(S, p["h"] / 4)
        est = tube_volume(cloud, C, r, **_estimator(p))
        rows.append(est)
        claims.append(close(f"normalized content at r = {r:g}", 0.0,
                            normalized(est.volume, 2, 1, r), 0.0))
    return claims, {"radii": schedule_csv(rows, 2, 1)}


e1_flat.defaults = dict(COMMON, M=64, radii=[0.1, 0.01, 0.001], h=1 / 256)


def e1_fattened(p):
    eps = p["eps"]
    C = cv.box([0.5, eps])
    S = rc.e1_family(p["M_set"])
    proj = cv.body_volume(cv.project_body(C, cv.Subspace.span([[0.0, 1.0]])))
    bound = sum(2.0 / j for j in range(1, p["M"] + 1)) * proj / cv.unit_ball_volume(1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # straight pieces: a coarse cloud is exact
        est = ct.content_estimate(S, C, schedule=p["schedule"], cloud_ratio=p["cloud_ratio"],
                                  **_estimator(p))
    claims = [
        holds(f"extrapolated {est.extrapolated:.6f} exceeds the partial-sum bound "
              f"{bound:.6f} or divergence is flagged",
              est.divergence_flag or est.extrapolated > bound),
        holds(f"tail maximum {est.upper_tail:.6f} exceeds the bound", est.upper_tail > bound),
        holds("values grow as r decreases", bool(np.all(np.diff(est.values[-p["grow"]:]) > 0))),
    ]
    return claims, {"schedule": schedule_csv(est.rows, 2, 1)}


e1_fattened.defaults = dict(COMMON, eps=0.1, M=64, M_set=4096, schedule=_schedule(0.02, 6),
                            h_rel=0.01, cloud_ratio=1.0, grow=4)


def _coarea_integral(S, e, order=32):
    """integral over S of |e . tangent| dH^1 (the projection Jacobian)."""
    total = 0.0
    for patch in S.patches:
        def f(U):
            _, jac = patch.evaluate(U)
            return np.abs(jac[:, :, 0] @ e)
        total += ct.quad.integrate_box(f, patch.domain[:, 0], patch.domain[:, 1], order)
    return total


def slicing_circle(p):
    S = rc.RectifiableSet([rc.CircleArc()])
    vert = cv.make_body([[0.0, -1.0], [0.0, 1.0]])
    diag = cv.make_body(np.array([[1.0, 1.0], [-1.0, -1.0]]) / math.sqrt(2))
    seg = rc.RectifiableSet([rc.Segment([0.0, 0.0], [1.0, 0.0])])
    kw = {"cells": p["cells"], "subdivisions": p["subdivisions"]}
    claims = [
        close("circle with a vertical segment", 4.0, ct.slicing_content(S, vert, **kw),
              p["rel_tol"] * 4),
        close("circle with a diagonal segment", 4.0, ct.slicing_content(S, diag, **kw),
              p["rel_tol"] * 4),
        close("unit segment with a vertical segment", 1.0, ct.slicing_content(seg, vert, **kw),
              p["rel_tol"]),
        close("coarea side: integral of |sin theta| over the circle", 4.0,
              _coarea_integral(S, np.array([1.0, 0.0])), 1e-6),
    ]
    return claims, {}


slicing_circle.defaults = {"cells": 4096, "subdivisions": 10_000, "rel_tol": 0.02}


def vanishing_codim(p):
    S = rc.RectifiableSet([rc.helix(turns=p["turns"])])
    C = cv.make_body([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]])
    est = ct.content_estimate(S, C, schedule=p["schedule"], cloud_ratio=p["cloud_ratio"],
                              **_estimator(p))
    v = est.values
    claims = []
    for j in range(len(v) - 3, len(v)):
        claims.append(holds(f"M(r_{j}) = {v[j]:.3e} <= M(r_{j - 1}) / 1.8 = {v[j - 1] / 1.8:.3e}",
                            v[j] <= v[j - 1] / p["factor"]))
    claims.append(close("phi_functional vanishes", 0.0, ct.phi_functional(S, C), 1e-12))
    return claims, {"schedule": schedule_csv(est.rows, 3, 1)}


vanishing_codim.defaults = dict(COMMON, schedule=_schedule(0.1, 6), h=1 / 64, turns=1.0,
                                cloud_ratio=0.01, factor=1.8)


def c_dependence(p):
    S = rc.RectifiableSet([rc.CircleArc()])
    hexagon = cv.make_body(np.column_stack([np.cos(np.arange(6) * math.pi / 3),
                                            np.sin(np.arange(6) * math.pi / 3)]))
    bodies = {"square": cv.box([1.0, 1.0]), "hexagon": hexagon,
              "ball polytope": cv.ball_polytope(2, 1.0, p["facets"])}
    claims, tables = [], {}
    for name, C in bodies.items():
        phi = ct.phi_codim1(S, C)
        est = _content(S, C, p)
        gap = abs(est.extrapolated - phi) / phi
        claims.append(close(f"{name}: relative gap |content - phi| / phi", 0.0, gap, p["rel_tol"]))
        tables[name.replace(" ", "_")] = schedule_csv(est.rows, 2, 1)
    return claims, tables


c_dependence.defaults = dict(COMMON, schedule=_schedule(0.1, 6), facets=256, cloud_ratio=0.01,
                             rel_tol=0.02)


def afp_segment(p):
    S = rc.RectifiableSet([rc.Segment([0.0, 0.0], [1.0, 0.0])])
    radii = p["radii"]
    plain = ct.afp_gamma(S, radii)
    rel = ct.afp_gamma_relative(S, cv.Subspace.span([[0.0, 1.0]]), radii)
    vac = ct.afp_gamma_relative(S, cv.Subspace.span([[1.0, 0.0]]), radii)
    return [
        close("gamma of the unit segment (endpoint witness)", 1.0, plain.gamma, p["tol"]),
        close("relative gamma with L = span e2", 1.0, rel.gamma, p["tol"]),
        holds("relative gamma with L = span e1 is vacuous (+inf)", math.isinf(vac.gamma)),
    ], {}


afp_segment.defaults = {"radii": [0.5, 0.25, 0.1], "tol": 0.02}


CATALOG = {f.__name__: f for f in (
    federer_circle, convex_k_body, square_gauge_circle, hc_identity, mixed_volume_rep,
    continuity_bound, e1_flat, e1_fattened, slicing_circle, vanishing_codim, c_dependence,
    afp_segment)}


def scenario_names():
    return list(CATALOG)


def run_scenario(name, overrides=None, out_dir=None):
    """Run a catalog scenario; ``overrides`` replaces default parameters."""
    if name not in CATALOG:
        raise UnknownScenario(f"unknown scenario {name!r}")
    fn = CATALOG[name]
    params = dict(fn.defaults)
    for key, value in (overrides or {}).items():
        if key not in params:
            raise AminkError(f"scenario {name} has no parameter {key!r}")
        params[key] = value
    if "schedule" in params:
        params["schedule"] = np.asarray(params["schedule"], dtype=float)
    start = time.perf_counter()
    claims, tables = fn(params)
    report = ScenarioReport(name, claims, [], time.perf_counter() - start, tables)
    if out_dir is not None:
        report.write_tables(out_dir)
    return report
