"""Command-line interface: ``amink <subcommand> [scene.json] [options]``.

Every subcommand prints one JSON object on stdout. Exit status is 0 on
success, 1 on invalid input (with ``{"error": ...}``) and 2 on a numeric
failure: a divergent content estimate without ``--allow-divergent`` or a
scenario with a failing claim.
"""

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import content as ct
from . import convex as cv
from . import rectifiable as rc
from .errors import AminkError, NumericFailure
from .scenarios import CATALOG, _jsonable, run_scenario, scenario_names, schedule_csv

SUBCOMMANDS = ("content", "phi", "mixed", "slice", "afp", "hausdorff", "scenario",
               "list-scenarios")


def _clean(obj):
    """Recursively make numpy values and non-finite floats JSON friendly."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return _jsonable(obj)


def _emit(obj, stream=None):
    stream = sys.stdout if stream is None else stream
    stream.write(json.dumps(_clean(obj)) + "\n")


# --- scene literals --------------------------------------------------------

def parse_body(lit, n=None):
    if "vertices" in lit:
        return cv.make_body(lit["vertices"], ambient_dim=n, recenter=bool(lit.get("recenter")))
    if "ball" in lit:
        b = lit["ball"]
        return cv.ball_polytope(int(b["dim"]), float(b.get("radius", 1.0)),
                                int(b.get("facets", 256)))
    if "box" in lit:
        return cv.box(lit["box"])
    raise AminkError(f"unrecognised body literal with keys {sorted(lit)}")


def _exponents(key):
    if isinstance(key, str):
        return tuple(int(t) for t in key.replace(" ", "").split(","))
    return tuple(int(t) for t in key)


def parse_patches(lit):
    kind = lit.get("kind")
    if kind == "segment":
        return [rc.Segment(lit["a"], lit["b"])]
    if kind == "polyline":
        return rc.polyline(lit["points"])
    if kind == "circle_arc":
        return [rc.CircleArc(lit.get("center", (0.0, 0.0)), lit.get("radius", 1.0),
                             lit.get("theta", (0.0, 2 * math.pi)))]
    if kind == "graph_surface":
        coeffs = {_exponents(k): float(v) for k, v in lit["coeffs"].items()}
        return [rc.GraphSurface(coeffs, lit["domain"])]
    if kind == "sphere_patch":
        return [rc.SpherePatch(lit.get("center", (0.0, 0.0, 0.0)), lit.get("radius", 1.0),
                               lit.get("phi", (0.0, math.pi)), lit.get("theta", (0.0, 2 * math.pi)))]
    if kind == "triangle":
        return [rc.Triangle(*lit["vertices"])]
    if kind == "affine":
        return [rc.AffinePatch(lit["origin"], lit["edges"])]
    if kind == "helix":
        return [rc.helix(lit.get("radius", 1.0), lit.get("pitch", 1.0), lit.get("turns", 1.0))]
    if kind == "point":
        return [rc.Point(lit["p"])]
    if kind == "e1_family":
        return rc.e1_family(int(lit.get("M", 64)), bool(lit.get("limit", True))).patches
    raise AminkError(f"unknown patch kind {kind!r}")


def parse_set(lit):
    items = lit.get("patches", [lit]) if isinstance(lit, dict) else lit
    patches = []
    for item in items:
        patches.extend(parse_patches(item))
    return rc.RectifiableSet(patches)


def load_scene(path):
    try:
        with open(path, encoding="utf-8") as fh:
            scene = json.load(fh)
    except OSError as exc:
        raise AminkError(f"cannot read scene file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise AminkError(f"scene is not valid JSON: {exc}") from None
    if not isinstance(scene, dict):
        raise AminkError("scene must be a JSON object")
    return scene


def _dim_check(scene, *objs):
    n = scene.get("ambient_dim")
    for o in objs:
        if n is not None and o.ambient_dim != n:
            raise AminkError(f"ambient_dim {n} does not match an object of dimension {o.ambient_dim}")


def _estimator(scene, args):
    est = dict(scene.get("estimator", {"method": "grid", "h": 1 / 512}))
    method = est.get("method", "grid")
    out = {"method": method, "threads": args.threads}
    if method == "grid":
        if "h_rel" in est:
            out["h_rel"] = float(est["h_rel"])
        elif "h" in est:
            out["h"] = float(est["h"])
        else:
            raise AminkError("grid estimator needs h or h_rel")
    elif method == "mc":
        seed = args.seed if args.seed is not None else est.get("seed")
        if seed is None:
            raise AminkError("mc estimator needs a seed")
        out["N"] = int(est.get("N", 100_000))
        out["seed"] = int(seed)
    else:
        raise AminkError(f"unknown estimator method {method!r}")
    return out


# --- subcommands -----------------------------------------------------------

def cmd_content(scene, args):
    S = parse_set(scene["set"])
    C = parse_body(scene["body"], S.ambient_dim)
    _dim_check(scene, S, C)
    k = int(scene.get("k", S.k))
    est_kw = _estimator(scene, args)
    schedule = scene.get("schedule")
    if schedule is None:
        raise AminkError("scene has no schedule")
    cloud = {}
    if "cloud_eps" in scene:
        cloud["cloud_eps"] = float(scene["cloud_eps"])
    if "cloud_ratio" in scene:
        cloud["cloud_ratio"] = float(scene["cloud_ratio"])
    if not C.is_full_dim and est_kw["method"] == "grid":
        r_max = float(np.max(schedule))
        eps = cloud.get("cloud_eps", cloud.get("cloud_ratio", 0.01) * r_max)
        h = est_kw.get("h", est_kw.get("h_rel", 0.0) * r_max)
        if eps > h / 4:
            raise AminkError("lower-dimensional body needs cloud_eps <= h/4")
    est = ct.content_estimate(S, C, k=k, schedule=schedule, **est_kw, **cloud)
    phi = gap = None
    if k == S.k:
        phi = ct.phi_functional(S, C, k=k, order=int(scene.get("quadrature_order", 16)))
        gap = abs(est.extrapolated - phi) / phi if phi > 0 else \
            (0.0 if est.extrapolated == 0 else math.inf)
    summary = {
        "extrapolated": est.extrapolated,
        "residual": est.residual,
        "lower_tail": est.lower_tail,
        "upper_tail": est.upper_tail,
        "divergence_flag": est.divergence_flag,
        "phi": phi,
        "relative_gap": gap,
        "schedule": est.schedule,
        "values": est.values,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "content.csv"
        path.write_text(schedule_csv(est.rows, S.ambient_dim, k), encoding="utf-8")
        summary["artifacts"] = [str(path)]
    if est.divergence_flag and not args.allow_divergent:
        summary["error"] = "content estimate diverges (rerun with --allow-divergent)"
        _emit(summary)
        return 2
    _emit(summary)
    return 0


def cmd_phi(scene, args):
    S = parse_set(scene["set"])
    C = parse_body(scene["body"], S.ambient_dim)
    _dim_check(scene, S, C)
    order = int(scene.get("quadrature_order", 16))
    out = {"phi": ct.phi_functional(S, C, k=scene.get("k"), order=order)}
    if S.k == S.ambient_dim - 1:
        out["phi_codim1"] = ct.phi_codim1(S, C, order=order)
    _emit(out)
    return 0


def _two_bodies(scene):
    if "other_body" not in scene:
        raise AminkError("scene needs both body and other_body")
    C = parse_body(scene["body"], scene.get("ambient_dim"))
    K = parse_body(scene["other_body"], scene.get("ambient_dim"))
    _dim_check(scene, C, K)
    return C, K


def cmd_mixed(scene, args):
    C, K = _two_bodies(scene)
    V = cv.mixed_volumes(K, C)
    out = {"mixed_volumes": V}
    k = scene.get("k", K.intrinsic_dim)
    n = K.ambient_dim
    if 0 <= k <= n:
        out["content"] = math.comb(n, k) * V[k] / cv.unit_ball_volume(n - k)
    _emit(out)
    return 0


def cmd_slice(scene, args):
    S = parse_set(scene["set"])
    C = parse_body(scene["body"], S.ambient_dim)
    _dim_check(scene, S, C)
    grid = scene.get("grid", {})
    value, flagged = ct.slicing_content(S, C, cells=int(grid.get("cells", 4096)),
                                        subdivisions=int(grid.get("subdivisions", 10_000)),
                                        return_flags=True)
    _emit({"slicing_content": value, "flagged_cells": flagged})
    return 0


def cmd_afp(scene, args):
    S = parse_set(scene["set"])
    _dim_check(scene, S)
    radii = scene.get("radii", [0.5, 0.25, 0.1])
    weights = scene.get("patch_weights")
    if "subspace" in scene:
        L = cv.Subspace.span(scene["subspace"], S.ambient_dim)
        rep = ct.afp_gamma_relative(S, L, radii, h=scene.get("projection_h"),
                                    patch_weights=weights)
    else:
        rep = ct.afp_gamma(S, radii, patch_weights=weights)
    _emit({"gamma": rep.gamma, "argmin_center": rep.argmin_center,
           "argmin_radius": rep.argmin_radius, "relative_mode": rep.relative_mode})
    return 0


def cmd_hausdorff(scene, args):
    C, K = _two_bodies(scene)
    value, bound = cv.hausdorff_distance(C, K, return_bound=True)
    _emit({"hausdorff_distance": value, "error_bound": bound})
    return 0


def _parse_override(text):
    if "=" not in text:
        raise AminkError(f"override {text!r} is not key=value")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def cmd_scenario(args):
    overrides = dict(_parse_override(t) for t in args.set or [])
    fn = CATALOG.get(args.name)
    if args.seed is not None and fn is not None and "seed" in fn.defaults:
        overrides["seed"] = args.seed
    if args.threads is not None and fn is not None and "threads" in fn.defaults:
        overrides["threads"] = args.threads
    report = run_scenario(args.name, overrides, out_dir=args.out)
    sys.stdout.write(report.to_json(include_runtime=not args.no_runtime) + "\n")
    return 0 if report.passed else 2


def build_parser():
    parser = argparse.ArgumentParser(prog="amink", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for CSV tables")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: AMINK_THREADS or CPU count)")
    common.add_argument("--seed", type=int, default=None, help="override the estimator seed")
    common.add_argument("--allow-divergent", action="store_true",
                        help="exit 0 even when the content estimate diverges")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS[:6]:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("scene", help="scene file (UTF-8 JSON)")
    p = sub.add_parser("scenario", parents=[common])
    p.add_argument("name")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a scenario parameter (value parsed as JSON)")
    p.add_argument("--no-runtime", action="store_true",
                   help="omit runtime_seconds so reports are byte-stable")
    sub.add_parser("list-scenarios")
    return parser


HANDLERS = {"content": cmd_content, "phi": cmd_phi, "mixed": cmd_mixed, "slice": cmd_slice,
            "afp": cmd_afp, "hausdorff": cmd_hausdorff}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    if args.command == "list-scenarios":
        _emit(scenario_names())
        return 0
    try:
        if args.command == "scenario":
            return cmd_scenario(args)
        return HANDLERS[args.command](load_scene(args.scene), args)
    except (AminkError, KeyError, TypeError, ValueError) as exc:
        msg = str(exc) if isinstance(exc, AminkError) else f"invalid scene: {exc!r}"
        _emit({"error": msg})
        return 1
    except NumericFailure as exc:
        _emit({"error": str(exc)})
        return 2


if __name__ == "__main__":
    sys.exit(main())
