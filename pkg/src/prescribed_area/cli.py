"""Command-line front end.

Exit codes: 0 when every checked claim holds, 1 when a mathematical claim fails,
2 for usage errors.  Tables are CSV (17 significant digits), summaries are JSON.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .domains import (
    ball_profile,
    containment_gap,
    optimal_profile,
    profile_admissible,
    profile_to_csv,
    wedge_compare,
)
from .field import (
    FieldConfig,
    boundary_check,
    certify_V1,
    div_numeric,
    div_W_closed,
    eval_bh_euclidean,
    eval_W,
    residue_check,
    sample_ball,
    simple_sphere_condition,
    sphere_condition_min,
    wedge_boundary_check,
)
from .geometry import SpaceForm, tangent_basis
from .profiles import (
    A_fun,
    Aprime_fun,
    Bprime_fun,
    BallData,
    G_fun,
    trig,
    underline_r,
)
from .sphere_geodesics import ChordProblem, minimize_chord, total_length
from .surfaces import (
    Q_profile,
    Qpartial_profile,
    catenoid_patch,
    clifford_patch,
    tilted_disk,
)

SCHEMA_VERSION = 1
FLOAT_FMT = ".17g"


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), FLOAT_FMT)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _summary(obj, args) -> None:
    text = _dump_json(obj)
    if getattr(args, "summary", None):
        with open(args.summary, "w") as fh:
            fh.write(text)
    else:
        sys.stderr.write(text)


# verify ---------------------------------------------------------------

def _suite(name, samples, max_err, ok, **extra):
    d = {"suite": name, "samples": int(samples), "max_err": float(max_err), "pass": bool(ok)}
    d.update(extra)
    return d


def run_verify(cfg: FieldConfig, samples: int, seed: int, tolerance: float):
    suites = []
    rep = certify_V1(cfg, samples=samples, seed=seed, tolerance=tolerance)
    extra = {"violations": rep.violations, "max_div": rep.max_div,
             "worst_point": None if rep.worst_point is None else rep.worst_point.tolist()}
    if rep.sphere_min_lhs is not None:
        extra["sphere_min_lhs"] = rep.sphere_min_lhs
    suites.append(_suite("V1", rep.samples, max(0.0, rep.max_div - 1.0), rep.passed, **extra))

    target = -A_fun(cfg.ctx, cfg.r_under)
    basis = tangent_basis(cfg.space, cfg.y)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])
    g = rng.standard_normal(basis.shape[0])
    dirs = list(basis[: min(3, basis.shape[0])]) + [(g / np.linalg.norm(g)) @ basis]
    errs = [abs(residue_check(cfg, d) - target) for d in dirs]
    suites.append(_suite("V2", len(dirs), max(errs), max(errs) <= 1e-6, limit=target))

    b = boundary_check(cfg, 1000, seed)
    extra = {}
    if cfg.has_wedge:
        extra["wedge_max"] = wedge_boundary_check(cfg, 1000, seed)
        b = max(b, extra["wedge_max"])
    suites.append(_suite("V3", 1000, b, b <= 1e-10, **extra))

    x, fr = sample_ball(cfg, 400, rng, min_ry=0.05)
    x, fr = x[:200], fr[:200]
    closed = div_W_closed(cfg, x, fr).total
    numeric = div_numeric(cfg, x, fr)
    rel = float(np.max(np.abs(closed - numeric) / (1 + np.abs(closed))))
    suites.append(_suite("divergence_oracle", len(x), rel, rel <= 1e-6))

    ctx = cfg.ctx
    r = np.linspace(0.05, min(cfg.R, 0.95 * cfg.space.half_diam), 200)
    e1 = np.max(np.abs(_gprime(ctx, r) * Aprime_fun(ctx, r) - 1))
    e2 = np.max(np.abs(Bprime_fun(ctx, r) * trig(ctx.kappa, "cs", r) ** 2 * Aprime_fun(ctx, r) - 1))
    suites.append(_suite("profile_identities", r.size, max(e1, e2), e1 <= 1e-8 and e2 <= 1e-10))

    if cfg.kappa == 0:
        # uniform points of the ball
        xi = rng.standard_normal((1000, cfg.space.n))
        xi /= np.linalg.norm(xi, axis=1, keepdims=True)
        xe = cfg.R * rng.random((1000, 1)) ** (1.0 / cfg.space.n) * xi
        w = eval_W(cfg, xe)
        bh = eval_bh_euclidean(cfg.k, cfg.y, xe, cfg.R)
        err = float(np.max(np.abs(w - bh)))
        suites.append(_suite("euclidean_reduction", len(xe), err, err <= 1e-12))
    return suites


def _gprime(ctx, r):
    """Fourth-order central difference of G with a step proportional to r."""
    h = 1e-3 * r

    def G(t):
        return np.asarray(G_fun(ctx, t))

    return (-G(r + 2 * h) + 8 * G(r + h) - 8 * G(r - h) + G(r - 2 * h)) / (12 * h)


def cmd_verify(args) -> int:
    n = args.n if args.n is not None else max(3, args.k + 1)
    cfg = FieldConfig.create(args.kappa, n, args.k, args.R, args.sy)
    suites = run_verify(cfg, args.samples, args.seed, args.tolerance)
    ok = all(s["pass"] for s in suites)
    report = {"schema_version": SCHEMA_VERSION, "command": "verify",
              "config": {"kappa": cfg.kappa, "n": n, "k": cfg.k, "R": cfg.R, "s_y": cfg.s_y,
                         "samples": args.samples, "seed": args.seed, "tolerance": args.tolerance},
              "suites": suites, "pass": ok}
    _emit(_dump_json(report), args.out)
    for s in suites:
        if not s["pass"]:
            msg = f"FAIL {s['suite']}: max_err={s['max_err']:.3e}"
            if "violations" in s:
                msg += f" violations={s['violations']}"
            print(msg, file=sys.stderr)
    return 0 if ok else 1


# sweep-sphere ---------------------------------------------------------

def sweep_sphere_rows(k: int, grid: int, n_s: int = 2000):
    eps = 1e-3
    Rs = np.linspace(eps, np.pi / 2 - eps, grid)
    rows = []
    for R in Rs:
        for frac in np.linspace(0.02, 0.98, grid):
            sy = float(frac * R)
            cfg = FieldConfig.create(1, k + 1, k, float(R), sy)
            m, _ = sphere_condition_min(cfg, n_s)
            rows.append((sy, float(R), k, m, simple_sphere_condition(k, R, sy), bool(m >= 0)))
    return rows


def cmd_sweep_sphere(args) -> int:
    rows = sweep_sphere_rows(args.k, args.grid)
    _emit(_csv_text(["s_y", "R", "k", "min_lhs", "simple_condition", "certified"], rows), args.out)
    unsound = sum(1 for r in rows if r[4] and not r[5])
    _summary({"schema_version": SCHEMA_VERSION, "command": "sweep-sphere", "k": args.k, "rows": len(rows),
              "simple_true": sum(1 for r in rows if r[4]), "certified": sum(1 for r in rows if r[5]),
              "unsound_rows": unsound, "pass": unsound == 0}, args)
    return 0 if unsound == 0 else 1


# geodesic -------------------------------------------------------------

def cmd_geodesic(args) -> int:
    p = ChordProblem(args.sy, args.R)
    alpha = np.linspace(0, np.pi, args.table)
    _emit(_csv_text(["alpha", "total_length"], zip(alpha, total_length(p, alpha))), args.out)
    a, L = minimize_chord(p)
    ok = abs(a - np.pi / 2) <= 1e-6 and abs(L - 2 * p.r_under) <= 1e-8
    _summary({"schema_version": SCHEMA_VERSION, "command": "geodesic", "s_y": args.sy, "R": args.R,
              "alpha_star": a, "L_star": L, "two_r_under": 2 * p.r_under, "pass": ok}, args)
    return 0 if ok else 1


# domain ---------------------------------------------------------------

def cmd_domain(args) -> int:
    if args.R0 is None and args.R is None:
        raise UsageError("give --R0 or --R")
    R0 = args.R0 if args.R0 is not None else underline_r(args.kappa, BallData(args.R, args.sy))
    prof = optimal_profile(args.kappa, args.k, args.sy, R0)
    buf = io.StringIO()
    profile_to_csv(prof, buf, args.points)
    _emit(buf.getvalue(), args.out)
    adm = profile_admissible(prof)
    ball = ball_profile(args.kappa, prof.ball_R, args.sy, args.k)
    gap = containment_gap(prof, ball)
    ball_adm = profile_admissible(ball)
    ok = adm.min_lhs >= -1e-8 and (not ball_adm.ok or gap <= 1e-6)
    _summary({"schema_version": SCHEMA_VERSION, "command": "domain", "kappa": args.kappa, "k": args.k,
              "s_y": args.sy, "R0": R0, "interval": list(prof.interval), "termination": prof.termination,
              "delta_sensitivity": prof.delta_sensitivity, "min_odi_lhs": adm.min_lhs,
              "ball_radius": prof.ball_R, "ball_admissible": ball_adm.ok, "containment_gap": gap,
              "contained_in_ball": gap <= 1e-6, "pass": ok}, args)
    return 0 if ok else 1


# monotonicity ---------------------------------------------------------

def build_surface(args):
    if args.surface == "clifford":
        return SpaceForm(1, 3), clifford_patch(args.R)
    if args.surface == "catenoid":
        return SpaceForm(0, 3), catenoid_patch(args.R, args.neck)
    k = 1 if args.surface == "chord" else args.k
    n = args.n if args.n is not None else max(3, k + 1)
    space = SpaceForm(args.kappa, n)
    return space, tilted_disk(space, BallData(args.R, args.sy), args.tilt, k)


def cmd_monotonicity(args) -> int:
    space, sub = build_surface(args)
    t = np.linspace(sub.R / args.grid, sub.R, args.grid)
    q = Q_profile(space, sub, t)
    qp = Qpartial_profile(space, sub, t)
    _emit(_csv_text(["t", "Q", "Q_partial"], zip(t, q.values, qp.values)), args.out)
    ok = q.nondecreasing(1e-6) and qp.nondecreasing(1e-6)
    _summary({"schema_version": SCHEMA_VERSION, "command": "monotonicity", "surface": args.surface,
              "R": sub.R, "min_forward_difference_Q": q.min_forward_difference,
              "min_forward_difference_Q_partial": qp.min_forward_difference, "pass": ok}, args)
    return 0 if ok else 1


# wedge ----------------------------------------------------------------

WEDGE_WITNESS = (1.5, 0.4)


def wedge_rows(grid: int):
    rows = []
    R, sy = WEDGE_WITNESS
    w = wedge_compare(R, sy)
    rows.append(("witness", R, sy, w.r_under, w.r_over, w.obstruction))
    for R in np.linspace(0.05, np.pi / 2 - 1e-3, grid):
        for frac in np.linspace(0.02, 0.98, grid):
            sy = float(frac * R)
            w = wedge_compare(float(R), sy)
            rows.append(("grid", float(R), sy, w.r_under, w.r_over, w.obstruction))
    return rows


def cmd_wedge(args) -> int:
    rows = wedge_rows(args.grid)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["source", "R", "s_y", "r_under", "r_over", "obstruction"])
    for r in rows:
        wr.writerow([r[0]] + [_fmt(v) for v in r[1:]])
    _emit(buf.getvalue(), args.out)
    bad = sum(1 for r in rows if r[5] and r[1] + r[2] <= np.pi / 2)
    _summary({"schema_version": SCHEMA_VERSION, "command": "wedge", "rows": len(rows),
              "obstructions": sum(1 for r in rows if r[5]), "witness_obstruction": rows[0][5],
              "pass": bad == 0 and rows[0][5]}, args)
    return 0 if bad == 0 and rows[0][5] else 1


# parser ---------------------------------------------------------------

def _positive_int(v):
    i = int(v)
    if i <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return i


def _kappa(v):
    i = int(v)
    if i not in (-1, 0, 1):
        raise argparse.ArgumentTypeError("kappa must be -1, 0 or 1")
    return i


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prescribed-area", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="certify (V1), (V2), (V3) and the closed forms for one configuration")
    v.add_argument("--kappa", type=_kappa, required=True)
    v.add_argument("--k", type=_positive_int, required=True)
    v.add_argument("--n", type=_positive_int)
    v.add_argument("--R", type=float, required=True)
    v.add_argument("--sy", type=float, required=True)
    v.add_argument("--samples", type=_positive_int, default=100_000)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--tolerance", type=float, default=1e-9)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep-sphere", help="sphere condition over a grid of (s_y, R)")
    s.add_argument("--k", type=_positive_int, required=True)
    s.add_argument("--grid", type=_positive_int, default=40)
    s.add_argument("--out")
    s.add_argument("--summary")
    s.set_defaults(func=cmd_sweep_sphere)

    g = sub.add_parser("geodesic", help="chord lengths through y in the sphere")
    g.add_argument("--sy", type=float, required=True)
    g.add_argument("--R", type=float, required=True)
    g.add_argument("--table", type=_positive_int, default=181)
    g.add_argument("--out")
    g.add_argument("--summary")
    g.set_defaults(func=cmd_geodesic)

    d = sub.add_parser("domain", help="integrate the equality profile and compare with the ball")
    d.add_argument("--kappa", type=_kappa, required=True)
    d.add_argument("--k", type=_positive_int, required=True)
    d.add_argument("--sy", type=float, required=True)
    d.add_argument("--R0", type=float)
    d.add_argument("--R", type=float, help="derive R0 as the orthogonal disk radius of this ball")
    d.add_argument("--points", type=_positive_int, default=401)
    d.add_argument("--out")
    d.add_argument("--summary")
    d.set_defaults(func=cmd_domain)

    m = sub.add_parser("monotonicity", help="Q and Q_partial profiles of an explicit minimal surface")
    m.add_argument("--surface", choices=["disk", "chord", "catenoid", "clifford"], required=True)
    m.add_argument("--R", type=float, required=True)
    m.add_argument("--kappa", type=_kappa, default=0)
    m.add_argument("--k", type=_positive_int, default=2)
    m.add_argument("--n", type=_positive_int)
    m.add_argument("--sy", type=float, default=0.3)
    m.add_argument("--tilt", type=float, default=0.5)
    m.add_argument("--neck", type=float, default=0.3)
    m.add_argument("--grid", type=_positive_int, default=50)
    m.add_argument("--out")
    m.add_argument("--summary")
    m.set_defaults(func=cmd_monotonicity)

    w = sub.add_parser("wedge", help="orthogonal versus axis-containing disks in the hemisphere wedge")
    w.add_argument("--grid", type=_positive_int, default=50)
    w.add_argument("--out")
    w.add_argument("--summary")
    w.set_defaults(func=cmd_wedge)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
