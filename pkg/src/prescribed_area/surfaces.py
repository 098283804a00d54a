"""Explicit minimal submanifolds as quadrature samples, with monotonicity profiles.

Every built-in surface carries a ``clip`` callable returning a fresh quadrature of
its intersection with the ball B_t(o).  Restricting fixed weights by an indicator
instead gives staircase profiles whose jumps swamp the monotonicity tolerance.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .geometry import (
    GeometryError,
    SpaceForm,
    distance,
    exp_map,
    geodesic_velocity,
    grad_r,
    inner,
    tangential_sq,
)
from .profiles import ProfileContext, Aprime_fun, disk_area, sphere_measure, underline_r, BallData

FLOAT_FMT = ".17g"


@dataclass
class SampledSubmanifold:
    space: SpaceForm
    k: int
    R: float
    points: np.ndarray
    frames: np.ndarray
    weights: np.ndarray
    meta: str = ""
    clip: Optional[Callable[[float], "SampledSubmanifold"]] = field(default=None, repr=False)
    residual: Optional[Callable[[np.ndarray], float]] = field(default=None, repr=False)

    def __post_init__(self):
        m = self.weights.shape[0]
        if self.points.shape != (m, self.space.ncoords):
            raise ValueError("points must have shape (m, ncoords)")
        if self.frames.shape != (m, self.k, self.space.ncoords):
            raise ValueError("frames must have shape (m, k, ncoords)")
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")

    def __len__(self):
        return self.weights.shape[0]

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def restrict(self, t: float) -> "SampledSubmanifold":
        """Samples of the intersection with the ball of radius t about o."""
        if self.clip is not None:
            return self.clip(t)
        r = distance(self.space, self.space.origin(), self.points)
        keep = r <= t
        return SampledSubmanifold(self.space, self.k, t, self.points[keep], self.frames[keep],
                                  self.weights[keep], self.meta + f" restricted t={t:g}")

    def tangential_r_sq(self) -> np.ndarray:
        """|grad^T r|^2 at every sample, r the distance to o."""
        if len(self) == 0:
            return np.zeros(0)
        g = grad_r(self.space, self.space.origin(), self.points)
        return tangential_sq(self.space, self.frames, g)

    def to_csv(self, fh) -> None:
        nc = self.space.ncoords
        header = [f"x{i}" for i in range(nc)]
        header += [f"e{j}_{i}" for j in range(self.k) for i in range(nc)]
        header.append("weight")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for p, f, wt in zip(self.points, self.frames, self.weights):
            row = list(p) + list(f.ravel()) + [wt]
            w.writerow([format(float(v), FLOAT_FMT) for v in row])


def _empty(space: SpaceForm, k: int, R: float, meta: str) -> SampledSubmanifold:
    nc = space.ncoords
    return SampledSubmanifold(space, k, R, np.zeros((0, nc)), np.zeros((0, k, nc)), np.zeros(0), meta)


def _legendre(n: int, a, b):
    """Gauss-Legendre nodes and weights mapped to [a, b] (broadcast over a, b)."""
    x, w = roots_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def _directions(k: int, n_ang: int, seed: int = 0):
    """Unit vectors of R^k with weights integrating functions of the first coordinate.

    The first coordinate is resolved by Gauss-Legendre in the polar angle; the
    remaining sphere S^(k-2) is covered by an evenly weighted orbit.
    """
    if k == 1:
        return np.array([[1.0], [-1.0]]), np.ones(2)
    if k == 2:
        phi = 2 * np.pi * (np.arange(n_ang) + 0.5) / n_ang
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(n_ang, 2 * np.pi / n_ang)
    theta, wt = _legendre(n_ang, 0.0, np.pi)
    wt = wt * np.sin(theta) ** (k - 2)
    if k == 3:
        n_orb = 8
        phi = 2 * np.pi * np.arange(n_orb) / n_orb
        orbit = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    else:
        n_orb = 2 * (k - 1)
        orbit = np.concatenate([np.eye(k - 1), -np.eye(k - 1)])
    coef = np.concatenate(
        [np.cos(theta)[:, None, None] * np.ones((1, n_orb, 1)),
         np.sin(theta)[:, None, None] * orbit[None, :, :]], axis=2
    ).reshape(-1, k)
    weights = np.repeat(wt, n_orb) * sphere_measure(k - 1) / n_orb
    return coef, weights


def _polar_samples(space: SpaceForm, center, E, radius_fn, n_ang: int, n_rad: int):
    """Geodesic polar quadrature on the totally geodesic submanifold exp_center(span E)."""
    k = E.shape[0]
    coef, wdir = _directions(k, n_ang)
    lengths = np.asarray(radius_fn(coef), dtype=float)
    omega = coef @ E
    tau, wrad = _legendre(n_rad, np.zeros_like(lengths), lengths)
    wrad = wrad * space.sn(tau) ** (k - 1)
    D = omega.shape[0]
    om = np.repeat(omega, n_rad, axis=0)
    tau = tau.reshape(-1)
    c = np.broadcast_to(center, om.shape)
    x = exp_map(space, c, om, tau)
    vel = geodesic_velocity(space, c, om, tau)
    a = np.repeat(coef, n_rad, axis=0)
    frames = E[None, :, :] + a[:, :, None] * (vel - om)[:, None, :]
    weights = (wdir[:, None] * wrad).reshape(-1)
    return x, frames, weights


def _asn(kappa: int, v):
    return {1: np.arcsin, -1: np.arcsinh, 0: lambda z: z}[kappa](v)


def _acs_ratio(kappa: int, num, den):
    """cs^-1(num/den) for kappa != 0, sqrt(num^2 - den^2) style handled by callers."""
    q = num / den
    return np.arccos(np.clip(q, -1, 1)) if kappa == 1 else np.arccosh(np.maximum(q, 1.0))


def exit_length(kappa: int, R: float, s_y: float, c):
    """Length of the geodesic from y (at distance s_y from o) to the sphere of radius R.

    c is the cosine of the angle between the initial velocity and the axis direction
    pointing away from o.
    """
    c = np.asarray(c, dtype=float)
    if kappa == 0:
        return -s_y * c + np.sqrt(R * R - s_y * s_y * (1.0 - c * c))
    if kappa == 1:
        a, b = np.cos(s_y), np.sin(s_y) * c
        return np.arccos(np.cos(R) / np.hypot(a, b)) - np.arctan2(b, a)
    a, b, C = np.cosh(s_y), np.sinh(s_y) * c, np.cosh(R)
    return np.log((C + np.sqrt(C * C - (a - b) * (a + b))) / (a + b))


def geodesic_chord_length(space: SpaceForm, ball: BallData, alpha):
    """Length of the chord of the ball through y meeting the axis at angle alpha.

    alpha is measured from the direction pointing from y toward o, so alpha = 0 is
    the axis itself.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > np.pi):
        raise ValueError("alpha must lie in [0, pi]")
    c = np.cos(alpha)
    out = exit_length(space.kappa, ball.R, ball.s_y, -c) + exit_length(space.kappa, ball.R, ball.s_y, c)
    return float(out) if out.ndim == 0 else out


def _span_residual(space: SpaceForm, base, E):
    """Distance-like residual of a point from the totally geodesic exp_base(span E)."""
    if space.kappa == 0:
        def res(x):
            d = np.asarray(x, dtype=float) - base
            return float(np.linalg.norm(d - (E @ d) @ E))
        return res
    V = np.vstack([base, E])
    signs = np.array([space.kappa] + [1.0] * E.shape[0])

    def res(x):
        x = np.asarray(x, dtype=float)
        proj = (inner(space, V, x) * signs) @ V
        return float(np.linalg.norm(x - proj))
    return res


def tilted_disk(space: SpaceForm, ball: BallData, tilt: float, k: int, resolution: int = 32) -> SampledSubmanifold:
    """Totally geodesic k-disk through y whose plane leans by `tilt` toward the axis.

    tilt = 0 is the disk orthogonal to the axis; tilt = pi/2 contains the axis
    direction.  Samples are polar about y; the clip is polar about the foot point p
    of o on the disk, where r depends on the polar radius only.
    """
    kappa, R, s_y = space.kappa, ball.R, ball.s_y
    if not 0.0 <= tilt <= np.pi / 2:
        raise ValueError("tilt must lie in [0, pi/2]")
    if resolution < 16:
        raise ValueError("resolution must be >= 16")
    if not 1 <= k <= space.n - 1:
        raise GeometryError("k must lie in [1, n-1]")
    if not 0.0 <= s_y < R < space.half_diam:
        raise GeometryError("need 0 <= s_y < R < diam/2")
    o = space.origin()
    ax = space.axis()
    y = exp_map(space, o, ax, s_y)
    e_s = geodesic_velocity(space, o, ax, s_y)
    i0 = space.axis_index
    m = np.zeros((k, space.ncoords))
    m[np.arange(k), i0 + 1 + np.arange(k)] = 1.0
    E = m.copy()
    E[0] = np.cos(tilt) * m[0] + np.sin(tilt) * e_s
    st = np.sin(tilt)

    x, frames, w = _polar_samples(space, y, E, lambda coef: exit_length(kappa, R, s_y, coef[:, 0] * st),
                                  resolution, resolution)

    # foot point of o on the disk
    d0 = float(_asn(kappa, space.sn(s_y) * np.cos(tilt)))
    if kappa == 0:
        l0 = float(np.sqrt(max(s_y * s_y - d0 * d0, 0.0)))
    else:
        l0 = float(_acs_ratio(kappa, space.cs(s_y), space.cs(d0)))
    if l0 > 0:
        p = exp_map(space, y, -E[0], l0)
        Ep = E.copy()
        Ep[0] = -geodesic_velocity(space, y, -E[0], l0)
    else:
        p, Ep = y, E
    cd0 = space.cs(d0)

    def clip(t: float) -> SampledSubmanifold:
        t = float(t)
        if t > R * (1 + 1e-12):
            raise ValueError("clip radius exceeds the ball")
        if t <= d0:
            return _empty(space, k, t, "empty")
        if kappa == 0:
            tau = np.sqrt(t * t - d0 * d0)
        else:
            tau = float(_acs_ratio(kappa, space.cs(t), cd0))
        xs, fs, ws = _polar_samples(space, p, Ep, lambda coef: np.full(coef.shape[0], tau), resolution, resolution)
        return SampledSubmanifold(space, k, t, xs, fs, ws, f"tilted disk clipped t={t:g}")

    meta = f"tilted disk kappa={kappa} k={k} R={R:g} s_y={s_y:g} tilt={tilt:g}"
    return SampledSubmanifold(space, k, R, x, frames, w, meta, clip, _span_residual(space, p, Ep))


def catenoid_param(neck: float):
    def X(v, phi):
        ch = neck * np.cosh(v / neck)
        return np.stack([ch * np.cos(phi), ch * np.sin(phi), v], axis=-1)
    return X


def catenoid_patch(R: float, neck: float, resolution: int = 64) -> SampledSubmanifold:
    """Catenoid x1^2 + x2^2 = a^2 cosh^2(x3/a) in R^3 clipped to the ball of radius R."""
    a = float(neck)
    if not 0 < a < R:
        raise GeometryError("the catenoid meets the ball only if 0 < neck < R")
    space = SpaceForm(0, 3)
    X = catenoid_param(a)

    def v_of(t):
        return brentq(lambda v: a * a * np.cosh(v / a) ** 2 + v * v - t * t, 0.0, t, xtol=1e-15, rtol=1e-15)

    def build(t):
        if t <= a:
            return _empty(space, 2, t, "empty")
        vt = v_of(t)
        v, wv = _legendre(resolution, -vt, vt)
        nphi = resolution
        phi = 2 * np.pi * (np.arange(nphi) + 0.5) / nphi
        V, P = np.meshgrid(v, phi, indexing="ij")
        W = (wv[:, None] * np.cosh(V / a) ** 2 * a) * (2 * np.pi / nphi)
        pts = X(V, P).reshape(-1, 3)
        ch = np.cosh(V)
        ev = np.stack([np.tanh(V / a) * np.cos(P), np.tanh(V / a) * np.sin(P), 1.0 / np.cosh(V / a)], axis=-1)
        ep = np.stack([-np.sin(P), np.cos(P), np.zeros_like(ch)], axis=-1)
        frames = np.stack([ev, ep], axis=-2).reshape(-1, 2, 3)
        return SampledSubmanifold(space, 2, t, pts, frames, W.reshape(-1), f"catenoid neck={a:g} t={t:g}")

    def residual(x):
        x = np.asarray(x, dtype=float)
        return float(abs(np.hypot(x[0], x[1]) - a * np.cosh(x[2] / a)))

    sub = build(R)
    sub.clip = build
    sub.residual = residual
    sub.R = R
    return sub


def _householder(src, dst):
    w = src - dst
    nw = np.linalg.norm(w)
    if nw == 0:
        return np.eye(src.size)
    w = w / nw
    return np.eye(src.size) - 2.0 * np.outer(w, w)


CLIFFORD_O = np.array([1.0, 0.0, 1.0, 0.0]) / np.sqrt(2.0)


def clifford_param():
    H = _householder(CLIFFORD_O, np.array([1.0, 0.0, 0.0, 0.0]))

    def X(u, v):
        z = np.stack([np.cos(u), np.sin(u), np.cos(v), np.sin(v)], axis=-1) / np.sqrt(2.0)
        return z @ H.T
    return X, H


def clifford_patch(R: float, resolution: int = 48) -> SampledSubmanifold:
    """Clifford torus in S^3 clipped to the ball of radius R about one of its points."""
    if not 0 < R < np.pi / 2:
        raise GeometryError("need 0 < R < pi/2")
    space = SpaceForm(1, 3)
    X, H = clifford_param()
    n = resolution + resolution % 2

    def build(t):
        # cos r = (cos u + cos v)/2 in torus parameters
        c2 = 2.0 * np.cos(t)
        vmax = np.arccos(c2 - 1.0)
        psi, wpsi = _legendre(n, -np.pi / 2, np.pi / 2)
        v = vmax * np.sin(psi)
        jac = vmax * np.cos(psi)
        U = np.arccos(np.clip(c2 - np.cos(v), -1.0, 1.0))
        u, wu = _legendre(n, -U, U)
        V = np.broadcast_to(v[:, None], u.shape)
        W = 0.5 * (wpsi * jac)[:, None] * wu
        pts = X(u, V).reshape(-1, 4)
        zeros = np.zeros_like(u)
        eu = np.stack([-np.sin(u), np.cos(u), zeros, zeros], axis=-1) @ H.T
        ev = np.stack([zeros, zeros, -np.sin(V), np.cos(V)], axis=-1) @ H.T
        frames = np.stack([eu, ev], axis=-2).reshape(-1, 2, 4)
        return SampledSubmanifold(space, 2, t, pts, frames, W.reshape(-1), f"clifford torus t={t:g}")

    def residual(x):
        z = H @ np.asarray(x, dtype=float)
        return float(abs(z[0] ** 2 + z[1] ** 2 - 0.5) + abs(z[2] ** 2 + z[3] ** 2 - 0.5))

    sub = build(R)
    sub.clip = build
    sub.residual = residual
    return sub


def _d1(f, h):
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def mean_curvature_fd(space: SpaceForm, param: Callable, u, v, h: float = 1e-3) -> np.ndarray:
    """|H| of a parametrized surface by fourth-order finite differences."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    x = param(u, v)
    xu = _d1(lambda d: param(u + d, v), h)
    xv = _d1(lambda d: param(u, v + d), h)
    x0 = 30 * x
    xuu = (-param(u + 2 * h, v) + 16 * param(u + h, v) - x0 + 16 * param(u - h, v) - param(u - 2 * h, v)) / (12 * h * h)
    xvv = (-param(u, v + 2 * h) + 16 * param(u, v + h) - x0 + 16 * param(u, v - h) - param(u, v - 2 * h)) / (12 * h * h)
    xuv = _d1(lambda d: _d1(lambda e: param(u + d, v + e), h), h)
    g11 = np.sum(xu * xu, -1)
    g12 = np.sum(xu * xv, -1)
    g22 = np.sum(xv * xv, -1)
    det = g11 * g22 - g12 * g12
    Hv = ((g22 * xuu.T - 2 * g12 * xuv.T + g11 * xvv.T) / det).T
    # remove components tangent to the surface and, on the sphere, along the position
    basis = [xu, xv] + ([x] if space.kappa == 1 else [])
    Q = np.stack(basis, axis=-1)
    gram = np.einsum("...ai,...aj->...ij", Q, Q)
    coef = np.linalg.solve(gram, np.einsum("...ai,...a->...i", Q, Hv)[..., None])[..., 0]
    Hn = Hv - np.einsum("...ai,...i->...a", Q, coef)
    return np.linalg.norm(Hn, axis=-1)


@dataclass
class MonotonicityReport:
    t_grid: np.ndarray
    values: np.ndarray
    min_forward_difference: float

    def __post_init__(self):
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("profile values must be finite")

    def nondecreasing(self, tol: float = 1e-6) -> bool:
        return self.min_forward_difference >= -tol


def _report(t, vals) -> MonotonicityReport:
    d = np.diff(vals)
    return MonotonicityReport(t, vals, float(d.min()) if d.size else np.inf)


def _check_grid(sub: SampledSubmanifold, t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or np.any(t <= 0):
        raise ValueError("t_grid must be a non-empty array of positive radii")
    if np.any(t > sub.R * (1 + 1e-12)):
        raise ValueError("t_grid exceeds the ball radius")
    return np.minimum(t, sub.R)


def weighted_area(sub: SampledSubmanifold, t: float, weighted: bool) -> float:
    s = sub.restrict(t)
    if len(s) == 0:
        return 0.0
    f = s.tangential_r_sq() if weighted else 1.0
    return float(np.sum(s.weights * f))


def Q_profile(space: SpaceForm, sub: SampledSubmanifold, t_grid, weighted: Optional[bool] = None) -> MonotonicityReport:
    """Q(t) = |Sigma cap B_t| / |B^k_t|; on the sphere the area integrand is |grad^T r|^2."""
    t = _check_grid(sub, t_grid)
    if weighted is None:
        weighted = space.kappa == 1
    ctx = ProfileContext(space.kappa, sub.k)
    vals = np.array([weighted_area(sub, ti, weighted) / disk_area(ctx, ti) for ti in t])
    return _report(t, vals)


def Qpartial_profile(space: SpaceForm, sub: SampledSubmanifold, t_grid, eps: Optional[float] = None) -> MonotonicityReport:
    """Q_d(t) = (1/|dB^k_t|) int over Sigma cap dB_t of |grad^T r|.

    By the co-area formula the slice integral is the t-derivative of
    I(t) = int over Sigma cap B_t of |grad^T r|^2, taken by a centred band difference.
    """
    t = _check_grid(sub, t_grid)
    if eps is None:
        eps = 1e-5 * sub.R if sub.clip is not None else 0.02 * sub.R
    if eps <= 0 or eps >= 0.25 * t.min() + 0.25 * sub.R:
        raise ValueError("band width degenerate")
    ctx = ProfileContext(space.kappa, sub.k)

    def I(tt):
        return weighted_area(sub, tt, True)

    vals = []
    for ti in t:
        if ti + eps <= sub.R:
            lo = max(ti - eps, 0.0)
            d = (I(ti + eps) - I(lo)) / (ti + eps - lo)
        else:
            d = (3 * I(ti) - 4 * I(ti - eps) + I(ti - 2 * eps)) / (2 * eps)
        vals.append(d / (sphere_measure(sub.k) * Aprime_fun(ctx, ti)))
    return _report(t, np.array(vals))


def prescribed_point_check(space: SpaceForm, sub: SampledSubmanifold, y, k: Optional[int] = None,
                           rel_tol: float = 1e-4, on_tol: float = 1e-8):
    """(area, bound, passed) for the lower bound |Sigma| >= |B^k_{r_under(y)}|."""
    k = sub.k if k is None else k
    if k != sub.k:
        raise ValueError("k does not match the submanifold dimension")
    if sub.residual is None:
        raise GeometryError("submanifold carries no membership test for y")
    if sub.residual(y) > on_tol:
        raise GeometryError("y does not lie on the submanifold")
    s_y = float(distance(space, space.origin(), np.asarray(y, dtype=float)))
    r_under = underline_r(space.kappa, BallData(sub.R, s_y))
    bound = disk_area(ProfileContext(space.kappa, k), r_under)
    area = sub.area
    return area, bound, bool(area >= bound * (1.0 - rel_tol))
