"""Exact-model geometry of the space forms H^n, R^n and S^n.

Points are numpy arrays in model coordinates: the unit sphere in R^{n+1}
(kappa=+1), the upper sheet of the hyperboloid <x,x> = -1 in Minkowski space
R^{1,n} (kappa=-1), and plain R^n (kappa=0). Tangent vectors are arrays of the
same length, orthogonal to their base point under the model form. All
functions broadcast over leading axes.

The axis chart is canonical: the centre o is e0 (the origin for kappa=0) and
the axis geodesic through o and y leaves o along e1 (e0 for kappa=0).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as K

POINT_TOL = 1e-12
FRAME_TOL = 1e-10


class GeometryError(ValueError):
    """Invalid point, vector or configuration for the model."""


class SingularPointError(GeometryError):
    """A gradient or field was requested where it is not defined."""


class FootPointError(GeometryError):
    """The foot point on the axis is not unique (exceptional set)."""


@dataclass(frozen=True)
class SpaceForm:
    kappa: int
    n: int

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise GeometryError(f"kappa must be -1, 0 or 1, got {self.kappa}")
        if self.n < 2:
            raise GeometryError(f"ambient dimension must be >= 2, got {self.n}")

    @property
    def diam(self) -> float:
        return np.pi if self.kappa == 1 else np.inf

    @property
    def half_diam(self) -> float:
        return 0.5 * self.diam

    @property
    def ncoords(self) -> int:
        return self.n if self.kappa == 0 else self.n + 1

    @property
    def axis_index(self) -> int:
        return 0 if self.kappa == 0 else 1

    def origin(self) -> np.ndarray:
        o = np.zeros(self.ncoords)
        if self.kappa != 0:
            o[0] = 1.0
        return o

    def axis(self) -> np.ndarray:
        e = np.zeros(self.ncoords)
        e[self.axis_index] = 1.0
        return e

    def sn(self, r):
        return _trig(K.sn, self.kappa, r)

    def cs(self, r):
        return _trig(K.cs, self.kappa, r)


def _trig(fn, kappa, r):
    r = np.asarray(r, dtype=float)
    return fn(kappa, r.reshape(-1)).reshape(r.shape)


def inner(space: SpaceForm, a, b) -> np.ndarray:
    """Model bilinear form (Minkowski for kappa=-1, Euclidean otherwise)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.sum(a * b, axis=-1)
    if space.kappa == -1:
        out = out - 2.0 * a[..., 0] * b[..., 0]
    return out


def norm(space: SpaceForm, v) -> np.ndarray:
    return np.sqrt(np.maximum(inner(space, v, v), 0.0))


def check_point(space: SpaceForm, x, tol: float = POINT_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.ncoords:
        raise GeometryError(f"expected {space.ncoords} coordinates, got {x.shape[-1]}")
    if space.kappa != 0:
        err = np.abs(inner(space, x, x) - space.kappa)
        if np.any(err > tol * np.maximum(1.0, np.abs(x[..., 0]) ** 2)):
            raise GeometryError("point violates the model constraint")
        if space.kappa == -1 and np.any(x[..., 0] <= 0):
            raise GeometryError("hyperboloid point must lie on the upper sheet")
    return x


def check_tangent(space: SpaceForm, x, v, tol: float = POINT_TOL) -> None:
    if space.kappa == 0:
        return
    scale = np.maximum(1.0, np.abs(np.asarray(x)[..., 0]) * np.abs(np.asarray(v)).max(axis=-1))
    if np.any(np.abs(inner(space, x, v)) > tol * scale):
        raise GeometryError("vector is not tangent at its base point")


def to_tangent(space: SpaceForm, x, v) -> np.ndarray:
    """Orthogonal projection of an ambient vector onto T_x M."""
    if space.kappa == 0:
        return np.asarray(v, dtype=float)
    c = inner(space, x, v) * space.kappa
    return v - c[..., None] * x


def distance(space: SpaceForm, x, z) -> np.ndarray:
    """Geodesic distance, through chordal formulas that stay accurate for close points."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    d = x - z
    if space.kappa == 0:
        return np.linalg.norm(d, axis=-1)
    if space.kappa == 1:
        return 2.0 * np.arctan2(np.linalg.norm(d, axis=-1), np.linalg.norm(x + z, axis=-1))
    return 2.0 * np.arcsinh(0.5 * norm(space, d))


def exp_map(space: SpaceForm, x, v, t=1.0) -> np.ndarray:
    """Point at distance t along the unit-speed geodesic from x with velocity v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(norm(space, v) - 1.0) > 1e-10):
        raise GeometryError("exp_map expects a unit tangent vector")
    t = np.asarray(t, dtype=float)[..., None]
    if space.kappa == 0:
        return x + t * v
    return space.cs(t) * x + space.sn(t) * v


def geodesic_velocity(space: SpaceForm, x, v, t=1.0) -> np.ndarray:
    t = np.asarray(t, dtype=float)[..., None]
    if space.kappa == 0:
        return np.broadcast_to(v, np.broadcast_shapes(np.shape(v), np.shape(x), t.shape)).copy()
    return -space.kappa * space.sn(t) * x + space.cs(t) * v


def grad_r(space: SpaceForm, z, x) -> np.ndarray:
    """Unit gradient at x of the distance function to z."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if space.kappa == 0:
        w = x - z
    else:
        w = space.kappa * inner(space, x, z)[..., None] * x - z
    nw = norm(space, w)
    if np.any(nw < 1e-14):
        raise SingularPointError("gradient of r_z undefined at z or its antipode")
    return w / nw[..., None]


@dataclass(frozen=True)
class AxisChart:
    """Signed axis coordinate s and axis distance rho about the geodesic through o and y."""

    space: SpaceForm
    s_y: float

    def __post_init__(self):
        if not self.s_y > 0:
            raise GeometryError("s_y must be positive")

    @property
    def origin(self) -> np.ndarray:
        return self.space.origin()

    @property
    def axis(self) -> np.ndarray:
        return self.space.axis()

    @property
    def y(self) -> np.ndarray:
        return self.gamma(self.s_y)

    def gamma(self, t) -> np.ndarray:
        return exp_map(self.space, self.origin, self.axis, t)

    def gamma_velocity(self, t) -> np.ndarray:
        return geodesic_velocity(self.space, self.origin, self.axis, t)


def _split(space: SpaceForm, x):
    i = space.axis_index
    x0 = x[..., 0] if space.kappa != 0 else None
    return x0, x[..., i], x[..., i + 1:]


def axis_coords(chart: AxisChart, x):
    """Return (s, rho) for points x outside the exceptional set."""
    space = chart.space
    x = np.asarray(x, dtype=float)
    x0, xa, xp = _split(space, x)
    perp = np.linalg.norm(xp, axis=-1)
    if space.kappa == 0:
        return xa * 1.0, perp
    if space.kappa == 1:
        p = np.hypot(x0, xa)
        if np.any(p < 1e-12) or np.any((x0 < 0) & (np.abs(xa) < 1e-12) & (perp < 1e-12)):
            raise FootPointError("foot point undefined (rho = pi/2 or antipode of o)")
        return np.arctan2(xa, x0), np.arctan2(perp, p)
    return 0.5 * np.log((x0 + xa) / (x0 - xa)), np.arcsinh(perp)


def axis_fields(chart: AxisChart, x):
    """Return (grad_s, grad_rho, killing) at x.

    grad_rho is NaN on the axis itself, where rho is not differentiable.
    """
    space = chart.space
    x = np.asarray(x, dtype=float)
    s, rho = axis_coords(chart, x)
    kill = np.zeros_like(x)
    i = space.axis_index
    if space.kappa == 0:
        kill[..., i] = 1.0
        denom = np.ones_like(s)
    else:
        x0, xa = x[..., 0], x[..., 1]
        kill[..., 0] = -space.kappa * xa
        kill[..., 1] = x0
        denom = x0 * x0 + space.kappa * xa * xa
    grad_s = kill / denom[..., None]
    xp = x[..., i + 1:]
    perp = np.linalg.norm(xp, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.zeros_like(x)
        w[..., i + 1:] = xp / perp[..., None]
        grad_rho = space.cs(rho)[..., None] * w
        if space.kappa != 0:
            grad_rho = grad_rho - space.kappa * space.sn(rho)[..., None] * chart.gamma(s)
    grad_rho = np.where((perp > 0)[..., None], grad_rho, np.nan)
    return grad_s, grad_rho, kill


def tangent_basis(space: SpaceForm, x) -> np.ndarray:
    """Orthonormal basis of T_x M, shape (..., n, ncoords)."""
    x = np.asarray(x, dtype=float)
    n = space.n
    lead = x.shape[:-1]
    if space.kappa == 0:
        return np.broadcast_to(np.eye(n), lead + (n, n)).copy()
    xt = x[..., 1:]
    basis = np.zeros(lead + (n, n + 1))
    basis[..., :, 0] = -space.kappa * xt
    basis[..., :, 1:] = np.eye(n) - space.kappa * xt[..., :, None] * xt[..., None, :] / (1.0 + x[..., 0])[..., None, None]
    return basis


@dataclass
class KPlane:
    base: np.ndarray
    frame: np.ndarray  # (..., k, ncoords)

    @property
    def k(self) -> int:
        return self.frame.shape[-2]


def gram(space: SpaceForm, frame) -> np.ndarray:
    f = np.asarray(frame, dtype=float)
    if space.kappa == -1:
        g = f.copy()
        g[..., 0] *= -1.0
        return np.einsum("...ia,...ja->...ij", g, f)
    return np.einsum("...ia,...ja->...ij", f, f)


def random_kplane(space: SpaceForm, x, k: int, seed=None) -> KPlane:
    """Haar-random orthonormal k-frames in T_x M, deterministic per seed."""
    if not 1 <= k <= space.n - 1:
        raise GeometryError(f"k must lie in [1, n-1], got {k}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = np.asarray(x, dtype=float)
    g = rng.standard_normal(x.shape[:-1] + (space.n, k))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[..., None, :]
    frame = np.einsum("...ik,...ia->...ka", q, tangent_basis(space, x))
    return KPlane(base=x, frame=frame)


def tangential_sq(space: SpaceForm, frame, v) -> np.ndarray:
    """|v^T|^2 for the projection of v onto the span of an orthonormal frame."""
    c = inner(space, np.asarray(frame), np.asarray(v)[..., None, :])
    return np.sum(c * c, axis=-1)


def normal_sq(space: SpaceForm, frame, v) -> np.ndarray:
    """|v - v^T|^2, formed from the residual so that v nearly in the span gives nearly 0."""
    frame = np.asarray(frame)
    v = np.asarray(v)
    c = inner(space, frame, v[..., None, :])
    resid = v - np.sum(c[..., None] * frame, axis=-2)
    return np.maximum(inner(space, resid, resid), 0.0)


def directional_div_term(space: SpaceForm, field: Callable, x, e, h: float = 1e-4) -> np.ndarray:
    """g(nabla_e field, e) by Richardson-extrapolated central differences along the geodesic."""
    if not 0 < h <= 1e-2:
        raise ValueError("step h must lie in (0, 1e-2]")
    x = np.asarray(x, dtype=float)
    e = np.asarray(e, dtype=float)

    def phi(t):
        tt = np.full(x.shape[:-1], t)
        p = exp_map(space, x, e, tt)
        return inner(space, field(p), geodesic_velocity(space, x, e, tt))

    d1 = (phi(h) - phi(-h)) / (2 * h)
    d2 = (phi(h / 2) - phi(-h / 2)) / h
    return (4.0 * d2 - d1) / 3.0
