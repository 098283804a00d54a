"""Scalar profile functions: sn/cs/tn/ct, A, G, B, the ball radius r_under,
the boundary-matched function u(s) and F(s) = A'(u) u' cs(s - s_y)^2.

All functions accept scalars or arrays and return the same shape.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from . import _kernels as K


class ProfileDomainError(ValueError):
    """Argument outside the natural domain of a profile function."""


@dataclass(frozen=True)
class ProfileContext:
    kappa: int
    k: int

    def __post_init__(self):
        if self.kappa not in (-1, 0, 1):
            raise ProfileDomainError(f"kappa must be -1, 0 or 1, got {self.kappa}")
        if self.k < 1:
            raise ProfileDomainError(f"k must be >= 1, got {self.k}")

    @property
    def half_diam(self) -> float:
        return half_diam(self.kappa)


@dataclass(frozen=True)
class BallData:
    R: float
    s_y: float

    def validate(self, kappa: int) -> "BallData":
        if not 0 < self.s_y < self.R < half_diam(kappa):
            raise ProfileDomainError(f"need 0 < s_y < R < diam/2, got s_y={self.s_y}, R={self.R}")
        return self


def half_diam(kappa: int) -> float:
    return pi / 2 if kappa == 1 else np.inf


def _apply(fn, x, *args):
    arr = np.asarray(x, dtype=float)
    out = fn(*args, np.ascontiguousarray(arr.reshape(-1)))
    if isinstance(out, tuple):
        return tuple(_shape(o, arr) for o in out)
    return _shape(out, arr)


def _shape(out, arr):
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def _check_radius(kappa, r, closed=False):
    """Open interval (0, diam/2); ``closed`` admits both endpoints (A and A' only)."""
    r = np.asarray(r, dtype=float)
    ok = (r >= 0) & (r <= half_diam(kappa)) if closed else (r > 0) & (r < half_diam(kappa))
    if not np.all(ok):
        raise ProfileDomainError("radius outside (0, diam/2)")


_TRIG = {"sn": K.sn, "cs": K.cs, "tn": K.tn, "ct": K.ct}


def trig(kappa: int, kind: str, r):
    """The warping function sn and its companions cs = sn', tn = sn/cs, ct = 1/tn."""
    if kind not in _TRIG:
        raise ProfileDomainError(f"unknown kind {kind!r}")
    if kind == "ct":
        ra = np.asarray(r, dtype=float)
        bad = np.mod(ra, pi) == 0 if kappa == 1 else ra == 0
        if np.any(bad):
            raise ProfileDomainError("ct undefined at multiples of pi")
    if kind == "tn" and kappa == 1 and np.any(np.cos(np.asarray(r, dtype=float)) == 0):
        raise ProfileDomainError("tn undefined where cs vanishes")
    return _apply(_TRIG[kind], r, kappa)


def A_fun(ctx: ProfileContext, r):
    """A(r) = integral_0^r sn(t)^(k-1) dt."""
    _check_radius(ctx.kappa, r, closed=True)
    return _apply(K.area_A, r, ctx.kappa, ctx.k)


def Aprime_fun(ctx: ProfileContext, r):
    _check_radius(ctx.kappa, r, closed=True)
    return _apply(K.area_Ap, r, ctx.kappa, ctx.k)


def G_fun(ctx: ProfileContext, r):
    """Radial fundamental solution with G' = 1/A' (log r for k=2 flat, r for k=1)."""
    _check_radius(ctx.kappa, r)
    return _apply(K.func_G, r, ctx.kappa, ctx.k)


def B_fun(ctx: ProfileContext, r):
    """B with B' = 1/(cs^2 A'), normalised to vanish at diam/4 (tn for k=1, log r flat k=2)."""
    _check_radius(ctx.kappa, r)
    return _apply(K.func_B, r, ctx.kappa, ctx.k)


def Bprime_fun(ctx: ProfileContext, r):
    _check_radius(ctx.kappa, r)
    return _apply(K.func_Bp, r, ctx.kappa, ctx.k)


def sphere_measure(k: int) -> float:
    """|S^{k-1}|, the volume of the unit (k-1)-sphere."""
    return 2.0 * pi ** (k / 2) / gamma(k / 2)


def disk_area(ctx: ProfileContext, r):
    """Area of a totally geodesic k-disk of radius r."""
    return A_fun(ctx, r) * sphere_measure(ctx.k)


def underline_r(kappa: int, ball: BallData) -> float:
    """Radius of the totally geodesic disk through y orthogonal to the axis."""
    R, s_y = ball.R, ball.s_y
    if not 0 <= s_y < R < half_diam(kappa):
        raise ProfileDomainError("need 0 <= s_y < R < diam/2")
    if s_y == 0:
        return float(R)
    if kappa == 0:
        return float(np.sqrt((R - s_y) * (R + s_y)))
    c = K.cs(kappa, np.array([R, s_y]))
    return float(K.acs(kappa, np.array([c[0] / c[1]]))[0])


def _check_s(ball: BallData, s):
    if np.any(np.abs(np.asarray(s, dtype=float)) > ball.R * (1 + 1e-12)):
        raise ProfileDomainError("s outside [-R, R]")


def u_ball(kappa: int, ball: BallData, s):
    """u(s): the value of r_y on the boundary slice {s} of the ball."""
    _check_s(ball, s)
    return _apply(K.u_ball, s, kappa, ball.R, ball.s_y)


def uprime_ball(kappa: int, ball: BallData, s):
    _check_s(ball, s)
    return _apply(K.uprime_ball, s, kappa, ball.R, ball.s_y)


def F_fun(ctx: ProfileContext, ball: BallData, s):
    _check_s(ball, s)
    return _apply(K.F_ball, s, ctx.kappa, ctx.k, ball.R, ball.s_y)


def Fprime_closed(ctx: ProfileContext, ball: BallData, s):
    """F'(s) = sn(u)^(k-4) cs(u) sn(s_y)^2 (k cs(u)^2 - 2) / cs(s)^2."""
    _check_s(ball, s)
    return _apply(K.Fprime_ball, s, ctx.kappa, ctx.k, ball.R, ball.s_y)
