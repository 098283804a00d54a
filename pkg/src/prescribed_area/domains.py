"""Rotationally symmetric domains over the axis: profiles R(s), their differential
inequality, the hemisphere wedge, and equality-case ("optimal") profiles.

A domain is described by the radius R(s) of its slice orthogonal to the axis at
signed position s.  The distance u(s) from y to the slice boundary satisfies
cs(u) = cs(s - s_y) cs(R(s)).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .profiles import BallData, half_diam, underline_r

FLOAT_FMT = ".17g"


class DomainError(ValueError):
    pass


def _arr(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _ret(out, like):
    return float(out[0]) if np.ndim(like) == 0 else out


@dataclass
class DomainProfile:
    interval: tuple
    Rfun: Callable
    s_y: float
    kappa: int
    k: int
    Rprime: Optional[Callable] = field(default=None, repr=False)
    Fprime: Optional[Callable] = field(default=None, repr=False)
    kind: str = "general"
    ufun: Optional[Callable] = field(default=None, repr=False)
    uprime_fun: Optional[Callable] = field(default=None, repr=False)
    ball_R: Optional[float] = None
    termination: dict = field(default_factory=dict)
    delta_sensitivity: Optional[float] = None

    def __post_init__(self):
        a, b = self.interval
        if not a < self.s_y < b:
            raise DomainError("s_y must lie inside the profile interval")
        if self.kappa not in (-1, 0, 1):
            raise DomainError("kappa must be -1, 0 or 1")

    def R(self, s):
        return self.Rfun(s)


def ball_profile(kappa: int, R: float, s_y: float, k: int = 2) -> DomainProfile:
    """Slice radii of the ball of radius R about o: cs(Rbar(s)) = cs(R)/cs(s)."""
    if not 0 < R < half_diam(kappa):
        raise DomainError("need 0 < R < diam/2")
    cR = float(K.cs(kappa, _arr(R))[0])

    def Rfun(s):
        s = _arr(s)
        if kappa == 0:
            out = np.sqrt(np.maximum((R - s) * (R + s), 0.0))
        else:
            out = K.acs(kappa, cR / K.cs(kappa, s))
        return _ret(out, s)

    def Rprime(s):
        s = _arr(s)
        Rb = _arr(Rfun(s))
        if kappa == 0:
            return -s / Rb
        c = K.cs(kappa, s)
        return -cR * K.sn(kappa, s) / (K.sn(kappa, Rb) * c * c)

    def Fprime(s):
        return K.Fprime_ball(kappa, k, R, s_y, _arr(s))

    return DomainProfile((-R, R), Rfun, s_y, kappa, k, Rprime, Fprime, kind="ball", ball_R=R)


def u_general(profile: DomainProfile, s):
    """Distance from y to the boundary of the slice at s."""
    s0 = s
    s = _arr(s)
    a, b = profile.interval
    if np.any(s < a) or np.any(s > b):
        raise DomainError("s outside the profile interval")
    kap = profile.kappa
    Rs = _arr(profile.Rfun(s))
    d = s - profile.s_y
    if kap == 0:
        return _ret(np.sqrt(Rs * Rs + d * d), s0)
    arg = K.cs(kap, d) * K.cs(kap, Rs)
    if kap == 1 and np.any(arg <= -1 - 1e-12):
        raise DomainError("branch violation in cs^-1")
    return _ret(K.acs(kap, arg), s0)


def _uprime(profile: DomainProfile, s, u):
    kap = profile.kappa
    d = s - profile.s_y
    Rs = _arr(profile.Rfun(s))
    Rp = _arr(profile.Rprime(s))
    if kap == 0:
        return (d + Rs * Rp) / u
    return (K.sn(kap, d) * K.cs(kap, Rs) + K.cs(kap, d) * K.sn(kap, Rs) * Rp) / K.sn(kap, u)


def _fd_step(profile: DomainProfile, s, h: float, reach: int):
    """Step h, shrunk so that s +- reach * h stays inside the interval."""
    a, b = profile.interval
    return np.minimum(h, np.minimum(s - a, b - s) / (reach + 0.5))


def _F_general(profile: DomainProfile, s):
    s = _arr(s)
    u = _arr(u_general(profile, s))
    if profile.Rprime is not None:
        up = _uprime(profile, s, u)
    else:
        h = _fd_step(profile, s, 1e-5, 1)
        up = (_arr(u_general(profile, s + h)) - _arr(u_general(profile, s - h))) / (2 * h)
    c = K.cs(profile.kappa, s - profile.s_y)
    return K.area_Ap(profile.kappa, profile.k, u) * up * c * c


def odi_terms(profile: DomainProfile, s, printed: bool = False):
    """(coefficient * u'^2, B(u) - B(|s - s_y|), F', finite_differences_used)."""
    s = _arr(s)
    kap, k = profile.kappa, profile.k
    d = s - profile.s_y
    if np.any(np.abs(d) <= 1e-6):
        raise DomainError("odi_lhs is singular at s_y")
    fd = profile.Rprime is None and profile.uprime_fun is None
    if profile.ufun is not None:
        u = _arr(profile.ufun(s))
        up = _arr(profile.uprime_fun(s))
    elif not fd:
        u = _arr(u_general(profile, s))
        up = _uprime(profile, s, u)
    else:
        u = _arr(u_general(profile, s))
        h = _fd_step(profile, s, 1e-5, 1)
        up = (_arr(u_general(profile, s + h)) - _arr(u_general(profile, s - h))) / (2 * h)
    if profile.Fprime is not None:
        Fp = _arr(profile.Fprime(s))
    else:
        fd = True
        h = _fd_step(profile, s, 1e-4, 2)
        Fp = (-_F_general(profile, s + 2 * h) + 8 * _F_general(profile, s + h)
              - 8 * _F_general(profile, s - h) + _F_general(profile, s - 2 * h)) / (12 * h)
    if printed:
        coef = (K.cs(kap, s) / K.cs(kap, _arr(profile.Rfun(s)))) ** 2
    else:
        coef = (K.cs(kap, d) / K.cs(kap, u)) ** 2
    D = K.func_B(kap, k, u) - K.func_B(kap, k, np.abs(d))
    return coef * up * up, D, Fp, fd


def odi_lhs(profile: DomainProfile, s, printed: bool = False):
    """cs(s-s_y)^2/cs(u)^2 u'^2 + (B(u) - B(|s-s_y|)) (A'(u) u' cs(s-s_y)^2)'.

    With printed=True the first coefficient is cs(s)^2/cs(R(s))^2, the ball factor read
    with R the slice radius.  On a ball, where cs(Rbar(s)) = cs(R)/cs(s), that reading is
    the general coefficient times cs(s)^2, so the two agree only for kappa = 0.
    """
    first, D, Fp, _ = odi_terms(profile, s, printed)
    return _ret(first + D * Fp, s)


@dataclass
class Admissibility:
    ok: bool
    min_lhs: float
    argmin_s: float
    finite_differences: bool = False

    def __iter__(self):
        return iter((self.ok, self.min_lhs, self.argmin_s))


def default_grid(profile: DomainProfile, m: int = 2000, wedge: bool = False) -> np.ndarray:
    a, b = profile.interval
    if wedge:
        if profile.kappa != 1:
            raise DomainError("the wedge is defined on the sphere only")
        a = max(a, profile.s_y - np.pi / 2)
    span = b - a
    s = np.linspace(a + 1e-9 * span, b - 1e-9 * span, m)
    off = np.geomspace(1e-6, 0.5 * span, 60)
    s = np.concatenate([s, profile.s_y - off, profile.s_y + off])
    s = s[(s > a) & (s < b) & (np.abs(s - profile.s_y) > 1e-6)]
    return np.unique(s)


def profile_admissible(profile: DomainProfile, grid=None, tol: float = 1e-9, printed: bool = False,
                       wedge: bool = False) -> Admissibility:
    """Sign verdict for the differential inequality on a grid punctured at s_y.

    For k >= 2 the term B(|s - s_y|) diverges at s_y, so the limit there has the sign
    of F'(s_y); a negative sign makes the inequality fail arbitrarily close to y.
    """
    s = default_grid(profile, wedge=wedge) if grid is None else _arr(grid)
    s = s[np.abs(s - profile.s_y) > 1e-6]
    first, D, Fp, fd = odi_terms(profile, s, printed)
    second = D * Fp
    lhs = first + second
    # near a tip where R -> 0 both terms blow up; a sum within rounding of their size is zero
    lhs = np.where(np.abs(lhs) <= 8 * np.finfo(float).eps * (np.abs(first) + np.abs(second)), 0.0, lhs)
    i = int(np.argmin(lhs))
    best, arg = float(lhs[i]), float(s[i])
    if profile.k >= 2 and profile.kind == "ball":
        if float(_arr(profile.Fprime(profile.s_y))[0]) < 0:
            best, arg = -np.inf, profile.s_y
    return Admissibility(best >= -tol, best, arg, fd)


@dataclass
class WedgeResult:
    r_under: float
    r_over: float
    obstruction: bool


def wedge_compare(R: float, s_y: float) -> WedgeResult:
    """Orthogonal disk radius versus the axis-containing disk radius in the wedge."""
    if not 0 < s_y < R < np.pi / 2:
        raise DomainError("need 0 < s_y < R < pi/2")
    r_under = underline_r(1, BallData(R, s_y))
    r_over = 0.5 * (R + np.pi / 2 - s_y)
    return WedgeResult(r_under, float(r_over), bool(s_y + R > np.pi / 2 and r_over < r_under))


def matching_ball_radius(kappa: int, R0: float, s_y: float) -> float:
    """Radius of the ball about o whose orthogonal disk through y has radius R0."""
    if kappa == 0:
        return float(np.hypot(R0, s_y))
    return float(K.acs(kappa, K.cs(kappa, _arr(R0)) * K.cs(kappa, _arr(s_y)))[0])


def _start_slope(kappa, k, Rb, s_y) -> float:
    """F'(s_y) of the equality case: zero for k >= 2, where B(|s - s_y|) diverges."""
    if k >= 2:
        return 0.0
    sa = _arr(s_y)
    up = float(K.uprime_ball(kappa, Rb, s_y, sa)[0])
    u = float(K.u_ball(kappa, Rb, s_y, sa)[0])
    cu = float(K.cs(kappa, _arr(u))[0])
    return -(up * up) / (cu * cu) / float(K.func_B(kappa, k, _arr(u))[0])


def _integrate(kappa, k, s_y, R0, direction, delta, rtol, atol):
    Rb = matching_ball_radius(kappa, R0, s_y)
    s0 = s_y + direction * delta
    u0 = float(K.u_ball(kappa, Rb, s_y, _arr(s0))[0])
    F0 = float(K.F_ball(kappa, k, Rb, s_y, _arr(s_y))[0]) + direction * delta * _start_slope(kappa, k, Rb, s_y)

    def rhs(s, y):
        u, F = y
        d = s - s_y
        cd = float(K.cs(kappa, _arr(d))[0])
        ua = _arr(u)
        up = F / (float(K.area_Ap(kappa, k, ua)[0]) * cd * cd)
        D = float(K.func_B(kappa, k, ua)[0] - K.func_B(kappa, k, _arr(abs(d)))[0])
        cu = float(K.cs(kappa, ua)[0])
        return [up, -(cd * cd) / (cu * cu) * up * up / D]

    def hits_axis(s, y):
        return y[0] - abs(s - s_y) - 1e-9
    hits_axis.terminal = True

    events = [hits_axis]
    if kappa == 1:
        def leaves_branch(s, y):
            return np.cos(y[0]) - 1e-9
        leaves_branch.terminal = True

        def hemisphere(s, y):
            return np.cos(s - s_y) - 1e-9
        hemisphere.terminal = True
        events += [leaves_branch, hemisphere]
        span = np.pi
    else:
        span = 4.0 * Rb + 2.0
    sol = solve_ivp(rhs, (s0, s_y + direction * span), [u0, F0], method="DOP853", rtol=rtol, atol=atol,
                    events=events, dense_output=True)
    names = ["R reached 0", "u left its branch", "reached the hemisphere boundary"]
    reason = "span exhausted"
    for name, ev in zip(names, sol.t_events):
        if len(ev):
            reason = name
    if sol.status == -1:
        gap = sol.y[0, -1] - abs(sol.t[-1] - s_y)
        reason = "R reached 0" if gap < 1e-4 else "integrator failure: " + sol.message
    return sol, reason, Rb


def optimal_profile(kappa: int, k: int, s_y: float, R0: float, delta: float = 1e-4, rtol: float = 1e-10,
                    atol: float = 1e-12, sensitivity: bool = True) -> DomainProfile:
    """Equality case of the differential inequality, integrated outward from s_y.

    State (u, F) with F = A'(u) u' cs(s-s_y)^2 and F' = -(cs(s-s_y)^2/cs(u)^2) u'^2 / (B(u) - B(|s-s_y|)).
    The start is fixed by R(s_y) = R0 together with the slope of the ball whose
    orthogonal disk through y has radius R0.
    """
    if not 0 < R0 < half_diam(kappa):
        raise DomainError("need 0 < R0 < diam/2")
    if not 0 < s_y < half_diam(kappa):
        raise DomainError("need 0 < s_y < diam/2")
    if k < 1:
        raise DomainError("k must be >= 1")
    hi, why_hi, Rb = _integrate(kappa, k, s_y, R0, +1, delta, rtol, atol)
    lo, why_lo, _ = _integrate(kappa, k, s_y, R0, -1, delta, rtol, atol)
    if hi.t.size < 2 or lo.t.size < 2:
        raise DomainError("equality ODE degenerates at s_y")
    a, b = float(lo.t[-1]), float(hi.t[-1])
    sa, sb = s_y - delta, s_y + delta
    F_sy = float(K.F_ball(kappa, k, Rb, s_y, _arr(s_y))[0])
    slope = _start_slope(kappa, k, Rb, s_y)

    def state(s):
        s = _arr(s)
        out = np.empty((2, s.size))
        m_hi = s >= sb
        m_lo = s <= sa
        mid = ~(m_hi | m_lo)
        if m_hi.any():
            out[:, m_hi] = hi.sol(s[m_hi])
        if m_lo.any():
            out[:, m_lo] = lo.sol(s[m_lo])
        if mid.any():
            # local expansion about s_y, as used for the initial values
            out[0, mid] = K.u_ball(kappa, Rb, s_y, s[mid])
            out[1, mid] = F_sy + (s[mid] - s_y) * slope
        return out

    def Rfun(s):
        s0 = s
        s = _arr(s)
        u = state(s)[0]
        d = s - s_y
        if kappa == 0:
            out = np.sqrt(np.maximum(u * u - d * d, 0.0))
        else:
            out = K.acs(kappa, K.cs(kappa, u) / K.cs(kappa, d))
        return _ret(out, s0)

    def uprime(s, st):
        c = K.cs(kappa, s - s_y)
        return st[1] / (K.area_Ap(kappa, k, st[0]) * c * c)

    def Rprime(s):
        s = _arr(s)
        st = state(s)
        u, up = st[0], uprime(s, st)
        d = s - s_y
        Rs = _arr(Rfun(s))
        if kappa == 0:
            return (u * up - d) / Rs
        return (K.sn(kappa, u) * up - K.sn(kappa, d) * K.cs(kappa, Rs)) / (K.cs(kappa, d) * K.sn(kappa, Rs))

    def Fprime(s):
        s = _arr(s)
        st = state(s)
        up = uprime(s, st)
        d = s - s_y
        c = K.cs(kappa, d)
        D = K.func_B(kappa, k, st[0]) - K.func_B(kappa, k, np.abs(d))
        return -(c * c) / K.cs(kappa, st[0]) ** 2 * up * up / D

    def ufun(s):
        return state(_arr(s))[0]

    def uprime_fun(s):
        s = _arr(s)
        return uprime(s, state(s))

    prof = DomainProfile((a, b), Rfun, s_y, kappa, k, Rprime, Fprime, kind="optimal", ball_R=Rb,
                         termination={"lower": why_lo, "upper": why_hi}, ufun=ufun, uprime_fun=uprime_fun)
    if sensitivity:
        other = optimal_profile(kappa, k, s_y, R0, delta / 10, rtol, atol, sensitivity=False)
        lo_c, hi_c = max(a, other.interval[0]), min(b, other.interval[1])
        grid = np.linspace(lo_c, hi_c, 401)[1:-1]
        prof.delta_sensitivity = float(np.max(np.abs(_arr(Rfun(grid)) - _arr(other.Rfun(grid)))))
    return prof


def containment_gap(profile: DomainProfile, outer: DomainProfile, m: int = 2001) -> float:
    """max of R(s) - R_outer(s) over the common interval (<= 0 means contained)."""
    a = max(profile.interval[0], outer.interval[0])
    b = min(profile.interval[1], outer.interval[1])
    if not a < b:
        raise DomainError("profiles share no interval")
    s = np.linspace(a, b, m)
    return float(np.max(_arr(profile.Rfun(s)) - _arr(outer.Rfun(s))))


def profile_to_csv(profile: DomainProfile, fh, m: int = 501) -> None:
    a, b = profile.interval
    s = np.linspace(a, b, m + 2)[1:-1]
    s = s[np.abs(s - profile.s_y) > 1e-6]
    Rs = _arr(profile.Rfun(s))
    u = _arr(u_general(profile, s))
    lhs = _arr(odi_lhs(profile, s))
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["s", "R", "u", "odi_lhs"])
    for row in zip(s, Rs, u, lhs):
        w.writerow([format(float(v), FLOAT_FMT) for v in row])
