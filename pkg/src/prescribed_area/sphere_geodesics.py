"""Geodesic chords through a prescribed point of a ball in the round sphere.

A great circle through y meets the axis at angle alpha (measured from the direction
toward o); its two arcs from y to the boundary have lengths l(alpha) and l(pi - alpha)
fixed by the spherical law of cosines.  The total length is minimal at alpha = pi/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, golden


@dataclass(frozen=True)
class ChordProblem:
    s_y: float
    R: float

    def __post_init__(self):
        if not 0 < self.s_y < self.R < np.pi / 2:
            raise ValueError("need 0 < s_y < R < pi/2")

    @property
    def C(self) -> float:
        """cos of the radius of the orthogonal chord's half length."""
        return float(np.cos(self.R) / np.cos(self.s_y))

    @property
    def r_under(self) -> float:
        return float(np.arccos(self.C))


def l_of_alpha(p: ChordProblem, alpha):
    """Smallest l > 0 with cos R = cos(s_y) cos(l) + sin(s_y) sin(l) cos(alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha < 0) or np.any(alpha > np.pi):
        raise ValueError("alpha must lie in [0, pi]")
    a = np.cos(p.s_y)
    b = np.sin(p.s_y) * np.cos(alpha)
    amp = np.hypot(a, b)
    q = np.cos(p.R) / amp
    assert np.all(np.abs(q) <= 1.0), "no boundary crossing"
    out = np.arctan2(b, a) + np.arccos(q)
    return float(out) if out.ndim == 0 else out


def total_length(p: ChordProblem, alpha):
    alpha = np.asarray(alpha, dtype=float)
    out = np.asarray(l_of_alpha(p, alpha)) + np.asarray(l_of_alpha(p, np.pi - alpha))
    return float(out) if out.ndim == 0 else out


def dl_dalpha(p: ChordProblem, alpha):
    """Derivative of l(alpha) by implicit differentiation of the law of cosines."""
    alpha = np.asarray(alpha, dtype=float)
    l = np.asarray(l_of_alpha(p, alpha))
    ss, cs = np.sin(p.s_y), np.cos(p.s_y)
    return ss * np.sin(l) * np.sin(alpha) / (ss * np.cos(l) * np.cos(alpha) - cs * np.sin(l))


def total_length_derivative(p: ChordProblem, alpha):
    alpha = np.asarray(alpha, dtype=float)
    return dl_dalpha(p, alpha) - dl_dalpha(p, np.pi - alpha)


def minimize_chord(p: ChordProblem, n_grid: int = 20001):
    """Global minimiser of the total chord length on [0, pi].

    Dense grid, then golden section; the flat minimum limits golden section to about
    sqrt(machine epsilon) in alpha, so the result is polished by a root of the
    derivative inside the same bracket.
    """
    if n_grid < 10_000:
        raise ValueError("grid must have at least 10^4 points")
    grid = np.linspace(0.0, np.pi, n_grid)
    vals = total_length(p, grid)
    i = int(np.argmin(vals))
    if 0 < i < n_grid - 1:
        lo, hi = grid[i - 1], grid[i + 1]
        a = float(grid[i])
        # nearly centred balls make l + l' flat to rounding, and the bracket may tie
        if vals[i] < min(vals[i - 1], vals[i + 1]):
            a = float(golden(lambda t: total_length(p, t), brack=(lo, grid[i], hi), tol=1e-12))
        dlo, dhi = total_length_derivative(p, lo), total_length_derivative(p, hi)
        if dlo < 0 < dhi:
            a = float(brentq(lambda t: total_length_derivative(p, t), lo, hi, xtol=1e-15))
    else:
        a = float(grid[i])
    L = total_length(p, a)
    if vals[i] < L:
        a, L = float(grid[i]), float(vals[i])
    return a, float(L)


def constraint_residual(p: ChordProblem, alpha):
    """cot(l1) - C/sin(l1) + cot(l2) - C/sin(l2) with l1 = l(alpha), l2 = l(pi - alpha)."""
    l1 = np.asarray(l_of_alpha(p, alpha))
    l2 = np.asarray(l_of_alpha(p, np.pi - np.asarray(alpha)))
    C = p.C
    return (np.cos(l1) - C) / np.sin(l1) + (np.cos(l2) - C) / np.sin(l2)


def first_order_residual(p: ChordProblem, alpha) -> float:
    """|l1 - l2| at a critical point; it vanishes at the minimiser."""
    return float(abs(l_of_alpha(p, alpha) - l_of_alpha(p, np.pi - alpha)))
