"""The prescribed-point vector field W and certificates for its three properties:

* (V1) div_S W <= 1 on every k-plane S,
* (V2) r_y^(k-1) <W, grad r_y> -> -A(r_under) as x -> y,
* (V3) W = 0 on the boundary sphere of the ball.

W = a(x) grad r_y + b(x) killing, where killing = cs(rho)^2 grad s generates the
isometries along the axis.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .geometry import (
    AxisChart,
    GeometryError,
    SingularPointError,
    SpaceForm,
    axis_coords,
    axis_fields,
    distance,
    exp_map,
    directional_div_term,
    geodesic_velocity,
    grad_r,
    inner,
    norm,
    normal_sq,
    random_kplane,
    tangent_basis,
    tangential_sq,
)
from .profiles import BallData, ProfileContext, underline_r


@dataclass(frozen=True)
class FieldConfig:
    space: SpaceForm
    k: int
    ball: BallData

    def __post_init__(self):
        if not 1 <= self.k <= self.space.n - 1:
            raise GeometryError(f"k must lie in [1, n-1], got k={self.k}, n={self.space.n}")
        self.ball.validate(self.space.kappa)

    @classmethod
    def create(cls, kappa: int, n: int, k: int, R: float, s_y: float) -> "FieldConfig":
        return cls(SpaceForm(kappa, n), k, BallData(R, s_y))

    @property
    def kappa(self) -> int:
        return self.space.kappa

    @property
    def R(self) -> float:
        return self.ball.R

    @property
    def s_y(self) -> float:
        return self.ball.s_y

    @cached_property
    def chart(self) -> AxisChart:
        return AxisChart(self.space, self.s_y)

    @cached_property
    def y(self) -> np.ndarray:
        return self.chart.y

    @property
    def ctx(self) -> ProfileContext:
        return ProfileContext(self.kappa, self.k)

    @property
    def r_under(self) -> float:
        return underline_r(self.kappa, self.ball)

    @property
    def has_wedge(self) -> bool:
        """Sphere balls reaching past the hemisphere about y."""
        return self.kappa == 1 and self.s_y + self.R > np.pi / 2

    def __str__(self):
        return f"kappa={self.kappa} n={self.space.n} k={self.k} R={self.R:g} s_y={self.s_y:g}"


def _flat(a):
    return np.ascontiguousarray(np.asarray(a, dtype=float).reshape(-1))


def _local(cfg: FieldConfig, x):
    s, rho = axis_coords(cfg.chart, x)
    ry = distance(cfg.space, cfg.y, x)
    return s, rho, ry


def eval_W(cfg: FieldConfig, x, check: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    s, rho, ry = _local(cfg, x)
    if check:
        if np.any(ry == 0):
            raise SingularPointError("W is singular at y")
        r = distance(cfg.space, cfg.space.origin(), x)
        if np.any(r > cfg.R * (1 + 1e-12)):
            raise GeometryError("point outside the closed ball")
    a, b = K.w_coeffs(cfg.kappa, cfg.k, cfg.R, cfg.s_y, _flat(s), _flat(rho), _flat(ry))
    _, _, kill = axis_fields(cfg.chart, x)
    g = grad_r(cfg.space, cfg.y, x)
    return a.reshape(s.shape)[..., None] * g + b.reshape(s.shape)[..., None] * kill


def eval_bh_euclidean(k: int, y, x, R: float = 1.0) -> np.ndarray:
    """Explicit Euclidean field in Cartesian form (k=2 log variant, k=1 linear variant)."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise SingularPointError("field is singular at y")
    u2 = R * R - 2.0 * np.sum(x * y, axis=-1) + np.sum(y * y)
    u = np.sqrt(u2)
    if k >= 3:
        first = (1.0 - (u / r) ** k) / k
        second = ((u / r) ** (k - 2) - 1.0) / (k - 2)
    elif k == 2:
        first = 0.5 * (1.0 - (u / r) ** 2)
        second = np.log(u / r)
    else:
        first = 1.0 - u / r
        second = (u - r) / u
    return first[..., None] * d + second[..., None] * y


def eval_W1_W2(cfg: FieldConfig, x):
    """Classical radial fields W1 = grad r / A'(r) and W2 = A(r) grad r / A'(r)."""
    o = cfg.space.origin()
    r = distance(cfg.space, o, x)
    if np.any(r <= 0) or np.any(r >= cfg.space.half_diam):
        raise GeometryError("need 0 < r(x) < diam/2")
    g = grad_r(cfg.space, o, x)
    A = K.area_A(cfg.kappa, cfg.k, _flat(r)).reshape(r.shape)
    Ap = K.area_Ap(cfg.kappa, cfg.k, _flat(r)).reshape(r.shape)
    return g / Ap[..., None], (A / Ap)[..., None] * g


def div_W1_W2_closed(cfg: FieldConfig, x, frame):
    o = cfg.space.origin()
    r = distance(cfg.space, o, x)
    if np.any(r <= 0):
        raise GeometryError("need r(x) > 0")
    perp = 1.0 - tangential_sq(cfg.space, frame, grad_r(cfg.space, o, x))
    rf = _flat(r)
    A = K.area_A(cfg.kappa, cfg.k, rf).reshape(r.shape)
    Ap = K.area_Ap(cfg.kappa, cfg.k, rf).reshape(r.shape)
    ct = K.ct(cfg.kappa, rf).reshape(r.shape)
    return cfg.k * ct / Ap * perp, 1.0 - (1.0 - cfg.k * A / Ap * ct) * perp


@dataclass
class DivBreakdown:
    """total = 1 - coeff_perp * perp_sq - coeff_s * stangent_sq.

    stangent_sq is cs(rho)^2 |grad^T s|^2 = cs(r_y)^2 / cs(s - s_y)^2 |grad^T s|^2.
    """

    total: np.ndarray
    coeff_perp: np.ndarray
    coeff_s: np.ndarray
    perp_sq: np.ndarray
    stangent_sq: np.ndarray


def div_W_closed(cfg: FieldConfig, x, frame) -> DivBreakdown:
    x = np.asarray(x, dtype=float)
    s, rho, ry = _local(cfg, x)
    if np.any(ry <= 0):
        raise SingularPointError("divergence undefined at y")
    g = grad_r(cfg.space, cfg.y, x)
    grad_s, _, _ = axis_fields(cfg.chart, x)
    perp = normal_sq(cfg.space, frame, g)
    cp, cs_, w = K.div_coeffs(cfg.kappa, cfg.k, cfg.R, cfg.s_y, _flat(s), _flat(rho), _flat(ry))
    cp, cs_, w = (v.reshape(s.shape) for v in (cp, cs_, w))
    st = w * tangential_sq(cfg.space, frame, grad_s)
    return DivBreakdown(1.0 - cp * perp - cs_ * st, cp, cs_, perp, st)


def div_numeric(cfg: FieldConfig, x, frame, h: float = 1e-4, field: Optional[Callable] = None) -> np.ndarray:
    """Trace of nabla W over the frame by finite differences along geodesics."""
    x = np.asarray(x, dtype=float)
    frame = np.asarray(frame, dtype=float)
    if field is None:
        if np.any(distance(cfg.space, cfg.y, x) < 10 * h):
            raise SingularPointError("sample too close to y for the finite-difference step")

        def field(p):
            return eval_W(cfg, p, check=False)

    total = np.zeros(x.shape[:-1])
    for i in range(frame.shape[-2]):
        total = total + directional_div_term(cfg.space, field, x, frame[..., i, :], h)
    return total


def _extrapolate_to_zero(radii, values) -> float:
    """Least-squares fit in {1, r, r log r, r^2, r^2 log r, r^3}; return the constant term."""
    r = np.asarray(radii, dtype=float)
    lr = np.log(r)
    basis = np.stack([np.ones_like(r), r, r * lr, r * r, r * r * lr, r**3], axis=1)
    basis = basis[:, : min(basis.shape[1], len(r) - 1)]
    scale = np.abs(basis).max(axis=0)
    coef, *_ = np.linalg.lstsq(basis / scale, values, rcond=None)
    return float(coef[0] / scale[0])


def residue_check(cfg: FieldConfig, direction, radii=None, symmetric: Optional[bool] = None) -> float:
    """Extrapolated limit of r_y^(k-1) <W, grad r_y> approaching y along a direction.

    For k = 1 the one-sided limit depends on the direction; the flux through the
    two endpoints of a small segment is what enters the area bound, so by default
    the two opposite directions are averaged.
    """
    d = np.asarray(direction, dtype=float)
    if abs(norm(cfg.space, d) - 1.0) > 1e-10:
        raise GeometryError("direction must be a unit tangent vector at y")
    if radii is None:
        radii = np.geomspace(1e-2, 1e-4, 12)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 4 or np.any(radii <= 0) or np.any(radii > 0.1):
        raise ValueError("need at least 4 radii in (0, 0.1]")
    if symmetric is None:
        symmetric = cfg.k == 1
    dirs = [d, -d] if symmetric else [d]
    limits = []
    for e in dirs:
        e = np.broadcast_to(e, (len(radii), e.shape[-1]))
        y = np.broadcast_to(cfg.y, e.shape)
        x = exp_map(cfg.space, y, e, radii)
        vel = geodesic_velocity(cfg.space, y, e, radii)
        w = eval_W(cfg, x)
        vals = distance(cfg.space, y, x) ** (cfg.k - 1) * inner(cfg.space, w, vel)
        limits.append(_extrapolate_to_zero(radii, vals))
    return float(np.mean(limits))


def _unit_directions(n: int, m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _origin_directions(cfg: FieldConfig, xi: np.ndarray) -> np.ndarray:
    """Embed unit vectors of R^n as tangent vectors at o."""
    if cfg.kappa == 0:
        return xi
    out = np.zeros(xi.shape[:-1] + (cfg.space.n + 1,))
    out[..., 1:] = xi
    return out


def boundary_points(cfg: FieldConfig, m: int, seed: int = 0) -> np.ndarray:
    xi = _unit_directions(cfg.space.n, m, seed)
    xi[0] = 0.0
    xi[0, 0] = 1.0
    if m > 1:
        xi[1] = 0.0
        xi[1, 0] = -1.0
    o = cfg.space.origin()
    return exp_map(cfg.space, np.broadcast_to(o, (m, o.size)), _origin_directions(cfg, xi), np.full(m, cfg.R))


def boundary_check(cfg: FieldConfig, m: int = 1000, seed: int = 0) -> float:
    """max |W| over m boundary points, both axis endpoints included."""
    if m < 1:
        raise ValueError("m must be >= 1")
    x = boundary_points(cfg, m, seed)
    return float(np.max(norm(cfg.space, eval_W(cfg, x))))


def wedge_boundary_points(cfg: FieldConfig, m: int, seed: int = 0) -> np.ndarray:
    """Points of the ball on the hemisphere boundary {r_y = pi/2} = {s = s_y - pi/2}."""
    if not cfg.has_wedge:
        raise GeometryError("wedge boundary is empty unless kappa=+1 and s_y + R > pi/2")
    s_star = cfg.s_y - np.pi / 2
    rho_max = np.arccos(np.cos(cfg.R) / np.cos(s_star))
    rng = np.random.default_rng(seed)
    rho = rho_max * rng.random(m)
    rho[0] = 0.0
    w = np.zeros((m, cfg.space.n + 1))
    g = rng.standard_normal((m, cfg.space.n - 1))
    w[:, 2:] = g / np.linalg.norm(g, axis=1, keepdims=True)
    base = cfg.chart.gamma(np.full(m, s_star))
    return np.cos(rho)[:, None] * base + np.sin(rho)[:, None] * w


def wedge_boundary_check(cfg: FieldConfig, m: int = 1000, seed: int = 0) -> float:
    x = wedge_boundary_points(cfg, m, seed)
    return float(np.max(norm(cfg.space, eval_W(cfg, x))))


def sphere_condition_lhs(cfg: FieldConfig, s):
    """1 + (B(u) - B(|s - s_y|)) sin(u)^(k-2) cos(u) (k cos(u)^2 - 2) on the sphere."""
    if cfg.kappa != 1:
        raise GeometryError("the sphere condition only applies for kappa=+1")
    arr = np.asarray(s, dtype=float)
    out = K.sphere_lhs(cfg.k, cfg.R, cfg.s_y, _flat(arr)).reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def simple_sphere_condition(k: int, R: float, s_y: float) -> bool:
    return bool(np.cos(s_y + R) >= np.sqrt(2.0 / k))


def sphere_condition_grid(cfg: FieldConfig, m: int = 2000) -> np.ndarray:
    """Grid on (-R, R) punctured at s_y (and at the wedge pole), refined near s_y."""
    R, sy = cfg.R, cfg.s_y
    s = np.linspace(-R, R, m + 2)[1:-1]
    off = np.geomspace(1e-6, 0.5, 60)
    s = np.concatenate([s, sy - off, sy + off])
    s = s[(s > -R) & (s < R) & (np.abs(s - sy) >= 1e-6) & (np.abs(s - sy + np.pi / 2) >= 1e-6)]
    return np.unique(s)


def sphere_condition_min(cfg: FieldConfig, m: int = 2000):
    """(min_lhs, argmin_s); the puncture at s_y is resolved by the sign of the limit.

    For k >= 2, B(|s - s_y|) -> -inf, so the limit is +inf or -inf according to the
    sign of cos(u) (k cos(u)^2 - 2) at u = r_under; a negative sign gives min = -inf.
    """
    s = sphere_condition_grid(cfg, m)
    lhs = sphere_condition_lhs(cfg, s)
    i = int(np.argmin(lhs))
    best, arg = float(lhs[i]), float(s[i])
    if cfg.k >= 2:
        c = np.cos(cfg.r_under)
        if c * (cfg.k * c * c - 2.0) < 0:
            return -np.inf, cfg.s_y
    return best, arg


@dataclass
class CertReport:
    samples: int
    max_div: float
    worst_point: np.ndarray
    violations: int
    tolerance: float
    sphere_min_lhs: Optional[float] = None
    equality_mismatches: int = 0
    notes: list = dc_field(default_factory=list)

    @property
    def passed(self) -> bool:
        ok = self.violations == 0
        if self.sphere_min_lhs is not None:
            ok = ok and self.sphere_min_lhs >= -self.tolerance
        return ok


def sample_ball(cfg: FieldConfig, m: int, rng: np.random.Generator, min_ry: float = 1e-3):
    """Points of the ball (or of the wedge, for sphere balls that have one) and k-frames.

    A third of the samples are refined near the axis, with frames containing the
    direction of grad s, and a tenth near the boundary sphere: the places where the
    divergence coefficients degenerate.
    """
    n = cfg.space.n
    o = cfg.space.origin()
    xi = rng.standard_normal((m, n))
    t = cfg.R * rng.random(m) ** (1.0 / n)
    n_axis = m // 3
    n_bdry = m // 10
    xi[:n_axis, 0] = np.where(rng.random(n_axis) < 0.5, -1.0, 1.0) / np.maximum(
        10.0 ** rng.uniform(-4, 0, n_axis), 1e-12
    )
    t[:n_axis] = cfg.R * rng.random(n_axis)
    t[n_axis:n_axis + n_bdry] = cfg.R * (1.0 - 10.0 ** rng.uniform(-8, -1, n_bdry))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    x = exp_map(cfg.space, np.broadcast_to(o, (m, o.size)), _origin_directions(cfg, xi), t)
    ry = distance(cfg.space, cfg.y, x)
    keep = ry >= min_ry
    if cfg.has_wedge:
        keep &= np.cos(ry) >= 1e-3
    x = x[keep]
    aligned = np.arange(m)[keep] < n_axis
    frame = random_kplane(cfg.space, x, cfg.k, rng).frame
    if np.any(aligned):
        xa = x[aligned]
        grad_s, _, _ = axis_fields(cfg.chart, xa)
        basis = tangent_basis(cfg.space, xa)
        c = inner(cfg.space, basis, grad_s[:, None, :])
        g = rng.standard_normal((xa.shape[0], n, cfg.k))
        g[:, :, 0] = c / np.linalg.norm(c, axis=1, keepdims=True)
        q, r = np.linalg.qr(g)
        frame[aligned] = np.einsum("mik,mia->mka", q, basis)
    return x, frame


def certify_V1(
    cfg: FieldConfig,
    samples: int = 100_000,
    seed: int = 0,
    tolerance: float = 1e-9,
    batch: int = 25_000,
    sphere_grid: int = 2000,
) -> CertReport:
    """Monte Carlo certificate of div_S W <= 1 + tolerance."""
    root = np.random.SeedSequence(seed)
    done = 0
    violations = 0
    mismatches = 0
    max_div = -np.inf
    worst = None
    while done < samples:
        # the sampler drops points near y (and outside the wedge), so top up until
        # `samples` points have actually been evaluated
        m = min(batch, samples - done)
        x, frame = sample_ball(cfg, m + m // 8 + 16, np.random.default_rng(root.spawn(1)[0]))
        x, frame = x[:m], frame[:m]
        br = div_W_closed(cfg, x, frame)
        done += x.shape[0]
        violations += int(np.count_nonzero(br.total > 1.0 + tolerance))
        near_eq = (br.total > 1.0 - 1e-9) & (br.coeff_perp > 1e-3) & (br.coeff_s > 1e-3)
        mismatches += int(np.count_nonzero(near_eq & ((br.perp_sq > 1e-6) | (br.stangent_sq > 1e-6))))
        i = int(np.argmax(br.total))
        if br.total[i] > max_div:
            max_div, worst = float(br.total[i]), x[i].copy()
    report = CertReport(done, max_div, worst, violations, tolerance, equality_mismatches=mismatches)
    if cfg.kappa == 1:
        report.sphere_min_lhs = sphere_condition_min(cfg, sphere_grid)[0]
        if cfg.has_wedge:
            report.notes.append("sampled the wedge r_y < pi/2, where W is smooth")
    return report
