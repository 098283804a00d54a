"""Kernels for the scalar profile functions and the field coefficients.

The bodies below are polymorphic: under the numpy backend they run directly on
float64 arrays; under numba they are compiled for scalars and wrapped in
elementwise loops, which avoids the temporaries of array expressions.  Public
names always take 1-D float64 arrays (plus integer ``kappa``/``k`` and float ball
data).  Argument checking lives in :mod:`prescribed_area.profiles`.
"""
import numpy as np

from ._accel import BACKEND, jit, vectorize

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(48)
GL_TAU = 0.5 * (_NODES + 1.0)
GL_W = 0.5 * _WEIGHTS
_NODES16, _WEIGHTS16 = np.polynomial.legendre.leggauss(16)
GL16_TAU = 0.5 * (_NODES16 + 1.0)
GL16_W = 0.5 * _WEIGHTS16

# The reduction recursion for the integral of sn^m loses about r^(1-m) to
# cancellation, so below REC_MIN (or for larger m) quadrature is used instead.
REC_MIN = 0.5
REC_MAX_POWER = 9

# Upper limits standing in for diam/4 and diam/2 when diam is infinite;
# every tail beyond 40 is below 1e-17.
HYP_INF = 40.0


if BACKEND == "numba":

    @jit
    def ipow(x, p):
        # binary powering; much cheaper than pow() for the small exponents used here
        base = x if p >= 0 else 1.0 / x
        n = abs(p)
        out = 1.0
        while n:
            if n & 1:
                out *= base
            base *= base
            n >>= 1
        return out

else:

    def ipow(x, p):
        if p >= 0:
            return x**p
        return 1.0 / x ** (-p)


if BACKEND == "numba":
    # this libm's sinh/cosh/tanh cost two to three exp calls; these use one

    @jit
    def _sinh(r):
        em = np.expm1(abs(r))
        v = 0.5 * (em + em / (em + 1.0))
        return v if r >= 0 else -v

    @jit
    def _cosh(r):
        e = np.exp(r)
        return 0.5 * (e + 1.0 / e)

    @jit
    def _tanh(r):
        if abs(r) > 20.0:
            return 1.0 if r > 0 else -1.0
        em = np.expm1(2.0 * r)
        return em / (em + 2.0)

else:
    _sinh, _cosh, _tanh = np.sinh, np.cosh, np.tanh


@jit
def _sn(kappa, r):
    if kappa == 1:
        return np.sin(r)
    if kappa == -1:
        return _sinh(r)
    return r * 1.0


@jit
def _cs(kappa, r):
    if kappa == 1:
        return np.cos(r)
    if kappa == -1:
        return _cosh(r)
    return r * 0.0 + 1.0


@jit
def _tn(kappa, r):
    if kappa == 1:
        return np.tan(r)
    if kappa == -1:
        return _tanh(r)
    return r * 1.0


@jit
def _ct(kappa, r):
    return 1.0 / _tn(kappa, r)


@jit
def _acs(kappa, c):
    """Inverse of cs on its principal branch (clamped)."""
    if kappa == 1:
        return np.arccos(np.minimum(np.maximum(c, -1.0), 1.0))
    return np.arccosh(np.maximum(c, 1.0))


@jit
def _area_gl(kappa, m, r, tau, w):
    """Gauss-Legendre value of the integral of sn^m over [0, r]."""
    acc = r * 0.0
    for j in range(tau.shape[0]):
        acc += w[j] * ipow(_sn(kappa, r * tau[j]), m)
    return r * acc


@jit
def _area_rec(kappa, m, r):
    """Integral of sn^m over [0, r] by the reduction recursion (kappa != 0)."""
    if m % 2 == 0:
        cur = r * 1.0
        start = 2
    else:
        h = _sn(kappa, 0.5 * r)
        cur = 2.0 * h * h
        start = 3
    s = _sn(kappa, r)
    c = _cs(kappa, r)
    for j in range(start, m + 1, 2):
        cur = kappa * ((j - 1) * cur - ipow(s, j - 1) * c) / j
    return cur


if BACKEND == "numba":

    @jit
    def _area_split(kappa, m, r):
        if r < REC_MIN:
            return _area_gl(kappa, m, r, GL16_TAU, GL16_W)
        return _area_rec(kappa, m, r)

else:

    def _area_split(kappa, m, r):
        lo = _area_gl(kappa, m, np.minimum(r, REC_MIN), GL16_TAU, GL16_W)
        return np.where(r < REC_MIN, lo, _area_rec(kappa, m, np.maximum(r, REC_MIN)))


@jit
def _area_A(kappa, k, r):
    if kappa == 0:
        return ipow(r, k) / k
    if k == 1:
        return r * 1.0
    if k == 2:
        h = _sn(kappa, 0.5 * r)
        return 2.0 * h * h
    if k - 1 <= REC_MAX_POWER:
        return _area_split(kappa, k - 1, r)
    return _area_gl(kappa, k - 1, r, GL_TAU, GL_W)


@jit
def _area_Ap(kappa, k, r):
    return ipow(_sn(kappa, r), k - 1)


@jit
def _inv_sn_integral(kappa, m, t):
    """Antiderivative of sn(t)**(-m), via the reduction formula."""
    if m % 2 == 0:
        cur = t * 1.0
        start = 2
    else:
        cur = np.log(_tn(kappa, 0.5 * t))
        start = 3
    for j in range(start, m + 1, 2):
        cur = (-_cs(kappa, t) * ipow(_sn(kappa, t), 1 - j) + kappa * (j - 2) * cur) / (j - 1)
    return cur


@jit
def _b_antiderivative(kappa, k, t):
    """Antiderivative of 1/(cs(t)^2 sn(t)^(k-1)) for kappa != 0."""
    head = _tn(kappa, t) * ipow(_sn(kappa, t), 1 - k)
    if k == 1:
        return head
    return head + (k - 1) * _inv_sn_integral(kappa, k - 1, t)


# For kappa = -1 and r >= TAIL_MIN the antiderivative minus its value at HYP_INF
# cancels to a tiny number; there the tail integral is summed as a series in
# q = exp(-2r) instead: sinh^-m cosh^-p = 2^(m+p) e^(-(m+p)t) (1-q)^-m (1+q)^-p.
# Summation stops on the majorant (1-q)^-(m+p), since some coefficients vanish.
TAIL_MIN = 1.0
TAIL_TERMS = 200

if BACKEND == "numba":

    @jit
    def _hyp_tail(m, p, r):
        """-(integral of sinh^-m cosh^-p over [r, inf)), p in {0, 2}."""
        q = np.exp(-2.0 * r)
        e = np.exp((m + p) * (np.log(2.0) - r))
        a = 1.0
        d1 = 1.0
        d2 = 1.0
        g = 1.0
        total = e / (m + p)
        for j in range(1, TAIL_TERMS):
            a = a * (m + j - 1) / j
            d1 = a - d1
            d2 = d1 - d2
            g = g * (m + p + j - 1) / j
            e *= q
            term = (d2 if p == 2 else a) * e / (m + p + 2 * j)
            total += term
            if g * e <= 1e-17 * abs(total):
                break
        return -total

else:

    def _hyp_tail(m, p, r):
        q = np.exp(-2.0 * r)
        e = np.exp((m + p) * (np.log(2.0) - r))
        a = 1.0
        d1 = 1.0
        d2 = 1.0
        g = 1.0
        total = e / (m + p)
        for j in range(1, TAIL_TERMS):
            a = a * (m + j - 1) / j
            d1 = a - d1
            d2 = d1 - d2
            g = g * (m + p + j - 1) / j
            e = e * q
            term = (d2 if p == 2 else a) * e / (m + p + 2 * j)
            total = total + term
            if np.all(g * e <= 1e-17 * np.abs(total)):
                break
        return -total


if BACKEND == "numba":

    @jit
    def _hyp_select(kappa, r, near, far_m, far_p):
        if kappa == -1 and r >= TAIL_MIN:
            return _hyp_tail(far_m, far_p, r)
        return near

else:

    def _hyp_select(kappa, r, near, far_m, far_p):
        if kappa != -1 or np.all(r < TAIL_MIN):
            return near
        return np.where(r < TAIL_MIN, near, _hyp_tail(far_m, far_p, np.maximum(r, TAIL_MIN)))


@jit
def _func_B(kappa, k, r):
    if kappa == 0:
        if k == 1:
            return r * 1.0
        if k == 2:
            return np.log(r)
        return -ipow(r, 2 - k) / (k - 2)
    if k == 1:
        return _tn(kappa, r)
    if k <= K_TABLE:
        shift = B_SHIFT[kappa + 1, k]
    else:
        shift = _b_antiderivative(kappa, k, np.pi / 4 if kappa == 1 else HYP_INF)
    return _hyp_select(kappa, r, _b_antiderivative(kappa, k, r) - shift, k - 1, 2)


@jit
def _func_Bp(kappa, k, r):
    c = _cs(kappa, r)
    return 1.0 / (c * c * _area_Ap(kappa, k, r))


@jit
def _func_G(kappa, k, r):
    if k == 1:
        return r * 1.0
    if kappa == 0:
        if k == 2:
            return np.log(r)
        return -ipow(r, 2 - k) / (k - 2)
    if k <= K_TABLE:
        shift = G_SHIFT[kappa + 1, k]
    else:
        shift = _inv_sn_integral(kappa, k - 1, np.pi / 2 if kappa == 1 else HYP_INF)
    return _hyp_select(kappa, r, _inv_sn_integral(kappa, k - 1, r) - shift, k - 1, 0)


# antiderivative values at the upper limits of B and G, indexed [kappa + 1, k]
K_TABLE = 64
B_SHIFT = np.zeros((3, K_TABLE + 1))
G_SHIFT = np.zeros((3, K_TABLE + 1))
with np.errstate(over="ignore"):  # sinh(HYP_INF)^k overflows; its reciprocal 0 is the right limit
    for _kap, _up_b, _up_g in ((1, np.pi / 4, np.pi / 2), (-1, HYP_INF, HYP_INF)):
        for _k in range(2, K_TABLE + 1):
            B_SHIFT[_kap + 1, _k] = _b_antiderivative(_kap, _k, _up_b)
            G_SHIFT[_kap + 1, _k] = _inv_sn_integral(_kap, _k - 1, _up_g)


@jit
def _u_ball(kappa, R, s_y, s):
    if kappa == 0:
        return np.sqrt(np.maximum(R * R + s_y * s_y - 2.0 * s * s_y, 0.0))
    return _acs(kappa, _cs(kappa, s - s_y) * _cs(kappa, R) / _cs(kappa, s))


@jit
def _uprime_at(kappa, R, s_y, s, u):
    if kappa == 0:
        return -s_y / u
    c = _cs(kappa, s)
    return -_cs(kappa, R) * _sn(kappa, s_y) / (_sn(kappa, u) * c * c)


@jit
def _uprime_ball(kappa, R, s_y, s):
    return _uprime_at(kappa, R, s_y, s, _u_ball(kappa, R, s_y, s))


@jit
def _F_ball(kappa, k, R, s_y, s):
    u = _u_ball(kappa, R, s_y, s)
    d = _cs(kappa, s - s_y)
    return _area_Ap(kappa, k, u) * _uprime_at(kappa, R, s_y, s, u) * d * d


@jit
def _Fprime_at(kappa, k, s_y, s, u):
    sy = _sn(kappa, s_y)
    cu = _cs(kappa, u)
    c = _cs(kappa, s)
    return ipow(_sn(kappa, u), k - 4) * cu * sy * sy * (k * cu * cu - 2.0) / (c * c)


@jit
def _Fprime_ball(kappa, k, R, s_y, s):
    return _Fprime_at(kappa, k, s_y, s, _u_ball(kappa, R, s_y, s))


@jit
def _w_coeffs(kappa, k, R, s_y, s, rho, ry):
    """Coefficients (a, b) with W = a grad(r_y) + b * killing."""
    u = _u_ball(kappa, R, s_y, s)
    up = _uprime_at(kappa, R, s_y, s, u)
    a = (_area_A(kappa, k, ry) - _area_A(kappa, k, u)) / _area_Ap(kappa, k, ry)
    if kappa == 0:
        bdiff = _func_B(kappa, k, ry) - _func_B(kappa, k, u)
        return a, bdiff * _area_Ap(kappa, k, u) * up
    # tn(r_y) cs(s-s_y)^2 and tn(u) cs(s-s_y)^2 rewritten without the tn pole
    d = _cs(kappa, s - s_y)
    reg = ipow(_sn(kappa, ry), 2 - k) * d / _cs(kappa, rho) - ipow(_sn(kappa, u), 2 - k) * d * _cs(kappa, s) / _cs(kappa, R)
    if k >= 2:
        reg = reg + (k - 1) * (_inv_sn_integral(kappa, k - 1, ry) - _inv_sn_integral(kappa, k - 1, u)) * d * d
    return a, reg * _area_Ap(kappa, k, u) * up


@jit
def _div_coeffs(kappa, k, R, s_y, s, rho, ry):
    """(coeff_perp, coeff_s, s_weight) of the closed-form divergence."""
    u = _u_ball(kappa, R, s_y, s)
    coeff_perp = 1.0 + k * _ct(kappa, ry) * (_area_A(kappa, k, u) - _area_A(kappa, k, ry)) / _area_Ap(kappa, k, ry)
    crho = _cs(kappa, rho)
    weight = crho * crho
    c = _cs(kappa, s)
    if k == 1:
        sy = _sn(kappa, s_y)
        su = _sn(kappa, u)
        q = _tn(kappa, ry) / _tn(kappa, u)
        coeff_s = sy * sy / (su * su * c * c) * (-kappa * (1.0 - q) * su * su + q)
    else:
        cR = _cs(kappa, R)
        up = _uprime_at(kappa, R, s_y, s, u)
        bdiff = _func_B(kappa, k, u) - _func_B(kappa, k, ry)
        coeff_s = up * up * c * c / (cR * cR) + bdiff * _Fprime_at(kappa, k, s_y, s, u)
    return coeff_perp, coeff_s, weight


@jit
def _sphere_lhs(k, R, s_y, s):
    d = np.abs(s - s_y)
    u = _u_ball(1, R, s_y, s)
    cu = np.cos(u)
    if k == 1:
        return 1.0 + (1.0 - np.tan(d) / np.tan(u)) * (cu * cu - 2.0)
    bdiff = _func_B(1, k, u) - _func_B(1, k, d)
    return 1.0 + bdiff * ipow(np.sin(u), k - 2) * cu * (k * cu * cu - 2.0)


if BACKEND == "numba":
    # elementwise ufuncs over the scalar specialisations
    _KR = ["f8(i8, f8)"]
    _KKR = ["f8(i8, i8, f8)"]
    _BALL = ["f8(i8, f8, f8, f8)"]
    _KBALL = ["f8(i8, i8, f8, f8, f8)"]

    @jit
    def w_coeffs(kappa, k, R, s_y, s, rho, ry):
        m = s.shape[0]
        a = np.empty(m)
        b = np.empty(m)
        for i in range(m):
            a[i], b[i] = _w_coeffs(kappa, k, R, s_y, s[i], rho[i], ry[i])
        return a, b

    @jit
    def div_coeffs(kappa, k, R, s_y, s, rho, ry):
        m = s.shape[0]
        cp = np.empty(m)
        cs_ = np.empty(m)
        w = np.empty(m)
        for i in range(m):
            cp[i], cs_[i], w[i] = _div_coeffs(kappa, k, R, s_y, s[i], rho[i], ry[i])
        return cp, cs_, w

    @jit
    def sphere_lhs(k, R, s_y, s):
        out = np.empty(s.shape[0])
        for i in range(s.shape[0]):
            out[i] = _sphere_lhs(k, R, s_y, s[i])
        return out

    sn = vectorize(_KR)(_sn)
    cs = vectorize(_KR)(_cs)
    tn = vectorize(_KR)(_tn)
    ct = vectorize(_KR)(_ct)
    acs = vectorize(_KR)(_acs)
    area_A = vectorize(_KKR)(_area_A)
    area_Ap = vectorize(_KKR)(_area_Ap)
    inv_sn_integral = vectorize(_KKR)(_inv_sn_integral)
    b_antiderivative = vectorize(_KKR)(_b_antiderivative)
    func_B = vectorize(_KKR)(_func_B)
    func_Bp = vectorize(_KKR)(_func_Bp)
    func_G = vectorize(_KKR)(_func_G)
    u_ball = vectorize(_BALL)(_u_ball)
    uprime_ball = vectorize(_BALL)(_uprime_ball)
    F_ball = vectorize(_KBALL)(_F_ball)
    Fprime_ball = vectorize(_KBALL)(_Fprime_ball)
else:
    sn, cs, tn, ct, acs = _sn, _cs, _tn, _ct, _acs
    area_A, area_Ap, inv_sn_integral, b_antiderivative = _area_A, _area_Ap, _inv_sn_integral, _b_antiderivative
    func_B, func_Bp, func_G = _func_B, _func_Bp, _func_G
    u_ball, uprime_ball, F_ball, Fprime_ball = _u_ball, _uprime_ball, _F_ball, _Fprime_ball
    w_coeffs, div_coeffs, sphere_lhs = _w_coeffs, _div_coeffs, _sphere_lhs
