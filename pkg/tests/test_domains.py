import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prescribed_area import _kernels as K
from prescribed_area.domains import (
    DomainError,
    DomainProfile,
    ball_profile,
    containment_gap,
    default_grid,
    matching_ball_radius,
    odi_lhs,
    odi_terms,
    optimal_profile,
    profile_admissible,
    profile_to_csv,
    u_general,
    wedge_compare,
)
from prescribed_area.field import FieldConfig, certify_V1
from prescribed_area.profiles import BallData, underline_r


def test_ball_profile_examples():
    for kappa in (-1, 0, 1):
        p = ball_profile(kappa, 0.9, 0.3)
        assert p.R(0.0) == pytest.approx(0.9, abs=1e-15)
        assert p.R(0.9) == pytest.approx(0.0, abs=1e-7)
        assert p.R(-0.9) == pytest.approx(0.0, abs=1e-7)
    p = ball_profile(0, 0.9, 0.3)
    s = np.linspace(-0.89, 0.89, 51)
    np.testing.assert_allclose(p.R(s), np.sqrt(0.81 - s * s), atol=1e-15)
    with pytest.raises(DomainError):
        ball_profile(1, 2.0, 0.3)


@pytest.mark.parametrize("kappa", (-1, 0, 1))
def test_u_general_matches_u_ball(kappa):
    R, s_y = 1.1, 0.4
    p = ball_profile(kappa, R, s_y)
    s = np.linspace(-R, R, 2001)[1:-1]
    np.testing.assert_allclose(u_general(p, s), K.u_ball(kappa, R, s_y, s), atol=1e-12)
    assert u_general(p, s_y) == pytest.approx(p.R(s_y), abs=1e-15)
    with pytest.raises(DomainError):
        u_general(p, 1.5)


def test_u_general_flat_formula():
    p = DomainProfile((-1, 1), lambda s: 0.5 + 0.1 * np.cos(np.asarray(s)), 0.2, 0, 3)
    s = np.linspace(-0.9, 0.9, 31)
    np.testing.assert_allclose(u_general(p, s), np.hypot(0.5 + 0.1 * np.cos(s), s - 0.2), atol=1e-15)


@pytest.mark.parametrize("kappa", (-1, 0, 1))
def test_Rprime_of_ball(kappa):
    p = ball_profile(kappa, 1.0, 0.3)
    s = np.linspace(-0.9, 0.9, 19)
    h = 1e-5
    fd = (p.R(s + h) - p.R(s - h)) / (2 * h)
    np.testing.assert_allclose(p.Rprime(s), fd, rtol=1e-8, atol=1e-9)


@pytest.mark.parametrize("kappa", (-1, 0))
@pytest.mark.parametrize("k", (2, 3, 5))
def test_ball_odi_nonnegative(kappa, k):
    p = ball_profile(kappa, 1.0, 0.35, k)
    adm = profile_admissible(p)
    assert adm.ok and not adm.finite_differences
    assert adm.min_lhs >= 0


def test_sphere_k2_fails_near_hemisphere():
    p = ball_profile(1, 1.5, 0.05, 2)
    adm = profile_admissible(p)
    assert not adm.ok and adm.min_lhs < 0
    s = default_grid(p)
    assert np.min(odi_lhs(p, s)) < 0


@pytest.mark.parametrize("k", (4, 6, 9))
def test_sphere_simple_condition_admissible(k):
    total = np.arccos(np.sqrt(2 / k))
    p = ball_profile(1, 0.75 * total, 0.25 * total, k)
    ok, lhs, _ = profile_admissible(p)
    assert ok


def test_wedge_grid_is_smaller():
    p = ball_profile(1, 1.5, 0.4, 2)
    g = default_grid(p, wedge=True)
    assert g.min() >= 0.4 - np.pi / 2
    with pytest.raises(DomainError):
        default_grid(ball_profile(0, 1.0, 0.4), wedge=True)


def test_printed_coefficient_on_balls():
    # read with R = R(s), the printed factor carries an extra cs(s)^2 on curved balls
    for kappa in (-1, 0, 1):
        p = ball_profile(kappa, 1.0, 0.3, 3)
        s = np.linspace(-0.95, 0.95, 41)
        s = s[np.abs(s - 0.3) > 1e-3]
        first, _, _, _ = odi_terms(p, s)
        first_printed, _, _, _ = odi_terms(p, s, printed=True)
        np.testing.assert_allclose(first_printed, first * K.cs(kappa, s) ** 2, rtol=1e-12)
        if kappa == 0:
            np.testing.assert_allclose(odi_lhs(p, s, printed=True), odi_lhs(p, s), rtol=1e-14)


def test_printed_coefficient_differs_off_balls():
    p = DomainProfile((-0.8, 0.8), lambda s: 0.6 - 0.5 * np.asarray(s) ** 2, 0.2, -1, 3)
    s = np.array([-0.5, 0.5])
    assert np.all(np.abs(odi_lhs(p, s, printed=True) - odi_lhs(p, s)) > 1e-6)


def test_finite_difference_fallback_flagged():
    p = DomainProfile((-0.8, 0.8), lambda s: np.sqrt(np.maximum(0.64 - np.asarray(s) ** 2, 0)), 0.3, 0, 3)
    ball = ball_profile(0, 0.8, 0.3, 3)
    s = np.array([-0.5, 0.0, 0.5])
    np.testing.assert_allclose(odi_lhs(p, s), odi_lhs(ball, s), rtol=1e-5)
    adm = profile_admissible(p, grid=s)
    assert adm.finite_differences


def test_verdict_is_sign_of_min():
    # a wavy slice radius makes F' strongly negative where B(u) - B(|s - s_y|) > 0
    p = DomainProfile((-1, 1), lambda s: 0.5 + 0.1 * np.sin(10 * np.asarray(s)), 0.0, 0, 3,
                      Rprime=lambda s: np.cos(10 * np.asarray(s)))
    adm = profile_admissible(p)
    assert (adm.min_lhs < -1e-9) == (not adm.ok)
    assert not adm.ok
    with pytest.raises(DomainError):
        odi_lhs(p, 0.0)


def test_wedge_examples():
    w = wedge_compare(1.5, 0.4)
    assert w.r_over == pytest.approx(1.3354, abs=1e-4)
    assert w.r_under == pytest.approx(1.4939, abs=1e-4)
    assert w.obstruction
    w = wedge_compare(0.5, 0.2)
    assert w.r_over == pytest.approx(0.9354, abs=1e-4)
    assert w.r_under == pytest.approx(np.arccos(np.cos(0.5) / np.cos(0.2)), abs=1e-15)
    assert w.r_under == pytest.approx(0.4614, abs=1e-4)
    assert not w.obstruction
    w = wedge_compare(np.pi / 2 - 0.3, 0.3)
    assert w.r_over == pytest.approx(np.pi / 2 - 0.3, abs=1e-14)
    assert w.r_under <= w.r_over and not w.obstruction
    with pytest.raises(DomainError):
        wedge_compare(0.3, 0.5)


@settings(max_examples=40, deadline=None)
@given(R=st.floats(0.05, 1.55), frac=st.floats(0.02, 0.98))
def test_obstruction_needs_wedge(R, frac):
    w = wedge_compare(R, frac * R)
    if w.obstruction:
        assert frac * R + R > np.pi / 2


def test_obstruction_witnesses_fail_V1():
    for R, s_y in ((1.5, 0.4), (1.4, 0.6), (1.5, 1.0)):
        assert wedge_compare(R, s_y).obstruction
        assert certify_V1(FieldConfig.create(1, 3, 2, R, s_y), samples=5000, seed=0).violations > 0


@pytest.mark.parametrize("args", [(-1, 3, 1.2, 0.5), (0, 3, 1.0, 0.4), (0, 2, 1.0, 0.5), (1, 6, 0.5, 0.2), (1, 2, 1.5, 0.4)])
def test_V1_and_profile_criteria_agree(args):
    kappa, k, R, s_y = args
    rep = certify_V1(FieldConfig.create(kappa, k + 1, k, R, s_y), samples=5000, seed=0)
    adm = profile_admissible(ball_profile(kappa, R, s_y, k))
    assert adm.ok == (rep.violations == 0)


def test_matching_ball_radius():
    for kappa in (-1, 0, 1):
        Rb = matching_ball_radius(kappa, 0.6, 0.3)
        assert underline_r(kappa, BallData(Rb, 0.3)) == pytest.approx(0.6, abs=1e-14)


@pytest.mark.parametrize("args", [(-1, 3, 0.5, 1.0), (0, 3, 0.4, 1.0), (-1, 2, 0.3, 0.8), (0, 4, 0.5, 1.2)])
def test_optimal_profile_contained_in_ball(args):
    kappa, k, s_y, R = args
    r0 = underline_r(kappa, BallData(R, s_y))
    prof = optimal_profile(kappa, k, s_y, r0)
    assert prof.R(s_y) == pytest.approx(r0, abs=1e-12)
    adm = profile_admissible(prof)
    assert adm.min_lhs >= -1e-8
    s = default_grid(prof)
    assert np.max(np.abs(odi_lhs(prof, s))) <= 1e-6
    assert containment_gap(prof, ball_profile(kappa, R, s_y, k)) <= 1e-6
    # k = 2 starts with an O(delta / |log delta|) error from the logarithmic B
    assert prof.delta_sensitivity < (1e-4 if k == 2 else 1e-6)
    assert set(prof.termination) == {"lower", "upper"}


def test_optimal_profile_flat_k2():
    # the ball's own F' vanishes, but the equality system still moves u
    prof = optimal_profile(0, 2, 0.4, 0.6)
    adm = profile_admissible(prof)
    assert adm.min_lhs >= -1e-8
    Rb = matching_ball_radius(0, 0.6, 0.4)
    assert containment_gap(prof, ball_profile(0, Rb, 0.4, 2)) <= 1e-6


def test_optimal_profile_sphere_terminates():
    prof = optimal_profile(1, 6, 0.2, 0.4)
    assert profile_admissible(prof).min_lhs >= -1e-8
    a, b = prof.interval
    assert a < 0.2 < b and b - a < np.pi


def test_optimal_profile_errors():
    with pytest.raises(DomainError):
        optimal_profile(0, 3, 0.4, -1.0)
    with pytest.raises(DomainError):
        optimal_profile(1, 3, 2.0, 0.5)


def test_profile_csv():
    buf = io.StringIO()
    profile_to_csv(ball_profile(-1, 1.0, 0.3, 3), buf, m=50)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "s,R,u,odi_lhs"
    assert len(lines) == 51
    vals = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.all(vals[:, 3] >= 0)
