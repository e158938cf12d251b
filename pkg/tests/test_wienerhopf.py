from __future__ import annotations

import numpy as np
import pytest

import wienerhopf
from errors import ContourError, DomainError
from geometry import StripConfig


@pytest.mark.parametrize("kappa", [0.0, 0.5, -1.0])
def test_factor_ratio_on_contour(kappa) -> None:
    cfg = StripConfig(alpha=1.0, tau=3.0, kappa=kappa)
    table = wienerhopf.factor_table(cfg, k_points=50, k_max=20.0)
    assert np.max(table["ratio_residual"]) < 1e-10
    assert table["k"].imag == pytest.approx(np.full(50, cfg.v))


@pytest.mark.parametrize("kappa", [0.0, 0.3, -2.0])
def test_zero_pole_product(kappa) -> None:
    fac = wienerhopf.factorization(StripConfig(alpha=1.0, tau=3.0), kappa)
    assert fac.alpha0 * fac.alpha0_tilde == pytest.approx(-1.0, abs=1e-12)


def test_factors_approach_one(strip) -> None:
    fac = wienerhopf.factorization(strip, 0.5)
    k = np.array([400.0, -400.0]) + 1j * strip.v
    assert np.max(np.abs(fac.alpha_up(k) - 1.0 - fac.c1 / k)) < 1e-3
    assert np.max(np.abs(fac.alpha_down(k) - 1.0 - fac.c1 / k)) < 1e-3


def test_log_derivative_matches_difference(strip) -> None:
    fac = wienerhopf.factorization(strip, 0.5)
    k = np.array([0.7, -2.0, 5.0]) + 1j * strip.v
    h = 1e-6
    fd = (fac.alpha_up(k + h) - fac.alpha_up(k - h)) / (2 * h * fac.alpha_up(k))
    assert np.max(np.abs(fac.log_derivative_up(k) - fd)) < 1e-6


def test_rhs_transform_closed_form() -> None:
    rhs = wienerhopf.ExpPolyRhs.from_list([{"c": 2.0, "m": 1, "beta": 1.5}])
    s = np.array([0.0, 1.0 + 0.1j])
    assert rhs.transform(s, 1) == pytest.approx(2.0 / (1.5 - 1j * s) ** 2)
    assert rhs.decay == 1.5 and rhs.h0 == 0.0


@pytest.mark.parametrize("sign", [1, -1])
def test_half_line_matches_nystrom(sign) -> None:
    cfg = StripConfig(alpha=1.0, tau=3.0, kappa_minus=0.4, kappa_plus=-0.6)
    rhs = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "m": 0, "beta": 1.0}, {"c": 0.5j, "m": 2, "beta": 2.0}])
    problem = wienerhopf.HalfLineProblem(sign=sign, rhs=rhs, cfg=cfg)
    x_ny, f_ny = wienerhopf.nystrom_half_line(problem, X=30.0)
    keep = np.abs(x_ny) <= 10.0
    sol = wienerhopf.solve_half_line(problem, x_ny[keep])
    assert np.max(np.abs(sol.f - f_ny[keep])) < 1e-6


def test_half_line_constant_is_far_field_value(strip) -> None:
    rhs = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "m": 0, "beta": 1.0}])
    problem = wienerhopf.HalfLineProblem(sign=1, rhs=rhs, cfg=strip)
    x_ny, f_ny = wienerhopf.nystrom_half_line(problem, X=40.0)
    sol = wienerhopf.solve_half_line(problem, np.array([0.0]))
    assert abs(f_ny[np.argmin(np.abs(x_ny - 25.0))] - sol.constant) < 1e-4


def test_pinched_contour_is_rejected(strip) -> None:
    rhs = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "beta": 0.1}])
    with pytest.raises(ContourError):
        wienerhopf.solve_half_line(wienerhopf.HalfLineProblem(1, rhs, strip, eta_minus=0.2), np.array([1.0]))


def test_points_off_half_line_are_rejected(strip) -> None:
    rhs = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "beta": 1.0}])
    with pytest.raises(DomainError):
        wienerhopf.solve_half_line(wienerhopf.HalfLineProblem(1, rhs, strip), np.array([-1.0]))


def test_half_line_solver_is_linear(strip) -> None:
    first = [{"c": 1.0, "m": 0, "beta": 1.0}]
    second = [{"c": 1.0, "m": 1, "beta": 1.0}]
    combined = [{"c": 3.0, "m": 0, "beta": 1.0}, {"c": -2.0j, "m": 1, "beta": 1.0}]
    x = np.array([0.0, 0.5, 2.0, 6.0])

    def solve(items):
        rhs = wienerhopf.ExpPolyRhs.from_list(items)
        return wienerhopf.solve_half_line(wienerhopf.HalfLineProblem(1, rhs, strip), x)

    a, b, ab = solve(first), solve(second), solve(combined)
    assert np.max(np.abs(ab.f - (3.0 * a.f - 2.0j * b.f))) < 1e-10
    assert abs(ab.constant - (3.0 * a.constant - 2.0j * b.constant)) < 1e-10


@pytest.mark.parametrize("kappa", [0.0, 0.5, -1.0])
def test_factors_have_no_zeros_in_their_half_planes(kappa) -> None:
    cfg = StripConfig(alpha=1.0, tau=3.0, kappa=kappa)
    fac = wienerhopf.factorization(cfg)
    assert fac.argument_count("up") == 1
    assert fac.argument_count("up", edge=cfg.v) == 0
    assert fac.argument_count("down") == -1
    assert fac.argument_count("down", edge=-cfg.v) == 0
    with pytest.raises(ValueError):
        fac.argument_count("sideways")


def _rhs_shape(x):
    ax = np.abs(x)
    return np.exp(-ax) * (1.0 + ax**2)


@pytest.mark.parametrize("sign", [1, -1])
def test_sampled_rhs_matches_closed_form(strip, sign) -> None:
    closed = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "m": 0, "beta": 1.0}, {"c": 1.0, "m": 2, "beta": 1.0}])
    sampled = wienerhopf.SampledRhs.from_function(_rhs_shape, sign, decay=1.0)
    s = np.concatenate([np.linspace(-50.0, 50.0, 21) - 0.1j * sign, [0.0, 1e-5 + 0j, 3000.0 - 0.1j * sign]])
    assert np.max(np.abs(sampled.transform(s, sign) - closed.transform(s, sign))) < 1e-10
    assert sampled.h0 == pytest.approx(1.0, abs=1e-12)
    x = sign * np.array([0.0, 0.3, 2.0, 7.5])
    assert np.max(np.abs(sampled(x) - closed(x))) < 1e-12
    assert sampled(np.array([-sign * 1.0]))[0] == 0.0
    with pytest.raises(DomainError):
        sampled.transform(s, -sign)


@pytest.mark.parametrize("sign", [1, -1])
def test_sampled_rhs_gives_closed_form_solution(strip, sign) -> None:
    closed = wienerhopf.ExpPolyRhs.from_list([{"c": 1.0, "m": 0, "beta": 1.0}, {"c": 1.0, "m": 2, "beta": 1.0}])
    sampled = wienerhopf.SampledRhs.from_function(_rhs_shape, sign, decay=1.0)
    x = sign * np.array([0.0, 0.5, 2.0, 6.0])
    a = wienerhopf.solve_half_line(wienerhopf.HalfLineProblem(sign, closed, strip), x)
    b = wienerhopf.solve_half_line(wienerhopf.HalfLineProblem(sign, sampled, strip), x)
    assert np.max(np.abs(a.f - b.f)) < 1e-8
    assert abs(a.constant - b.constant) < 1e-8


RHS_SHAPES = [
    [{"c": 1.0, "m": 0, "beta": 1.0}],
    [{"c": 1.0, "m": 1, "beta": 0.8}],
    [{"c": 0.5, "m": 0, "beta": 2.0}, {"c": -1.0j, "m": 3, "beta": 1.5}],
    [{"c": 1.0 + 1.0j, "m": 2, "beta": 1.2}],
    [{"c": 2.0, "m": 0, "beta": 0.6}, {"c": 1.0, "m": 1, "beta": 3.0}],
]


@pytest.mark.slow
@pytest.mark.parametrize("sign", [1, -1])
@pytest.mark.parametrize("items", RHS_SHAPES)
def test_half_line_shapes_match_nystrom(sign, items) -> None:
    cfg = StripConfig(alpha=1.0, tau=3.0, kappa_minus=0.4, kappa_plus=-0.6)
    problem = wienerhopf.HalfLineProblem(sign=sign, rhs=wienerhopf.ExpPolyRhs.from_list(items), cfg=cfg)
    x_ny, f_ny = wienerhopf.nystrom_half_line(problem, X=45.0, panel_width=0.5)
    keep = np.abs(x_ny) <= 10.0
    sol = wienerhopf.solve_half_line(problem, x_ny[keep])
    assert np.max(np.abs(sol.f - f_ny[keep])) < 1e-6
