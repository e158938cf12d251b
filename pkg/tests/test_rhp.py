from __future__ import annotations

import numpy as np
import pytest

import rhp
from errors import ContourError, DomainError
from geometry import build_diffeo, gamma_of
from quadrature import gauss_legendre

BUMP = {"bumps": [{"center": 0.0, "width": 1.5, "amplitude": 0.3}]}


def test_logistic_is_overflow_free() -> None:
    vals = rhp.logistic(np.array([-800.0, 0.0, 800.0]))
    assert vals == pytest.approx([0.0, 0.5, 1.0])


def test_identity_gives_trivial_chi(strip) -> None:
    sol = rhp.solve_chi(build_diffeo("identity"), strip)
    assert np.max(np.abs(sol.theta)) < 1e-10
    z = np.array([-3.0 - 0.5j, 2.0 - 0.2j])
    assert np.allclose(sol.evaluate(z), z, atol=1e-10)


def test_chi_for_bump_has_small_jump_residual(strip) -> None:
    g = build_diffeo("custom", BUMP)
    sol = rhp.solve_chi(g, strip)
    assert sol.jump_sup < 1e-6
    assert sol.integral_residual < 1e-8
    assert sol.decay_right > 0.0
    assert sol.summary()["grid.N"] == sol.grid.n


def test_decay_rates_outside_support(strip) -> None:
    sol = rhp.solve_chi(build_diffeo("custom", BUMP), strip)
    rate = 2.0 * np.pi / strip.alpha
    summary = sol.summary()
    assert summary["decay_left"] == pytest.approx(rate, rel=0.05)
    assert summary["decay_right"] == pytest.approx(rate, rel=0.05)


def test_decay_rate_ignores_roundoff_tail() -> None:
    d = np.linspace(0.0, 20.0, 401)
    noise = 1e-16 * np.cos(37.0 * d)
    values = 2.0 * np.exp(-3.0 * d) + noise
    assert rhp._decay_rate(d, values, scale=2.0) == pytest.approx(3.0, rel=1e-3)
    assert np.isnan(rhp._decay_rate(d, np.zeros_like(d), scale=0.0))


def test_chi_reconstruction_outside_strip(strip) -> None:
    sol = rhp.solve_chi(build_diffeo("identity"), strip)
    with pytest.raises(DomainError):
        sol.reconstruct(np.array([0.5j]))
    with pytest.raises(DomainError):
        sol.reconstruct(np.array([-1.5j]))


def test_chi_needs_compact_shift(strip) -> None:
    with pytest.raises(DomainError):
        rhp.solve_chi(build_diffeo("left_model", {"kappa": 1.0}), strip)


def test_boundary_values_continue_left_tail(strip) -> None:
    sol = rhp.solve_chi(build_diffeo("custom", BUMP), strip)
    far = -sol.grid.X - 10.0
    assert sol.boundary_minus(np.array([far]))[0] == pytest.approx(sol.theta_minus[0] + far)


@pytest.mark.parametrize("side", ["left", "right"])
def test_model_problems(strip, side) -> None:
    if side == "left":
        g = build_diffeo("left_model", {"kappa": 1.0, "width_left": 2.0})
        sol = rhp.solve_model_left(strip, g)
    else:
        g = build_diffeo("right_model", {"kappa": 1.0, "width_right": 2.0})
        sol = rhp.solve_model_right(strip, g)
    assert sol.diagnostics["gamma"] == pytest.approx(gamma_of(1.0, strip.alpha))
    assert sol.jump_sup < 1e-6
    assert np.isfinite(sol.constant)


def test_omega_for_identity_is_z(strip) -> None:
    sol = rhp.solve_omega(build_diffeo("identity"), strip)
    z = np.array([-4.0 - 0.3j, 0.0 - 0.5j, 6.0 - 0.7j])
    assert np.allclose(sol.evaluate(z), z, atol=1e-10)
    assert sol.diagnostics["windings"] == [1] * 5


def test_omega_is_injective_for_general_weld(strip) -> None:
    g = build_diffeo("general", {"kappa_minus": -0.3, "kappa_plus": 0.3, "width": 2.0})
    sol = rhp.solve_omega(g, strip, targets=3)
    assert sol.jump_sup < 1e-6
    assert sol.diagnostics["windings"] == [1, 1, 1]


def test_winding_number() -> None:
    def f(z):
        return z
    assert rhp.winding_number(f, 0.5 - 0.5j, (-1.0, 1.0), (-1.0, 0.0)) == 1
    assert rhp.winding_number(f, 3.0 - 0.5j, (-1.0, 1.0), (-1.0, 0.0)) == 0


def test_welded_cauchy_of_constant_is_indicator(strip) -> None:
    cfg = strip.with_kappa(0.5)
    def const(s):
        return np.full(np.shape(s), 3.0 + 0j)
    right, left = 2.0 - 0.5j, -2.0 - 0.5j
    assert rhp.welded_cauchy(const, np.array([right]), cfg)[0] == pytest.approx(3.0)
    assert rhp.welded_cauchy(const, np.array([left]), cfg)[0] == pytest.approx(0.0, abs=1e-12)


def test_welded_cauchy_jump_on_line(strip) -> None:
    cfg = strip.with_kappa(0.5)
    def ups(s):
        return np.asarray(s, dtype=complex) ** 2
    z = np.array([0.3 * complex(0.5, -cfg.alpha)])
    with pytest.raises(ContourError):
        rhp.welded_cauchy(ups, z, cfg)
    plus = rhp.welded_cauchy(ups, z, cfg, side="+")
    minus = rhp.welded_cauchy(ups, z, cfg, side="-")
    assert plus[0] - minus[0] == pytest.approx(ups(z)[0], abs=1e-10)


def test_solve_nonlocal_is_linear_in_shift(strip) -> None:
    g = build_diffeo("custom", BUMP)
    grid = rhp.grid_for(g, strip)
    first = lambda x: x - g(x)
    second = lambda x: 1j * (x - g(x)) ** 2

    def solve(local):
        return rhp.solve_nonlocal(g, rhp.ShiftFunction(g=g, alpha=strip.alpha, local=local), strip, grid).theta

    combined = solve(lambda x: 2.0 * first(x) - 0.5j * second(x))
    expected = 2.0 * solve(first) - 0.5j * solve(second)
    assert np.max(np.abs(combined - expected)) < 1e-10


def _sech_derivatives(u):
    s, t = 1.0 / np.cosh(u), np.tanh(u)
    return (s, -s * t, s * (t * t - s * s), -s * t**3 + 5.0 * s**3 * t)


def test_derivatives_match_exact_solution(strip) -> None:
    # Ξ(z) = sech(z + iα/2) ist im abgeschlossenen Streifen analytisch und klingt beidseitig ab
    g = build_diffeo("custom", BUMP)
    shift_z = 0.5j * strip.alpha

    def exact(z, n=0):
        return _sech_derivatives(np.asarray(z, dtype=complex) + shift_z)[n]

    shift = rhp.ShiftFunction(g=g, alpha=strip.alpha, local=lambda x: exact(g(x) - 1j * strip.alpha) - exact(x))
    sol = rhp.solve_nonlocal(g, shift, strip, grid=rhp.grid_for(g, strip, X=40.0))
    x = sol.grid.nodes
    assert np.max(np.abs(sol.theta_minus - exact(x))) < 1e-8

    bulk = np.linspace(-4.0, 4.0, 17)
    for n, limit in ((1, 1e-6), (2, 1e-5), (3, 1e-4)):
        on_line = sol.boundary_minus(bulk, derivative=n)
        assert np.max(np.abs(on_line - exact(bulk, n))) < limit

    z = np.linspace(-4.0, 4.0, 9) - 0.5j * strip.alpha
    assert np.max(np.abs(sol.reconstruct(z) - exact(z))) < 1e-8
    for n in (1, 2, 3):
        assert np.max(np.abs(sol.derivative(z, n) - exact(z, n))) < 1e-7


def test_chi_derivative_includes_identity_offset(strip) -> None:
    sol = rhp.solve_chi(build_diffeo("identity"), strip)
    z = np.array([-2.0 - 0.4j, 3.0 - 0.6j])
    assert np.allclose(sol.derivative(z, 1), 1.0, atol=1e-12)
    assert np.allclose(sol.derivative(z, 2), 0.0, atol=1e-12)
    with pytest.raises(DomainError):
        sol.derivative(np.array([0.2j]), 1)
    with pytest.raises(ValueError):
        sol.derivative(z, 4)


def test_omega_offset_derivative_matches_difference(strip) -> None:
    gamma = 0.4 - 0.3j
    omega = rhp.omega_left(gamma, strip.tau)
    deriv = rhp.omega_derivative(gamma, strip.tau, 1)
    z = np.array([-1.5 - 0.3j, 0.2 - 0.5j, 2.0 - 0.1j])
    h = 1e-4
    for n in (1, 2, 3):
        lower = omega if n == 1 else (lambda zz, m=n - 1: deriv(zz, m))
        fd = (lower(z + h) - lower(z - h)) / (2 * h)
        assert np.max(np.abs(deriv(z, n) - fd)) < 1e-6


def test_welded_cauchy_is_periodic_along_gamma(strip) -> None:
    cfg = strip.with_kappa(0.5)
    period = complex(0.5, -cfg.alpha)

    def ups(s):
        return np.exp(0.3j * np.asarray(s, dtype=complex))

    x = np.array([-2.0, -0.7, 0.4, 1.3, 3.1])
    here = rhp.welded_cauchy(ups, x, cfg)
    there = rhp.welded_cauchy(ups, x + period, cfg)
    assert np.max(np.abs(there - here)) < 1e-8


def test_welded_cauchy_limit_on_quadrature_node(strip) -> None:
    cfg = strip.with_kappa(0.5)
    period = complex(0.5, -cfg.alpha)
    ref, _ = gauss_legendre(128)
    z = np.array([period * 0.5 * (ref[40] + 1.0)])

    def ups(s):
        return np.asarray(s, dtype=complex) ** 2

    spectral = rhp.welded_cauchy(ups, z, cfg, side="+")
    exact = rhp.welded_cauchy(ups, z, cfg, side="+", derivative=lambda s: 2.0 * np.asarray(s, dtype=complex))
    assert np.all(np.isfinite(spectral))
    assert abs(spectral[0] - exact[0]) < 1e-9
    nearby = rhp.welded_cauchy(ups, z + 1e-7 * period, cfg, side="+")
    assert abs(nearby[0] - exact[0]) < 1e-5


@pytest.mark.slow
def test_bump_jump_shrinks_when_panels_double(strip) -> None:
    g = build_diffeo("custom", BUMP)
    coarse = rhp.solve_chi(g, strip)
    fine = rhp.solve_chi(g, strip, grid=rhp.grid_for(g, strip, section={"panel_width": 0.25, "piece_panels": 24}))
    assert fine.grid.n > coarse.grid.n
    assert coarse.jump_sup < 1e-6
    assert fine.jump_sup < max(coarse.jump_sup / 4.0, 1e-11)


@pytest.mark.parametrize("side", ["left", "right"])
def test_model_far_field_slope_is_gamma(strip, side) -> None:
    if side == "left":
        sol = rhp.solve_model_left(strip, build_diffeo("left_model", {"kappa": 1.0, "width_left": 2.0}))
        slope = rhp.far_field_slope(sol, 10.0, 20.0)
    else:
        sol = rhp.solve_model_right(strip, build_diffeo("right_model", {"kappa": 1.0, "width_right": 2.0}))
        slope = rhp.far_field_slope(sol, -20.0, -10.0)
    gamma = gamma_of(1.0, strip.alpha)
    assert abs(slope - gamma) < 1e-4 * abs(gamma)


@pytest.mark.slow
def test_right_model_constant_is_stable_under_refinement(strip) -> None:
    g = build_diffeo("right_model", {"kappa": 1.0, "width_right": 2.0})
    coarse = rhp.solve_model_right(strip, g)
    fine = rhp.solve_model_right(strip, g, grid=rhp.grid_for(g, strip, section={"panel_width": 0.25,
                                                                                 "piece_panels": 24}))
    assert fine.grid.n > coarse.grid.n
    assert abs(fine.constant - coarse.constant) < 1e-5


def test_omega_without_shift_equals_chi(strip) -> None:
    g = build_diffeo("custom", BUMP)
    omega = rhp.solve_omega(g, strip, targets=3)
    chi = rhp.solve_chi(g, strip)
    z = np.array([-3.0 - 0.3j, 0.5 - 0.5j, 4.0 - 0.8j])
    assert np.max(np.abs(omega.evaluate(z) - chi.evaluate(z))) < 1e-7


def test_left_model_without_shift_equals_chi(strip) -> None:
    g = build_diffeo("custom", BUMP)
    model = rhp.solve_model_left(strip, g)
    chi = rhp.solve_chi(g, strip)
    z = np.array([-3.0 - 0.3j, 0.5 - 0.5j, 4.0 - 0.8j])
    assert model.diagnostics["gamma"] == 0
    assert np.max(np.abs(z + model.evaluate(z) - chi.evaluate(z))) < 1e-7
