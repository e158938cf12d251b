from __future__ import annotations

import math

import numpy as np
import pytest

import cft
from errors import ConfigError, DomainError
from geometry import gamma_tilde_of
from quadrature import gauss_legendre

X = np.linspace(-2.0, 2.0, 9)


def _profile(**kwargs) -> cft.ProfileParams:
    base = {"c": 1.0, "kappa": 1.0, "ell": 2.0, "alpha": 1.0}
    base.update(kwargs)
    return cft.ProfileParams(**base)


def test_schwarzian_of_affine_and_moebius() -> None:
    affine = (lambda x: np.full_like(x, 3.0), lambda x: np.zeros_like(x), lambda x: np.zeros_like(x))
    assert np.max(np.abs(cft.schwarzian(affine, X))) == 0.0
    # (2x + 1)/(x + 3), Determinante 5
    moebius = (lambda x: 5.0 / (x + 3.0) ** 2, lambda x: -10.0 / (x + 3.0) ** 3, lambda x: 30.0 / (x + 3.0) ** 4)
    assert np.max(np.abs(cft.schwarzian(moebius, X))) < 1e-13


def test_schwarzian_of_exponential() -> None:
    exp = (np.exp, np.exp, np.exp)
    assert np.allclose(cft.schwarzian(exp, X), -0.5)


def test_schwarzian_at_critical_point() -> None:
    square = (lambda x: 2.0 * x, lambda x: np.full_like(x, 2.0), lambda x: np.zeros_like(x))
    with pytest.raises(DomainError):
        cft.schwarzian(square, np.array([0.0, 1.0]))


def test_rate_formula_value() -> None:
    assert cft.ld_rate_formula(1.0, _profile()) == pytest.approx(-(math.pi / 12.0) * (1.0 + 1.0j))
    assert cft.ld_rate_formula(0.0, _profile()) == 0j


def test_rate_formula_is_branch_invariant() -> None:
    for lam in (0.3, 1.0, 2.5):
        assert cft.ld_rate_formula(lam, _profile(branch=-1)) == pytest.approx(cft.ld_rate_formula(lam, _profile()))


@pytest.mark.parametrize("kwargs, field", [
    ({"ell": 0.0}, "cft.ell"),
    ({"delta_beta": 0.0}, "cft.delta_beta"),
    ({"edge_shape": "zigzag"}, "cft.edge_shape"),
    ({"branch": 2}, "cft.branch"),
])
def test_profile_validation(kwargs, field) -> None:
    with pytest.raises(ConfigError) as exc:
        _profile(**kwargs)
    assert exc.value.field == field


def test_profile_geometry() -> None:
    profile = _profile()
    with pytest.raises(DomainError):
        profile.half_width(1.0)
    assert profile.half_width(10.0) == pytest.approx(10.0)
    assert profile.xi(np.array([0.0, 30.0, -30.0]), 10.0) == pytest.approx([-1.0, 0.0, 0.0])
    for shape in cft.EDGE_SHAPES:
        g = _profile(edge_shape=shape).diffeo(0.5, 10.0)
        assert g.kappa_minus == 0.0 and g.kappa_plus == 0.0
        assert g(np.array(0.0)) == pytest.approx(0.5)


def test_fit_rate_on_linear_data() -> None:
    t = np.array([10.0, 12.0, 14.0])
    rate, rel = cft.fit_rate(t, (0.5 - 0.25j) * t + 3.0j)
    assert rate == pytest.approx(0.5 - 0.25j)
    assert rel < 1e-12
    with pytest.raises(DomainError):
        cft.fit_rate([1.0], [1.0])


def test_log_psi_vanishes_at_zero(strip) -> None:
    assert cft.log_psi(0.0, 10.0, _profile(), strip) == 0j


def test_bulk_derivative_plateau(strip) -> None:
    result = cft.log_psi_details(1.0, 10.0, _profile(), strip, s_nodes=3)
    assert result.plateau_error < 1e-3
    assert max(result.derivative_gap) < 1e-5
    nodes, _ = gauss_legendre(3)
    s0 = 0.5 * (nodes[0] + 1.0)
    assert len(result.plateau) == 3
    assert result.plateau_expected[0] == pytest.approx(gamma_tilde_of(s0, 1.0))


def test_empirical_rate_matches_formula(strip) -> None:
    res = cft.fcs_rate(_profile(), strip, lambdas=[1.0], times=[10.0, 12.0, 14.0], s_nodes=4)
    assert res.relative_errors[0] < 0.05
    assert res.fit_residual[0] < 0.1
    frame = res.to_frame()
    assert list(frame.columns) == ["t", "lambda", "log_psi_re", "log_psi_im"]
    assert len(frame) == 3
    assert res.summary()["lambda_1"]["relative_error"] == pytest.approx(res.relative_errors[0])


def test_empirical_rate_at_zero_counting_field(strip) -> None:
    rate, diag = cft.ld_rate_empirical(0.0, [10.0, 12.0], _profile(), strip)
    assert rate == 0j
    assert diag["fit_ok"]


@pytest.mark.slow
def test_rate_over_four_times_at_small_and_large_lambda(strip) -> None:
    res = cft.fcs_rate(_profile(), strip, lambdas=[0.5, 2.0], times=[12.0, 16.0, 20.0, 24.0], s_nodes=4)
    assert all(err < 0.05 for err in res.relative_errors)
    assert all(r < 0.1 for r in res.fit_residual)


@pytest.mark.slow
def test_rate_does_not_depend_on_edge_shape(strip) -> None:
    times = [10.0, 12.0, 14.0]
    step = cft.fcs_rate(_profile(edge_shape="step"), strip, lambdas=[1.0], times=times, s_nodes=4)
    bump = cft.fcs_rate(_profile(edge_shape="bump"), strip, lambdas=[1.0], times=times, s_nodes=4)
    assert abs(step.empirical[0] - bump.empirical[0]) < 0.02 * abs(step.empirical[0])
