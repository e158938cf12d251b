from __future__ import annotations

import math

import numpy as np
import pytest

from errors import ConfigError, DomainError, MonotonicityError
from geometry import (StripConfig, build_diffeo, diffeo_from_config, gamma_of,
                      gamma_tilde_of, make_smooth_step)


def test_strip_defaults() -> None:
    cfg = StripConfig(alpha=1.0)
    assert cfg.tau == pytest.approx(3.0)
    assert cfg.v == pytest.approx(math.pi / 24.0)
    assert cfg.a == pytest.approx(math.pi / 3.0)


@pytest.mark.parametrize("kwargs, field", [
    ({"alpha": -1.0}, "strip.alpha"),
    ({"alpha": 1.0, "tau": 2.0}, "strip.tau"),
    ({"alpha": 1.0, "tau": 3.0, "v": 1.0}, "strip.v"),
])
def test_strip_validation_names_field(kwargs, field) -> None:
    with pytest.raises(ConfigError) as exc:
        StripConfig(**kwargs)
    assert exc.value.field == field


def test_with_kappa_keeps_other_fields(strip) -> None:
    shifted = strip.with_kappa(0.7)
    assert shifted.kappa == 0.7
    assert (shifted.alpha, shifted.tau, shifted.v) == (strip.alpha, strip.tau, strip.v)


def test_smooth_step_is_flat_outside_support() -> None:
    S = make_smooth_step(1.0, 2.0)
    assert S(np.array([-1.0, -5.0])) == pytest.approx([0.0, 0.0], abs=0.0)
    assert S(np.array([3.0, 10.0])) == pytest.approx([1.0, 1.0], abs=0.0)
    assert S(np.array(1.0)) == pytest.approx(0.5, abs=1e-14)
    x = np.linspace(-0.99, 2.99, 401)
    assert np.all(np.diff(S(x)) >= 0.0)


def test_smooth_step_has_no_cancellation_near_edges() -> None:
    S = make_smooth_step(0.0, 1.0)
    u = np.array([-0.999, -0.99, -0.9, 0.9, 0.99, 0.999])
    vals = S(u)
    assert np.all(vals[:3] >= 0.0) and np.all(vals[3:] <= 1.0)
    assert 0.0 < vals[0] < vals[1] < vals[2]
    assert 1.0 - vals[3] == pytest.approx(vals[2], rel=1e-9)
    x = np.linspace(-1.0, 1.0, 2001)
    assert np.all(np.diff(S(x)) >= 0.0)


def test_pieces_cover_steps_and_bumps() -> None:
    g = build_diffeo("glued", {"kappa": 1.0, "w": 10.0, "width_left": 2.0, "width_right": 3.0,
                               "bumps": [{"center": 0.0, "width": 1.0, "amplitude": 0.1}]})
    assert sorted(g.pieces) == [(-12.0, -8.0, 2.0), (-1.0, 1.0, 1.0), (7.0, 13.0, 3.0)]


def test_smooth_step_derivative_matches_difference() -> None:
    S = make_smooth_step(0.0, 1.5)
    x = np.linspace(-1.2, 1.2, 13)
    h = 1e-6
    fd = (S(x + h) - S(x - h)) / (2 * h)
    assert np.max(np.abs(S.derivative(x, 1) - fd)) < 1e-6


def test_left_model_tails_are_exact() -> None:
    g = build_diffeo("left_model", {"kappa": 1.0, "width_left": 2.0})
    x = np.array([-50.0, -2.0, 2.0, 50.0])
    assert np.array_equal(g(x), np.array([-50.0, -2.0, 3.0, 51.0]))
    assert g.kappa_minus == 0.0 and g.kappa_plus == 1.0


def test_right_model_mirrors_left() -> None:
    g = build_diffeo("right_model", {"kappa": 1.0, "width_right": 2.0})
    assert g.kappa_minus == 1.0 and g.kappa_plus == 0.0
    assert g(np.array(-10.0)) == -9.0
    assert g(np.array(10.0)) == 10.0


def test_glued_needs_room_between_patches() -> None:
    with pytest.raises(DomainError):
        build_diffeo("glued", {"kappa": 1.0, "w": 1.5, "width_left": 2.0, "width_right": 2.0})
    g = build_diffeo("glued", {"kappa": 1.0, "w": 10.0})
    assert g(np.array(0.0)) == pytest.approx(1.0, abs=0.0)
    assert g.kappa_minus == 0.0 and g.kappa_plus == pytest.approx(0.0)


def test_glued_half_distance_must_exceed_both_widths() -> None:
    # 2w > M_L + M_R reicht nicht, die Patches brauchen w > M_L + M_R
    with pytest.raises(DomainError):
        build_diffeo("glued", {"kappa": 1.0, "w": 3.0, "width_left": 2.0, "width_right": 2.0})
    g = build_diffeo("glued", {"kappa": 1.0, "w": 4.5, "width_left": 2.0, "width_right": 2.0})
    assert g.support_bound == pytest.approx(6.5)


def test_non_monotone_diffeo_is_rejected() -> None:
    with pytest.raises(MonotonicityError):
        build_diffeo("custom", {"steps": [{"center": 0.0, "width": 0.1, "height": -2.0}]})


def test_unknown_kind_is_config_error() -> None:
    with pytest.raises(ConfigError) as exc:
        diffeo_from_config({"kind": "spiral"})
    assert exc.value.field == "diffeo.kind"


def test_inverse_round_trip() -> None:
    g = build_diffeo("general", {"kappa_minus": -0.5, "kappa_plus": 1.0, "width": 2.0})
    y = np.linspace(-6.0, 6.0, 25)
    assert np.max(np.abs(g(g.inverse(y)) - y)) < 1e-12


def test_gamma_constants() -> None:
    assert gamma_of(0.0, 1.0) == 0.0
    assert gamma_tilde_of(0.8, 1.0) == pytest.approx(gamma_of(0.8, 1.0) + 1.0)
    assert gamma_tilde_of(0.0, 1.0) == pytest.approx(1.0)
