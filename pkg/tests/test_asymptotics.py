from __future__ import annotations

import math

import numpy as np
import pytest

import asymptotics


def test_fit_decay_recovers_rate() -> None:
    w = np.array([10.0, 14.0, 18.0, 22.0])
    assert asymptotics.fit_decay(w, 3.0 * np.exp(-0.8 * w)) == pytest.approx(0.8)
    assert math.isnan(asymptotics.fit_decay(w, np.zeros(4)))


def test_sweep_report_frame_pads_missing_columns() -> None:
    report = asymptotics.SweepReport(w_values=[10.0, 20.0, 30.0], conditions=[4.0, 5.0, 12.0], sweep_ratio=2.0)
    frame = report.to_frame()
    assert list(frame.columns) == ["w", "error_left", "error_right", "delta_c", "cond"]
    assert frame["error_left"].isna().all()
    assert report.condition_ratio == pytest.approx(12.0 / 5.0)
    assert report.flagged


def test_seam_side_follows_line(strip) -> None:
    comp = asymptotics.CompositeChi(left=None, right=None, w=20.0, kappa=1.0, alpha=strip.alpha)
    assert comp.is_left(np.array([0.4 - 0.5j]))[0]
    assert not comp.is_left(np.array([0.6 - 0.5j]))[0]


def test_zero_shift_composite_is_exact(strip) -> None:
    row = asymptotics.composite_error(16.0, strip, kappa=0.0, audit_points=11)
    assert row["error_left"] < 1e-8
    assert row["error_right"] < 1e-8
    assert row["delta_c"] < 1e-8


def test_composite_tracks_welded_solution(strip) -> None:
    row = asymptotics.composite_error(24.0, strip, kappa=1.0, audit_points=21)
    assert row["error_left"] < 1e-2
    assert row["error_right"] < 1e-2
    assert row["seam_jump"] < 1e-2
    assert row["N"] > 0 and np.isfinite(row["cond"])


def test_identity_condition_sweep_is_flat(strip) -> None:
    report = asymptotics.condition_sweep([12.0, 16.0, 20.0], strip, kappa=0.0)
    assert report.condition_ratio == pytest.approx(1.0, rel=1e-12)
    assert not report.flagged


def test_kernel_decomposition_is_exact(strip) -> None:
    assert asymptotics.decomposition_defect(20.0, strip, kappa=1.0) < 1e-10
    assert asymptotics.decomposition_defect(15.0, strip, kappa=-0.7, m_left=1.5, m_right=3.0, seed=3) < 1e-10


def test_coupling_kernels_decay_at_sinh_rate(strip) -> None:
    out = asymptotics.b_tot_decay_check(20.0, strip, kappa=1.0)
    for key in ("rate_left", "rate_left_dx", "rate_left_dy", "rate_right", "rate_right_dx", "rate_right_dy"):
        assert out[key] == pytest.approx(out["expected_rate"], rel=0.05)
    assert out["dead_zone_max"] == 0.0
    assert out["min_rate_ratio"] > 0.95


@pytest.mark.slow
def test_composite_error_decays_with_w(strip) -> None:
    report = asymptotics.composite_sweep([24.0, 30.0, 36.0, 42.0], strip, kappa=4.0, m_left=6.0, m_right=6.0,
                                         audit_points=21)
    for errors in (report.error_left, report.error_right, report.delta_c):
        assert all(b < a for a, b in zip(errors, errors[1:]))
    summary = report.summary()
    assert summary["eta_left"] > 0.0
    assert summary["eta_right"] > 0.0
    assert summary["eta_c"] > 0.0


def test_shifted_condition_sweep_stays_within_ratio(strip) -> None:
    report = asymptotics.condition_sweep([12.0, 16.0, 20.0, 24.0, 28.0], strip, kappa=1.0)
    assert len(report.conditions) == 5
    assert report.condition_ratio <= 2.0
    assert not report.flagged
