"""
cli.py – Kommandozeile: Konfiguration prüfen, Experimente ausführen, CSV/JSON schreiben
"""
import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

import asymptotics
import cft
import config_loader as cfg
import kernels
import results
import rhp
import truncated
import wienerhopf
from errors import ConfigError, ContourError, DomainError, MonotonicityError, WeldError
from geometry import StripConfig, build_diffeo, diffeo_from_config

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_STRICT = 0, 1, 2, 3


def _checked(field: str, build):
    """Baut ein Objekt aus der Konfiguration; Fehler werden zu ConfigError mit Feldname."""
    try:
        return build()
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError, DomainError, MonotonicityError) as e:
        raise ConfigError(f"Ungültige Konfiguration: {e}", field=field) from e


def _strip(kappa: float = None) -> StripConfig:
    strip = _checked("strip", lambda: StripConfig.from_config())
    return strip if kappa is None else strip.with_kappa(kappa)


def _tolerances() -> dict:
    return dict(cfg.get("weld.tolerances", {}) or {})


def _breach(breaches: list, name: str, value: float, limit: float, above: bool = True):
    bad = (value > limit) if above else (value < limit)
    if bad or (isinstance(value, float) and math.isnan(value)):
        breaches.append(f"{name} = {value:.3e} (Grenze {limit:.3e})")


def _solution_frame(sol: rhp.RHPSolution) -> pd.DataFrame:
    x = sol.grid.nodes
    return pd.DataFrame({
        "x": x,
        "weight": sol.grid.weights,
        "theta": sol.theta,
        "theta_minus": sol.theta_minus,
        "boundary_minus": sol.boundary_minus(x),
        "jump_residual": np.abs(sol.jump_residual),
    })


# ─────────────────────────────────────────────
# Unterbefehle
# ─────────────────────────────────────────────

def cmd_factorize(args) -> tuple:
    section = cfg.get("weld.wienerhopf", {}) or {}
    strip = _strip()
    tol = _tolerances()
    k_points = _checked("wienerhopf.k_points", lambda: int(section.get("k_points", 50)))
    k_max = _checked("wienerhopf.k_max", lambda: float(section.get("k_max", 20.0)))
    rhs = _checked("wienerhopf.rhs", lambda: wienerhopf.ExpPolyRhs.from_list(section.get("rhs", [])))
    X = _checked("wienerhopf.half_line_X", lambda: float(section.get("half_line_X", 30.0)))
    sigma = _checked("wienerhopf.sigma", lambda: float(section.get("sigma", 1.0)))

    table = wienerhopf.factor_table(strip, k_points=k_points, k_max=k_max)
    fac = wienerhopf.factorization(strip)
    frame = pd.DataFrame(table)
    breaches = []
    ratio_max = float(np.max(table["ratio_residual"]))
    zero_pole = abs(fac.alpha0 * fac.alpha0_tilde + 1.0)
    _breach(breaches, "ratio_residual", ratio_max, float(tol.get("factorization", 1e-10)))
    _breach(breaches, "zero_pole_product", zero_pole, float(tol.get("factorization", 1e-10)))

    payload = {"kappa": fac.kappa, "A": fac.A, "B": fac.B, "C": fac.C, "L0": fac.L0,
               "alpha0": fac.alpha0, "alpha0_tilde": fac.alpha0_tilde, "c1": fac.c1,
               "ratio_residual_max": ratio_max, "zero_pole_defect": zero_pole}
    counts = (("up_with_zero", "up", -strip.v, 1), ("up_above_zero", "up", strip.v, 0),
              ("down_with_zero", "down", strip.v, -1), ("down_below_zero", "down", -strip.v, 0))
    for name, which, edge, expected in counts:
        key = f"argument_count.{name}"
        try:
            count = fac.argument_count(which, edge=edge)
        except ContourError as e:
            breaches.append(f"{key}: {e}")
            continue
        payload[key] = count
        if count != expected:
            breaches.append(f"{key} = {count} (erwartet {expected})")
    for sign in (1, -1):
        problem = wienerhopf.HalfLineProblem(sign=sign, rhs=rhs, cfg=strip, sigma=sigma)
        x_ny, f_ny = wienerhopf.nystrom_half_line(problem, X=X)
        keep = np.abs(x_ny) <= 0.5 * X
        sol = wienerhopf.solve_half_line(problem, x_ny[keep])
        gap = float(np.max(np.abs(sol.f - f_ny[keep])))
        name = "plus" if sign > 0 else "minus"
        payload[f"half_line.{name}.gap"] = gap
        payload[f"half_line.{name}.constant"] = sol.constant
        _breach(breaches, f"half_line_{name}_gap", gap, float(tol.get("half_line", 1e-6)))
    return "factorize", frame, payload, {}, breaches


def cmd_solve_rhp(args) -> tuple:
    strip = _strip()
    g = _checked("diffeo", lambda: diffeo_from_config())
    sol = rhp.solve_chi(g, strip, tolerances=_tolerances())
    breaches = []
    _breach(breaches, "jump_residual", sol.jump_sup, float(_tolerances().get("jump", 1e-6)))
    return "solve_rhp", _solution_frame(sol), sol.summary(), {}, breaches


def cmd_solve_model(args) -> tuple:
    strip = _strip()
    section = cfg.get("weld.diffeo", {}) or {}
    side = args.side or (cfg.get("weld.model.side", "left"))
    if side not in ("left", "right"):
        raise ConfigError(f"Unbekannte Seite '{side}'", field="model.side")
    kind = "left_model" if side == "left" else "right_model"
    g = _checked("diffeo", lambda: build_diffeo(kind, section))
    solver = rhp.solve_model_left if side == "left" else rhp.solve_model_right
    sol = solver(strip, g, tolerances=_tolerances())
    X = sol.grid.X
    ends = (0.5 * X, 0.9 * X) if side == "left" else (-0.9 * X, -0.5 * X)
    slope = rhp.far_field_slope(sol, *ends)
    gamma = sol.diagnostics["gamma"]
    slope_error = abs(slope - gamma) / abs(gamma) if gamma != 0 else abs(slope)
    payload = sol.summary()
    payload.update({"far_field_slope": slope, "slope_relative_error": slope_error})
    breaches = []
    _breach(breaches, "jump_residual", sol.jump_sup, float(_tolerances().get("jump", 1e-6)))
    _breach(breaches, "slope_relative_error", slope_error, 1e-4)
    return f"solve_model_{side}", _solution_frame(sol), payload, {}, breaches


def cmd_solve_omega(args) -> tuple:
    strip = _strip()
    g = _checked("diffeo", lambda: diffeo_from_config())
    targets = _checked("omega.targets", lambda: int(cfg.get("weld.omega.targets", 5)))
    sol = rhp.solve_omega(g, strip, tolerances=_tolerances(), targets=targets)
    breaches = []
    _breach(breaches, "jump_residual", sol.jump_sup, float(_tolerances().get("jump", 1e-6)))
    if any(n != 1 for n in sol.diagnostics.get("windings", [])):
        breaches.append(f"windings = {sol.diagnostics['windings']}")
    return "solve_omega", _solution_frame(sol), sol.summary(), {}, breaches


def cmd_asymptotic_check(args) -> tuple:
    strip = _strip()
    section = cfg.get("weld.asymptotics", {}) or {}
    w_list = _checked("asymptotics.w_list", lambda: [float(w) for w in section.get("w_list", [])])
    if len(w_list) < 4:
        raise ConfigError("Für die Abklingrate werden mindestens vier w-Werte benötigt", field="asymptotics.w_list")
    kappa = _checked("asymptotics.kappa", lambda: float(section.get("kappa", 4.0)))
    m_left = _checked("asymptotics.width_left", lambda: float(section.get("width_left", 6.0)))
    m_right = _checked("asymptotics.width_right", lambda: float(section.get("width_right", 6.0)))
    audit = _checked("asymptotics.audit_points", lambda: int(section.get("audit_points", 41)))
    x0 = _checked("asymptotics.decay_x", lambda: float(section.get("decay_x", -1.0)))
    for w in w_list:
        _checked("asymptotics.w_list", lambda w=w: asymptotics.glued_diffeo(w, kappa, m_left, m_right))

    tol = _tolerances()
    report = asymptotics.composite_sweep(w_list, strip, kappa, m_left, m_right, audit, tol,
                                         progress_callback=_progress)
    conditions = asymptotics.condition_sweep(w_list, strip, kappa, m_left, m_right, progress_callback=_progress)
    report.conditions = conditions.conditions
    w_mid = w_list[len(w_list) // 2]
    decomposition = asymptotics.decomposition_defect(w_mid, strip, kappa, m_left, m_right)
    envelope = asymptotics.b_tot_decay_check(w_mid, strip, kappa, m_left, m_right, x=x0)

    breaches = []
    if report.flagged:
        breaches.append(f"condition_ratio = {report.condition_ratio:.3f}")
    _breach(breaches, "decomposition_defect", decomposition, 1e-10)
    _breach(breaches, "min_rate_ratio", envelope["min_rate_ratio"], 0.95, above=False)
    for key in ("eta_left", "eta_right", "eta_c"):
        eta = report.summary()[key]
        if not eta > 0.0:
            breaches.append(f"{key} = {eta:.3e} (kein Abklingen in w)")
    diagnostics = {"decomposition_defect": decomposition, "envelope": envelope}
    return "asymptotic_check", report.to_frame(), report.summary(), diagnostics, breaches


def cmd_invert_interval(args) -> tuple:
    strip = _strip()
    section = cfg.get("weld.truncated", {}) or {}
    w = _checked("truncated.w", lambda: float(section.get("w", 24.0)))
    width = _checked("truncated.bump_width", lambda: float(section.get("bump_width", 1.0)))
    limit = _checked("truncated.fallback_estimate", lambda: float(section.get("fallback_estimate", 0.1)))
    problem = _checked("truncated", lambda: truncated.gaussian_problem(w, strip, width))

    x = np.linspace(-w, w, 401)
    sol = truncated.invert_interval(problem, x, fallback_estimate=limit)
    oracle = truncated.invert_interval_oracle(problem, x)
    gap = float(np.max(np.abs(sol.f - oracle.f)))
    frame = pd.DataFrame({"x": x, "f_resolvent": sol.f, "f_oracle": oracle.f, "difference": np.abs(sol.f - oracle.f)})
    payload = {"w": w, "method": sol.method, "sup_gap": gap, "pi_estimate": sol.pi_estimate,
               "resolvent_defect": sol.resolvent_defect, "oracle_condition": oracle.condition,
               "fourier_nodes": sol.nodes, "oracle_nodes": oracle.nodes}
    breaches = []
    _breach(breaches, "sup_gap", gap, float(_tolerances().get("interval", 1e-4)))
    return "invert_interval", frame, payload, {}, breaches


def cmd_fcs_rate(args) -> tuple:
    strip = _strip()
    section = cfg.get("weld.cft", {}) or {}
    profile = _checked("cft", lambda: cft.ProfileParams.from_config(strip, section))
    lambdas = _checked("cft.lambdas", lambda: [float(v) for v in section.get("lambdas", [])])
    times = _checked("cft.times", lambda: sorted(float(t) for t in section.get("times", [])))
    s_nodes = _checked("cft.s_nodes", lambda: int(section.get("s_nodes", 8)))
    if len(times) < 4:
        raise ConfigError("Mindestens vier Zeiten nötig", field="cft.times")
    _checked("cft.times", lambda: profile.half_width(times[0]))

    res = cft.fcs_rate(profile, strip, lambdas, times, s_nodes, _tolerances(), progress_callback=_progress)
    breaches = []
    limit = float(_tolerances().get("rate_relative", 0.05))
    for lam, err in zip(res.lambdas, res.relative_errors):
        _breach(breaches, f"rate_relative_error[{lam:g}]", err, limit)
    payload = res.summary()
    if section.get("compare_edge_shapes", False):
        other = next(s for s in cft.EDGE_SHAPES if s != profile.edge_shape)
        alt = cft.fcs_rate(replace(profile, edge_shape=other), strip, lambdas, times, s_nodes, _tolerances(),
                           progress_callback=_progress)
        gap = max((abs(a - b) / abs(b) for a, b in zip(alt.empirical, res.empirical) if b != 0), default=0.0)
        payload.update({"edge_shape_alternative": other, "edge_shape_gap": gap})
        _breach(breaches, "edge_shape_gap", gap, 0.02)
    return "fcs_rate", res.to_frame(), payload, {}, breaches


def cmd_selftest(args) -> tuple:
    """Schnelle Identitätsprüfungen auf kleinen Gittern."""
    rows = []

    def check(name: str, value: float, limit: float):
        rows.append({"check": name, "value": float(value), "limit": limit, "passed": bool(value < limit)})

    k = np.linspace(-10.0, 10.0, 201)
    x = np.linspace(-40.0, 40.0, 16001)
    for zeta in (0.5, 1.0, 2.5):
        vals = kernels.m_zeta(x, zeta, 3.0)
        quad = trapezoid(vals[None, :] * np.exp(1j * k[:, None] * x[None, :]), x, axis=1)
        check(f"m_zeta_ft[{zeta:g}]", np.max(np.abs(quad - kernels.m_zeta_ft(k, zeta, 3.0))), 1e-7)

    for kappa in (0.0, 0.5, -1.0):
        strip = StripConfig(alpha=1.0, tau=3.0, kappa=kappa)
        table = wienerhopf.factor_table(strip, k_points=50, k_max=20.0)
        fac = wienerhopf.factorization(strip)
        check(f"ratio_residual[{kappa:g}]", np.max(table["ratio_residual"]), 1e-10)
        check(f"zero_pole[{kappa:g}]", abs(fac.alpha0 * fac.alpha0_tilde + 1.0), 1e-10)

    strip = StripConfig(alpha=1.0, tau=3.0)
    sol = rhp.solve_chi(build_diffeo("identity"), strip)
    check("identity_theta", float(np.max(np.abs(sol.theta))), 1e-10)

    w_trunc = 8.0 * strip.tau
    approx = truncated.MatrixRHPApprox.build(w_trunc, strip.with_kappa(0.5))
    lam = np.linspace(-3.0, 3.0, 10) + 1j * strip.v
    chi = truncated.matrix_rhp_chi(lam, w_trunc, strip, kappa=0.5)
    check("chi_determinant", float(np.max(np.abs(np.linalg.det(chi) - 1.0))), 1e-10)
    check("b_near_zero", abs(approx.b(np.array([1e-5]))[0] + 1.0), 1e-3)
    delta = 1e-6
    on = truncated.resolvent_leading(lam, lam, w_trunc, strip, kappa=0.5)
    near = truncated.resolvent_leading(lam, lam + delta, w_trunc, strip, kappa=0.5)
    slope = float(np.max(np.abs(on - near))) / (w_trunc * delta * max(1.0, float(np.max(np.abs(on)))))
    check("resolvent_diagonal_slope", slope, 10.0)

    frame = pd.DataFrame(rows)
    failed = [f"{r['check']} = {r['value']:.3e}" for r in rows if not r["passed"]]
    payload = {"checks": len(rows), "failed": len(failed)}
    return "selftest", frame, payload, {}, failed


COMMANDS = {
    "factorize": cmd_factorize,
    "solve-rhp": cmd_solve_rhp,
    "solve-model": cmd_solve_model,
    "solve-omega": cmd_solve_omega,
    "asymptotic-check": cmd_asymptotic_check,
    "invert-interval": cmd_invert_interval,
    "fcs-rate": cmd_fcs_rate,
    "selftest": cmd_selftest,
}


def _progress(current: int, total: int, message: str):
    logger.info("[%d/%d] %s", current, total, message)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weldrhp", description="Nicht-lokale Riemann-Hilbert-Probleme auf geschweißten Zylindern")
    parser.add_argument("-c", "--config", help="YAML-Datei, die über config.yaml gelegt wird")
    parser.add_argument("-o", "--output", help="Ausgabeverzeichnis (Standard: weld.output.directory)")
    parser.add_argument("--strict", action="store_true", help="Toleranzverletzungen beenden mit Code 3")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        if name == "solve-model":
            p.add_argument("--side", choices=("left", "right"), default=None)
    return parser


def run(args) -> int:
    conf = cfg.load_config(args.config)
    log_conf = conf.get("weld", {}).get("logging", {}) or {}
    logging.basicConfig(level=getattr(logging, str(log_conf.get("level", "INFO")).upper(), logging.INFO),
                        format=log_conf.get("format", "%(asctime)s %(levelname)s %(name)s: %(message)s"))

    stem, frame, payload, diagnostics, breaches = COMMANDS[args.command](args)

    out_dir = Path(args.output or cfg.get("weld.output.directory", "out"))
    results.write_csv(frame, out_dir / f"{stem}.csv")
    diagnostics = dict(diagnostics)
    diagnostics["breaches"] = list(breaches)
    envelope = results.build_envelope(args.command, payload, diagnostics)
    results.write_json(envelope, out_dir / f"{stem}.json")

    for b in breaches:
        logger.warning("Toleranz verletzt: %s", b)
    if breaches and args.strict:
        return EXIT_STRICT
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg.reset()
    try:
        return run(args)
    except ConfigError as e:
        print(f"Konfigurationsfehler: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except WeldError as e:
        print(f"Fehler in '{args.command}': {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
