"""
asymptotics.py – Großes-w-Verhalten des geschweißten Problems: zusammengesetzte Lösung
aus den Modellproblemen, Konditions-Sweep, Zerlegung von K_tot und Abklingen von G_L/G_R
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

import config_loader as cfg_loader
import kernels
import rhp
import sweep_runner
from geometry import StripConfig, WeldingDiffeo, build_diffeo, gamma_of

logger = logging.getLogger(__name__)


def model_diffeos(kappa: float, m_left: float = 2.0, m_right: float = 2.0) -> tuple:
    """(g_L, g_R): linke Stufe um 0 mit Höhe κ, rechte mit Basis κ und Höhe −κ."""
    g_left = build_diffeo("left_model", {"kappa": kappa, "width_left": m_left})
    g_right = build_diffeo("right_model", {"kappa": kappa, "width_right": m_right})
    return g_left, g_right


def glued_diffeo(w: float, kappa: float, m_left: float = 2.0, m_right: float = 2.0) -> WeldingDiffeo:
    return build_diffeo("glued", {"w": w, "kappa": kappa, "width_left": m_left, "width_right": m_right})


def _complex_median(values: np.ndarray) -> complex:
    return complex(np.median(values.real), np.median(values.imag))


def fit_decay(w_values, errors) -> float:
    """η̂ = −Steigung von log(Fehler) gegen w; nan bei nicht positiven Fehlern."""
    w_values = np.asarray(w_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    keep = np.isfinite(errors) & (errors > 0.0)
    if np.count_nonzero(keep) < 2:
        return float("nan")
    return float(-np.polyfit(w_values[keep], np.log(errors[keep]), 1)[0])


# ─────────────────────────────────────────────
# Zusammengesetzte Lösung
# ─────────────────────────────────────────────

@dataclass
class CompositeChi:
    """
    Links von Γ₀ = [0, κ − iα]: z + χ^(L)(z + w) − 𝔠,
    rechts davon: z + χ^(R)(z − w), mit 𝔠 = 2γw − C_{χ^(R)}.
    """
    left: rhp.RHPSolution
    right: rhp.RHPSolution
    w: float
    kappa: float
    alpha: float

    @property
    def gamma(self) -> complex:
        return gamma_of(self.kappa, self.alpha)

    @property
    def c_constant(self) -> complex:
        return 2.0 * self.gamma * self.w - self.right.constant

    def left_patch(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z + self.left.evaluate(z + self.w) - self.c_constant

    def right_patch(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z + self.right.evaluate(z - self.w)

    def is_left(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return z.real < -self.kappa * z.imag / self.alpha

    def __call__(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, dtype=complex)
        left = self.is_left(z)
        if np.any(left):
            out[left] = self.left_patch(z[left])
        if np.any(~left):
            out[~left] = self.right_patch(z[~left])
        return out


def solve_models(cfg: StripConfig, kappa: float, m_left: float = 2.0, m_right: float = 2.0,
                 tolerances: dict = None) -> tuple:
    """Löst χ^(L) und χ^(R); beide hängen nicht von w ab."""
    g_left, g_right = model_diffeos(kappa, m_left, m_right)
    left = rhp.solve_model_left(cfg, g_left, tolerances=tolerances)
    right = rhp.solve_model_right(cfg, g_right, tolerances=tolerances)
    return left, right


def composite_error(w: float, cfg: StripConfig, kappa: float, m_left: float = 2.0, m_right: float = 2.0,
                    models: tuple = None, audit_points: int = 41, tolerances: dict = None) -> dict:
    """
    Vergleicht χ_w des geschweißten Problems mit der zusammengesetzten Lösung
    auf Prüfgittern bei Im z = −α/2, je ohne τ-Kragen an Γ₀.

    Returns:
        dict mit w, error_left, error_right, c_expected, c_measured, delta_c, seam_jump, cond, N
    """
    tau, alpha = cfg.tau, cfg.alpha
    if not w > m_left + m_right + 2.0 * tau:
        logger.warning("w = %.3g liegt unter M_L + M_R + 2τ = %.3g", w, m_left + m_right + 2.0 * tau)
    left, right = models if models is not None else solve_models(cfg, kappa, m_left, m_right, tolerances)
    g = glued_diffeo(w, kappa, m_left, m_right)
    chi_w = rhp.solve_chi(g, cfg, tolerances=tolerances)
    comp = CompositeChi(left=left, right=right, w=w, kappa=kappa, alpha=alpha)

    xl = np.linspace(-(w + m_left + 2.0 * tau), kappa / 2.0 - tau, audit_points)
    xr = np.linspace(kappa / 2.0 + tau, w + m_right + 2.0 * tau, audit_points)
    zl, zr = xl - 0.5j * alpha, xr - 0.5j * alpha
    err_left = float(np.max(np.abs(chi_w.evaluate(zl) - comp(zl))))
    err_right = float(np.max(np.abs(chi_w.evaluate(zr) - comp(zr))))

    c_measured = _complex_median(left.evaluate(zl + w) - chi_w.reconstruct(zl))
    seam = complex(kappa, -alpha) * np.array([0.25, 0.5, 0.75])
    seam_jump = float(np.max(np.abs(comp.left_patch(seam) - comp.right_patch(seam))))

    logger.info("w = %.3g: Fehler links %.2e, rechts %.2e, δ𝔠 = %.2e",
                w, err_left, err_right, abs(c_measured - comp.c_constant))
    return {
        "w": float(w),
        "error_left": err_left,
        "error_right": err_right,
        "c_expected": comp.c_constant,
        "c_measured": c_measured,
        "delta_c": abs(c_measured - comp.c_constant),
        "seam_jump": seam_jump,
        "cond": chi_w.condition,
        "N": chi_w.grid.n,
    }


# ─────────────────────────────────────────────
# Sweeps
# ─────────────────────────────────────────────

@dataclass
class SweepReport:
    w_values: list
    error_left: list = field(default_factory=list)
    error_right: list = field(default_factory=list)
    delta_c: list = field(default_factory=list)
    conditions: list = field(default_factory=list)
    sweep_ratio: float = 2.0

    @property
    def eta_left(self) -> float:
        return fit_decay(self.w_values, self.error_left)

    @property
    def eta_right(self) -> float:
        return fit_decay(self.w_values, self.error_right)

    @property
    def eta_c(self) -> float:
        return fit_decay(self.w_values, self.delta_c)

    @property
    def condition_ratio(self) -> float:
        if not self.conditions:
            return float("nan")
        return float(np.max(self.conditions) / np.median(self.conditions))

    @property
    def flagged(self) -> bool:
        return bool(self.condition_ratio > self.sweep_ratio)

    def to_frame(self) -> pd.DataFrame:
        n = len(self.w_values)

        def col(values):
            return list(values) if len(values) == n else [float("nan")] * n

        return pd.DataFrame({
            "w": self.w_values,
            "error_left": col(self.error_left),
            "error_right": col(self.error_right),
            "delta_c": col(self.delta_c),
            "cond": col(self.conditions),
        })

    def summary(self) -> dict:
        return {
            "points": len(self.w_values),
            "eta_left": self.eta_left,
            "eta_right": self.eta_right,
            "eta_c": self.eta_c,
            "condition_ratio": self.condition_ratio,
            "condition_flagged": self.flagged,
        }


def composite_sweep(w_list, cfg: StripConfig, kappa: float, m_left: float = 2.0, m_right: float = 2.0,
                    audit_points: int = 41, tolerances: dict = None, workers: int = None,
                    progress_callback=None) -> SweepReport:
    """composite_error über eine w-Liste; die Modellprobleme werden einmal gelöst."""
    models = solve_models(cfg, kappa, m_left, m_right, tolerances)

    def task(w):
        return composite_error(w, cfg, kappa, m_left, m_right, models, audit_points, tolerances)

    results = sweep_runner.run_batch(w_list, task, label=lambda w: f"w = {w:g}",
                                     workers=workers, progress_callback=progress_callback)
    sweep_runner.raise_first_error(results)
    rows = [r["result"] for r in results]
    ratio = float(cfg_loader.get("weld.tolerances.sweep_ratio", 2.0))
    report = SweepReport(
        w_values=[r["w"] for r in rows],
        error_left=[r["error_left"] for r in rows],
        error_right=[r["error_right"] for r in rows],
        delta_c=[r["delta_c"] for r in rows],
        conditions=[r["cond"] for r in rows],
        sweep_ratio=ratio,
    )
    if report.flagged:
        logger.warning("Kondition schwankt über den Sweep um Faktor %.2f", report.condition_ratio)
    return report


def condition_sweep(w_list, cfg: StripConfig, kappa: float, m_left: float = 2.0, m_right: float = 2.0,
                    workers: int = None, progress_callback=None) -> SweepReport:
    """
    Konditionszahlen von id − K_tot auf einem gemeinsamen Gitter, dessen
    Größe vom größten w bestimmt wird; die Stufen aller w sind verfeinert.
    """
    w_list = [float(w) for w in w_list]
    pieces = [p for w in w_list for p in glued_diffeo(w, kappa, m_left, m_right).pieces]
    grid = rhp.grid_for(glued_diffeo(max(w_list), kappa, m_left, m_right), cfg, pieces=pieces)

    def task(w):
        A = rhp.assemble_system(glued_diffeo(w, kappa, m_left, m_right), cfg, grid)
        return {"cond": rhp.condition_number(A)}

    results = sweep_runner.run_batch(w_list, task, label=lambda w: f"w = {w:g}",
                                     workers=workers, progress_callback=progress_callback)
    sweep_runner.raise_first_error(results)
    report = SweepReport(
        w_values=w_list,
        conditions=[r["result"]["cond"] for r in results],
        sweep_ratio=float(cfg_loader.get("weld.tolerances.sweep_ratio", 2.0)),
    )
    if report.flagged:
        logger.warning("Kondition schwankt über den Sweep um Faktor %.2f", report.condition_ratio)
    return report


# ─────────────────────────────────────────────
# Zerlegung von K_tot
# ─────────────────────────────────────────────

def _m(u, zeta: float, cfg: StripConfig) -> np.ndarray:
    return kernels.m_zeta(u, zeta, cfg.tau)


def coupling_left(x, y, w: float, g_left: WeldingDiffeo, g_right: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """G_L(x,y), verschwindet exakt für y ≤ w − M_R."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    edge = w - g_right.support_bound
    brace = y > edge
    if np.any(brace):
        xb, yb = x[brace], y[brace]
        gr, dgr = g_right(yb - w), g_right.d1(yb - w)
        out[brace] = (_m(gr + w - xb, cfg.alpha, cfg) * dgr
                      + _m(gr + 2.0 * w - g_left(xb + w), 0.0, cfg) * dgr
                      - _m(yb - xb, 0.0, cfg)
                      + kernels.kernel_K12(xb + w, yb + w, g_left, cfg))
    mid = brace & (y < w)
    if np.any(mid):
        out[mid] -= kernels.kernel_K(x[mid] + w, y[mid] + w, g_left, cfg)
    return out


def coupling_right(x, y, w: float, g_left: WeldingDiffeo, g_right: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """G_R(x,y), verschwindet exakt für y ≥ −w + M_L."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    edge = -w + g_left.support_bound
    brace = y < edge
    if np.any(brace):
        xb, yb = x[brace], y[brace]
        gl, dgl = g_left(yb + w), g_left.d1(yb + w)
        out[brace] = (_m(gl - w - xb, cfg.alpha, cfg) * dgl
                      + _m(gl - 2.0 * w - g_right(xb - w), 0.0, cfg) * dgl
                      - _m(yb - xb, 0.0, cfg)
                      + kernels.kernel_K12(xb - w, yb - w, g_right, cfg))
    mid = brace & (y > -w)
    if np.any(mid):
        out[mid] -= kernels.kernel_K(x[mid] - w, y[mid] - w, g_right, cfg)
    return out


def patch_kernel(x, y, w: float, g_left: WeldingDiffeo, g_right: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """
    𝟙ℝ+(x){K_R(x−w, y−w)𝟙(−w,∞)(y) + G_R} + 𝟙ℝ−(x){K_L(x+w, y+w)𝟙(−∞,w)(y) + G_L}
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    pos = x > 0.0
    for mask, shift, g_model, coupling, keep in (
            (pos, -w, g_right, coupling_right, y > -w),
            (~pos, w, g_left, coupling_left, y < w)):
        if not np.any(mask):
            continue
        xs, ys = x[mask], y[mask]
        part = coupling(xs, ys, w, g_left, g_right, cfg)
        k = keep[mask]
        if np.any(k):
            part[k] += kernels.kernel_K(xs[k] + shift, ys[k] + shift, g_model, cfg)
        out[mask] = part
    return out


def decomposition_defect(w: float, cfg: StripConfig, kappa: float, m_left: float = 2.0,
                         m_right: float = 2.0, points: int = 20, seed: int = 0) -> float:
    """max |K_tot(x,y) − Patch-Zerlegung(x,y)| an festen Pseudozufallspunkten."""
    g_left, g_right = model_diffeos(kappa, m_left, m_right)
    g = glued_diffeo(w, kappa, m_left, m_right)
    R = w + max(m_left, m_right) + 4.0 * cfg.tau
    rng = np.random.default_rng(seed)
    x = rng.uniform(-R, R, points)
    y = rng.uniform(-R, R, points)
    x = np.where(x == 0.0, 1e-3, x)
    K_tot = kernels.kernel_K(x, y, g, cfg)
    return float(np.max(np.abs(K_tot - patch_kernel(x, y, w, g_left, g_right, cfg))))


# ─────────────────────────────────────────────
# Abklingen von G_L und G_R
# ─────────────────────────────────────────────

def _envelope_rate(distance: np.ndarray, values: np.ndarray) -> float:
    mag = np.abs(values)
    keep = mag > 0.0
    if np.count_nonzero(keep) < 3:
        return float("nan")
    return float(-np.polyfit(distance[keep], np.log(mag[keep]), 1)[0])


def b_tot_decay_check(w: float, cfg: StripConfig, kappa: float, m_left: float = 2.0,
                      m_right: float = 2.0, x: float = -1.0, samples: int = 25, h: float = 1e-4) -> dict:
    """
    Exponentielle Einhüllende von G_L bei festem x (und gespiegelt G_R bei −x)
    samt ∂_x, ∂_y per zentralen Differenzen; erwartet wird die Rate π/τ.
    """
    g_left, g_right = model_diffeos(kappa, m_left, m_right)
    tau = cfg.tau
    out = {"w": float(w), "expected_rate": cfg.a}
    cases = (
        ("left", coupling_left, x, np.linspace(w + 2.0 * tau, w + 8.0 * tau, samples)),
        ("right", coupling_right, -x, np.linspace(-w - 8.0 * tau, -w - 2.0 * tau, samples)),
    )
    for name, coupling, x0, y in cases:
        def G(xx, yy):
            return coupling(xx, yy, w, g_left, g_right, cfg)

        dist = np.abs(y - x0)
        out[f"rate_{name}"] = _envelope_rate(dist, G(x0, y))
        out[f"rate_{name}_dx"] = _envelope_rate(dist, (G(x0 + h, y) - G(x0 - h, y)) / (2 * h))
        out[f"rate_{name}_dy"] = _envelope_rate(dist, (G(x0, y + h) - G(x0, y - h)) / (2 * h))

    dead_left = np.linspace(-w, w - g_right.support_bound, 9)
    dead_right = np.linspace(-w + g_left.support_bound, w, 9)
    out["dead_zone_max"] = float(max(np.max(np.abs(coupling_left(x, dead_left, w, g_left, g_right, cfg))),
                                     np.max(np.abs(coupling_right(-x, dead_right, w, g_left, g_right, cfg)))))
    rates = [out[k] for k in out if k.startswith("rate_")]
    out["min_rate_ratio"] = float(np.nanmin(rates) / cfg.a) if rates else float("nan")
    return out
