"""
truncated.py – Integrabler Operator V, führende Ordnung der 2×2-Matrix-RHP,
Resolvente R_∞ und Inversion von id − L_w auf dem Intervall (−w, w)
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

import config_loader as cfg_loader
import kernels
from errors import DomainError
from geometry import StripConfig
from quadrature import build_grid, contour_rule
from rhp import condition_number
from wienerhopf import WHFactorization, factorization

logger = logging.getLogger(__name__)

D_MATRIX = np.array([[-1.0, -1.0], [1.0, 1.0]], dtype=complex)
ZERO_RADIUS = 1e-3
CIRCLE_RADIUS = 1e-2
CIRCLE_POINTS = 16
PANEL = 0.25
ORDER = 16
CHUNK = 512


def _mat(a11, a12, a21, a22) -> np.ndarray:
    a11, a12, a21, a22 = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a11, a12, a21, a22)))
    return np.stack([np.stack([a11, a12], axis=-1), np.stack([a21, a22], axis=-1)], axis=-2)


def _circle() -> np.ndarray:
    return CIRCLE_RADIUS * np.exp(2j * math.pi * np.arange(CIRCLE_POINTS) / CIRCLE_POINTS)


# ─────────────────────────────────────────────
# Operator V
# ─────────────────────────────────────────────

def v_kernel(k, s, w: float, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    """
    V(k,s) = −F[L](k)·(e^{i(k−s)w} − e^{−i(k−s)w})/(2iπ(k−s)) = −F[L](k)·sin((k−s)w)/(π(k−s)),
    Diagonale −F[L](k)·w/π.
    """
    k = np.asarray(k, dtype=complex)
    s = np.asarray(s, dtype=complex)
    return -kernels.symbol(k, cfg, kappa) * (w / math.pi) * np.sinc((k - s) * w / math.pi)


# ─────────────────────────────────────────────
# Matrix-RHP in führender Ordnung
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class MatrixRHPApprox:
    """
    χ_∞ = P_∞·M↑⁻¹·α↑^{σ₃} (Bereich II) bzw. P_∞·M↓·α↓^{σ₃} (Bereich III),
    P_∞ = I + D/(λ·b′(0)), b(λ) = e^{−2iwλ}/(α↑α↓). Π wird als I genommen.
    """
    w: float
    cfg: StripConfig
    fact: WHFactorization

    @classmethod
    def build(cls, w: float, cfg: StripConfig, kappa: float = None) -> "MatrixRHPApprox":
        if not w > 0:
            raise DomainError(f"Halbbreite w = {w} muss positiv sein")
        return cls(float(w), cfg, factorization(cfg, kappa))

    @property
    def kappa(self) -> float:
        return self.fact.kappa

    @property
    def b_prime0(self) -> complex:
        f = self.fact
        return 2j * (self.w + f.L0 + 2.0 * f.C * math.log(2.0))

    @property
    def theta(self) -> complex:
        return 1.0 / self.b_prime0

    @property
    def lens_height(self) -> float:
        return math.pi / (2.0 * self.cfg.tau)

    def phase(self, lam) -> np.ndarray:
        return np.exp(1j * self.w * np.asarray(lam, dtype=complex))

    def b(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        return np.exp(-2j * self.w * lam) / (self.fact.alpha_up(lam) * self.fact.alpha_down(lam))

    def symbol(self, lam) -> np.ndarray:
        return kernels.symbol(lam, self.cfg, self.kappa)

    def p_infinity(self, lam, inverse: bool = False) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        c = (-1.0 if inverse else 1.0) / (lam * self.b_prime0)
        return _mat(1.0 - c, -c, c, 1.0 + c)

    def _check(self, lam: np.ndarray):
        if np.any(np.abs(lam) < ZERO_RADIUS):
            raise DomainError("λ liegt zu nah an 0")
        if np.any(np.abs(lam.imag) >= self.lens_height):
            raise DomainError("λ liegt außerhalb des Bandes zwischen Γ↓ und Γ↑")

    def chi(self, lam, side: str = None) -> np.ndarray:
        """Abschnittsweise χ_∞(λ); auf ℝ + iv wählt side = '+' Bereich II, '−' Bereich III."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        self._check(lam)
        v = self.cfg.v
        on = np.isclose(lam.imag, v, rtol=0.0, atol=1e-14)
        upper = (lam.imag > v) & ~on
        if side in ("-", "−"):
            region2 = upper
        else:
            region2 = upper | on

        au, ad = self.fact.alpha_up(lam), self.fact.alpha_down(lam)
        F = self.symbol(lam)
        e2 = self.phase(lam) ** 2
        P = -au * ad * F
        Q = F / (au * ad)
        zero = np.zeros_like(lam)
        one = np.ones_like(lam)
        m_up_inv = _mat(one, -P * e2, zero, one)
        m_down = _mat(one, zero, Q / e2, one)
        pow_up = _mat(au, zero, zero, 1.0 / au)
        pow_down = _mat(ad, zero, zero, 1.0 / ad)
        inner = np.where(region2[:, None, None], m_up_inv @ pow_up, m_down @ pow_down)
        return self.p_infinity(lam) @ inner

    def jump_matrix(self, lam) -> np.ndarray:
        """G_χ mit χ₊·G_χ = χ₋ auf ℝ + iv."""
        lam = np.asarray(lam, dtype=complex)
        F = self.symbol(lam)
        e2 = self.phase(lam) ** 2
        return _mat(1.0 + F, -F * e2, F / e2, 1.0 - F)

    # ── Bausteine der Resolvente ──

    def _f_pm_direct(self, lam: np.ndarray) -> tuple:
        au, ad = self.fact.alpha_up(lam), self.fact.alpha_down(lam)
        e = self.phase(lam)
        b = np.exp(-2j * self.w * lam) / (au * ad)
        scale = lam * self.b_prime0
        f_plus = ad * e * (1.0 - (1.0 + b) / scale)
        f_minus = (1.0 + (1.0 + 1.0 / b) / scale) / (au * e)
        return f_plus, f_minus

    def f_pm(self, lam) -> tuple:
        """(f₊, f₋) mit hebbarer Stelle in 0 (Kreismittel für |λ| < 10⁻³)."""
        lam = np.asarray(lam, dtype=complex)
        shape = lam.shape
        lam = np.atleast_1d(lam).ravel()
        near = np.abs(lam) < ZERO_RADIUS
        fp = np.empty(lam.shape, dtype=complex)
        fm = np.empty(lam.shape, dtype=complex)
        if np.any(~near):
            fp[~near], fm[~near] = self._f_pm_direct(lam[~near])
        if np.any(near):
            pts = lam[near, None] + _circle()[None, :]
            cp, cm = self._f_pm_direct(pts)
            fp[near], fm[near] = cp.mean(axis=1), cm.mean(axis=1)
        return fp.reshape(shape), fm.reshape(shape)

    def f_pm_derivative(self, lam) -> tuple:
        """Ableitungen von f₊, f₋ per Cauchy-Formel auf einem kleinen Kreis."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        circ = _circle()
        fp, fm = self.f_pm(lam[..., None] + circ)
        weight = np.conj(circ) / CIRCLE_RADIUS ** 2
        return (fp * weight).mean(axis=-1), (fm * weight).mean(axis=-1)

    def resolvent(self, lam, mu) -> np.ndarray:
        """R_∞(λ,μ) = −F(λ)/(2iπ(λ−μ))·(f₊(λ)f₋(μ) − f₋(λ)f₊(μ)), endlich auf der Diagonalen."""
        lam, mu = np.broadcast_arrays(np.asarray(lam, dtype=complex), np.asarray(mu, dtype=complex))
        shape = lam.shape
        lam, mu = np.atleast_1d(lam).ravel(), np.atleast_1d(mu).ravel()
        F = self.symbol(lam)
        fpl, fml = self.f_pm(lam)
        fpm, fmm = self.f_pm(mu)
        diff = lam - mu
        diag = np.abs(diff) < 1e-12 * np.maximum(1.0, np.abs(lam))
        out = np.empty(lam.shape, dtype=complex)
        off = ~diag
        out[off] = -F[off] / (2j * math.pi * diff[off]) * (fpl[off] * fmm[off] - fml[off] * fpm[off])
        if np.any(diag):
            dp, dm = self.f_pm_derivative(lam[diag])
            out[diag] = -F[diag] / (2j * math.pi) * (fml[diag] * dp - fpl[diag] * dm)
        return out.reshape(shape)

    def apply_resolvent(self, nodes: np.ndarray, weights: np.ndarray, u: np.ndarray) -> np.ndarray:
        """(R_∞u)(λ_i) = Σ_j R_∞(λ_i, λ_j) w_j u_j als Rang-2-Cauchy-Summe in Zeilenblöcken."""
        F = self.symbol(nodes)
        fp, fm = self.f_pm(nodes)
        dp, dm = self.f_pm_derivative(nodes)
        q = weights * u
        qp, qm = fp * q, fm * q
        n = nodes.size
        out = np.empty(n, dtype=complex)
        for start in range(0, n, CHUNK):
            rows = slice(start, min(start + CHUNK, n))
            diff = nodes[rows, None] - nodes[None, :]
            idx = np.arange(rows.start, rows.stop)
            diff[idx - start, idx] = 1.0
            inv = 1.0 / diff
            inv[idx - start, idx] = 0.0
            out[rows] = fp[rows] * (inv @ qm) - fm[rows] * (inv @ qp)
        out *= -F / (2j * math.pi)
        out += -F / (2j * math.pi) * (fm * dp - fp * dm) * q
        return out

    def apply_v(self, nodes: np.ndarray, weights: np.ndarray, q: np.ndarray) -> np.ndarray:
        n = nodes.size
        out = np.empty(n, dtype=complex)
        qw = weights * q
        for start in range(0, n, CHUNK):
            rows = slice(start, min(start + CHUNK, n))
            out[rows] = v_kernel(nodes[rows, None], nodes[None, :], self.w, self.cfg, self.kappa) @ qw
        return out

    def pi_estimate(self, extent: float = None) -> float:
        """
        Ein Neumann-Schritt für die Korrektur Π:
        (1/2π)∫_{Γ↑∪Γ↓} ‖P_∞(M − I)P_∞⁻¹‖ |dλ| geteilt durch den Abstand zu ℝ + iv.
        """
        T = extent if extent is not None else max(40.0 / self.cfg.alpha, 20.0)
        t, wt = contour_rule(T, PANEL, ORDER)
        h = self.lens_height
        total = 0.0
        for sign in (1.0, -1.0):
            lam = t + 1j * sign * h
            au, ad = self.fact.alpha_up(lam), self.fact.alpha_down(lam)
            F = self.symbol(lam)
            e2 = self.phase(lam) ** 2
            zero = np.zeros_like(lam)
            if sign > 0:
                jump = _mat(zero, -au * ad * F * e2, zero, zero)
            else:
                jump = _mat(zero, zero, F / (au * ad) / e2, zero)
            delta = self.p_infinity(lam) @ jump @ self.p_infinity(lam, inverse=True)
            total += float((wt * np.linalg.norm(delta, ord=2, axis=(-2, -1))).sum())
        gap = h - self.cfg.v
        return total / (2.0 * math.pi * gap)


def matrix_rhp_chi(lam, w: float, cfg: StripConfig, side: str = None, kappa: float = None) -> np.ndarray:
    return MatrixRHPApprox.build(w, cfg, kappa).chi(lam, side)


def resolvent_leading(lam, mu, w: float, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    return MatrixRHPApprox.build(w, cfg, kappa).resolvent(lam, mu)


# ─────────────────────────────────────────────
# Intervallproblem (id − L_w)f = h
# ─────────────────────────────────────────────

@dataclass
class IntervalProblem:
    """h auf (−w, w); h_hat ist optional die Fouriertransformierte ∫ h e^{ikx} dx."""
    w: float
    cfg: StripConfig
    h: Callable
    h_hat: Optional[Callable] = None
    scale: float = 1.0

    def __post_init__(self):
        if not self.w > 0:
            raise DomainError(f"Halbbreite w = {self.w} muss positiv sein")

    def transform(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        if self.h_hat is not None:
            return np.asarray(self.h_hat(k), dtype=complex)
        grid = build_grid(self.w, order=ORDER, panel_width=PANEL)
        hw = grid.weights * np.asarray(self.h(grid.nodes), dtype=complex)
        flat = np.atleast_1d(k).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for start in range(0, flat.size, CHUNK):
            kk = flat[start:start + CHUNK, None]
            out[start:start + CHUNK] = (np.exp(1j * kk * grid.nodes[None, :]) @ hw)
        return out.reshape(k.shape)


def gaussian_problem(w: float, cfg: StripConfig, width: float = 1.0,
                     center: float = 0.0, amplitude: float = 1.0) -> IntervalProblem:
    """Gaußsche Beule A·exp(−(x−c)²/(2σ²)) mit geschlossener Fouriertransformierter."""
    sigma = float(width)

    def h(x):
        return amplitude * np.exp(-((np.asarray(x, dtype=float) - center) ** 2) / (2 * sigma ** 2)) + 0j

    def h_hat(k):
        k = np.asarray(k, dtype=complex)
        return amplitude * sigma * math.sqrt(2 * math.pi) * np.exp(1j * k * center - 0.5 * sigma ** 2 * k ** 2)

    return IntervalProblem(w=w, cfg=cfg, h=h, h_hat=h_hat, scale=sigma)


@dataclass
class IntervalSolution:
    x: np.ndarray
    f: np.ndarray
    method: str
    pi_estimate: float = float("nan")
    resolvent_defect: float = float("nan")
    condition: float = float("nan")
    nodes: int = 0


def interval_matrix(grid, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    """Gewichtete Matrix L(x_i − x_j)·w_j von L_w auf dem Gitter."""
    x = grid.nodes
    return kernels.l_kernel(x[:, None] - x[None, :], cfg, kappa) * grid.weights[None, :]


def invert_interval_oracle(problem: IntervalProblem, x=None, panel_width: float = 0.5,
                           order: int = 8) -> IntervalSolution:
    """Dichter Nyström-Löser auf (−w, w), ausgewertet mit der Nyström-Interpolation."""
    cfg = problem.cfg
    grid = build_grid(problem.w, order=order, panel_width=panel_width)
    A = -interval_matrix(grid, cfg)
    A[np.diag_indices_from(A)] += 1.0
    lu_piv = lu_factor(A)
    cond = condition_number(A, lu_piv[0])
    f_nodes = lu_solve(lu_piv, np.asarray(problem.h(grid.nodes), dtype=complex))

    x = np.linspace(-problem.w, problem.w, 401) if x is None else np.asarray(x, dtype=float)
    Lx = kernels.l_kernel(x[:, None] - grid.nodes[None, :], cfg) * grid.weights[None, :]
    f = np.asarray(problem.h(x), dtype=complex) + Lx @ f_nodes
    logger.debug("Orakel: N = %d, cond = %.3e", grid.n, cond)
    return IntervalSolution(x=x, f=f, method="oracle", condition=cond, nodes=grid.n)


def invert_interval(problem: IntervalProblem, x=None, fallback_estimate: float = None) -> IntervalSolution:
    """
    F[L·f] = (id − R_∞)(F[L]·F[h]) auf ℝ + iv, f = h + L*f auf (−w, w).

    Args:
        problem: Intervallproblem
        x: Auswertepunkte in [−w, w] (Standard: 401 äquidistante Punkte)
        fallback_estimate: Schranke für die Π-Schätzung, oberhalb derer das Orakel rechnet

    Returns:
        IntervalSolution
    """
    cfg = problem.cfg
    limit = fallback_estimate
    if limit is None:
        limit = float(cfg_loader.get("weld.truncated.fallback_estimate", 0.1))
    approx = MatrixRHPApprox.build(problem.w, cfg)
    estimate = approx.pi_estimate()
    x = np.linspace(-problem.w, problem.w, 401) if x is None else np.asarray(x, dtype=float)

    if estimate > limit:
        logger.warning("w = %.3g zu klein für R_∞ (Π-Schätzung %.2e > %.2e), Rückfall auf das Orakel",
                       problem.w, estimate, limit)
        sol = invert_interval_oracle(problem, x)
        sol.pi_estimate = estimate
        return sol

    extent = max(40.0 / cfg.alpha, 10.0 / problem.scale)
    t, wt = contour_rule(extent, PANEL, ORDER)
    lam = t + 1j * cfg.v
    u = approx.symbol(lam) * problem.transform(lam)
    Ru = approx.apply_resolvent(lam, wt, u)
    g_hat = u - Ru

    scale = max(float(np.max(np.abs(u))), 1e-300)
    defect = float(np.max(np.abs(g_hat + approx.apply_v(lam, wt, g_hat) - u))) / scale if np.any(u) else 0.0

    g = np.empty(x.shape, dtype=complex)
    q = wt * g_hat
    for start in range(0, x.size, CHUNK):
        xx = x[start:start + CHUNK, None]
        g[start:start + CHUNK] = np.exp(-1j * lam[None, :] * xx) @ q / (2 * math.pi)
    f = np.asarray(problem.h(x), dtype=complex) + g
    logger.info("Intervall w = %.3g: %d Fourierknoten, Π-Schätzung %.2e, Resolventendefekt %.2e",
                problem.w, lam.size, estimate, defect)
    return IntervalSolution(x=x, f=f, method="resolvent", pi_estimate=estimate,
                            resolvent_defect=defect, nodes=lam.size)
