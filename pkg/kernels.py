"""
kernels.py – sinh-Kerne m_ζ, L-Kerne und Symbole, sinh-Hilbert-Transformation, K11/K12/K21
"""
import logging
import math

import numpy as np

from errors import DomainError, TruncationError
from geometry import StripConfig, WeldingDiffeo
from quadrature import QuadratureGrid, sinh_tail_left, sinh_tail_right

logger = logging.getLogger(__name__)

POLE_TOL = 1e-14


def _sinh_checked(arg: np.ndarray) -> np.ndarray:
    s = np.sinh(arg)
    if np.any(np.abs(s) < POLE_TOL):
        raise DomainError("Polstelle des sinh-Kerns getroffen")
    return s


# ─────────────────────────────────────────────
# Baustein m_ζ und L-Kerne
# ─────────────────────────────────────────────

def m_zeta(x, zeta: complex, tau: float) -> np.ndarray:
    """m_ζ(x) = 1/(2iτ·sinh[(π/τ)(x − iζ)])"""
    a = math.pi / tau
    arg = a * (np.asarray(x, dtype=complex) - 1j * zeta)
    return 1.0 / (2j * tau * _sinh_checked(arg))


def m_zeta_ft(k, zeta: complex, tau: float) -> np.ndarray:
    """
    Fouriertransformierte ∫ m_ζ(x) e^{ikx} dx.

    0 < Re ζ < τ:  e^{−kζ}/(1 + e^{−kτ})
    −τ < Re ζ < 0: −e^{−kζ}/(1 + e^{kτ})
    """
    k = np.asarray(k, dtype=complex)
    z = complex(zeta)
    if 0.0 < z.real < tau:
        kk = np.atleast_1d(k)
        out = np.empty_like(kk)
        pos = kk.real >= 0
        kp, kn = kk[pos], kk[~pos]
        out[pos] = np.exp(-kp * z) / (1.0 + np.exp(-kp * tau))
        # für Re k < 0 mit e^{kτ} erweitert
        out[~pos] = np.exp(kn * (tau - z)) / (np.exp(kn * tau) + 1.0)
        return out.reshape(k.shape)
    if -tau < z.real < 0.0:
        return -m_zeta_ft(-k, -z, tau)
    raise DomainError(f"Re ζ = {z.real} außerhalb des Gültigkeitsfensters (−τ, 0) ∪ (0, τ)")


def zeta_of(cfg: StripConfig, kappa: float = None) -> complex:
    return complex(cfg.alpha, cfg.kappa if kappa is None else kappa)


def l_kernel(u, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    """L(u) = m_ζ(u) − m_{−ζ}(u) mit ζ = α + iκ."""
    zeta = zeta_of(cfg, kappa)
    return m_zeta(u, zeta, cfg.tau) - m_zeta(u, -zeta, cfg.tau)


def symbol(k, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    """F[L](k) = cosh[k(τ/2 − ζ)]/cosh[kτ/2], überlaufsicher ausgewertet."""
    k = np.asarray(k, dtype=complex)
    zeta = zeta_of(cfg, kappa)
    p = k * (cfg.tau / 2.0 - zeta)
    q = k * (cfg.tau / 2.0)
    s = np.where(q.real >= 0, 1.0, -1.0)
    denom = 1.0 + np.exp(-2.0 * s * q)
    if np.any(np.abs(denom) < 1e-12):
        logger.warning("Symbol nahe einer Polstelle von cosh(kτ/2) ausgewertet")
    return (np.exp(p - s * q) + np.exp(-p - s * q)) / denom


def one_minus_symbol_product(k, cfg: StripConfig, kappa: float = None) -> np.ndarray:
    """1 − F[L](k) = 2·sinh(kζ/2)·sinh(k(τ−ζ)/2)/cosh(kτ/2)"""
    k = np.asarray(k, dtype=complex)
    zeta = zeta_of(cfg, kappa)
    return 2.0 * np.sinh(k * zeta / 2.0) * np.sinh(k * (cfg.tau - zeta) / 2.0) / np.cosh(k * cfg.tau / 2.0)


# ─────────────────────────────────────────────
# Hauptwert-Matrizen mit Diagonal-Subtraktion
# ─────────────────────────────────────────────

def pv_matrix(grid: QuadratureGrid, phase: np.ndarray, dphase: np.ndarray, a: float,
              phase_ends: tuple, D: np.ndarray = None, tails: str = "both") -> np.ndarray:
    """
    Matrix P mit (P f)_i = PV ∫ f(y) φ′(y) / sinh[a(φ(y) − φ(x_i))] dy.

    Der singuläre Anteil wird mit f(x_i) subtrahiert; die Diagonale erhält
    w_i·f′(x_i)/a über die Paneel-Differentiation und das exakte Integral des
    Kerns über [−X, X]. tails ∈ {"both", "left", "none"} setzt f außerhalb
    konstant mit dem Randwert fort.
    """
    if D is None:
        D = grid.differentiation_matrix()
    w = grid.weights
    n = grid.n
    diff = a * (phase[None, :] - phase[:, None])
    np.fill_diagonal(diff, 1.0)
    P = (w * dphase)[None, :] / np.sinh(diff)
    np.fill_diagonal(P, 0.0)
    P = P.astype(complex)
    P[np.diag_indices(n)] = -P.sum(axis=1)
    P += (w / a)[:, None] * D

    lo, hi = phase_ends
    # exaktes PV-Integral des Kerns über [−X, X]
    full = (-2.0 * np.arctanh(np.exp(-a * (hi - phase))) + 2.0 * np.arctanh(np.exp(-a * (phase - lo)))) / a
    P[np.diag_indices(n)] += full
    if tails in ("both", "left"):
        P[:, 0] += sinh_tail_left(a * (lo - phase)) / a
    if tails == "both":
        P[:, -1] += sinh_tail_right(a * (hi - phase)) / a
    return P


def sinh_hilbert_matrix(grid: QuadratureGrid, tau: float, D: np.ndarray = None) -> np.ndarray:
    """Matrix von H[f](x) = PV ∫ f(y)/(iτ·sinh[(π/τ)(y−x)]) dy auf den Knoten."""
    a = math.pi / tau
    ones = np.ones(grid.n)
    P = pv_matrix(grid, grid.nodes, ones, a, (-grid.X, grid.X), D=D, tails="both")
    return P / (1j * tau)


def sinh_hilbert_pv(f: np.ndarray, x: float, grid: QuadratureGrid, tau: float) -> complex:
    """H[f](x) an einem Gitterknoten x; Auswertung zwischen Knoten wird abgelehnt."""
    try:
        i = grid.node_index(x)
    except ValueError as e:
        raise DomainError(str(e)) from e
    return complex(sinh_hilbert_matrix(grid, tau)[i] @ np.asarray(f, dtype=complex))


# ─────────────────────────────────────────────
# Die drei Integraloperatoren
# ─────────────────────────────────────────────

def kernel_K12(x, y, g: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """K12(x,y) = −1/(2iτ·sinh[(π/τ)(y − g(x) + iα)])"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    arg = cfg.a * (y - g(x) + 1j * cfg.alpha)
    return -1.0 / (2j * cfg.tau * _sinh_checked(arg))


def kernel_K21(x, y, g: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """K21(x,y) = g′(y)/(2iτ·sinh[(π/τ)(g(y) − x − iα)])"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    arg = cfg.a * (g(y) - x - 1j * cfg.alpha)
    return g.d1(y) / (2j * cfg.tau * _sinh_checked(arg))


def kernel_K11(x, y, g: WeldingDiffeo, cfg: StripConfig, diag_tol: float = 1e-12) -> np.ndarray:
    """
    K11(x,y) = g′(y)·m_0(g(y) − g(x)) − m_0(y − x).

    Auf der Diagonalen hebbarer Grenzwert g″(x)/(4πi·g′(x)).
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    a, tau = cfg.a, cfg.tau
    on_diag = np.abs(y - x) <= diag_tol * np.maximum(1.0, np.abs(x))
    ys = np.where(on_diag, x + 1.0, y)
    gx, gy = g(x), g(ys)
    val = g.d1(ys) / (2j * tau * np.sinh(a * (gy - gx))) - 1.0 / (2j * tau * np.sinh(a * (ys - x)))
    diag = g.d2(x) / (4j * math.pi * g.d1(x))
    return np.where(on_diag, diag, val)


def kernel_K(x, y, g: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """K = K11 + K12 + K21"""
    return kernel_K11(x, y, g, cfg) + kernel_K12(x, y, g, cfg) + kernel_K21(x, y, g, cfg)


def kernel_blocks(grid: QuadratureGrid, g: WeldingDiffeo, cfg: StripConfig) -> tuple:
    """
    K11, K12, K21 auf Knotenpaaren (ohne Gewichte), g nur einmal pro Knoten ausgewertet.
    """
    x = grid.nodes
    a, tau, alpha = cfg.a, cfg.tau, cfg.alpha
    gx, dg, d2g = g(x), g.d1(x), g.d2(x)

    dy = x[None, :] - x[:, None]
    dgy = gx[None, :] - gx[:, None]
    np.fill_diagonal(dy, 1.0)
    np.fill_diagonal(dgy, 1.0)
    K11 = dg[None, :] / (2j * tau * np.sinh(a * dgy)) - 1.0 / (2j * tau * np.sinh(a * dy))
    K11[np.diag_indices(grid.n)] = d2g / (4j * math.pi * dg)

    K12 = -1.0 / (2j * tau * _sinh_checked(a * (x[None, :] - gx[:, None] + 1j * alpha)))
    K21 = dg[None, :] / (2j * tau * _sinh_checked(a * (gx[None, :] - x[:, None] - 1j * alpha)))
    return K11, K12, K21


def left_tails(x, X: float, g: WeldingDiffeo, cfg: StripConfig) -> tuple:
    """
    ∫_{−∞}^{−X} K11, K12, K21 (x,y) dy für konstante Fortsetzung nach links,
    je über artanh geschlossen.
    """
    x = np.asarray(x, dtype=float)
    a, alpha = cfg.a, cfg.alpha
    gx, gX = g(x), float(g(np.array(-X)))
    pref = 1.0 / (2j * cfg.tau * a)
    t11 = pref * (sinh_tail_left(a * (gX - gx)) - sinh_tail_left(a * (-X - x)))
    t12 = -pref * sinh_tail_left(a * (-X - gx + 1j * alpha))
    t21 = pref * sinh_tail_left(a * (gX - x - 1j * alpha))
    return t11, t12, t21


def left_tail_K(x, X: float, g: WeldingDiffeo, cfg: StripConfig) -> np.ndarray:
    """∫_{−∞}^{−X} K(x,y) dy"""
    return sum(left_tails(x, X, g, cfg))


# ─────────────────────────────────────────────
# Rechte Seite der Integralgleichung
# ─────────────────────────────────────────────

def check_decay(G: np.ndarray, grid: QuadratureGrid, cfg: StripConfig, tol: float = 1e-10):
    """|G| < tol auf den äußeren 5 % der Knoten, sonst TruncationError mit benötigtem X."""
    n_out = max(1, int(math.ceil(0.05 * grid.n)))
    outer = np.concatenate([np.abs(G[:n_out]), np.abs(G[-n_out:])])
    worst = float(np.max(outer))
    if worst >= tol:
        required = grid.X + math.log(worst / tol) / cfg.a
        raise TruncationError(f"Shiftfunktion klingt am Gitterrand nicht ab (max |G| = {worst:.3e})", required)


def assemble_rhs(G: np.ndarray, g: WeldingDiffeo, grid: QuadratureGrid, cfg: StripConfig,
                 tol: float = 1e-10, H: np.ndarray = None) -> np.ndarray:
    """rhs = ½{G + H[G]} − K12[G]"""
    G = np.asarray(G, dtype=complex)
    check_decay(G, grid, cfg, tol)
    if not np.any(G):
        return np.zeros(grid.n, dtype=complex)
    if H is None:
        H = sinh_hilbert_matrix(grid, cfg.tau)
    x = grid.nodes
    K12 = kernel_K12(x[:, None], x[None, :], g, cfg) * grid.weights[None, :]
    return 0.5 * (G + H @ G) - K12 @ G
