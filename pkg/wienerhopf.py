"""
wienerhopf.py – Gamma-Faktorisierung von 1 − F[L] und Löser auf den Halbgeraden
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import lu_factor, lu_solve
from scipy.special import digamma, loggamma, spherical_jn

import kernels
from errors import ContourError, DomainError
from geometry import StripConfig
from quadrature import QuadratureGrid, composite_rule, contour_rule, gauss_legendre, sinh_tail_left, sinh_tail_right

logger = logging.getLogger(__name__)

SMALL_K = 1e-6
POLE_TOL = 1e-12

# Quadratur der Konturintegrale
S_INNER = 64.0
S_OUTER = 4096.0
PANEL = 0.25
ORDER = 16
CHUNK = 512


def symbol(k, kappa: float, cfg: StripConfig) -> np.ndarray:
    """F[L^υ](k) = cosh[k(τ/2 − α − iκ)]/cosh[kτ/2]"""
    return kernels.symbol(k, cfg, kappa)


def _pole_index(z: np.ndarray) -> np.ndarray:
    """n ≥ 0 falls z ≈ −n, sonst −1."""
    n = np.rint(-z.real)
    hit = (n >= 0) & (np.abs(z + n) < POLE_TOL)
    return np.where(hit, n, -1).astype(int)


def _rectangle_rule(x0: float, x1: float, y0: float, y1: float, panel: float = PANEL, order: int = ORDER) -> tuple:
    """Knoten und komplexe Gewichte dk auf dem positiv orientierten Rechteckrand."""
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]
    nodes, weights = [], []
    for a, b in zip(corners[:-1], corners[1:]):
        length = abs(b - a)
        n = max(1, int(math.ceil(length / panel)))
        t, wt = composite_rule(np.linspace(0.0, 1.0, n + 1), order)
        nodes.append(a + (b - a) * t)
        weights.append((b - a) * wt)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class WHFactorization:
    """
    1 − F[L](k) = α↑(k)/α↓(k) mit A = (α+iκ)/2π, B = (τ−α−iκ)/2π, C = τ/2π.

    α↑ ist in der oberen, α↓ in der unteren Halbebene analytisch; α↑ hat
    eine einfache Nullstelle, α↓ einen einfachen Pol in k = 0.
    """
    kappa: float
    cfg: StripConfig = field(repr=False)

    @property
    def A(self) -> complex:
        return complex(self.cfg.alpha, self.kappa) / (2 * math.pi)

    @property
    def B(self) -> complex:
        return complex(self.cfg.tau - self.cfg.alpha, -self.kappa) / (2 * math.pi)

    @property
    def C(self) -> float:
        return self.cfg.tau / (2 * math.pi)

    @property
    def L0(self) -> complex:
        A, B, C = self.A, self.B, self.C
        return C * math.log(C) - A * np.log(A) - B * np.log(B)

    @property
    def alpha0(self) -> complex:
        return -1j * np.sqrt(2 * math.pi * self.A * self.B) * math.sqrt(math.pi)

    @property
    def alpha0_tilde(self) -> complex:
        return -1j / (math.sqrt(2 * math.pi) * np.sqrt(self.A * self.B) * math.sqrt(math.pi))

    @property
    def c1(self) -> complex:
        """Koeffizient von 1/k in α↑, α↓ = 1 + c₁/k + O(k⁻²)."""
        return -1j / 12.0 * (1.0 / self.A + 1.0 / self.B + 1.0 / (2.0 * self.C))

    def alpha_up(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        A, B, C = self.A, self.B, self.C
        z = 0.5 - 1j * C * k
        poles = _pole_index(z)
        if np.any(poles >= 0):
            raise DomainError("α↑: Polstelle von Γ(½ − iCk) getroffen", pole_index=int(poles.max()))
        small = np.abs(k) < SMALL_K
        ks = np.where(small, 1.0, k)
        log_val = (1j * ks * self.L0 + loggamma(0.5 - 1j * C * ks)
                   - loggamma(1 - 1j * B * ks) - loggamma(1 - 1j * A * ks))
        val = -1j * ks * np.sqrt(2 * math.pi * A * B) * np.exp(log_val)
        return np.where(small, k * self.alpha0, val)

    def alpha_down(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        A, B, C = self.A, self.B, self.C
        small = np.abs(k) < SMALL_K
        ks = np.where(small, 1.0, k)
        for name, z in (("Γ(iAk)", 1j * A * ks), ("Γ(iBk)", 1j * B * ks)):
            poles = np.where(small, -1, _pole_index(z))
            if np.any(poles >= 0):
                raise DomainError(f"α↓: Polstelle von {name} getroffen", pole_index=int(poles.max()))
        log_val = (1j * ks * self.L0 + loggamma(1j * A * ks) + loggamma(1j * B * ks)
                   - loggamma(0.5 + 1j * C * ks))
        val = 1j * ks * np.sqrt(A * B / (2 * math.pi)) * np.exp(log_val)
        return np.where(small, self.alpha0_tilde / np.where(small, k, 1.0), val)

    def log_derivative_up(self, k) -> np.ndarray:
        """(log α↑)′(k)"""
        k = np.asarray(k, dtype=complex)
        A, B, C = self.A, self.B, self.C
        return (1.0 / k + 1j * self.L0 - 1j * C * digamma(0.5 - 1j * C * k)
                + 1j * B * digamma(1 - 1j * B * k) + 1j * A * digamma(1 - 1j * A * k))

    def log_derivative_down(self, k) -> np.ndarray:
        """(log α↓)′(k)"""
        k = np.asarray(k, dtype=complex)
        A, B, C = self.A, self.B, self.C
        return (1.0 / k + 1j * self.L0 + 1j * A * digamma(1j * A * k)
                + 1j * B * digamma(1j * B * k) - 1j * C * digamma(0.5 + 1j * C * k))

    def argument_count(self, which: str = "up", edge: float = None, extent: float = 20.0) -> int:
        """
        Nullstellen minus Pole von α↑ (bzw. α↓) im Rechteck [−extent, extent] ×
        [edge, extent] (bzw. × [−extent, edge]) über ∮(log α)′dk/2πi.

        Standard edge = ∓v: das Rechteck enthält k = 0, erwartet werden 1 bzw. −1.
        """
        v = self.cfg.v
        if which == "up":
            y0, y1 = (-v if edge is None else edge), extent
            deriv = self.log_derivative_up
        elif which == "down":
            y0, y1 = -extent, (v if edge is None else edge)
            deriv = self.log_derivative_down
        else:
            raise ValueError(f"which muss 'up' oder 'down' sein, nicht '{which}'")
        k, dk = _rectangle_rule(-extent, extent, y0, y1)
        count = complex((deriv(k) * dk).sum()) / (2j * math.pi)
        n = int(round(count.real))
        if abs(count - n) > 1e-6:
            raise ContourError(f"Argumentprinzip für α{'↑' if which == 'up' else '↓'} nicht ganzzahlig: {count:.6g}")
        return n

    def ratio_residual(self, k) -> np.ndarray:
        """|α↑/α↓ − (1 − F[L])|"""
        k = np.asarray(k, dtype=complex)
        return np.abs(self.alpha_up(k) / self.alpha_down(k) - (1.0 - symbol(k, self.kappa, self.cfg)))


def factorization(cfg: StripConfig, kappa: float = None) -> WHFactorization:
    return WHFactorization(cfg.kappa if kappa is None else float(kappa), cfg)


def factor_table(cfg: StripConfig, kappa: float = None, k_points: int = 50, k_max: float = 20.0) -> dict:
    """Werte von α↑, α↓, Symbol und Quotientenresiduum auf ℝ + iv."""
    fac = factorization(cfg, kappa)
    k = np.linspace(-k_max, k_max, k_points) + 1j * cfg.v
    return {
        "k": k,
        "alpha_up": fac.alpha_up(k),
        "alpha_down": fac.alpha_down(k),
        "symbol": symbol(k, fac.kappa, cfg),
        "ratio_residual": fac.ratio_residual(k),
    }


# ─────────────────────────────────────────────
# Rechte Seiten der Form Σ c·|x|^m·e^{−β|x|}
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class ExpPolyRhs:
    """h(x) = Σ c·|x|^m·e^{−β|x|} auf der Halbgeraden ℝ^υ."""
    terms: tuple

    @classmethod
    def from_list(cls, items) -> "ExpPolyRhs":
        terms = tuple((complex(t["c"]), int(t.get("m", 0)), float(t["beta"])) for t in items)
        return cls(terms)

    @property
    def decay(self) -> float:
        return min(beta for _, _, beta in self.terms) if self.terms else math.inf

    @property
    def h0(self) -> complex:
        return sum(c for c, m, _ in self.terms if m == 0)

    def __call__(self, x) -> np.ndarray:
        ax = np.abs(np.asarray(x, dtype=float))
        out = np.zeros(ax.shape, dtype=complex)
        for c, m, beta in self.terms:
            out += c * ax**m * np.exp(-beta * ax)
        return out

    def transform(self, s, sign: int) -> np.ndarray:
        """F[h𝟙_{ℝ^υ}](s) in geschlossener Form."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape, dtype=complex)
        for c, m, beta in self.terms:
            denom = beta - 1j * s if sign > 0 else beta + 1j * s
            out += c * math.factorial(m) / denom ** (m + 1)
        return out


@dataclass(frozen=True)
class SampledRhs:
    """
    h auf ℝ^υ aus Werten an Gauß-Legendre-Paneelen in u = υx ∈ [0, X];
    jenseits von X gilt h = 0. decay ist die Abklingrate β von h.
    """
    sign: int
    grid: QuadratureGrid
    values: np.ndarray
    decay: float

    @classmethod
    def from_function(cls, func, sign: int, decay: float, X: float = None,
                      panel_width: float = 0.25, order: int = ORDER) -> "SampledRhs":
        if not decay > 0:
            raise DomainError("rechte Seite klingt nicht exponentiell ab (β ≤ 0)")
        if X is None:
            # e^{−βX/2} unter der Rundung, da η⁻ ≤ β/2
            X = 65.0 / decay
        n = max(1, int(math.ceil(X / panel_width)))
        edges = np.linspace(0.0, X, n + 1)
        nodes, weights = composite_rule(edges, order)
        grid = QuadratureGrid(nodes=nodes, weights=weights, X=float(X), order=order, edges=edges)
        values = np.asarray(func(sign * nodes), dtype=complex)
        return cls(sign=sign, grid=grid, values=values, decay=float(decay))

    @property
    def h0(self) -> complex:
        return complex(self.grid.interpolate(self.values, [0.0])[0])

    def __call__(self, x) -> np.ndarray:
        u = self.sign * np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(u.shape, dtype=complex)
        inside = (u >= 0.0) & (u <= self.grid.X)
        out[inside] = self.grid.interpolate(self.values, u[inside])
        return out

    def _legendre_coefficients(self) -> np.ndarray:
        p = self.grid.order
        ref, ref_w = gauss_legendre(p)
        vals = self.values.reshape(self.grid.panel_count, p)
        return (vals * ref_w[None, :]) @ legendre.legvander(ref, p - 1) * (np.arange(p) + 0.5)[None, :]

    def transform(self, s, sign: int) -> np.ndarray:
        """
        F[h𝟙_{ℝ^υ}](s) exakt für den Paneel-Interpolanten:
        ∫_{−1}^{1} P_n(t)e^{iωt}dt = 2iⁿ j_n(ω).
        """
        if sign != self.sign:
            raise DomainError(f"Abtastwerte liegen auf ℝ^{self.sign:+d}, nicht auf ℝ^{sign:+d}")
        s = np.asarray(s, dtype=complex)
        shape = s.shape
        sigma = self.sign * np.atleast_1d(s).ravel()
        edges = self.grid.edges
        half = 0.5 * float(edges[1] - edges[0])
        centres = 0.5 * (edges[:-1] + edges[1:])
        coef = self._legendre_coefficients()
        p = self.grid.order
        n = np.arange(p)
        out = np.empty(sigma.shape, dtype=complex)
        for start in range(0, sigma.size, CHUNK):
            sg = sigma[start:start + CHUNK]
            omega = sg * half
            tiny = np.abs(omega) < 1e-3
            jn = spherical_jn(n[None, :], np.where(tiny, 1.0, omega)[:, None])
            if np.any(tiny):
                # Reihe j_n(ω) ≈ ωⁿ/(2n+1)!!·(1 − ω²/(2(2n+3)))
                dfact = np.array([float(np.prod(np.arange(2 * k + 1, 0, -2))) for k in n])
                w_t = omega[tiny][:, None]
                jn[tiny] = w_t ** n[None, :] / dfact[None, :] * (1.0 - w_t**2 / (2.0 * (2 * n[None, :] + 3)))
            kernel = 2.0 * (1j ** n)[None, :] * jn
            phases = np.exp(1j * np.outer(sg, centres))
            out[start:start + CHUNK] = half * ((phases @ coef) * kernel).sum(axis=1)
        return out.reshape(shape)


@dataclass(frozen=True)
class HalfLineProblem:
    """
    f − L^υ[𝟙_{ℝ^υ} f] = h auf ℝ^υ, υ = sign ∈ {+1, −1}.
    """
    sign: int
    rhs: "ExpPolyRhs | SampledRhs"
    cfg: StripConfig
    eta_minus: float = None
    sigma: float = 1.0

    @property
    def kappa(self) -> float:
        return self.cfg.kappa_plus if self.sign > 0 else self.cfg.kappa_minus


@dataclass
class HalfLineSolution:
    x: np.ndarray
    f: np.ndarray
    constant: complex
    eta_minus: float


def _check_problem(problem: HalfLineProblem) -> float:
    if problem.sign not in (1, -1):
        raise DomainError(f"Vorzeichen υ muss ±1 sein, nicht {problem.sign}")
    eta = problem.rhs.decay
    if not eta > 0:
        raise DomainError("rechte Seite klingt nicht exponentiell ab (β ≤ 0)")
    eta_minus = problem.eta_minus if problem.eta_minus is not None else min(eta / 2.0, problem.cfg.v)
    if eta_minus >= eta:
        raise ContourError(f"Konturen klemmen ein: η⁻ = {eta_minus} ≥ η = {eta}")
    if eta_minus <= 0:
        raise ContourError("η⁻ muss positiv sein")
    return eta_minus


def _cauchy_sum(s: np.ndarray, ws: np.ndarray, phi: np.ndarray, k: np.ndarray) -> np.ndarray:
    """(1/2iπ)·Σ w_s φ(s)/(s − k), blockweise über k."""
    out = np.empty(k.shape, dtype=complex)
    wphi = ws * phi
    for start in range(0, k.size, CHUNK):
        kk = k[start:start + CHUNK]
        out[start:start + CHUNK] = (wphi[None, :] / (s[None, :] - kk[:, None])).sum(axis=1)
    return out / (2j * math.pi)


def solve_half_line(problem: HalfLineProblem, x: np.ndarray) -> HalfLineSolution:
    """
    Wiener-Hopf-Lösung auf ℝ^υ, ausgewertet an den Punkten x.

    υ = +: F[f⁺](k) = (F[h⁺](k) + J(k))/α↑(k) auf ℝ + iv,
           J(k) = (1/2iπ)∫_{ℝ−iη⁻} [(α↓(s) − 1)F[h⁺](s) − r(s)]/(s − k) ds.
    υ = −: F[f⁻](k) = −α↓(k)(−F[h⁻](k) + J⁻(k)) auf ℝ − iv,
           J⁻ mit (1/α↑ − 1)F[h⁻] auf ℝ + iη⁻.
    r(s) = i·c₁·h(0)/(s ∓ iσ)² nimmt den 1/s²-Abfall heraus; sein Pol liegt
    auf der abgewandten Seite, der Beitrag zu J verschwindet.
    Zurück über f = h + (1/2π)∫ e^{−ikx} F[L](k) F[f^υ](k) dk.
    """
    eta_minus = _check_problem(problem)
    cfg, sign, h = problem.cfg, problem.sign, problem.rhs
    fac = factorization(cfg, problem.kappa)
    x = np.asarray(x, dtype=float)
    if np.any(sign * x < -1e-14):
        raise DomainError("Auswertepunkte liegen nicht auf der Halbgeraden")

    t_s, w_s = contour_rule(S_INNER, PANEL, ORDER, S_OUTER)
    t_k, w_k = contour_rule(40.0 / cfg.alpha, PANEL, ORDER)
    s = t_s - 1j * sign * eta_minus
    k = t_k + 1j * sign * cfg.v

    Fh_s = h.transform(s, sign)
    r = 1j * fac.c1 * h.h0 / (s - 1j * sign * problem.sigma) ** 2
    if sign > 0:
        phi = (fac.alpha_down(s) - 1.0) * Fh_s - r
    else:
        phi = (1.0 / fac.alpha_up(s) - 1.0) * Fh_s - r

    k_all = np.concatenate([k, [0.0]])
    J = _cauchy_sum(s, w_s, phi, k_all)
    J_k, J_0 = J[:-1], J[-1]
    Fh_k = h.transform(k, sign)
    Fh_0 = complex(h.transform(np.array(0.0), sign))

    if sign > 0:
        Ff = (Fh_k + J_k) / fac.alpha_up(k)
        constant = -1j * (Fh_0 + J_0) / fac.alpha0
    else:
        Ff = -fac.alpha_down(k) * (-Fh_k + J_k)
        constant = -1j * fac.alpha0_tilde * (-Fh_0 + J_0)

    spectrum = w_k * symbol(k, problem.kappa, cfg) * Ff
    f = h(x) + (np.exp(-1j * np.outer(x, k)) @ spectrum) / (2 * math.pi)
    logger.debug("Halbgerade υ=%+d: η⁻ = %.3g, C_f = %s", sign, eta_minus, constant)
    return HalfLineSolution(x=x, f=f, constant=complex(constant), eta_minus=eta_minus)


# ─────────────────────────────────────────────
# Nyström-Referenz
# ─────────────────────────────────────────────

def half_line_grid(X: float, sign: int, panel_width: float = 0.25, order: int = 16) -> tuple:
    n = max(1, int(math.ceil(X / panel_width)))
    edges = np.linspace(0.0, X, n + 1)
    nodes, weights = composite_rule(edges, order)
    if sign < 0:
        nodes, weights = -nodes[::-1], weights[::-1]
    return nodes, weights


def nystrom_half_line(problem: HalfLineProblem, X: float = 30.0,
                      panel_width: float = 0.25, order: int = 16) -> tuple:
    """
    Dichte Nyström-Lösung von (id − L^υ)f = h auf [0, X] bzw. [−X, 0];
    jenseits von X wird f konstant mit dem Randwert fortgesetzt.

    Returns:
        (Knoten, Lösung)
    """
    _check_problem(problem)
    cfg, sign = problem.cfg, problem.sign
    x, w = half_line_grid(X, sign, panel_width, order)
    zeta = kernels.zeta_of(cfg, problem.kappa)
    a = cfg.a
    A = -kernels.l_kernel(x[:, None] - x[None, :], cfg, problem.kappa) * w[None, :]
    if sign > 0:
        tail = (sinh_tail_left(a * (x - X - 1j * zeta)) - sinh_tail_left(a * (x - X + 1j * zeta))) / (2j * math.pi)
        A[:, -1] -= tail
    else:
        tail = (sinh_tail_right(a * (x + X - 1j * zeta)) - sinh_tail_right(a * (x + X + 1j * zeta))) / (2j * math.pi)
        A[:, 0] -= tail
    A[np.diag_indices_from(A)] += 1.0
    f = lu_solve(lu_factor(A), problem.rhs(x))
    return x, f
