"""
rhp.py – Nicht-lokales Riemann-Hilbert-Problem: Nyström-Löser, Rekonstruktion,
Modellprobleme χ^(L), χ^(R), Ω und geschweißte Cauchy-Transformation
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

import config_loader as cfg_loader
import kernels
from errors import ContourError, DomainError, IllConditionedError, SolveError
from geometry import StripConfig, WeldingDiffeo, gamma_of, gamma_tilde_of
from quadrature import QuadratureGrid, build_grid, gauss_legendre, sinh_tail_left

logger = logging.getLogger(__name__)

CHUNK = 256


# ─────────────────────────────────────────────
# Gitter und Shiftfunktion
# ─────────────────────────────────────────────

def tail_length(g: WeldingDiffeo, cfg: StripConfig, section: dict = None) -> float:
    """
    Länge der Schwänze jenseits des Trägers: mindestens tail_taus·τ und so lang,
    dass e^{−r·L} < tail_tol für die langsamste Abklingrate r = 2πα/(κ∓² + α²).
    """
    s = section if section is not None else (cfg_loader.get("weld.grid", {}) or {})
    alpha = cfg.alpha
    rate = min(2.0 * math.pi * alpha / (k * k + alpha * alpha) for k in (g.kappa_minus, g.kappa_plus))
    return max(float(s.get("tail_taus", 8.0)) * cfg.tau, math.log(1.0 / float(s.get("tail_tol", 1e-10))) / rate)


def grid_for(g: WeldingDiffeo, cfg: StripConfig, section: dict = None, X: float = None,
             pieces=None) -> QuadratureGrid:
    """Gitter nach weld.grid: X = M + Schwanzlänge, piece_panels Paneele je Stufen- bzw. Beulenbreite."""
    s = section if section is not None else (cfg_loader.get("weld.grid", {}) or {})
    if X is None:
        X = g.support_bound + tail_length(g, cfg, s)
    per_width = int(s.get("piece_panels", 12))
    pieces = g.pieces if pieces is None else pieces
    return build_grid(X, order=int(s.get("order", 12)), panel_width=float(s.get("panel_width", 0.5)),
                      pieces=[(lo, hi, width / per_width) for lo, hi, width in pieces])


def logistic(u) -> np.ndarray:
    """1/(1 + e^{−u}) ohne Überlauf für große |Re u|."""
    u = np.asarray(u, dtype=complex)
    shape = u.shape
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    pos = u.real >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    e = np.exp(u[~pos])
    out[~pos] = e / (1.0 + e)
    return out.reshape(shape)


@dataclass(frozen=True)
class ShiftFunction:
    """
    G(x) = G^(c)(x) + 𝒢(x) − 𝒢(g(x) − iα)
    """
    g: WeldingDiffeo
    alpha: float
    local: Callable
    analytic: Optional[Callable] = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.asarray(self.local(x), dtype=complex)
        if self.analytic is not None:
            out = out + self.analytic(x.astype(complex)) - self.analytic(self.g(x) - 1j * self.alpha)
        return out


def csch_derivative(u, order: int) -> np.ndarray:
    """n-te Ableitung von csch(u) = 1/sinh(u), n = 0..3."""
    u = np.asarray(u, dtype=complex)
    with np.errstate(over="ignore"):
        c = 1.0 / np.sinh(u)
        t = 1.0 / np.tanh(u)
    if order == 0:
        return c
    if order == 1:
        return -c * t
    if order == 2:
        return c * (t * t + c * c)
    if order == 3:
        return -c * t**3 - 5.0 * c**3 * t
    raise ValueError(f"Ableitungsordnung {order} nicht unterstützt")


# ─────────────────────────────────────────────
# Lösung
# ─────────────────────────────────────────────

@dataclass
class RHPSolution:
    """
    θ(x) = Ξ₊(g(x) − iα) auf den Knoten, θ₂ = θ − G = Ξ₋(x),
    Diagnosen und Rekonstruktion von Ξ im Streifen.
    """
    grid: QuadratureGrid
    g: WeldingDiffeo
    cfg: StripConfig
    shift: ShiftFunction
    theta: np.ndarray
    G: np.ndarray
    constant: complex = 0.0
    decay_left: float = float("nan")
    decay_right: float = float("nan")
    jump_residual: np.ndarray = None
    integral_residual: float = 0.0
    condition: float = float("nan")
    offset: Callable = None
    offset_derivative: Callable = None
    name: str = "xi"
    diagnostics: dict = field(default_factory=dict)

    @property
    def theta_minus(self) -> np.ndarray:
        return self.theta - self.G

    @property
    def jump_sup(self) -> float:
        return float(np.max(np.abs(self.jump_residual))) if self.jump_residual is not None else float("nan")

    def reconstruct(self, z) -> np.ndarray:
        """Ξ(z) für −α < Im z < 0 (Cauchy-Integrale über beide Ränder samt linkem Schwanz)."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = np.atleast_1d(z).ravel()
        alpha = self.cfg.alpha
        if np.any((z.imag <= -alpha) | (z.imag >= 0.0)):
            raise DomainError("z liegt nicht im offenen Streifen −α < Im z < 0")
        a, tau = self.cfg.a, self.cfg.tau
        x, w, X = self.grid.nodes, self.grid.weights, self.grid.X
        gx, dg = self.g(x), self.g.d1(x)
        gX = float(self.g(np.array(-X)))
        upper = w * self.theta_minus
        lower = w * self.theta * dg
        out = np.empty(z.shape, dtype=complex)
        for start in range(0, z.size, CHUNK):
            zz = z[start:start + CHUNK, None]
            val = (-(upper[None, :] / np.sinh(a * (x[None, :] - zz))).sum(axis=1)
                   + (lower[None, :] / np.sinh(a * (gx[None, :] - 1j * alpha - zz))).sum(axis=1))
            zc = zz[:, 0]
            val -= self.theta_minus[0] * sinh_tail_left(a * (-X - zc)) / a
            val += self.theta[0] * sinh_tail_left(a * (gX - 1j * alpha - zc)) / a
            out[start:start + CHUNK] = val / (2j * tau)
        return out.reshape(shape)

    def derivative(self, z, order: int = 1) -> np.ndarray:
        """
        ∂ⁿ der vollständigen Lösung im offenen Streifen, n = 1..3, durch
        geschlossene Ableitungen von 1/sinh in den Rekonstruktionskernen.
        """
        if order not in (1, 2, 3):
            raise ValueError(f"Ableitungsordnung {order} nicht unterstützt")
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = np.atleast_1d(z).ravel()
        alpha = self.cfg.alpha
        if np.any((z.imag <= -alpha) | (z.imag >= 0.0)):
            raise DomainError("z liegt nicht im offenen Streifen −α < Im z < 0")
        a, tau = self.cfg.a, self.cfg.tau
        x, w, X = self.grid.nodes, self.grid.weights, self.grid.X
        gx = self.g(x)
        gX = float(self.g(np.array(-X)))
        upper = w * self.theta_minus
        lower = w * self.theta * self.g.d1(x)
        # d^n/dz^n f(a(y − z)) = (−a)^n f^(n)
        factor = (-a) ** order
        out = np.empty(z.shape, dtype=complex)
        for start in range(0, z.size, CHUNK):
            zz = z[start:start + CHUNK, None]
            val = (-(upper[None, :] * csch_derivative(a * (x[None, :] - zz), order)).sum(axis=1)
                   + (lower[None, :] * csch_derivative(a * (gx[None, :] - 1j * alpha - zz), order)).sum(axis=1))
            val = factor * val
            zc = zz[:, 0]
            tail = -((-a) ** (order - 1))
            val -= self.theta_minus[0] * tail * csch_derivative(a * (-X - zc), order - 1)
            val += self.theta[0] * tail * csch_derivative(a * (gX - 1j * alpha - zc), order - 1)
            out[start:start + CHUNK] = val / (2j * tau)
        if self.offset_derivative is not None:
            out = out + self.offset_derivative(z, order)
        return out.reshape(shape)

    def evaluate(self, z) -> np.ndarray:
        """Vollständige Lösung (χ, χ^(L), χ^(R) oder Ω) = Verschiebung + Ξ."""
        z = np.asarray(z, dtype=complex)
        base = self.offset(z) if self.offset is not None else 0.0
        return base + self.reconstruct(z)

    def boundary_minus(self, x, derivative: int = 0) -> np.ndarray:
        """
        Randwert auf ℝ (bzw. seine Ableitung) über den paneelweisen
        Legendre-Interpolanten von Ξ₋, plus Verschiebung.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        X = self.grid.X
        inside = np.abs(x) <= X
        vals = np.zeros(x.shape, dtype=complex)
        vals[inside] = self.grid.interpolate(self.theta_minus, x[inside], derivative)
        if derivative == 0:
            vals[x < -X] = self.theta_minus[0]
        if self.offset is not None:
            if derivative == 0:
                vals = vals + self.offset(x.astype(complex))
            elif self.offset_derivative is not None:
                vals = vals + self.offset_derivative(x, derivative)
        return vals

    def boundary_plus(self, x) -> np.ndarray:
        """Ξ₊(g(x) − iα) für x im Gitterbereich."""
        return self.grid.interpolate(self.theta, np.atleast_1d(np.asarray(x, dtype=float)))

    def summary(self) -> dict:
        return {
            "name": self.name,
            "constant": self.constant,
            "decay_left": self.decay_left,
            "decay_right": self.decay_right,
            "jump_residual": self.jump_sup,
            "integral_residual": self.integral_residual,
            "condition": self.condition,
            "theta_sup": float(np.max(np.abs(self.theta))),
            **{f"grid.{k}": v for k, v in self.grid.summary().items()},
            **self.diagnostics,
        }


# ─────────────────────────────────────────────
# Nyström-System
# ─────────────────────────────────────────────

def assemble_system(g: WeldingDiffeo, cfg: StripConfig, grid: QuadratureGrid) -> np.ndarray:
    """Dichte Matrix von id − K; θ wird links konstant, rechts durch 0 fortgesetzt."""
    K11, K12, K21 = kernels.kernel_blocks(grid, g, cfg)
    K = (K11 + K12 + K21) * grid.weights[None, :]
    K[:, 0] += kernels.left_tail_K(grid.nodes, grid.X, g, cfg)
    A = -K
    A[np.diag_indices(grid.n)] += 1.0
    return A


def condition_number(A: np.ndarray, lu: np.ndarray = None) -> float:
    """1-Norm-Konditionsschätzung über LAPACK gecon."""
    if lu is None:
        lu, _ = lu_factor(A)
    gecon, = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, np.linalg.norm(A, 1), norm="1")
    if info != 0 or rcond == 0.0:
        return math.inf
    return 1.0 / rcond


def _plateau(values: np.ndarray) -> complex:
    n = values.size
    i0 = int(math.ceil(0.02 * n))
    i1 = i0 + max(1, int(math.ceil(0.10 * n)))
    return complex(np.mean(values[i0:i1]))


def _decay_rate(distance: np.ndarray, values: np.ndarray, scale: float, floor: float = 1e-10) -> float:
    """
    Abklingrate aus log|values| gegen den Abstand zum Träger (positiv = Abklingen).

    Gefittet wird nur der zusammenhängende Anfang oberhalb floor·scale;
    dahinter liegt Rundungsrauschen.
    """
    order = np.argsort(distance)
    d = distance[order]
    mag = np.abs(values[order])
    below = np.nonzero(mag <= floor * scale)[0]
    stop = int(below[0]) if below.size else mag.size
    if stop < 3:
        return float("nan")
    slope = np.polyfit(d[:stop], np.log(mag[:stop]), 1)[0]
    return float(-slope)


def boundary_audit(grid: QuadratureGrid, g: WeldingDiffeo, cfg: StripConfig,
                   theta: np.ndarray, G: np.ndarray, D: np.ndarray = None) -> np.ndarray:
    """
    Beide Plemelj-Formeln getrennt: Ξ₊(g(x)−iα) − Ξ₋(x) − G(x) auf den Knoten.
    """
    if D is None:
        D = grid.differentiation_matrix()
    x, w, X = grid.nodes, grid.weights, grid.X
    a, tau = cfg.a, cfg.tau
    gx, dg = g(x), g.d1(x)
    ends_g = (float(g(np.array(-X))), float(g(np.array(X))))
    Pg = kernels.pv_matrix(grid, gx, dg, a, ends_g, D=D, tails="left") / (2j * tau)
    P = kernels.pv_matrix(grid, x, np.ones_like(x), a, (-X, X), D=D, tails="left") / (2j * tau)
    _, K12, K21 = kernels.kernel_blocks(grid, g, cfg)
    _, t12, t21 = kernels.left_tails(x, X, g, cfg)
    K12 = K12 * w[None, :]
    K21 = K21 * w[None, :]
    K12[:, 0] += t12
    K21[:, 0] += t21

    theta2 = theta - G
    xi_plus = 0.5 * theta + Pg @ theta + K12 @ theta2
    xi_minus = 0.5 * theta2 - P @ theta2 + K21 @ theta
    return xi_plus - xi_minus - G


def solve_nonlocal(g: WeldingDiffeo, shift: ShiftFunction, cfg: StripConfig,
                   grid: QuadratureGrid = None, tolerances: dict = None, name: str = "xi",
                   offset: Callable = None, offset_derivative: Callable = None) -> RHPSolution:
    """
    Löst (id − K)θ = ½{G + H[G]} − K12[G} und füllt die Diagnosen.

    Args:
        g: Schweißdiffeomorphismus
        shift: Shiftfunktion G
        cfg: Streifenparameter
        grid: Quadraturgitter (Standard: grid_for)
        tolerances: decay, solve_residual, condition (Standard: weld.tolerances)

    Returns:
        RHPSolution
    """
    tol = dict(cfg_loader.get("weld.tolerances", {}) or {})
    tol.update(tolerances or {})
    if grid is None:
        grid = grid_for(g, cfg)

    x = grid.nodes
    G = shift(x)
    D = grid.differentiation_matrix()
    H = kernels.sinh_hilbert_matrix(grid, cfg.tau, D=D)
    rhs = kernels.assemble_rhs(G, g, grid, cfg, tol=float(tol.get("decay", 1e-10)), H=H)

    A = assemble_system(g, cfg, grid)
    try:
        lu_piv = lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as e:
        raise SolveError(f"LU-Zerlegung fehlgeschlagen: {e}") from e
    cond = condition_number(A, lu_piv[0])
    logger.debug("%s: N = %d, cond = %.3e", name, grid.n, cond)
    if cond > float(tol.get("condition", 1e8)):
        raise IllConditionedError(cond)

    theta = lu_solve(lu_piv, rhs)
    scale = max(float(np.max(np.abs(rhs))), 1e-300)
    residual = float(np.max(np.abs(A @ theta - rhs))) / scale if np.any(rhs) else 0.0
    if residual > float(tol.get("solve_residual", 1e-8)):
        raise SolveError(f"Residuum der Integralgleichung zu groß: {residual:.3e}")

    jump = boundary_audit(grid, g, cfg, theta, G, D=D)
    theta2 = theta - G
    constant = _plateau(theta2)
    edge = g.support_bound + cfg.alpha
    left, right = x < -edge, x > edge
    size = max(float(np.max(np.abs(theta2 - constant))), float(np.max(np.abs(theta2))))
    sol = RHPSolution(
        grid=grid, g=g, cfg=cfg, shift=shift, theta=theta, G=G,
        constant=constant,
        decay_left=_decay_rate(-edge - x[left], theta2[left] - constant, size),
        decay_right=_decay_rate(x[right] - edge, theta2[right], size),
        jump_residual=jump,
        integral_residual=residual,
        condition=cond,
        offset=offset,
        offset_derivative=offset_derivative,
        name=name,
    )
    logger.info("%s gelöst: N = %d, Sprungresiduum %.2e, cond %.2e", name, grid.n, sol.jump_sup, cond)
    return sol


# ─────────────────────────────────────────────
# χ, Modellprobleme, Ω
# ─────────────────────────────────────────────

def _identity_derivative(x, order: int):
    return np.ones_like(x, dtype=complex) if order == 1 else np.zeros_like(x, dtype=complex)


def solve_chi(g: WeldingDiffeo, cfg: StripConfig, grid: QuadratureGrid = None,
              tolerances: dict = None) -> RHPSolution:
    """χ = z + χ̃ mit χ̃₊(g(x) − iα) − χ̃₋(x) = x − g(x); g − id muss kompakt getragen sein."""
    if g.kappa_minus != 0.0 or g.kappa_plus != 0.0:
        raise DomainError(f"solve_chi verlangt κ± = 0, nicht ({g.kappa_minus}, {g.kappa_plus})")
    shift = ShiftFunction(g=g, alpha=cfg.alpha, local=lambda x: x - g(x))
    return solve_nonlocal(g, shift, cfg, grid, tolerances, name="chi",
                          offset=lambda z: z, offset_derivative=_identity_derivative)


def omega_left(gamma: complex, tau: float) -> Callable:
    """ω^(L)(z) = γz/(1 + e^{−2πz/τ}) → γz für Re z → +∞, → 0 für Re z → −∞."""
    return lambda z: gamma * z * logistic(2 * math.pi * np.asarray(z, dtype=complex) / tau)


def omega_right(gamma: complex, tau: float) -> Callable:
    """ω^(R)(z) = γz/(1 + e^{2πz/τ})"""
    return lambda z: gamma * z * logistic(-2 * math.pi * np.asarray(z, dtype=complex) / tau)


def omega_derivative(gamma: complex, tau: float, sign: int) -> Callable:
    """∂ⁿ von γz·σ(βz) mit β = ±2π/τ und σ = logistic."""
    beta = sign * 2 * math.pi / tau

    def deriv(z, order: int):
        s = logistic(beta * np.asarray(z, dtype=complex))
        d1 = s * (1.0 - s)
        d2 = d1 * (1.0 - 2.0 * s)
        d3 = d2 * (1.0 - 2.0 * s) - 2.0 * d1 * d1
        sig = (s, d1, d2, d3)
        return gamma * (order * beta ** (order - 1) * sig[order - 1] + z * beta**order * sig[order])
    return deriv


def solve_model_left(cfg: StripConfig, g_left: WeldingDiffeo, grid: QuadratureGrid = None,
                     tolerances: dict = None) -> RHPSolution:
    """
    χ^(L) = Υ^(L) + ω^(L); Υ^(L) löst das Problem mit
    G = x − g_L(x) + ω^(L)(x) − ω^(L)(g_L(x) − iα). constant = C_{χ^(L)}.
    """
    kappa = g_left.kappa_plus - g_left.kappa_minus
    gamma = gamma_of(kappa, cfg.alpha)
    omega = omega_left(gamma, cfg.tau)
    shift = ShiftFunction(g=g_left, alpha=cfg.alpha, local=lambda x: x - g_left(x), analytic=omega)
    sol = solve_nonlocal(g_left, shift, cfg, grid, tolerances, name="chi_L", offset=omega,
                         offset_derivative=omega_derivative(gamma, cfg.tau, 1))
    sol.diagnostics["gamma"] = gamma
    return sol


def solve_model_right(cfg: StripConfig, g_right: WeldingDiffeo, grid: QuadratureGrid = None,
                      tolerances: dict = None) -> RHPSolution:
    """χ^(R) = Υ^(R) + ω^(R), Volumenshift κ = κ⁻ von g_R."""
    kappa = g_right.kappa_minus - g_right.kappa_plus
    gamma = gamma_of(kappa, cfg.alpha)
    omega = omega_right(gamma, cfg.tau)
    shift = ShiftFunction(g=g_right, alpha=cfg.alpha, local=lambda x: x - g_right(x), analytic=omega)
    sol = solve_nonlocal(g_right, shift, cfg, grid, tolerances, name="chi_R", offset=omega,
                         offset_derivative=omega_derivative(gamma, cfg.tau, -1))
    sol.diagnostics["gamma"] = gamma
    return sol


def far_field_slope(sol: RHPSolution, x1: float, x2: float) -> complex:
    """Steigung (χ₋(x2) − χ₋(x1))/(x2 − x1) der vollständigen Lösung."""
    vals = sol.boundary_minus(np.array([x1, x2]))
    return complex((vals[1] - vals[0]) / (x2 - x1))


def winding_number(f: Callable, target: complex, x_range: tuple, y_range: tuple, points: int = 400) -> int:
    """Windungszahl von f(z) − f(target) um den Rand des Rechtecks."""
    (x0, x1), (y0, y1) = x_range, y_range
    t = np.linspace(0.0, 1.0, points, endpoint=False)
    path = np.concatenate([
        x0 + (x1 - x0) * t + 1j * y0,
        x1 + 1j * (y0 + (y1 - y0) * t),
        x1 - (x1 - x0) * t + 1j * y1,
        x0 + 1j * (y1 - (y1 - y0) * t),
    ])
    vals = f(path) - f(np.array([target]))[0]
    phase = np.unwrap(np.angle(np.append(vals, vals[0])))
    return int(round((phase[-1] - phase[0]) / (2 * math.pi)))


def solve_omega(g: WeldingDiffeo, cfg: StripConfig, grid: QuadratureGrid = None,
                tolerances: dict = None, targets: int = 5) -> RHPSolution:
    """
    Ω = Υ + ω mit ω(z) = γ̃₊z/(1 + e^{−2πz/τ}) + γ̃₋z/(1 + e^{2πz/τ}),
    Sprung Ω₊(g(x) − iα) = Ω₋(x) − iα; Injektivität per Windungszahl.
    """
    gt_plus = gamma_tilde_of(g.kappa_plus, cfg.alpha)
    gt_minus = gamma_tilde_of(g.kappa_minus, cfg.alpha)
    w_plus, w_minus = omega_left(gt_plus, cfg.tau), omega_right(gt_minus, cfg.tau)

    def omega(z):
        return w_plus(z) + w_minus(z)

    d_plus, d_minus = omega_derivative(gt_plus, cfg.tau, 1), omega_derivative(gt_minus, cfg.tau, -1)

    shift = ShiftFunction(g=g, alpha=cfg.alpha, local=lambda x: np.full(np.shape(x), -1j * cfg.alpha),
                          analytic=omega)
    sol = solve_nonlocal(g, shift, cfg, grid, tolerances, name="omega", offset=omega,
                         offset_derivative=lambda z, n: d_plus(z, n) + d_minus(z, n))

    R = 0.5 * sol.grid.X
    delta = cfg.alpha / 4.0
    xs = np.linspace(-0.5 * R, 0.5 * R, targets)
    windings = [winding_number(sol.evaluate, complex(xk, -cfg.alpha / 2), (-R, R), (-cfg.alpha + delta, -delta))
                for xk in xs]
    sol.diagnostics["windings"] = windings
    if any(n != 1 for n in windings):
        logger.warning("Ω: Windungszahlen %s ≠ 1 (Diskretisierung prüfen)", windings)
    return sol


# ─────────────────────────────────────────────
# Geschweißte Cauchy-Transformation
# ─────────────────────────────────────────────

def welded_cauchy(upsilon: Callable, z, cfg: StripConfig, y: float = 0.0, kappa: float = None,
                  side: str = None, nodes: int = 128, derivative: Callable = None) -> np.ndarray:
    """
    C_Γ[Υ](z) = −∫₀¹ Υ(s(t)) dt/(q(z)·e^{−2πit} − 1),  s(t) = y + (κ − iα)t,
    q(z) = exp(2πγ̃(y − z)/α). Der singuläre Anteil wird mit Υ(s*) abgezogen,
    dessen Integral die Indikatorfunktion 𝟙{Re γ̃(z − y) > 0} ist.
    Auf Γ liefert side = '+' (rechts) bzw. '−' (links) die Randwerte.

    Fällt s* auf einen Knoten, wird der Grenzwert (dΥ(s(t))/dt)/(−2πi) eingesetzt:
    mit derivative = Υ′ exakt, sonst über die Legendre-Reihe der Knotenwerte.
    """
    k = cfg.kappa if kappa is None else kappa
    alpha = cfg.alpha
    period = complex(k, -alpha)
    gt = gamma_tilde_of(k, alpha)
    ref, ref_w = gauss_legendre(nodes)
    t, wt = 0.5 * (ref + 1.0), 0.5 * ref_w
    s = y + period * t
    ups = np.asarray(upsilon(s), dtype=complex)
    coef = None

    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z.shape, dtype=complex)
    for i, zi in enumerate(z):
        rel = gt * (zi - y)
        on_line = abs(rel.real) < 1e-12
        if on_line and side not in ("+", "-", "−"):
            raise ContourError(f"z = {zi} liegt auf Γ; Randseite '+' oder '−' angeben")
        t_star = ((zi - y) / period).real % 1.0
        s_star = y + period * t_star
        u_star = complex(np.asarray(upsilon(np.array([s_star])), dtype=complex)[0])
        if on_line:
            indicator = 1.0 if side == "+" else 0.0
        else:
            indicator = 1.0 if rel.real > 0 else 0.0
        q = np.exp(2 * math.pi * gt * (y - zi) / alpha)
        den = q * np.exp(-2j * math.pi * t) - 1.0
        num = ups - u_star
        tiny = np.abs(den) < 1e-14
        if np.any(tiny):
            if derivative is not None:
                du_dt = complex(np.asarray(derivative(np.array([s_star])), dtype=complex)[0]) * period
            else:
                if coef is None:
                    n = np.arange(nodes)
                    coef = (legendre.legvander(ref, nodes - 1).T @ (ref_w * ups)) * (n + 0.5)
                du_dt = 2.0 * complex(legendre.legval(2.0 * t_star - 1.0, legendre.legder(coef)))
            ratio = np.where(tiny, du_dt / (-2j * math.pi), num / np.where(tiny, 1.0, den))
        else:
            ratio = num / den
        out[i] = -(wt * ratio).sum() + u_star * indicator
    return out
