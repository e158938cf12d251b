"""
cft.py – Schwarzsche Ableitung, erzeugende Funktion ln Ψ_t der Energietransfer-Statistik
und ihre Großabweichungsrate
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

import config_loader as cfg_loader
import rhp
import sweep_runner
from errors import ConfigError, DomainError
from geometry import SmoothStep, StripConfig, WeldingDiffeo, build_diffeo, gamma_tilde_of
from quadrature import gauss_legendre

logger = logging.getLogger(__name__)

EDGE_SHAPES = ("step", "bump")
CRITICAL_TOL = 1e-12


# ─────────────────────────────────────────────
# Schwarzsche Ableitung
# ─────────────────────────────────────────────

def schwarzian_from_derivatives(d1, d2, d3) -> np.ndarray:
    """S[f] = f‴/f′ − (3/2)(f″/f′)²"""
    d1 = np.asarray(d1, dtype=complex)
    if np.any(np.abs(d1) < CRITICAL_TOL):
        raise DomainError("f′ verschwindet: kritischer Punkt")
    r = np.asarray(d2, dtype=complex) / d1
    return np.asarray(d3, dtype=complex) / d1 - 1.5 * r * r


def schwarzian(f, x) -> np.ndarray:
    """
    f ist entweder ein Objekt mit derivative(x, order) (z. B. WeldingDiffeo)
    oder ein Tupel (f′, f″, f‴) von Funktionen.
    """
    x = np.asarray(x)
    if hasattr(f, "derivative"):
        d1, d2, d3 = (f.derivative(x, k) for k in (1, 2, 3))
    else:
        d1, d2, d3 = (fk(x) for fk in f)
    return schwarzian_from_derivatives(d1, d2, d3)


# ─────────────────────────────────────────────
# Profilfamilie
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class ProfileParams:
    """
    Synthetische Profile: Volumenintervall I_bk um 0 mit Durchmesser ℓt − C,
    ξ_t ≡ −κ darauf, g_{s,t} − id ≡ κs darauf; Randformen hängen nicht von t ab.
    """
    c: float
    kappa: float
    ell: float
    alpha: float
    delta_beta: float = 1.0
    C_bulk: float = 0.0
    edge_width: float = 2.0
    xi_width: float = 1.0
    edge_shape: str = "step"
    branch: int = 1

    def __post_init__(self):
        if not self.ell > 0:
            raise ConfigError("ell muss positiv sein", field="cft.ell")
        if self.delta_beta == 0:
            raise ConfigError("delta_beta darf nicht 0 sein", field="cft.delta_beta")
        if self.edge_shape not in EDGE_SHAPES:
            raise ConfigError(f"Unbekannte Randform '{self.edge_shape}'", field="cft.edge_shape")
        if self.branch not in (1, -1):
            raise ConfigError("branch muss 1 oder −1 sein", field="cft.branch")
        if not (self.edge_width > 0 and self.xi_width > 0):
            raise ConfigError("Randbreiten müssen positiv sein", field="cft.edge_width")

    @classmethod
    def from_config(cls, cfg: StripConfig, section: dict = None) -> "ProfileParams":
        s = section if section is not None else (cfg_loader.get("weld.cft", {}) or {})
        return cls(
            c=float(s.get("c", 1.0)),
            kappa=float(s.get("kappa", 1.0)),
            ell=float(s.get("ell", 2.0)),
            alpha=cfg.alpha,
            delta_beta=float(s.get("delta_beta", 1.0)),
            C_bulk=float(s.get("C_bulk", 0.0)),
            edge_width=float(s.get("edge_width", 2.0)),
            xi_width=float(s.get("xi_width", 1.0)),
            edge_shape=str(s.get("edge_shape", "step")),
            branch=int(s.get("branch", 1)),
        )

    @property
    def kappa_eff(self) -> float:
        return self.branch * self.kappa

    @property
    def delta_beta_eff(self) -> float:
        return self.branch * self.delta_beta

    def half_width(self, t: float) -> float:
        w = 0.5 * (self.ell * t - self.C_bulk)
        if not w > 2.0 * self.edge_width:
            raise DomainError(f"Volumenintervall bei t = {t} zu kurz: w = {w:.3g} ≤ 2 · Randbreite {self.edge_width}")
        return w

    def diffeo(self, s: float, t: float) -> WeldingDiffeo:
        """g_{s,t}: Volumenshift κs zwischen zwei Stufen um ±w(t)."""
        w = self.half_width(t)
        shift = self.kappa_eff * s
        params = {"w": w, "kappa": shift, "width_left": self.edge_width, "width_right": self.edge_width}
        if self.edge_shape == "bump":
            amp = 0.2 * shift
            params["bumps"] = [{"center": -w, "width": self.edge_width, "amplitude": amp},
                               {"center": w, "width": self.edge_width, "amplitude": -amp}]
        return build_diffeo("glued", params)

    def xi(self, x, t: float) -> np.ndarray:
        """ξ_t(x) = −κ·S_{−w}(x)·(1 − S_{w}(x))"""
        w = self.half_width(t)
        x = np.asarray(x, dtype=float)
        left = SmoothStep(-w, self.xi_width)
        right = SmoothStep(w, self.xi_width)
        return -self.kappa_eff * left(x) * (1.0 - right(x))


# ─────────────────────────────────────────────
# ln Ψ_t
# ─────────────────────────────────────────────

@dataclass
class LogPsiResult:
    lam: float
    t: float
    value: complex
    bulk: complex
    plateau: list = field(default_factory=list)
    plateau_expected: list = field(default_factory=list)
    derivative_gap: list = field(default_factory=list)

    @property
    def edge(self) -> complex:
        return self.value - self.bulk

    @property
    def plateau_error(self) -> float:
        if not self.plateau:
            return 0.0
        return float(np.max(np.abs(np.array(self.plateau) - np.array(self.plateau_expected))))


def log_psi_details(lam: float, t: float, profile: ProfileParams, cfg: StripConfig,
                    s_nodes: int = 8, tolerances: dict = None) -> LogPsiResult:
    """
    ln Ψ_t(λ) = −(ic/24π) ∫₀^{λ/Δβ} ds ∫ ξ_t(x)·{S[χ₋](x) − (2π²/α²)(∂χ₋(x))²} dx
    mit φ ≡ 0; χ_{s,t} aus rhp.solve_chi. Auf ℝ kommen die Ableitungen aus der
    Paneel-Differentiation, im Volumen zusätzlich analytisch aus den Kernen;
    derivative_gap vergleicht beide bei x = 0 gegen z = −iα/2.
    """
    if lam == 0:
        return LogPsiResult(lam=0.0, t=t, value=0j, bulk=0j)
    alpha = cfg.alpha
    w = profile.half_width(t)
    s_end = lam / profile.delta_beta_eff
    nodes, weights = gauss_legendre(s_nodes)
    s_vals = 0.5 * s_end * (nodes + 1.0)
    s_weights = 0.5 * s_end * weights

    total, bulk = 0j, 0j
    plateau, expected, gaps = [], [], []
    for s, ws in zip(s_vals, s_weights):
        sol = rhp.solve_chi(profile.diffeo(s, t), cfg, tolerances=tolerances)
        grid = sol.grid
        D = grid.differentiation_matrix()
        v1 = D @ sol.theta_minus
        v2 = D @ v1
        v3 = D @ v2
        d1 = 1.0 + v1
        S = schwarzian_from_derivatives(d1, v2, v3)
        x = grid.nodes
        density = grid.weights * profile.xi(x, t) * (S - (2.0 * math.pi**2 / alpha**2) * d1 * d1)
        inner = complex(density.sum())
        inside = np.abs(x) < w - profile.edge_width
        total += ws * inner
        bulk += ws * complex(density[inside].sum())
        centre = np.array([-0.5j * alpha])
        analytic = [complex(sol.derivative(centre, n)[0]) for n in (1, 2, 3)]
        on_line = [complex(sol.boundary_minus(np.array([0.0]), derivative=n)[0]) for n in (1, 2, 3)]
        gaps.append(max(abs(p - q) for p, q in zip(analytic, on_line)))
        plateau.append(analytic[0])
        expected.append(gamma_tilde_of(profile.kappa_eff * s, alpha))

    pref = -1j * profile.c / (24.0 * math.pi)
    return LogPsiResult(lam=float(lam), t=float(t), value=pref * total, bulk=pref * bulk,
                        plateau=plateau, plateau_expected=expected, derivative_gap=gaps)


def log_psi(lam: float, t: float, profile: ProfileParams, cfg: StripConfig, s_nodes: int = 8,
            tolerances: dict = None) -> complex:
    return log_psi_details(lam, t, profile, cfg, s_nodes, tolerances).value


# ─────────────────────────────────────────────
# Raten
# ─────────────────────────────────────────────

def ld_rate_formula(lam, profile: ProfileParams) -> complex:
    """lim t⁻¹ ln Ψ_t = −(cπ/12α)·κℓλ/(κλ − iαΔβ)"""
    k, db = profile.kappa_eff, profile.delta_beta_eff
    lam = complex(lam)
    if lam == 0:
        return 0j
    return -(profile.c * math.pi / (12.0 * profile.alpha)) * k * profile.ell * lam / (k * lam - 1j * profile.alpha * db)


def fit_rate(times, values) -> tuple:
    """
    Steigung von ln Ψ_t gegen t, Real- und Imaginärteil getrennt.

    Returns:
        (Rate, relatives Residuum max|r| / (|Steigung|·Spannweite))
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=complex)
    if t.size < 2:
        raise DomainError("Für die Ratenschätzung werden mindestens zwei Zeiten benötigt")
    pr = np.polyfit(t, v.real, 1)
    pi = np.polyfit(t, v.imag, 1)
    rate = complex(pr[0], pi[0])
    resid = (v.real - np.polyval(pr, t)) + 1j * (v.imag - np.polyval(pi, t))
    span = float(t.max() - t.min())
    scale = abs(rate) * span
    rel = float(np.max(np.abs(resid)) / scale) if scale > 0 else 0.0
    return rate, rel


def ld_rate_empirical(lam: float, times, profile: ProfileParams, cfg: StripConfig,
                      s_nodes: int = 8, tolerances: dict = None) -> tuple:
    """
    Returns:
        (Rate, Diagnose-Dict mit log_psi, fit_residual, fit_ok)
    """
    times = sorted(float(t) for t in times)
    values = [log_psi(lam, t, profile, cfg, s_nodes, tolerances) for t in times]
    return _rate_from_samples(lam, times, values)


def _rate_from_samples(lam: float, times: list, values: list) -> tuple:
    if lam == 0:
        return 0j, {"log_psi": values, "fit_residual": 0.0, "fit_ok": True}
    rate, rel = fit_rate(times, values)
    ok = rel <= 0.1
    if not ok:
        logger.warning("λ = %g: Anpassungsresiduum %.2f der Steigung, Zeiten noch nicht asymptotisch", lam, rel)
    return rate, {"log_psi": values, "fit_residual": rel, "fit_ok": ok}


@dataclass
class FCSResult:
    lambdas: list
    times: list
    log_psi: np.ndarray
    empirical: list
    formula: list
    fit_residual: list
    edge_parts: np.ndarray = None

    @property
    def relative_errors(self) -> list:
        out = []
        for e, f in zip(self.empirical, self.formula):
            out.append(abs(e - f) / abs(f) if f != 0 else abs(e))
        return out

    def lambda_derivative_gap(self) -> float:
        """Abstand der λ-Differenzenquotienten von t⁻¹ ln Ψ_t zwischen den beiden größten t."""
        if len(self.lambdas) < 2 or len(self.times) < 2:
            return float("nan")
        lam = np.asarray(self.lambdas, dtype=float)
        r1 = self.log_psi[:, -1] / self.times[-1]
        r2 = self.log_psi[:, -2] / self.times[-2]
        return float(np.max(np.abs(np.diff(r1) / np.diff(lam) - np.diff(r2) / np.diff(lam))))

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for i, lam in enumerate(self.lambdas):
            for j, t in enumerate(self.times):
                rows.append({"t": t, "lambda": lam,
                             "log_psi_re": self.log_psi[i, j].real, "log_psi_im": self.log_psi[i, j].imag})
        return pd.DataFrame(rows, columns=["t", "lambda", "log_psi_re", "log_psi_im"])

    def summary(self) -> dict:
        out = {"lambda_derivative_gap": self.lambda_derivative_gap()}
        if self.edge_parts is not None and self.edge_parts.size:
            spread = np.abs(self.edge_parts - self.edge_parts[:, -1:])
            out["edge_part_spread"] = float(np.max(spread))
        for lam, e, f, r, res in zip(self.lambdas, self.empirical, self.formula,
                                     self.relative_errors, self.fit_residual):
            key = f"lambda_{lam:g}"
            out[key] = {"empirical": e, "formula": f, "relative_error": r, "fit_residual": res}
        return out


def fcs_rate(profile: ProfileParams, cfg: StripConfig, lambdas, times, s_nodes: int = 8,
             tolerances: dict = None, workers: int = None, progress_callback=None) -> FCSResult:
    """ln Ψ_t auf dem (λ, t)-Gitter, empirische gegen geschlossene Rate je λ."""
    lambdas = [float(v) for v in lambdas]
    times = sorted(float(t) for t in times)
    pairs = [(lam, t) for lam in lambdas for t in times]

    def task(pair):
        r = log_psi_details(pair[0], pair[1], profile, cfg, s_nodes, tolerances)
        return {"value": r.value, "edge": r.edge}

    results = sweep_runner.run_batch(pairs, task, label=lambda p: f"λ = {p[0]:g}, t = {p[1]:g}",
                                     workers=workers, progress_callback=progress_callback)
    sweep_runner.raise_first_error(results)
    values = np.array([r["result"]["value"] for r in results], dtype=complex).reshape(len(lambdas), len(times))
    edges = np.array([r["result"]["edge"] for r in results], dtype=complex).reshape(len(lambdas), len(times))

    empirical, formula, residuals = [], [], []
    for i, lam in enumerate(lambdas):
        rate, diag = _rate_from_samples(lam, times, list(values[i]))
        empirical.append(rate)
        formula.append(ld_rate_formula(lam, profile))
        residuals.append(diag["fit_residual"])
    return FCSResult(lambdas=lambdas, times=times, log_psi=values, empirical=empirical,
                     formula=formula, fit_residual=residuals, edge_parts=edges)
