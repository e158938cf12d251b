"""
geometry.py – Streifengeometrie, glatte Stufen und Schweißdiffeomorphismen g
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

import config_loader as cfg_loader
from errors import ConfigError, DomainError, MonotonicityError

logger = logging.getLogger(__name__)

DIFFEO_KINDS = ("identity", "left_model", "right_model", "glued", "general", "custom")

# Quadraturregel für das Integral des Mollifiers
_MOLL_X, _MOLL_W = leggauss(128)


# ─────────────────────────────────────────────
# Streifenparameter
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class StripConfig:
    """
    Parameter des Streifens 𝒮_α = {−α < Im z < 0} und der Fourierkonturen.

    tau und v werden bei None auf 3·alpha bzw. π/(8·tau) gesetzt.
    """
    alpha: float
    tau: float = None
    kappa_minus: float = 0.0
    kappa_plus: float = 0.0
    v: float = None
    kappa: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("alpha muss positiv sein", field="strip.alpha")
        if self.tau is None:
            object.__setattr__(self, "tau", 3.0 * self.alpha)
        if not self.tau > 2.0 * self.alpha:
            raise ConfigError(f"tau = {self.tau} verletzt tau > 2·alpha", field="strip.tau")
        if self.v is None:
            object.__setattr__(self, "v", math.pi / (8.0 * self.tau))
        if not 0.0 < self.v < math.pi / (4.0 * self.tau):
            raise ConfigError(f"v = {self.v} liegt nicht in (0, π/(4·tau))", field="strip.v")

    @property
    def a(self) -> float:
        """Frequenz π/τ der sinh-Kerne."""
        return math.pi / self.tau

    def with_kappa(self, kappa: float) -> "StripConfig":
        return StripConfig(self.alpha, self.tau, self.kappa_minus, self.kappa_plus, self.v, kappa)

    @classmethod
    def from_config(cls, section: dict = None) -> "StripConfig":
        s = section if section is not None else (cfg_loader.get("weld.strip", {}) or {})
        return cls(
            alpha=float(s.get("alpha", 1.0)),
            tau=None if s.get("tau") is None else float(s["tau"]),
            kappa_minus=float(s.get("kappa_minus", 0.0)),
            kappa_plus=float(s.get("kappa_plus", 0.0)),
            v=None if s.get("v") is None else float(s["v"]),
            kappa=float(s.get("kappa", 0.0)),
        )


@dataclass(frozen=True)
class GammaConstants:
    gamma: complex
    gamma_tilde: complex
    gamma_tilde_minus: complex
    gamma_tilde_plus: complex


def gamma_of(kappa: float, alpha: float) -> complex:
    """γ = −κ/(κ − iα)"""
    return -kappa / complex(kappa, -alpha)


def gamma_tilde_of(kappa: float, alpha: float) -> complex:
    """γ̃ = −iα/(κ − iα) = γ + 1"""
    return -1j * alpha / complex(kappa, -alpha)


def gamma_constants(cfg: StripConfig, kappa: float = None) -> GammaConstants:
    """γ, γ̃ für den Volumenshift κ (Standard: cfg.kappa) und γ̃± für κ±."""
    k = cfg.kappa if kappa is None else kappa
    return GammaConstants(
        gamma=gamma_of(k, cfg.alpha),
        gamma_tilde=gamma_tilde_of(k, cfg.alpha),
        gamma_tilde_minus=gamma_tilde_of(cfg.kappa_minus, cfg.alpha),
        gamma_tilde_plus=gamma_tilde_of(cfg.kappa_plus, cfg.alpha),
    )


# ─────────────────────────────────────────────
# Mollifier exp(−1/(1−u²)) und glatte Stufe
# ─────────────────────────────────────────────

def _psi_derivatives(u: np.ndarray, order: int) -> np.ndarray:
    """ψ^(order)(u) für ψ(u) = exp(−1/(1−u²)), außerhalb (−1, 1) exakt 0."""
    u = np.asarray(u, dtype=float)
    shape = u.shape
    u = np.atleast_1d(u)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    s = u[inside]
    q = 1.0 - s * s
    psi = np.exp(-1.0 / q)
    # ψ′ = ψ·p1 mit p1 = −2s/q²
    p1 = -2.0 * s / q**2
    dp1 = -2.0 / q**2 - 8.0 * s * s / q**3
    if order == 0:
        out[inside] = psi
    elif order == 1:
        out[inside] = psi * p1
    elif order == 2:
        out[inside] = psi * (p1 * p1 + dp1)
    elif order == 3:
        ddp1 = -24.0 * s / q**3 - 48.0 * s**3 / q**4
        out[inside] = psi * (p1**3 + 3.0 * p1 * dp1 + ddp1)
    else:
        raise ValueError(f"Ableitungsordnung {order} nicht unterstützt")
    return out.reshape(shape)


def _psi_integral(lo, hi) -> np.ndarray:
    """∫_lo^hi ψ(s) ds für −1 ≤ lo, hi ≤ 1 (skalierte Gauß-Legendre-Regel)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    s = (0.5 * (hi + lo))[..., None] + half[..., None] * _MOLL_X
    return half * (_psi_derivatives(s, 0) @ _MOLL_W)


_MOLL_Z = float(_psi_integral(-1.0, 1.0))


@dataclass(frozen=True)
class SmoothStep:
    """
    C∞-Stufe S mit S ≡ 0 links von center−width und S ≡ 1 rechts von center+width.
    """
    center: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise DomainError(f"Stufenbreite muss positiv sein, nicht {self.width}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        u = np.atleast_1d((x - self.center) / self.width)
        out = np.where(u >= 1.0, 1.0, 0.0)
        inside = np.abs(u) < 1.0
        if np.any(inside):
            s = u[inside]
            # jeweils vom näheren Ende integrieren, sonst Auslöschung bei 0 bzw. 1
            out[inside] = np.where(s <= 0.0, _psi_integral(-1.0, s) / _MOLL_Z,
                                   1.0 - _psi_integral(s, 1.0) / _MOLL_Z)
        return out.reshape(x.shape)

    def derivative(self, x, order: int = 1) -> np.ndarray:
        if order == 0:
            return self(x)
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        return _psi_derivatives(u, order - 1) / (_MOLL_Z * self.width**order)


def make_smooth_step(center: float, width: float) -> SmoothStep:
    return SmoothStep(float(center), float(width))


@dataclass(frozen=True)
class Bump:
    """Kompakt getragene Beule amplitude·exp(1 − 1/(1−u²)), u = (x−center)/width."""
    center: float
    width: float
    amplitude: float

    def derivative(self, x, order: int = 0) -> np.ndarray:
        u = (np.asarray(x, dtype=float) - self.center) / self.width
        return self.amplitude * math.e * _psi_derivatives(u, order) / self.width**order


# ─────────────────────────────────────────────
# Schweißdiffeomorphismus
# ─────────────────────────────────────────────

@dataclass(frozen=True)
class Step:
    center: float
    width: float
    height: float

    @property
    def shape(self) -> SmoothStep:
        return SmoothStep(self.center, self.width)


@dataclass(frozen=True)
class WeldingDiffeo:
    """
    g(x) = x + base + Σ height·S((x−c)/r) + Σ Beulen.

    Außerhalb [−M, M] gilt g(x) = x + κ∓ bitgenau, da S dort exakt 0 oder 1 ist.
    """
    kind: str
    base: float = 0.0
    steps: tuple = ()
    bumps: tuple = ()
    params: dict = field(default_factory=dict, compare=False)

    @property
    def kappa_minus(self) -> float:
        return self.base

    @property
    def kappa_plus(self) -> float:
        return self.base + sum(s.height for s in self.steps)

    @property
    def support_bound(self) -> float:
        pieces = [abs(p.center) + p.width for p in (*self.steps, *self.bumps)]
        return max(pieces) if pieces else 0.0

    @property
    def pieces(self) -> tuple:
        """Intervalle (lo, hi, Breite), auf denen g − id nicht affin ist."""
        return tuple((p.center - p.width, p.center + p.width, p.width) for p in (*self.steps, *self.bumps))

    def derivative(self, x, order: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        # erst den Shift summieren, damit x + κ∓ außerhalb des Trägers exakt bleibt
        out = np.full_like(x, self.base if order == 0 else 0.0)
        for s in self.steps:
            out = out + s.height * s.shape.derivative(x, order)
        for b in self.bumps:
            out = out + b.derivative(x, order)
        if order == 0:
            return x + out
        if order == 1:
            return 1.0 + out
        return out

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    def d1(self, x) -> np.ndarray:
        return self.derivative(x, 1)

    def d2(self, x) -> np.ndarray:
        return self.derivative(x, 2)

    def d3(self, x) -> np.ndarray:
        return self.derivative(x, 3)

    def inverse(self, y, tol: float = 1e-13) -> np.ndarray:
        """g⁻¹(y) durch Bisektion im Klammerintervall, dann ein Newton-Schritt."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        shift = max(abs(self.kappa_minus), abs(self.kappa_plus)) + self.support_bound
        amp = sum(abs(s.height) for s in self.steps) + sum(abs(b.amplitude) for b in self.bumps)
        lo = y - abs(self.base) - shift - amp - 1.0
        hi = y + abs(self.base) + shift + amp + 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self(mid) < y
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.max(hi - lo) < tol:
                break
        x = 0.5 * (lo + hi)
        x = x - (self(x) - y) / self.d1(x)
        return x

    def check_monotone(self, points: int = 4001):
        M = self.support_bound
        if M == 0.0:
            return
        xs = np.linspace(-M - 1.0, M + 1.0, points)
        d = self.d1(xs)
        bad = np.nonzero(d <= 0.0)[0]
        if bad.size:
            i = bad[np.argmin(d[bad])]
            raise MonotonicityError(float(xs[i]), float(d[i]))


def _left_model(kappa: float, width: float) -> tuple:
    return 0.0, (Step(0.0, width, kappa),)


def _right_model(kappa: float, width: float) -> tuple:
    return kappa, (Step(0.0, width, -kappa),)


def build_diffeo(kind: str, params: dict = None) -> WeldingDiffeo:
    """
    Baut einen Diffeomorphismus aus Art + Parametern und prüft g′ > 0.

    Args:
        kind: identity, left_model, right_model, glued, general oder custom
        params: kappa, width_left (M_L), width_right (M_R), w, kappa_minus,
                kappa_plus, width, base, steps, bumps, audit_points

    Returns:
        WeldingDiffeo
    """
    p = dict(params or {})
    kappa = float(p.get("kappa", 0.0))
    m_left = float(p.get("width_left", 2.0))
    m_right = float(p.get("width_right", 2.0))
    bumps = tuple(Bump(float(b["center"]), float(b["width"]), float(b["amplitude"]))
                  for b in p.get("bumps", []) or [])

    if kind == "identity":
        base, steps, bumps = 0.0, (), ()
    elif kind == "left_model":
        base, steps = _left_model(kappa, m_left)
    elif kind == "right_model":
        base, steps = _right_model(kappa, m_right)
    elif kind == "glued":
        w = float(p.get("w", 10.0))
        if not w > m_left + m_right:
            raise DomainError(f"glued: w = {w} muss M_L + M_R = {m_left + m_right} übersteigen")
        base = 0.0
        steps = (Step(-w, m_left, kappa), Step(w, m_right, -kappa))
    elif kind == "general":
        k_minus = float(p.get("kappa_minus", 0.0))
        k_plus = float(p.get("kappa_plus", kappa))
        base = k_minus
        steps = (Step(0.0, float(p.get("width", m_left)), k_plus - k_minus),)
    elif kind == "custom":
        base = float(p.get("base", 0.0))
        steps = tuple(Step(float(s["center"]), float(s["width"]), float(s["height"]))
                      for s in p.get("steps", []) or [])
    else:
        raise ConfigError(f"Unbekannte Diffeo-Art '{kind}'", field="diffeo.kind")

    g = WeldingDiffeo(kind=kind, base=base, steps=steps, bumps=bumps, params=p)
    g.check_monotone(int(p.get("audit_points", 4001)))
    logger.debug("Diffeo %s: κ− = %g, κ+ = %g, M = %g", kind, g.kappa_minus, g.kappa_plus, g.support_bound)
    return g


def diffeo_from_config(section: dict = None) -> WeldingDiffeo:
    s = section if section is not None else (cfg_loader.get("weld.diffeo", {}) or {})
    return build_diffeo(s.get("kind", "identity"), s)
