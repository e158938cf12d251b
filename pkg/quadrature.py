"""
quadrature.py – Zusammengesetzte Gauß-Legendre-Gitter, Paneel-Differentiation, sinh-Schwänze
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import block_diag

logger = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple:
    """Knoten und Gewichte auf [−1, 1]."""
    x, w = leggauss(order)
    return x, w


@lru_cache(maxsize=None)
def _reference_diff(order: int) -> np.ndarray:
    """Lagrange-Differentiationsmatrix in den Gauß-Knoten auf [−1, 1]."""
    x, _ = gauss_legendre(order)
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    bary = 1.0 / np.prod(diff, axis=1)
    D = (bary[None, :] / bary[:, None]) / diff
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def composite_rule(edges: np.ndarray, order: int) -> tuple:
    """Gauß-Legendre-Regel auf den Paneelen [edges[i], edges[i+1]]."""
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * x[None, :]
    weights = 0.5 * (b - a) * w[None, :]
    return nodes.ravel(), weights.ravel()


def _uniform_edges(a: float, b: float, width: float) -> np.ndarray:
    n = max(1, int(math.ceil((b - a) / width - 1e-12)))
    return np.linspace(a, b, n + 1)


@dataclass(frozen=True)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    X: float
    order: int
    edges: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def panel_count(self) -> int:
        return self.edges.size - 1

    def summary(self) -> dict:
        return {"N": self.n, "X": self.X, "order": self.order, "panels": self.panel_count}

    def differentiation_matrix(self) -> np.ndarray:
        """Blockdiagonale Matrix: exakte Ableitung des paneelweisen Interpolanten."""
        D = _reference_diff(self.order)
        blocks = [D * (2.0 / (b - a)) for a, b in zip(self.edges[:-1], self.edges[1:])]
        return block_diag(*blocks)

    def node_index(self, x: float, tol: float = 1e-12) -> int:
        """Index des Knotens x; Punkte außerhalb des Gitters sind unzulässig."""
        i = int(np.argmin(np.abs(self.nodes - x)))
        if abs(self.nodes[i] - x) > tol * max(1.0, abs(x)):
            raise ValueError(f"x = {x} ist kein Gitterknoten")
        return i

    def interpolate(self, values: np.ndarray, x, derivative: int = 0) -> np.ndarray:
        """
        Wertet den paneelweisen Legendre-Interpolanten (bzw. seine Ableitung)
        an beliebigen Punkten in [−X, X] aus.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = self.order
        vals = np.asarray(values).reshape(self.panel_count, p)
        if derivative:
            D = _reference_diff(p)
            scale = 2.0 / np.diff(self.edges)
            for _ in range(derivative):
                vals = (vals @ D.T) * scale[:, None]

        panel = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.panel_count - 1)
        a, b = self.edges[panel], self.edges[panel + 1]
        t = (2.0 * x - a - b) / (b - a)
        ref, _ = gauss_legendre(p)
        diff = ref[:, None] - ref[None, :]
        np.fill_diagonal(diff, 1.0)
        bary = 1.0 / np.prod(diff, axis=1)

        dt = t[:, None] - ref[None, :]
        exact = np.isclose(dt, 0.0, atol=1e-15)
        dt[exact] = 1.0
        terms = bary[None, :] / dt
        out = (terms * vals[panel]).sum(axis=1) / terms.sum(axis=1)
        hit_rows, hit_cols = np.nonzero(exact)
        out[hit_rows] = vals[panel[hit_rows], hit_cols]
        return out


def _merge_pieces(pieces) -> list:
    """Sortiert (lo, hi, h) und verschmilzt Intervalle, deren Lücke kleiner als h ist."""
    merged = []
    for lo, hi, h in sorted((float(a), float(b), float(c)) for a, b, c in pieces):
        if merged and lo <= merged[-1][1] + min(h, merged[-1][2]):
            plo, phi, ph = merged[-1]
            merged[-1] = (plo, max(phi, hi), min(ph, h))
        else:
            merged.append((lo, hi, h))
    return merged


def build_grid(X: float, order: int = 8, panel_width: float = 0.5, pieces=()) -> QuadratureGrid:
    """
    Gitter auf [−X, X] mit Paneelbreite panel_width; auf jedem Stück
    (lo, hi, h) aus pieces werden die Paneele auf Breite h verfeinert.
    """
    merged = _merge_pieces(p for p in pieces if p[2] < panel_width)
    edges = [np.array([-X])]
    cursor = -X
    for lo, hi, h in merged:
        if lo <= -X or hi >= X:
            raise ValueError(f"Stück [{lo}, {hi}] reicht über das Gitter [−{X}, {X}] hinaus")
        if lo > cursor:
            edges.append(_uniform_edges(cursor, lo, panel_width)[1:])
        edges.append(_uniform_edges(max(lo, cursor), hi, h)[1:])
        cursor = hi
    edges.append(_uniform_edges(cursor, X, panel_width)[1:])
    edges = np.concatenate(edges)
    nodes, weights = composite_rule(edges, order)
    grid = QuadratureGrid(nodes=nodes, weights=weights, X=float(X), order=order, edges=edges)
    logger.debug("Gitter: N = %d, X = %.3g, %d Paneele", grid.n, X, grid.panel_count)
    return grid


def contour_rule(inner: float, width: float, order: int, outer: float = None) -> tuple:
    """
    Reelle Regel für Konturintegrale: gleichmäßige Paneele auf [−inner, inner],
    danach geometrisch verdoppelnde Paneele bis ±outer.
    """
    edges = list(_uniform_edges(-inner, inner, width))
    if outer is not None and outer > inner:
        right = [inner]
        while right[-1] < outer:
            right.append(min(2.0 * right[-1], outer))
        edges = [-r for r in right[::-1][:-1]] + edges + right[1:]
    return composite_rule(np.asarray(edges), order)


# ─────────────────────────────────────────────
# Analytische Schwänze ∫ du / sinh(u)
# ─────────────────────────────────────────────

def sinh_tail_left(Y):
    """∫_{−∞}^{Y} du/sinh(u) = −2·artanh(e^Y), gültig für Re Y < 0 und Im Y ∉ πℤ."""
    return -2.0 * np.arctanh(np.exp(np.asarray(Y, dtype=complex)))


def sinh_tail_right(Y):
    """∫_{Y}^{∞} du/sinh(u) = 2·artanh(e^{−Y})."""
    return 2.0 * np.arctanh(np.exp(-np.asarray(Y, dtype=complex)))
