"""
errors.py – Fehlerhierarchie für Löser, Konfiguration und Kommandozeile
"""


class WeldError(Exception):
    """Basisklasse aller fachlichen Fehler."""


class ConfigError(WeldError):
    """Konfiguration nicht lesbar oder ungültig (mit Feldname bzw. Zeile/Spalte)."""

    def __init__(self, message: str, field: str = None, line: int = None, column: int = None):
        self.field = field
        self.line = line
        self.column = column
        where = []
        if field:
            where.append(f"Feld '{field}'")
        if line is not None:
            where.append(f"Zeile {line}, Spalte {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class DomainError(WeldError):
    """Argument außerhalb des Gültigkeitsbereichs (Polstelle, Parameterfenster)."""

    def __init__(self, message: str, pole_index: int = None):
        self.pole_index = pole_index
        super().__init__(message)


class MonotonicityError(WeldError):
    """g′ ≤ 0 an einer Stelle des Prüfgitters."""

    def __init__(self, x: float, derivative: float):
        self.x = x
        self.derivative = derivative
        super().__init__(f"g ist nicht streng monoton: g'({x:.6g}) = {derivative:.3e}")


class TruncationError(WeldError):
    """Abschneidelänge X zu klein für das Abklingen der rechten Seite."""

    def __init__(self, message: str, required_X: float):
        self.required_X = required_X
        super().__init__(f"{message}; benötigt X ≥ {required_X:.4g}")


class IllConditionedError(WeldError):
    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(f"Systemmatrix schlecht konditioniert (cond ≈ {condition:.3e})")


class SolveError(WeldError):
    """Lineares Gleichungssystem nicht lösbar oder Residuum zu groß."""


class ContourError(WeldError):
    """Konturen klemmen ein, Punkt liegt auf der Kontur oder Windungszahl ≠ 1."""
