"""
config_loader.py – Lädt die YAML-Konfiguration einmalig
"""
import copy
import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

from errors import ConfigError

load_dotenv()

_CONFIG = None
_DEFAULTS_PATH = Path(__file__).parent / "config.yaml"


def _read_yaml(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        column = mark.column + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"YAML-Syntaxfehler in {path}: {problem}", line=line, column=column) from e
    except OSError as e:
        raise ConfigError(f"Konfigurationsdatei nicht lesbar: {e}", field=str(path)) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} enthält kein YAML-Mapping", field="weld")
    return data


def _merge(base: dict, override: dict) -> dict:
    """Überschreibt base rekursiv mit override (Listen werden ersetzt)."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path: str = None) -> dict:
    """
    Lädt die Standardwerte aus config.yaml und legt optional eine
    Benutzerdatei darüber. Ohne Pfad wird der Cache zurückgegeben.
    """
    global _CONFIG
    if _CONFIG is not None and path is None:
        return _CONFIG

    cfg = _read_yaml(_DEFAULTS_PATH)
    if path:
        cfg = _merge(cfg, _read_yaml(Path(path)))

    level = os.getenv("WELD_LOG_LEVEL")
    if level:
        cfg.setdefault("weld", {}).setdefault("logging", {})["level"] = level.upper()

    _CONFIG = cfg
    return _CONFIG


def reset():
    """Verwirft den Cache (für Tests)."""
    global _CONFIG
    _CONFIG = None


def get(key: str, default=None):
    """Zugriff auf verschachtelte Keys mit Punkt-Notation z.B. 'weld.strip.alpha'"""
    cfg = load_config()
    keys = key.split(".")
    val = cfg
    for k in keys:
        if isinstance(val, dict) and k in val:
            val = val[k]
        else:
            return default
    return val


def worker_count() -> int:
    """Anzahl paralleler Löser aus WELD_WORKERS (0 = alle Kerne)."""
    raw = os.getenv("WELD_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"WELD_WORKERS muss eine ganze Zahl sein, nicht '{raw}'", field="WELD_WORKERS")
    if n < 0:
        raise ConfigError("WELD_WORKERS darf nicht negativ sein", field="WELD_WORKERS")
    return n or (os.cpu_count() or 1)
