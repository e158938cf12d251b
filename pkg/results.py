"""
results.py – Export der Ergebnisse: CSV mit Spaltenkopf, JSON mit flachen Schlüsseln
"""
import json
import logging
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

import config_loader as cfg

logger = logging.getLogger(__name__)


def split_complex(df: pd.DataFrame) -> pd.DataFrame:
    """Komplexe Spalten werden in <name>_re und <name>_im aufgeteilt."""
    out = {}
    for col in df.columns:
        values = df[col].to_numpy()
        if np.iscomplexobj(values):
            out[f"{col}_re"] = values.real
            out[f"{col}_im"] = values.imag
        else:
            out[col] = values
    return pd.DataFrame(out)


def write_csv(df: pd.DataFrame, path, float_format: str = None) -> Path:
    """Erste Zeile '# columns: a,b,...', danach Datenzeilen ohne Zeitstempel."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = float_format or cfg.get("weld.output.float_format", "%.12e")
    flat = split_complex(df)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# columns: " + ",".join(flat.columns) + "\n")
        flat.to_csv(fh, header=False, index=False, float_format=fmt, lineterminator="\n")
    logger.info("CSV geschrieben: %s (%d Zeilen)", path, len(flat))
    return path


def read_csv(path) -> pd.DataFrame:
    """Liest eine mit write_csv geschriebene Datei."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    columns = header.removeprefix("# columns: ").strip().split(",")
    return pd.read_csv(path, skiprows=1, header=None, names=columns)


def _plain(value):
    """Numpy-Typen in JSON-fähige Python-Werte; komplexe Werte als dict re/im."""
    if isinstance(value, dict):
        return _split_keys(value)
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"re": value.real.tolist(), "im": value.imag.tolist()}
        return value.tolist()
    if isinstance(value, (list, tuple)):
        if value and all(isinstance(v, (complex, np.complexfloating)) for v in value):
            return {"re": [float(v.real) for v in value], "im": [float(v.imag) for v in value]}
        return [_plain(v) for v in value]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.generic):
        return value.item()
    return value


def _split_keys(d: dict) -> dict:
    out = {}
    for key, value in d.items():
        if isinstance(value, (complex, np.complexfloating)):
            out[f"{key}_re"] = float(value.real)
            out[f"{key}_im"] = float(value.imag)
        else:
            out[key] = _plain(value)
    return out


def build_envelope(command: str, payload: dict, diagnostics: dict = None, config: dict = None,
                   grid: dict = None) -> dict:
    """
    Ergebnishülle mit Metadaten, Konfigurationsecho, Nutzdaten und Diagnosen,
    flach mit Punkt-Schlüsseln.
    """
    nested = {
        "meta": {
            "command": command,
            "version": cfg.get("weld.version", "0.0.0"),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "pandas": pd.__version__,
            "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        },
        "config": config if config is not None else (cfg.get("weld", {}) or {}),
        "result": payload,
        "diagnostics": diagnostics or {},
    }
    if grid:
        nested["grid"] = grid
    flat = pd.json_normalize(_split_keys(nested), sep=".")
    return {k: _plain(v) for k, v in flat.iloc[0].to_dict().items()}


def write_json(envelope: dict, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info("JSON geschrieben: %s", path)
    return path
