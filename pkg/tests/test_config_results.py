from __future__ import annotations

import json

import numpy as np
import pandas as pd
import pytest

import config_loader
import results
from errors import ConfigError


def test_defaults_are_loaded() -> None:
    assert config_loader.get("weld.strip.alpha") == 1.0
    assert config_loader.get("weld.tolerances.interval") == pytest.approx(1e-4)
    assert config_loader.get("weld.does.not.exist", "x") == "x"


def test_user_file_overrides_defaults(tmp_path) -> None:
    path = tmp_path / "run.yaml"
    path.write_text("weld:\n  strip:\n    alpha: 2.0\n", encoding="utf-8")
    config_loader.load_config(str(path))
    assert config_loader.get("weld.strip.alpha") == 2.0
    assert config_loader.get("weld.strip.kappa_minus") == 0.0


def test_yaml_syntax_error_has_position(tmp_path) -> None:
    path = tmp_path / "broken.yaml"
    path.write_text("weld:\n  strip: [1, 2\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        config_loader.load_config(str(path))
    assert exc.value.line is not None


def test_log_level_from_env(monkeypatch) -> None:
    monkeypatch.setenv("WELD_LOG_LEVEL", "debug")
    assert config_loader.load_config()["weld"]["logging"]["level"] == "DEBUG"


@pytest.mark.parametrize("raw", ["zwei", "-1"])
def test_invalid_worker_count(monkeypatch, raw) -> None:
    monkeypatch.setenv("WELD_WORKERS", raw)
    with pytest.raises(ConfigError) as exc:
        config_loader.worker_count()
    assert exc.value.field == "WELD_WORKERS"


def test_csv_header_and_complex_split(tmp_path) -> None:
    df = pd.DataFrame({"x": [0.0, 1.0], "f": np.array([1 + 2j, 3 - 4j])})
    path = results.write_csv(df, tmp_path / "out" / "f.csv")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first == "# columns: x,f_re,f_im"
    back = results.read_csv(path)
    assert back["f_im"].tolist() == pytest.approx([2.0, -4.0])


def test_json_envelope_has_flat_keys(tmp_path) -> None:
    payload = {"constant": 1.5 - 0.5j, "grid": {"N": np.int64(64)}, "windings": [1, 1]}
    envelope = results.build_envelope("solve-omega", payload, {"breaches": []})
    assert envelope["meta.command"] == "solve-omega"
    assert envelope["result.constant_re"] == 1.5
    assert envelope["result.constant_im"] == -0.5
    assert envelope["result.grid.N"] == 64
    assert envelope["config.strip.alpha"] == 1.0
    assert not any(isinstance(v, dict) for v in envelope.values())

    path = results.write_json(envelope, tmp_path / "e.json")
    assert json.loads(path.read_text(encoding="utf-8"))["result.windings"] == [1, 1]
