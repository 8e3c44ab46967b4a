from __future__ import annotations

import pytest
from pydantic import ValidationError

try:
    from bitensionlab.config import THREADS_ENV, Settings, load_settings
    from bitensionlab.utils.config import ConfigError, load_config
    from bitensionlab.verify.quadrature import resolve_threads
except Exception:
    from src.bitensionlab.config import THREADS_ENV, Settings, load_settings  # type: ignore
    from src.bitensionlab.utils.config import ConfigError, load_config  # type: ignore
    from src.bitensionlab.verify.quadrature import resolve_threads  # type: ignore


def test_threads_from_environment(monkeypatch) -> None:
    monkeypatch.setenv(THREADS_ENV, " 3 ")
    assert load_settings().threads == 3
    assert resolve_threads(None) == 3
    monkeypatch.setenv(THREADS_ENV, "")
    assert load_settings().threads == 0


def test_negative_threads_rejected(monkeypatch) -> None:
    monkeypatch.setenv(THREADS_ENV, "-2")
    with pytest.raises(ValidationError):
        load_settings()


def test_log_level_is_normalised(monkeypatch) -> None:
    monkeypatch.setenv("LOG_LEVEL", "debug")
    assert load_settings().log_level == "DEBUG"


def test_default_tolerances() -> None:
    s = Settings()
    assert s.pointwise_tol == pytest.approx(1e-7)
    assert s.quadrature_tol == pytest.approx(1e-6)
    assert s.worker_count() >= 1
    with pytest.raises(ValidationError):
        Settings(default_jet_order=6)


def test_structured_files(tmp_path) -> None:
    (tmp_path / "a.toml").write_text('[domain]\nx = ["0", "pi"]\n', encoding="utf-8")
    (tmp_path / "a.yaml").write_text("domain:\n  periodic: [x]\n", encoding="utf-8")
    (tmp_path / "a.json").write_text('{"ambient": {"kind": "sphere"}}', encoding="utf-8")
    assert load_config(tmp_path / "a.toml") == {"domain": {"x": ["0", "pi"]}}
    assert load_config(tmp_path / "a.yaml") == {"domain": {"periodic": ["x"]}}
    assert load_config(tmp_path / "a.json")["ambient"]["kind"] == "sphere"


def test_structured_file_errors(tmp_path) -> None:
    (tmp_path / "list.json").write_text("[1, 2]", encoding="utf-8")
    (tmp_path / "bad.toml").write_text("x = = 1", encoding="utf-8")
    (tmp_path / "a.ini").write_text("", encoding="utf-8")
    (tmp_path / "latin.yaml").write_bytes(b"domain:\n  topology: \xe9\n")
    for name in ("list.json", "bad.toml", "a.ini", "missing.yaml", "latin.yaml"):
        with pytest.raises(ConfigError):
            load_config(tmp_path / name)
