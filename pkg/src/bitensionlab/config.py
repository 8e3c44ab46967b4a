from __future__ import annotations

import os
from typing import Any

from dotenv import load_dotenv
from pydantic import BaseModel, field_validator

THREADS_ENV = "BITENSIONLAB_THREADS"


def load_env_file() -> None:
    # Under pytest the developer .env must not leak into monkeypatched values.
    if os.getenv("PYTEST_CURRENT_TEST"):
        return
    load_dotenv(override=False)


class Settings(BaseModel):
    threads: int = 0
    log_level: str = "INFO"
    pointwise_tol: float = 1e-7
    quadrature_tol: float = 1e-6
    default_jet_order: int = 5

    @field_validator("threads", mode="before")
    def _coerce_threads(cls, v):
        if v is None or (isinstance(v, str) and not v.strip()):
            return 0
        n = int(str(v).strip())
        if n < 0:
            raise ValueError(f"{THREADS_ENV} must be >= 0, got {n}")
        return n

    @field_validator("log_level", mode="before")
    def _norm_level(cls, v):
        if not v:
            return "INFO"
        return str(v).strip().upper()

    @field_validator("default_jet_order")
    def _check_order(cls, v):
        if not 2 <= v <= 5:
            raise ValueError(f"default_jet_order must be in [2, 5], got {v}")
        return v

    def worker_count(self) -> int:
        """Resolved thread count; 0 means one per CPU."""
        return self.threads or (os.cpu_count() or 1)


def load_settings() -> Settings:
    load_env_file()
    raw: dict[str, Any] = {
        "threads": os.getenv(THREADS_ENV),
        "log_level": os.getenv("LOG_LEVEL", "INFO"),
    }
    return Settings.model_validate(raw)


__all__ = ["THREADS_ENV", "Settings", "load_env_file", "load_settings"]
