# Shared fixtures: logging isolation and small grids for the identity checks.
import logging

import pytest

try:
    from bitensionlab.utils import logger as logger_module
except Exception:
    from src.bitensionlab.utils import logger as logger_module  # type: ignore


@pytest.fixture(autouse=True)
def reset_logging_state():
    """Start every test with an unconfigured root logger and restore it afterwards."""
    root = logging.getLogger()
    original_handlers = root.handlers[:]
    original_level = root.level
    original_configured = logger_module._LOGGER_CONFIGURED
    logger_module._LOGGER_CONFIGURED = False
    for handler in original_handlers:
        root.removeHandler(handler)

    yield

    for handler in root.handlers[:]:
        root.removeHandler(handler)
        try:
            handler.close()
        except Exception:
            pass
    for handler in original_handlers:
        root.addHandler(handler)
    root.setLevel(original_level)
    logger_module._LOGGER_CONFIGURED = original_configured


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    """Checks run serially unless a test asks otherwise."""
    monkeypatch.setenv("BITENSIONLAB_THREADS", "1")
