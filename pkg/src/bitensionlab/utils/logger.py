# src/bitensionlab/utils/logger.py
from __future__ import annotations

import copy
import csv
import io
import logging
import logging.handlers
import os
import sys
from pathlib import Path
from typing import Final, Optional

from colorama import Fore, Style, init as _color_init

# ────────────────────────────────────────────────────────────
# constants
# ────────────────────────────────────────────────────────────
_LOG_FMT: Final = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
_DATE_FMT: Final = "%Y-%m-%d %H:%M:%S"
_CSV_FIELDS_WITH_LOGGER: Final = ("asctime", "levelname", "process", "name", "message")
_CSV_FIELDS_NO_LOGGER: Final = ("asctime", "levelname", "process", "message")
_LEVEL_COLOR: Final = {
    logging.DEBUG: Fore.CYAN,
    logging.INFO: Fore.GREEN,
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.MAGENTA,
}

_LOGGER_CONFIGURED = False


class _ColorFormatter(logging.Formatter):
    """Console formatter colouring the message by level."""

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401
        record = copy.copy(record)
        color = _LEVEL_COLOR.get(record.levelno, "")
        if color:
            record.msg = f"{color}{record.msg}{Style.RESET_ALL}"
        return super().format(record)


class _CsvFormatter(logging.Formatter):
    """One CSV row per record; tracebacks follow on their own lines."""

    def __init__(self, *, fields: tuple[str, ...], datefmt: str | None = None) -> None:
        super().__init__(None, datefmt)
        self._fields = fields

    def format(self, record: logging.LogRecord) -> str:  # noqa: D401
        record = copy.copy(record)
        record.message = record.getMessage()
        if record.exc_info and not record.exc_text:
            record.exc_text = self.formatException(record.exc_info)

        buffer = io.StringIO()
        writer = csv.writer(buffer)
        row: list[str] = []
        for field in self._fields:
            if field == "asctime":
                row.append(self.formatTime(record, self.datefmt))
            elif field == "message":
                row.append(record.message)
            else:
                value = getattr(record, field, "")
                row.append(str(value) if value is not None else "")
        writer.writerow(row)
        output = buffer.getvalue().rstrip("\r\n")
        if record.exc_text:
            output = f"{output}\n{record.exc_text}"
        return output


def create_csv_formatter(*, include_logger_name: bool = True) -> logging.Formatter:
    fields = _CSV_FIELDS_WITH_LOGGER if include_logger_name else _CSV_FIELDS_NO_LOGGER
    return _CsvFormatter(fields=fields, datefmt=_DATE_FMT)


def _coerce_level(value: str | int | None, *, default: int) -> int:
    if value is None:
        return default
    if isinstance(value, int):
        return value
    text = str(value).strip()
    if not text:
        return default
    if text.isdecimal() or (text[0] in {"+", "-"} and text[1:].isdecimal()):
        return int(text)
    numeric = logging.getLevelName(text.upper())
    if isinstance(numeric, int):
        return numeric
    raise ValueError(f"Unknown log level: {value!r}")


# ────────────────────────────────────────────────────────────
# public API
# ────────────────────────────────────────────────────────────
def setup_logger(
    run_name: Optional[str] = None,
    *,
    console_level: str | int | None = None,
    file_level: str | int | None = None,
    log_root: Path | str | None = "logs",
) -> None:
    """
    Configure the root logger once per process.

    ```python
    from bitensionlab.utils.logger import setup_logger

    setup_logger("verify", log_root=None)
    logging.getLogger("bitensionlab.verify").info("hello")
    ```

    Console output goes to standard error. Levels default to ``LOG_LEVEL``
    (``INFO`` when unset); explicit ``console_level`` / ``file_level`` win.
    ``log_root=None`` skips the CSV file handlers.
    """
    global _LOGGER_CONFIGURED

    default_level = _coerce_level(os.getenv("LOG_LEVEL"), default=logging.INFO)
    console_level_value = _coerce_level(console_level, default=default_level)
    file_level_value = _coerce_level(file_level, default=default_level)
    root_logger = logging.getLogger()

    if _LOGGER_CONFIGURED:
        for handler in root_logger.handlers:
            if isinstance(handler, logging.FileHandler):
                if isinstance(handler, logging.handlers.TimedRotatingFileHandler):
                    handler.setLevel(file_level_value)
            elif isinstance(handler, logging.StreamHandler):
                handler.setLevel(console_level_value)
        root_logger.setLevel(min(console_level_value, file_level_value))
        return

    _color_init(strip=False)
    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(console_level_value)
    ch.setFormatter(_ColorFormatter(_LOG_FMT, datefmt=_DATE_FMT))
    root_logger.addHandler(ch)

    if log_root is not None:
        target_dir = Path(log_root).resolve() / (run_name or "common")
        target_dir.mkdir(parents=True, exist_ok=True)

        fh = logging.handlers.TimedRotatingFileHandler(
            filename=str(target_dir / f"{run_name or 'common'}.csv"),
            when="midnight",
            interval=1,
            backupCount=7,
            encoding="utf-8",
        )
        fh.setLevel(file_level_value)
        fh.setFormatter(create_csv_formatter())
        root_logger.addHandler(fh)

        eh = logging.FileHandler(str(target_dir / "error.csv"), encoding="utf-8")
        eh.setLevel(logging.WARNING)
        eh.setFormatter(create_csv_formatter())
        root_logger.addHandler(eh)

    root_logger.setLevel(min(console_level_value, file_level_value))
    _LOGGER_CONFIGURED = True


def reset_logger() -> None:
    """Detach and close every root handler (tests use this between cases)."""
    global _LOGGER_CONFIGURED
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        try:
            handler.close()
        except Exception:
            pass
    _LOGGER_CONFIGURED = False


__all__ = ["create_csv_formatter", "reset_logger", "setup_logger"]
