"""
構造化ログ設定ユーティリティ

All records go to stderr so that CSV written to stdout stays clean.
"""

import logging
import sys
from typing import Any, Dict, Optional, Tuple

_FORMAT = "%(asctime)s [%(levelname)s][%(name)s] %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"

# LogRecord attributes that must not be overwritten through ``extra``
_RESERVED = frozenset(logging.makeLogRecord({}).__dict__) | {"message", "asctime"}


def _fold_extra(message: str, **kwargs: Any) -> Tuple[str, Optional[Dict[str, Any]]]:
    """Fold error_code / extra_data / free kwargs into ``extra`` and extend the message."""
    error_code = kwargs.pop("error_code", None)
    extra_data = kwargs.pop("extra_data", None)
    error = kwargs.pop("error", None)

    extra: Dict[str, Any] = {}
    if error_code:
        extra["error_code"] = error_code
    if extra_data:
        extra.update(extra_data)
    if error:
        extra["error"] = error
    extra.update(kwargs)
    extra = {(f"ctx_{k}" if k in _RESERVED else k): v for k, v in extra.items()}

    if error_code:
        message += f" [Error Code: {error_code}]"
    if error:
        message += f" [Error: {error}]"
    return message, extra if extra else None


class StructuredLogger:
    """Structured logger wrapper that handles custom parameters"""

    def __init__(self, name: str = "sam_dde"):
        self._logger = logging.getLogger(name)

    @property
    def name(self) -> str:
        return self._logger.name

    def log(self, level: str, message: str, **kwargs: Any) -> None:
        message, extra = _fold_extra(message, **kwargs)
        self._logger.log(getattr(logging, level.upper(), logging.INFO), message, extra=extra)

    def info(self, message: str, **kwargs: Any) -> None:
        self.log("info", message, **kwargs)

    def debug(self, message: str, **kwargs: Any) -> None:
        self.log("debug", message, **kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.log("warning", message, **kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.log("error", message, **kwargs)


def configure_logging(level: str = "INFO") -> None:
    """Attach one stderr handler to the package root logger, bound to the current sys.stderr."""
    root = logging.getLogger("sam_dde")
    root.setLevel(getattr(logging, level.upper(), logging.INFO))
    # a previous handler may hold a stream that has since been closed; drop it without flushing
    for h in [h for h in root.handlers if getattr(h, "_sam_dde", False)]:
        root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(fmt=_FORMAT, datefmt=_DATEFMT))
    handler._sam_dde = True  # type: ignore[attr-defined]
    root.addHandler(handler)
    root.propagate = True


def get_sam_logger(name: str = "sam_dde") -> StructuredLogger:
    """カスタムパラメータ対応ロガーを返す"""
    return StructuredLogger(name)
