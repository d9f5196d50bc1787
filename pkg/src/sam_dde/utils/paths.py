"""Cache directory resolution via platformdirs.

Priority: explicit override > SAM_DDE_CACHE_DIR > platform user cache dir.
Resolved paths are absolute; directories are created on demand.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Optional

try:
    from platformdirs import PlatformDirs
except Exception as e:  # pragma: no cover
    raise RuntimeError("Missing dependency 'platformdirs'. Please add it to requirements and install.") from e


APP_NAME = "sam-dde"
REFERENCES_SUBDIR = "references"


def _expand(raw: str) -> Path:
    return Path(os.path.expandvars(os.path.expanduser(raw))).resolve()


def _ensure_dir(p: Path) -> Path:
    assert p.is_absolute(), f"Path must be absolute: {p}"
    p.mkdir(parents=True, exist_ok=True)
    return p


def get_cache_dir(override: Optional[str] = None) -> Path:
    if override:
        return _ensure_dir(_expand(override))
    env = os.getenv("SAM_DDE_CACHE_DIR")
    if env:
        return _ensure_dir(_expand(env))
    return _ensure_dir(Path(PlatformDirs(appname=APP_NAME).user_cache_dir))


def get_reference_cache_dir(override: Optional[str] = None) -> Path:
    """Directory holding persisted dense references as <sha256>.npz."""
    return _ensure_dir(get_cache_dir(override) / REFERENCES_SUBDIR)
