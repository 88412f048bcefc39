"""Backend selection: compiled (numba) hot loops vs the pure-numpy fallback.

The environment variable ``DINAVD_DISABLE_NUMBA`` (any of 1/true/yes) forces
the numpy path; it is also taken automatically when numba cannot be imported
or when an objective carries no kernel spec.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAS_NUMBA = False

ENV_FLAG = "DINAVD_DISABLE_NUMBA"


def numba_disabled_by_env() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes")


def active_backend() -> str:
    """Backend selected by environment and availability: 'numba' or 'numpy'."""
    if not HAS_NUMBA or numba_disabled_by_env():
        return "numpy"
    return "numba"


def resolve_backend(requested: str | None) -> str:
    """Validate an explicit request ('numba'/'numpy') or fall back to the default."""
    if requested is None:
        return active_backend()
    if requested not in ("numba", "numpy"):
        raise ValueError("backend must be 'numba' or 'numpy'")
    if requested == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return requested
