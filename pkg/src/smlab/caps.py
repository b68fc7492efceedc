"""Enumeration caps for the exact counting oracles.

Counting linear extensions is #P-hard, so the exact oracles refuse inputs
whose enumeration would not finish in desk time.  The defaults keep the
subset dynamic program (2^n states) and the general-constraint DP within a
few seconds.  Setting the environment variable ``SMLAB_ENUM_CAP`` overrides
both caps with a single value; it is read on every call so tests can
monkeypatch it.
"""

from __future__ import annotations

import os

from .errors import ConfigError

POSET_CAP_DEFAULT = 18
GENERAL_CAP_DEFAULT = 9

ENV_VAR = "SMLAB_ENUM_CAP"


def _env_override() -> int | None:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{ENV_VAR} must be positive, got {value}")
    return value


def poset_cap() -> int:
    """Largest ground set accepted by the down-set counting DP."""
    return _env_override() or POSET_CAP_DEFAULT


def general_cap() -> int:
    """Largest ground set accepted by the general-constraint counting DP."""
    return _env_override() or GENERAL_CAP_DEFAULT
