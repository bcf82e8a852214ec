"""Runtime fault injection used to prove that ``critchain check`` catches errors.

A fault is enabled by listing its name in the ``CRITCHAIN_FAULT`` environment
variable (comma separated) or with :func:`injected`. Every fault scales one
quantity by :data:`PERTURBATION`.
"""

from __future__ import annotations

import os
from contextlib import contextmanager

ENV_VAR = "CRITCHAIN_FAULT"
KNOWN = ("sigma_lin", "cavity_steady", "lambda")
PERTURBATION = 1.01


def active(name: str) -> bool:
    raw = os.environ.get(ENV_VAR, "")
    return name in {part.strip() for part in raw.split(",") if part.strip()}


def factor(name: str) -> float:
    return PERTURBATION if active(name) else 1.0


@contextmanager
def injected(*names: str):
    """Temporarily enable faults (mainly for tests)."""
    for name in names:
        if name not in KNOWN:
            raise ValueError(f"unknown fault {name!r}; choose from {KNOWN}")
    old = os.environ.get(ENV_VAR)
    os.environ[ENV_VAR] = ",".join(names)
    try:
        yield
    finally:
        if old is None:
            os.environ.pop(ENV_VAR, None)
        else:
            os.environ[ENV_VAR] = old
