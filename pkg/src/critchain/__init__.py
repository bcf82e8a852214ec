"""Hopping-strength metrology for a tight-binding chain coupled to a cavity mode."""

from __future__ import annotations

__version__ = "0.1.0"
