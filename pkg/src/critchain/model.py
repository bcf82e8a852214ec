"""Physical parameters of the cavity + tight-binding chain and their validity checks.

Natural units are used throughout (hbar = c = e = 1, lattice constant 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum

from . import faults
from .errors import RangeError, UnstableRegime


class Regime(str, Enum):
    LOSSLESS = "lossless"
    CAVITY_LOSS = "cavity"
    CHAIN_LOSS = "chain"

    @classmethod
    def parse(cls, value: "Regime | str") -> "Regime":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "lossless": cls.LOSSLESS,
            "cavity": cls.CAVITY_LOSS,
            "cavityloss": cls.CAVITY_LOSS,
            "chain": cls.CHAIN_LOSS,
            "chainloss": cls.CHAIN_LOSS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise RangeError(f"unknown regime {value!r}") from None


_BOUNDARY_RTOL = 1e-12
_ETA_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """All physical parameters of the model.

    ``eta`` (electron decay over pump rate) may be given directly, derived from
    ``kappa_el / gamma_pump``, or both; in the last case they must agree.
    """

    omega0: float = 1.0
    t_hop: float = 1.0
    g: float = 0.88
    n_sites: int = 400
    kappa_ph: float = 0.1
    kappa_el: float = 0.0
    gamma_pump: float = 0.0
    eta: float | None = None

    def __post_init__(self):
        if self.gamma_pump > 0:
            ratio = self.kappa_el / self.gamma_pump
            if self.eta is None:
                object.__setattr__(self, "eta", ratio)
            elif not math.isclose(self.eta, ratio, rel_tol=_ETA_RTOL, abs_tol=0.0):
                raise RangeError(
                    f"eta={self.eta!r} disagrees with kappa_el/gamma_pump={ratio!r}"
                )

    def replace(self, **changes) -> "SystemParams":
        # Re-derive eta from the rates only when the caller touched the rates.
        if ("kappa_el" in changes or "gamma_pump" in changes) and "eta" not in changes:
            changes["eta"] = None
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class DerivedConstants:
    X: float
    A: float
    g_crit: float
    lambda_drive: float | None


@dataclass(frozen=True)
class ValidatedParams:
    params: SystemParams
    regime: Regime
    derived: DerivedConstants


def _check_finite(p: SystemParams) -> None:
    for f in fields(p):
        value = getattr(p, f.name)
        if value is None:
            continue
        if not math.isfinite(value):
            raise RangeError(f"{f.name} must be finite, got {value!r}")


def x_factor(p: SystemParams) -> float:
    """X = 4 t_h / (omega0 pi); X g^2 = (g / g_c)^2."""
    return 4.0 * p.t_hop / (p.omega0 * math.pi)


def critical_coupling(p: SystemParams) -> float:
    return math.sqrt(math.pi * p.omega0 / (4.0 * p.t_hop))


def current_profile(eta: float) -> float:
    """f(eta) = 2/eta - 2(1+eta)/(eta sqrt(1+2 eta)); J(inf) = t_h L f(eta)."""
    if not eta > 0:
        raise RangeError(f"eta must be > 0, got {eta!r}")
    return 2.0 / eta - 2.0 * (1.0 + eta) / (eta * math.sqrt(1.0 + 2.0 * eta))


def drive_strength(p: SystemParams) -> float:
    """Coherent drive Lambda = sqrt(2L) g t_h f(eta) felt by the cavity in the chain-loss regime."""
    if p.eta is None or not p.eta > 0:
        raise RangeError(f"drive strength needs eta > 0, got {p.eta!r}")
    if p.n_sites < 2:
        raise RangeError(f"n_sites must be >= 2, got {p.n_sites!r}")
    value = math.sqrt(2.0 * p.n_sites) * p.g * p.t_hop * current_profile(p.eta)
    return value * faults.factor("lambda")


def derived_constants(p: SystemParams) -> DerivedConstants:
    lam = drive_strength(p) if p.eta is not None and p.eta > 0 else None
    return DerivedConstants(
        X=x_factor(p),
        A=p.kappa_ph**2 + p.omega0**2,
        g_crit=critical_coupling(p),
        lambda_drive=lam,
    )


def validate_params(p: SystemParams, regime: Regime | str) -> ValidatedParams:
    """Check the generic invariants plus the regime's existence condition."""
    regime = Regime.parse(regime)
    _check_finite(p)
    if not p.omega0 > 0:
        raise RangeError(f"omega0 > 0 violated (omega0={p.omega0!r})")
    if not p.t_hop > 0:
        raise RangeError(f"t_hop > 0 violated (t_hop={p.t_hop!r})")
    if int(p.n_sites) != p.n_sites or p.n_sites < 2 or p.n_sites % 2:
        raise RangeError(f"n_sites >= 2 and even violated (n_sites={p.n_sites!r})")
    for name in ("kappa_ph", "kappa_el", "gamma_pump"):
        if getattr(p, name) < 0:
            raise RangeError(f"{name} >= 0 violated ({name}={getattr(p, name)!r})")

    X = x_factor(p)
    xg2 = X * p.g**2
    if regime is Regime.LOSSLESS:
        # Rounding in X g_c^2 must not let g = g_c through.
        if not xg2 < 1.0 - _BOUNDARY_RTOL:
            raise UnstableRegime(f"X g^2 < 1 violated (X g^2 = {xg2!r}): no photon ground state")
    elif regime is Regime.CAVITY_LOSS:
        if not p.kappa_ph**2 > p.omega0**2 * (xg2 - 1.0):
            raise UnstableRegime(
                "kappa_ph^2 > omega0^2 (X g^2 - 1) violated "
                f"({p.kappa_ph**2!r} <= {p.omega0**2 * (xg2 - 1.0)!r}): no steady state"
            )
    else:
        if p.eta is None or not p.eta > 0:
            raise RangeError(f"eta > 0 violated (eta={p.eta!r})")
    return ValidatedParams(params=p, regime=regime, derived=derived_constants(p))


def stability_boundary(p: SystemParams) -> float:
    """Coupling where the cavity-loss steady state ceases to exist: X g^2 = 1 + kappa^2/omega0^2."""
    return critical_coupling(p) * math.sqrt(1.0 + (p.kappa_ph / p.omega0) ** 2)
