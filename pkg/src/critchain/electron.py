"""Electron-sector expectation values of the kinetic-energy and current operators.

T = sum_k -2 t_h cos(k) n_k and J = sum_k 2 t_h sin(k) n_k, evaluated either for a
half-filled Fermi sea centred at ``s`` or for the pumped/decaying steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import HalfFillingError, RangeError
from .model import SystemParams, current_profile


class Form(str, Enum):
    CONTINUUM = "continuum"
    DISCRETE = "discrete"


class ElectronMode(str, Enum):
    FERMI_SEA = "fermi_sea"
    STEADY_STATE = "steady_state"


@dataclass(frozen=True)
class MomentumGrid:
    L: int
    k_values: np.ndarray

    @classmethod
    def for_sites(cls, L: int) -> "MomentumGrid":
        if L < 2:
            raise RangeError(f"need at least two sites, got {L}")
        j = np.arange(L)
        return cls(L=int(L), k_values=-np.pi + 2.0 * np.pi * (j + 1) / L)


@dataclass(frozen=True)
class ElectronSummary:
    t_bar: float
    j_bar: float
    mode: ElectronMode
    s_center: float | None = None


# Relative slack used to decide that a grid momentum sits on a window edge.
_EDGE_TOL = 1e-12


def fermi_window(grid: MomentumGrid, s: float) -> np.ndarray:
    """Boolean occupation of the half-filled window (s - pi/2, s + pi/2).

    Grid points exactly on an edge are admitted lower edge first until L/2 modes
    are occupied.
    """
    L = grid.L
    if L % 2:
        raise HalfFillingError(f"odd site count {L} cannot be half filled")
    # Signed distance from the centre, wrapped into (-pi, pi].
    delta = np.angle(np.exp(1j * (grid.k_values - s)))
    edge = math.pi / 2
    tol = _EDGE_TOL * math.pi
    inside = np.abs(delta) < edge - tol
    lower = np.abs(delta + edge) <= tol
    upper = np.abs(delta - edge) <= tol
    occ = inside.copy()
    need = L // 2 - int(inside.sum())
    for mask in (lower, upper):
        idx = np.flatnonzero(mask)
        take = idx[: max(0, need)]
        occ[take] = True
        need -= take.size
    if int(occ.sum()) != L // 2:
        raise HalfFillingError(
            f"window around s={s!r} holds {int(occ.sum())} modes, expected {L // 2}"
        )
    return occ


def fs_expectations(p: SystemParams, s: float, form: Form | str = Form.CONTINUUM) -> ElectronSummary:
    """Kinetic energy and current of the Fermi sea centred at ``s``.

    The continuum form is the closed expression 2 t_h L cos(s)/pi, 2 t_h L sin(s)/pi.
    The discrete form sums the momentum-space operators over the occupied grid
    window; note that it carries the opposite sign for T (about -2 t_h L/pi at s=0).
    """
    form = Form(form)
    if not -math.pi <= s <= math.pi:
        raise RangeError(f"s must lie in [-pi, pi], got {s!r}")
    L, th = p.n_sites, p.t_hop
    if form is Form.CONTINUUM:
        t_bar = 2.0 * th * L * math.cos(s) / math.pi
        j_bar = 2.0 * th * L * math.sin(s) / math.pi
    else:
        grid = MomentumGrid.for_sites(L)
        k = grid.k_values[fermi_window(grid, s)]
        t_bar = float(np.sum(-2.0 * th * np.cos(k)))
        j_bar = float(np.sum(2.0 * th * np.sin(k)))
    return ElectronSummary(t_bar=t_bar, j_bar=j_bar, mode=ElectronMode.FERMI_SEA, s_center=s)


def steady_occupation(p: SystemParams, k):
    """Steady occupation 1/(eta (1 + sin k) + 1); accepts scalars or arrays."""
    eta = _require_eta(p)
    return 1.0 / (eta * (1.0 + np.sin(k)) + 1.0)


def steady_expectations(p: SystemParams, form: Form | str = Form.CONTINUUM) -> ElectronSummary:
    form = Form(form)
    eta = _require_eta(p)
    L, th = p.n_sites, p.t_hop
    if form is Form.CONTINUUM:
        # Written out rather than routed through drive_strength, so a corrupted
        # drive formula cannot hide behind a consistent electron sector.
        t_bar = 0.0
        j_bar = th * L * (2.0 / eta - 2.0 * (1.0 + eta) / (eta * math.sqrt(1.0 + 2.0 * eta)))
    else:
        k = MomentumGrid.for_sites(L).k_values
        n = steady_occupation(p, k)
        t_bar = float(np.sum(-2.0 * th * np.cos(k) * n))
        j_bar = float(np.sum(2.0 * th * np.sin(k) * n))
    return ElectronSummary(t_bar=t_bar, j_bar=j_bar, mode=ElectronMode.STEADY_STATE)


ETA_BRACKET = (0.1, 50.0)


def optimal_eta(p: SystemParams | None = None, xtol: float = 1e-6) -> float:
    """eta maximizing the steady current magnitude.

    The objective is t_h L |f(eta)|, so the optimum does not depend on ``p``; the
    argument is accepted for call-site symmetry.
    """
    lo, hi = ETA_BRACKET
    res = minimize_scalar(
        lambda e: -abs(current_profile(e)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol * 1e-3},
    )
    eta = float(res.x)
    if not lo + xtol < eta < hi - xtol:
        raise RangeError(f"current maximum {eta!r} sits on the bracket edge {ETA_BRACKET}")
    return eta


def relax_occupation(p: SystemParams, k: float, n0: float, t: float) -> float:
    """Occupation of mode k at time t under dn/dt = -4 kappa_el (1+sin k) n + 4 Gamma (1-n).

    Requires the individual rates; ``eta`` alone does not fix a time scale.
    """
    if t < 0:
        raise RangeError(f"t must be >= 0, got {t!r}")
    if not 0.0 <= n0 <= 1.0:
        raise RangeError(f"n0 must lie in [0, 1], got {n0!r}")
    decay = 4.0 * p.kappa_el * (1.0 + math.sin(k))
    pump = 4.0 * p.gamma_pump
    rate = decay + pump
    if rate == 0.0:
        return n0
    n_inf = pump / rate
    return n_inf + (n0 - n_inf) * math.exp(-rate * t)


def _require_eta(p: SystemParams) -> float:
    if p.eta is None or not p.eta > 0:
        raise RangeError(f"eta > 0 required, got {p.eta!r}")
    return float(p.eta)
