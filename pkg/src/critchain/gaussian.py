"""Gaussian (displacement + covariance) description of the cavity mode.

Quadratures are x = (a + a^dag)/sqrt2 and p = i(a^dag - a)/sqrt2, so the vacuum
covariance is diag(1/2, 1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import faults
from .electron import Form, steady_expectations
from .errors import RangeError, StabilityError, UnstableRegime
from .model import Regime, SystemParams, drive_strength, validate_params, x_factor

SIGMA_VACUUM = np.diag([0.5, 0.5])
_DET_SLACK = 1e-12


@dataclass(frozen=True)
class GaussianState:
    d: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float).reshape(2)
        s = np.asarray(self.sigma, dtype=float).reshape(2, 2)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def vacuum(cls) -> "GaussianState":
        return cls(np.zeros(2), SIGMA_VACUUM.copy())

    @property
    def det(self) -> float:
        s = self.sigma
        return float(s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0])

    def validate(self) -> "GaussianState":
        s = self.sigma
        if abs(s[0, 1] - s[1, 0]) > 1e-12 * max(1.0, np.abs(s).max()):
            raise RangeError("covariance matrix is not symmetric")
        if s[0, 0] <= 0 or self.det <= 0:
            raise RangeError("covariance matrix is not positive definite")
        if self.det < 0.25 - _DET_SLACK:
            raise RangeError(f"det sigma = {self.det!r} violates the uncertainty bound 1/4")
        return self


@dataclass(frozen=True)
class DriftSpec:
    """d' = (B_h - kappa) d + c and sigma' = B sigma + sigma B^T - 2 kappa (sigma - sigma_lin)."""

    B: np.ndarray
    c: np.ndarray
    kappa: float
    sigma_lin: np.ndarray = field(default_factory=lambda: SIGMA_VACUUM.copy())
    omega0: float = 1.0


def drift_for(p: SystemParams, regime: Regime | str) -> DriftSpec:
    regime = Regime.parse(regime)
    v = validate_params(p, regime)
    w = p.omega0
    sigma_lin = SIGMA_VACUUM * faults.factor("sigma_lin")
    if regime is Regime.CHAIN_LOSS:
        el = steady_expectations(p, Form.CONTINUUM)
        b21 = w - 2.0 * p.g**2 * el.t_bar / p.n_sites
        B = np.array([[0.0, w], [-b21, 0.0]])
        c = np.array([0.0, -v.derived.lambda_drive])
    else:
        B = np.array([[0.0, w], [w * (x_factor(p) * p.g**2 - 1.0), 0.0]])
        c = np.zeros(2)
    kappa = 0.0 if regime is Regime.LOSSLESS else p.kappa_ph
    return DriftSpec(B=B, c=c, kappa=kappa, sigma_lin=sigma_lin, omega0=w)


# Packed state y = (d_x, d_p, s11, s12, s22).


def _generator(spec: DriftSpec, displacement_decay: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Matrix M and offset b with y' = M y + b."""
    (b11, b12), (b21, b22) = spec.B
    k = spec.kappa
    M = np.zeros((5, 5))
    M[:2, :2] = spec.B - displacement_decay * k * np.eye(2)
    # sigma' = B sigma + sigma B^T - 2k sigma + 2k sigma_lin
    M[2, 2:] = [2 * b11 - 2 * k, 2 * b12, 0.0]
    M[3, 2:] = [b21, b11 + b22 - 2 * k, b12]
    M[4, 2:] = [0.0, 2 * b21, 2 * b22 - 2 * k]
    sl = spec.sigma_lin
    b = np.concatenate([spec.c, 2 * k * np.array([sl[0, 0], sl[0, 1], sl[1, 1]])])
    return M, b


def _rk4_affine_map(M: np.ndarray, b: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """One classical RK4 step of y' = M y + b, written as y -> P y + q."""
    A = dt * M
    A2 = A @ A
    A3 = A2 @ A
    eye = np.eye(M.shape[0])
    P = eye + A + A2 / 2 + A3 / 6 + A3 @ A / 24
    q = dt * (eye + A / 2 + A2 / 6 + A3 / 24) @ b
    return P, q


def _pack(state: GaussianState) -> np.ndarray:
    s = state.sigma
    return np.array([state.d[0], state.d[1], s[0, 0], 0.5 * (s[0, 1] + s[1, 0]), s[1, 1]])


def _unpack(y: np.ndarray) -> GaussianState:
    return GaussianState(y[:2].copy(), np.array([[y[2], y[3]], [y[3], y[4]]]))


def default_dt(spec: DriftSpec) -> float:
    return 0.005 * min(1.0 / spec.omega0, 1.0 / max(spec.kappa, 1e-6))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # packed (n, 5)

    def __len__(self) -> int:
        return self.times.size

    def state(self, i: int) -> GaussianState:
        return _unpack(self.states[i])

    @property
    def final(self) -> GaussianState:
        return _unpack(self.states[-1])


def evolve(
    state0: GaussianState,
    spec: DriftSpec,
    t_final: float,
    dt: float | None = None,
    *,
    record_every: int = 1,
    displacement_decay: float = 1.0,
) -> Trajectory:
    """Fixed-step RK4 integration of the coupled moment equations.

    ``displacement_decay=2`` switches to displacements damped at 2 kappa instead
    of kappa; only the consistency report uses it.
    """
    if t_final < 0:
        raise RangeError(f"t_final must be >= 0, got {t_final!r}")
    if dt is None:
        dt = default_dt(spec)
    if not dt > 0:
        raise RangeError(f"dt must be > 0, got {dt!r}")
    n_steps = int(math.ceil(t_final / dt - 1e-9)) if t_final > 0 else 0
    M, b = _generator(spec, displacement_decay)
    P, q = _rk4_affine_map(M, b, t_final / n_steps) if n_steps else (np.eye(5), np.zeros(5))
    h = t_final / n_steps if n_steps else 0.0

    y = _pack(state0)
    times = [0.0]
    rows = [y.copy()]
    for i in range(1, n_steps + 1):
        y = P @ y + q
        if y[2] < 1e-12 or y[2] * y[4] - y[3] ** 2 < 1e-24 or y[4] < 1e-12:
            raise StabilityError(f"covariance lost positive definiteness at t={i * h:.6g}")
        if i % record_every == 0 or i == n_steps:
            times.append(i * h)
            rows.append(y.copy())
    return Trajectory(np.array(times), np.array(rows))


def rhs_norm(state: GaussianState, spec: DriftSpec) -> float:
    M, b = _generator(spec)
    return float(np.max(np.abs(M @ _pack(state) + b)))


def evolve_until_steady(
    state0: GaussianState,
    spec: DriftSpec,
    *,
    dt: float | None = None,
    t_max: float | None = None,
    tol: float = 1e-12,
) -> GaussianState:
    """Integrate until max|rhs| < tol * max(1, max|sigma|)."""
    if dt is None:
        dt = default_dt(spec)
    if t_max is None:
        t_max = 200.0 / max(spec.kappa, 1e-3)
    M, b = _generator(spec)
    P, q = _rk4_affine_map(M, b, dt)
    y = _pack(state0)
    t = 0.0
    while t < t_max:
        r = np.max(np.abs(M @ y + b))
        if r < tol * max(1.0, np.max(np.abs(y[2:]))):
            return _unpack(y)
        y = P @ y + q
        t += dt
    raise StabilityError(f"no steady state reached within t={t_max:.6g}")


def steady_state_cavity(p: SystemParams) -> GaussianState:
    """Closed-form squeezed thermal steady state under cavity loss."""
    if not p.kappa_ph > 0:
        raise UnstableRegime(f"kappa_ph > 0 required, got {p.kappa_ph!r}")
    validate_params(p, Regime.CAVITY_LOSS)
    w, k = p.omega0, p.kappa_ph
    y = x_factor(p) * p.g**2
    den = 4.0 * (k**2 - w**2 * (y - 1.0))
    s11 = (2 * k**2 + w**2 - w**2 * (y - 1.0)) / den
    s12 = y * k * w / den
    s22 = (2 * k**2 + w**2 * (y - 1.0) ** 2 - w**2 * (y - 1.0)) / den
    sigma = np.array([[s11, s12], [s12, s22]]) * faults.factor("cavity_steady")
    return GaussianState(np.zeros(2), sigma)


def steady_state_chain(p: SystemParams) -> GaussianState:
    """Closed-form displaced steady state under chain loss, as printed.

    The printed p-variance 2 Lambda^2 omega0^2/A^2 + 1/2 does not follow from the
    first-moment conditions it accompanies (those leave a coherent state); it is
    kept verbatim and the discrepancy is surfaced by ``critchain check``.
    """
    if not p.kappa_ph > 0:
        raise UnstableRegime(f"kappa_ph > 0 required, got {p.kappa_ph!r}")
    v = validate_params(p, Regime.CHAIN_LOSS)
    lam = v.derived.lambda_drive
    w, k = p.omega0, p.kappa_ph
    A = w**2 + k**2
    d = np.array([-lam * w / A, -lam * k / A])
    sigma = np.diag([0.5, 2.0 * lam**2 * w**2 / A**2 + 0.5])
    return GaussianState(d, sigma)


def ground_state_lossless(p: SystemParams) -> GaussianState:
    """Squeezed vacuum: Var(x) = 1/(2 sqrt u), Var(p) = sqrt(u)/2 with u = 1 - X g^2."""
    validate_params(p, Regime.LOSSLESS)
    u = 1.0 - x_factor(p) * p.g**2
    r = math.sqrt(u)
    return GaussianState(np.zeros(2), np.diag([0.5 / r, 0.5 * r]))


def regime_state(p: SystemParams, regime: Regime | str) -> GaussianState:
    regime = Regime.parse(regime)
    if regime is Regime.LOSSLESS:
        return ground_state_lossless(p)
    if regime is Regime.CAVITY_LOSS:
        return steady_state_cavity(p)
    return steady_state_chain(p)


def chain_moment_residuals(p: SystemParams, state: GaussianState) -> np.ndarray:
    """Left-hand sides of the five chain steady-state moment conditions.

    Raw moments <x^2>, <p^2>, <xp> are rebuilt from (d, sigma) with <xp> read as
    the symmetrized product.
    """
    lam = drive_strength(p)
    w, k = p.omega0, p.kappa_ph
    x, pm = state.d
    s = state.sigma
    xx = s[0, 0] + x * x
    pp = s[1, 1] + pm * pm
    xp = s[0, 1] + x * pm
    return np.array(
        [
            w * pm - k * x,
            w * x + lam + k * pm,
            2 * w * xp - 2 * k * xx + k,
            2 * w * xp + 2 * lam * pm + 2 * k * pp - k,
            w * pp - w * xx - lam * x - 2 * k * xp,
        ]
    )


def marginal(state: GaussianState, phi: float) -> tuple[float, float]:
    c = np.array([math.cos(phi), math.sin(phi)])
    return float(c @ state.d), float(c @ state.sigma @ c)


def wigner(state: GaussianState, x, p):
    """Gaussian Wigner function; broadcasts over array-valued ``x`` and ``p``."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    inv = np.linalg.inv(state.sigma)
    dx = x - state.d[0]
    dp = p - state.d[1]
    quad = inv[0, 0] * dx * dx + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
    return np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(state.det))
