"""Quantum and classical Fisher information for estimating the hopping strength.

Three computation paths exist and are never mixed inside one ratio:

* ``gaussian``: regime state from :mod:`critchain.gaussian`, finite-difference
  derivative in t_h, Gaussian QFI formula and Gaussian homodyne marginals;
* ``closed_form``: reference analytic expressions, transcribed verbatim;
* ``oracle``: brute-force Fock-space computations from :mod:`critchain.fock`.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import fock
from .errors import ConventionError, PurityPole, RangeError, StepError, UnstableRegime
from .gaussian import GaussianState, marginal, regime_state
from .model import Regime, SystemParams, drive_strength, validate_params, x_factor


class Path(str, Enum):
    CLOSED_FORM = "closed_form"
    GAUSSIAN = "gaussian"
    ORACLE = "oracle"


@dataclass(frozen=True)
class FisherResult:
    value: float
    path: Path
    regime: Regime
    phi: float | None = None
    meta: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class StateDerivative:
    d_dot: np.ndarray
    sigma_dot: np.ndarray
    h: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "d_dot", np.asarray(self.d_dot, dtype=float).reshape(2))
        sd = np.asarray(self.sigma_dot, dtype=float).reshape(2, 2)
        object.__setattr__(self, "sigma_dot", 0.5 * (sd + sd.T))

    @classmethod
    def zero(cls) -> "StateDerivative":
        return cls(np.zeros(2), np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# derivatives

RICHARDSON_RTOL = 1e-6
_MAX_REFINE = 6


def default_step(t_hop: float) -> float:
    return 1e-5 * max(1.0, abs(t_hop))


def _pack(state: GaussianState) -> np.ndarray:
    return np.concatenate([state.d, state.sigma.ravel()])


def _central(p: SystemParams, regime: Regime, h: float) -> np.ndarray:
    plus = regime_state(p.replace(t_hop=p.t_hop + h), regime)
    minus = regime_state(p.replace(t_hop=p.t_hop - h), regime)
    return (_pack(plus) - _pack(minus)) / (2.0 * h)


def state_derivative(
    p: SystemParams,
    regime: Regime | str,
    h: float | None = None,
    *,
    rtol: float = RICHARDSON_RTOL,
) -> StateDerivative:
    """d(d)/dt_h and d(sigma)/dt_h by central differences.

    Estimates at h and h/2 must agree to ``rtol``; if they do not, the step is
    reduced fourfold (near the critical point the state varies on the scale of the
    distance to it) a few times before giving up. The returned value is the
    Richardson combination of the last pair.
    """
    regime = Regime.parse(regime)
    if h is None:
        h = default_step(p.t_hop)
    for _ in range(_MAX_REFINE):
        if p.t_hop - h <= 0:
            raise RangeError(f"step {h!r} reaches t_h <= 0")
        coarse = _central(p, regime, h)
        fine = _central(p, regime, h / 2)
        scale = np.max(np.abs(fine))
        if np.max(np.abs(coarse - fine)) <= rtol * scale + 1e-14:
            best = (4.0 * fine - coarse) / 3.0
            return StateDerivative(best[:2], best[2:].reshape(2, 2), h=h)
        h /= 4.0
    raise StepError(f"derivative in t_h not converged down to h={h * 4:.3e}")


# ---------------------------------------------------------------------------
# Gaussian QFI formulas

M_SYMPLECTIC = np.array([[0.0, 0.5], [-0.5, 0.0]])
NORMALIZATIONS = ("half", "quarter-sigma-only", "quarter")
DISPLACEMENT_WEIGHTS = (2.0, 1.0)
PURITY_TOL = 1e-9
POLE_TOL = 1e-10


@dataclass(frozen=True)
class Convention:
    """Which reading of the mixed-state Gaussian QFI formula is used.

    ``half`` feeds the covariance as is; ``quarter-sigma-only`` halves sigma and its
    derivative; ``quarter`` halves the commutator matrix M as well, which is the
    reading consistent with sigma = 1/2 <{dx, dx}> and M = 1/2 <[x, p]>/i.
    """

    normalization: str = "quarter"
    displacement_weight: float = 1.0

    def describe(self) -> str:
        return f"normalization={self.normalization};displacement_weight={self.displacement_weight:g}"


def mixed_term(sigma: np.ndarray, sigma_dot: np.ndarray, m: np.ndarray = M_SYMPLECTIC) -> float:
    """128/(256 det^2 - 1) {det^2 Tr[(s^-1 s')^2] - Tr[(s' M)^2]}."""
    det = float(np.linalg.det(sigma))
    den = 256.0 * det**2 - 1.0
    if abs(den) < POLE_TOL:
        raise PurityPole(f"256 det^2 - 1 = {den!r}")
    x = np.linalg.solve(sigma, sigma_dot)
    sm = sigma_dot @ m
    return 128.0 / den * (det**2 * np.trace(x @ x) - np.trace(sm @ sm))


def covariance_term(sigma: np.ndarray, sigma_dot: np.ndarray, normalization: str) -> float:
    if normalization == "half":
        return mixed_term(sigma, sigma_dot)
    if normalization == "quarter-sigma-only":
        return mixed_term(sigma / 2, sigma_dot / 2)
    if normalization == "quarter":
        return mixed_term(sigma / 2, sigma_dot / 2, M_SYMPLECTIC / 2)
    raise ValueError(f"unknown normalization {normalization!r}")


def displacement_term(sigma: np.ndarray, d_dot: np.ndarray) -> float:
    return float(d_dot @ np.linalg.solve(sigma, d_dot))


def pure_covariance_term(sigma: np.ndarray, sigma_dot: np.ndarray) -> float:
    """1/4 Tr[(s^-1 s')^2], the limit of the mixed formula on pure states."""
    x = np.linalg.solve(sigma, sigma_dot)
    return 0.25 * float(np.trace(x @ x))


def is_pure(state: GaussianState, tol: float = PURITY_TOL) -> bool:
    return abs(4.0 * state.det - 1.0) <= tol


def qfi_formula(state: GaussianState, deriv: StateDerivative, convention: Convention) -> float:
    cov = covariance_term(state.sigma, deriv.sigma_dot, convention.normalization)
    return cov + convention.displacement_weight * displacement_term(state.sigma, deriv.d_dot)


def _all_variants(state: GaussianState, deriv: StateDerivative) -> dict:
    out = {}
    for norm in NORMALIZATIONS:
        for w in DISPLACEMENT_WEIGHTS:
            key = f"{norm}/w{w:g}"
            try:
                out[key] = qfi_formula(state, deriv, Convention(norm, w))
            except PurityPole:
                out[key] = math.nan
    return out


# ---------------------------------------------------------------------------
# convention arbitration

ARBITRATION_RTOL = 1e-4
CAVITY_CANONICAL = SystemParams(omega0=1.0, t_hop=1.0, g=0.5, kappa_ph=0.1)
CHAIN_CANONICAL = SystemParams(omega0=1.0, t_hop=1.0, g=0.5, n_sites=64, kappa_ph=0.1, eta=2.41)

_selected: Convention | None = None
_arbitration_log: dict = {}


def _oracle_moments_derivative(p: SystemParams, regime: Regime, n_max: int) -> tuple[GaussianState, StateDerivative]:
    h = default_step(p.t_hop)

    def moments(q):
        d, s = fock.lindblad_steady_state(q, regime, n_max).moments()
        return d, s

    d0, s0 = moments(p)
    dp, sp = moments(p.replace(t_hop=p.t_hop + h))
    dm, sm = moments(p.replace(t_hop=p.t_hop - h))
    return GaussianState(d0, s0), StateDerivative((dp - dm) / (2 * h), (sp - sm) / (2 * h), h=h)


def arbitrate_convention(*, force: bool = False) -> Convention:
    """Pick the QFI reading that agrees with the SLD oracle; cached per process.

    The covariance normalization is decided at a cavity-loss point (zero
    displacement). The displacement weight is decided at a chain-loss point using
    the oracle's own moments, so that no closed-form state enters.
    """
    global _selected, _arbitration_log
    if _selected is not None and not force:
        return _selected

    cav = CAVITY_CANONICAL
    oracle_cav = fock.qfi_sld(cav, Regime.CAVITY_LOSS, fock.DEFAULT_NMAX)
    state = regime_state(cav, Regime.CAVITY_LOSS)
    deriv = state_derivative(cav, Regime.CAVITY_LOSS)
    norm_values = {}
    for norm in NORMALIZATIONS:
        try:
            norm_values[norm] = covariance_term(state.sigma, deriv.sigma_dot, norm)
        except PurityPole:
            norm_values[norm] = math.nan
    norm_match = [
        n for n, v in norm_values.items() if abs(v - oracle_cav) <= ARBITRATION_RTOL * abs(oracle_cav)
    ]

    ch = CHAIN_CANONICAL
    oracle_ch = fock.qfi_sld(ch, Regime.CHAIN_LOSS, fock.DEFAULT_NMAX)
    ostate, oderiv = _oracle_moments_derivative(ch, Regime.CHAIN_LOSS, fock.DEFAULT_NMAX)
    if is_pure(ostate, 1e-6):
        cov_part = pure_covariance_term(ostate.sigma, oderiv.sigma_dot)
    elif len(norm_match) == 1:
        cov_part = covariance_term(ostate.sigma, oderiv.sigma_dot, norm_match[0])
    else:
        cov_part = math.nan
    disp = displacement_term(ostate.sigma, oderiv.d_dot)
    weight_values = {w: cov_part + w * disp for w in DISPLACEMENT_WEIGHTS}
    weight_match = [
        w for w, v in weight_values.items() if abs(v - oracle_ch) <= ARBITRATION_RTOL * abs(oracle_ch)
    ]

    _arbitration_log = {
        "cavity_oracle": oracle_cav,
        "cavity_candidates": norm_values,
        "chain_oracle": oracle_ch,
        "chain_candidates": weight_values,
    }
    if len(norm_match) != 1 or len(weight_match) != 1:
        raise ConventionError(
            f"arbitration ambiguous: normalization matches {norm_match}, weight matches {weight_match}"
        )
    _selected = Convention(norm_match[0], weight_match[0])
    return _selected


def arbitration_log() -> dict:
    return dict(_arbitration_log)


def current_convention() -> Convention:
    return arbitrate_convention()


def set_convention(convention: Convention | None) -> None:
    """Install an already-arbitrated convention (worker processes use this)."""
    global _selected
    _selected = convention


@contextmanager
def use_convention(convention: Convention):
    global _selected
    old = _selected
    _selected = convention
    try:
        yield convention
    finally:
        _selected = old


# ---------------------------------------------------------------------------
# Gaussian-path Fisher information


def qfi_gaussian(
    state: GaussianState,
    deriv: StateDerivative,
    convention: Convention | None = None,
    *,
    regime: Regime | str = Regime.CAVITY_LOSS,
) -> FisherResult:
    """QFI of a single-mode Gaussian state with respect to t_h.

    Pure states go through 1/4 Tr[(s^-1 s')^2] + w d'^T s^-1 d', because the mixed
    formula has its pole there in the physically consistent normalization.
    """
    regime = Regime.parse(regime)
    if convention is None:
        convention = current_convention()
    meta = {"convention": convention.describe(), "h": deriv.h, "variants": _all_variants(state, deriv)}
    disp = convention.displacement_weight * displacement_term(state.sigma, deriv.d_dot)
    if is_pure(state):
        meta["branch"] = "pure"
        value = pure_covariance_term(state.sigma, deriv.sigma_dot) + disp
    else:
        meta["branch"] = "mixed"
        value = covariance_term(state.sigma, deriv.sigma_dot, convention.normalization) + disp
    return FisherResult(float(value), Path.GAUSSIAN, regime, None, meta)


def cfi_homodyne(
    state: GaussianState,
    deriv: StateDerivative,
    phi: float,
    *,
    regime: Regime | str = Regime.CAVITY_LOSS,
) -> FisherResult:
    """Fisher information of the Gaussian quadrature marginal along phi."""
    regime = Regime.parse(regime)
    _, v = marginal(state, phi)
    if not v > 0:
        raise RangeError(f"marginal variance must be positive, got {v!r}")
    c = np.array([math.cos(phi), math.sin(phi)])
    m_dot = float(c @ deriv.d_dot)
    v_dot = float(c @ deriv.sigma_dot @ c)
    value = m_dot**2 / v + v_dot**2 / (2.0 * v**2)
    return FisherResult(value, Path.GAUSSIAN, regime, phi, {"h": deriv.h})


def qfi_engine(p: SystemParams, regime: Regime | str, h: float | None = None) -> FisherResult:
    regime = Regime.parse(regime)
    return qfi_gaussian(regime_state(p, regime), state_derivative(p, regime, h), regime=regime)


def cfi_engine(p: SystemParams, regime: Regime | str, phi: float, h: float | None = None) -> FisherResult:
    regime = Regime.parse(regime)
    return cfi_homodyne(regime_state(p, regime), state_derivative(p, regime, h), phi, regime=regime)


# ---------------------------------------------------------------------------
# printed closed forms


def _lossless_u(p: SystemParams) -> float:
    u = 1.0 - 4.0 * p.g**2 * p.t_hop / (math.pi * p.omega0)
    if u <= 0:
        raise UnstableRegime(f"1 - 4 g^2 t_h/(pi omega0) = {u!r} is not positive")
    return u


def lossless_qfi_printed(p: SystemParams) -> float:
    u = _lossless_u(p)
    return 2.0 * (p.g**2 / (2.0 * math.pi * p.omega0 * u)) ** 2


def lossless_cfi_printed(p: SystemParams, phi: float) -> float:
    u = _lossless_u(p)
    g2, w = p.g**2, p.omega0
    c2, s2 = math.cos(phi) ** 2, math.sin(phi) ** 2
    num = math.pi**2 * w**2 * (u * 2 * g2 * c2 / (math.pi * w) - g2 * s2 / (math.pi * w)) ** 2
    den = 4 * g2**2 * (u * c2 + s2) ** 2
    if den == 0:
        raise UnstableRegime("printed lossless CFI: denominator vanishes")
    return num / den


def _cavity_prelude(p: SystemParams) -> tuple[float, float, float, float, float]:
    validate_params(p, Regime.CAVITY_LOSS)
    k, w = p.kappa_ph, p.omega0
    return p.g, w, k, k**2 + w**2, x_factor(p)


def cavity_qfi_printed(p: SystemParams) -> float:
    g, w, k, A, X = _cavity_prelude(p)
    th = p.t_hop
    num = (
        g**4
        * w**2
        * (
            6 * A**3
            + g**2 * w**2 * X * (-12 * A**2 + 6 * g**2 * A * (k**2 + 2 * w**2) * X - 6 * g**4 * w**2 * A * X**2 + g**6 * w**4 * X**3)
        )
        * X**2
    )
    den = (
        2
        * (A - g**2 * w**2 * X) ** 2
        * (5 * A + g**2 * w**2 * X * (g**2 * X - 5))
        * (3 * A + g**2 * w**2 * X * (g**2 * X - 3))
        * th**2
    )
    if den == 0:
        raise UnstableRegime("printed cavity QFI: denominator vanishes")
    return num / den


def cavity_cfi_printed(p: SystemParams, phi: float) -> float:
    g, w, k, A, X = _cavity_prelude(p)
    th = p.t_hop
    s = math.sin(phi)
    c2p, s2p = math.cos(2 * phi), math.sin(2 * phi)
    num = g**4 * w**2 * (A * (w * c2p + k * s2p) + g**2 * w * s**2 * (2 * A - g**2 * w**2 * X)) ** 2 * X**2
    den = (A - g**2 * w**2 * X) ** 2 * (2 * A + g**2 * w * X * (w * (c2p - 2) + k * s2p + g**2 * w * s**2 * X)) ** 2 * th**2
    if den == 0:
        raise UnstableRegime("printed cavity CFI: denominator vanishes")
    return num / den


def _chain_prelude(p: SystemParams) -> tuple[float, float, float, float]:
    validate_params(p, Regime.CHAIN_LOSS)
    w, k = p.omega0, p.kappa_ph
    return drive_strength(p), w, k, k**2 + w**2


def chain_qfi_printed(p: SystemParams) -> float:
    lam, w, k, A = _chain_prelude(p)
    th = p.t_hop
    l2 = lam**2
    first = (A**6 + 4 * w**4 * A**2 * l2) / (A**2 + 4 * w**2 * l2)
    second = 256 * w**4 * l2 / (16 * (1 + 4 * w**2 * l2 / A**2) ** 2 - 1)
    return 2 * l2 / (A**4 * th**2) * (first + second)


def chain_cfi_printed(p: SystemParams, phi: float) -> float:
    lam, w, k, A = _chain_prelude(p)
    th = p.t_hop
    s, c = math.sin(phi), math.cos(phi)
    l2 = lam**2
    inner = A**2 + 4 * w**2 * s**2 * l2
    num = 2 * (16 * w**4 * s**4 * l2 + (w * c**2 + k * s**2) ** 2 * inner) * l2
    return num / (inner**2 * th**2)


_QFI_CLOSED = {Regime.LOSSLESS: lossless_qfi_printed, Regime.CAVITY_LOSS: cavity_qfi_printed, Regime.CHAIN_LOSS: chain_qfi_printed}
_CFI_CLOSED = {Regime.LOSSLESS: lossless_cfi_printed, Regime.CAVITY_LOSS: cavity_cfi_printed, Regime.CHAIN_LOSS: chain_cfi_printed}


def qfi_closed(p: SystemParams, regime: Regime | str) -> FisherResult:
    regime = Regime.parse(regime)
    fn = _QFI_CLOSED[regime]
    return FisherResult(fn(p), Path.CLOSED_FORM, regime, None, {"formula": fn.__name__})


def cfi_closed(p: SystemParams, regime: Regime | str, phi: float) -> FisherResult:
    regime = Regime.parse(regime)
    fn = _CFI_CLOSED[regime]
    return FisherResult(fn(p, phi), Path.CLOSED_FORM, regime, phi, {"formula": fn.__name__})


# ---------------------------------------------------------------------------
# oracle path


def qfi_oracle(p: SystemParams, regime: Regime | str, n_max: int | None = None) -> FisherResult:
    regime = Regime.parse(regime)
    return FisherResult(fock.qfi_sld(p, regime, n_max), Path.ORACLE, regime, None, {"n_max": n_max})


def cfi_oracle(p: SystemParams, regime: Regime | str, phi: float, n_max: int | None = None) -> FisherResult:
    regime = Regime.parse(regime)
    return FisherResult(fock.cfi_numeric(p, regime, phi, n_max), Path.ORACLE, regime, phi, {"n_max": n_max})


# ---------------------------------------------------------------------------
# ratios and bounds


@dataclass(frozen=True)
class RatioResult:
    value: float
    qfi: FisherResult | None
    cfi: FisherResult | None
    path: Path
    flag: str = ""


def ratio(
    p: SystemParams,
    regime: Regime | str,
    phi: float,
    path: Path | str = Path.GAUSSIAN,
) -> RatioResult:
    """CFI(phi)/QFI with both numbers taken from the same path."""
    regime = Regime.parse(regime)
    path = Path(path)
    if path is Path.GAUSSIAN:
        state = regime_state(p, regime)
        deriv = state_derivative(p, regime)
        q = qfi_gaussian(state, deriv, regime=regime)
        c = cfi_homodyne(state, deriv, phi, regime=regime)
    elif path is Path.CLOSED_FORM:
        q = qfi_closed(p, regime)
        c = cfi_closed(p, regime, phi)
    else:
        q = qfi_oracle(p, regime)
        c = cfi_oracle(p, regime, phi)
    if not q.value > 0:
        return RatioResult(math.nan, q, c, path, "ZEROQFI")
    return RatioResult(c.value / q.value, q, c, path)


def cr_bound(info: FisherResult | float, nu: int = 1) -> float:
    """Quantum Cramer-Rao bound 1/(nu I) on the variance of an unbiased t_h estimate."""
    value = info.value if isinstance(info, FisherResult) else float(info)
    if int(nu) != nu or nu < 1:
        raise RangeError(f"nu must be a positive integer, got {nu!r}")
    if value == 0:
        raise ZeroDivisionError("Fisher information is zero")
    if value < 0:
        raise RangeError(f"Fisher information must be positive, got {value!r}")
    return 1.0 / (nu * value)
