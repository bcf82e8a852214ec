"""Brute-force reference computations in a truncated photon-number basis.

Everything here is deliberately independent of the Gaussian machinery: states
are built as explicit density matrices, steady states come from a linear solve
of the vectorized Lindblad generator, and Fisher informations are computed from
the symmetric logarithmic derivative or from numerically sampled homodyne
distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from scipy.integrate import trapezoid

from .electron import Form, fs_expectations, steady_expectations
from .errors import (
    GridError,
    RangeError,
    SingularLiouvillian,
    StepError,
    TruncationError,
)
from .model import Regime, SystemParams, critical_coupling, validate_params, x_factor

DEFAULT_NMAX = 60
NEAR_CRITICAL_NMAX = 80
MAX_AUTO_NMAX = 600
TAIL_FRACTION = 0.9
TAIL_TOL = 1e-8
SLD_EPS = 1e-12
PDF_REL_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# operators


def annihilation(n_max: int) -> np.ndarray:
    dim = n_max + 1
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def number_op(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1, dtype=float))


def position_squared_sum(n_max: int) -> np.ndarray:
    """(a + a^dag)^2 built from its exact matrix elements.

    Squaring the truncated a + a^dag would corrupt the last diagonal entry.
    """
    n = np.arange(n_max + 1, dtype=float)
    out = np.diag(2.0 * n + 1.0)
    off = np.sqrt(n[:-2] + 1.0) * np.sqrt(n[:-2] + 2.0)
    out += np.diag(off, 2) + np.diag(off, -2)
    return out


def quadrature_ops(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    a = annihilation(n_max)
    ad = a.T
    return (a + ad) / math.sqrt(2.0), 1j * (ad - a) / math.sqrt(2.0)


def build_quadrature_functions(n_max: int, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """cos(lam (a + a^dag)) and sin(lam (a + a^dag)) via the spectrum of a + a^dag."""
    if n_max < 4:
        raise RangeError(f"n_max must be >= 4, got {n_max}")
    a = annihilation(n_max)
    try:
        w, v = np.linalg.eigh(a + a.T)
    except np.linalg.LinAlgError as exc:
        raise TruncationError(f"eigendecomposition of a + a^dag failed: {exc}") from exc
    cos_m = (v * np.cos(lam * w)) @ v.T
    sin_m = (v * np.sin(lam * w)) @ v.T
    return 0.5 * (cos_m + cos_m.T), 0.5 * (sin_m + sin_m.T)


# ---------------------------------------------------------------------------
# closed-system spectra


def full_hamiltonian_spectrum(
    p: SystemParams,
    s: float,
    n_max: int = NEAR_CRITICAL_NMAX,
    *,
    form: Form | str = Form.DISCRETE,
    check_truncation: bool = False,
    tol: float = 1e-8,
) -> np.ndarray:
    """Ascending spectrum of the cos/sin cavity Hamiltonian for a Fermi sea at ``s``.

    The discrete electron sums are the default because their sign of T is the one
    for which the Hamiltonian is bounded below with the minimum at s = 0.
    """
    ev = _full_spectrum(p, s, n_max, form)
    if check_truncation:
        ev_big = _full_spectrum(p, s, n_max + 20, form)
        if abs(ev_big[0] - ev[0]) >= tol:
            raise TruncationError(
                f"ground energy moved by {abs(ev_big[0] - ev[0]):.3e} from n_max={n_max} to {n_max + 20}"
            )
    return ev


def _full_spectrum(p: SystemParams, s: float, n_max: int, form) -> np.ndarray:
    el = fs_expectations(p, s, form)
    cos_m, sin_m = build_quadrature_functions(n_max, p.g / math.sqrt(p.n_sites))
    h = el.t_bar * cos_m + el.j_bar * sin_m + p.omega0 * (number_op(n_max) + 0.5 * np.eye(n_max + 1))
    return np.linalg.eigvalsh(h)


@dataclass(frozen=True)
class TruncatedSpectrum:
    eigenvalues: np.ndarray
    effective_frequency: float | None

    @property
    def has_ground_state(self) -> bool:
        return self.effective_frequency is not None


def truncated_hamiltonian(p: SystemParams, t_bar: float, j_bar: float, n_max: int) -> np.ndarray:
    """Second-order expansion of the cavity Hamiltonian with T, J replaced by numbers."""
    a = annihilation(n_max)
    q = a + a.T
    eye = np.eye(n_max + 1)
    L = p.n_sites
    return (
        t_bar * eye
        + (p.g / math.sqrt(L)) * j_bar * q
        - 0.5 * (p.g**2 / L) * t_bar * position_squared_sum(n_max)
        + p.omega0 * (number_op(n_max) + 0.5 * eye)
    )


def effective_frequency(p: SystemParams, t_bar: float) -> float | None:
    """omega0 sqrt(1 - 2 g^2 T / (L omega0)), or None when the radicand is not positive."""
    rad = 1.0 - 2.0 * p.g**2 * t_bar / (p.n_sites * p.omega0)
    return p.omega0 * math.sqrt(rad) if rad > 0 else None


def truncated_hamiltonian_spectrum(
    p: SystemParams,
    s: float,
    n_max: int = NEAR_CRITICAL_NMAX,
    *,
    form: Form | str = Form.CONTINUUM,
) -> TruncatedSpectrum:
    el = fs_expectations(p, s, form)
    ev = np.linalg.eigvalsh(truncated_hamiltonian(p, el.t_bar, el.j_bar, n_max))
    return TruncatedSpectrum(ev, effective_frequency(p, el.t_bar))


def truncated_ground_energy(
    p: SystemParams, s: float, form: Form | str = Form.CONTINUUM
) -> tuple[float, float] | None:
    """Exact ground energy and effective frequency of the quadratic Hamiltonian.

    Away from s = 0 the linear term displaces the ground state by many photons,
    so a fixed Fock cutoff would understate the energy; the quadratic form is
    minimized directly instead. Returns None when there is no ground state.
    """
    el = fs_expectations(p, s, form)
    v = effective_frequency(p, el.t_bar)
    if v is None:
        return None
    beta = math.sqrt(2.0) * p.g * el.j_bar / math.sqrt(p.n_sites)
    return el.t_bar + 0.5 * v - beta**2 * p.omega0 / (2.0 * v**2), v


# ---------------------------------------------------------------------------
# density matrices


@dataclass(frozen=True)
class FockDensity:
    rho: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_max(self) -> int:
        return self.dim - 1

    def validate(self, *, tol: float = 1e-10, tail_tol: float = TAIL_TOL) -> "FockDensity":
        r = self.rho
        tr = np.trace(r).real
        if abs(tr - 1.0) > tol:
            raise TruncationError(f"trace {tr!r} differs from 1")
        if np.max(np.abs(r - r.conj().T)) > tol:
            raise TruncationError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(r).min() < -tol:
            raise TruncationError("density matrix has a negative eigenvalue")
        tail = self.tail_population()
        if tail >= tail_tol:
            raise TruncationError(f"tail population {tail:.2e} above {tail_tol:.0e}; raise n_max")
        return self

    def tail_population(self) -> float:
        start = int(math.floor(TAIL_FRACTION * self.n_max)) + 1
        return float(np.sum(np.diag(self.rho).real[start:]))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ op))

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Displacement (<x>, <p>) and symmetrized covariance matrix."""
        x, p = quadrature_ops(self.n_max)
        d = np.array([self.expect(x).real, self.expect(p).real])
        # x^2 and p^2 from exact squares; truncated products spoil the last level.
        a = annihilation(self.n_max)
        a2 = a @ a
        nn = number_op(self.n_max)
        eye = np.eye(self.dim)
        xx = 0.5 * (a2 + a2.T + 2.0 * nn + eye)
        pp = 0.5 * (-(a2 + a2.T) + 2.0 * nn + eye)
        xp_sym = 0.5j * (a2.T - a2)  # (xp + px)/2
        cov = np.empty((2, 2))
        cov[0, 0] = self.expect(xx).real - d[0] ** 2
        cov[1, 1] = self.expect(pp).real - d[1] ** 2
        cov[0, 1] = cov[1, 0] = self.expect(xp_sym).real - d[0] * d[1]
        return d, cov


def squeezed_vacuum_state(p: SystemParams, n_max: int | None = None) -> FockDensity:
    """Ground state of the truncated cavity Hamiltonian at s = 0 as a squeezed vacuum.

    exp{r/2 (a^2 - a^dag^2)}|0> with r = 1/2 ln(V/omega0) < 0 anti-squeezes x, giving
    Var(x) = omega0 / (2 V), which is what the quadratic Hamiltonian demands.
    """
    if p.g >= critical_coupling(p):
        raise RangeError(f"g={p.g!r} is not below g_c={critical_coupling(p)!r}")
    if n_max is None:
        n_max = auto_nmax_lossless(p)
    psi = squeezed_vacuum_vector(p, n_max)
    return FockDensity(np.outer(psi, psi).astype(complex))


def squeezed_vacuum_vector(p: SystemParams, n_max: int) -> np.ndarray:
    t_bar = fs_expectations(p, 0.0, Form.CONTINUUM).t_bar
    v = effective_frequency(p, t_bar)
    if v is None:
        raise RangeError("no photon ground state")
    r = 0.5 * math.log(v / p.omega0)
    th = math.tanh(r)
    psi = np.zeros(n_max + 1)
    # c_{2m} = (-tanh r)^m sqrt((2m)!)/(2^m m!) / sqrt(cosh r), by recurrence in m.
    c = 1.0 / math.sqrt(math.cosh(r))
    for m in range(0, n_max // 2 + 1):
        psi[2 * m] = c
        c *= -th * math.sqrt((2 * m + 1) * (2 * m + 2)) / (2.0 * (m + 1))
    return psi


def ground_state_residual(p: SystemParams, n_max: int) -> float:
    """||(H - E)psi|| of the squeezed vacuum under the truncated Hamiltonian at s = 0.

    Small residual confirms the squeeze direction; the eigensolver is not used.
    """
    t_bar = fs_expectations(p, 0.0, Form.CONTINUUM).t_bar
    h = truncated_hamiltonian(p, t_bar, 0.0, n_max)
    psi = squeezed_vacuum_vector(p, n_max)
    energy = psi @ h @ psi
    return float(np.linalg.norm(h @ psi - energy * psi))


def auto_nmax_lossless(p: SystemParams, amp_tol: float = 1e-9) -> int:
    """Smallest even cutoff whose neglected squeezed-vacuum amplitudes are below ``amp_tol``."""
    u = 1.0 - x_factor(p) * p.g**2
    if u <= 0:
        raise RangeError("no photon ground state")
    th = abs(math.tanh(0.25 * math.log(u)))
    if th < 1e-12:
        return DEFAULT_NMAX
    # |c_{2m}| ~ th^m / (pi m)^{1/4}; take a generous bound and keep the tail well
    # under the 10% health window.
    m = math.log(amp_tol) / math.log(th)
    n = int(math.ceil(2 * m / TAIL_FRACTION)) + 10
    n = max(DEFAULT_NMAX, n + (n % 2))
    if n > MAX_AUTO_NMAX:
        raise TruncationError(f"squeezing too strong: cutoff {n} exceeds {MAX_AUTO_NMAX}")
    return n


# ---------------------------------------------------------------------------
# open-system steady states


def _liouvillian(h: np.ndarray, kappa: float, n_max: int) -> sps.csr_matrix:
    """Row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho)."""
    dim = n_max + 1
    eye = sps.identity(dim, format="csr", dtype=complex)
    hs = sps.csr_matrix(h.astype(complex))
    a = sps.csr_matrix(annihilation(n_max).astype(complex))
    ad = a.T.tocsr()
    ada = (ad @ a).tocsr()
    gen = -1j * (sps.kron(hs, eye) - sps.kron(eye, hs.T))
    gen = gen + kappa * (2.0 * sps.kron(a, a.conj()) - sps.kron(ada, eye) - sps.kron(eye, ada.T))
    return gen.tocsr()


def cavity_hamiltonian(p: SystemParams, n_max: int) -> np.ndarray:
    X = x_factor(p)
    return p.omega0 * number_op(n_max) - p.omega0 * X * p.g**2 / 4.0 * position_squared_sum(n_max)


def chain_hamiltonian(p: SystemParams, n_max: int, form: Form | str = Form.DISCRETE) -> np.ndarray:
    el = steady_expectations(p, form)
    return truncated_hamiltonian(p, el.t_bar, el.j_bar, n_max)


def default_nmax(p: SystemParams, regime: Regime | str) -> int:
    regime = Regime.parse(regime)
    if regime is Regime.LOSSLESS:
        return auto_nmax_lossless(p)
    if regime is Regime.CAVITY_LOSS and p.g >= 0.95 * critical_coupling(p):
        return NEAR_CRITICAL_NMAX
    return DEFAULT_NMAX


def lindblad_steady_state(
    p: SystemParams,
    regime: Regime | str,
    n_max: int | None = None,
    *,
    validate: bool = True,
) -> FockDensity:
    """Steady state of the reduced photon master equation, trace fixed by a replaced row."""
    regime = Regime.parse(regime)
    if regime is Regime.LOSSLESS:
        raise RangeError("the lossless regime has no dissipative steady state")
    validate_params(p, regime)
    if not p.kappa_ph > 0:
        raise RangeError(f"kappa_ph > 0 required for a steady state, got {p.kappa_ph!r}")
    if n_max is None:
        n_max = default_nmax(p, regime)
    dim = n_max + 1
    h = cavity_hamiltonian(p, n_max) if regime is Regime.CAVITY_LOSS else chain_hamiltonian(p, n_max)
    gen = _liouvillian(h, p.kappa_ph, n_max).tolil()
    # Replace the equation for rho_00 by Tr(rho) = 1.
    gen[0, :] = 0.0
    diag_idx = np.arange(dim) * (dim + 1)
    for i in diag_idx:
        gen[0, i] = 1.0
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    mat = gen.tocsc()
    try:
        lu = spla.splu(mat)
    except RuntimeError as exc:
        raise SingularLiouvillian(f"constrained generator is singular: {exc}") from exc
    sol = lu.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise SingularLiouvillian("steady-state solve produced non-finite entries")
    resid = np.linalg.norm(mat @ sol - rhs)
    if resid > 1e-8:
        raise SingularLiouvillian(f"steady-state residual {resid:.2e} too large")
    rho = sol.reshape(dim, dim)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    state = FockDensity(rho)
    return state.validate() if validate else state


# ---------------------------------------------------------------------------
# Fisher information


def regime_density(p: SystemParams, regime: Regime | str, n_max: int | None = None) -> FockDensity:
    regime = Regime.parse(regime)
    if regime is Regime.LOSSLESS:
        validate_params(p, regime)
        return squeezed_vacuum_state(p, n_max)
    return lindblad_steady_state(p, regime, n_max)


def default_step(t_hop: float) -> float:
    return 1e-5 * max(1.0, abs(t_hop))


def _central(fn, p: SystemParams, h: float):
    plus = fn(p.replace(t_hop=p.t_hop + h))
    minus = fn(p.replace(t_hop=p.t_hop - h))
    return plus, minus


def _richardson(v_h: float, v_h2: float, rtol: float, what: str, atol: float = 1e-14) -> float:
    if abs(v_h - v_h2) > rtol * max(abs(v_h), abs(v_h2)) + atol:
        raise StepError(f"{what}: estimates at h and h/2 differ ({v_h!r} vs {v_h2!r})")
    return v_h2


def sld_qfi(rho: np.ndarray, drho: np.ndarray, eps: float = SLD_EPS) -> float:
    lam, vec = np.linalg.eigh(rho)
    dm = vec.conj().T @ drho @ vec
    denom = lam[:, None] + lam[None, :]
    mask = denom > eps
    return float(np.sum(2.0 * np.abs(dm[mask]) ** 2 / denom[mask]))


def qfi_sld(
    p: SystemParams,
    regime: Regime | str,
    n_max: int | None = None,
    h: float | None = None,
    *,
    rtol: float = 1e-3,
) -> float:
    """QFI with respect to t_h from the SLD of finite-difference density matrices."""
    regime = Regime.parse(regime)
    if h is None:
        h = default_step(p.t_hop)
    if n_max is None:
        n_max = default_nmax(p.replace(t_hop=p.t_hop + h), regime)
    base = regime_density(p, regime, n_max).rho

    def estimate(step):
        plus, minus = _central(lambda q: regime_density(q, regime, n_max).rho, p, step)
        return sld_qfi(base, (plus - minus) / (2.0 * step))

    return _richardson(estimate(h), estimate(h / 2), rtol, "qfi_sld")


# ---------------------------------------------------------------------------
# homodyne statistics


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """Harmonic-oscillator eigenfunctions psi_n(x), shape (n_max+1, len(x))."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1, x.size))
    out[0] = math.pi**-0.25 * np.exp(-0.5 * x**2)
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def homodyne_pdf(state: FockDensity, phi: float, x_grid: np.ndarray, *, check_mass: bool = True) -> np.ndarray:
    """Distribution of cos(phi) x + sin(phi) p on ``x_grid``."""
    rho = state.rho
    n = np.arange(state.dim)
    phase = np.exp(-1j * phi * (n[:, None] - n[None, :]))
    psi = hermite_functions(state.n_max, x_grid)
    dens = np.einsum("mi,mn,ni->i", psi, rho * phase, psi, optimize=True).real
    dens = np.clip(dens, 0.0, None)
    if check_mass:
        mass = trapezoid(dens, x_grid)
        if mass < 1.0 - 1e-4:
            raise GridError(f"grid captures only {mass:.6f} of the probability")
    return dens


def default_x_grid(state: FockDensity, points: int = 4001, width: float = 12.0) -> np.ndarray:
    d, cov = state.moments()
    spread = math.sqrt(max(cov[0, 0], cov[1, 1]))
    centre = 0.0
    reach = abs(float(np.hypot(d[0], d[1]))) + width * spread
    return np.linspace(centre - reach, centre + reach, points)


def fisher_from_pdf(dens: np.ndarray, ddens: np.ndarray, x_grid: np.ndarray) -> float:
    # Far tails carry negligible information but amplify cutoff noise in the density.
    keep = dens > PDF_REL_FLOOR * dens.max()
    integrand = np.where(keep, ddens**2 / np.where(keep, dens, 1.0), 0.0)
    return float(trapezoid(integrand, x_grid))


def cfi_numeric(
    p: SystemParams,
    regime: Regime | str,
    phi: float,
    n_max: int | None = None,
    h: float | None = None,
    x_grid: np.ndarray | None = None,
    *,
    rtol: float = 1e-3,
) -> float:
    """Homodyne Fisher information from numerically differentiated quadrature densities."""
    regime = Regime.parse(regime)
    if h is None:
        h = default_step(p.t_hop)
    if n_max is None:
        n_max = default_nmax(p.replace(t_hop=p.t_hop + h), regime)
    base_state = regime_density(p, regime, n_max)
    if x_grid is None:
        x_grid = default_x_grid(base_state)
    base = homodyne_pdf(base_state, phi, x_grid)

    def pdf(q):
        return homodyne_pdf(regime_density(q, regime, n_max), phi, x_grid)

    def estimate(step):
        plus, minus = _central(pdf, p, step)
        return fisher_from_pdf(base, (plus - minus) / (2.0 * step), x_grid)

    return _richardson(estimate(h), estimate(h / 2), rtol, "cfi_numeric")
