"""Grid evaluation with a process pool and deterministic CSV output."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, fisher, fock
from .config import PARAM_KEYS, SweepConfig
from .electron import Form, steady_expectations
from .errors import (
    CritchainError,
    GridError,
    RangeError,
    SingularLiouvillian,
    StepError,
    TruncationError,
    UnstableRegime,
)
from .gaussian import regime_state
from .model import Regime, validate_params

JOBS_ENV = "CRITCHAIN_JOBS"

COLUMNS = {
    "fisher": ("qfi", "cfi", "ratio", "qfi_closed", "cfi_closed", "ratio_closed"),
    "qfi": ("qfi", "log10_qfi", "qfi_closed"),
    "spectrum": ("E0_full", "E0_trunc", "effective_frequency"),
    "current": ("j_bar", "abs_j_bar", "j_bar_discrete", "t_bar_discrete"),
}
ORACLE_COLUMNS = {
    "fisher": ("qfi_oracle", "cfi_oracle", "ratio_oracle"),
    "qfi": ("qfi_oracle",),
    "spectrum": (),
    "current": (),
}
PATH_TAGS = {
    "qfi": "gaussian",
    "cfi": "gaussian",
    "ratio": "gaussian",
    "log10_qfi": "gaussian",
    "qfi_closed": "closed_form",
    "cfi_closed": "closed_form",
    "ratio_closed": "closed_form",
    "qfi_oracle": "oracle",
    "cfi_oracle": "oracle",
    "ratio_oracle": "oracle",
    "E0_full": "oracle",
    "E0_trunc": "closed_form",
    "effective_frequency": "closed_form",
    "j_bar": "closed_form",
    "abs_j_bar": "closed_form",
    "j_bar_discrete": "discrete_sum",
    "t_bar_discrete": "discrete_sum",
}

FLAG_UNSTABLE = "UNSTABLE"
FLAG_NOGROUND = "NOGROUND"
FLAG_TRUNC = "TRUNC"
FLAG_STEP = "STEP"
FLAG_INVALID = "INVALID"

SPECTRUM_TRUNC_TOL = 1e-8


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None or not raw.strip():
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise RangeError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise RangeError(f"{JOBS_ENV} must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class Task:
    quantity: str
    regime: Regime
    params: dict
    nmax: int | None
    oracle: bool


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    axis_names: tuple
    columns: tuple
    rows: list  # (coords tuple, values tuple, flag)
    convention: fisher.Convention

    def column(self, name: str) -> np.ndarray:
        if name in self.axis_names:
            i = self.axis_names.index(name)
            return np.array([r[0][i] for r in self.rows], dtype=float)
        i = self.columns.index(name)
        return np.array([r[1][i] for r in self.rows], dtype=float)

    def flags(self) -> list[str]:
        return [r[2] for r in self.rows]


def _flag_for(exc: Exception) -> str:
    if isinstance(exc, UnstableRegime):
        return FLAG_UNSTABLE
    if isinstance(exc, (TruncationError, GridError, SingularLiouvillian)):
        return FLAG_TRUNC
    if isinstance(exc, StepError):
        return FLAG_STEP
    return FLAG_INVALID


def _nan(n: int) -> list:
    return [math.nan] * n


def _fisher_point(task: Task, coords: dict) -> tuple[list, str]:
    cfg_params = dict(task.params)
    phi = coords.get("phi", 0.0)
    p = SweepConfig(params=cfg_params).system_params()
    regime = task.regime
    flags = []
    try:
        validate_params(p, regime)
        state = regime_state(p, regime)
        deriv = fisher.state_derivative(p, regime)
        q = fisher.qfi_gaussian(state, deriv, regime=regime).value
        if task.quantity == "qfi":
            gauss = [q, math.log10(q) if q > 0 else -math.inf]
        else:
            c = fisher.cfi_homodyne(state, deriv, phi, regime=regime).value
            gauss = [q, c, c / q if q > 0 else math.nan]
    except CritchainError as exc:
        width = 2 if task.quantity == "qfi" else 3
        gauss = _nan(width)
        flags.append(_flag_for(exc))

    try:
        qc = fisher.qfi_closed(p, regime).value
        if task.quantity == "qfi":
            closed = [qc]
        else:
            cc = fisher.cfi_closed(p, regime, phi).value
            closed = [qc, cc, cc / qc if qc > 0 else math.nan]
    except (CritchainError, ZeroDivisionError, OverflowError):
        closed = _nan(1 if task.quantity == "qfi" else 3)

    oracle = []
    if task.oracle:
        try:
            qo = fock.qfi_sld(p, regime, task.nmax)
            if task.quantity == "qfi":
                oracle = [qo]
            else:
                co = fock.cfi_numeric(p, regime, phi, task.nmax)
                oracle = [qo, co, co / qo if qo > 0 else math.nan]
        except CritchainError as exc:
            oracle = _nan(1 if task.quantity == "qfi" else 3)
            f = _flag_for(exc)
            if f not in flags:
                flags.append(f)
    return gauss + closed + oracle, "|".join(flags)


def _spectrum_point(task: Task, coords: dict) -> tuple[list, str]:
    p = SweepConfig(params=dict(task.params)).system_params()
    s = coords["s"]
    n_max = task.nmax or fock.NEAR_CRITICAL_NMAX
    flags = []
    try:
        ev = fock.full_hamiltonian_spectrum(p, s, n_max)
        ev_big = fock.full_hamiltonian_spectrum(p, s, n_max + 20)
        e_full = float(ev[0])
        if abs(ev_big[0] - ev[0]) >= SPECTRUM_TRUNC_TOL:
            flags.append(FLAG_TRUNC)
    except CritchainError as exc:
        e_full = math.nan
        flags.append(_flag_for(exc))
    tr = fock.truncated_ground_energy(p, s)
    if tr is None:
        e_trunc = v = math.nan
        flags.append(FLAG_NOGROUND)
    else:
        e_trunc, v = tr
    return [e_full, e_trunc, v], "|".join(flags)


def _current_point(task: Task, coords: dict) -> tuple[list, str]:
    p = SweepConfig(params=dict(task.params)).system_params()
    try:
        cont = steady_expectations(p, Form.CONTINUUM)
        disc = steady_expectations(p, Form.DISCRETE)
    except CritchainError as exc:
        return _nan(4), _flag_for(exc)
    return [cont.j_bar, abs(cont.j_bar), disc.j_bar, disc.t_bar], ""


_EVALUATORS = {
    "fisher": _fisher_point,
    "qfi": _fisher_point,
    "spectrum": _spectrum_point,
    "current": _current_point,
}


def evaluate(job: tuple) -> tuple[list, str]:
    """Top-level (picklable) worker entry point: ``job = (task, coords)``."""
    task, coords = job
    return _EVALUATORS[task.quantity](task, coords)


def _worker_init(convention: fisher.Convention) -> None:
    fisher.set_convention(convention)


def build_jobs(cfg: SweepConfig) -> tuple[tuple, list]:
    axes = cfg.grid_axes
    names = tuple(a.name for a in axes)
    jobs = []
    for combo in itertools.product(*(a.values for a in axes)):
        coords = dict(zip(names, combo))
        params = dict(cfg.params)
        for name, value in coords.items():
            if name in PARAM_KEYS:
                params[name] = value
        task = Task(cfg.quantity, cfg.regime, params, cfg.nmax, cfg.oracle)
        jobs.append((task, coords))
    return names, jobs


def run_sweep(cfg: SweepConfig, *, convention: fisher.Convention | None = None) -> SweepResult:
    """Evaluate every grid point; row order is the lexicographic grid order for any ``jobs``."""
    if convention is None:
        convention = fisher.arbitrate_convention()
    names, jobs = build_jobs(cfg)
    columns = COLUMNS[cfg.quantity] + (ORACLE_COLUMNS[cfg.quantity] if cfg.oracle else ())
    if cfg.jobs == 1 or len(jobs) < 2:
        with fisher.use_convention(convention):
            results = [evaluate(j) for j in jobs]
    else:
        chunk = max(1, len(jobs) // (cfg.jobs * 8))
        with ProcessPoolExecutor(max_workers=cfg.jobs, initializer=_worker_init, initargs=(convention,)) as pool:
            results = list(pool.map(evaluate, jobs, chunksize=chunk))
    rows = [(tuple(coords[n] for n in names), tuple(vals), flag) for (_, coords), (vals, flag) in zip(jobs, results)]
    return SweepResult(cfg, names, columns, rows, convention)


def format_value(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def render_csv(result: SweepResult) -> str:
    cfg = result.config
    lines = [
        "[provenance]",
        f"tool = critchain {__version__}",
        f"convention = {result.convention.describe()}",
        "paths = " + ",".join(f"{c}:{PATH_TAGS[c]}" for c in result.columns),
    ]
    lines += cfg.header_lines()
    out = [f"# {ln}" for ln in lines]
    out.append(",".join(result.axis_names + result.columns + ("flag",)))
    for coords, vals, flag in result.rows:
        out.append(",".join([format_value(c) for c in coords] + [format_value(v) for v in vals] + [flag]))
    return "\n".join(out) + "\n"


def write_csv(result: SweepResult, path: str) -> str:
    text = render_csv(result)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path
