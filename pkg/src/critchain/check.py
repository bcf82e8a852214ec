"""Engine-versus-oracle consistency report.

Fatal items compare the production Gaussian path with the Fock-space oracle and
decide the exit status. Informational items document where the reference
closed forms disagree with either path; they never fail the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fisher, fock
from .electron import Form, fs_expectations, steady_expectations
from .errors import CritchainError
from .gaussian import (
    GaussianState,
    chain_moment_residuals,
    drift_for,
    evolve,
    ground_state_lossless,
    steady_state_cavity,
    steady_state_chain,
)
from .model import Regime, SystemParams, critical_coupling, drive_strength, stability_boundary

FISHER_RTOL = 1e-4
MOMENT_ATOL = 1e-6
PURE_ATOL = 1e-8
INFO_RTOL = 1e-4

LOSSLESS_POINTS = (SystemParams(g=0.3, kappa_ph=0.0), SystemParams(g=0.6, kappa_ph=0.0))
CAVITY_POINTS = (SystemParams(g=0.5, kappa_ph=0.1), SystemParams(g=0.8, kappa_ph=0.3))
CHAIN_POINTS = (
    SystemParams(g=0.5, n_sites=64, kappa_ph=0.1, eta=2.41),
    SystemParams(g=0.3, n_sites=64, kappa_ph=0.4, eta=1.0),
)


@dataclass
class Item:
    name: str
    regime: str
    value: float
    reference: float
    error: float
    tolerance: float
    fatal: bool
    passed: bool
    note: str = ""

    @property
    def status(self) -> str:
        if self.fatal:
            return "ok" if self.passed else "FAIL"
        if not math.isfinite(self.reference):
            return "info"
        return "agrees" if self.passed else "differs"


@dataclass
class Report:
    items: list

    @property
    def failed(self) -> list:
        return [i for i in self.items if i.fatal and not i.passed]

    @property
    def exit_code(self) -> int:
        return 2 if self.failed else 0


def _rel(value: float, ref: float) -> float:
    return abs(value - ref) / max(abs(ref), 1e-300)


def _compare_rel(items, name, regime, value, ref, tol=FISHER_RTOL, note=""):
    err = _rel(value, ref)
    items.append(Item(name, regime, value, ref, err, tol, True, err <= tol, note))


def _compare_abs(items, name, regime, value, ref, tol=MOMENT_ATOL, note=""):
    err = float(np.max(np.abs(np.asarray(value) - np.asarray(ref))))
    v = float(np.max(np.abs(value)))
    r = float(np.max(np.abs(ref)))
    items.append(Item(name, regime, v, r, err, tol, True, err <= tol, note))


def _info(items, name, regime, value, ref=math.nan, note=""):
    if not math.isfinite(ref):
        err = math.nan
    else:
        err = abs(value - ref) if ref == 0 else _rel(value, ref)
    items.append(Item(name, regime, value, ref, err, INFO_RTOL, False, err <= INFO_RTOL, note))


def _guard(items, name, regime, fn):
    try:
        fn()
    except CritchainError as exc:
        items.append(Item(name, regime, math.nan, math.nan, math.inf, 0.0, True, False, f"{type(exc).__name__}: {exc}"))


def _tag(p: SystemParams) -> str:
    return f"g={p.g:g},kappa={p.kappa_ph:g},L={p.n_sites},eta={p.eta:g}" if p.eta else f"g={p.g:g},kappa={p.kappa_ph:g}"


def run_check(n_max: int | None = None) -> Report:
    items: list[Item] = []
    nm = n_max or fock.DEFAULT_NMAX

    def arbitration():
        conv = fisher.arbitrate_convention(force=True)
        log = fisher.arbitration_log()
        items.append(
            Item("convention_arbitration", "all", log["cavity_oracle"], log["chain_oracle"], 0.0, 0.0, True, True, conv.describe())
        )
        for norm, v in log["cavity_candidates"].items():
            _info(items, f"covariance_variant[{norm}]", "cavity", v, log["cavity_oracle"], "covariance normalization candidate")
        for w, v in log["chain_candidates"].items():
            _info(items, f"displacement_weight[{w:g}]", "chain", v, log["chain_oracle"], "displacement weight candidate")

    _guard(items, "convention_arbitration", "all", arbitration)
    if items and not items[0].passed:
        return Report(items)

    # --- lossless --------------------------------------------------------
    for p in LOSSLESS_POINTS:
        tag = _tag(p)

        def lossless(p=p, tag=tag):
            rho = fock.squeezed_vacuum_state(p)
            _, cov = rho.moments()
            _compare_abs(items, f"ground_covariance[{tag}]", "lossless", cov, ground_state_lossless(p).sigma, PURE_ATOL)
            _compare_rel(items, f"qfi[{tag}]", "lossless", fisher.qfi_engine(p, Regime.LOSSLESS).value, fock.qfi_sld(p, Regime.LOSSLESS))
            for phi in (0.0, 0.25 * math.pi):
                _compare_rel(
                    items,
                    f"cfi[{tag},phi={phi:.4f}]",
                    "lossless",
                    fisher.cfi_engine(p, Regime.LOSSLESS, phi).value,
                    fock.cfi_numeric(p, Regime.LOSSLESS, phi),
                )
            oracle = fock.qfi_sld(p, Regime.LOSSLESS)
            _info(items, f"lossless_qfi_printed_over_oracle[{tag}]", "lossless", fisher.lossless_qfi_printed(p) / oracle, 1.0, "printed QFI prefactor")
            _info(items, f"lossless_cfi_printed_phi0[{tag}]", "lossless", fisher.lossless_cfi_printed(p, 0.0), fisher.cfi_engine(p, Regime.LOSSLESS, 0.0).value,
                  "printed CFI at phi=0 is identically 1")

        _guard(items, f"lossless[{tag}]", "lossless", lossless)

    # --- cavity loss -----------------------------------------------------
    for p in CAVITY_POINTS:
        tag = _tag(p)

        def cavity(p=p, tag=tag):
            rho = fock.lindblad_steady_state(p, Regime.CAVITY_LOSS, nm)
            _, cov = rho.moments()
            _compare_abs(items, f"steady_covariance_closed[{tag}]", "cavity", steady_state_cavity(p).sigma, cov)
            traj = evolve(GaussianState.vacuum(), drift_for(p, Regime.CAVITY_LOSS), 50.0 / p.kappa_ph, record_every=10**9)
            _compare_abs(items, f"steady_covariance_evolved[{tag}]", "cavity", traj.final.sigma, cov)
            _compare_rel(items, f"qfi[{tag}]", "cavity", fisher.qfi_engine(p, Regime.CAVITY_LOSS).value, fock.qfi_sld(p, Regime.CAVITY_LOSS, nm))
            _compare_rel(
                items, f"cfi[{tag},phi=0]", "cavity",
                fisher.cfi_engine(p, Regime.CAVITY_LOSS, 0.0).value, fock.cfi_numeric(p, Regime.CAVITY_LOSS, 0.0, nm),
            )

        _guard(items, f"cavity[{tag}]", "cavity", cavity)

    # --- chain loss ------------------------------------------------------
    for p in CHAIN_POINTS:
        tag = _tag(p)

        def chain(p=p, tag=tag):
            rho = fock.lindblad_steady_state(p, Regime.CHAIN_LOSS, nm)
            d, cov = rho.moments()
            closed = steady_state_chain(p)
            _compare_abs(items, f"steady_displacement_closed[{tag}]", "chain", closed.d, d, MOMENT_ATOL * max(1.0, np.abs(d).max()))
            traj = evolve(GaussianState.vacuum(), drift_for(p, Regime.CHAIN_LOSS), 50.0 / p.kappa_ph, record_every=10**9)
            _compare_abs(items, f"steady_displacement_evolved[{tag}]", "chain", traj.final.d, d, MOMENT_ATOL * max(1.0, np.abs(d).max()))
            _compare_abs(items, f"steady_covariance_evolved[{tag}]", "chain", traj.final.sigma, cov)
            _info(items, f"printed_p_variance[{tag}]", "chain", closed.sigma[1, 1], cov[1, 1],
                  "closed-form Var(p) vs oracle; the printed value is not a fixed point of the moment equations")
            res = chain_moment_residuals(p, closed)
            _info(items, f"printed_state_moment_residual[{tag}]", "chain", float(np.max(np.abs(res))), 0.0,
                  "max residual of the five steady-state moment conditions")
            fast = evolve(GaussianState.vacuum(), drift_for(p, Regime.CHAIN_LOSS), 50.0 / p.kappa_ph,
                          record_every=10**9, displacement_decay=2.0)
            _info(items, f"displacement_decay_2kappa[{tag}]", "chain", float(fast.final.d[1]), float(d[1]),
                  "<p> if displacements decayed at 2 kappa")

        _guard(items, f"chain[{tag}]", "chain", chain)

    # --- closed forms vs engine (informational) ----------------------------
    def closed_forms():
        for regime, pts in (
            (Regime.CAVITY_LOSS, [SystemParams(g=g, kappa_ph=k) for g in (0.2, 0.5, 0.8) for k in (0.05, 0.3)]),
            (Regime.CHAIN_LOSS, [SystemParams(g=0.88, n_sites=L, kappa_ph=0.1, eta=2.41) for L in (100, 400, 1600, 6400)]),
        ):
            q_ratio = np.array([fisher.qfi_closed(p, regime).value / fisher.qfi_engine(p, regime).value for p in pts])
            c_ratio = np.array(
                [fisher.cfi_closed(p, regime, phi).value / fisher.cfi_engine(p, regime, phi).value for p in pts for phi in (0.0, 0.7)]
            )
            for label, r in (("qfi", q_ratio), ("cfi", c_ratio)):
                _info(items, f"closed_over_engine_{label}_mean", regime.value, float(r.mean()), note="global factor")
                _info(items, f"closed_over_engine_{label}_relstd", regime.value, float(r.std() / abs(r.mean())), 0.0,
                      "constancy of the closed-form to engine ratio")

    _guard(items, "closed_forms", "all", closed_forms)

    # --- thresholds and electron-sector conventions ------------------------
    base = SystemParams()
    for k in (0.1, 0.3):
        q = base.replace(kappa_ph=k)
        _info(items, f"stability_boundary[kappa={k:g}]", "cavity", stability_boundary(q), critical_coupling(q),
              "g where the cavity-loss steady state ceases to exist vs g_c")
    cont = fs_expectations(base, 0.0, Form.CONTINUUM).t_bar
    disc = fs_expectations(base, 0.0, Form.DISCRETE).t_bar
    _info(items, "fermi_sea_kinetic_energy_sign", "electron", disc, cont, "grid sum vs closed form at s=0")
    q = base.replace(eta=2.41)
    jb = steady_expectations(q, Form.CONTINUUM).j_bar
    lam = drive_strength(q)
    _info(items, "steady_current_L_scaling", "electron", jb, jb / math.sqrt(q.n_sites),
          "J(inf) from the momentum sum (proportional to L) vs the sqrt(L) form")
    _info(items, "steady_current_vs_drive", "electron", jb, lam * math.sqrt(q.n_sites) / (q.g * math.sqrt(2.0)),
          "J(inf) against Lambda sqrt(L)/(g sqrt 2)")
    return Report(items)


def format_report(report: Report) -> str:
    lines = []
    width = max(len(i.name) for i in report.items) if report.items else 10
    lines.append(f"{'check':<{width}}  {'status':<11} {'value':>14} {'reference':>14} {'error':>10}  note")
    for i in report.items:
        lines.append(
            f"{i.name:<{width}}  {i.status:<11} {i.value:>14.6g} {i.reference:>14.6g} {i.error:>10.3g}  {i.note}"
        )
    n_fatal = sum(1 for i in report.items if i.fatal)
    lines.append("")
    lines.append(f"{n_fatal - len(report.failed)}/{n_fatal} oracle checks passed")
    lines.append("result: " + ("OK" if report.exit_code == 0 else "ORACLE MISMATCH"))
    return "\n".join(lines) + "\n"


def report_csv(report: Report) -> str:
    from .sweep import format_value

    out = ["check,regime,value,reference,error,tolerance,fatal,status,note"]
    for i in report.items:
        note = i.note.replace(",", ";")
        out.append(
            ",".join(
                [i.name.replace(",", ";"), i.regime, format_value(i.value), format_value(i.reference),
                 format_value(i.error), format_value(i.tolerance), str(i.fatal).lower(), i.status, note]
            )
        )
    return "\n".join(out) + "\n"
