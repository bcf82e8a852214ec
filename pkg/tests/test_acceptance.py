"""Acceptance criteria 1-11; each test prints one PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the plain list, or under
pytest where the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile

import numpy as np
import pytest

from critchain import fisher, fock
from critchain.config import Axis, SweepConfig
from critchain.electron import Form, steady_expectations
from critchain.errors import PurityPole
from critchain.figures import fig3, fig5, fig8
from critchain.gaussian import GaussianState, drift_for, evolve, regime_state, steady_state_cavity
from critchain.model import Regime, SystemParams, critical_coupling, stability_boundary
from critchain.sweep import run_sweep

try:
    from conftest import record
except ImportError:  # run as a script
    sys.path.insert(0, os.path.dirname(__file__))
    from conftest import record

GC = critical_coupling(SystemParams())
BASE = SweepConfig()


# ---------------------------------------------------------------------------
# 1. lossless saturation


def criterion_1():
    gs = np.linspace(0.05, 0.99 * GC, 100)
    worst = 0.0
    quarter = []
    for g in gs:
        p = SystemParams(g=g)
        state = regime_state(p, Regime.LOSSLESS)
        deriv = fisher.state_derivative(p, Regime.LOSSLESS)
        q = fisher.qfi_gaussian(state, deriv, regime=Regime.LOSSLESS).value
        for phi in (0.0, math.pi / 2):
            worst = max(worst, abs(fisher.cfi_homodyne(state, deriv, phi).value / q - 1.0))
        quarter.append(fisher.cfi_homodyne(state, deriv, math.pi / 4).value / q)
    quarter = np.array(quarter)
    last = (GC - gs) <= 0.1 * GC
    below = bool(np.all(quarter < 1.0))
    monotone = bool(np.all(np.diff(quarter[last]) > 0))
    ok = worst <= 1e-6 and below and monotone
    return ok, (
        f"max|ratio-1| at phi=0,pi/2 = {worst:.2e} (tol 1e-6); phi=pi/4 ratio < 1: {below}, "
        f"increasing over last decade: {monotone} ({quarter[last][0]:.4f} -> {quarter[-1]:.4f})"
    )


# ---------------------------------------------------------------------------
# 2. critical divergence slope


def _slope(gs, values):
    u = 1.0 - (np.asarray(gs) / GC) ** 2
    return float(np.polyfit(np.log(u), np.log(values), 1)[0])


def criterion_2():
    gs = np.linspace(0.8 * GC, 0.999 * GC, 40)
    printed = [fisher.lossless_qfi_printed(SystemParams(g=g)) for g in gs]
    s_printed = _slope(gs, printed)
    g_or = gs[::4]
    oracle = [fock.qfi_sld(SystemParams(g=g), Regime.LOSSLESS) for g in g_or]
    s_oracle = _slope(g_or, oracle)
    ok = abs(s_printed + 2) <= 0.01 and abs(s_oracle + 2) <= 0.01
    return ok, f"slope printed = {s_printed:.4f}, oracle = {s_oracle:.4f} (target -2 +/- 0.01)"


# ---------------------------------------------------------------------------
# 3. cavity oracle equivalence

GRID_G = np.linspace(0.1, 0.85, 5)
GRID_K = np.linspace(0.05, 0.5, 5)


def criterion_3():
    worst_lind = worst_evo = 0.0
    for g in GRID_G:
        for k in GRID_K:
            p = SystemParams(g=g, kappa_ph=k)
            closed = steady_state_cavity(p).sigma
            _, cov = fock.lindblad_steady_state(p, Regime.CAVITY_LOSS, 60, validate=False).moments()
            worst_lind = max(worst_lind, float(np.max(np.abs(cov - closed))))
            traj = evolve(GaussianState.vacuum(), drift_for(p, Regime.CAVITY_LOSS), 50 / k, record_every=10**9)
            worst_evo = max(worst_evo, float(np.max(np.abs(traj.final.sigma - closed))))
    ok = worst_lind <= 1e-6 and worst_evo <= 1e-8
    return ok, f"max |sigma_Lindblad(N=60) - closed| = {worst_lind:.2e} (tol 1e-6); max |sigma_evolve - closed| = {worst_evo:.2e} (tol 1e-8)"


# ---------------------------------------------------------------------------
# 4. arbitration and data processing inequality


def criterion_4():
    fisher.arbitrate_convention()
    log = fisher.arbitration_log()
    oracle = log["cavity_oracle"]
    canon = [n for n, v in log["cavity_candidates"].items() if abs(v - oracle) <= 1e-4 * abs(oracle)]
    grid_unique = True
    for g in GRID_G:
        for k in GRID_K:
            p = SystemParams(g=g, kappa_ph=k)
            ref = fock.qfi_sld(p, Regime.CAVITY_LOSS, 60)
            state = regime_state(p, Regime.CAVITY_LOSS)
            deriv = fisher.state_derivative(p, Regime.CAVITY_LOSS)
            hits = []
            for norm in fisher.NORMALIZATIONS:
                try:
                    v = fisher.covariance_term(state.sigma, deriv.sigma_dot, norm)
                except PurityPole:
                    continue
                if abs(v - ref) <= 1e-4 * abs(ref):
                    hits.append(norm)
            grid_unique &= hits == canon
    rng = np.random.default_rng(20240607)
    violations = 0
    for _ in range(500):
        regime = (Regime.LOSSLESS, Regime.CAVITY_LOSS, Regime.CHAIN_LOSS)[int(rng.integers(3))]
        phi = float(rng.uniform(0, math.pi))
        k = float(rng.uniform(0.02, 1.0))
        if regime is Regime.LOSSLESS:
            p = SystemParams(g=float(rng.uniform(0, 0.98 * GC)))
        elif regime is Regime.CAVITY_LOSS:
            p = SystemParams(g=float(rng.uniform(0, 0.98 * stability_boundary(SystemParams(kappa_ph=k)))), kappa_ph=k)
        else:
            p = SystemParams(
                g=float(rng.uniform(0.05, 1.5)),
                kappa_ph=k,
                eta=float(np.exp(rng.uniform(np.log(0.3), np.log(30)))),
                n_sites=int(2 * rng.integers(10, 5000)),
            )
        state = regime_state(p, regime)
        deriv = fisher.state_derivative(p, regime)
        q = fisher.qfi_gaussian(state, deriv, regime=regime).value
        c = fisher.cfi_homodyne(state, deriv, phi).value
        violations += c > q + 1e-9
    ok = len(canon) == 1 and grid_unique and violations == 0
    return ok, f"canonical matches {canon}; same unique match on 5x5 grid: {grid_unique}; CFI > QFI in {violations}/500 samples"


# ---------------------------------------------------------------------------
# 5. cavity-loss ratio thresholds


def criterion_5():
    def r(k):
        return fisher.ratio(SystemParams(g=0.88, kappa_ph=k), Regime.CAVITY_LOSS, 0.0).value

    low = min(r(k) for k in np.linspace(0.005, 0.3, 60))
    r04, r07 = r(0.4), r(0.7)
    ok = low >= 0.95 and r04 >= 0.9 and 0.60 <= r07 <= 0.72
    return ok, f"min ratio on kappa<=0.3 = {low:.4f} (>=0.95), ratio(0.4) = {r04:.4f} (>=0.9), ratio(0.7) = {r07:.4f} (in [0.60, 0.72])"


# ---------------------------------------------------------------------------
# 6. chain-dissipation optimum


def criterion_6():
    etas = np.array(Axis.range("eta", 0.3, 30.0, 201, "log").values)
    base = SystemParams(g=0.88, n_sites=400)
    j = np.array([abs(steady_expectations(base.replace(eta=e), Form.CONTINUUM).j_bar) for e in etas])
    i_j = int(np.argmax(j))
    same = {}
    for k in (0.1, 0.3, 0.5):
        q = [fisher.qfi_engine(base.replace(eta=e, kappa_ph=k), Regime.CHAIN_LOSS).value for e in etas]
        same[k] = int(np.argmax(q)) == i_j
    t_worst = 0.0
    for e in etas:
        for form in (Form.CONTINUUM, Form.DISCRETE):
            t_worst = max(t_worst, abs(steady_expectations(base.replace(eta=e), form).t_bar))
    t_tol = 1e-10 * base.t_hop * base.n_sites
    ok = 2.39 <= etas[i_j] <= 2.46 and all(same.values()) and t_worst <= t_tol
    return ok, f"argmax |J| at eta = {etas[i_j]:.4f}; QFI argmax on same point per kappa {same}; max |T(inf)| = {t_worst:.1e} (tol {t_tol:.0e})"


# ---------------------------------------------------------------------------
# 7. L scaling


def criterion_7():
    Ls = np.arange(100, 1700, 100)
    q = np.array([fisher.chain_qfi_printed(SystemParams(g=0.88, eta=2.41, kappa_ph=0.1, n_sites=int(L))) for L in Ls])
    coef, res, *_ = np.polyfit(Ls, q, 2, full=True)
    fit = np.polyval(coef, Ls)
    rel_res = float(np.max(np.abs(fit - q) / np.abs(q)))
    big_L = np.unique(np.round(np.logspace(4, 6, 21) / 2).astype(int) * 2)
    ratios = [fisher.ratio(SystemParams(g=0.88, eta=2.41, kappa_ph=0.1, n_sites=int(L)), Regime.CHAIN_LOSS, 0.0).value for L in big_L]
    inc = bool(np.all(np.diff(ratios) > 0))
    ok = rel_res < 1e-8 and coef[0] > 0 and ratios[-1] >= 0.99 and inc
    return ok, (
        f"quadratic fit max relative residual = {rel_res:.2e} (tol 1e-8), leading coef {coef[0]:.3e}; "
        f"ratio(L=1e6) = {ratios[-1]:.6f}; increasing beyond 1e4: {inc}"
    )


# ---------------------------------------------------------------------------
# 8. ground-state location


def criterion_8():
    ss = np.linspace(-math.pi / 2, math.pi / 2, 201)
    i0 = int(np.argmin(np.abs(ss)))
    at_zero = {}
    for g in (0.2, 0.5, 0.88, 1.2):
        p = SystemParams(g=g, n_sites=400)
        e = np.array([fock.full_hamiltonian_spectrum(p, s, 80)[0] for s in ss])
        at_zero[g] = bool(e[i0] - e.min() <= 1e-9 * abs(e[i0]))
    none_12 = [fock.truncated_ground_energy(SystemParams(g=1.2), s) is None for s in ss]
    none_05 = [fock.truncated_ground_energy(SystemParams(g=0.5), s) is None for s in ss]
    ok = all(at_zero.values()) and any(none_12) and not any(none_05)
    return ok, f"minimum at s=0 per g {at_zero}; NoGroundState at g=1.2 for {sum(none_12)} s values, at g=0.5 for {sum(none_05)}"


# ---------------------------------------------------------------------------
# 9. closed-form constancy


def _constancy(res, num, den):
    r = res.column(num) / res.column(den)
    r = r[np.isfinite(r)]
    return float(np.std(r) / abs(np.mean(r))), float(np.mean(r))


def criterion_9():
    rows = []
    tables = [(Regime.LOSSLESS, fig3(BASE)[0]), (Regime.CAVITY_LOSS, fig5(BASE)[0])]
    tables += [(Regime.CHAIN_LOSS, t) for t in fig8(BASE)[1:]]
    worst = 0.0
    for regime, table in tables:
        res = run_sweep(table.config)
        for num, den in (("qfi_closed", "qfi"), ("cfi_closed", "cfi")):
            rel, mean = _constancy(res, num, den)
            worst = max(worst, rel)
            rows.append(f"{table.config.name}:{num} std/mean={rel:.1e} mean={mean:.4g}")
    ok = worst < 1e-6
    return ok, "; ".join(rows)


# ---------------------------------------------------------------------------
# 10. determinism


def _cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "critchain.cli", *args], capture_output=True, text=True, env=env)


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        common = ["sweep", "--regime", "lossless", "--axis", f"g:0.05:{0.99 * GC!r}:100", "--phi", "0,0.25pi,0.5pi", "--out", tmp, "--no-svg"]
        a = _cli(*common, "--jobs", "1", "--name", "j1")
        b = _cli(*common, "--jobs", "8", "--name", "j8")
        if a.returncode or b.returncode:
            return False, f"exit codes {a.returncode}, {b.returncode}"
        x = open(os.path.join(tmp, "j1.csv"), "rb").read()
        y = open(os.path.join(tmp, "j8.csv"), "rb").read()
    return x == y, f"--jobs 1 vs --jobs 8: {len(x)} vs {len(y)} bytes, identical: {x == y}"


# ---------------------------------------------------------------------------
# 11. fault injection


def criterion_11():
    codes = {}
    with tempfile.TemporaryDirectory() as tmp:
        env = {k: v for k, v in os.environ.items() if k != "CRITCHAIN_FAULT"}
        codes["intact"] = _cli("check", "--out", tmp, env=env).returncode
        for fault in ("sigma_lin", "cavity_steady", "lambda"):
            codes[fault] = _cli("check", "--out", tmp, "--inject-fault", fault, env=env).returncode
    ok = codes["intact"] == 0 and all(codes[f] == 2 for f in ("sigma_lin", "cavity_steady", "lambda"))
    return ok, f"exit codes {codes}"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    record(number, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    fisher.arbitrate_convention()
    results = [CRITERIA[i]() for i in sorted(CRITERIA)]
    for i, (ok, detail) in zip(sorted(CRITERIA), results):
        record(i, ok, detail)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
