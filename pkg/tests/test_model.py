from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from critchain.errors import RangeError, UnstableRegime
from critchain.model import (
    Regime,
    SystemParams,
    critical_coupling,
    current_profile,
    derived_constants,
    drive_strength,
    stability_boundary,
    validate_params,
    x_factor,
)


def test_lossless_valid_point():
    p = SystemParams(g=0.5)
    v = validate_params(p, Regime.LOSSLESS)
    assert math.isclose(x_factor(p) * p.g**2, 1.0 / math.pi, rel_tol=1e-15)
    assert v.derived.g_crit == pytest.approx(0.886226925452758)


def test_lossless_at_critical_coupling_rejected():
    p = SystemParams()
    with pytest.raises(UnstableRegime):
        validate_params(p.replace(g=critical_coupling(p)), Regime.LOSSLESS)


def test_cavity_stability_condition():
    # 4 * 0.81 / pi - 1 = 0.0313 > 0.05^2, so no steady state
    with pytest.raises(UnstableRegime):
        validate_params(SystemParams(g=0.9, kappa_ph=0.05), Regime.CAVITY_LOSS)
    validate_params(SystemParams(g=0.9, kappa_ph=0.2), Regime.CAVITY_LOSS)


def test_chain_needs_eta():
    with pytest.raises(RangeError):
        validate_params(SystemParams(eta=None), Regime.CHAIN_LOSS)


@pytest.mark.parametrize("bad", [dict(omega0=0.0), dict(t_hop=-1.0), dict(n_sites=3), dict(kappa_ph=-0.1)])
def test_generic_range_errors(bad):
    with pytest.raises(RangeError):
        validate_params(SystemParams(**bad), Regime.CAVITY_LOSS)


def test_non_finite_rejected():
    with pytest.raises(RangeError):
        validate_params(SystemParams(g=math.nan), Regime.LOSSLESS)


def test_critical_coupling_examples():
    assert critical_coupling(SystemParams()) == pytest.approx(0.8862269254527580, rel=1e-15)
    assert critical_coupling(SystemParams(t_hop=math.pi / 4)) == 1.0
    assert critical_coupling(SystemParams(omega0=4.0)) == pytest.approx(2 * critical_coupling(SystemParams()))


@given(st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_critical_coupling_invariant(w, th):
    p = SystemParams(omega0=w, t_hop=th)
    assert x_factor(p) * critical_coupling(p) ** 2 == pytest.approx(1.0, rel=1e-14)


def test_drive_strength_examples():
    p = SystemParams(g=0.88, eta=2.41)
    assert drive_strength(p) == pytest.approx(-8.540949024045352, rel=1e-12)
    # Lambda decays like eta^(-1/2); at L=400 and eta=1e8 it is still 3.5e-3.
    assert abs(drive_strength(SystemParams(g=0.5, n_sites=2, eta=1e8))) < 1e-3
    ratio = drive_strength(p.replace(eta=4e8)) / drive_strength(p.replace(eta=1e8))
    assert ratio == pytest.approx(0.5, rel=1e-3)
    q = SystemParams(g=0.3, n_sites=100, t_hop=1.7, eta=1.0)
    expect = math.sqrt(200) * 0.3 * 1.7 * (2 - 4 / math.sqrt(3))
    assert drive_strength(q) == pytest.approx(expect, rel=1e-14)


def test_current_profile_peak_value():
    assert abs(current_profile(1 + math.sqrt(2))) == pytest.approx(0.3431457505, rel=1e-9)


def test_eta_from_rates():
    p = SystemParams(kappa_el=2.0, gamma_pump=0.5)
    assert p.eta == 4.0
    with pytest.raises(RangeError):
        SystemParams(kappa_el=2.0, gamma_pump=0.5, eta=3.0)
    assert p.replace(kappa_el=1.0).eta == 2.0


def test_derived_constants_and_boundary():
    p = SystemParams(kappa_ph=0.3)
    d = derived_constants(p)
    assert d.A == pytest.approx(1.09)
    assert stability_boundary(p) > critical_coupling(p)
    y = x_factor(p) * stability_boundary(p) ** 2
    assert y - 1 == pytest.approx(p.kappa_ph**2, rel=1e-12)


def test_regime_parse_aliases():
    assert Regime.parse("cavity") is Regime.CAVITY_LOSS
    assert Regime.parse(Regime.CHAIN_LOSS) is Regime.CHAIN_LOSS
    with pytest.raises(RangeError):
        Regime.parse("nonsense")
