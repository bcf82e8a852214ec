from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from critchain.electron import (
    Form,
    MomentumGrid,
    fermi_window,
    fs_expectations,
    optimal_eta,
    relax_occupation,
    steady_expectations,
    steady_occupation,
)
from critchain.errors import HalfFillingError, RangeError
from critchain.model import SystemParams


def test_continuum_fermi_sea_examples():
    p = SystemParams()
    e = fs_expectations(p, 0.0, Form.CONTINUUM)
    assert e.t_bar == pytest.approx(800 / math.pi, rel=1e-15)
    assert e.j_bar == 0.0
    e = fs_expectations(p, math.pi / 2, Form.CONTINUUM)
    assert abs(e.t_bar) < 1e-12
    assert e.j_bar == pytest.approx(800 / math.pi, rel=1e-15)


def test_discrete_fermi_sea_golden():
    # Grid sum; carries the opposite sign of the continuum closed form.
    e = fs_expectations(SystemParams(), 0.0, Form.DISCRETE)
    assert e.t_bar == pytest.approx(-254.6426729377443, rel=1e-13)
    assert abs(abs(e.t_bar) - 800 / math.pi) / (800 / math.pi) < 1.0 / 400
    assert abs(e.j_bar) == pytest.approx(2.0, abs=1e-9)


@given(st.floats(-math.pi, math.pi), st.sampled_from([2, 4, 10, 64, 400]))
def test_half_filling(s, L):
    occ = fermi_window(MomentumGrid.for_sites(L), s)
    assert int(occ.sum()) == L // 2


def test_odd_sites_cannot_half_fill():
    with pytest.raises(HalfFillingError):
        fermi_window(MomentumGrid.for_sites(5), 0.0)


def test_s_out_of_range():
    with pytest.raises(RangeError):
        fs_expectations(SystemParams(), 4.0)


def test_steady_occupation_examples():
    p = SystemParams(eta=1.0)
    assert steady_occupation(p, 0.0) == 0.5
    assert steady_occupation(SystemParams(eta=7.3), -math.pi / 2) == 1.0
    assert steady_occupation(p, math.pi / 2) == pytest.approx(1 / 3, rel=1e-15)


def test_steady_expectations_examples():
    p = SystemParams(g=0.88, eta=2.41)
    c = steady_expectations(p, Form.CONTINUUM)
    assert c.t_bar == 0.0
    assert c.j_bar == pytest.approx(-137.25824937888848, rel=1e-12)
    lam = -8.540949024045352
    assert c.j_bar == pytest.approx(lam * math.sqrt(400) / (0.88 * math.sqrt(2)), rel=1e-12)
    d = steady_expectations(p, Form.DISCRETE)
    assert abs(d.j_bar - c.j_bar) <= 1e-3 * abs(c.j_bar)
    assert abs(d.t_bar) <= 1e-10 * 400


def test_optimal_eta():
    eta = optimal_eta()
    assert 2.39 <= eta <= 2.46
    assert eta == pytest.approx(1 + math.sqrt(2), abs=1e-6)
    assert optimal_eta(SystemParams(t_hop=1.0)) == optimal_eta(SystemParams(t_hop=7.0))
    j = steady_expectations(SystemParams(eta=eta), Form.CONTINUUM).j_bar
    assert abs(j) / 400 == pytest.approx(0.3431457505, rel=1e-9)


def test_relax_occupation():
    p = SystemParams(kappa_el=0.7, gamma_pump=0.3)
    assert relax_occupation(p, 0.4, 0.2, 0.0) == 0.2
    assert relax_occupation(p, 0.4, 0.2, 1e3) == pytest.approx(float(steady_occupation(p, 0.4)), abs=1e-12)
    q = SystemParams(kappa_el=0.0, gamma_pump=0.5)
    t = 0.37
    assert relax_occupation(q, 1.0, 0.1, t) == pytest.approx(1 - 0.9 * math.exp(-4 * 0.5 * t), rel=1e-14)
    with pytest.raises(RangeError):
        relax_occupation(p, 0.0, 1.5, 1.0)


def test_occupation_vectorised():
    k = np.linspace(-math.pi, math.pi, 7)
    n = steady_occupation(SystemParams(eta=2.0), k)
    assert n.shape == k.shape and np.all((0 <= n) & (n <= 1))
