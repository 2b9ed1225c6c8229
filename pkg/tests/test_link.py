import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inductive_link.errors import DomainError, SafetyError, SingularityError, UsageError
from inductive_link.link import (
    CoilPair,
    LinkDesign,
    LoadSpec,
    SourceSpec,
    Topology,
    TuningSpec,
    branch_a,
    branch_b,
    efficiency_series,
    efficiency_sp,
    gain_series,
    gain_sp,
    mutual_inductance,
    solve_link,
    validate_safety,
    zload_parallel,
)
from inductive_link.presets import table1_design
from inductive_link.tuning import series_resonance_cap

from .strategies import designs

W = 2 * math.pi * 13.56e6

# Frozen from a standalone numpy evaluation of the mesh closed forms at the
# reference parameters with resonant capacitors and Rs = 0.
SERIES_GAIN = 3.621752285838005
SERIES_EFF = 0.8986584222849167
SP_GAIN = 3.506995363864964
SP_EFF = 0.9049696620186056


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# -- types -------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(l1=0, l2=1e-6, r_l1=1, r_l2=1, k=0.4),
    dict(l1=1e-6, l2=-1e-6, r_l1=1, r_l2=1, k=0.4),
    dict(l1=1e-6, l2=1e-6, r_l1=-1, r_l2=1, k=0.4),
    dict(l1=1e-6, l2=1e-6, r_l1=1, r_l2=1, k=1.2),
    dict(l1=1e-6, l2=1e-6, r_l1=1, r_l2=1, k=-0.1),
    dict(l1=1e-6, l2=1e-6, r_l1=1, r_l2=1, k=1.0),
])
def test_coilpair_invariants(kwargs):
    with pytest.raises(DomainError):
        CoilPair(**kwargs)


def test_unity_coupling_needs_override():
    assert CoilPair(1e-6, 1e-6, 1, 1, 1.0, allow_unity_coupling=True).k == 1.0


def test_spec_invariants():
    with pytest.raises(DomainError):
        SourceSpec(vs=0)
    with pytest.raises(DomainError):
        SourceSpec(vs=1, rs=-1)
    with pytest.raises(DomainError):
        LoadSpec(0.0)
    with pytest.raises(DomainError):
        TuningSpec(c1s=0)
    with pytest.raises(DomainError):
        TuningSpec(c1s=1e-9, c2p=-1e-12)


def test_topology_requires_matching_capacitors():
    coils = CoilPair(5.48e-6, 1e-6, 2.12, 1.63, 0.4)
    with pytest.raises(DomainError):
        LinkDesign("sp", coils, SourceSpec(), LoadSpec(320), TuningSpec(2.5e-11), 13.56e6)
    with pytest.raises(DomainError):
        LinkDesign("series", coils, SourceSpec(), LoadSpec(320), TuningSpec(2.5e-11, 1e-11), 13.56e6)
    with pytest.raises(DomainError):
        LinkDesign("parallel", coils, SourceSpec(), LoadSpec(320), TuningSpec(2.5e-11), 13.56e6)


def test_design_is_immutable(sp_design):
    with pytest.raises(Exception):
        sp_design.freq_hz = 1.0


# -- mutual inductance ---------------------------------------------------------

def test_mutual_inductance():
    assert mutual_inductance(0.4, 5.48e-6, 1.0e-6) == pytest.approx(9.3638e-7, rel=1e-4)
    assert mutual_inductance(0.0, 3e-6, 7e-6) == 0.0
    assert mutual_inductance(1.0, 4e-6, 1e-6) == pytest.approx(2.0e-6, rel=1e-15)
    with pytest.raises(DomainError):
        mutual_inductance(1.01, 1e-6, 1e-6)


# -- branch impedances -----------------------------------------------------------

def test_branch_a_resonant(series_design):
    a = branch_a(series_design)
    assert a.real == pytest.approx(2.12, abs=1e-12)
    assert abs(a.imag) < 1e-6 * W * 5.48e-6
    a10 = branch_a(series_design.with_params(rs=10.0))
    assert a10.real == pytest.approx(12.12, abs=1e-12)


def test_branch_a_with_quoted_capacitor(series_design):
    # 2.5141e-11 F was derived with omega rounded to 8.5197e7; at the exact
    # omega it leaves ~0.04 ohm of reactance out of 466.9
    a = branch_a(series_design.with_params(c1s=2.5141e-11))
    assert abs(a.imag) < 1e-4 * W * 5.48e-6


def test_branch_a_doubled_capacitor(series_design):
    c1s = series_resonance_cap(13.56e6, 5.48e-6)
    a = branch_a(series_design.with_params(c1s=2 * c1s))
    assert a.real == pytest.approx(2.12)
    assert a.imag == pytest.approx(233.44, abs=0.02)


def test_branch_b(series_design, sp_design):
    b = branch_b(series_design)
    assert b.real == pytest.approx(321.63, abs=1e-9)
    assert b.imag == pytest.approx(85.20, abs=0.005)
    with pytest.raises(UsageError):
        branch_b(sp_design)


# -- series topology -----------------------------------------------------------

def test_gain_series_reference(series_design):
    # hand evaluation: |j wM 320 / (A B + w^2 M^2)|
    wm = W * 0.4 * math.sqrt(5.48e-12)
    a = 2.12 + 0j
    b = complex(321.63, W * 1e-6)
    hand = abs(1j * wm * 320 / (a * b + wm * wm))
    g = gain_series(series_design)
    assert abs(g) == pytest.approx(hand, rel=1e-9)
    assert abs(g) == pytest.approx(SERIES_GAIN, rel=1e-9)
    assert abs(g) == pytest.approx(3.622, abs=5e-4)


def test_gain_series_rs10(series_design):
    assert abs(gain_series(series_design.with_params(rs=10.0))) == pytest.approx(2.48, abs=0.01)


def test_efficiency_series_reference(series_design):
    hand = 6364.6 * 320 / (321.63 * (2.12 * 321.63 + 6364.6))
    eta = efficiency_series(series_design)
    assert eta == pytest.approx(hand, rel=1e-4)
    assert eta == pytest.approx(SERIES_EFF, rel=1e-9)
    assert efficiency_series(series_design.with_params(rs=4.34)) == pytest.approx(0.75, abs=1e-3)


def test_zero_coupling_series(series_design):
    d = series_design.with_params(k=0.0)
    assert gain_series(d) == 0
    assert efficiency_series(d) == 0
    r = solve_link(d)
    assert r.i2 == 0 and r.v_load == 0
    assert r.i1 == pytest.approx(d.source.vs / branch_a(d), rel=1e-15)


def test_series_ops_reject_sp(sp_design):
    for fn in (gain_series, efficiency_series):
        with pytest.raises(UsageError):
            fn(sp_design)


# -- parallel-tuned secondary ----------------------------------------------------

def test_zload_parallel():
    z = zload_parallel(320, 1.0578e-11, 8.5197e7)
    u = 8.5197e7 * 1.0578e-11 * 320
    assert u == pytest.approx(0.2884, abs=1e-4)
    assert z == pytest.approx(320 * (1 - 1j * u) / (1 + u * u), rel=1e-14)
    assert z.real == pytest.approx(295.43, abs=0.01)
    assert zload_parallel(320, 0.0, 1e8) == 320 + 0j
    big = zload_parallel(320, 1.0, 1e8)
    assert 0 < big.real < 1e-12 and -1e-7 < big.imag < 0


@given(st.floats(1e-3, 1e5), st.floats(0, 1e-6), st.floats(1.0, 1e10))
def test_zload_passive(r, c, w):
    z = zload_parallel(r, c, w)
    assert 0 < z.real <= r
    assert z.imag <= 0


def test_gain_sp_reference(sp_design):
    g = gain_sp(sp_design)
    assert abs(g) == pytest.approx(SP_GAIN, rel=1e-9)
    assert abs(g) == pytest.approx(3.507, abs=5e-4)


def test_efficiency_sp_reference(sp_design):
    hand = 6364.6 * 295.43 / (297.06 * (2.12 * 297.06 + 6364.6))
    assert efficiency_sp(sp_design) == pytest.approx(hand, rel=1e-4)
    assert efficiency_sp(sp_design) == pytest.approx(SP_EFF, rel=1e-9)


def test_sp_zero_coupling(sp_design):
    d = sp_design.with_params(k=0.0)
    assert gain_sp(d) == 0
    assert efficiency_sp(d) == 0


def test_sp_ops_reject_series(series_design):
    for fn in (gain_sp, efficiency_sp):
        with pytest.raises(UsageError):
            fn(series_design)


# -- solve_link ------------------------------------------------------------------

def test_solve_link_reference(sp_design):
    r = solve_link(sp_design)
    assert r.gain_mag == pytest.approx(SP_GAIN, rel=1e-12)
    assert r.efficiency == pytest.approx(SP_EFF, rel=1e-12)
    zl = zload_parallel(320, sp_design.tuning.c2p, sp_design.omega)
    assert abs(r.i2) == pytest.approx(abs(r.v_load) / abs(zl), rel=1e-12)
    assert r.v_load == pytest.approx(r.i2 * zl, rel=1e-14)
    assert r.m == pytest.approx(mutual_inductance(0.4, 5.48e-6, 1e-6))
    # resonant secondary: real-part form equals the exact power ratio
    assert r.power_ratio == pytest.approx(r.efficiency, rel=1e-12)


def test_solve_link_linear_in_vs(sp_design):
    r1 = solve_link(sp_design)
    r5 = solve_link(sp_design.with_params(vs=5.0))
    assert r5.gain == pytest.approx(r1.gain, rel=1e-14)
    assert r5.efficiency == r1.efficiency
    for a, b in ((r5.i1, r1.i1), (r5.i2, r1.i2), (r5.v_load, r1.v_load)):
        assert a == pytest.approx(5 * b, rel=1e-14)


def test_series_power_ratio_differs_from_real_part_form(series_design):
    # the untuned secondary keeps jwL2 in |B|; exact ratio is Rload w^2M^2 / (|B|^2 Re[A] + w^2M^2 Re[B])
    r = solve_link(series_design)
    wm2 = (W * 0.4 * math.sqrt(5.48e-12)) ** 2
    b = complex(321.63, W * 1e-6)
    exact = wm2 * 320 / (abs(b) ** 2 * 2.12 + wm2 * b.real)
    assert r.power_ratio == pytest.approx(exact, rel=1e-12)
    assert r.efficiency - r.power_ratio == pytest.approx(0.00606, abs=1e-4)


def test_singular_mesh_reports_parameters():
    # lossless primary at resonance with no coupling: A = 0 and det = 0
    d = table1_design("series", k=0.0, r_l1=0.0)
    with pytest.raises(SingularityError) as exc:
        solve_link(d)
    assert "k" in exc.value.params


# -- safety ---------------------------------------------------------------------

@pytest.mark.parametrize("k, passed", [(0.4, True), (0.45, True), (0.8, False)])
def test_validate_safety(k, passed):
    rep = validate_safety(table1_design("sp", k=k))
    assert rep.passed is passed
    assert rep.k == k and rep.threshold == 0.45
    assert "0.45" in rep.message
    if not passed:
        with pytest.raises(SafetyError):
            rep.require()
        assert validate_safety(table1_design("sp", k=k), allow_unsafe=True).require().overridden


# -- properties -------------------------------------------------------------------

@settings(max_examples=200)
@given(designs(topology="sp", c2p_zero=True))
def test_reduction_to_series(d):
    s = d.with_params(topology="series", c2p=None)
    assert rel(gain_sp(d), gain_series(s)) <= 1e-12 or gain_series(s) == 0
    assert abs(efficiency_sp(d) - efficiency_series(s)) <= 1e-12 * efficiency_series(s)


@settings(max_examples=300)
@given(designs())
def test_efficiency_bounded(d):
    r = solve_link(d)
    if d.coils.k == 0:
        assert r.efficiency == 0
    else:
        assert 0 < r.efficiency < 1
        assert 0 < r.power_ratio < 1


@given(designs(k=0.0))
def test_null_coupling(d):
    r = solve_link(d)
    assert r.gain == 0 and r.efficiency == 0


@settings(max_examples=100)
@given(designs(topology="series"))
def test_series_efficiency_increasing_in_k(d):
    ks = np.linspace(0.01, 0.99, 60)
    etas = [efficiency_series(d.with_params(k=float(k))) for k in ks]
    assert all(b > a for a, b in zip(etas, etas[1:]))


@settings(max_examples=300)
@given(designs())
def test_solve_link_matches_closed_forms(d):
    r = solve_link(d)
    g = gain_series(d) if d.topology is Topology.SERIES else gain_sp(d)
    eta = efficiency_series(d) if d.topology is Topology.SERIES else efficiency_sp(d)
    assert abs(r.gain - g) <= 1e-12 * abs(g) + 1e-300
    assert r.gain_mag == abs(r.gain)
    assert r.efficiency == eta


@given(designs(), st.floats(0.1, 100))
def test_gain_invariant_to_vs(d, vs):
    a = solve_link(d)
    b = solve_link(d.with_params(vs=vs))
    assert abs(a.gain - b.gain) <= 1e-12 * abs(a.gain) + 1e-300
    scale = vs / d.source.vs
    assert abs(b.i1 - scale * a.i1) <= 1e-12 * abs(scale * a.i1)
