import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from inductive_link.errors import DomainError, NoSolutionError, UsageError
from inductive_link.link import branch_a, efficiency, gain, zload_parallel
from inductive_link.presets import table1_design
from inductive_link.tuning import (
    OptimizationProblem,
    evaluate_objective_grid,
    golden_section_max,
    optimize_efficiency,
    parallel_tank_cap,
    series_resonance_cap,
    tune_design,
)

from .strategies import designs


def test_series_resonance_cap():
    # quoted 2.5141e-11 / 1.3777e-10 were rounded with omega = 8.5197e7
    assert series_resonance_cap(13.56e6, 5.48e-6) == pytest.approx(2.5141e-11, rel=2e-4)
    assert series_resonance_cap(13.56e6, 1.0e-6) == pytest.approx(1.3777e-10, rel=2e-4)
    w = 2 * math.pi * 13.56e6
    c = series_resonance_cap(13.56e6, 5.48e-6)
    assert w * 5.48e-6 * w * c == pytest.approx(1.0, rel=1e-15)
    assert series_resonance_cap(1e6, 2e-6) == series_resonance_cap(1e6, 1e-6) / 2


def _bisect_tank(freq, l2, r_load):
    """Smaller-u root of Im[Rload || C] + wL2 = 0 by bisection on u in (0, 1]."""
    w = 2 * math.pi * freq

    def g(u):
        return -u * r_load / (1 + u * u) + w * l2

    lo, hi = 0.0, 1.0  # g(0) > 0, g(1) <= 0 whenever Rload >= 2wL2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) / (w * r_load)


def test_parallel_tank_cap_reference():
    c = parallel_tank_cap(13.56e6, 1.0e-6, 320.0)
    assert c == pytest.approx(1.0578e-11, rel=1e-4)
    assert c == pytest.approx(_bisect_tank(13.56e6, 1.0e-6, 320.0), rel=1e-12)
    w = 2 * math.pi * 13.56e6
    assert w * c * 320 == pytest.approx(0.2884, abs=1e-4)


def test_parallel_tank_larger_root_rejected():
    w = 2 * math.pi * 13.56e6
    x = w * 1e-6
    u_big = (320 + math.sqrt(320 ** 2 - 4 * x * x)) / (2 * x)
    assert u_big == pytest.approx(3.468, abs=1e-3)
    z_big = zload_parallel(320, u_big / (w * 320), w)
    assert z_big.real == pytest.approx(24.6, abs=0.05)
    # both roots cancel the coil reactance; the chosen one keeps the high-resistance branch
    assert z_big.imag == pytest.approx(-x, rel=1e-12)
    c = parallel_tank_cap(13.56e6, 1e-6, 320)
    assert zload_parallel(320, c, w).real > 290
    d_small = table1_design("sp")
    d_big = d_small.with_params(c2p=u_big / (w * 320))
    assert abs(gain(d_big)) < abs(gain(d_small))


def test_parallel_tank_repeated_root():
    w = 2 * math.pi * 13.56e6
    r = 2 * w * 1e-6
    assert parallel_tank_cap(13.56e6, 1e-6, r) == pytest.approx(1 / (w * r), rel=1e-12)


def test_parallel_tank_no_resonance():
    with pytest.raises(DomainError, match="series topology"):
        parallel_tank_cap(13.56e6, 1e-6, 100.0)


@given(st.floats(0.1e6, 50e6), st.floats(0.1e-6, 50e-6), st.floats(2.0, 100.0))
def test_tank_cap_matches_bisection(freq, l2, ratio):
    r = ratio * 2 * math.pi * freq * l2
    assert parallel_tank_cap(freq, l2, r) == pytest.approx(_bisect_tank(freq, l2, r), rel=1e-9)


@settings(max_examples=200)
@given(designs(topology="sp"))
def test_tune_design_residuals(d):
    if d.load.r_load < 2 * d.omega * d.coils.l2:
        with pytest.raises(DomainError):
            tune_design(d)
        return
    tuned, res = tune_design(d)
    w = d.omega
    assert abs(branch_a(tuned).imag) <= 1e-6 * w * d.coils.l1
    assert res.residual_secondary <= 1e-6 * w * d.coils.l2
    assert res.achieved_resonance_residual == max(res.residual_primary, res.residual_secondary)


def test_tune_series_has_no_c2p():
    _, res = tune_design(table1_design("series"))
    assert res.c2p is None and res.residual_secondary is None


# -- golden section -------------------------------------------------------------

def test_golden_section_interior_and_boundary():
    x, fx = golden_section_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-9)
    assert x == pytest.approx(0.3, abs=1e-8)
    x, fx = golden_section_max(lambda t: t, 0.0, 1.0, 1e-9)
    assert x == 1.0


# -- vectorized objective --------------------------------------------------------

@settings(max_examples=100)
@given(designs(), st.sampled_from(["efficiency", "gain_mag"]))
def test_grid_objective_matches_scalar(d, objective):
    vals = evaluate_objective_grid(d, {}, objective)
    scalar = efficiency(d) if objective == "efficiency" else abs(gain(d))
    assert float(vals) == pytest.approx(scalar, rel=1e-12, abs=1e-300)


# -- optimizer -----------------------------------------------------------------------

def test_optimize_k_hits_safety_bound():
    problem = OptimizationProblem(table1_design("sp"), ("k",), {"k": (0.05, 0.45)})
    res = optimize_efficiency(problem)
    assert res.design.coils.k == 0.45
    assert res.value == pytest.approx(efficiency(table1_design("sp", k=0.45)), rel=1e-15)


@pytest.mark.parametrize("objective", ["efficiency", "gain_mag"])
def test_optimize_c2p_against_brute_force(objective):
    c0 = parallel_tank_cap(13.56e6, 1e-6, 320)
    base = table1_design("sp")
    bounds = (0.5 * c0, 2.0 * c0)
    res = optimize_efficiency(OptimizationProblem(base, ("c2p",), {"c2p": bounds}, objective=objective))
    scan = np.linspace(*bounds, 200001)
    vals = evaluate_objective_grid(base, {"c2p": scan}, objective)
    assert res.value >= vals.max() - 1e-12
    assert res.point["c2p"] == pytest.approx(scan[vals.argmax()], rel=1e-4)


def test_optimize_c2p_narrow_bounds_near_tuned():
    c0 = parallel_tank_cap(13.56e6, 1e-6, 320)
    res = optimize_efficiency(OptimizationProblem(
        table1_design("sp"), ("c2p",), {"c2p": (0.95 * c0, 1.05 * c0)}))
    assert res.point["c2p"] == pytest.approx(1.0578e-11, rel=0.05)


def test_optimize_interior_optimum_rload():
    # efficiency of the series link peaks in Rload at an interior point
    base = table1_design("series")
    res = optimize_efficiency(OptimizationProblem(base, ("r_load",), {"r_load": (1.0, 2000.0)}))
    scan = np.linspace(1.0, 2000.0, 400001)
    vals = evaluate_objective_grid(base, {"r_load": scan}, "efficiency")
    assert 1.0 < res.point["r_load"] < 2000.0
    assert res.point["r_load"] == pytest.approx(scan[vals.argmax()], rel=1e-4)


def test_optimize_multi_variable_invariants():
    base = table1_design("sp")
    c0 = base.tuning.c2p
    bounds = {"k": (0.1, 0.45), "r_load": (200.0, 400.0), "c2p": (0.5 * c0, 1.5 * c0)}
    res = optimize_efficiency(OptimizationProblem(base, ("k", "r_load", "c2p"), bounds))
    assert len(res.trace) >= 32 ** 3
    assert res.design.coils.k == 0.45
    for name, (lo, hi) in bounds.items():
        assert lo <= res.point[name] <= hi
    finite = res.trace.values[~np.isnan(res.trace.values)]
    assert res.value >= finite.max() - 1e-12
    assert np.all(res.trace.points >= [b[0] for b in bounds.values()])
    assert np.all(res.trace.points <= [b[1] for b in bounds.values()])


def test_optimize_preconditions():
    base = table1_design("sp")
    with pytest.raises(UsageError):
        OptimizationProblem(base, (), {})
    with pytest.raises(UsageError):
        OptimizationProblem(base, ("l1",), {"l1": (1e-6, 2e-6)})
    with pytest.raises(UsageError):
        OptimizationProblem(table1_design("series"), ("c2p",), {"c2p": (1e-12, 1e-11)})
    with pytest.raises(UsageError):
        OptimizationProblem(base, ("k",), {})
    with pytest.raises(DomainError):
        OptimizationProblem(base, ("k",), {"k": (0.1, 0.6)})
    with pytest.raises(DomainError):
        OptimizationProblem(base, ("r_load",), {"r_load": (0.0, 10.0)})
    assert OptimizationProblem(base, ("k",), {"k": (0.1, 0.6)}, allow_unsafe=True)


def test_optimize_infeasible_fixed_k():
    base = table1_design("sp", k=0.6)
    with pytest.raises(NoSolutionError):
        optimize_efficiency(OptimizationProblem(base, ("r_load",), {"r_load": (100.0, 400.0)}))


def test_optimize_unsafe_override_goes_past_cap():
    res = optimize_efficiency(OptimizationProblem(
        table1_design("sp"), ("k",), {"k": (0.1, 0.9)}, allow_unsafe=True))
    assert res.design.coils.k == 0.9
