"""Tuning-capacitor selection and constrained efficiency optimization."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, NoSolutionError, SingularityError, UsageError
from .link import (
    SAFETY_K_MAX,
    LinkDesign,
    Topology,
    branch_a,
    efficiency,
    gain,
    zload_parallel,
)
from .phasor import angular_frequency

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2

FREE_VARIABLES = ("k", "r_load", "c1s", "c2p")
OBJECTIVES = ("efficiency", "gain_mag")


def series_resonance_cap(freq_hz: float, l1: float) -> float:
    """Capacitance that resonates ``l1`` at ``freq_hz``: C = 1/(ω²L)."""
    if not (math.isfinite(l1) and l1 > 0):
        raise DomainError(f"inductance must be > 0, got {l1!r}")
    w = angular_frequency(freq_hz)
    return 1.0 / (w * w * l1)


def parallel_tank_cap(freq_hz: float, l2: float, r_load: float) -> float:
    """Capacitor across ``r_load`` that cancels the secondary coil reactance.

    Solves Im[Rload || C2p] = -ωL2, i.e. ωL2·u² - Rload·u + ωL2 = 0 with
    u = ωC2p·Rload, and keeps the smaller root (the branch that leaves most of
    Rload in the real part). Needs Rload >= 2ωL2.
    """
    if not (math.isfinite(l2) and l2 > 0):
        raise DomainError(f"inductance must be > 0, got {l2!r}")
    if not (math.isfinite(r_load) and r_load > 0):
        raise DomainError(f"r_load must be > 0, got {r_load!r}")
    w = angular_frequency(freq_hz)
    x = w * l2
    disc = r_load * r_load - 4.0 * x * x
    if disc < 0:
        raise DomainError(
            f"no real parallel resonance: r_load = {r_load:g} ohm is below 2ωL2 = {2 * x:g} ohm; "
            "use the series topology or a larger load")
    # smaller root written as 2c/(-b + sqrt(disc)) to avoid cancellation
    u = 2.0 * x / (r_load + math.sqrt(disc))
    return u / (w * r_load)


@dataclass(frozen=True)
class TuneResult:
    c1s: float
    c2p: Optional[float]
    residual_primary: float
    residual_secondary: Optional[float] = None

    @property
    def achieved_resonance_residual(self) -> float:
        """Largest |Im| left in a tuned branch, in ohms."""
        if self.residual_secondary is None:
            return self.residual_primary
        return max(self.residual_primary, self.residual_secondary)


def tune_design(design: LinkDesign) -> tuple[LinkDesign, TuneResult]:
    """Return ``design`` with resonant C1s (and C2p for the sp topology)."""
    c = design.coils
    c1s = series_resonance_cap(design.freq_hz, c.l1)
    c2p = None
    if design.topology is Topology.SERIES_PARALLEL:
        c2p = parallel_tank_cap(design.freq_hz, c.l2, design.load.r_load)
    tuned = design.with_params(c1s=c1s, c2p=c2p)
    w = design.omega
    res1 = abs(branch_a(tuned).imag)
    res2 = None
    if c2p is not None:
        res2 = abs(zload_parallel(design.load.r_load, c2p, w).imag + w * c.l2)
    return tuned, TuneResult(c1s, c2p, res1, res2)


# -- optimization ---------------------------------------------------------


@dataclass(frozen=True)
class OptimizationProblem:
    """Maximize ``objective`` over ``free_variables`` inside ``bounds``.

    The coupling coefficient is capped at ``safety_cap`` unless
    ``allow_unsafe`` is set, both as a bound on a free ``k`` and as a
    feasibility condition on a fixed one.
    """

    base: LinkDesign
    free_variables: tuple
    bounds: dict
    objective: str = "efficiency"
    safety_cap: float = SAFETY_K_MAX
    allow_unsafe: bool = False
    grid_points: int = 32
    rel_tol: float = 1e-6

    def __post_init__(self):
        free = tuple(self.free_variables)
        object.__setattr__(self, "free_variables", free)
        if not free:
            raise UsageError("optimization needs at least one free variable")
        if len(set(free)) != len(free):
            raise UsageError(f"duplicate free variables: {free}")
        for name in free:
            if name not in FREE_VARIABLES:
                raise UsageError(f"cannot optimize {name!r}; choose from {FREE_VARIABLES}")
            if name not in self.bounds:
                raise UsageError(f"missing bounds for free variable {name!r}")
        if "c2p" in free and self.base.topology is not Topology.SERIES_PARALLEL:
            raise UsageError("c2p is only a free variable for the sp topology")
        if self.objective not in OBJECTIVES:
            raise UsageError(f"unknown objective {self.objective!r}; choose from {OBJECTIVES}")
        if self.grid_points < 32:
            raise UsageError("grid_points must be >= 32")
        for name in free:
            lo, hi = (float(v) for v in self.bounds[name])
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError(f"bounds for {name} must be finite with lo < hi, got {(lo, hi)}")
            if name == "k":
                if lo < 0 or hi >= 1:
                    raise DomainError(f"k bounds must lie in [0, 1), got {(lo, hi)}")
                if hi > self.safety_cap and not self.allow_unsafe:
                    raise DomainError(
                        f"k upper bound {hi:g} exceeds the tissue-safety limit {self.safety_cap:g}; "
                        "set allow_unsafe to search beyond it")
            elif name in ("r_load", "c1s") and lo <= 0:
                raise DomainError(f"{name} bounds must be > 0, got {(lo, hi)}")
            elif name == "c2p" and lo < 0:
                raise DomainError(f"c2p bounds must be >= 0, got {(lo, hi)}")


@dataclass
class OptimizationTrace:
    """Every evaluated point, in evaluation order. NaN marks infeasible points."""

    variables: tuple
    points: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass
class OptimizationResult:
    design: LinkDesign
    value: float
    trace: OptimizationTrace
    refinement_cycles: int = 0
    point: dict = field(default_factory=dict)


def evaluate_objective_grid(base: LinkDesign, values: dict, objective: str) -> np.ndarray:
    """Vectorized closed-form objective with some design fields replaced by arrays.

    ``values`` maps names from ``FREE_VARIABLES`` to broadcastable arrays. Points
    whose denominators vanish evaluate to NaN.
    """
    p = base.params()
    k = np.asarray(values.get("k", p["k"]), dtype=float)
    r_load = np.asarray(values.get("r_load", p["r_load"]), dtype=float)
    c1s = np.asarray(values.get("c1s", p["c1s"]), dtype=float)
    w = base.omega
    wm = w * k * math.sqrt(p["l1"] * p["l2"])
    wm2 = wm * wm
    with np.errstate(divide="ignore", invalid="ignore"):
        a = (p["rs"] + p["r_l1"]) + 1j * (w * p["l1"] - 1.0 / (w * c1s))
        if base.topology is Topology.SERIES_PARALLEL:
            c2p = np.asarray(values.get("c2p", p["c2p"]), dtype=float)
            u = w * c2p * r_load
            den = 1.0 + u * u
            z = r_load / den - 1j * u * r_load / den
        else:
            z = r_load + 0j
        c = z + p["r_l2"] + 1j * w * p["l2"]
        if objective == "gain_mag":
            out = np.abs(1j * wm * z / (a * c + wm2))
        else:
            re_c = c.real
            out = wm2 * z.real / (re_c * (a.real * re_c + wm2))
    out = np.asarray(out, dtype=float)
    out[~np.isfinite(out)] = np.nan
    return out


def golden_section_max(f: Callable[[float], float], a: float, b: float, tol: float):
    """Golden-section search for the maximum of a unimodal ``f`` on [a, b].

    Both endpoints are evaluated too, so a maximum on the boundary is found
    exactly. Returns ``(x, f(x))`` for the best point seen.
    """
    a, b = min(a, b), max(a, b)
    best = max(((a, f(a)), (b, f(b))), key=lambda t: _rank(t[1]))
    h = b - a
    if h <= tol:
        return best
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if _rank(yc) > _rank(yd):
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    for cand in ((c, yc), (d, yd)):
        if _rank(cand[1]) > _rank(best[1]):
            best = cand
    return best


def _rank(v: float) -> float:
    return -math.inf if v is None or math.isnan(v) else v


def optimize_efficiency(problem: OptimizationProblem) -> OptimizationResult:
    """Coarse grid scan followed by coordinate-wise golden-section refinement."""
    base = problem.base
    names = problem.free_variables
    if not problem.allow_unsafe and "k" not in names and base.coils.k > problem.safety_cap:
        raise NoSolutionError(
            f"fixed k = {base.coils.k:g} exceeds the tissue-safety limit {problem.safety_cap:g}")
    bounds = [tuple(float(v) for v in problem.bounds[n]) for n in names]

    axes = [np.linspace(lo, hi, problem.grid_points) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = {n: m.ravel() for n, m in zip(names, mesh)}
    grid_values = evaluate_objective_grid(base, grid, problem.objective)
    pts = [np.column_stack([grid[n] for n in names])]
    vals = [grid_values]
    if np.all(np.isnan(grid_values)):
        raise NoSolutionError("objective is undefined at every grid point")

    extra_pts: list[tuple] = []
    extra_vals: list[float] = []

    def evaluate(x: list) -> float:
        try:
            d = base.with_params(**dict(zip(names, x)))
            v = abs(gain(d)) if problem.objective == "gain_mag" else efficiency(d)
        except (DomainError, SingularityError):
            v = math.nan
        extra_pts.append(tuple(x))
        extra_vals.append(v)
        return v

    ibest = int(np.nanargmax(grid_values))
    x = [float(grid[n][ibest]) for n in names]
    fx = float(grid_values[ibest])
    steps = [(hi - lo) / (problem.grid_points - 1) for lo, hi in bounds]

    cycles = 0
    for cycles in range(1, 51):
        f_start = fx
        for i, (lo, hi) in enumerate(bounds):
            a = max(lo, x[i] - steps[i])
            b = min(hi, x[i] + steps[i])
            tol = problem.rel_tol * max(abs(x[i]), (hi - lo) * 1e-3)

            def along(t, i=i):
                y = list(x)
                y[i] = t
                return evaluate(y)

            xi, fi = golden_section_max(along, a, b, tol)
            if _rank(fi) > _rank(fx):
                x[i], fx = xi, fi
        if not fx - f_start > 1e-12 * max(1.0, abs(fx)):
            break

    if extra_pts:
        pts.append(np.asarray(extra_pts, dtype=float))
        vals.append(np.asarray(extra_vals, dtype=float))
    trace = OptimizationTrace(names, np.vstack(pts), np.concatenate(vals))

    # the returned point is the best point ever evaluated
    j = int(np.nanargmax(trace.values))
    x = [float(v) for v in trace.points[j]]
    design = base.with_params(**dict(zip(names, x)))
    value = abs(gain(design)) if problem.objective == "gain_mag" else efficiency(design)
    return OptimizationResult(design=design, value=value, trace=trace,
                              refinement_cycles=cycles, point=dict(zip(names, x)))
