"""Randomized cross-check of the closed-form link model against the MNA oracle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .link import LinkDesign, Topology, load_impedance, make_design, solve_link
from .mna import solve_ac
from .netlist import LOAD_NODE, netlist_from_design
from .tuning import series_resonance_cap

TOLERANCE = 1e-9


def _log_uniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_design(rng: np.random.Generator, topology=None) -> LinkDesign:
    """Draw a design: L in [0.1, 50] uH, R in [0.1, 1000] ohm (log-uniform),
    k in [0, 0.99], f in [0.1, 50] MHz, capacitors scattered around resonance."""
    if topology is None:
        topology = Topology.SERIES if rng.random() < 0.5 else Topology.SERIES_PARALLEL
    freq = _log_uniform(rng, 0.1e6, 50e6)
    l1 = _log_uniform(rng, 0.1e-6, 50e-6)
    l2 = _log_uniform(rng, 0.1e-6, 50e-6)
    rs, r_l1, r_l2, r_load = (_log_uniform(rng, 0.1, 1000.0) for _ in range(4))
    k = float(rng.uniform(0.0, 0.99))
    c1s = series_resonance_cap(freq, l1) * _log_uniform(rng, 0.25, 4.0)
    c2p = None
    if topology is Topology.SERIES_PARALLEL:
        # ωC2p·Rload spread over [0.01, 10]
        c2p = _log_uniform(rng, 0.01, 10.0) / (2 * math.pi * freq * r_load)
    return make_design(topology=topology, freq_hz=freq, l1=l1, l2=l2, r_l1=r_l1, r_l2=r_l2,
                       k=k, r_load=r_load, c1s=c1s, c2p=c2p, vs=1.0, rs=rs)


def oracle_metrics(design: LinkDesign):
    """(gain, efficiency, conservation residual) of ``design`` from the MNA oracle.

    Efficiency here is load real power over source real power.
    """
    net = netlist_from_design(design)
    sol = solve_ac(net, design.freq_hz)
    g = sol.voltage(LOAD_NODE) / design.source.vs
    eta = sol.element_power["RLOAD"] / sol.source_power
    conservation = abs(sol.source_power - sol.dissipated_power) / abs(sol.source_power)
    return g, eta, conservation


def _rel(a, b):
    return abs(a - b) / max(1e-12, abs(b))


@dataclass
class VerifyReport:
    trials: int
    seed: int
    tolerance: float
    max_gain_dev: float = 0.0
    max_efficiency_dev: float = 0.0
    max_power_ratio_dev: float = 0.0
    max_conservation_dev: float = 0.0
    efficiency_failures: int = 0
    by_topology: dict = field(default_factory=dict)
    worst_efficiency: dict = field(default_factory=dict)
    elapsed_s: float = 0.0

    @property
    def gain_ok(self) -> bool:
        return self.max_gain_dev < self.tolerance

    @property
    def efficiency_ok(self) -> bool:
        return self.max_efficiency_dev < self.tolerance

    @property
    def passed(self) -> bool:
        return self.gain_ok and self.efficiency_ok

    def lines(self) -> list:
        mark = {True: "PASS", False: "FAIL"}
        out = [
            f"trials={self.trials} seed={self.seed} tolerance={self.tolerance:g}",
            f"[{mark[self.gain_ok]}] gain (closed form vs oracle): max rel dev {self.max_gain_dev:.3e}",
            f"[{mark[self.efficiency_ok]}] efficiency (real-part closed form vs oracle power ratio): "
            f"max rel dev {self.max_efficiency_dev:.3e} ({self.efficiency_failures}/{self.trials} over tolerance)",
            f"[{mark[self.max_power_ratio_dev < self.tolerance]}] efficiency (mesh power ratio vs oracle power ratio): "
            f"max rel dev {self.max_power_ratio_dev:.3e}",
            f"[{mark[self.max_conservation_dev < self.tolerance]}] oracle power conservation: "
            f"max rel residual {self.max_conservation_dev:.3e}",
        ]
        for top, d in sorted(self.by_topology.items()):
            out.append(f"  {top}: n={d['n']} max gain dev {d['gain']:.3e}, max efficiency dev {d['efficiency']:.3e}")
        if self.worst_efficiency:
            w = self.worst_efficiency
            out.append(
                f"  worst efficiency case: closed form {w['closed']:.6g} vs power ratio {w['oracle']:.6g}, "
                f"secondary Im/Re = {w['secondary_q']:.3g} ({w['topology']})")
            out.append("  note: the real-part efficiency forms equal the power ratio only when the "
                       "secondary mesh is resonant (Im[Zload + jwL2 + RL2] = 0)")
        out.append("RESULT: " + mark[self.passed])
        return out


def run_verification(trials: int = 1000, seed: int = 1, tolerance: float = TOLERANCE) -> VerifyReport:
    """Compare closed-form gain/efficiency with the oracle on ``trials`` random designs."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    rep = VerifyReport(trials=trials, seed=seed, tolerance=tolerance)
    for _ in range(trials):
        d = random_design(rng)
        res = solve_link(d)
        g, eta, cons = oracle_metrics(d)
        dg = _rel(g, res.gain)
        de = _rel(eta, res.efficiency)
        dp = _rel(eta, res.power_ratio)
        top = d.topology.value
        stats = rep.by_topology.setdefault(top, {"n": 0, "gain": 0.0, "efficiency": 0.0})
        stats["n"] += 1
        stats["gain"] = max(stats["gain"], dg)
        stats["efficiency"] = max(stats["efficiency"], de)
        rep.max_gain_dev = max(rep.max_gain_dev, dg)
        rep.max_power_ratio_dev = max(rep.max_power_ratio_dev, dp)
        rep.max_conservation_dev = max(rep.max_conservation_dev, cons)
        if de >= tolerance:
            rep.efficiency_failures += 1
        if de > rep.max_efficiency_dev:
            rep.max_efficiency_dev = de
            c = load_impedance(d) + complex(d.coils.r_l2, d.omega * d.coils.l2)
            rep.worst_efficiency = {"closed": res.efficiency, "oracle": eta,
                                    "secondary_q": c.imag / c.real, "topology": top}
    rep.elapsed_s = time.perf_counter() - t0
    return rep
