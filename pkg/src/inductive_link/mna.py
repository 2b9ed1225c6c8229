"""AC steady-state modified nodal analysis over R/L/C/V/K netlists.

Unknowns are the non-ground node voltages followed by one branch current per
voltage source and per inductor. Branch currents flow from the first node
through the element to the second. Mutual coupling enters as -jωM between the
two inductor branch rows, with M = k·sqrt(La·Lb).

Powers use the amplitude convention P = ½·Re[V·conj(I)].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError
from .netlist import GROUND, Netlist
from .phasor import angular_frequency

COND_WARN = 1e12
REFINE_STEPS = 2


class IllConditionedWarning(UserWarning):
    pass


@dataclass
class ACSolution:
    freq_hz: float
    node_voltages: dict
    branch_currents: dict
    element_power: dict
    source_power: float
    dissipated_power: float
    condition: float
    warnings: list = field(default_factory=list)

    def voltage(self, node: str) -> complex:
        return self.node_voltages[node]

    def element_voltage(self, netlist: Netlist, name: str) -> complex:
        e = netlist[name]
        return self.node_voltages[e.nodes[0]] - self.node_voltages[e.nodes[1]]


@dataclass(frozen=True)
class PowerAudit:
    source_power: float
    per_element_power: dict

    @property
    def dissipated_power(self) -> float:
        return sum(p for name, p in self.per_element_power.items() if name[0] == "R")


def _floating_nodes(netlist: Netlist) -> list:
    parent = {}

    def find(n):
        parent.setdefault(n, n)
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    find(GROUND)
    for e in netlist.elements:
        if e.kind != "K":
            parent[find(e.nodes[0])] = find(e.nodes[1])
    root = find(GROUND)
    return [n for n in netlist.nodes if find(n) != root]


def solve_ac(netlist: Netlist, freq_hz: float) -> ACSolution:
    """Solve the netlist at ``freq_hz``.

    Raises :class:`SingularityError` for floating subcircuits or a singular
    system. A condition estimate above 1e12 (after row/column equilibration)
    attaches a warning to the solution instead of failing.
    """
    w = angular_frequency(freq_hz)
    if GROUND not in {n for e in netlist.elements for n in e.nodes}:
        raise SingularityError("netlist has no ground node '0'")
    floating = _floating_nodes(netlist)
    if floating:
        raise SingularityError(f"floating subcircuit not connected to ground: nodes {floating}",
                               {"nodes": floating})

    nodes = netlist.nodes
    index = {n: i for i, n in enumerate(nodes)}
    branch_elems = [e for e in netlist.elements if e.kind in ("V", "L")]
    branch = {e.name: len(nodes) + j for j, e in enumerate(branch_elems)}
    size = len(nodes) + len(branch_elems)
    Y = np.zeros((size, size), dtype=complex)
    rhs = np.zeros(size, dtype=complex)

    def stamp_admittance(a, b, y):
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            Y[ia, ia] += y
        if ib is not None:
            Y[ib, ib] += y
        if ia is not None and ib is not None:
            Y[ia, ib] -= y
            Y[ib, ia] -= y

    def stamp_branch(a, b, r):
        ia, ib = index.get(a), index.get(b)
        if ia is not None:
            Y[ia, r] += 1
            Y[r, ia] += 1
        if ib is not None:
            Y[ib, r] -= 1
            Y[r, ib] -= 1

    for e in netlist.elements:
        if e.kind == "R":
            stamp_admittance(*e.nodes, 1.0 / e.value)
        elif e.kind == "C":
            stamp_admittance(*e.nodes, complex(0.0, w * e.value))
        elif e.kind == "V":
            r = branch[e.name]
            stamp_branch(*e.nodes, r)
            rhs[r] = e.value * np.exp(1j * math.radians(e.phase_deg))
        elif e.kind == "L":
            r = branch[e.name]
            stamp_branch(*e.nodes, r)
            Y[r, r] -= complex(0.0, w * e.value)
    for e in netlist.elements:
        if e.kind == "K":
            la, lb = (netlist[n] for n in e.inductors)
            zm = complex(0.0, w * e.value * math.sqrt(la.value * lb.value))
            ra, rb = branch[la.name], branch[lb.name]
            Y[ra, rb] -= zm
            Y[rb, ra] -= zm

    # equilibrate rows then columns so the condition estimate reflects topology, not units
    row = np.abs(Y).max(axis=1)
    if np.any(row == 0):
        raise SingularityError("system matrix has an empty row (unconstrained unknown)")
    Ys = Y / row[:, None]
    col = np.abs(Ys).max(axis=0)
    if np.any(col == 0):
        raise SingularityError("system matrix has an empty column (unconstrained unknown)")
    Ys = Ys / col[None, :]
    try:
        y = np.linalg.solve(Ys, rhs / row)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"singular MNA system: {exc}; check for floating or shorted subcircuits",
                               {"freq_hz": freq_hz}) from None
    x = y / col
    # iterative refinement with an extended-precision residual: the real part of a
    # nearly reactive branch current is a small component and needs it
    Yl = Y.astype(np.clongdouble)
    rl = rhs.astype(np.clongdouble)
    for _ in range(REFINE_STEPS):
        resid = rl - Yl @ x.astype(np.clongdouble)
        dx = np.linalg.solve(Ys, (resid / row).astype(complex)) / col
        x = (x.astype(np.clongdouble) + dx).astype(complex)
    if not np.all(np.isfinite(x)):
        raise SingularityError("MNA solution is not finite", {"freq_hz": freq_hz})
    cond = float(np.linalg.cond(Ys))
    notes = []
    if not math.isfinite(cond) or cond > COND_WARN:
        notes.append(f"ill-conditioned system: condition estimate {cond:.3g} > {COND_WARN:g}")
        warnings.warn(notes[-1], IllConditionedWarning, stacklevel=2)

    volts = {GROUND: 0j}
    volts.update({n: complex(x[i]) for n, i in index.items()})
    currents = {}
    power = {}
    for e in netlist.elements:
        if e.kind == "K":
            continue
        v = volts[e.nodes[0]] - volts[e.nodes[1]]
        if e.kind == "R":
            i = v / e.value
        elif e.kind == "C":
            i = v * complex(0.0, w * e.value)
        else:
            i = complex(x[branch[e.name]])
        currents[e.name] = i
        power[e.name] = 0.5 * (v * i.conjugate()).real

    source_power = -sum(p for n, p in power.items() if netlist[n].kind == "V")
    dissipated = sum(p for n, p in power.items() if netlist[n].kind == "R")
    return ACSolution(freq_hz, volts, currents, power, source_power, dissipated, cond, notes)


def power_audit(solution: ACSolution, netlist: Netlist) -> PowerAudit:
    """Real average power per element (absorbed, watts) and total source power.

    Sources report the power they deliver as ``source_power``; inside
    ``per_element_power`` they appear with absorbed sign (negative).
    """
    per = {}
    for e in netlist.elements:
        if e.kind == "K":
            continue
        if e.name not in solution.branch_currents:
            raise DomainError(f"solution has no current for element {e.name}")
        v = solution.node_voltages[e.nodes[0]] - solution.node_voltages[e.nodes[1]]
        per[e.name] = 0.5 * (v * solution.branch_currents[e.name].conjugate()).real
    source = -sum(p for n, p in per.items() if n[0] == "V")
    return PowerAudit(source, per)
