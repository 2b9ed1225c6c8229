"""Netlist model, text parser and serializer for the AC oracle.

Grammar, one element per line (keys and suffixes case-insensitive)::

    R<name> <n+> <n-> <value>
    L<name> <n+> <n-> <value>
    C<name> <n+> <n-> <value>
    V<name> <n+> <n-> AC <amplitude> [<phase_deg>]
    K<name> <Lname> <Lname> <k>

Values take the suffixes p, n, u, m, k and meg; trailing unit letters are
ignored (``25.141pF``). Lines starting with ``*`` and blank lines are skipped,
as is a trailing ``.end``. Node ``0`` is ground.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError, NetlistError
from .link import LinkDesign, Topology

GROUND = "0"
RS_FLOOR = 1e-12

_SUFFIXES = {"meg": 1e6, "k": 1e3, "m": 1e-3, "u": 1e-6, "n": 1e-9, "p": 1e-12}
_VALUE_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(meg|[kmunp])?([a-z]*)$", re.IGNORECASE)


def parse_value(text: str) -> float:
    """``"25.141p"`` -> 2.5141e-11. Raises ValueError on malformed input."""
    m = _VALUE_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed numeric value {text!r}")
    number, suffix, _unit = m.groups()
    value = float(number)
    if suffix:
        value *= _SUFFIXES[suffix.lower()]
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


@dataclass(frozen=True)
class Element:
    """One netlist element.

    ``value`` is ohms/henries/farads for R/L/C, the amplitude in volts for V
    and the coupling coefficient for K. ``nodes`` is empty for K, which names
    its inductors in ``inductors`` instead.
    """

    kind: str
    name: str
    nodes: tuple = ()
    value: float = 0.0
    phase_deg: float = 0.0
    inductors: tuple = ()

    def __post_init__(self):
        if self.kind not in ("R", "L", "C", "V", "K"):
            raise DomainError(f"unknown element kind {self.kind!r}")
        if not self.name.upper().startswith(self.kind):
            raise DomainError(f"element name {self.name!r} must start with {self.kind!r}")
        if not math.isfinite(self.value):
            raise DomainError(f"{self.name}: value must be finite")
        if self.kind == "K":
            if len(self.inductors) != 2:
                raise DomainError(f"{self.name}: coupling needs exactly two inductor names")
            if self.inductors[0].upper() == self.inductors[1].upper():
                raise DomainError(f"{self.name}: cannot couple {self.inductors[0]} to itself")
            if not 0 <= self.value <= 1:
                raise DomainError(f"{self.name}: coupling coefficient must lie in [0, 1]")
        else:
            if len(self.nodes) != 2:
                raise DomainError(f"{self.name}: two-terminal element needs two nodes")
            if self.kind in "RLC" and self.value <= 0:
                raise DomainError(f"{self.name}: value must be > 0, got {self.value!r}")


@dataclass(frozen=True)
class Netlist:
    elements: tuple

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        seen = set()
        inductors = set()
        for e in self.elements:
            key = e.name.upper()
            if key in seen:
                raise DomainError(f"duplicate element name {e.name!r}")
            seen.add(key)
            if e.kind == "L":
                inductors.add(key)
        for e in self.elements:
            if e.kind == "K":
                for ind in e.inductors:
                    if ind.upper() not in inductors:
                        raise DomainError(f"{e.name} references missing inductor {ind!r}")
        if not any(e.kind == "V" for e in self.elements):
            raise DomainError("netlist has no source")

    def __getitem__(self, name: str) -> Element:
        key = name.upper()
        for e in self.elements:
            if e.name.upper() == key:
                return e
        raise KeyError(name)

    @property
    def nodes(self) -> list:
        """Non-ground node names in first-appearance order."""
        out = []
        for e in self.elements:
            for n in e.nodes:
                if n != GROUND and n not in out:
                    out.append(n)
        return out


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text; errors carry the 1-based line number."""
    elements = []
    lines_of = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("*"):
            continue
        if line.lower() == ".end":
            break
        tokens = line.split()
        name = tokens[0]
        kind = name[0].upper()
        if kind not in "RLCVK" or len(name) < 2:
            raise NetlistError(f"unknown element {name!r}", lineno)
        name = name.upper()
        if name in lines_of:
            raise NetlistError(f"duplicate element name {name!r} (first on line {lines_of[name]})", lineno)
        try:
            if kind in "RLC":
                if len(tokens) != 4:
                    raise NetlistError(f"{name}: expected '<name> <n+> <n-> <value>', got {len(tokens)} fields", lineno)
                elem = Element(kind, name, (tokens[1], tokens[2]), parse_value(tokens[3]))
            elif kind == "V":
                if len(tokens) not in (5, 6) or tokens[3].upper() != "AC":
                    raise NetlistError(f"{name}: expected '<name> <n+> <n-> AC <amplitude> [<phase_deg>]'", lineno)
                phase = parse_value(tokens[5]) if len(tokens) == 6 else 0.0
                elem = Element(kind, name, (tokens[1], tokens[2]), parse_value(tokens[4]), phase)
            else:
                if len(tokens) != 4:
                    raise NetlistError(f"{name}: expected '<name> <Lname> <Lname> <k>'", lineno)
                elem = Element(kind, name, value=parse_value(tokens[3]),
                               inductors=(tokens[1].upper(), tokens[2].upper()))
        except NetlistError:
            raise
        except (ValueError, DomainError) as exc:
            raise NetlistError(str(exc), lineno) from None
        if elem.kind in "RLCV" and elem.nodes[0] == elem.nodes[1]:
            raise NetlistError(f"{name}: both terminals on node {elem.nodes[0]!r}", lineno)
        lines_of[name] = lineno
        elements.append(elem)

    declared = {e.name for e in elements if e.kind == "L"}
    for e in elements:
        if e.kind == "K":
            for ind in e.inductors:
                if ind not in declared:
                    raise NetlistError(f"{e.name} references missing inductor {ind!r}", lines_of[e.name])
    if not any(e.kind == "V" for e in elements):
        raise NetlistError("netlist has no AC voltage source")
    return Netlist(tuple(elements))


def format_netlist(netlist: Netlist, title: Optional[str] = None) -> str:
    """Serialize to the text grammar; values use shortest round-trip repr."""
    lines = [f"* {title}"] if title else []
    for e in netlist.elements:
        if e.kind == "K":
            lines.append(f"{e.name} {e.inductors[0]} {e.inductors[1]} {e.value!r}")
        elif e.kind == "V":
            lines.append(f"{e.name} {e.nodes[0]} {e.nodes[1]} AC {e.value!r} {e.phase_deg!r}")
        else:
            lines.append(f"{e.name} {e.nodes[0]} {e.nodes[1]} {e.value!r}")
    return "\n".join(lines) + "\n"


# node names used by netlist_from_design
SOURCE_NODE = "src"
LOAD_NODE = "load"


def netlist_from_design(design: LinkDesign) -> Netlist:
    """Element-level netlist of a link design.

    Primary loop: VS -> RS -> C1S -> L1 -> RL1 -> ground. Secondary loop:
    L2 (dotted end at ``sec``) -> RL2 -> ``load`` -> RLOAD (|| C2P) -> ground,
    coupled by K1. Both loops share the ground node. A zero source resistance
    is written as ``RS_FLOOR`` so every resistor stamps the same way.
    """
    c = design.coils
    rs = design.source.rs if design.source.rs > 0 else RS_FLOOR
    elems = [
        Element("V", "VS", (SOURCE_NODE, GROUND), design.source.vs, 0.0),
        Element("R", "RS", (SOURCE_NODE, "p1"), rs),
        Element("C", "C1S", ("p1", "p2"), design.tuning.c1s),
        Element("L", "L1", ("p2", "p3"), c.l1),
        Element("R", "RL1", ("p3", GROUND), c.r_l1 if c.r_l1 > 0 else RS_FLOOR),
        Element("L", "L2", ("sec", GROUND), c.l2),
        Element("R", "RL2", ("sec", LOAD_NODE), c.r_l2 if c.r_l2 > 0 else RS_FLOOR),
        Element("R", "RLOAD", (LOAD_NODE, GROUND), design.load.r_load),
    ]
    if design.topology is Topology.SERIES_PARALLEL and design.tuning.c2p:
        elems.append(Element("C", "C2P", (LOAD_NODE, GROUND), design.tuning.c2p))
    elems.append(Element("K", "K1", value=c.k, inductors=("L1", "L2")))
    return Netlist(tuple(elems))
