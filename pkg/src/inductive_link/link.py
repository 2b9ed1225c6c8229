"""Closed-form models of the two tuned inductive-link topologies.

Series-tuned primary (``Topology.SERIES``)::

    Vs -- Rs -- C1s -- L1 -- RL1          L2 -- RL2 -- Rload
                        \\__ M = k sqrt(L1 L2) __/

Series-tuned primary with a parallel-tuned secondary
(``Topology.SERIES_PARALLEL``) puts C2p across Rload, so the secondary mesh
sees ``Zload = Rload || C2p`` instead of ``Rload``.

With ``A = Rs + RL1 + jωL1 + 1/(jωC1s)`` and ``C = Zeff + jωL2 + RL2`` the two
meshes are::

    Vs = A I1 - jωM I2
    0  = -jωM I1 + C I2
    Vload = I2 Zeff

which gives ``Vload/Vs = jωM Zeff / (A C + ω²M²)``.

The efficiency functions implement the real-part forms
``ω²M² Re[Zeff] / (Re[C] (Re[A] Re[C] + ω²M²))``. They coincide with the true
load-to-source real power ratio only when the secondary mesh is resonant
(``Im[C] = 0``); :attr:`SolveResult.power_ratio` carries the exact ratio
computed from the mesh currents.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import DomainError, SafetyError, SingularityError, UsageError
from .phasor import angular_frequency, check_finite, impedance_of_element

SAFETY_K_MAX = 0.45


class Topology(str, enum.Enum):
    SERIES = "series"
    SERIES_PARALLEL = "sp"

    @classmethod
    def parse(cls, text) -> "Topology":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"series": cls.SERIES, "s": cls.SERIES, "sp": cls.SERIES_PARALLEL,
                   "series_parallel": cls.SERIES_PARALLEL, "series-parallel": cls.SERIES_PARALLEL}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown topology {text!r}; expected 'series' or 'sp'") from None


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


def _finite(x) -> bool:
    if isinstance(x, bool):
        return False
    try:
        return math.isfinite(x)
    except TypeError:
        return False


@dataclass(frozen=True)
class CoilPair:
    """Primary/secondary coils, their winding resistances and coupling.

    ``k == 1`` (ideal transformer) is only accepted with
    ``allow_unity_coupling=True``; ``k > 1`` is never physical.
    """

    l1: float
    l2: float
    r_l1: float
    r_l2: float
    k: float
    allow_unity_coupling: bool = field(default=False, compare=False)

    def __post_init__(self):
        _require(_finite(self.l1) and self.l1 > 0, f"l1 must be > 0 H, got {self.l1!r}")
        _require(_finite(self.l2) and self.l2 > 0, f"l2 must be > 0 H, got {self.l2!r}")
        _require(_finite(self.r_l1) and self.r_l1 >= 0, f"r_l1 must be >= 0 ohm, got {self.r_l1!r}")
        _require(_finite(self.r_l2) and self.r_l2 >= 0, f"r_l2 must be >= 0 ohm, got {self.r_l2!r}")
        _require(_finite(self.k) and 0 <= self.k <= 1, f"k must lie in [0, 1), got {self.k!r}")
        _require(self.k < 1 or self.allow_unity_coupling,
                 "k = 1 (perfect coupling) requires allow_unity_coupling=True")


@dataclass(frozen=True)
class SourceSpec:
    vs: float = 1.0
    rs: float = 0.0

    def __post_init__(self):
        _require(_finite(self.vs) and self.vs > 0, f"vs must be > 0 V, got {self.vs!r}")
        _require(_finite(self.rs) and self.rs >= 0, f"rs must be >= 0 ohm, got {self.rs!r}")


@dataclass(frozen=True)
class LoadSpec:
    r_load: float

    def __post_init__(self):
        _require(_finite(self.r_load) and self.r_load > 0, f"r_load must be > 0 ohm, got {self.r_load!r}")


@dataclass(frozen=True)
class TuningSpec:
    """Tuning capacitors. ``c2p=None`` means no secondary capacitor.

    ``c2p=0`` is accepted so the parallel-tuned formulas can be evaluated in
    their degenerate (capacitor-free) limit.
    """

    c1s: float
    c2p: Optional[float] = None

    def __post_init__(self):
        _require(_finite(self.c1s) and self.c1s > 0, f"c1s must be > 0 F, got {self.c1s!r}")
        if self.c2p is not None:
            _require(_finite(self.c2p) and self.c2p >= 0, f"c2p must be >= 0 F, got {self.c2p!r}")


@dataclass(frozen=True)
class LinkDesign:
    topology: Topology
    coils: CoilPair
    source: SourceSpec
    load: LoadSpec
    tuning: TuningSpec
    freq_hz: float

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology.parse(self.topology))
        angular_frequency(self.freq_hz)
        if self.topology is Topology.SERIES_PARALLEL:
            _require(self.tuning.c2p is not None, "series-parallel topology requires c2p")
        else:
            _require(self.tuning.c2p is None, "series topology must not define c2p")

    @property
    def omega(self) -> float:
        return angular_frequency(self.freq_hz)

    @property
    def m(self) -> float:
        return mutual_inductance(self.coils.k, self.coils.l1, self.coils.l2)

    def params(self) -> dict:
        """Flat parameter dictionary, used in error reports and sweeps."""
        c = self.coils
        return {
            "topology": self.topology.value, "freq_hz": self.freq_hz, "l1": c.l1, "l2": c.l2,
            "r_l1": c.r_l1, "r_l2": c.r_l2, "k": c.k, "vs": self.source.vs, "rs": self.source.rs,
            "r_load": self.load.r_load, "c1s": self.tuning.c1s, "c2p": self.tuning.c2p,
        }

    def with_params(self, **changes) -> "LinkDesign":
        """Return a copy with flat fields replaced (``k=0.3, r_load=100`` ...)."""
        p = self.params()
        unknown = set(changes) - set(p)
        if unknown:
            raise DomainError(f"unknown design field(s): {sorted(unknown)}")
        p.update(changes)
        return make_design(**p, allow_unity_coupling=self.coils.allow_unity_coupling)


def make_design(*, topology, freq_hz, l1, l2, r_l1, r_l2, k, r_load, c1s, c2p=None,
                vs=1.0, rs=0.0, allow_unity_coupling=False) -> LinkDesign:
    """Build a :class:`LinkDesign` from flat keyword parameters."""
    return LinkDesign(
        topology=Topology.parse(topology),
        coils=CoilPair(l1, l2, r_l1, r_l2, k, allow_unity_coupling),
        source=SourceSpec(vs, rs),
        load=LoadSpec(r_load),
        tuning=TuningSpec(c1s, c2p),
        freq_hz=freq_hz,
    )


@dataclass(frozen=True)
class SolveResult:
    """One solved design point.

    ``efficiency`` is the real-part closed form (see module docstring);
    ``power_ratio`` is load real power over source real power from the mesh
    currents. The two agree whenever the secondary mesh is resonant.
    """

    gain: complex
    gain_mag: float
    efficiency: float
    i1: complex
    i2: complex
    v_load: complex
    m: float
    power_ratio: float

    @property
    def gain_phase_deg(self) -> float:
        return math.degrees(math.atan2(self.gain.imag, self.gain.real))


def mutual_inductance(k: float, l1: float, l2: float) -> float:
    """M = k·sqrt(L1·L2)."""
    if not _finite(k) or not 0 <= k <= 1:
        raise DomainError(f"coupling coefficient must lie in [0, 1], got {k!r}")
    if not (_finite(l1) and l1 > 0 and _finite(l2) and l2 > 0):
        raise DomainError(f"inductances must be > 0, got l1={l1!r}, l2={l2!r}")
    return k * math.sqrt(l1 * l2)


def _require_topology(design: LinkDesign, topology: Topology, op: str) -> None:
    if design.topology is not topology:
        raise UsageError(f"{op} applies to the {topology.value!r} topology, "
                         f"design is {design.topology.value!r}")


def branch_a(design: LinkDesign) -> complex:
    """Primary mesh impedance Rs + RL1 + jωL1 - j/(ωC1s)."""
    w = design.omega
    z_l1 = impedance_of_element("inductor", design.coils.l1, w)
    z_c1 = impedance_of_element("capacitor", design.tuning.c1s, w)
    return complex(design.source.rs + design.coils.r_l1, z_l1.imag + z_c1.imag)


def branch_b(design: LinkDesign) -> complex:
    """Secondary mesh impedance Rload + RL2 + jωL2 (series topology only)."""
    _require_topology(design, Topology.SERIES, "branch_b")
    w = design.omega
    return complex(design.load.r_load + design.coils.r_l2, w * design.coils.l2)


def _coupling_term(design: LinkDesign) -> tuple[float, float]:
    w = design.omega
    wm = w * design.m
    return wm, wm * wm


def gain_series(design: LinkDesign) -> complex:
    """Vload/Vs = jωM·Rload / (A·B + ω²M²)."""
    _require_topology(design, Topology.SERIES, "gain_series")
    a, b = branch_a(design), branch_b(design)
    wm, wm2 = _coupling_term(design)
    den = a * b + wm2
    if den == 0:
        raise SingularityError("A·B + ω²M² vanishes", design.params())
    return check_finite(1j * wm * design.load.r_load / den, "gain")


def efficiency_series(design: LinkDesign) -> float:
    """η = ω²M²·Rload / (Re[B]·(Re[A]·Re[B] + ω²M²))."""
    _require_topology(design, Topology.SERIES, "efficiency_series")
    re_a = branch_a(design).real
    re_b = branch_b(design).real
    _, wm2 = _coupling_term(design)
    inner = re_a * re_b + wm2
    if re_b == 0 or inner == 0:
        raise SingularityError("efficiency denominator vanishes", design.params())
    return wm2 * design.load.r_load / (re_b * inner)


def zload_parallel(r_load: float, c2p: float, w: float) -> complex:
    """Rload in parallel with C2p: (Rload - jωC2p·Rload²) / (1 + ω²C2p²Rload²)."""
    if not (_finite(r_load) and r_load > 0):
        raise DomainError(f"r_load must be > 0, got {r_load!r}")
    if not (_finite(c2p) and c2p >= 0):
        raise DomainError(f"c2p must be >= 0, got {c2p!r}")
    u = w * c2p * r_load
    den = 1.0 + u * u
    return complex(r_load / den, -u * r_load / den)


def _branch_c(design: LinkDesign, z_load: complex) -> complex:
    return z_load + complex(design.coils.r_l2, design.omega * design.coils.l2)


def _zload(design: LinkDesign) -> complex:
    return zload_parallel(design.load.r_load, design.tuning.c2p, design.omega)


def gain_sp(design: LinkDesign) -> complex:
    """Vload/Vs = jωM·Zload / (A·(Zload + jωL2 + RL2) + ω²M²)."""
    _require_topology(design, Topology.SERIES_PARALLEL, "gain_sp")
    a = branch_a(design)
    z = _zload(design)
    c = _branch_c(design, z)
    wm, wm2 = _coupling_term(design)
    den = a * c + wm2
    if den == 0:
        raise SingularityError("A·C + ω²M² vanishes", design.params())
    return check_finite(1j * wm * z / den, "gain")


def efficiency_sp(design: LinkDesign) -> float:
    """η = ω²M²·Re[Zload] / (Re[C]·(Re[A]·Re[C] + ω²M²)), Re[C] = Re[Zload] + RL2."""
    _require_topology(design, Topology.SERIES_PARALLEL, "efficiency_sp")
    re_a = branch_a(design).real
    re_z = _zload(design).real
    re_c = re_z + design.coils.r_l2
    _, wm2 = _coupling_term(design)
    inner = re_a * re_c + wm2
    if re_c == 0 or inner == 0:
        raise SingularityError("efficiency denominator vanishes", design.params())
    return wm2 * re_z / (re_c * inner)


def gain(design: LinkDesign) -> complex:
    if design.topology is Topology.SERIES:
        return gain_series(design)
    return gain_sp(design)


def efficiency(design: LinkDesign) -> float:
    if design.topology is Topology.SERIES:
        return efficiency_series(design)
    return efficiency_sp(design)


def load_impedance(design: LinkDesign) -> complex:
    """Impedance the secondary current I2 drives: Rload, or Rload || C2p."""
    if design.topology is Topology.SERIES:
        return complex(design.load.r_load, 0.0)
    return _zload(design)


def solve_link(design: LinkDesign) -> SolveResult:
    """Solve the two coupled meshes for I1, I2 and the load voltage."""
    a = branch_a(design)
    z_eff = load_impedance(design)
    c = _branch_c(design, z_eff)
    wm, _ = _coupling_term(design)
    zm = 1j * wm
    vs = design.source.vs
    # [[A, -jωM], [-jωM, C]] @ [I1, I2] = [Vs, 0], by Cramer's rule
    det = a * c - zm * zm
    if det == 0 or not math.isfinite(abs(det)):
        raise SingularityError("mesh matrix is singular", design.params())
    i1 = vs * c / det
    i2 = vs * zm / det
    v_load = i2 * z_eff
    g = v_load / vs

    p_in = 0.5 * (vs * i1.conjugate()).real
    p_load = 0.5 * abs(i2) ** 2 * z_eff.real
    power_ratio = p_load / p_in if p_in > 0 else 0.0

    return SolveResult(
        gain=g,
        gain_mag=abs(g),
        efficiency=efficiency(design),
        i1=i1,
        i2=i2,
        v_load=v_load,
        m=design.m,
        power_ratio=power_ratio,
    )


@dataclass(frozen=True)
class SafetyReport:
    passed: bool
    k: float
    threshold: float
    overridden: bool
    message: str

    def require(self) -> "SafetyReport":
        """Raise :class:`SafetyError` unless the design passed or was overridden."""
        if not self.passed and not self.overridden:
            raise SafetyError(self.message, self.k, self.threshold)
        return self


def validate_safety(design: LinkDesign, allow_unsafe: bool = False,
                    threshold: float = SAFETY_K_MAX) -> SafetyReport:
    """Check the coupling coefficient against the tissue-safety threshold (inclusive)."""
    k = design.coils.k
    passed = k <= threshold
    if passed:
        msg = f"k = {k:g} is within the tissue-safety limit k <= {threshold:g}"
    elif allow_unsafe:
        msg = f"k = {k:g} exceeds the tissue-safety limit k <= {threshold:g} (override accepted)"
    else:
        msg = (f"k = {k:g} exceeds the tissue-safety limit k <= {threshold:g}; "
               "pass allow_unsafe (--allow-unsafe) to evaluate it anyway")
    return SafetyReport(passed=passed, k=k, threshold=threshold,
                        overridden=allow_unsafe and not passed, message=msg)
