"""One-variable parameter sweeps with optional curve families, and CSV export."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, LinkError
from .link import SAFETY_K_MAX, LinkDesign, Topology, solve_link
from .presets import table1_design

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("k", "r_load", "freq_hz")
R_LOAD_FLOOR = 1e-6
CSV_HEADER = ("curve", "swept_var", "value", "gain_mag", "gain_phase_deg",
              "efficiency", "i1_mag", "i2_mag", "vload_mag")


@dataclass(frozen=True)
class SweepSpec:
    base: LinkDesign
    variable: str
    start: float
    stop: float
    steps: int
    family: Optional[tuple] = None
    family_variable: str = "k"
    label: str = ""

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise DomainError(f"cannot sweep {self.variable!r}; choose from {SWEEP_VARIABLES}")
        if self.family is not None and (self.family_variable not in SWEEP_VARIABLES
                                        or self.family_variable == self.variable):
            raise DomainError(f"invalid family variable {self.family_variable!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop) and self.start < self.stop):
            raise DomainError(f"sweep needs finite start < stop, got {self.start!r}..{self.stop!r}")
        if int(self.steps) != self.steps or self.steps < 2:
            raise DomainError(f"steps must be an integer >= 2, got {self.steps!r}")
        if self.family is not None:
            fam = tuple(sorted(float(v) for v in self.family))
            if not fam:
                raise DomainError("family must not be empty")
            object.__setattr__(self, "family", fam)

    def grid(self) -> np.ndarray:
        values = np.linspace(self.start, self.stop, int(self.steps))
        if self.variable == "r_load":
            values = np.maximum(values, R_LOAD_FLOOR)
        return values


@dataclass(frozen=True)
class SweepRow:
    curve: str
    swept_var: str
    value: float
    gain_mag: float
    gain_phase_deg: float
    efficiency: float
    i1_mag: float
    i2_mag: float
    vload_mag: float
    error: Optional[str] = None


@dataclass
class SweepTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def curves(self) -> list:
        out = []
        for r in self.rows:
            if r.curve not in out:
                out.append(r.curve)
        return out

    def column(self, name: str, curve: Optional[str] = None) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows if curve is None or r.curve == curve])

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(self, buf)
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return repr(float(x))


def write_csv(table: SweepTable, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in table.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_HEADER])


def _curve_label(var: str, value: float) -> str:
    return f"{var}={value:g}"


def _point(design: LinkDesign, curve: str, var: str, value: float) -> SweepRow:
    try:
        res = solve_link(design.with_params(**{var: float(value)}))
    except LinkError as exc:
        log.warning("sweep point %s %s=%g failed: %s", curve, var, value, exc)
        nan = math.nan
        return SweepRow(curve, var, float(value), nan, nan, nan, nan, nan, nan, error=str(exc))
    return SweepRow(curve, var, float(value), res.gain_mag, res.gain_phase_deg, res.efficiency,
                    abs(res.i1), abs(res.i2), abs(res.v_load))


def run_sweep(spec: SweepSpec) -> SweepTable:
    """Evaluate every grid point of every curve.

    Rows come out ordered by curve (ascending family value) then swept value.
    A point that fails becomes a NaN row with its ``error`` set; the sweep
    continues.
    """
    values = spec.grid()
    if spec.family is None:
        curves = [("base", spec.base)]
    else:
        curves = []
        for fv in spec.family:
            try:
                curves.append((_curve_label(spec.family_variable, fv),
                               spec.base.with_params(**{spec.family_variable: fv})))
            except LinkError as exc:
                raise DomainError(f"family value {spec.family_variable}={fv:g} is invalid: {exc}") from None

    rows = []
    unsafe = []
    for label, design in curves:
        k_values = values if spec.variable == "k" else [design.coils.k]
        if max(k_values) > SAFETY_K_MAX:
            unsafe.append(label)
        rows.extend(_point(design, label, spec.variable, v) for v in values)

    meta = {
        "label": spec.label,
        "topology": spec.base.topology.value,
        "variable": spec.variable,
        "steps": int(spec.steps),
        "unsafe_curves": unsafe,
        "safety_threshold": SAFETY_K_MAX,
        "errors": sum(r.error is not None for r in rows),
    }
    return SweepTable(rows, meta)


FIGURES = {
    "fig7": (Topology.SERIES, "voltage gain, series-tuned primary"),
    "fig8": (Topology.SERIES, "link efficiency, series-tuned primary"),
    "fig9": (Topology.SERIES_PARALLEL, "voltage gain, series primary / parallel secondary"),
    "fig10": (Topology.SERIES_PARALLEL, "link efficiency, series primary / parallel secondary"),
}
FIGURE_FAMILY = (0.2, 0.4, 0.6, 0.8)


def figure_preset(which: str) -> SweepSpec:
    """Reference-figure sweep: Rload 1..400 ohm in 400 steps, one curve per k.

    Capacitors are tuned once on the reference design (Rload = 320 ohm) and
    held fixed along the sweep.
    """
    key = which.lower()
    if key not in FIGURES:
        raise DomainError(f"unknown figure {which!r}; choose from {sorted(FIGURES)}")
    topology, label = FIGURES[key]
    base = table1_design(topology)
    return SweepSpec(base=base, variable="r_load", start=1.0, stop=400.0, steps=400,
                     family=FIGURE_FAMILY, family_variable="k", label=f"{key}: {label}")
