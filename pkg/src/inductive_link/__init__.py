"""Tuned inductive power links for implanted devices.

Closed-form gain and efficiency for a series-tuned primary with either a plain
or a parallel-tuned secondary, an independent MNA circuit solver to check them,
parameter sweeps, capacitor tuning and constrained optimization.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    LinkError,
    NetlistError,
    NoSolutionError,
    SafetyError,
    SingularityError,
    UsageError,
)
from .link import (
    SAFETY_K_MAX,
    CoilPair,
    LinkDesign,
    LoadSpec,
    SolveResult,
    SourceSpec,
    Topology,
    TuningSpec,
    make_design,
    solve_link,
    validate_safety,
)
from .presets import TABLE1, table1_design
