"""Complex impedance algebra.

Complex values are plain Python ``complex``; angular frequencies are floats in
rad/s. Frequencies enter in hertz at the boundaries and are converted once by
:func:`angular_frequency`.
"""

import math

from .errors import DomainError, SingularityError

ELEMENT_KINDS = ("resistor", "inductor", "capacitor")


def angular_frequency(freq_hz: float) -> float:
    """Return ω = 2πf in rad/s; ``freq_hz`` must be finite and positive."""
    if not math.isfinite(freq_hz) or freq_hz <= 0:
        raise DomainError(f"frequency must be finite and > 0 Hz, got {freq_hz!r}")
    return 2.0 * math.pi * freq_hz


def check_finite(z: complex, what: str = "value") -> complex:
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"{what} is not finite: {z!r}")
    return z


def impedance_of_element(kind: str, value: float, w: float) -> complex:
    """Impedance of an ideal R, L or C at angular frequency ``w``.

    The capacitor term is formed analytically as -j/(ωC) rather than through
    complex division.
    """
    if kind not in ELEMENT_KINDS:
        raise DomainError(f"unknown element kind {kind!r}; expected one of {ELEMENT_KINDS}")
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{kind} value must be finite and > 0, got {value!r}")
    if not math.isfinite(w) or w < 0:
        raise DomainError(f"angular frequency must be finite and >= 0, got {w!r}")
    if kind == "resistor":
        return complex(value, 0.0)
    if kind == "inductor":
        return complex(0.0, w * value)
    if w == 0:
        raise DomainError("capacitor impedance is undefined at zero frequency")
    return check_finite(complex(0.0, -1.0 / (w * value)), "capacitor impedance")


def combine(mode: str, a: complex, b: complex) -> complex:
    """Series (a + b) or parallel (ab / (a + b)) combination of two impedances."""
    if mode == "series":
        return a + b
    if mode == "parallel":
        total = a + b
        if total == 0:
            raise SingularityError("degenerate parallel combination (a + b = 0)", {"a": a, "b": b})
        return check_finite(a * b / total, "parallel impedance")
    raise DomainError(f"unknown combination mode {mode!r}; expected 'series' or 'parallel'")
