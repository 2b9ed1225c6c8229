"""Exception hierarchy shared by all modules."""


class LinkError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LinkError, ValueError):
    """A value violates a physical or type invariant."""


class SingularityError(LinkError, ArithmeticError):
    """A denominator or system matrix is degenerate.

    ``params`` carries the parameter set that produced the degeneracy so the
    caller can report it.
    """

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = dict(params or {})

    def __str__(self):
        base = super().__str__()
        if not self.params:
            return base
        detail = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{base} [{detail}]"


class UsageError(LinkError, ValueError):
    """An operation was called on a design it does not apply to."""


class SafetyError(DomainError):
    """Coupling coefficient above the tissue-safety threshold."""

    def __init__(self, message, k, threshold):
        super().__init__(message)
        self.k = k
        self.threshold = threshold


class NetlistError(LinkError, ValueError):
    """Malformed netlist text or structure; ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class NoSolutionError(LinkError):
    """An optimization problem has no feasible point."""
