"""Exception hierarchy for the toolkit.

Every error raised on bad user input derives from PTSError so the CLI can
map it to exit code 1; assertion-style property failures use exit code 2 and
are not exceptions of this hierarchy.
"""


class PTSError(Exception):
    """Base class for all toolkit errors."""


class RationalSyntaxError(PTSError):
    """A rational literal is not of the form 'num' or 'num/den'."""


class RangeError(PTSError):
    """A rational value lies outside its required interval."""


class WeightSumError(PTSError):
    """Distribution weights do not sum to exactly one."""


class DanglingStateError(PTSError):
    """A transition references an unknown state."""


class AtomMismatchError(PTSError):
    """Systems being combined or compared declare different atom lists."""


class DuplicateLabelError(PTSError):
    """Two states of one system share a label."""


class ParameterError(PTSError):
    """A generator or operation parameter is out of range."""


class SystemFormatError(PTSError):
    """A system JSON document is malformed; message carries the JSON path."""


class FormulaSyntaxError(PTSError):
    """Concrete formula syntax error; message carries the position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnknownAtomError(PTSError):
    """A formula uses an atom the system does not declare."""


class UnboundVariableError(PTSError):
    """A first-order formula is evaluated with a free variable unbound."""


class RankViolationError(PTSError):
    """A formula exceeds the modal rank bound of the operation."""


class LengthMismatchError(PTSError):
    """Paired state tuples have different lengths."""


class NonExpansiveError(PTSError):
    """A state function violates its non-expansivity bound."""


class SlackTooSmallError(PTSError):
    """A synthesis slack budget is zero or negative."""


class NotWinnableError(PTSError):
    """The duplicator cannot win the requested game configuration."""


class CertificateFormatError(PTSError):
    """A strategy certificate document is malformed."""


class LPError(PTSError):
    """Internal linear programming failure (infeasible or unbounded)."""
