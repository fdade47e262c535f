"""Exception hierarchy for tccp.

Parse problems and numeric failures are kept apart so the CLI can map them to
distinct exit codes.
"""

from typing import Optional


class TccpError(Exception):
    """Base class for every error raised by tccp."""


class NetlistError(TccpError, ValueError):
    """Malformed or invalid netlist.

    Attributes:
        line: 1-based line number, or None for network-level problems
        column: 1-based column of the offending token, or None
    """

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        self.reason = message
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{where}: {message}"
        super().__init__(message)


class NumericError(TccpError, ArithmeticError):
    """Base class for numeric failures."""


class DegenerateNetworkError(NumericError):
    """Singular or non positive definite capacitance matrix."""

    def __init__(self, message: str, node: Optional[str] = None):
        self.node = node
        if node is not None:
            message = f"{message} (node {node})"
        super().__init__(message)


class ZeroJunctionError(NumericError):
    """Both SQUID junctions have zero Josephson energy."""


class BracketError(NumericError):
    """A bracketed root search has no sign change or no solution."""


class ResonanceError(NumericError):
    """A perturbative denominator vanished (qubit-coupler resonance)."""


class LabelAmbiguityError(NumericError):
    """A bare-state label could not be assigned to a unique eigenvector."""


class CutoffError(NumericError):
    """Basis truncation too small for the requested accuracy."""


class NonUnitaryError(NumericError):
    """A matrix expected to be unitary is not."""


class ScheduleError(NumericError):
    """Invalid pulse schedule or time step."""


class LeakageError(NumericError):
    """Population left the computational subspace beyond the allowed bound."""


class FitError(NumericError):
    """A spectral fit failed (no interior minimum, no peak)."""
