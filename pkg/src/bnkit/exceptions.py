"""Exception types raised across bnkit.

Every domain error derives from :class:`BnError` so callers (and the CLI)
can separate modelling failures from programming errors.
"""

from __future__ import annotations

from dataclasses import dataclass


class BnError(Exception):
    """Base class for all domain errors."""


class InvalidModel(BnError, ValueError):
    """A graph, factor, CPD or network violates its construction invariants."""


class CycleDetected(InvalidModel):
    """``nodes`` lists the variables left on or behind a directed cycle."""

    def __init__(self, message, nodes=()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class UnknownVariable(BnError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class CardinalityMismatch(InvalidModel):
    pass


class StateOutOfRange(BnError, ValueError):
    pass


class ZeroMass(BnError, ValueError):
    """A factor with zero total mass was normalized."""


class ImpossibleEvidence(ZeroMass):
    """The evidence has probability zero under the model."""


class StateSpaceTooLarge(BnError, ValueError):
    pass


class NotExtendable(BnError, ValueError):
    """A partially directed graph admits no consistent DAG extension."""


class InsufficientData(BnError, ValueError):
    pass


class InvalidAlpha(BnError, ValueError):
    pass


class InvalidConstraints(BnError, ValueError):
    pass


class MissingDataPresent(BnError, ValueError):
    def __init__(self, message=None):
        super().__init__(
            message
            or "data contains missing values; use em_fit (CLI: --method em) instead"
        )


class InvalidPrior(BnError, ValueError):
    pass


class NoObservedData(BnError, ValueError):
    pass


class InvalidFixedOrder(BnError, ValueError):
    pass


class NotCalibrated(BnError, RuntimeError):
    pass


class IncompatibleSpec(BnError, ValueError):
    pass


class NoDirectedEdge(BnError, ValueError):
    pass


class DisconnectedWeights(BnError, ValueError):
    pass


class LogZero(BnError, ValueError):
    """Some rows have probability zero under the model."""

    def __init__(self, rows):
        self.rows = list(rows)
        shown = ", ".join(str(r) for r in self.rows[:10])
        more = "" if len(self.rows) <= 10 else f" (+{len(self.rows) - 10} more)"
        super().__init__(f"rows with zero model probability: {shown}{more}")


class ImpossibleStratumWarning(UserWarning):
    """An adjustment stratum had zero probability and was skipped."""


# -- data ingestion ----------------------------------------------------------


class _Located(BnError, ValueError):
    """Data error that may know its 1-based input line."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class RaggedRow(_Located):
    pass


class UnknownState(_Located):
    pass


class NegativeWeight(_Located):
    pass


# -- parsing -----------------------------------------------------------------


@dataclass(frozen=True)
class ParseDiagnostic:
    """A positioned parser message. ``line`` and ``column`` are 1-based."""

    line: int
    column: int
    message: str
    severity: str = "error"

    def to_dict(self):
        return {
            "line": self.line,
            "column": self.column,
            "message": self.message,
            "severity": self.severity,
        }

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class ParseError(BnError, ValueError):
    """Grammar violation. Always carries a positioned diagnostic."""

    def __init__(self, diagnostic: ParseDiagnostic, warnings=()):
        self.diagnostic = diagnostic
        self.warnings = list(warnings)
        super().__init__(str(diagnostic))

    @property
    def line(self):
        return self.diagnostic.line

    @property
    def column(self):
        return self.diagnostic.column


class SemanticError(ParseError):
    """Well-formed text describing an invalid model."""


class NotBayes(ParseError):
    """A UAI file declares a Markov network instead of a Bayesian network."""
