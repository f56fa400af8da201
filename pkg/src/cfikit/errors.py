"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`CfiError`,
so callers can catch one type at the boundary. The CLI maps subtrees to exit
codes: input/usage problems exit 1, model and bridge failures exit 2.
"""


class CfiError(Exception):
    """Base class for all errors raised by cfikit."""


class LengthMismatchError(CfiError):
    """Factual and counterfactual instances have different lengths."""


class EmptyDeltaError(CfiError):
    """The two instances are identical: there is no change to explain."""


class IndexOutOfRangeError(CfiError):
    """A feature index exceeds the instance length."""


class IndexNotInDeltaError(CfiError):
    """A feature index is not part of the change set."""


class DeltaTooLargeError(CfiError):
    """The change set exceeds the configured size cap."""


class ParseError(CfiError):
    """Malformed input file (instance, model, style, or report)."""


class ArityMismatchError(CfiError):
    """An instance does not fit the model (wrong length or unscorable value)."""


class TableDomainError(ArityMismatchError):
    """A table model was asked to score an instance outside its declared pair."""


class ScoreOutOfRangeError(CfiError):
    """A model produced a score outside [0, 1] or a non-finite value."""


class SpawnError(CfiError):
    """An external scoring process could not be started."""


class BridgeError(CfiError):
    """The external scoring process violated the wire protocol or reported failure."""


class HandshakeError(BridgeError):
    """The external scoring process did not complete the hello/ready handshake."""


class BridgeTimeoutError(BridgeError):
    """The external scoring process did not answer within the configured timeout."""


class DegenerateSumError(CfiError):
    """Importance values sum to ~0, so percentage shares are undefined."""
