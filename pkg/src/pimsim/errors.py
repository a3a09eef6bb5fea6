"""Exception hierarchy shared across the simulator.

The CLI maps these onto exit codes: configuration problems exit 1,
oracle mismatches exit 2, and I/O failures exit 3.
"""


class PimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(PimError):
    """Invalid geometry, parameters, or run configuration."""


class ProtocolError(PimError):
    """A DRAM command was issued in a state where it is illegal."""


class RoleError(PimError):
    """A command touched a row whose role forbids it (e.g. triple
    activation of a data row, or overwriting a control row)."""


class CompileError(PimError):
    """Operation cannot be compiled for the given operands."""


class PlacementError(PimError):
    """Bulk vector placements are unsupported or misaligned."""


class GraphInputError(PimError):
    """Malformed graph input (out-of-range vertex, bad edge line)."""


class QueueFullError(PimError):
    """Backpressure: a vault message queue is at capacity; the caller
    must drain via a barrier before sending more."""


class HandlerFaultError(PimError):
    """A message handler faulted; carries vault id, handler id, and the
    message index within the current drain."""

    def __init__(self, vault: int, handler: str, index: int, reason: str):
        self.vault = vault
        self.handler = handler
        self.index = index
        self.reason = reason
        super().__init__(
            f"handler fault in vault {vault}: handler={handler!r} "
            f"message_index={index}: {reason}"
        )


class OracleMismatchError(PimError):
    """Engine output disagreed with the built-in oracle; carries the
    first differing index."""

    def __init__(self, what: str, index: int, expected, actual):
        self.what = what
        self.index = index
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"oracle mismatch in {what} at index {index}: "
            f"expected {expected!r}, got {actual!r}"
        )
