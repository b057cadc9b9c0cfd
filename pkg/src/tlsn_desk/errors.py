"""Protocol abort types.

Domain errors (bad field input, malformed circuit) live next to the code that
raises them. The classes here are the protocol-level aborts that the harness
records in a session's abort report.
"""
from __future__ import annotations


class ProtocolAbort(Exception):
    """A party stopped the protocol because a check failed."""

    @property
    def cause(self) -> str:
        return type(self).__name__


class ChannelError(ProtocolAbort):
    pass


class PhaseError(ProtocolAbort):
    """An operation was attempted in the wrong protocol phase."""


class DecryptionFailure(ProtocolAbort):
    pass


class CommitmentMismatch(ProtocolAbort):
    pass


class CommitmentMalformed(ProtocolAbort):
    pass


class InauthenticLabels(ProtocolAbort):
    pass


class OtReplayMismatch(ProtocolAbort):
    pass


class RegarbleMismatch(ProtocolAbort):
    pass


class CheckMismatch(ProtocolAbort):
    pass


class CommitmentOpenFailure(ProtocolAbort):
    pass


class ZeroInputDetected(ProtocolAbort):
    pass


class ZeroSum(ProtocolAbort):
    """The shared value is zero and has no multiplicative sharing."""


class PointCollision(ProtocolAbort):
    pass


class EqualityCheckFailed(ProtocolAbort):
    pass


class MacMismatch(ProtocolAbort):
    pass


class ConsistencyRejected(ProtocolAbort):
    pass


class ServerAuthFailure(ProtocolAbort):
    """The server's key share signature did not verify."""


class HeaderRejected(ProtocolAbort):
    """The signed session header does not match what the Client committed to."""
