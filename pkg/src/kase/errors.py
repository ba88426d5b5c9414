"""Exception hierarchy shared by every layer of the toolkit."""


class KaseError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for this error."""

    exit_code = 1


class ParameterError(KaseError, ValueError):
    exit_code = 3


class DocumentIndexError(KaseError, IndexError):
    exit_code = 4


class ScopeError(KaseError):
    """A server was asked to act on a document outside the authorized set."""

    exit_code = 5


class ProtocolError(KaseError):
    exit_code = 6


class AidTimeout(ProtocolError):
    """The aid server's share batch never arrived; the search fails closed."""


class AuditFailure(KaseError):
    exit_code = 7

    def __init__(self, message, message_id=None):
        super().__init__(message)
        self.message_id = message_id


class FormatError(KaseError, ValueError):
    """Malformed encoding or file. ``field`` names the offending path."""

    exit_code = 8

    def __init__(self, message, field=None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class OracleViolation(KaseError):
    """A security-game adversary broke an oracle constraint."""
