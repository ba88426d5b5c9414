"""Key-aggregate searchable encryption on BLS12-381.

Two constructions share Setup, KeyGen, Encrypt and Extract
(:mod:`kase.scheme`): a single-server one (:mod:`kase.first`) and a
two-server one whose trapdoor blinding scalar is split between a main and
an aid server (:mod:`kase.main_scheme`, run by :mod:`kase.harness`).
"""

from .errors import (
    AidTimeout,
    AuditFailure,
    DocumentIndexError,
    FormatError,
    KaseError,
    OracleViolation,
    ParameterError,
    ProtocolError,
    ScopeError,
)
from .first import TrapdoorFirst
from .main_scheme import TrapdoorBundle, search_document, trapdoor_main
from .scheme import (
    AggregateKey,
    EncryptedKeyword,
    PublicParams,
    SecretKey,
    encrypt,
    extract,
    keygen,
    setup,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateKey", "AidTimeout", "AuditFailure", "DocumentIndexError", "EncryptedKeyword",
    "FormatError", "KaseError", "OracleViolation", "ParameterError", "ProtocolError",
    "PublicParams", "ScopeError", "SecretKey", "TrapdoorBundle", "TrapdoorFirst",
    "encrypt", "extract", "keygen", "search_document", "setup", "trapdoor_main",
]
