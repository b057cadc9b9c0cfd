"""Session simulator, adversary scripts, privacy audits and the CLI."""
from .adversary import AdversaryScript, Mutation, drop, flip, reorder, replace
from .audit import AuditReport, client_pre_reveal, notary_blindness, run_audits
from .catalog import CATALOG, AbortCase, run_catalog
from .server import mock_server
from .session import SessionConfig, SessionResult, inject_adversary, run_session, transcript_digest

__all__ = [
    "AdversaryScript", "Mutation", "flip", "replace", "drop", "reorder",
    "AuditReport", "notary_blindness", "client_pre_reveal", "run_audits",
    "CATALOG", "AbortCase", "run_catalog", "mock_server",
    "SessionConfig", "SessionResult", "run_session", "inject_adversary", "transcript_digest",
]
