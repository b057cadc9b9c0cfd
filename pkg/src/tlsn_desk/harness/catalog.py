"""Shipped abort catalog: each case is a mutation or a cheating party plus the
abort it must produce.

``phase`` is the session phase the aborting party was in. ``stage`` says which
protocol step is meant to catch the deviation, for the report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .adversary import AdversaryScript, Mutation, drop, flip, reorder, replace
from .session import SessionConfig, SessionResult, run_session


@dataclass
class AbortCase:
    name: str
    stage: str
    party: str
    phase: str
    cause: str
    script: Callable[[], list[Mutation]] = list
    deviations: dict = field(default_factory=dict)

    def run(self, base: SessionConfig | None = None) -> "CaseOutcome":
        base = base or SessionConfig()
        cfg = SessionConfig(**{**base.__dict__, "deviations": self.deviations})
        muts = self.script()
        res = run_session(cfg, AdversaryScript(muts) if muts else None)
        return CaseOutcome(self, res)


@dataclass
class CaseOutcome:
    case: AbortCase
    result: SessionResult

    @property
    def observed(self) -> tuple | None:
        a = self.result.abort
        return None if a is None else (a.party, a.phase, a.cause)

    @property
    def passed(self) -> bool:
        return self.observed == (self.case.party, self.case.phase, self.case.cause)

    def line(self) -> str:
        want = f"{self.case.party}/{self.case.phase}/{self.case.cause}"
        got = "no abort" if self.observed is None else "/".join(self.observed)
        return f"{'ok  ' if self.passed else 'FAIL'} {self.case.name}: expected {want}, got {got}"


CATALOG: list[AbortCase] = [
    AbortCase("flip output commitment", "DEAP execution: Notary checks G_C outputs against com_{e_C(v)}",
              "notary", "handshake", "CommitmentMismatch", lambda: [replace("ks.gc", "ab" * 64, "com.0")]),
    AbortCase("flip [v]_C in transit", "DEAP execution: Client authenticates [v]_C",
              "client", "handshake", "InauthenticLabels", lambda: [flip("ks.vc", "labels", 9)]),
    AbortCase("Notary garbles a different function", "DEAP equality check: Client re-garbles G_N",
              "client", "reveal", "RegarbleMismatch", deviations={"notary": ["deap_wrong_function@enc"]}),
    AbortCase("garbled table altered in transit", "DEAP equality check: Client re-garbles G_N",
              "client", "reveal", "RegarbleMismatch", lambda: [flip("enc0.0.gn", "F", 700)]),
    AbortCase("Notary substitutes an OT message", "DEAP equality check: Client replays the committed OT",
              "client", "reveal", "OtReplayMismatch", deviations={"notary": ["deap_ot_substitute@enc"]}),
    AbortCase("server ciphertext tampered", "MAC-first: tag checked before any decryption",
              "client", "record", "MacMismatch", lambda: [flip("tls", "ct", 0, sender="server")]),
    AbortCase("client ciphertext tampered", "server verifies the 2PC-made tag",
              "server", "record", "MacMismatch", lambda: [flip("tls", "ct", 0, sender="client")]),
    AbortCase("Client feeds zero into OLE", "zero-input check on the OLE receiver",
              "notary", "handshake", "ZeroInputDetected", deviations={"client": ["m2a_zero_input"]}),
    AbortCase("Notary feeds zero into OLE", "zero-input check on the OLE receiver",
              "client", "handshake", "ZeroInputDetected", deviations={"notary": ["m2a_zero_input"]}),
    AbortCase("m2a perturbed in the second run", "handshake dual-run equality",
              "client", "handshake", "EqualityCheckFailed", deviations={"client": ["m2a_perturb_run2"]}),
    AbortCase("Client opens a wrong check value", "DEAP equality check: Notary opens com(check_C)",
              "notary", "reveal", "CommitmentOpenFailure", deviations={"client": ["deap_flip_check@ks"]}),
    AbortCase("Client uses inconsistent inputs", "DEAP equality check: check_C != check_N",
              "notary", "reveal", "CheckMismatch", deviations={"client": ["deap_inconsistent_input@enc"]}),
    AbortCase("Client commits to wrong plaintext labels", "consistency proof opening",
              "notary", "reveal", "ConsistencyRejected", deviations={"client": ["consistency_wrong_plaintext"]}),
    AbortCase("server signature tampered", "server authentication",
              "client", "handshake", "ServerAuthFailure", lambda: [flip("server_pubkey", "sig", 1, sender="server")]),
    AbortCase("header signature tampered", "Client checks the signed header",
              "client", "notarize", "HeaderRejected", lambda: [flip("header", "header.signature", 1)]),
    AbortCase("message dropped", "transport", "client", "record", "ChannelError", lambda: [drop("encoder.com")]),
    AbortCase("message reordered", "transport", "client", "handshake", "ChannelError", lambda: [reorder("ks.gn")]),
]


def run_catalog(base: SessionConfig | None = None) -> list[CaseOutcome]:
    base = base or SessionConfig(request=b"GET /x", response=b"HTTP 200 ok")
    return [case.run(base) for case in CATALOG]
