"""Transcript privacy audits.

Each audit takes a finished SessionResult and scans one party's view for
values that party must never see. Payloads are decoded and every scalar
leaf is compared against several canonical encodings of each secret (int,
hex in both byte orders, bit string). Long secrets are also searched as
substrings of the raw frames, which catches values packed inside larger
blobs. Short secrets are compared by equality only, since a 16-bit pattern
turns up inside random label blobs by chance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

from ..algebra import get_curve
from ..circuits.core import int_to_bits
from ..wire import bits_out

SUBSTRING_MIN = 16  # bytes


@dataclass
class Finding:
    party: str
    type: str
    seq: int
    secret: str


@dataclass
class AuditReport:
    name: str
    findings: list[Finding] = field(default_factory=list)
    frames: int = 0
    secrets: int = 0

    @property
    def ok(self) -> bool:
        return not self.findings


def _leaves(obj: Any) -> Iterable:
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _leaves(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _leaves(v)
    else:
        yield obj


def int_encodings(v: int, bits: int) -> set:
    n = (bits + 7) // 8
    out = {v, f"{v:x}", v.to_bytes(n, "big").hex(), v.to_bytes(n, "little").hex(),
           bits_out(int_to_bits(v, bits)), bits_out(int_to_bits(v, bits)[::-1])}
    return {x for x in out if not isinstance(x, str) or x}


def bytes_encodings(b: bytes) -> set:
    return {b.hex(), b.decode("latin-1")}


@dataclass
class Secret:
    label: str
    leaves: set
    raw: list[bytes] = field(default_factory=list)  # substring patterns


def int_secret(label: str, v: int, bits: int) -> Secret:
    raw = []
    if bits >= 8 * SUBSTRING_MIN:
        n = (bits + 7) // 8
        raw = [v.to_bytes(n, "big").hex().encode(), v.to_bytes(n, "little").hex().encode()]
    return Secret(label, int_encodings(v, bits), raw)


def bytes_secret(label: str, b: bytes) -> Secret:
    raw = [b, b.hex().encode()] if len(b) >= SUBSTRING_MIN else []
    return Secret(label, bytes_encodings(b), raw)


def bits_secret(label: str, bits: list[int]) -> Secret:
    s = bits_out(bits)
    return Secret(label, {s}, [s.encode()] if len(bits) >= 8 * SUBSTRING_MIN else [])


def scan(name: str, transcript, party: str, secrets: list[Secret], phases: set[str] | None = None,
         forbidden_types: Iterable[str] = ()) -> AuditReport:
    rep = AuditReport(name, secrets=len(secrets))
    forbidden_types = set(forbidden_types)
    for _, msg in transcript.view(party):
        if phases is not None and msg.phase not in phases:
            continue
        rep.frames += 1
        if msg.type in forbidden_types:
            rep.findings.append(Finding(party, msg.type, msg.seq, f"frame type {msg.type}"))
        leaves = set()
        for x in _leaves(msg.decoded()):
            leaves.add(x.lower() if isinstance(x, str) else x)
        for s in secrets:
            if any(x in s.leaves for x in leaves if not isinstance(x, bool)) or any(p in msg.payload for p in s.raw):
                rep.findings.append(Finding(party, msg.type, msg.seq, s.label))
    return rep


def _blocks(data: bytes) -> list[bytes]:
    return [data[i : i + 2] for i in range(0, len(data), 2)]


def notary_blindness(result) -> AuditReport:
    """The Notary's whole view holds no plaintext and no Client key material."""
    c = result.client
    secrets = []
    for d, data in c.record.transcripts.items():
        if data:
            secrets.append(bytes_secret(f"plaintext[{d}]", bytes(data)))
    secrets.append(int_secret("client key share (sent)", c.keys.sent, 32))
    secrets.append(int_secret("client key share (recv)", c.keys.recv, 32))
    k_sent, k_recv = result.server.keys
    secrets.append(int_secret("session key (sent)", k_sent, 32))
    secrets.append(int_secret("session key (recv)", k_recv, 32))
    bits = get_curve(result.config.curve).p.bit_length()
    if bits >= 32:  # toy-curve values are 16 bits: equality with OLE traffic is a coin flip
        secrets.append(int_secret("client PMS share", c.handshake.pms_share.value, bits))
        secrets.append(int_secret("PMS", result.server.pms, bits))
        secrets.append(int_secret("client ECDH secret", c.handshake.C_sk, bits))
    for pend in c.record.pending:
        if pend.kind in ("enc", "dec"):
            secrets.append(bits_secret(f"client DEAP input {pend.state.tag}", pend.state.x))
    rep = scan("notary blindness", result.transcript, "notary", secrets, forbidden_types={"plaintext"})
    # exact-frame check for plaintext blocks
    blocks = {b for data in c.record.transcripts.values() for b in _blocks(bytes(data))}
    for _, msg in result.transcript.view("notary"):
        if msg.payload in blocks:
            rep.findings.append(Finding("notary", msg.type, msg.seq, "frame equals a plaintext block"))
    return rep


def client_pre_reveal(result) -> AuditReport:
    """Before the reveal phase the Client sees no Notary private input x_N."""
    n = result.notary
    secrets = [int_secret("notary key share (sent)", n.keys.sent, 32),
               int_secret("notary key share (recv)", n.keys.recv, 32),
               bytes_secret("encoder seed", n.record.encoder.seed)]
    states = [n.key_schedule] + list(n.record.pending)
    for st in states:
        if len(st.x) >= 32:
            secrets.append(bits_secret(f"x_N of {st.tag}", st.x))
    bits = get_curve(result.config.curve).p.bit_length()
    if bits >= 32:
        secrets.append(int_secret("notary PMS share", n.handshake.pms_share.value, bits))
        secrets.append(int_secret("notary ECDH secret", n.handshake.N_sk, bits))
    return scan("client pre-reveal", result.transcript, "client", secrets, phases={"handshake", "record"})


def run_audits(result) -> list[AuditReport]:
    return [notary_blindness(result), client_pre_reveal(result)]
