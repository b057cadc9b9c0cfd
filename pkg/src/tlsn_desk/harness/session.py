"""Whole-session orchestration: handshake, records, reveal, notarization.

Three party programs share one Network: the Client talks to the mock server
on one link and to the Notary on another; the Notary and the server never
talk. Phases, in order:

    handshake  3-party ECDH with dual-run share conversion, then the 2PC key schedule
    record     one request encrypted in 2PC, one response MAC-checked then decrypted
    reveal     after the TLS connection closes: encoder seed opening, every DEAP
               equality check, consistency openings
    notarize   the Notary signs the Merkle root of the Client's byte commitments

Redaction happens locally on the Client afterwards. Every message is a
PartyMessage tagged with the sender's phase; frames are length-prefixed and
payloads are canonical JSON (sorted keys, no whitespace, binary as hex).
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from ..algebra import get_curve
from ..commit import commit_payload
from ..errors import HeaderRejected
from ..handshake3p import (ServerIdentity, client_handshake, key_schedule_client, key_schedule_notary,
                           notary_handshake)
from ..notarize import (RECV, SENT, Attestation, Ed25519Signer, MerkleTree, ServerIdentityOpening, SessionHeader,
                        TranscriptDraft, build_session_header, byte_commitment, leaf_hash, redact, verify_header)
from ..record import (PROFILE, RecordClient, RecordNotary, client_decrypt_record, client_encrypt_record,
                      client_reveal, notary_decrypt_record, notary_encrypt_record, notary_reveal)
from ..transport import AbortReport, Network, PartyCtx, Transcript, run_programs
from .adversary import AdversaryScript
from .server import ServerLog, mock_server, tag_in, tag_out

PARTIES = ("client", "notary", "server")
DEFAULT_REQUEST = b"GET /account HTTP/1.1\r\nHost: bank.example\r\n\r\n"
DEFAULT_RESPONSE = b'HTTP/1.1 200 OK\r\n\r\n{"name":"alice","balance":1234}'


@dataclass
class SessionConfig:
    request: bytes = DEFAULT_REQUEST
    response: bytes = DEFAULT_RESPONSE
    curve: str = "toy"
    profile: str = PROFILE
    seed: int = 0
    seeds: tuple | None = None  # explicit (client, notary, server) seeds override ``seed``
    redact: list = field(default_factory=list)  # (dir, start, end) or (start, end) for sent
    time: int = 1_700_000_000
    notary_key_seed: str = "desk-notary"
    deviations: dict = field(default_factory=dict)  # party -> iterable of deviation names
    forced_nsk: int | None = None
    scheduler: str = "sequential"

    def party_seeds(self) -> tuple:
        if self.seeds is not None:
            return tuple(self.seeds)
        return tuple(f"{self.seed}:{p}" for p in PARTIES)

    @classmethod
    def from_json(cls, d: dict) -> "SessionConfig":
        known = {k: d[k] for k in ("curve", "profile", "seed", "time", "notary_key_seed", "scheduler") if k in d}
        cfg = cls(**known)
        if "request" in d:
            cfg.request = bytes.fromhex(d["request"])
        if "response" in d:
            cfg.response = bytes.fromhex(d["response"])
        if "seeds" in d:
            cfg.seeds = tuple(d["seeds"])
        if "redact" in d:
            cfg.redact = [tuple(r) for r in d["redact"]]
        if cfg.profile != PROFILE:
            raise ValueError(f"unsupported cipher profile {cfg.profile!r}")
        return cfg

    def to_json(self) -> dict:
        d = {"curve": self.curve, "profile": self.profile, "seed": self.seed, "time": self.time,
             "request": self.request.hex(), "response": self.response.hex(), "redact": [list(r) for r in self.redact],
             "notary_key_seed": self.notary_key_seed}
        if self.seeds is not None:
            d["seeds"] = list(self.seeds)
        return d


@dataclass
class SessionResult:
    config: SessionConfig
    transcript: Transcript
    aborts: list[AbortReport]
    attestation: Attestation | None = None
    draft: TranscriptDraft | None = None
    notary_key: bytes = b""
    client: Any = None
    notary: Any = None
    server: ServerLog | None = None
    adversary_log: list[str] = field(default_factory=list)
    error: BaseException | None = None

    @property
    def ok(self) -> bool:
        return not self.aborts

    @property
    def abort(self) -> AbortReport | None:
        return self.aborts[0] if self.aborts else None


# -- party programs ----------------------------------------------------------------------------------

@dataclass
class ClientOutcome:
    draft: TranscriptDraft
    handshake: Any
    keys: Any
    record: RecordClient
    response: bytes


@dataclass
class NotaryOutcome:
    header: SessionHeader
    handshake: Any
    keys: Any
    record: RecordNotary
    key_schedule: Any = None  # DEAP state of the key schedule


def _leaves(digests: dict[int, list[bytes]]) -> tuple[list[bytes], dict[tuple[int, int], int]]:
    leaves, index = [], {}
    for d in (SENT, RECV):
        for pos, dig in enumerate(digests[d]):
            index[(d, pos)] = len(leaves)
            leaves.append(leaf_hash(d, pos, dig))
    return leaves, index


def client_program(eps: dict, cfg: SessionConfig, curve):
    srv, nt = eps["server"], eps["notary"]
    ctx = srv.ctx
    ctx.phase = "handshake"
    hs = yield from client_handshake(eps, curve)
    keys, ks = yield from key_schedule_client(nt, curve, hs.pms_share)

    ctx.phase = "record"
    st = RecordClient(keys)
    msg = yield nt.recv("encoder.com")
    st.enc_com = bytes.fromhex(msg["com"])
    ct, tag = yield from client_encrypt_record(nt, st, cfg.request)
    yield srv.send("tls", {"op": "record", "seq": 0, "ct": ct.hex(), "tag": tag_out(tag)})
    msg = yield srv.recv("tls")
    response = yield from client_decrypt_record(nt, st, bytes.fromhex(msg["ct"]), tag_in(msg["tag"]))
    yield srv.send("tls", {"op": "close"})
    tls_closed = True

    ctx.phase = "reveal"
    yield nt.send("ctl", {"op": "close"})
    yield from client_reveal(nt, st, [ks], tls_closed)

    ctx.phase = "notarize"
    S_raw = hs.S_pk.to_bytes()
    sio = ServerIdentityOpening(hs.server_identity, hs.client_random, S_raw, hs.server_signature,
                                ctx.fork("identity-salt").bytes(16))
    id_com = commit_payload(sio.payload(), sio.salt).digest
    yield nt.send("identity.com", {"com": id_com.hex()})
    msg = yield nt.recv("header")
    hdr = SessionHeader.from_json(msg["header"])
    notary_key = bytes.fromhex(msg["notary_key"])
    digests = {d: [byte_commitment(l, s).digest for l, s in zip(st.labels[d], st.salts[d])] for d in (SENT, RECV)}
    leaves, index = _leaves(digests)
    tree = MerkleTree(leaves + [bytes.fromhex(x) for x in msg["padding"]])
    problems = []
    if not verify_header(hdr, notary_key):
        problems.append("signature")
    if tree.root != hdr.merkle_root or len(tree.leaves) != hdr.tree_size:
        problems.append("merkle root")
    if hdr.encoder_seed_commitment != st.enc_com:
        problems.append("encoder commitment")
    if hdr.server_identity_commitment != id_com:
        problems.append("identity commitment")
    if hdr.server_key_hash != hashlib.sha256(S_raw).digest():
        problems.append("server key hash")
    if problems:
        raise HeaderRejected("session header mismatch: " + ", ".join(problems))
    draft = TranscriptDraft(hdr, notary_key, {d: bytes(st.transcripts[d]) for d in (SENT, RECV)}, st.salts, tree,
                            index, sio, st.encoder.seed, st.encoder_salt)
    ctx.phase = "done"
    return ClientOutcome(draft, hs, keys, st, response)


def notary_program(ep, cfg: SessionConfig, curve, signer: Ed25519Signer):
    ctx = ep.ctx
    ctx.phase = "handshake"
    hs = yield from notary_handshake(ep, curve)
    keys, ks = yield from key_schedule_notary(ep, curve, hs.pms_share)

    ctx.phase = "record"
    st = RecordNotary.fresh(keys, ctx.fork("encoder"))
    yield ep.send("encoder.com", {"com": st.enc_com.hex()})
    while True:
        msg = yield ep.recv("ctl")
        if msg["op"] == "encrypt":
            yield from notary_encrypt_record(ep, st, msg["seq"], msg["len"])
        elif msg["op"] == "decrypt":
            yield from notary_decrypt_record(ep, st, msg["seq"], bytes.fromhex(msg["ct"]), tag_in(msg["tag"]))
        elif msg["op"] == "close":
            break
        else:
            raise ValueError(f"unknown control op {msg['op']!r}")
    tls_closed = True

    ctx.phase = "reveal"
    yield from notary_reveal(ep, st, [ks], tls_closed)

    ctx.phase = "notarize"
    msg = yield ep.recv("identity.com")
    leaves, _ = _leaves(st.digests)
    hdr, tree = build_session_header(leaves, bytes.fromhex(msg["com"]), hashlib.sha256(hs.S_pk.to_bytes()).digest(),
                                     st.enc_com, signer, ctx.fork("merkle-pad"), cfg.time, cfg.profile, curve.name)
    yield ep.send("header", {"header": hdr.to_json(), "notary_key": signer.public_key.hex(),
                             "padding": [x.hex() for x in tree.leaves[len(leaves):]]})
    ctx.phase = "done"
    return NotaryOutcome(hdr, hs, keys, st, ks)


# -- entry points ---------------------------------------------------------------------------------------

def notary_signer(cfg: SessionConfig) -> Ed25519Signer:
    return Ed25519Signer.from_seed(cfg.notary_key_seed)


def run_session(config: SessionConfig | None = None, adversary: AdversaryScript | None = None) -> SessionResult:
    """Run one full session; aborts come back in the result, never as exceptions."""
    cfg = config or SessionConfig()
    curve = get_curve(cfg.curve)
    net = Network(session=f"s{cfg.seed}", adversary=adversary)
    seeds = cfg.party_seeds()
    ctxs = {p: PartyCtx(p, s, cfg.deviations.get(p, ())) for p, s in zip(PARTIES, seeds)}
    ctxs["notary"].forced_nsk = cfg.forced_nsk
    identity = ServerIdentity.from_seed(ctxs["server"].seed)
    signer = notary_signer(cfg)
    eps = {"server": net.endpoint(ctxs["client"], "server"), "notary": net.endpoint(ctxs["client"], "notary")}
    response = cfg.response
    out = run_programs(net, {
        "client": (ctxs["client"], client_program(eps, cfg, curve)),
        "notary": (ctxs["notary"], notary_program(net.endpoint(ctxs["notary"], "client"), cfg, curve, signer)),
        "server": (ctxs["server"], mock_server(net.endpoint(ctxs["server"], "client"), curve, identity,
                                               lambda req: response)),
    }, cfg.scheduler)
    res = SessionResult(cfg, net.transcript, [out.abort] if out.abort else [], notary_key=signer.public_key,
                        adversary_log=list(net.transcript.adversary_log), error=out.error)
    res.client = out.results.get("client")
    res.notary = out.results.get("notary")
    res.server = out.results.get("server")
    if res.ok and res.client is not None:
        res.draft = res.client.draft
        res.attestation = redact(res.draft, cfg.redact)
    return res


def inject_adversary(config: SessionConfig, script: AdversaryScript) -> SessionResult:
    return run_session(config, script)


def transcript_digest(t: Transcript) -> str:
    """SHA-256 over every delivered frame, for determinism checks."""
    h = hashlib.sha256()
    for m in t.messages("sent"):
        h.update(m.frame())
    return h.hexdigest()


def load_config(path: str) -> SessionConfig:
    with open(path) as f:
        return SessionConfig.from_json(json.load(f))
