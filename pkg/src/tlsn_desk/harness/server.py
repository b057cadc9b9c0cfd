"""Mock TLS server: plain ECDH, single-party record protection.

It never knows it is talking to two parties. Records arrive as
``{"op": "record", "seq", "ct", "tag"}`` on the "tls" link and the scripted
response goes back the same way; ``{"op": "close"}`` ends the connection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..circuits.spn import derive_session_keys
from ..handshake3p import ServerIdentity, server_handshake
from ..record import decrypt_record_ref, encrypt_record_ref


def tag_out(tag: int | None):
    return None if tag is None else f"{tag:04x}"


def tag_in(text):
    return None if text is None else int(text, 16)


@dataclass
class ServerLog:
    pms: int = 0
    keys: tuple[int, int] = (0, 0)
    requests: list[bytes] = field(default_factory=list)
    responses: list[bytes] = field(default_factory=list)


def mock_server(ep, curve, identity: ServerIdentity, respond: Callable[[bytes], bytes]):
    """Server program. ``respond`` maps each decrypted request to a response body."""
    ep.ctx.phase = "handshake"
    hs = yield from server_handshake(ep, curve, identity)
    log = ServerLog(hs.pms, derive_session_keys(hs.pms, curve.p.bit_length()))
    k_in, k_out = log.keys
    ep.ctx.phase = "record"
    seq_out = 0
    while True:
        msg = yield ep.recv("tls")
        if msg["op"] == "close":
            break
        req = decrypt_record_ref(k_in, msg["seq"], bytes.fromhex(msg["ct"]), tag_in(msg["tag"]))
        log.requests.append(req)
        resp = respond(req)
        log.responses.append(resp)
        ct, tag = encrypt_record_ref(k_out, seq_out, resp)
        yield ep.send("tls", {"op": "record", "seq": seq_out, "ct": ct.hex(), "tag": tag_out(tag)})
        seq_out += 1
    ep.ctx.phase = "closed"
    return log
