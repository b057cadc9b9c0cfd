import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlsn_desk.harness import SessionConfig, run_session
from tlsn_desk.notarize import (RECV, SENT, Attestation, AttestationFormatError, Ed25519Signer, MerkleTree,
                                PlaintextEncoder, RangeOutOfBounds, RangeOverlap, SessionHeader, SignerFailure,
                                build_session_header, byte_commitment, derive_plaintext_encoding, redact,
                                redact_attestation, render_view, verify_attestation, verify_header,
                                verify_inclusion)
from tlsn_desk.prg import Prg

REQ = b"GET /me HTTP/1.1\r\n\r\n"
RESP = b'{"user":"bob","pin":"4321"}'


@pytest.fixture(scope="module")
def session():
    res = run_session(SessionConfig(request=REQ, response=RESP, seed=7))
    assert res.ok, res.abort
    return res


def test_encoder_labels():
    enc = PlaintextEncoder(bytes(range(32)))
    assert enc.delta & 1
    assert enc.label(SENT, 5, 1) == enc.label(SENT, 5, 0) ^ enc.delta
    assert enc.label(SENT, 5, 0) != enc.label(RECV, 5, 0)
    assert derive_plaintext_encoding(bytes(range(32)), RECV, 9, 1) == enc.label(RECV, 9, 1)
    assert enc.byte_labels(SENT, 1, 0x80)[0] == enc.label(SENT, 8, 1)
    with pytest.raises(ValueError):
        PlaintextEncoder(b"short")


def test_byte_commitment_needs_eight_labels():
    assert len(byte_commitment([1] * 8, b"s" * 16).digest) == 32
    with pytest.raises(ValueError):
        byte_commitment([1] * 7, b"s" * 16)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 40), st.data())
def test_merkle_inclusion(n, data):
    prg = Prg(b"merkle", str(n))
    leaves = [prg.bytes(32) for _ in range(n)]
    tree = MerkleTree.padded(leaves, prg)
    size = len(tree.leaves)
    assert size >= n and size & (size - 1) == 0
    i = data.draw(st.integers(0, n - 1))
    assert verify_inclusion(tree.root, leaves[i], i, tree.proof(i), size)
    assert not verify_inclusion(tree.root, leaves[i], i ^ 1, tree.proof(i), size) or size == 1
    assert not verify_inclusion(tree.root, bytes(32), i, tree.proof(i), size)


def test_merkle_rejects_bad_shapes():
    with pytest.raises(ValueError):
        MerkleTree([bytes(32)] * 3)
    assert not verify_inclusion(bytes(32), bytes(32), 0, [], 3)
    assert not verify_inclusion(bytes(32), bytes(32), 4, [b""] * 2, 4)


def _header(signer=None):
    signer = signer or Ed25519Signer.from_seed("t")
    return build_session_header([bytes(32)] * 3, b"i" * 32, b"k" * 32, b"e" * 32, signer, Prg(b"pad", "t"))


def test_header_signature_and_json():
    hdr, tree = _header()
    assert hdr.tree_size == 4 == len(tree.leaves)
    key = Ed25519Signer.from_seed("t").public_key
    assert verify_header(hdr, key)
    assert not verify_header(hdr, Ed25519Signer.from_seed("u").public_key)
    again = SessionHeader.from_json(json.loads(json.dumps(hdr.to_json())))
    assert again == hdr
    assert not verify_header(SessionHeader(**{**hdr.__dict__, "time": hdr.time + 1}), key)


def test_signer_failure_surfaces():
    class Broken:
        def sign(self, data):
            raise OSError("hsm offline")

    with pytest.raises(SignerFailure):
        _header(Broken())


def test_render_view():
    assert render_view(5, [(0, b"ab"), (4, b"z")]) == [97, 98, None, None, 122]


def test_full_attestation_verifies(session):
    att = session.attestation
    rep = verify_attestation(att, session.notary_key)
    assert rep.accepted, rep.failed()
    assert bytes(rep.views["sent"]) == REQ and bytes(rep.views["recv"]) == RESP
    assert att.lengths == {SENT: len(REQ), RECV: len(RESP)}


def test_json_round_trip(session):
    att = session.attestation
    again = Attestation.loads(att.dumps())
    assert again.to_json() == att.to_json()
    assert verify_attestation(again).accepted


def test_redaction_hides_bytes(session):
    pin = RESP.index(b"4321")
    att = redact(session.draft, [("recv", pin, pin + 4)])
    text = att.dumps()
    assert b"4321".hex() not in text
    rep = verify_attestation(att, session.notary_key)
    assert rep.accepted
    assert rep.views["recv"][pin : pin + 4] == [None] * 4
    assert bytes(rep.views["recv"][:pin]) == RESP[:pin]
    assert all(o.pos < pin or o.pos >= pin + 4 for d in att.disclosures for o in d.openings if d.direction == RECV)


def test_bare_range_means_sent(session):
    att = redact(session.draft, [(0, 3)])
    assert att.redactions == [(SENT, 0, 3)]


def test_bad_ranges(session):
    with pytest.raises(RangeOutOfBounds):
        redact(session.draft, [("sent", 0, len(REQ) + 1)])
    with pytest.raises(RangeOutOfBounds):
        redact(session.draft, [("sent", 4, 4)])
    with pytest.raises(RangeOverlap):
        redact(session.draft, [("sent", 0, 5), ("sent", 4, 8)])


def test_redact_an_issued_attestation(session):
    att = redact(session.draft, [("recv", 0, 4)])
    more = redact_attestation(att, [("recv", 10, 12), ("sent", 0, 3)])
    rep = verify_attestation(more, session.notary_key)
    assert rep.accepted, rep.failed()
    assert rep.views["recv"][10:12] == [None, None]
    with pytest.raises(RangeOverlap):
        redact_attestation(att, [("recv", 2, 6)])


def test_wrong_notary_key(session):
    rep = verify_attestation(session.attestation, Ed25519Signer.from_seed("someone else").public_key)
    assert rep.failed() == ["signature"]


def test_swapped_encoder_seed(session):
    att = Attestation.loads(session.attestation.dumps())
    att.encoder_seed = bytes(32)
    failed = verify_attestation(att).failed()
    assert "encoder_seed" in failed and "inclusion_sent_0" in failed


def test_purported_bytes_checked(session):
    att = session.attestation
    fake = bytearray(RESP)
    fake[2] ^= 0x20
    rep = verify_attestation(att, purported={(RECV, 0): bytes(fake)})
    assert rep.failed() == ["inclusion_recv_0"]


def test_dropped_disclosure_breaks_partition(session):
    att = redact(session.draft, [("sent", 2, 4)])
    att.disclosures = att.disclosures[1:]
    assert "partition_sent" in verify_attestation(att).failed()


def test_moved_disclosure_rejected(session):
    att = Attestation.loads(session.attestation.dumps())
    att.disclosures[1].direction = SENT  # recv bytes presented as sent
    failed = verify_attestation(att).failed()
    assert "partition_sent" in failed


def test_format_errors():
    with pytest.raises(AttestationFormatError):
        Attestation.from_json({"v": 99})
    with pytest.raises(AttestationFormatError):
        Attestation.from_json({"v": 1, "header": {}})
    with pytest.raises(AttestationFormatError):
        Attestation.loads('{"v": 1}')
