import pytest

from tlsn_desk.errors import ConsistencyRejected, MacMismatch, PhaseError
from tlsn_desk.handshake3p import KeyShares
from tlsn_desk.notarize import RECV, SENT, byte_commitment
from tlsn_desk.prg import Prg
from tlsn_desk.record import (MAX_BLOCKS, MAX_RECORDS, CounterBlock, RecordClient, RecordNotary, block_wire,
                              client_decrypt_block, client_decrypt_record, client_encrypt_record, client_reveal,
                              counter_block, decrypt_record_ref, encrypt_record_ref, from_blocks, j0_block,
                              notary_decrypt_record, notary_encrypt_record, notary_reveal, to_blocks)
from tlsn_desk.transport import run_pair

KC = KeyShares(0x11223344, 0x55667788)
KN = KeyShares(0x0BADF00D, 0xCAFEBABE)
K_SENT, K_RECV = KC.sent ^ KN.sent, KC.recv ^ KN.recv


def test_counter_layout():
    assert counter_block(0, 0) == 0x1001
    assert j0_block(2) == 0x3000
    assert CounterBlock(MAX_RECORDS, MAX_BLOCKS).value == 0xFFFF
    with pytest.raises(ValueError):
        CounterBlock(0, 1)
    with pytest.raises(ValueError):
        CounterBlock(1, MAX_BLOCKS + 1)


def test_block_packing():
    assert to_blocks(b"abc") == [0x6162, 0x6300]
    assert from_blocks(to_blocks(b"abc"), 3) == b"abc"
    assert block_wire(0, 0) == 15 and block_wire(1, 7) == 0


def test_reference_round_trip():
    for pt in (b"", b"x", b"GET / HTTP/1.1\r\n"):
        ct, tag = encrypt_record_ref(K_SENT, 0, pt)
        assert len(ct) == len(pt)
        assert decrypt_record_ref(K_SENT, 0, ct, tag) == pt
    ct, tag = encrypt_record_ref(K_SENT, 1, b"hello")
    with pytest.raises(MacMismatch):
        decrypt_record_ref(K_SENT, 1, ct, tag ^ 1)
    with pytest.raises(MacMismatch):
        decrypt_record_ref(K_SENT, 0, ct, tag)  # wrong sequence number


def test_reference_length_limits():
    with pytest.raises(ValueError):
        encrypt_record_ref(K_SENT, MAX_RECORDS, b"a")
    with pytest.raises(ValueError):
        encrypt_record_ref(K_SENT, 0, bytes(2 * MAX_BLOCKS + 1))


def _session(request: bytes, response: bytes, bad_tag=False, tls_closed=True, deviations=((), ())):
    """Client encrypts ``request`` and decrypts the server's ``response``; both sides reveal."""
    out = {}

    def client(ch):
        st = RecordClient(KC)
        st.enc_com = bytes.fromhex((yield ch.recv("encoder.com"))["com"])
        out["ct"] = yield from client_encrypt_record(ch, st, request)
        ct, tag = encrypt_record_ref(K_RECV, 0, response)
        if bad_tag:
            tag ^= 0x8000
        out["pt"] = yield from client_decrypt_record(ch, st, ct, tag)
        yield ch.send("ctl", {"op": "close"})
        yield from client_reveal(ch, st, tls_closed=tls_closed)
        return st

    def notary(ch):
        st = RecordNotary.fresh(KN, Prg(b"notary", "encoder"))
        yield ch.send("encoder.com", {"com": st.enc_com.hex()})
        while True:
            msg = yield ch.recv("ctl")
            if msg["op"] == "encrypt":
                yield from notary_encrypt_record(ch, st, msg["seq"], msg["len"])
            elif msg["op"] == "decrypt":
                tag = None if msg["tag"] is None else int(msg["tag"], 16)
                yield from notary_decrypt_record(ch, st, msg["seq"], bytes.fromhex(msg["ct"]), tag)
            else:
                break
        yield from notary_reveal(ch, st, tls_closed=tls_closed)
        return st

    cst, nst = run_pair(client, notary, deviations=deviations)
    return out, cst, nst


def test_two_party_record_round():
    out, cst, nst = _session(b"GET /x", b"200 ok!")
    assert out["ct"] == encrypt_record_ref(K_SENT, 0, b"GET /x")
    assert out["pt"] == b"200 ok!"
    assert bytes(cst.transcripts[SENT]) == b"GET /x" and bytes(cst.transcripts[RECV]) == b"200 ok!"
    # the Notary holds one commitment per byte and never the plaintext
    assert nst.lengths == {SENT: 6, RECV: 7}
    for d in (SENT, RECV):
        mine = [byte_commitment(l, s).digest for l, s in zip(cst.labels[d], cst.salts[d])]
        assert mine == nst.digests[d]


def test_committed_labels_match_encoder():
    _, cst, _ = _session(b"A", b"B")
    enc = cst.encoder
    for d, byte in ((SENT, ord("A")), (RECV, ord("B"))):
        labels = cst.labels[d][0]
        bits = [(byte >> (7 - j)) & 1 for j in range(8)]
        assert labels == [enc.zero(d, j) ^ (enc.delta if b else 0) for j, b in enumerate(bits)]


def test_empty_records():
    out, cst, nst = _session(b"", b"")
    assert out["ct"] == (b"", None) and out["pt"] == b""
    assert nst.digests == {SENT: [], RECV: []}


def test_bad_server_tag():
    with pytest.raises(MacMismatch):
        _session(b"hi", b"there", bad_tag=True)


def test_reveal_waits_for_close():
    with pytest.raises(PhaseError):
        _session(b"hi", b"yo", tls_closed=False)


def test_wrong_plaintext_labels_rejected():
    with pytest.raises(ConsistencyRejected):
        _session(b"hi", b"yo", deviations=(("consistency_wrong_plaintext",), ()))


def test_decrypt_block_needs_verified_tag():
    def client(ch):
        yield from client_decrypt_block(ch, RecordClient(KC), 0, 0, 0x1234, 0, 2)

    def idle(ch):
        yield from ()

    with pytest.raises(PhaseError):
        run_pair(client, idle)
