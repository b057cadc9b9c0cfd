"""Two-party record layer over the toy cipher in CTR mode with a GHASH tag.

Blocks are 16 bits (two bytes, big-endian). Counter blocks are
``nonce(4 bits) || counter(12 bits)`` with nonce = record sequence + 1;
counter 0 is the tag block J0 and data blocks count from 1.

Encryption runs one DEAP instance per block: the Client inputs its key share
and the plaintext, the Notary its key share, and both learn the ciphertext
block. The Notary's garbling pins the plaintext wires to the session encoder,
so the Client's active plaintext labels are the ones it commits to.

Decryption first checks the tag in 2PC, then runs one DEAP instance per block
computing the keystream masked by a Client-chosen z. The Client unmasks
locally, fetches its plaintext labels by OT and proves with a small garbled
comparator (which reuses the keystream labels of the Notary's garbling) that
those labels encode c XOR keystream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import wire
from .algebra import get_field
from .circuits.core import bits_to_int, int_to_bits
from .circuits.library import consistency, mac_keys, record_decrypt, record_encrypt
from .circuits.spn import spn_encrypt
from .commit import commit_payload, open_ok
from .deap import (DeapSpec, NotaryGarbleParams, client_execute, client_setup, client_verify,
                   notary_execute, notary_open, notary_setup)
from .errors import (CommitmentMalformed, CommitmentOpenFailure, ConsistencyRejected, MacMismatch,
                     OtReplayMismatch, PhaseError, RegarbleMismatch)
from .garble import GarbledCircuit, RowTagFailure, evaluate, garble
from .mac2pc import mac_client, mac_notary, mac_ref
from .notarize import RECV, SENT, PlaintextEncoder, byte_commitment
from .ot import committed_ot_recv, committed_ot_send, verify_replay
from .prg import Prg

PROFILE = "toy-gcm16"
BLOCK_BYTES = 2
BLOCK_BITS = 16
MAX_BLOCKS = 4095
MAX_RECORDS = 15

ENC_SPEC = DeapSpec(record_encrypt().circuit, ("k_c", "p"), ("k_n",), ("ctr",))
DEC_SPEC = DeapSpec(record_decrypt().circuit, ("k_c", "z"), ("k_n",), ("ctr",))
MAC_SPEC = DeapSpec(mac_keys().circuit, ("k_c", "m_c"), ("k_n", "m_n"), ("j0",))
CONS = consistency(BLOCK_BITS).circuit


def gf16():
    return get_field("gf2_16")


@dataclass(frozen=True)
class CounterBlock:
    nonce: int
    counter: int

    def __post_init__(self):
        if not 0 < self.nonce <= MAX_RECORDS or not 0 <= self.counter <= MAX_BLOCKS:
            raise ValueError("counter block out of range")

    @property
    def value(self) -> int:
        return (self.nonce << 12) | self.counter


def counter_block(seq: int, i: int) -> int:
    """Counter for data block i (0-based) of record ``seq``."""
    return CounterBlock(seq + 1, i + 1).value


def j0_block(seq: int) -> int:
    return CounterBlock(seq + 1, 0).value


def to_blocks(data: bytes) -> list[int]:
    data = data + b"\x00" * (-len(data) % BLOCK_BYTES)
    return [int.from_bytes(data[i : i + BLOCK_BYTES], "big") for i in range(0, len(data), BLOCK_BYTES)]


def from_blocks(blocks: Sequence[int], length: int) -> bytes:
    return b"".join(b.to_bytes(BLOCK_BYTES, "big") for b in blocks)[:length]


def block_wire(byteoff: int, j: int) -> int:
    """Bit index inside a block for bit j (MSB first) of byte ``byteoff``."""
    return BLOCK_BITS - 1 - 8 * byteoff - j


def _check_len(plaintext_len: int, seq: int):
    if seq >= MAX_RECORDS:
        raise ValueError("too many records in one direction")
    if -(-plaintext_len // BLOCK_BYTES) > MAX_BLOCKS:
        raise ValueError("record too long for the counter layout")


# -- single-party reference (the server's view) ----------------------------------------------

def keystream(key: int, seq: int, n: int) -> list[int]:
    return [spn_encrypt(key, counter_block(seq, i)) for i in range(n)]


def record_tag(key: int, seq: int, ct: bytes) -> int:
    F = gf16()
    H = F(spn_encrypt(key, 0))
    pad = F(spn_encrypt(key, j0_block(seq)))
    return mac_ref([F(b) for b in to_blocks(ct)], H, pad).value


def encrypt_record_ref(key: int, seq: int, pt: bytes) -> tuple[bytes, int | None]:
    _check_len(len(pt), seq)
    if not pt:
        return b"", None
    blocks = to_blocks(pt)
    ct = from_blocks([p ^ k for p, k in zip(blocks, keystream(key, seq, len(blocks)))], len(pt))
    return ct, record_tag(key, seq, ct)


def decrypt_record_ref(key: int, seq: int, ct: bytes, tag: int | None) -> bytes:
    if not ct:
        return b""
    if tag is None or record_tag(key, seq, ct) != tag:
        raise MacMismatch("record tag does not verify")
    blocks = to_blocks(ct)
    return from_blocks([c ^ k for c, k in zip(blocks, keystream(key, seq, len(blocks)))], len(ct))


# -- shared helpers ------------------------------------------------------------------------------

def plaintext_pins(circuit, group: str, enc: PlaintextEncoder, direction: int, byte_start: int,
                   n_bytes: int) -> dict[int, int]:
    """0-labels of the real plaintext bytes of one block, keyed by wire id."""
    wires = circuit.group_wires(group)
    pins = {}
    for b in range(n_bytes):
        pos = byte_start + b
        for j in range(8):
            pins[wires[block_wire(b, j)]] = enc.zero(direction, 8 * pos + j)
    return pins


def _byte_labels(block_labels: Sequence[int], b: int) -> list[int]:
    return [block_labels[block_wire(b, j)] for j in range(8)]


def _cons_seed(rho: bytes) -> bytes:
    return Prg(rho, "consistency").bytes(32)


def consistency_garble(rho: bytes, enc: PlaintextEncoder, direction: int, byte_start: int, n_bytes: int,
                       ectr_zero: Sequence[int]):
    pins = plaintext_pins(CONS, "p", enc, direction, byte_start, n_bytes)
    for w, z in zip(CONS.group_wires("ectr"), ectr_zero):
        pins[w] = z
    return garble(CONS, _cons_seed(rho), enc.delta, pins)


@dataclass
class Pending:
    """A DEAP instance awaiting its equality check, with the params the Client expects."""

    state: object
    kind: str
    direction: int = SENT
    byte_start: int = 0
    n_bytes: int = 0


@dataclass
class ConsistencyClaim:
    deap_index: int
    direction: int
    byte_start: int
    n_bytes: int
    c: int
    F: bytes = b""
    c_labels: list[int] = field(default_factory=list)
    d: tuple = ()
    p_opening: object = None
    out_label: int = 0
    salt: bytes = b""
    com: bytes = b""


# -- client side ------------------------------------------------------------------------------------

@dataclass
class RecordClient:
    keys: object  # KeyShares, client half
    enc_com: bytes = b""
    pending: list = field(default_factory=list)
    claims: list = field(default_factory=list)
    transcripts: dict = field(default_factory=lambda: {SENT: bytearray(), RECV: bytearray()})
    labels: dict = field(default_factory=lambda: {SENT: [], RECV: []})
    salts: dict = field(default_factory=lambda: {SENT: [], RECV: []})
    seq: dict = field(default_factory=lambda: {SENT: 0, RECV: 0})
    mac_verified: set = field(default_factory=set)
    encoder: PlaintextEncoder | None = None
    encoder_salt: bytes = b""


def _mac_shares_client(ch, st, key: int, seq: int, tag: str):
    mask = ch.ctx.fork(f"mac-mask:{tag}").randbits(32)
    dst = yield from client_setup(ch, MAC_SPEC, {"k_c": key, "m_c": mask}, {"j0": j0_block(seq)}, tag)
    yield from client_execute(ch, dst)
    st.pending.append(Pending(dst, "mac"))
    F = gf16()
    return F(mask & 0xFFFF), F(mask >> 16)


def _commit_bytes(ch, st, direction: int, labels_per_byte: list[list[int]], tag: str):
    prg = ch.ctx.fork(f"commit:{tag}")
    digests = []
    for labels in labels_per_byte:
        salt = prg.bytes(16)
        st.labels[direction].append(labels)
        st.salts[direction].append(salt)
        digests.append(byte_commitment(labels, salt).digest.hex())
    yield ch.send("commit", {"dir": direction, "digests": digests})


def client_encrypt_record(ch, st: RecordClient, pt: bytes):
    """Returns (ciphertext, tag or None) for the server."""
    seq = st.seq[SENT]
    _check_len(len(pt), seq)
    st.seq[SENT] += 1
    start = len(st.transcripts[SENT])
    yield ch.send("ctl", {"op": "encrypt", "seq": seq, "len": len(pt)})
    st.transcripts[SENT] += pt
    if not pt:
        yield ch.send("commit", {"dir": SENT, "digests": []})
        return b"", None
    k = st.keys.sent
    cblocks, per_byte = [], []
    for i, p in enumerate(to_blocks(pt)):
        tag = f"enc{seq}.{i}"
        dst = yield from client_setup(ch, ENC_SPEC, {"k_c": k, "p": p}, {"ctr": counter_block(seq, i)}, tag)
        v = yield from client_execute(ch, dst)
        n_real = min(BLOCK_BYTES, len(pt) - BLOCK_BYTES * i)
        st.pending.append(Pending(dst, "enc", SENT, start + BLOCK_BYTES * i, n_real))
        cblocks.append(bits_to_int(v))
        p_labels = dst.labels_xc_n[32:48]
        per_byte.extend(_byte_labels(p_labels, b) for b in range(n_real))
    ct = from_blocks(cblocks, len(pt))
    h_c, pad_c = yield from _mac_shares_client(ch, st, k, seq, f"mk.s{seq}")
    F = gf16()
    mac = yield from mac_client(ch, [F(b) for b in to_blocks(ct)], h_c, pad_c, f"mac.s{seq}")
    yield from _commit_bytes(ch, st, SENT, per_byte, f"s{seq}")
    return ct, mac.value


def client_decrypt_record(ch, st: RecordClient, ct: bytes, tag: int | None):
    """MAC check in 2PC, then masked decryption; returns the plaintext."""
    seq = st.seq[RECV]
    _check_len(len(ct), seq)
    st.seq[RECV] += 1
    start = len(st.transcripts[RECV])
    yield ch.send("ctl", {"op": "decrypt", "seq": seq, "ct": ct.hex(),
                          "tag": None if tag is None else f"{tag:04x}"})
    if not ct:
        yield ch.send("commit", {"dir": RECV, "digests": []})
        return b""
    if tag is None:
        raise MacMismatch("non-empty record without a tag")
    k = st.keys.recv
    F = gf16()
    h_c, pad_c = yield from _mac_shares_client(ch, st, k, seq, f"mk.r{seq}")
    mac = yield from mac_client(ch, [F(b) for b in to_blocks(ct)], h_c, pad_c, f"mac.r{seq}")
    if mac.value != tag:
        raise MacMismatch("server record tag does not match the 2PC tag")
    st.mac_verified.add(seq)
    pblocks, per_byte = [], []
    for i, c in enumerate(to_blocks(ct)):
        n_real = min(BLOCK_BYTES, len(ct) - BLOCK_BYTES * i)
        p, labels = yield from client_decrypt_block(ch, st, seq, i, c, start + BLOCK_BYTES * i, n_real)
        pblocks.append(p)
        per_byte.extend(_byte_labels(labels, b) for b in range(n_real))
    pt = from_blocks(pblocks, len(ct))
    st.transcripts[RECV] += pt
    yield from _commit_bytes(ch, st, RECV, per_byte, f"r{seq}")
    return pt


def client_decrypt_block(ch, st: RecordClient, seq: int, i: int, c: int, byte_start: int, n_real: int):
    if seq not in st.mac_verified:
        raise PhaseError("decryption requested before the record tag was verified")
    tag = f"dec{seq}.{i}"
    z = ch.ctx.fork(f"mask:{tag}").randbits(BLOCK_BITS)
    dst = yield from client_setup(ch, DEC_SPEC, {"k_c": st.keys.recv, "z": z}, {"ctr": counter_block(seq, i)}, tag)
    v = yield from client_execute(ch, dst)
    st.pending.append(Pending(dst, "dec", RECV, byte_start, n_real))
    p = c ^ bits_to_int(v) ^ z
    # plaintext labels by OT, then the consistency proof
    msg = yield ch.recv(f"{tag}.cons")
    claim = ConsistencyClaim(len(st.pending) - 1, RECV, byte_start, n_real, c, bytes.fromhex(msg["F"]),
                             wire.labels_in(msg["c"]), tuple(wire.bits_in(msg["d"])))
    p_bits = int_to_bits(p, BLOCK_BITS)
    if ch.ctx.cheats("consistency_wrong_plaintext", tag):
        p_bits = [p_bits[0] ^ 1, *p_bits[1:]]
    p_labels, claim.p_opening = yield from committed_ot_recv(ch, p_bits, f"{tag}.pot", as_int=True)
    prg = ch.ctx.fork(f"cons:{tag}")
    try:
        F = GarbledCircuit.from_bytes(claim.F)
        X = [0] * CONS.n_inputs
        for w, l in zip(CONS.group_wires("p"), p_labels):
            X[w] = l
        for w, l in zip(CONS.group_wires("ectr"), dst.active_n("ectr")):
            X[w] = l
        for w, l in zip(CONS.group_wires("c"), claim.c_labels):
            X[w] = l
        (claim.out_label,) = evaluate(CONS, F, X)
    except (RowTagFailure, PhaseError, ValueError):
        claim.out_label = prg.randbits(128)
    claim.salt = prg.bytes(16)
    claim.com = commit_payload(claim.out_label.to_bytes(16, "little"), claim.salt).digest
    yield ch.send(f"{tag}.cons_com", {"com": claim.com.hex()})
    st.claims.append(claim)
    return p, p_labels


def client_reveal(ch, st: RecordClient, extra_pending: Sequence = (), tls_closed: bool = True):
    """Equality checks for every DEAP instance plus the consistency openings.

    ``extra_pending`` are DEAP states from outside the record layer (the key
    schedule); they are checked first.
    """
    if not tls_closed:
        raise PhaseError("reveal requested while the TLS connection is open")
    msg = yield ch.recv("encoder.open")
    seed, salt = bytes.fromhex(msg["seed"]), bytes.fromhex(msg["salt"])
    if not open_ok(st.enc_com, seed, salt):
        raise CommitmentOpenFailure("encoder seed does not match its commitment")
    st.encoder = enc = PlaintextEncoder(seed)
    st.encoder_salt = salt
    for dst in extra_pending:
        yield from client_verify(ch, dst, tls_closed)
    rhos = []
    for pend in st.pending:
        if pend.kind == "enc":
            pins = plaintext_pins(ENC_SPEC.circuit, "p", enc, pend.direction, pend.byte_start, pend.n_bytes)
            params = NotaryGarbleParams(enc.delta, pins)
        elif pend.kind == "dec":
            params = NotaryGarbleParams(enc.delta)
        else:
            params = None
        yield from client_verify(ch, pend.state, tls_closed, params=params)
        rhos.append(pend.state.rho_opened)
    for claim in st.claims:
        dst = st.pending[claim.deap_index].state
        rho = rhos[claim.deap_index]
        ectr_zero = [dst.G_n_opened.zero[w] for w in DEC_SPEC.circuit.named["ectr"]]
        G = consistency_garble(rho, enc, claim.direction, claim.byte_start, claim.n_bytes, ectr_zero)
        c_labels = G.group_labels("c", claim.c)
        if G.F.to_bytes() != claim.F or G.d.bits != claim.d or c_labels != claim.c_labels:
            raise RegarbleMismatch("consistency circuit was not garbled honestly")
        if not verify_replay(claim.p_opening.record, rho, G.group_pairs("p"), width=16):
            raise OtReplayMismatch("plaintext label OT deviates from the PRG(rho) schedule")
        yield ch.send("cons.open", {"label": f"{claim.out_label:032x}", "salt": claim.salt.hex()})
    return True


# -- notary side ----------------------------------------------------------------------------------------

@dataclass
class RecordNotary:
    keys: object  # KeyShares, notary half
    encoder: PlaintextEncoder
    enc_salt: bytes
    pending: list = field(default_factory=list)
    claims: list = field(default_factory=list)
    digests: dict = field(default_factory=lambda: {SENT: [], RECV: []})
    lengths: dict = field(default_factory=lambda: {SENT: 0, RECV: 0})
    ciphertexts: dict = field(default_factory=lambda: {SENT: [], RECV: []})
    mac_verified: set = field(default_factory=set)

    @classmethod
    def fresh(cls, keys, prg: Prg) -> "RecordNotary":
        return cls(keys, PlaintextEncoder(prg.bytes(32)), prg.bytes(16))

    @property
    def enc_com(self) -> bytes:
        return commit_payload(self.encoder.seed, self.enc_salt).digest


def _mac_shares_notary(ch, st, key: int, seq: int, tag: str):
    mask = ch.ctx.fork(f"mac-mask:{tag}").randbits(32)
    dst = yield from notary_setup(ch, MAC_SPEC, {"k_n": key, "m_n": mask}, {"j0": j0_block(seq)}, tag)
    v = yield from notary_execute(ch, dst)
    st.pending.append(dst)
    share = bits_to_int(v) ^ mask
    F = gf16()
    return F(share & 0xFFFF), F(share >> 16)


def _recv_commit(ch, st, direction: int, n: int):
    msg = yield ch.recv("commit")
    digests = [bytes.fromhex(d) for d in msg["digests"]]
    if msg["dir"] != direction or len(digests) != n or any(len(d) != 32 for d in digests):
        raise CommitmentMalformed("plaintext commitments have the wrong shape")
    st.digests[direction].extend(digests)


def notary_encrypt_record(ch, st: RecordNotary, seq: int, length: int):
    _check_len(length, seq)
    start = st.lengths[SENT]
    st.lengths[SENT] += length
    if not length:
        yield from _recv_commit(ch, st, SENT, 0)
        return b""
    k = st.keys.sent
    cblocks = []
    for i in range(-(-length // BLOCK_BYTES)):
        n_real = min(BLOCK_BYTES, length - BLOCK_BYTES * i)
        pins = plaintext_pins(ENC_SPEC.circuit, "p", st.encoder, SENT, start + BLOCK_BYTES * i, n_real)
        dst = yield from notary_setup(ch, ENC_SPEC, {"k_n": k}, {"ctr": counter_block(seq, i)}, f"enc{seq}.{i}",
                                      NotaryGarbleParams(st.encoder.delta, pins))
        v = yield from notary_execute(ch, dst)
        st.pending.append(dst)
        cblocks.append(bits_to_int(v))
    ct = from_blocks(cblocks, length)
    st.ciphertexts[SENT].append(ct)
    h_n, pad_n = yield from _mac_shares_notary(ch, st, k, seq, f"mk.s{seq}")
    F = gf16()
    yield from mac_notary(ch, [F(b) for b in to_blocks(ct)], h_n, pad_n, f"mac.s{seq}")
    yield from _recv_commit(ch, st, SENT, length)
    return ct


def notary_decrypt_record(ch, st: RecordNotary, seq: int, ct: bytes, tag: int | None):
    _check_len(len(ct), seq)
    start = st.lengths[RECV]
    st.lengths[RECV] += len(ct)
    st.ciphertexts[RECV].append(ct)
    if not ct:
        yield from _recv_commit(ch, st, RECV, 0)
        return
    if tag is None:
        raise MacMismatch("non-empty record without a tag")
    k = st.keys.recv
    F = gf16()
    h_n, pad_n = yield from _mac_shares_notary(ch, st, k, seq, f"mk.r{seq}")
    mac = yield from mac_notary(ch, [F(b) for b in to_blocks(ct)], h_n, pad_n, f"mac.r{seq}")
    if mac.value != tag:
        raise MacMismatch("server record tag does not match the 2PC tag")
    st.mac_verified.add(seq)
    for i, c in enumerate(to_blocks(ct)):
        n_real = min(BLOCK_BYTES, len(ct) - BLOCK_BYTES * i)
        yield from notary_decrypt_block(ch, st, seq, i, c, start + BLOCK_BYTES * i, n_real)
    yield from _recv_commit(ch, st, RECV, len(ct))


def notary_decrypt_block(ch, st: RecordNotary, seq: int, i: int, c: int, byte_start: int, n_real: int):
    if seq not in st.mac_verified:
        raise PhaseError("decryption requested before the record tag was verified")
    tag = f"dec{seq}.{i}"
    dst = yield from notary_setup(ch, DEC_SPEC, {"k_n": st.keys.recv}, {"ctr": counter_block(seq, i)}, tag,
                                  NotaryGarbleParams(st.encoder.delta))
    yield from notary_execute(ch, dst)
    st.pending.append(dst)
    ectr_zero = [dst.G.zero[w] for w in DEC_SPEC.circuit.named["ectr"]]
    G = consistency_garble(dst.rho, st.encoder, RECV, byte_start, n_real, ectr_zero)
    yield ch.send(f"{tag}.cons", {"F": G.F.to_bytes().hex(), "c": wire.labels_out(G.group_labels("c", c)),
                                  "d": wire.bits_out(G.d.bits)})
    yield from committed_ot_send(ch, G.group_pairs("p"), dst.rho, f"{tag}.pot", width=16)
    msg = yield ch.recv(f"{tag}.cons_com")
    st.claims.append((bytes.fromhex(msg["com"]), G.output_labels([1])[0]))


def notary_reveal(ch, st: RecordNotary, extra_pending: Sequence = (), tls_closed: bool = True):
    if not tls_closed:
        raise PhaseError("reveal requested while the TLS connection is open")
    yield ch.send("encoder.open", {"seed": st.encoder.seed.hex(), "salt": st.enc_salt.hex()})
    for dst in list(extra_pending) + st.pending:
        yield from notary_open(ch, dst, tls_closed)
    for com, one in st.claims:
        msg = yield ch.recv("cons.open")
        label = int(msg["label"], 16)
        if not open_ok(com, label.to_bytes(16, "little"), bytes.fromhex(msg["salt"])) or label != one:
            raise ConsistencyRejected("plaintext labels do not encode c XOR keystream")
    return True
