"""Commitments, the signed Session Header, redaction and verification.

Plaintext labels. Every bit of the transcript has two 128-bit labels
derived from a per-session Notary seed (the encoder): the 0-label is a hash
of (seed, direction, bit position) and the 1-label is the 0-label XOR a
seed-derived offset. The record layer pins the plaintext wires of the
Notary's garblings to these labels, so the Client ends up holding exactly
one label per plaintext bit. Its commitment to a byte is
SHA-256(8 labels || salt).

After the session the Notary opens the encoder seed. A Verifier given a
purported byte, its salt and a Merkle path recomputes the labels, the
commitment and the leaf, and checks the path against the signed root. Any
flipped bit changes a label and so the leaf.
"""
from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from typing import Callable, Sequence

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .commit import SCHEME_ID, Commitment, commit_payload, open_ok
from .prg import Prg

ENCODER_DOMAIN = b"tlsn-desk/encoder/v1"
SENT, RECV = 0, 1
DIRECTIONS = {"sent": SENT, "recv": RECV}
ATTESTATION_VERSION = 1


class SignerFailure(Exception):
    pass


class RangeOverlap(ValueError):
    pass


class RangeOutOfBounds(ValueError):
    pass


class AttestationFormatError(ValueError):
    pass


# -- encoder ------------------------------------------------------------------------------------

class PlaintextEncoder:
    """Label source for plaintext bits, fully determined by the seed."""

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("encoder seed must be 32 bytes")
        self.seed = seed
        self.delta = int.from_bytes(hashlib.sha256(ENCODER_DOMAIN + b"delta" + seed).digest()[:16], "little") | 1

    def zero(self, direction: int, bitpos: int) -> int:
        h = hashlib.sha256(ENCODER_DOMAIN + self.seed + bytes([direction]) + struct.pack("<Q", bitpos))
        return int.from_bytes(h.digest()[:16], "little")

    def label(self, direction: int, bitpos: int, bit: int) -> int:
        z = self.zero(direction, bitpos)
        return z ^ self.delta if bit else z

    def byte_labels(self, direction: int, pos: int, value: int) -> list[int]:
        """The 8 active labels of one byte, most significant bit first."""
        return [self.label(direction, 8 * pos + j, (value >> (7 - j)) & 1) for j in range(8)]


def derive_plaintext_encoding(seed: bytes, direction: int, bitpos: int, bit: int) -> int:
    return PlaintextEncoder(seed).label(direction, bitpos, bit)


def labels_bytes(labels: Sequence[int]) -> bytes:
    return b"".join(l.to_bytes(16, "little") for l in labels)


def byte_commitment(labels: Sequence[int], salt: bytes) -> Commitment:
    if len(labels) != 8:
        raise ValueError("a byte commitment covers exactly 8 labels")
    return commit_payload(labels_bytes(labels), salt)


# -- Merkle tree --------------------------------------------------------------------------------------

def leaf_hash(direction: int, pos: int, digest: bytes) -> bytes:
    return hashlib.sha256(b"\x00" + bytes([direction]) + struct.pack("<Q", pos) + digest).digest()


def _node(a: bytes, b: bytes) -> bytes:
    return hashlib.sha256(b"\x01" + a + b).digest()


@dataclass
class MerkleTree:
    leaves: list[bytes]

    def __post_init__(self):
        n = len(self.leaves)
        if n == 0 or n & (n - 1):
            raise ValueError("leaf count must be a power of two")
        self.levels = [list(self.leaves)]
        while len(self.levels[-1]) > 1:
            lv = self.levels[-1]
            self.levels.append([_node(lv[i], lv[i + 1]) for i in range(0, len(lv), 2)])

    @classmethod
    def padded(cls, leaves: Sequence[bytes], prg: Prg) -> "MerkleTree":
        """Pad with random leaves to the next power of two so the count stays hidden."""
        n = max(1, len(leaves))
        size = 1 << (n - 1).bit_length()
        return cls(list(leaves) + [prg.bytes(32) for _ in range(size - len(leaves))])

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    def proof(self, index: int) -> list[bytes]:
        out = []
        for lv in self.levels[:-1]:
            out.append(lv[index ^ 1])
            index >>= 1
        return out


def verify_inclusion(root: bytes, leaf: bytes, index: int, proof: Sequence[bytes], size: int) -> bool:
    if size <= 0 or size & (size - 1) or not 0 <= index < size or len(proof) != size.bit_length() - 1:
        return False
    h = leaf
    for sib in proof:
        h = _node(sib, h) if index & 1 else _node(h, sib)
        index >>= 1
    return h == root


# -- signing -------------------------------------------------------------------------------------------

class Ed25519Signer:
    """Default Notary signer; ``from_seed`` gives a deterministic test key."""

    def __init__(self, key: Ed25519PrivateKey):
        self._key = key

    @classmethod
    def from_seed(cls, seed) -> "Ed25519Signer":
        return cls(Ed25519PrivateKey.from_private_bytes(Prg(seed, "notary-signing-key").bytes(32)))

    @property
    def public_key(self) -> bytes:
        return self._key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)

    def sign(self, data: bytes) -> bytes:
        return self._key.sign(data)


def verify_signature(public_key: bytes, data: bytes, sig: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(sig, data)
    except (InvalidSignature, ValueError):
        return False
    return True


# -- session header ---------------------------------------------------------------------------------------

@dataclass(frozen=True)
class SessionHeader:
    merkle_root: bytes
    tree_size: int
    server_identity_commitment: bytes
    server_key_hash: bytes
    encoder_seed_commitment: bytes
    time: int
    profile: str
    curve: str
    signature: bytes = b""

    def canonical(self) -> bytes:
        """Length-prefixed fields in fixed order; the bytes the Notary signs."""
        parts = [b"tlsn-desk/header/v1", self.merkle_root, struct.pack("<I", self.tree_size),
                 self.server_identity_commitment, self.server_key_hash, self.encoder_seed_commitment,
                 struct.pack("<Q", self.time), self.profile.encode(), self.curve.encode(), SCHEME_ID.encode()]
        return b"".join(struct.pack("<I", len(p)) + p for p in parts)

    def to_json(self) -> dict:
        return {"merkle_root": self.merkle_root.hex(), "tree_size": self.tree_size,
                "server_identity_commitment": self.server_identity_commitment.hex(),
                "server_key_hash": self.server_key_hash.hex(),
                "encoder_seed_commitment": self.encoder_seed_commitment.hex(),
                "time": self.time, "profile": self.profile, "curve": self.curve,
                "signature": self.signature.hex()}

    @classmethod
    def from_json(cls, d: dict) -> "SessionHeader":
        return cls(bytes.fromhex(d["merkle_root"]), int(d["tree_size"]),
                   bytes.fromhex(d["server_identity_commitment"]), bytes.fromhex(d["server_key_hash"]),
                   bytes.fromhex(d["encoder_seed_commitment"]), int(d["time"]), d["profile"], d["curve"],
                   bytes.fromhex(d["signature"]))


def build_session_header(leaves: Sequence[bytes], server_identity_commitment: bytes, server_key_hash: bytes,
                         encoder_seed_commitment: bytes, signer, prg: Prg, time: int = 0,
                         profile: str = "toy-gcm16", curve: str = "toy") -> tuple[SessionHeader, MerkleTree]:
    """Pad the leaves, build the tree and sign. ``leaves`` are leaf hashes."""
    tree = MerkleTree.padded(leaves, prg)
    hdr = SessionHeader(tree.root, len(tree.leaves), server_identity_commitment, server_key_hash,
                        encoder_seed_commitment, time, profile, curve)
    try:
        sig = signer.sign(hdr.canonical())
    except Exception as e:  # any signer backend failure
        raise SignerFailure(str(e)) from e
    return SessionHeader(**{**hdr.__dict__, "signature": sig}), tree


def verify_header(hdr: SessionHeader, notary_key: bytes) -> bool:
    unsigned = SessionHeader(**{**hdr.__dict__, "signature": b""})
    return verify_signature(notary_key, unsigned.canonical(), hdr.signature)


# -- attestation -------------------------------------------------------------------------------------------

@dataclass
class ByteOpening:
    pos: int
    salt: bytes
    index: int
    proof: list[bytes]


@dataclass
class Disclosure:
    direction: int
    start: int
    data: bytes
    openings: list[ByteOpening]

    @property
    def end(self) -> int:
        return self.start + len(self.data)


@dataclass
class ServerIdentityOpening:
    blob: bytes
    client_random: bytes
    server_key: bytes
    signature: bytes
    salt: bytes

    def payload(self) -> bytes:
        parts = [self.blob, self.client_random, self.server_key, self.signature]
        return b"".join(struct.pack("<I", len(p)) + p for p in parts)


@dataclass
class Attestation:
    header: SessionHeader
    notary_key: bytes
    lengths: dict[int, int]
    disclosures: list[Disclosure]
    redactions: list[tuple[int, int, int]]  # (direction, start, end)
    server_identity: ServerIdentityOpening
    encoder_seed: bytes
    encoder_salt: bytes

    def to_json(self) -> dict:
        return {
            "v": ATTESTATION_VERSION,
            "header": self.header.to_json(),
            "notary_key": self.notary_key.hex(),
            "lengths": {"sent": self.lengths[SENT], "recv": self.lengths[RECV]},
            "disclosures": [{
                "dir": _dir_name(d.direction), "start": d.start, "data": d.data.hex(),
                "openings": [{"pos": o.pos, "salt": o.salt.hex(), "index": o.index,
                              "proof": [p.hex() for p in o.proof]} for o in d.openings],
            } for d in self.disclosures],
            "redactions": [{"dir": _dir_name(r[0]), "start": r[1], "end": r[2]} for r in self.redactions],
            "server_identity": {"blob": self.server_identity.blob.hex(),
                                "client_random": self.server_identity.client_random.hex(),
                                "server_key": self.server_identity.server_key.hex(),
                                "signature": self.server_identity.signature.hex(),
                                "salt": self.server_identity.salt.hex()},
            "encoder": {"seed": self.encoder_seed.hex(), "salt": self.encoder_salt.hex()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "Attestation":
        try:
            if d.get("v") != ATTESTATION_VERSION:
                raise AttestationFormatError(f"unsupported attestation version {d.get('v')!r}")
            si = d["server_identity"]
            return cls(
                SessionHeader.from_json(d["header"]),
                bytes.fromhex(d["notary_key"]),
                {SENT: int(d["lengths"]["sent"]), RECV: int(d["lengths"]["recv"])},
                [Disclosure(DIRECTIONS[x["dir"]], int(x["start"]), bytes.fromhex(x["data"]),
                            [ByteOpening(int(o["pos"]), bytes.fromhex(o["salt"]), int(o["index"]),
                                         [bytes.fromhex(p) for p in o["proof"]]) for o in x["openings"]])
                 for x in d["disclosures"]],
                [(DIRECTIONS[r["dir"]], int(r["start"]), int(r["end"])) for r in d["redactions"]],
                ServerIdentityOpening(bytes.fromhex(si["blob"]), bytes.fromhex(si["client_random"]),
                                      bytes.fromhex(si["server_key"]), bytes.fromhex(si["signature"]),
                                      bytes.fromhex(si["salt"])),
                bytes.fromhex(d["encoder"]["seed"]),
                bytes.fromhex(d["encoder"]["salt"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, AttestationFormatError):
                raise
            raise AttestationFormatError(f"malformed attestation: {e!r}") from None

    @classmethod
    def loads(cls, text: str) -> "Attestation":
        return cls.from_json(json.loads(text))


def _dir_name(d: int) -> str:
    return "sent" if d == SENT else "recv"


@dataclass
class TranscriptDraft:
    """Everything the Client keeps after notarization, before redaction."""

    header: SessionHeader
    notary_key: bytes
    transcripts: dict[int, bytes]
    salts: dict[int, list[bytes]]
    tree: MerkleTree
    index: dict[tuple[int, int], int]
    server_identity: ServerIdentityOpening
    encoder_seed: bytes
    encoder_salt: bytes

    def full(self) -> Attestation:
        return redact(self, [])


def _parse_ranges(ranges) -> list[tuple[int, int, int]]:
    out = []
    for r in ranges:
        if len(r) == 2:
            out.append((SENT, int(r[0]), int(r[1])))
        else:
            d = DIRECTIONS[r[0]] if isinstance(r[0], str) else int(r[0])
            out.append((d, int(r[1]), int(r[2])))
    return out


def _complement(length: int, cuts: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out, pos = [], 0
    for a, b in sorted(cuts):
        if a > pos:
            out.append((pos, a))
        pos = max(pos, b)
    if pos < length:
        out.append((pos, length))
    return out


def redact(draft: TranscriptDraft, ranges) -> Attestation:
    """Disclose everything except ``ranges`` ((dir, start, end) or (start, end) for sent).

    Redacted bytes carry no plaintext, salts or labels.
    """
    cuts = _parse_ranges(ranges)
    by_dir: dict[int, list[tuple[int, int]]] = {SENT: [], RECV: []}
    for d, a, b in cuts:
        n = len(draft.transcripts[d])
        if not 0 <= a < b <= n:
            raise RangeOutOfBounds(f"range {a}..{b} outside 0..{n}")
        for x, y in by_dir[d]:
            if a < y and x < b:
                raise RangeOverlap(f"range {a}..{b} overlaps {x}..{y}")
        by_dir[d].append((a, b))
    disclosures = []
    for d in (SENT, RECV):
        data = draft.transcripts[d]
        for a, b in _complement(len(data), by_dir[d]):
            ops = [ByteOpening(p, draft.salts[d][p], draft.index[(d, p)], draft.tree.proof(draft.index[(d, p)]))
                   for p in range(a, b)]
            disclosures.append(Disclosure(d, a, data[a:b], ops))
    redactions = sorted((d, a, b) for d in by_dir for a, b in by_dir[d])
    return Attestation(draft.header, draft.notary_key, {d: len(t) for d, t in draft.transcripts.items()},
                       disclosures, redactions, draft.server_identity, draft.encoder_seed, draft.encoder_salt)


def redact_attestation(att: Attestation, ranges) -> Attestation:
    """Further redact an already issued attestation (used by the CLI)."""
    cuts = _parse_ranges(ranges)
    for d, a, b in cuts:
        if not 0 <= a < b <= att.lengths[d]:
            raise RangeOutOfBounds(f"range {a}..{b} outside 0..{att.lengths[d]}")
    all_cuts = list(att.redactions)
    for c in cuts:
        for x in all_cuts:
            if c[0] == x[0] and c[1] < x[2] and x[1] < c[2]:
                raise RangeOverlap(f"range {c[1]}..{c[2]} overlaps {x[1]}..{x[2]}")
        all_cuts.append(c)
    disclosures = []
    for disc in att.disclosures:
        mine = [(a, b) for d, a, b in cuts if d == disc.direction]
        local = [(max(a, disc.start), min(b, disc.end)) for a, b in mine if a < disc.end and disc.start < b]
        for a, b in _complement(disc.end, local + [(0, disc.start)]):
            if a >= disc.start:
                ops = [o for o in disc.openings if a <= o.pos < b]
                disclosures.append(Disclosure(disc.direction, a, disc.data[a - disc.start : b - disc.start], ops))
    return Attestation(att.header, att.notary_key, att.lengths, disclosures, sorted(all_cuts),
                       att.server_identity, att.encoder_seed, att.encoder_salt)


# -- verification -----------------------------------------------------------------------------------------

@dataclass
class VerificationReport:
    accepted: bool = True
    checks: list[dict] = field(default_factory=list)
    views: dict[str, list] = field(default_factory=dict)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append({"check": name, "ok": bool(ok), "detail": detail})
        if not ok:
            self.accepted = False

    def failed(self) -> list[str]:
        return [c["check"] for c in self.checks if not c["ok"]]

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "checks": self.checks, "views": self.views}


def render_view(length: int, pieces: Sequence[tuple[int, bytes]]) -> list:
    """Per-byte view: the disclosed byte value, or None for a redacted byte."""
    out: list = [None] * length
    for start, data in pieces:
        for i, b in enumerate(data):
            if 0 <= start + i < length:
                out[start + i] = b
    return out


def verify_attestation(att: Attestation, notary_key: bytes | None = None,
                       purported: dict | None = None) -> VerificationReport:
    """Check an attestation; ``purported`` maps (dir, start) to claimed bytes for that disclosure."""
    rep = VerificationReport()
    key = notary_key if notary_key is not None else att.notary_key
    hdr = att.header
    rep.add("signature", verify_header(hdr, key), "Notary signature over the session header")
    rep.add("encoder_seed", open_ok(hdr.encoder_seed_commitment, att.encoder_seed, att.encoder_salt),
            "opened encoder seed matches its commitment")
    si = att.server_identity
    rep.add("server_identity", open_ok(hdr.server_identity_commitment, si.payload(), si.salt),
            "server identity opening matches its commitment")
    rep.add("server_key", hashlib.sha256(si.server_key).digest() == hdr.server_key_hash,
            "server key share matches the one the Notary saw")
    sig_ok = False
    try:
        Ed25519PublicKey.from_public_bytes(si.blob).verify(si.signature, si.client_random + si.server_key)
        sig_ok = True
    except (InvalidSignature, ValueError):
        pass
    rep.add("server_signature", sig_ok, "server identity signed the key share")
    # disclosed and redacted ranges must partition each transcript
    for d in (SENT, RECV):
        spans = sorted([(x.start, x.end) for x in att.disclosures if x.direction == d]
                       + [(a, b) for dd, a, b in att.redactions if dd == d])
        pos, ok = 0, True
        for a, b in spans:
            ok &= a == pos and b > a
            pos = b
        ok &= pos == att.lengths.get(d, 0)
        rep.add(f"partition_{_dir_name(d)}", ok, "disclosures and redactions cover the transcript once")
    try:
        enc = PlaintextEncoder(att.encoder_seed)
    except ValueError as e:
        rep.add("encoder_seed_format", False, str(e))
        return rep
    purported = purported or {}
    pieces: dict[int, list] = {SENT: [], RECV: []}
    for disc in att.disclosures:
        data = purported.get((disc.direction, disc.start), disc.data)
        ok = len(data) == len(disc.data) == len(disc.openings)
        bad = []
        if ok:
            for i, (byte, op) in enumerate(zip(data, disc.openings)):
                pos = disc.start + i
                if op.pos != pos:
                    bad.append(pos)
                    continue
                digest = byte_commitment(enc.byte_labels(disc.direction, pos, byte), op.salt).digest
                leaf = leaf_hash(disc.direction, pos, digest)
                if not verify_inclusion(hdr.merkle_root, leaf, op.index, op.proof, hdr.tree_size):
                    bad.append(pos)
        ok = ok and not bad
        rep.add(f"inclusion_{_dir_name(disc.direction)}_{disc.start}", ok,
                "every byte's encoding commitment is in the signed tree" if ok
                else f"bytes not notarized at positions {bad[:8]}")
        pieces[disc.direction].append((disc.start, data))
    rep.views = {_dir_name(d): render_view(att.lengths.get(d, 0), pieces[d]) for d in (SENT, RECV)}
    return rep
