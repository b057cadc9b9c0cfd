"""1-of-2 oblivious transfer over an elliptic-curve group.

The base OT is the Chou-Orlandi construction, batched with one sender key
per batch:

    sender    C = c*G                        ->
    receiver  N_j = n_j*G (+ C if b_j = 1)   <-
    sender    k0 = H(c*N_j), k1 = H(c*(N_j - C)); sends Enc(k0, m0), Enc(k1, m1)
    receiver  k_b = H(n_j*C) opens the chosen ciphertext

Correlated and random OT are thin wrappers. A committed batch draws all of
the sender's randomness from PRG(rho) so the receiver can replay it once rho
is opened.

The default group is the enumerable toy curve, where scalar multiplication is
a table lookup. It keeps the many thousands of OTs behind OLE fast enough for
desk tests but offers no security; select "p256" on the party context for the
real curve.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .algebra import CurveParams, CurvePoint, OffCurvePoint, ec_scalar_mul, get_curve, point_add, point_neg
from .commit import commit_payload, open_ok
from .errors import CommitmentOpenFailure, DecryptionFailure, OtReplayMismatch
from .prg import Prg

TAG_LEN = 16


class EnumeratedGroup:
    """A small prime-order curve group with every point tabulated.

    Elements are represented by their discrete log with respect to G, so the
    group operation is integer arithmetic modulo n. Only the encoding touches
    actual curve points.
    """

    def __init__(self, curve: CurveParams):
        self.curve = curve
        self.n = curve.n
        self.width = 2 * curve.coord_len
        enc = [bytes(self.width)]
        P = curve.G
        for _ in range(1, self.n):
            enc.append(P.to_bytes())
            P = point_add(P, curve.G)
        if not P.is_identity:
            raise ValueError("group order mismatch while tabulating")
        self._enc = enc
        self._dec = {e: i for i, e in enumerate(enc)}

    def gen_mul(self, k: int) -> int:
        return k % self.n

    def mul(self, k: int, P: int) -> int:
        return k * P % self.n

    def add(self, P: int, Q: int) -> int:
        return (P + Q) % self.n

    def sub(self, P: int, Q: int) -> int:
        return (P - Q) % self.n

    def encode(self, P: int) -> bytes:
        return self._enc[P]

    def decode(self, data: bytes) -> int:
        try:
            return self._dec[data]
        except KeyError:
            raise OffCurvePoint("OT point is not on the curve") from None


class CurveGroup:
    """Generic curve group using affine point arithmetic."""

    def __init__(self, curve: CurveParams):
        self.curve = curve
        self.n = curve.n
        self.width = 2 * curve.coord_len

    def gen_mul(self, k: int) -> CurvePoint:
        return ec_scalar_mul(k, self.curve.G)

    def mul(self, k: int, P: CurvePoint) -> CurvePoint:
        return ec_scalar_mul(k, P)

    def add(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return point_add(P, Q)

    def sub(self, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
        return point_add(P, point_neg(Q))

    def encode(self, P: CurvePoint) -> bytes:
        return P.to_bytes()

    def decode(self, data: bytes) -> CurvePoint:
        return CurvePoint.from_bytes(self.curve, data)


@lru_cache(maxsize=None)
def get_group(name: str):
    curve = get_curve(name)
    return EnumeratedGroup(curve) if curve.n < 1 << 20 else CurveGroup(curve)


def _group_of(ch):
    return get_group(getattr(ch.ctx, "ot_group", "toy"))


def _prefix(tag: str) -> bytes:
    t = tag.encode()
    return b"tlsn-desk/ot" + struct.pack("<H", len(t)) + t


def _hasher(w: int):
    """Keystream of w bytes plus a 16-byte tag key, from the shared-point encoding."""
    n = w + 16
    if n <= 64:
        blake2b = hashlib.blake2b
        return lambda data: blake2b(data, digest_size=n).digest()
    shake = hashlib.shake_256
    return lambda data: shake(data).digest(n)


def _seal(h, data: bytes, m: int, w: int) -> bytes:
    """Encrypt integer message m (w bytes) under the key derived from ``data``."""
    s = h(data)
    body = (m ^ int.from_bytes(s[16:], "little")).to_bytes(w, "little")
    return body + hashlib.blake2s(body, key=s[:16], digest_size=TAG_LEN).digest()


def _open(h, data: bytes, c: bytes, w: int) -> int:
    s = h(data)
    body = c[:w]
    if hashlib.blake2s(body, key=s[:16], digest_size=TAG_LEN).digest() != c[w:]:
        raise DecryptionFailure("OT ciphertext failed its tag check")
    return int.from_bytes(body, "little") ^ int.from_bytes(s[16:], "little")


def _split(blob: bytes, size: int, count: int) -> list[bytes]:
    if size <= 0 or len(blob) != size * count:
        raise DecryptionFailure("OT frame has the wrong length")
    return [blob[i * size : (i + 1) * size] for i in range(count)]


@dataclass(frozen=True)
class OtSenderInput:
    m0: bytes
    m1: bytes

    def __post_init__(self):
        if len(self.m0) != len(self.m1):
            raise ValueError("OT messages must have equal length")


def _as_int_pairs(pairs, width: int | None) -> tuple[list[tuple[int, int]], int]:
    if width is not None:
        return [(int(a), int(b)) for a, b in pairs], width
    if not pairs:
        return [], 0
    w = len(pairs[0][0])
    out = []
    for m0, m1 in pairs:
        if len(m0) != w or len(m1) != w:
            raise ValueError("all OT messages in a batch must have the same length")
        out.append((int.from_bytes(m0, "little"), int.from_bytes(m1, "little")))
    return out, w


def _sender_messages(group, c_sk: int, C, pks: list[bytes], pairs, tag: str, w: int) -> tuple[bytes, bytes]:
    prefix = _prefix(tag)
    h = _hasher(w)
    c0, c1 = [], []
    if isinstance(group, EnumeratedGroup) and w + 16 <= 64:
        # the hot loop of every OLE, with _seal inlined
        enc, n, dec = group._enc, group.n, group._dec
        b2b, mac, frm = hashlib.blake2b, hashlib.blake2s, int.from_bytes
        dl = w + 16
        a0, a1 = c0.append, c1.append
        for j, (pk, (m0, m1)) in enumerate(zip(pks, pairs)):
            N = dec.get(pk)
            if N is None:
                raise OffCurvePoint("OT point is not on the curve")
            pj = prefix + j.to_bytes(4, "little")
            s = b2b(pj + enc[c_sk * N % n], digest_size=dl).digest()
            body = (m0 ^ frm(s[16:], "little")).to_bytes(w, "little")
            a0(body + mac(body, key=s[:16], digest_size=TAG_LEN).digest())
            s = b2b(pj + enc[c_sk * (N - C) % n], digest_size=dl).digest()
            body = (m1 ^ frm(s[16:], "little")).to_bytes(w, "little")
            a1(body + mac(body, key=s[:16], digest_size=TAG_LEN).digest())
    elif isinstance(group, EnumeratedGroup):
        enc, n, dec = group._enc, group.n, group._dec
        for j, (pk, (m0, m1)) in enumerate(zip(pks, pairs)):
            N = dec.get(pk)
            if N is None:
                raise OffCurvePoint("OT point is not on the curve")
            pj = prefix + j.to_bytes(4, "little")
            c0.append(_seal(h, pj + enc[c_sk * N % n], m0, w))
            c1.append(_seal(h, pj + enc[c_sk * (N - C) % n], m1, w))
    else:
        for j, (pk, (m0, m1)) in enumerate(zip(pks, pairs)):
            N = group.decode(pk)
            pj = prefix + j.to_bytes(4, "little")
            c0.append(_seal(h, pj + group.encode(group.mul(c_sk, N)), m0, w))
            c1.append(_seal(h, pj + group.encode(group.mul(c_sk, group.sub(N, C))), m1, w))
    return b"".join(c0), b"".join(c1)


def ot_send(ch, pairs, tag: str = "ot", prg: Prg | None = None,
            substitute: dict | None = None, width: int | None = None):
    """Sender half of a batch of base OTs.

    ``pairs`` are byte strings of one length, or integers of ``width`` bytes
    when ``width`` is given. ``prg`` defaults to a fresh party stream.
    ``substitute`` replaces chosen transfers after the randomness schedule is
    fixed; it exists only to model a cheating sender in tests.
    """
    ipairs, w = _as_int_pairs(pairs, width)
    group = _group_of(ch)
    prg = prg or ch.ctx.fork(f"ot:{tag}")
    c_sk = 1 + prg.randbelow(group.n - 1)
    C = group.gen_mul(c_sk)
    yield ch.send(f"{tag}.s_pk", {"pk": group.encode(C).hex(), "n": len(ipairs), "w": w})
    msg = yield ch.recv(f"{tag}.r_pk")
    pks = _split(bytes.fromhex(msg["pks"]), group.width, len(ipairs))
    if substitute:
        subs, _ = _as_int_pairs(list(substitute.values()), width)
        for j, pair in zip(substitute, subs):
            ipairs[j] = pair
    c0, c1 = _sender_messages(group, c_sk, C, pks, ipairs, tag, w)
    yield ch.send(f"{tag}.ct", {"c0": c0.hex(), "c1": c1.hex()})


@dataclass
class OtRecord:
    """What a receiver keeps to replay a committed batch later."""

    tag: str
    group: str
    s_pk: bytes
    r_pks: bytes
    c0: bytes
    c1: bytes
    n: int


def ot_recv(ch, choices: Sequence[int], tag: str = "ot", keep: bool = False, as_int: bool = False):
    """Receiver half; returns the chosen messages (and an OtRecord if ``keep``).

    Messages come back as bytes, or as little-endian integers with ``as_int``.
    """
    group = _group_of(ch)
    prg = ch.ctx.fork(f"ot-recv:{tag}")
    msg = yield ch.recv(f"{tag}.s_pk")
    if msg["n"] != len(choices):
        raise DecryptionFailure(f"sender offers {msg['n']} transfers, receiver wants {len(choices)}")
    w = msg["w"]
    s_pk = bytes.fromhex(msg["pk"])
    C = group.decode(s_pk)
    if isinstance(group, EnumeratedGroup):
        # 64-bit draws reduced mod n-1: bias below 2^-40, fine for the toy group
        raw = prg.bytes(8 * len(choices))
        sks = [1 + int.from_bytes(raw[8 * i : 8 * i + 8], "little") % (group.n - 1) for i in range(len(choices))]
        enc, n = group._enc, group.n
        r_pks = b"".join(enc[(k + C) % n] if b else enc[k] for k, b in zip(sks, choices))
    else:
        sks = [1 + prg.randbelow(group.n - 1) for _ in choices]
        r_pks = b"".join(group.encode(group.add(group.gen_mul(k), C) if b else group.gen_mul(k))
                         for k, b in zip(sks, choices))
    yield ch.send(f"{tag}.r_pk", {"pks": r_pks.hex()})
    ct = yield ch.recv(f"{tag}.ct")
    c0 = bytes.fromhex(ct["c0"])
    c1 = bytes.fromhex(ct["c1"])
    size = w + TAG_LEN
    c0s = _split(c0, size, len(choices))
    c1s = _split(c1, size, len(choices))
    prefix = _prefix(tag)
    h = _hasher(w)
    if isinstance(group, EnumeratedGroup) and w + 16 <= 64:
        b2b, mac, frm, dl, out = hashlib.blake2b, hashlib.blake2s, int.from_bytes, w + 16, []
        for j, (b, n_sk) in enumerate(zip(choices, sks)):
            s = b2b(prefix + j.to_bytes(4, "little") + enc[n_sk * C % n], digest_size=dl).digest()
            c = c1s[j] if b else c0s[j]
            body = c[:w]
            if mac(body, key=s[:16], digest_size=TAG_LEN).digest() != c[w:]:
                raise DecryptionFailure("OT ciphertext failed its tag check")
            out.append(frm(body, "little") ^ frm(s[16:], "little"))
    else:
        out = [_open(h, prefix + j.to_bytes(4, "little") + group.encode(group.mul(n_sk, C)),
                     c1s[j] if b else c0s[j], w)
               for j, (b, n_sk) in enumerate(zip(choices, sks))]
    if not as_int:
        out = [v.to_bytes(w, "little") for v in out]
    if keep:
        return out, OtRecord(tag, getattr(ch.ctx, "ot_group", "toy"), s_pk, r_pks, c0, c1, len(choices))
    return out


def run_base_ot(sender: Sequence[OtSenderInput], choices: Sequence[int], seeds=(1, 2), group: str = "toy"):
    """Run one honest batch in-process; returns the receiver's messages."""
    from .transport import run_pair

    pairs = [(s.m0, s.m1) for s in sender]

    def snd(ch):
        ch.ctx.ot_group = group
        yield from ot_send(ch, pairs)

    def rcv(ch):
        ch.ctx.ot_group = group
        return (yield from ot_recv(ch, choices))

    return run_pair(snd, rcv, seeds, names=("sender", "receiver"))[1]


# -- correlated and random OT -----------------------------------------------------

def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(len(a), "little")


def cot_send(ch, deltas: Sequence[bytes], tag: str = "cot"):
    """Sender gets random r_j; the implicit pair is (r_j, r_j ^ delta_j)."""
    prg = ch.ctx.fork(f"cot:{tag}")
    rs = [prg.bytes(len(d)) for d in deltas]
    if any(len(d) == 0 for d in deltas):
        raise ValueError("COT correlation must be nonempty")
    yield from ot_send(ch, [(r, _xor(r, d)) for r, d in zip(rs, deltas)], tag)
    return rs


def cot_recv(ch, choices: Sequence[int], tag: str = "cot"):
    return (yield from ot_recv(ch, choices, tag))


def rot_send(ch, n: int, width: int = 16, tag: str = "rot"):
    prg = ch.ctx.fork(f"rot:{tag}")
    pairs = [(prg.bytes(width), prg.bytes(width)) for _ in range(n)]
    yield from ot_send(ch, pairs, tag)
    return pairs


def rot_recv(ch, choices: Sequence[int], tag: str = "rot"):
    return (yield from ot_recv(ch, choices, tag))


# -- committed OT ---------------------------------------------------------------------

@dataclass(frozen=True)
class CommittedOtSeed:
    rho: bytes
    salt: bytes
    com: bytes

    @classmethod
    def fresh(cls, prg: Prg) -> "CommittedOtSeed":
        rho, salt = prg.bytes(32), prg.bytes(16)
        return cls(rho, salt, commit_payload(rho, salt).digest)


def tape(rho: bytes, tag: str) -> Prg:
    return Prg(rho, f"ot-tape:{tag}")


def committed_ot_send(ch, pairs, rho: bytes, tag: str = "cot", substitute=None, width: int | None = None):
    """Sender half whose randomness is the fixed PRG(rho) schedule for ``tag``."""
    yield from ot_send(ch, pairs, tag, prg=tape(rho, tag), substitute=substitute, width=width)


def committed_ot_recv(ch, choices, tag: str = "cot", as_int: bool = False):
    """Receiver half; returns (messages, OtOpening)."""
    out, rec = yield from ot_recv(ch, choices, tag, keep=True, as_int=as_int)
    return out, OtOpening(rec)


@dataclass
class OtOpening:
    record: OtRecord

    def verify(self, rho: bytes, salt: bytes, com: bytes, pairs, width: int | None = None) -> bool:
        """Replay the sender from the opened seed; raise on any deviation."""
        if not open_ok(com, rho, salt):
            raise CommitmentOpenFailure("opened rho does not match com_rho")
        if not verify_replay(self.record, rho, pairs, width):
            raise OtReplayMismatch(f"OT batch {self.record.tag!r} deviates from the PRG(rho) schedule")
        return True


def verify_replay(rec: OtRecord, rho: bytes, pairs, width: int | None = None) -> bool:
    if len(pairs) != rec.n:
        return False
    group = get_group(rec.group)
    prg = tape(rho, rec.tag)
    c_sk = 1 + prg.randbelow(group.n - 1)
    C = group.gen_mul(c_sk)
    if group.encode(C) != rec.s_pk:
        return False
    pks = _split(rec.r_pks, group.width, rec.n)
    ipairs, w = _as_int_pairs(pairs, width)
    c0, c1 = _sender_messages(group, c_sk, C, pks, ipairs, rec.tag, w)
    return c0 == rec.c0 and c1 == rec.c1
