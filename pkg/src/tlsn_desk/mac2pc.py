"""Two-party GHASH and the GCM-style tag.

With H = h_C + h_N (XOR) the tag over ciphertext blocks X_1..X_n is

    MAC = X_1*H^n + X_2*H^(n-1) + ... + X_n*H + GCTR(J0)

which is linear in the powers of H. The parties turn their additive key
shares into multiplicative ones once, raise them to every needed power
locally, and convert odd powers back to additive shares with m2a. Even
powers come for free: squaring is additive in characteristic two, so a
share of H^(2k) is the square of a share of H^k. Each party then evaluates
its half of GHASH locally.

The single-party reference below also covers full GCM (AAD and the length
block) over GF(2^128), which the 2PC path does not.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from . import wire
from .algebra import BinaryField, get_field
from .errors import MacMismatch
from .ole import a2m, m2a


@dataclass(frozen=True)
class GhashKeyShare:
    h: object
    party: str


@dataclass(frozen=True)
class GctrShare:
    s: object
    party: str


@dataclass(frozen=True)
class CiphertextBlocks:
    blocks: tuple

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("need at least one block")
        if len({b.field.field_id for b in self.blocks}) != 1:
            raise ValueError("blocks from different fields")

    @property
    def n(self) -> int:
        return len(self.blocks)


def ghash_ref(blocks: Sequence, H):
    """Horner form of sum X_i * H^(n+1-i)."""
    y = H.field.zero()
    for x in blocks:
        y = (y + x) * H
    return y


# -- single-party GCM over GF(2^128) ---------------------------------------------------------

def _aes_block(key: bytes, block: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def _blocks(data: bytes) -> list[bytes]:
    data = data + b"\x00" * (-len(data) % 16)
    return [data[i : i + 16] for i in range(0, len(data), 16)]


def gcm_ghash(H: bytes, aad: bytes, ct: bytes) -> bytes:
    """GHASH over padded AAD, padded ciphertext and the 64+64-bit length block."""
    F = get_field("gf2_128")
    lens = (8 * len(aad)).to_bytes(8, "big") + (8 * len(ct)).to_bytes(8, "big")
    xs = [F.from_gcm_block(b) for b in _blocks(aad) + _blocks(ct) + [lens]]
    return F.to_gcm_block(ghash_ref(xs, F.from_gcm_block(H)))


def _inc32(block: bytes) -> bytes:
    c = (int.from_bytes(block[12:], "big") + 1) & 0xFFFFFFFF
    return block[:12] + c.to_bytes(4, "big")


def gcm_encrypt_ref(key: bytes, iv: bytes, pt: bytes, aad: bytes = b"") -> tuple[bytes, bytes]:
    """AES-GCM with a 96-bit IV, built from GHASH and raw AES block calls."""
    if len(iv) != 12:
        raise ValueError("reference supports 96-bit IVs only")
    H = _aes_block(key, b"\x00" * 16)
    j0 = iv + b"\x00\x00\x00\x01"
    ctr, out = j0, bytearray()
    for i in range(0, len(pt), 16):
        ctr = _inc32(ctr)
        ks = _aes_block(key, ctr)
        out += bytes(a ^ b for a, b in zip(pt[i : i + 16], ks))
    ct = bytes(out)
    s = gcm_ghash(H, aad, ct)
    tag = bytes(a ^ b for a, b in zip(s, _aes_block(key, j0)))
    return ct, tag


def mac_ref(blocks: Sequence, H, gctr):
    """Desk-profile tag: GHASH over ciphertext blocks only, plus GCTR(J0)."""
    return ghash_ref(blocks, H) + gctr


# -- 2PC ------------------------------------------------------------------------------------------

def compute_share_powers(ch, field: BinaryField, h_own, n: int, notary: bool, tag: str = "hpow"):
    """Additive shares of H^1..H^n for this party.

    One a2m, then m2a for each odd power >= 3; even powers are squares of
    lower shares. n = 1 needs no conversion at all.
    """
    if n < 1:
        raise ValueError("need at least one power")
    shares = [None, h_own]
    if n == 1:
        return shares[1:]
    z = yield from a2m(ch, field, h_own, sampler=notary, tag=f"{tag}.a2m")
    zk = z
    z2 = z * z
    for k in range(2, n + 1):
        if k % 2 == 0:
            shares.append(shares[k // 2].square())
        else:
            zk = zk * z2
            d = yield from m2a(ch, field, zk, sender=notary, tag=f"{tag}.m2a{k}")
            shares.append(d)
    return shares[1:]


def ghash_share(blocks: Sequence, powers: Sequence):
    """Local half of GHASH: sum X_i * [H^(n+1-i)]."""
    n = len(blocks)
    if len(powers) < n:
        raise ValueError("not enough power shares")
    acc = blocks[0].field.zero()
    for i, x in enumerate(blocks):
        acc = acc + x * powers[n - 1 - i]
    return acc


def mac_client(ch, blocks: Sequence, h_c, gctr_c, tag: str = "mac"):
    """Client side of compute_mac_2pc; returns the full tag."""
    field = h_c.field
    powers = yield from compute_share_powers(ch, field, h_c, len(blocks), False, f"{tag}.pow")
    mac_c = ghash_share(blocks, powers) + gctr_c
    msg = yield ch.recv(f"{tag}.mac_n")
    mac_n = wire.fe_in(msg, field)
    yield ch.send(f"{tag}.mac_c", wire.fe_out(mac_c))
    return mac_c + mac_n


def mac_notary(ch, blocks: Sequence, h_n, gctr_n, tag: str = "mac"):
    field = h_n.field
    powers = yield from compute_share_powers(ch, field, h_n, len(blocks), True, f"{tag}.pow")
    mac_n = ghash_share(blocks, powers) + gctr_n
    yield ch.send(f"{tag}.mac_n", wire.fe_out(mac_n))
    msg = yield ch.recv(f"{tag}.mac_c")
    return mac_n + wire.fe_in(msg, field)


def verify_mac_client(ch, blocks, h_c, gctr_c, expected, tag: str = "mac"):
    mac = yield from mac_client(ch, blocks, h_c, gctr_c, tag)
    if mac != expected:
        raise MacMismatch("record tag does not match the 2PC tag")
    return mac


def verify_mac_notary(ch, blocks, h_n, gctr_n, expected, tag: str = "mac"):
    mac = yield from mac_notary(ch, blocks, h_n, gctr_n, tag)
    if mac != expected:
        raise MacMismatch("record tag does not match the 2PC tag")
    return mac


def run_share_powers(h_c, h_n, n: int, seeds=(1, 2)):
    from .transport import run_pair

    field = h_c.field
    return run_pair(lambda ch: compute_share_powers(ch, field, h_c, n, False),
                    lambda ch: compute_share_powers(ch, field, h_n, n, True), seeds)


def compute_mac_2pc(blocks: Sequence, keys: tuple, gctr: tuple, seeds=(1, 2)):
    """In-process 2PC tag from (h_C, h_N) and (GCTR_C, GCTR_N)."""
    from .transport import run_pair

    mac, _ = run_pair(lambda ch: mac_client(ch, blocks, keys[0], gctr[0]),
                      lambda ch: mac_notary(ch, blocks, keys[1], gctr[1]), seeds)
    return mac
