"""The toy block cipher: 16-bit block, 32-bit key, 4-round SPN.

Each round XORs a round key, applies the 4-bit S-box to every nibble and
rotates the block left by 3. Round key i is key bits [16i mod 32, +16).
A final whitening XOR with round key 4 ends the cipher. The S-box is the
PRESENT one. This is a stand-in for a real block cipher in garbled form and
has no security value.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .builder import C1, CircuitBuilder

SBOX = (0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD, 0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2)
ROUNDS = 4
ROT = 3
BLOCK_BITS = 16
KEY_BITS = 32
MASK16 = 0xFFFF


def round_key(key: int, i: int) -> int:
    return (key >> ((16 * i) % 32)) & MASK16


def _rotl16(x: int, r: int) -> int:
    return ((x << r) | (x >> (16 - r))) & MASK16


def _sbox_layer(x: int) -> int:
    return sum(SBOX[(x >> (4 * j)) & 0xF] << (4 * j) for j in range(4))


def spn_encrypt(key: int, block: int) -> int:
    x = block & MASK16
    for r in range(ROUNDS):
        x = _rotl16(_sbox_layer(x ^ round_key(key, r)), ROT)
    return x ^ round_key(key, ROUNDS)


@lru_cache(maxsize=None)
def sbox_anf() -> tuple[tuple[int, ...], ...]:
    """Monomials (as 4-bit input masks) of each S-box output bit."""
    out = []
    for bit in range(4):
        coeffs = [(SBOX[x] >> bit) & 1 for x in range(16)]
        # Moebius transform
        for i in range(4):
            for m in range(16):
                if m >> i & 1:
                    coeffs[m] ^= coeffs[m ^ (1 << i)]
        out.append(tuple(m for m in range(16) if coeffs[m]))
    return tuple(out)


def sbox_bits(b: CircuitBuilder, nib: Sequence) -> list:
    mono: dict[int, object] = {}

    def product(m: int):
        if m in mono:
            return mono[m]
        low = m & -m
        idx = low.bit_length() - 1
        rest = m ^ low
        v = nib[idx] if rest == 0 else b.and_(product(rest), nib[idx])
        mono[m] = v
        return v

    out = []
    for monos in sbox_anf():
        acc = None
        for m in monos:
            term = C1 if m == 0 else product(m)
            acc = term if acc is None else b.xor(acc, term)
        out.append(acc)
    return out


def cipher_bits(b: CircuitBuilder, key: Sequence, block: Sequence) -> list:
    """Wire-level SPN; ``key`` is 32 bits, ``block`` 16 bits, LSB first."""
    def rk(i):
        s = (16 * i) % 32
        return list(key[s : s + 16])

    x = list(block)
    for r in range(ROUNDS):
        x = b.xor_vec(x, rk(r))
        y = []
        for j in range(4):
            y.extend(sbox_bits(b, x[4 * j : 4 * j + 4]))
        # rotate left by ROT: new bit i = old bit (i - ROT) mod 16
        x = [y[(i - ROT) % 16] for i in range(16)]
    return b.xor_vec(x, rk(ROUNDS))


def fold32(value: int, width: int) -> int:
    """XOR the value's 32-bit chunks together (zero-extended to a multiple of 32)."""
    out = 0
    for s in range(0, max(width, 1), 32):
        out ^= (value >> s) & 0xFFFFFFFF
    return out


def derive_session_keys(pms: int, width: int) -> tuple[int, int]:
    """Desk key schedule: (client-write key, server-write key), 32 bits each."""
    k = fold32(pms, width)
    e = [spn_encrypt(k, i) for i in range(1, 5)]
    return e[0] | (e[1] << 16), e[2] | (e[3] << 16)
