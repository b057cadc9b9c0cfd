"""Deterministic PRG: SHAKE-256 in counter mode over a seed.

Every random choice a party makes is drawn from one of these, so a session is
fully determined by its seeds and any committed randomness can be replayed.
"""
from __future__ import annotations

import hashlib
import struct

BLOCK = 256  # bytes per counter block


def _key(seed: bytes, label: bytes) -> bytes:
    h = hashlib.sha256(b"tlsn-desk/prg")
    h.update(struct.pack("<I", len(seed)) + seed)
    h.update(struct.pack("<I", len(label)) + label)
    return h.digest()


def as_seed(seed) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return seed.to_bytes(8, "little", signed=False)
    if isinstance(seed, str):
        return seed.encode()
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


class Prg:
    __slots__ = ("key", "_ctr", "_buf")

    def __init__(self, seed, label: bytes | str = b""):
        if isinstance(label, str):
            label = label.encode()
        self.key = _key(as_seed(seed), label)
        self._ctr = 0
        self._buf = b""

    def fork(self, label: bytes | str) -> "Prg":
        """Independent child stream; does not advance this one."""
        return Prg(self.key, label)

    def bytes(self, n: int) -> bytes:
        need = n - len(self._buf)
        if need > 0:
            k = (need + BLOCK - 1) // BLOCK
            key, c = self.key, self._ctr
            shake = hashlib.shake_256
            self._buf += b"".join(shake(key + (c + i).to_bytes(8, "little")).digest(BLOCK) for i in range(k))
            self._ctr = c + k
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def randbits(self, k: int) -> int:
        if k <= 0:
            return 0
        v = int.from_bytes(self.bytes((k + 7) // 8), "little")
        return v & ((1 << k) - 1)

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        while True:
            v = self.randbits(k)
            if v < n:
                return v

    def bit(self) -> int:
        return self.randbits(1)
