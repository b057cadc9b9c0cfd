"""Yao garbling with point-and-permute, free XOR and classical 4-row AND tables.

Labels are 128-bit integers. The permute bit is the label's low bit and the
global offset Delta is odd, so the two labels of a wire always disagree on it.
An AND row is ``SHA-256(k_a || k_b || tweak)[:20] XOR (label || 0^32)``; the
evaluator decrypts the single row its permute bits select and checks the
32-bit zero tag. Garbling is a pure function of (circuit, seed, overrides).
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .circuits.core import AND, INV, XOR, BooleanCircuit, assign_inputs
from .errors import ProtocolAbort
from .prg import Prg

LABEL_BITS = 128
LABEL_MASK = (1 << LABEL_BITS) - 1
ROW_BYTES = 20
_AND_TABLE = (0, 0, 0, 1)


class RowTagFailure(ProtocolAbort):
    """A decrypted row had a nonzero tag: corrupted table or wrong labels."""


class WidthMismatch(ValueError):
    pass


def _row_pad(ka: int, kb: int, tweak_base: bytes, gate: int) -> int:
    h = hashlib.sha256(ka.to_bytes(16, "little") + kb.to_bytes(16, "little")
                       + tweak_base + struct.pack("<I", gate)).digest()
    return int.from_bytes(h[:ROW_BYTES], "little")


@dataclass(frozen=True)
class GarbledCircuit:
    circuit_hash: bytes
    tweak_base: bytes
    rows: bytes

    @property
    def n_rows(self) -> int:
        return len(self.rows) // ROW_BYTES

    def to_bytes(self) -> bytes:
        return self.circuit_hash + self.tweak_base + struct.pack("<I", len(self.rows)) + self.rows

    @classmethod
    def from_bytes(cls, data: bytes) -> "GarbledCircuit":
        if len(data) < 52:
            raise ValueError("garbled circuit blob too short")
        (n,) = struct.unpack("<I", data[48:52])
        if len(data) != 52 + n or n % ROW_BYTES:
            raise ValueError("garbled circuit blob length mismatch")
        return cls(data[:32], data[32:48], data[52:])


@dataclass(frozen=True)
class EncodingInfo:
    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)


@dataclass(frozen=True)
class DecodingInfo:
    bits: tuple[int, ...]


@dataclass
class Garbling:
    """Garbler-side result. ``F``, ``e`` and ``d`` are the public triple."""

    circuit: BooleanCircuit
    F: GarbledCircuit
    e: EncodingInfo
    d: DecodingInfo
    delta: int
    zero: list[int] = field(repr=False)

    def __iter__(self):
        return iter((self.F, self.e, self.d))

    def label(self, wire: int, bit: int) -> int:
        return self.zero[wire] ^ (self.delta if bit else 0)

    def group_labels(self, name: str, value: int | Sequence[int]) -> list[int]:
        wires = self.circuit.group_wires(name)
        bits = value if not isinstance(value, int) else [(value >> i) & 1 for i in range(len(wires))]
        if len(bits) != len(wires):
            raise WidthMismatch(f"group {name}: {len(bits)} bits, want {len(wires)}")
        return [self.label(w, b) for w, b in zip(wires, bits)]

    def group_pairs(self, name: str) -> list[tuple[int, int]]:
        return [(self.zero[w], self.zero[w] ^ self.delta) for w in self.circuit.group_wires(name)]

    def output_labels(self, bits: Sequence[int]) -> list[int]:
        return [self.label(w, b) for w, b in zip(self.circuit.output_wires, bits)]

    def output_pairs(self) -> list[tuple[int, int]]:
        return [(self.zero[w], self.zero[w] ^ self.delta) for w in self.circuit.output_wires]


def garble(c: BooleanCircuit, seed: bytes, delta: int | None = None,
           input_zero: Mapping[int, int] | None = None,
           gate_override: Mapping[int, tuple[int, int, int, int]] | None = None) -> Garbling:
    """Gb: garble ``c`` deterministically from ``seed``.

    ``delta`` and ``input_zero`` let a caller pin the offset and the 0-labels
    of chosen input wires (the record layer binds plaintext wires to the
    session encoder this way). ``gate_override`` maps an AND gate's index to
    a different truth table; it exists only to model a cheating garbler.
    """
    prg = Prg(seed, "garble")
    drawn = prg.randbits(LABEL_BITS) | 1  # always drawn so a pinned offset keeps the stream aligned
    if delta is None:
        delta = drawn
    if not delta & 1:
        raise ValueError("delta must have its permute bit set")
    tweak = prg.bytes(16)
    input_zero = input_zero or {}
    gate_override = gate_override or {}
    for gi in gate_override:
        if not 0 <= gi < len(c.gates) or c.gates[gi].kind != AND:
            raise ValueError(f"gate_override targets gate {gi}, which is not an AND gate")
    zero = [0] * c.n_wires
    for w in range(c.n_inputs):
        fresh = prg.randbits(LABEL_BITS)
        zero[w] = input_zero.get(w, fresh)
    rows = bytearray()
    for gi, g in enumerate(c.gates):
        if g.kind == XOR:
            zero[g.out] = zero[g.ins[0]] ^ zero[g.ins[1]]
        elif g.kind == INV:
            zero[g.out] = zero[g.ins[0]] ^ delta
        else:
            out0 = prg.randbits(LABEL_BITS)
            zero[g.out] = out0
            table = gate_override.get(gi, _AND_TABLE)
            a0, b0 = zero[g.ins[0]], zero[g.ins[1]]
            block = [b""] * 4
            for va in (0, 1):
                ka = a0 ^ (delta if va else 0)
                for vb in (0, 1):
                    kb = b0 ^ (delta if vb else 0)
                    v = table[2 * va + vb]
                    lab = out0 ^ (delta if v else 0)
                    row = (lab ^ _row_pad(ka, kb, tweak, gi)).to_bytes(ROW_BYTES, "little")
                    block[2 * (ka & 1) + (kb & 1)] = row
            rows += b"".join(block)
    F = GarbledCircuit(c.digest(), tweak, bytes(rows))
    e = EncodingInfo(tuple((zero[w], zero[w] ^ delta) for w in range(c.n_inputs)))
    d = DecodingInfo(tuple(zero[w] & 1 for w in c.output_wires))
    return Garbling(c, F, e, d, delta, zero)


def encode(e: EncodingInfo, x: Sequence[int]) -> list[int]:
    """En: pick the label for each input bit."""
    if len(x) != len(e.pairs):
        raise WidthMismatch(f"{len(x)} bits for {len(e.pairs)} encoded wires")
    return [pair[1 if b else 0] for pair, b in zip(e.pairs, x)]


def encode_inputs(e: EncodingInfo, c: BooleanCircuit, inputs) -> list[int]:
    return encode(e, assign_inputs(c, inputs))


def evaluate_wires(c: BooleanCircuit, F: GarbledCircuit, X: Sequence[int]) -> list[int]:
    """Active label of every wire."""
    if len(X) != c.n_inputs:
        raise WidthMismatch(f"{len(X)} labels for {c.n_inputs} input wires")
    if F.circuit_hash != c.digest():
        raise RowTagFailure("garbled circuit was made for a different circuit")
    if F.n_rows != 4 * c.n_and or len(F.rows) % ROW_BYTES:
        raise RowTagFailure("garbled table has the wrong number of rows")
    vals = [0] * c.n_wires
    vals[: c.n_inputs] = X
    rows = F.rows
    k = 0
    tweak = F.tweak_base
    for gi, g in enumerate(c.gates):
        if g.kind == XOR:
            vals[g.out] = vals[g.ins[0]] ^ vals[g.ins[1]]
        elif g.kind == INV:
            vals[g.out] = vals[g.ins[0]]
        else:
            ka, kb = vals[g.ins[0]], vals[g.ins[1]]
            r = 4 * k + 2 * (ka & 1) + (kb & 1)
            row = int.from_bytes(rows[ROW_BYTES * r : ROW_BYTES * (r + 1)], "little")
            m = row ^ _row_pad(ka, kb, tweak, gi)
            if m >> LABEL_BITS:
                raise RowTagFailure(f"tag check failed at gate {gi}")
            vals[g.out] = m
            k += 1
    return vals


def evaluate(c: BooleanCircuit, F: GarbledCircuit, X: Sequence[int]) -> list[int]:
    """Ev: active output labels."""
    vals = evaluate_wires(c, F, X)
    return [vals[w] for w in c.output_wires]


def decode(d: DecodingInfo, Y: Sequence[int]) -> list[int]:
    """De: permute bit of each output label XOR the 0-label's permute bit."""
    if len(Y) != len(d.bits):
        raise WidthMismatch(f"{len(Y)} labels for {len(d.bits)} outputs")
    return [(y & 1) ^ p for y, p in zip(Y, d.bits)]


def verify_garbling(F: GarbledCircuit, c: BooleanCircuit, seed: bytes, delta: int | None = None,
                    input_zero: Mapping[int, int] | None = None) -> bool:
    """Re-garble from the opened seed material and compare byte for byte."""
    return garble(c, seed, delta, input_zero).F.to_bytes() == F.to_bytes()
