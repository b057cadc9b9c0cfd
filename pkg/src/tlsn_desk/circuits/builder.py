"""Programmatic circuit construction with constant folding.

Builder methods take and return "bits": either a wire id (int) or one of the
constants ``C0``/``C1``. Constants are folded away so that, for example,
adding a public modulus costs no AND gates for its zero bits.
"""
from __future__ import annotations

from typing import Sequence

from .core import AND, INV, XOR, BooleanCircuit, Gate


class _Const:
    __slots__ = ("v",)

    def __init__(self, v: int):
        self.v = v

    def __repr__(self):
        return f"C{self.v}"


C0 = _Const(0)
C1 = _Const(1)
Bit = "int | _Const"


def const(v: int) -> _Const:
    return C1 if v else C0


class CircuitBuilder:
    def __init__(self):
        self.n_wires = 0
        self.gates: list[Gate] = []
        self.groups: dict[str, tuple[int, int]] = {}
        self.named: dict[str, list[int]] = {}
        self._zero = None
        self._outputs: list = []

    def input(self, name: str, width: int) -> list[int]:
        if self.gates:
            raise ValueError("declare all inputs before adding gates")
        start = self.n_wires
        self.groups[name] = (start, width)
        self.n_wires += width
        return list(range(start, start + width))

    def _gate(self, kind: str, ins: tuple[int, ...]) -> int:
        out = self.n_wires
        self.n_wires += 1
        self.gates.append(Gate(kind, ins, out))
        return out

    # -- single bits --------------------------------------------------------
    def xor(self, a, b):
        if isinstance(a, _Const):
            a, b = b, a
        if isinstance(b, _Const):
            if isinstance(a, _Const):
                return const(a.v ^ b.v)
            return self.inv(a) if b.v else a
        return self._gate(XOR, (a, b))

    def and_(self, a, b):
        if isinstance(a, _Const):
            a, b = b, a
        if isinstance(b, _Const):
            if isinstance(a, _Const):
                return const(a.v & b.v)
            return a if b.v else C0
        return self._gate(AND, (a, b))

    def inv(self, a):
        if isinstance(a, _Const):
            return const(a.v ^ 1)
        return self._gate(INV, (a,))

    def or_(self, a, b):
        return self.xor(self.xor(a, b), self.and_(a, b))

    def mux(self, s, x0, x1):
        """x1 if s else x0."""
        return self.xor(x0, self.and_(s, self.xor(x0, x1)))

    def materialize(self, a) -> int:
        if not isinstance(a, _Const):
            return a
        if self._zero is None:
            if self.n_wires == 0:
                raise ValueError("constants need at least one input wire")
            self._zero = self._gate(XOR, (0, 0))
        return self._zero if a.v == 0 else self._gate(INV, (self._zero,))

    # -- vectors (LSB first) --------------------------------------------------
    def xor_vec(self, a: Sequence, b: Sequence) -> list:
        if len(a) != len(b):
            raise ValueError("width mismatch")
        return [self.xor(x, y) for x, y in zip(a, b)]

    def const_vec(self, value: int, width: int) -> list:
        return [const((value >> i) & 1) for i in range(width)]

    def add(self, a: Sequence, b: Sequence, carry=C0) -> tuple[list, object]:
        """Ripple-carry a + b + carry; one AND per bit. Returns (sum, carry out)."""
        if len(a) != len(b):
            raise ValueError("width mismatch")
        out = []
        c = carry
        for x, y in zip(a, b):
            xc = self.xor(x, c)
            out.append(self.xor(xc, y))
            c = self.xor(self.and_(xc, self.xor(y, c)), c)
        return out, c

    def sub(self, a: Sequence, b: Sequence) -> tuple[list, object]:
        """a - b mod 2^w; second value is 1 iff a >= b."""
        return self.add(a, [self.inv(x) for x in b], C1)

    def and_all(self, bits: Sequence):
        bits = list(bits)
        if not bits:
            return C1
        while len(bits) > 1:
            nxt = [self.and_(bits[i], bits[i + 1]) for i in range(0, len(bits) - 1, 2)]
            if len(bits) % 2:
                nxt.append(bits[-1])
            bits = nxt
        return bits[0]

    def eq(self, a: Sequence, b: Sequence):
        return self.and_all(self.inv(d) for d in self.xor_vec(a, b))

    def mod_add(self, a: Sequence, b: Sequence, p: int) -> list:
        """(a + b) mod p for a, b < p."""
        w = len(a)
        s, carry = self.add(a, b)
        s = s + [carry]
        t, ge = self.sub(s, self.const_vec(p, w + 1))
        return [self.mux(ge, x, y) for x, y in zip(s[:w], t[:w])]

    # -- finishing ------------------------------------------------------------
    def name(self, label: str, bits: Sequence):
        self.named[label] = [self.materialize(b) for b in bits]

    def output(self, bits: Sequence):
        self._outputs.extend(bits)

    def build(self) -> BooleanCircuit:
        outs: list[int] = []
        seen: set[int] = set()
        n_in = sum(w for _, w in self.groups.values())
        for b in self._outputs:
            w = self.materialize(b)
            if w < n_in or w in seen:
                # outputs must be distinct gate outputs; XOR with zero is free
                w = self._gate(XOR, (w, self.materialize(C0)))
            seen.add(w)
            outs.append(w)
        return BooleanCircuit(self.n_wires, list(self.gates), dict(self.groups), outs, dict(self.named))
