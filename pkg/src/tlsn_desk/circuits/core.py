"""Boolean circuits over {AND, XOR, INV}, plain evaluation and the text format.

Text format (ASCII, LF)::

    # comment
    inputs a:2 b:2
    outputs 4
    AND 0 2 4
    XOR 4 5 6
    INV 6 7

Input wires are numbered from 0 in group order; within a group wire 0 is the
least significant bit. The outputs are the last ``W`` wire ids, in order.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

AND, XOR, INV = "AND", "XOR", "INV"
KINDS = (AND, XOR, INV)


class CircuitError(ValueError):
    pass


class ParseError(CircuitError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(CircuitError):
    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind


class InputWidthMismatch(CircuitError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    ins: tuple[int, ...]
    out: int


@dataclass
class BooleanCircuit:
    n_wires: int
    gates: list[Gate]
    input_groups: dict[str, tuple[int, int]]  # name -> (first wire, width)
    output_wires: list[int]
    named: dict[str, list[int]] = field(default_factory=dict)  # labelled internal wires

    def __post_init__(self):
        self.validate()

    # -- structure --------------------------------------------------------
    @property
    def n_inputs(self) -> int:
        return sum(w for _, w in self.input_groups.values())

    @property
    def n_and(self) -> int:
        return sum(1 for g in self.gates if g.kind == AND)

    def group_wires(self, name: str) -> list[int]:
        start, width = self.input_groups[name]
        return list(range(start, start + width))

    def input_widths(self) -> dict[str, int]:
        return {k: w for k, (_, w) in self.input_groups.items()}

    def validate(self):
        written = [False] * self.n_wires
        pos = 0
        for name, (start, width) in self.input_groups.items():
            if start != pos or width <= 0:
                raise ValidationError("InputLayout", f"group {name} must start at {pos}")
            pos += width
        if pos > self.n_wires:
            raise ValidationError("WireRange", "inputs exceed wire count")
        for w in range(pos):
            written[w] = True
        for i, g in enumerate(self.gates):
            if g.kind not in KINDS:
                raise ValidationError("UnknownGate", g.kind)
            arity = 1 if g.kind == INV else 2
            if len(g.ins) != arity:
                raise ValidationError("Arity", f"gate {i}")
            for w in g.ins:
                if not 0 <= w < self.n_wires or not written[w]:
                    raise ValidationError("UnwrittenWire", f"gate {i} reads wire {w}")
            if not 0 <= g.out < self.n_wires:
                raise ValidationError("WireRange", f"gate {i} writes wire {g.out}")
            if written[g.out]:
                raise ValidationError("DoubleWrite", f"wire {g.out}")
            written[g.out] = True
        if not all(written):
            raise ValidationError("SparseWires", f"wire {written.index(False)} never written")
        for w in self.output_wires:
            if not 0 <= w < self.n_wires:
                raise ValidationError("WireRange", f"output wire {w}")

    def digest(self) -> bytes:
        # circuits are not edited after construction; the gate count guards the cache anyway
        key = (self.n_wires, len(self.gates))
        cached = self.__dict__.get("_digest")
        if cached is None or cached[0] != key:
            cached = (key, hashlib.sha256(serialize_circuit(self).encode()).digest())
            self.__dict__["_digest"] = cached
        return cached[1]


@dataclass
class CircuitBundle:
    name: str
    circuit: BooleanCircuit
    metadata: dict

    def __post_init__(self):
        widths = self.metadata.get("inputs")
        if widths is not None and dict(widths) != self.circuit.input_widths():
            raise ValidationError("WidthMetadata", self.name)
        out = self.metadata.get("outputs")
        if out is not None and out != len(self.circuit.output_wires):
            raise ValidationError("WidthMetadata", self.name)


# -- bit helpers -------------------------------------------------------------

def int_to_bits(v: int, width: int) -> list[int]:
    if v < 0 or v >> width:
        raise InputWidthMismatch(f"{v} does not fit in {width} bits")
    return [(v >> i) & 1 for i in range(width)]


def bits_to_int(bits: Sequence[int]) -> int:
    return sum(b << i for i, b in enumerate(bits))


def assign_inputs(c: BooleanCircuit, inputs: Mapping[str, int | Sequence[int]]) -> list[int]:
    """Flatten a per-group assignment (ints or LSB-first bit lists) to input bits."""
    missing = set(c.input_groups) - set(inputs)
    extra = set(inputs) - set(c.input_groups)
    if missing or extra:
        raise InputWidthMismatch(f"missing {sorted(missing)}, unexpected {sorted(extra)}")
    bits: list[int] = []
    for name, (_, width) in c.input_groups.items():
        v = inputs[name]
        if isinstance(v, int):
            bits.extend(int_to_bits(v, width))
        else:
            v = list(v)
            if len(v) != width:
                raise InputWidthMismatch(f"group {name}: {len(v)} bits, want {width}")
            bits.extend(1 if b else 0 for b in v)
    return bits


def eval_wires(c: BooleanCircuit, input_bits: Sequence[int]) -> list[int]:
    if len(input_bits) != c.n_inputs:
        raise InputWidthMismatch(f"{len(input_bits)} input bits, want {c.n_inputs}")
    vals = [0] * c.n_wires
    vals[: c.n_inputs] = input_bits
    for g in c.gates:
        if g.kind == AND:
            vals[g.out] = vals[g.ins[0]] & vals[g.ins[1]]
        elif g.kind == XOR:
            vals[g.out] = vals[g.ins[0]] ^ vals[g.ins[1]]
        else:
            vals[g.out] = vals[g.ins[0]] ^ 1
    return vals


def eval_plain(c: BooleanCircuit, inputs: Mapping[str, int | Sequence[int]]) -> list[int]:
    """Evaluate gate by gate; returns the output bits in output-wire order."""
    vals = eval_wires(c, assign_inputs(c, inputs))
    return [vals[w] for w in c.output_wires]


def eval_int(c: BooleanCircuit, inputs: Mapping[str, int | Sequence[int]]) -> int:
    return bits_to_int(eval_plain(c, inputs))


# -- text format ---------------------------------------------------------------

def parse_circuit(text: str) -> BooleanCircuit:
    groups: dict[str, tuple[int, int]] = {}
    n_out = None
    gates: list[Gate] = []
    pos = 0
    seen_inputs = False
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "inputs":
            if seen_inputs:
                raise ParseError(lineno, "duplicate inputs line")
            seen_inputs = True
            for item in tok[1:]:
                name, sep, width = item.partition(":")
                if not sep or not name or not width.isdigit() or int(width) == 0:
                    raise ParseError(lineno, f"bad input group {item!r}")
                if name in groups:
                    raise ParseError(lineno, f"duplicate group {name!r}")
                groups[name] = (pos, int(width))
                pos += int(width)
        elif head == "outputs":
            if n_out is not None:
                raise ParseError(lineno, "duplicate outputs line")
            if len(tok) != 2 or not tok[1].isdigit():
                raise ParseError(lineno, "outputs takes one width")
            n_out = int(tok[1])
        elif head in KINDS:
            if not seen_inputs or n_out is None:
                raise ParseError(lineno, "gate before header")
            arity = 1 if head == INV else 2
            if len(tok) != arity + 2 or not all(t.isdigit() for t in tok[1:]):
                raise ParseError(lineno, f"{head} needs {arity} inputs and one output")
            nums = [int(t) for t in tok[1:]]
            gates.append(Gate(head, tuple(nums[:-1]), nums[-1]))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if not seen_inputs or n_out is None:
        raise ParseError(0, "missing header")
    n_wires = max([pos - 1] + [g.out for g in gates]) + 1
    if n_out > n_wires:
        raise ValidationError("WidthMismatch", "more outputs than wires")
    outputs = list(range(n_wires - n_out, n_wires))
    return BooleanCircuit(n_wires, gates, groups, outputs)


def _canonical_numbering(c: BooleanCircuit) -> tuple[BooleanCircuit, dict[int, int]]:
    """Renumber so that the outputs are the last wires, in order."""
    outs = c.output_wires
    if outs == list(range(c.n_wires - len(outs), c.n_wires)):
        return c, {w: w for w in range(c.n_wires)}
    if len(set(outs)) != len(outs) or any(w < c.n_inputs for w in outs):
        raise ValidationError("OutputLayout", "outputs must be distinct gate outputs to serialize")
    out_set = set(outs)
    mapping: dict[int, int] = {}
    nxt = 0
    for w in range(c.n_wires):
        if w not in out_set:
            mapping[w] = nxt
            nxt += 1
    for w in outs:
        mapping[w] = nxt
        nxt += 1
    gates = [Gate(g.kind, tuple(mapping[i] for i in g.ins), mapping[g.out]) for g in c.gates]
    named = {k: [mapping[w] for w in v] for k, v in c.named.items()}
    return BooleanCircuit(c.n_wires, gates, dict(c.input_groups), [mapping[w] for w in outs], named), mapping


def serialize_circuit(c: BooleanCircuit) -> str:
    c, _ = _canonical_numbering(c)
    lines = ["inputs " + " ".join(f"{n}:{w}" for n, (_, w) in c.input_groups.items()),
             f"outputs {len(c.output_wires)}"]
    for g in c.gates:
        lines.append(" ".join([g.kind, *map(str, g.ins), str(g.out)]))
    return "\n".join(lines) + "\n"


def canonicalize(c: BooleanCircuit) -> BooleanCircuit:
    return _canonical_numbering(c)[0]
