"""Dual execution with asymmetric privacy.

Both parties garble the same circuit f(x_C, x_N) and evaluate each other's
garbling. The Client keeps full privacy; the Notary's garbling is derived
from a committed seed rho so that, once the TLS session is over, the Notary
can open rho and x_N and the Client can check that the Notary garbled
honestly and ran its oblivious transfers honestly. The final check compares
hashes of cross-evaluated output labels, which only agree when both
executions produced the same output.

Each phase is a pair of generator functions, one per role, so a session can
interleave many DEAP instances with other traffic. Inputs are split into
client groups, notary groups and public groups (known to both, encoded by
each garbler directly).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import wire
from .circuits.core import BooleanCircuit, int_to_bits
from .commit import commit_payload, open_ok
from .errors import (CheckMismatch, CommitmentMalformed, CommitmentMismatch, CommitmentOpenFailure,
                     InauthenticLabels, OtReplayMismatch, PhaseError, RegarbleMismatch)
from .garble import (LABEL_MASK, DecodingInfo, GarbledCircuit, Garbling, RowTagFailure, decode,
                     evaluate_wires, garble)
from .ot import OtOpening, committed_ot_recv, committed_ot_send, ot_recv, ot_send
from .prg import Prg

PHASES = ("setup", "executed", "checked", "aborted")


@dataclass(frozen=True)
class DeapSpec:
    """A circuit plus the ownership of each input group."""

    circuit: BooleanCircuit
    client: tuple[str, ...]
    notary: tuple[str, ...]
    public: tuple[str, ...] = ()

    def __post_init__(self):
        names = set(self.client) | set(self.notary) | set(self.public)
        if names != set(self.circuit.input_groups):
            raise ValueError(f"groups {sorted(names)} do not cover {sorted(self.circuit.input_groups)}")

    def wires(self, groups: Sequence[str]) -> list[int]:
        return [w for g in groups for w in self.circuit.group_wires(g)]

    def bits(self, groups: Sequence[str], values: Mapping) -> list[int]:
        out = []
        for g in groups:
            width = len(self.circuit.group_wires(g))
            v = values[g]
            bits = int_to_bits(v, width) if isinstance(v, int) else list(v)
            if len(bits) != width:
                raise ValueError(f"group {g}: {len(bits)} bits, want {width}")
            out.extend(bits)
        return out


@dataclass(frozen=True)
class CheckValue:
    digest: bytes


def _lab_bytes(labels: Sequence[int]) -> bytes:
    return b"".join(l.to_bytes(16, "little") for l in labels)


def check_value(labels_c: Sequence[int], labels_n: Sequence[int]) -> CheckValue:
    """H([.]_C, [.]_N) over the canonical label concatenation."""
    return CheckValue(hashlib.sha256(_lab_bytes(labels_c) + _lab_bytes(labels_n)).digest())


def _label_hash(label: int) -> bytes:
    return hashlib.sha256(b"tlsn-desk/out" + label.to_bytes(16, "little")).digest()


def output_commitment(g: Garbling) -> list[tuple[bytes, bytes]]:
    """com_{e_C(v)}: per output wire, hashes of both labels ordered by permute bit."""
    out = []
    for l0, l1 in g.output_pairs():
        a, b = (l0, l1) if not l0 & 1 else (l1, l0)
        out.append((_label_hash(a), _label_hash(b)))
    return out


def _com_out(com) -> list[str]:
    return [a.hex() + b.hex() for a, b in com]


def _com_in(items, n: int) -> list[tuple[bytes, bytes]]:
    try:
        out = [(bytes.fromhex(s[:64]), bytes.fromhex(s[64:])) for s in items]
    except (TypeError, ValueError):
        raise CommitmentMalformed("output commitment is not hex") from None
    if len(out) != n or any(len(a) != 32 or len(b) != 32 for a, b in out):
        raise CommitmentMalformed("output commitment has the wrong shape")
    return out


def _gc_in(text: str, circuit: BooleanCircuit) -> GarbledCircuit:
    try:
        F = GarbledCircuit.from_bytes(bytes.fromhex(text))
    except ValueError as e:
        raise RowTagFailure(f"malformed garbled circuit: {e}") from None
    return F


@dataclass
class NotaryGarbleParams:
    """Offset and pinned 0-labels the Notary's garbling must use.

    The record layer pins the plaintext wires to the session encoder; plain
    DEAP instances leave both empty and derive everything from rho.
    """

    delta: int | None = None
    input_zero: dict[int, int] = field(default_factory=dict)


@dataclass
class DeapClient:
    spec: DeapSpec
    tag: str
    x: list[int]
    G: Garbling
    phase: str = "setup"
    F_n: GarbledCircuit | None = None
    labels_xn_n: list[int] = field(default_factory=list)
    labels_pub_n: list[int] = field(default_factory=list)
    labels_xc_n: list[int] = field(default_factory=list)
    d_n: DecodingInfo | None = None
    com_rho: bytes = b""
    ot_opening: OtOpening | None = None
    wires_n: list[int] | None = None  # every active label of G_N, for label reuse
    v: list[int] | None = None
    v_n: list[int] | None = None
    check: CheckValue | None = None
    check_salt: bytes = b""
    discrepancy: bool = False
    x_n: list[int] | None = None
    rho_opened: bytes = b""
    G_n_opened: Garbling | None = None  # the re-garbled G_N, kept for label reuse checks

    def active_n(self, name: str) -> list[int]:
        """Active labels of a named wire range in the Notary's garbling."""
        if self.wires_n is None:
            raise PhaseError("G_N has not been evaluated")
        return [self.wires_n[w] for w in self.spec.circuit.named[name]]


@dataclass
class DeapNotary:
    spec: DeapSpec
    tag: str
    x: list[int]
    G: Garbling
    rho: bytes
    salt: bytes
    com_rho: bytes
    params: NotaryGarbleParams
    phase: str = "setup"
    F_c: GarbledCircuit | None = None
    labels_xc_c: list[int] = field(default_factory=list)
    labels_pub_c: list[int] = field(default_factory=list)
    labels_xn_c: list[int] = field(default_factory=list)
    d_c: DecodingInfo | None = None
    com_out: list[tuple[bytes, bytes]] = field(default_factory=list)
    v: list[int] | None = None
    vc_labels: list[int] = field(default_factory=list)
    check: CheckValue | None = None
    com_check: bytes = b""


def _notary_seed(rho: bytes, tag: str) -> bytes:
    return Prg(rho, f"deap-garble:{tag}").bytes(32)


def notary_garble(spec: DeapSpec, rho: bytes, tag: str, params: NotaryGarbleParams | None = None,
                  gate_override=None) -> Garbling:
    params = params or NotaryGarbleParams()
    return garble(spec.circuit, _notary_seed(rho, tag), params.delta, params.input_zero,
                  gate_override=gate_override)


def wrong_function(circuit: BooleanCircuit) -> dict[int, tuple[int, int, int, int]]:
    """Turn the first AND gate into a NAND: a garbling of some g != f."""
    for i, g in enumerate(circuit.gates):
        if g.kind == "AND":
            return {i: (1, 1, 1, 0)}
    raise ValueError("circuit has no AND gate to alter")


# -- setup ------------------------------------------------------------------------------

def client_setup(ch, spec: DeapSpec, x_c: Mapping, public: Mapping | None = None, tag: str = "deap"):
    """Client half of Setup. Returns the session state."""
    public = public or {}
    x = spec.bits(spec.client, x_c)
    pub = spec.bits(spec.public, public)
    prg = ch.ctx.fork(f"deap:{tag}")
    G = garble(spec.circuit, prg.bytes(32))
    st = DeapClient(spec, tag, x, G)
    msg = yield ch.recv(f"{tag}.gn")
    st.com_rho = bytes.fromhex(msg["com_rho"])
    if len(st.com_rho) != 32:
        raise CommitmentMalformed("com_rho must be 32 bytes")
    st.F_n = _gc_in(msg["F"], spec.circuit)
    st.labels_xn_n = wire.labels_in(msg["xn"])
    st.labels_pub_n = wire.labels_in(msg["pub"])
    st.d_n = DecodingInfo(tuple(wire.bits_in(msg["d"])))
    if st.F_n.circuit_hash != spec.circuit.digest():
        raise RowTagFailure("Notary garbled a different circuit")
    # the Client's own garbling; a dishonest client may feed G_C another input
    x_own = x
    if ch.ctx.cheats("deap_inconsistent_input", tag) and x:
        x_own = [x[0] ^ 1, *x[1:]]
    wc = spec.wires(spec.client)
    wp = spec.wires(spec.public)
    yield ch.send(f"{tag}.gc", {
        "F": G.F.to_bytes().hex(),
        "xc": wire.labels_out([G.label(w, b) for w, b in zip(wc, x_own)]),
        "pub": wire.labels_out([G.label(w, b) for w, b in zip(wp, pub)]),
        "d": wire.bits_out(G.d.bits),
        "com": _com_out(output_commitment(G)),
    })
    # [x_C]_N by committed OT, then [x_N]_C by plain OT
    st.labels_xc_n, st.ot_opening = yield from committed_ot_recv(ch, x, f"{tag}.cot", as_int=True)
    wn = spec.wires(spec.notary)
    yield from ot_send(ch, [(G.zero[w], G.zero[w] ^ G.delta) for w in wn], f"{tag}.ot", width=16)
    return st


def notary_setup(ch, spec: DeapSpec, x_n: Mapping, public: Mapping | None = None, tag: str = "deap",
                 params: NotaryGarbleParams | None = None, gate_override=None):
    """Notary half of Setup. ``gate_override`` models a Notary garbling g != f."""
    public = public or {}
    params = params or NotaryGarbleParams()
    x = spec.bits(spec.notary, x_n)
    pub = spec.bits(spec.public, public)
    prg = ch.ctx.fork(f"deap:{tag}")
    rho, salt = prg.bytes(32), prg.bytes(16)
    com_rho = commit_payload(rho, salt).digest
    if gate_override is None and ch.ctx.cheats("deap_wrong_function", tag):
        gate_override = wrong_function(spec.circuit)
    G = notary_garble(spec, rho, tag, params, gate_override)
    st = DeapNotary(spec, tag, x, G, rho, salt, com_rho, params)
    wn = spec.wires(spec.notary)
    wp = spec.wires(spec.public)
    yield ch.send(f"{tag}.gn", {
        "com_rho": com_rho.hex(),
        "F": G.F.to_bytes().hex(),
        "xn": wire.labels_out([G.label(w, b) for w, b in zip(wn, x)]),
        "pub": wire.labels_out([G.label(w, b) for w, b in zip(wp, pub)]),
        "d": wire.bits_out(G.d.bits),
    })
    msg = yield ch.recv(f"{tag}.gc")
    st.F_c = _gc_in(msg["F"], spec.circuit)
    st.labels_xc_c = wire.labels_in(msg["xc"])
    st.labels_pub_c = wire.labels_in(msg["pub"])
    st.d_c = DecodingInfo(tuple(wire.bits_in(msg["d"])))
    st.com_out = _com_in(msg["com"], len(spec.circuit.output_wires))
    if len(st.labels_xc_c) != len(spec.wires(spec.client)) or len(st.labels_pub_c) != len(wp):
        raise CommitmentMalformed("Client sent the wrong number of input labels")
    wc = spec.wires(spec.client)
    pairs = [(G.zero[w], G.zero[w] ^ G.delta) for w in wc]
    subst = None
    if ch.ctx.cheats("deap_ot_substitute", tag) and pairs:
        subst = {0: (pairs[0][1], pairs[0][0])}
    yield from committed_ot_send(ch, pairs, rho, f"{tag}.cot", substitute=subst, width=16)
    st.labels_xn_c = yield from ot_recv(ch, x, f"{tag}.ot", as_int=True)
    return st


# -- execution ----------------------------------------------------------------------------

def _assemble(spec: DeapSpec, by_group: dict[str, list[int]]) -> list[int]:
    c = spec.circuit
    X = [0] * c.n_inputs
    for g, labels in by_group.items():
        for w, l in zip(c.group_wires(g), labels):
            X[w] = l
    return X


def _split_groups(spec: DeapSpec, groups: Sequence[str], labels: Sequence[int]) -> dict[str, list[int]]:
    out, pos = {}, 0
    for g in groups:
        n = len(spec.circuit.group_wires(g))
        out[g] = list(labels[pos : pos + n])
        pos += n
    return out


def notary_execute(ch, st: DeapNotary):
    """Evaluate G_C, check it against com_{e_C(v)}, send [v]_C. Returns v^C."""
    if st.phase != "setup":
        raise PhaseError(f"execute in phase {st.phase}")
    spec = st.spec
    labels = {}
    labels.update(_split_groups(spec, spec.client, st.labels_xc_c))
    labels.update(_split_groups(spec, spec.notary, st.labels_xn_c))
    labels.update(_split_groups(spec, spec.public, st.labels_pub_c))
    vals = evaluate_wires(spec.circuit, st.F_c, _assemble(spec, labels))
    out = [vals[w] for w in spec.circuit.output_wires]
    for l, pair in zip(out, st.com_out):
        if _label_hash(l) != pair[l & 1]:
            st.phase = "aborted"
            raise CommitmentMismatch("G_C output labels do not match com_{e_C(v)}")
    v = decode(st.d_c, out) if len(st.d_c.bits) == len(out) else None
    if v is None:
        st.phase = "aborted"
        raise CommitmentMismatch("decoding table has the wrong width")
    st.v = v
    st.vc_labels = out
    st.check = check_value(out, st.G.output_labels(v))
    msg = yield ch.recv(f"{st.tag}.com_check")
    st.com_check = bytes.fromhex(msg["com"])
    sent = out
    if ch.ctx.cheats("deap_flip_vc", st.tag):
        sent = [out[0] ^ 2, *out[1:]]
    yield ch.send(f"{st.tag}.vc", {"labels": wire.labels_out(sent)})
    st.phase = "executed"
    return v


def client_execute(ch, st: DeapClient):
    """Evaluate G_N, commit to check_C, authenticate [v]_C. Returns v^C."""
    if st.phase != "setup":
        raise PhaseError(f"execute in phase {st.phase}")
    spec = st.spec
    labels = {}
    labels.update(_split_groups(spec, spec.client, st.labels_xc_n))
    labels.update(_split_groups(spec, spec.notary, st.labels_xn_n))
    labels.update(_split_groups(spec, spec.public, st.labels_pub_n))
    prg = ch.ctx.fork(f"deap-exec:{st.tag}")
    try:
        st.wires_n = evaluate_wires(spec.circuit, st.F_n, _assemble(spec, labels))
        out_n = [st.wires_n[w] for w in spec.circuit.output_wires]
        st.v_n = decode(st.d_n, out_n)
        st.check = check_value(st.G.output_labels(st.v_n), out_n)
    except (RowTagFailure, ValueError):
        # a broken G_N must not change the Client's behaviour; the check will fail later
        ch.ctx.log.append(f"{st.tag}: G_N did not evaluate")
        st.wires_n = None
        st.check = CheckValue(prg.bytes(32))
    st.check_salt = prg.bytes(16)
    yield ch.send(f"{st.tag}.com_check", {"com": commit_payload(st.check.digest, st.check_salt).digest.hex()})
    msg = yield ch.recv(f"{st.tag}.vc")
    vc = wire.labels_in(msg["labels"])
    pairs = st.G.output_pairs()
    if len(vc) != len(pairs) or any(l not in p for l, p in zip(vc, pairs)):
        st.phase = "aborted"
        raise InauthenticLabels("[v]_C is not made of the Client's own output labels")
    st.v = decode(st.G.d, vc)
    if st.v_n is not None and st.v_n != st.v:
        # must not react; the equality check will catch it
        st.discrepancy = True
        ch.ctx.log.append(f"{st.tag}: v^N != v^C")
    st.phase = "executed"
    return st.v


# -- equality check ---------------------------------------------------------------------------

def notary_open(ch, st: DeapNotary, tls_closed: bool):
    """Open x_N, rho and Delta_N, then check the Client's opened check value."""
    if not tls_closed:
        raise PhaseError("equality check before the TLS session closed")
    if st.phase != "executed":
        raise PhaseError(f"equality check in phase {st.phase}")
    yield ch.send(f"{st.tag}.open", {
        "xn": wire.bits_out(st.x),
        "rho": st.rho.hex(),
        "salt": st.salt.hex(),
        "delta": f"{st.G.delta:032x}",
    })
    msg = yield ch.recv(f"{st.tag}.check")
    check, salt = bytes.fromhex(msg["check"]), bytes.fromhex(msg["salt"])
    if not open_ok(st.com_check, check, salt):
        st.phase = "aborted"
        raise CommitmentOpenFailure("check_C does not open com_check")
    if check != st.check.digest:
        st.phase = "aborted"
        raise CheckMismatch("check_C != check_N")
    st.phase = "checked"
    return True


def client_verify(ch, st: DeapClient, tls_closed: bool, params: NotaryGarbleParams | None = None):
    """Verify the Notary's opening, then open check_C. Returns x_N bits.

    ``params`` are the pinned labels the caller expects G_N to use; the offset
    comes from the opening when the caller does not pin it.
    """
    if not tls_closed:
        raise PhaseError("equality check before the TLS session closed")
    if st.phase != "executed":
        raise PhaseError(f"equality check in phase {st.phase}")
    spec = st.spec
    msg = yield ch.recv(f"{st.tag}.open")
    x_n = wire.bits_in(msg["xn"])
    rho, salt = bytes.fromhex(msg["rho"]), bytes.fromhex(msg["salt"])
    if not open_ok(st.com_rho, rho, salt):
        st.phase = "aborted"
        raise CommitmentOpenFailure("opened rho does not match com_rho")
    delta = int(msg["delta"], 16) & LABEL_MASK
    params = params or NotaryGarbleParams()
    if params.delta is not None and params.delta != delta:
        st.phase = "aborted"
        raise RegarbleMismatch("opened Delta_N differs from the expected offset")
    G = notary_garble(spec, rho, st.tag, NotaryGarbleParams(delta, params.input_zero))
    wn = spec.wires(spec.notary)
    ok = (st.F_n is not None and G.F.to_bytes() == st.F_n.to_bytes()
          and G.d == st.d_n and len(x_n) == len(wn)
          and [G.label(w, b) for w, b in zip(wn, x_n)] == st.labels_xn_n)
    if not ok:
        st.phase = "aborted"
        raise RegarbleMismatch("G_N was not garbled honestly from rho")
    wc = spec.wires(spec.client)
    pairs = [(G.zero[w], G.zero[w] ^ G.delta) for w in wc]
    try:
        st.ot_opening.verify(rho, salt, st.com_rho, pairs, width=16)
    except OtReplayMismatch:
        st.phase = "aborted"
        raise
    st.x_n = x_n
    st.rho_opened, st.G_n_opened = rho, G
    check = st.check.digest
    if ch.ctx.cheats("deap_flip_check", st.tag):
        check = bytes([check[0] ^ 1]) + check[1:]
    yield ch.send(f"{st.tag}.check", {"check": check.hex(), "salt": st.check_salt.hex()})
    st.phase = "checked"
    return x_n


# -- whole-protocol helpers ---------------------------------------------------------------------

def deap_client(ch, spec: DeapSpec, x_c: Mapping, public: Mapping | None = None, tag: str = "deap"):
    """Setup, Execution and the Equality check back to back (TLS assumed closed)."""
    st = yield from client_setup(ch, spec, x_c, public, tag)
    v = yield from client_execute(ch, st)
    yield from client_verify(ch, st, tls_closed=True)
    return v


def deap_notary(ch, spec: DeapSpec, x_n: Mapping, public: Mapping | None = None, tag: str = "deap",
                gate_override=None):
    st = yield from notary_setup(ch, spec, x_n, public, tag, gate_override=gate_override)
    v = yield from notary_execute(ch, st)
    yield from notary_open(ch, st, tls_closed=True)
    return v


def run_deap(spec: DeapSpec, x_c: Mapping, x_n: Mapping, public: Mapping | None = None,
             seeds=(1, 2), deviations=((), ()), gate_override=None, adversary=None):
    """Run one DEAP instance in-process; returns (client v, notary v^C)."""
    from .transport import run_pair

    return run_pair(lambda ch: deap_client(ch, spec, x_c, public),
                    lambda ch: deap_notary(ch, spec, x_n, public, gate_override=gate_override),
                    seeds, deviations=deviations, adversary=adversary)
