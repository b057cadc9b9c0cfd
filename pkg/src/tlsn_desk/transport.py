"""In-process message passing between protocol parties.

A party is a generator. It yields ``ch.send(type, payload)`` to transmit and
``ch.recv(type)`` to block until the next message on that link arrives; the
value sent back into the generator is the decoded payload. Links are FIFO per
direction. Two schedulers drive the generators: a single-threaded round-robin
one and a thread-per-party one. Protocol code does not know which is in use.
"""
from __future__ import annotations

import struct
import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Generator, Iterable

from . import wire
from .errors import ChannelError, ProtocolAbort
from .prg import Prg, as_seed


@dataclass(frozen=True)
class PartyMessage:
    session: str
    sender: str
    receiver: str
    phase: str
    type: str
    payload: bytes
    seq: int

    def frame(self) -> bytes:
        """Length-prefixed binary framing used for byte counts and hashing."""
        parts = [self.session, self.sender, self.receiver, self.phase, self.type]
        out = b"".join(struct.pack("<I", len(p.encode())) + p.encode() for p in parts)
        return out + struct.pack("<Q", self.seq) + struct.pack("<I", len(self.payload)) + self.payload

    def decoded(self) -> Any:
        return wire.loads(self.payload)

    def with_payload(self, payload: bytes) -> "PartyMessage":
        return PartyMessage(self.session, self.sender, self.receiver, self.phase, self.type, payload, self.seq)


@dataclass
class TranscriptEntry:
    event: str  # "sent" or "delivered"
    msg: PartyMessage


class Transcript:
    def __init__(self):
        self.entries: list[TranscriptEntry] = []
        self.adversary_log: list[str] = []

    def record(self, event: str, msg: PartyMessage):
        self.entries.append(TranscriptEntry(event, msg))

    def messages(self, event: str = "delivered") -> list[PartyMessage]:
        return [e.msg for e in self.entries if e.event == event]

    def view(self, party: str) -> list[tuple[str, PartyMessage]]:
        """What ``party`` saw: its own sends and the messages delivered to it.

        Ordered per link by sequence number, so the result does not depend on
        how the scheduler interleaved independent links.
        """
        out = []
        for e in self.entries:
            m = e.msg
            if e.event == "sent" and m.sender == party:
                out.append(("sent", m))
            elif e.event == "delivered" and m.receiver == party:
                out.append(("recv", m))
        out.sort(key=lambda t: (t[0], t[1].sender, t[1].receiver, t[1].seq))
        return out

    def view_bytes(self, party: str) -> bytes:
        return b"".join(d.encode() + m.frame() for d, m in self.view(party))

    def summary(self) -> dict[str, dict[str, int]]:
        """Coarse per-phase message and byte counters over delivered messages."""
        out: dict[str, dict[str, int]] = defaultdict(lambda: {"messages": 0, "bytes": 0})
        for m in self.messages("delivered"):
            out[m.phase]["messages"] += 1
            out[m.phase]["bytes"] += len(m.payload)
        return dict(out)


class PartyCtx:
    """Per-party state shared by every sub-protocol the party runs."""

    def __init__(self, name: str, seed=0, deviations: Iterable[str] = (), ot_group: str = "toy"):
        self.name = name
        self.ot_group = ot_group
        self.seed = as_seed(seed)
        self._prg = Prg(self.seed, name)
        self._forks: dict[str, int] = defaultdict(int)
        self.phase = "init"
        self.deviations = frozenset(deviations)
        self.log: list[str] = []

    def fork(self, label: str) -> Prg:
        """Fresh PRG stream; repeated labels get distinct streams."""
        n = self._forks[label]
        self._forks[label] += 1
        return self._prg.fork(f"{label}#{n}")

    def cheats(self, name: str, tag: str = "") -> bool:
        """True if deviation ``name`` is active; ``name@prefix`` limits it to tags with that prefix."""
        if name in self.deviations:
            return True
        return any(d.startswith(name + "@") and tag.startswith(d[len(name) + 1 :]) for d in self.deviations)


@dataclass(frozen=True)
class Send:
    ep: "Endpoint"
    type: str
    payload: Any


@dataclass(frozen=True)
class Recv:
    ep: "Endpoint"
    type: str


class Endpoint:
    """One party's end of a link to one peer."""

    def __init__(self, net: "Network", ctx: PartyCtx, peer: str):
        self.net = net
        self.ctx = ctx
        self.peer = peer

    @property
    def me(self) -> str:
        return self.ctx.name

    def send(self, type: str, payload: Any) -> Send:
        return Send(self, type, payload)

    def recv(self, type: str) -> Recv:
        return Recv(self, type)


class Network:
    def __init__(self, session: str = "s0", adversary=None):
        self.session = session
        self.adversary = adversary
        self.queues: dict[tuple[str, str], deque] = defaultdict(deque)
        self.transcript = Transcript()
        self._seq: dict[str, int] = defaultdict(int)

    def endpoint(self, ctx: PartyCtx, peer: str) -> Endpoint:
        return Endpoint(self, ctx, peer)

    def transmit(self, ep: Endpoint, type: str, payload: Any):
        data = wire.dumps(payload)
        msg = PartyMessage(self.session, ep.me, ep.peer, ep.ctx.phase, type, data, self._seq[ep.me])
        self._seq[ep.me] += 1
        self.transcript.record("sent", msg)
        out = [msg] if self.adversary is None else self.adversary.intercept(msg, self.transcript)
        for m in out:
            self.queues[(m.sender, m.receiver)].append(m)

    def pending(self, sender: str, receiver: str) -> bool:
        return bool(self.queues[(sender, receiver)])

    def take(self, ep: Endpoint, type: str) -> Any:
        msg = self.queues[(ep.peer, ep.me)].popleft()
        self.transcript.record("delivered", msg)
        if msg.type != type:
            raise ChannelError(f"{ep.me} expected {type!r} from {ep.peer}, got {msg.type!r}")
        try:
            return msg.decoded()
        except ValueError as e:
            raise ChannelError(f"undecodable payload in {msg.type!r}: {e}") from None


@dataclass
class AbortReport:
    party: str
    phase: str
    cause: str
    detail: str = ""

    def as_dict(self) -> dict:
        return {"party": self.party, "phase": self.phase, "cause": self.cause, "detail": self.detail}


@dataclass
class RunResult:
    results: dict[str, Any] = field(default_factory=dict)
    abort: AbortReport | None = None
    error: BaseException | None = None


Program = Generator[Any, Any, Any]


def _report(ctx: PartyCtx, e: BaseException) -> AbortReport:
    cause = e.cause if isinstance(e, ProtocolAbort) else type(e).__name__
    return AbortReport(ctx.name, ctx.phase, cause, str(e))


def run_sequential(net: Network, programs: dict[str, tuple[PartyCtx, Program]]) -> RunResult:
    res = RunResult()
    state = {name: [gen, None, None] for name, (_, gen) in programs.items()}  # gen, value, waiting op
    ctxs = {name: ctx for name, (ctx, _) in programs.items()}
    live = list(programs)

    def step(name) -> bool:
        """Advance one party until it blocks or ends; True if it made progress."""
        st = state[name]
        gen, value, waiting = st
        progressed = False
        while True:
            if waiting is not None:
                if not net.pending(waiting.ep.peer, waiting.ep.me):
                    st[1], st[2] = value, waiting
                    return progressed
                value = net.take(waiting.ep, waiting.type)
                waiting = None
            try:
                op = gen.send(value)
            except StopIteration as stop:
                res.results[name] = stop.value
                live.remove(name)
                return True
            progressed = True
            value = None
            if isinstance(op, Send):
                net.transmit(op.ep, op.type, op.payload)
            elif isinstance(op, Recv):
                waiting = op
            else:
                raise TypeError(f"party {name} yielded {op!r}")

    while live:
        moved = False
        for name in list(live):
            try:
                moved |= step(name)
            except Exception as e:  # any party failure ends the session
                res.abort = _report(ctxs[name], e)
                res.error = e
                for other in live:
                    if other != name:
                        state[other][0].close()
                return res
        if not moved and live:
            blocked = live[0]
            w = state[blocked][2]
            e = ChannelError(f"deadlock: {blocked} waiting for {w.type!r} from {w.ep.peer}")
            res.abort = _report(ctxs[blocked], e)
            res.error = e
            for g in live:
                state[g][0].close()
            return res
    return res


class _Stop(Exception):
    pass


def run_threaded(net: Network, programs: dict[str, tuple[PartyCtx, Program]]) -> RunResult:
    res = RunResult()
    cond = threading.Condition()
    live = set(programs)
    waiting: dict[str, Recv] = {}
    stop = [False]

    def deadlocked() -> bool:
        if not live or set(waiting) != live:
            return False
        return not any(net.pending(w.ep.peer, w.ep.me) for w in waiting.values())

    def fail(ctx, e):
        if not stop[0]:
            res.abort = _report(ctx, e)
            res.error = e
            stop[0] = True
        cond.notify_all()

    def worker(name: str):
        ctx, gen = programs[name]
        value = None
        try:
            while True:
                try:
                    op = gen.send(value)
                except StopIteration as s:
                    with cond:
                        res.results[name] = s.value
                        live.discard(name)
                        if deadlocked():
                            w = waiting[sorted(waiting)[0]]
                            fail(w.ep.ctx, ChannelError(f"deadlock: {w.ep.me} waiting for {w.type!r}"))
                        cond.notify_all()
                    return
                value = None
                with cond:
                    if stop[0]:
                        raise _Stop
                    if isinstance(op, Send):
                        net.transmit(op.ep, op.type, op.payload)
                        cond.notify_all()
                        continue
                    waiting[name] = op
                    while not net.pending(op.ep.peer, op.ep.me):
                        if stop[0]:
                            raise _Stop
                        if deadlocked():
                            first = sorted(waiting)[0]
                            w = waiting[first]
                            fail(w.ep.ctx, ChannelError(f"deadlock: {first} waiting for {w.type!r}"))
                            raise _Stop
                        cond.wait()
                    del waiting[name]
                    value = net.take(op.ep, op.type)
        except _Stop:
            gen.close()
        except Exception as e:
            with cond:
                fail(ctx, e)
            gen.close()
        finally:
            with cond:
                live.discard(name)
                waiting.pop(name, None)
                cond.notify_all()

    threads = [threading.Thread(target=worker, args=(n,), daemon=True) for n in programs]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    return res


SCHEDULERS: dict[str, Callable[[Network, dict], RunResult]] = {
    "sequential": run_sequential,
    "threaded": run_threaded,
}


def run_programs(net: Network, programs: dict, scheduler: str = "sequential") -> RunResult:
    return SCHEDULERS[scheduler](net, programs)


def run_pair(fa: Callable[[Endpoint], Program], fb: Callable[[Endpoint], Program],
             seeds=(1, 2), names=("client", "notary"), deviations=((), ()),
             adversary=None, scheduler: str = "sequential"):
    """Run a two-party sub-protocol; return both results or re-raise the abort.

    Handy for tests and for composing protocols outside a full session.
    """
    net = Network(adversary=adversary)
    ca = PartyCtx(names[0], seeds[0], deviations[0])
    cb = PartyCtx(names[1], seeds[1], deviations[1])
    ea, eb = net.endpoint(ca, names[1]), net.endpoint(cb, names[0])
    out = run_programs(net, {names[0]: (ca, fa(ea)), names[1]: (cb, fb(eb))}, scheduler)
    if out.error is not None:
        raise out.error
    return out.results[names[0]], out.results[names[1]]
