"""Scripted network adversary.

A script is a list of mutations. Each one matches a message by type tag,
optionally by sender and receiver, and fires on the n-th match only, so a
mutation is applied at most once. Every application is logged on the script
and in the session transcript.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..transport import PartyMessage

KINDS = ("flip", "replace", "drop", "reorder")


def _flip_value(v: Any, bit: int) -> Any:
    if isinstance(v, bool):
        return not v
    if isinstance(v, int):
        return v ^ (1 << bit)
    if isinstance(v, str):
        if v and all(ch in "01" for ch in v):  # bit strings
            i = bit % len(v)
            return v[:i] + ("1" if v[i] == "0" else "0") + v[i + 1 :]
        try:
            raw = bytearray.fromhex(v)
        except ValueError:
            raw = None
        if raw:
            raw[(bit // 8) % len(raw)] ^= 1 << (bit % 8)
            return raw.hex()
        b = bytearray(v.encode())
        b[(bit // 8) % len(b)] ^= 1 << (bit % 8)
        return b.decode(errors="replace")
    raise TypeError(f"cannot flip a {type(v).__name__}")


def _walk(obj: Any, path: list[str]):
    """Parent container and key for a dotted path; list indices are integers."""
    for key in path[:-1]:
        obj = obj[int(key)] if isinstance(obj, list) else obj[key]
    last = path[-1]
    return obj, int(last) if isinstance(obj, list) else last


@dataclass
class Mutation:
    kind: str
    type: str
    sender: str | None = None
    receiver: str | None = None
    occurrence: int = 0
    path: str | None = None  # dotted path into the JSON payload; None = raw payload bytes
    bit: int = 0
    value: Any = None  # replacement for "replace"
    seen: int = 0
    applied: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown mutation {self.kind!r}")

    def matches(self, msg: PartyMessage) -> bool:
        return (msg.type == self.type and (self.sender is None or msg.sender == self.sender)
                and (self.receiver is None or msg.receiver == self.receiver))

    def describe(self) -> str:
        where = f"{self.sender or '*'}->{self.receiver or '*'} {self.type}#{self.occurrence}"
        return f"{self.kind} {where}" + (f" at {self.path}" if self.path else "")

    def mutate_payload(self, payload: bytes) -> bytes:
        if self.kind == "replace" and self.path is None:
            return self.value if isinstance(self.value, bytes) else json.dumps(self.value).encode()
        if self.path is None:
            raw = bytearray(payload)
            raw[(self.bit // 8) % len(raw)] ^= 1 << (self.bit % 8)
            return bytes(raw)
        obj = json.loads(payload)
        parent, key = _walk(obj, self.path.split("."))
        parent[key] = self.value if self.kind == "replace" else _flip_value(parent[key], self.bit)
        return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


@dataclass
class AdversaryScript:
    mutations: list[Mutation] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    _held: dict = field(default_factory=dict)

    def intercept(self, msg: PartyMessage, transcript) -> list[PartyMessage]:
        link = (msg.sender, msg.receiver)
        out = [msg]
        for m in self.mutations:
            if m.applied or not m.matches(msg):
                continue
            m.seen += 1
            if m.seen - 1 != m.occurrence:
                continue
            m.applied = True
            entry = f"{m.describe()} (seq {msg.seq})"
            self.log.append(entry)
            transcript.adversary_log.append(entry)
            if m.kind == "drop":
                out = []
            elif m.kind == "reorder":
                self._held[link] = msg
                return []
            else:
                out = [msg.with_payload(m.mutate_payload(msg.payload))]
            break
        held = self._held.pop(link, None)
        return out + [held] if held is not None else out

    @property
    def unapplied(self) -> list[str]:
        return [m.describe() for m in self.mutations if not m.applied]


def flip(type: str, path: str | None = None, bit: int = 0, **kw) -> Mutation:
    return Mutation("flip", type, path=path, bit=bit, **kw)


def replace(type: str, value: Any, path: str | None = None, **kw) -> Mutation:
    return Mutation("replace", type, path=path, value=value, **kw)


def drop(type: str, **kw) -> Mutation:
    return Mutation("drop", type, **kw)


def reorder(type: str, **kw) -> Mutation:
    return Mutation("reorder", type, **kw)
