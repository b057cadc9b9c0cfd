"""Canonical payload encoding.

Payloads are JSON objects with sorted keys and no whitespace. Binary values
travel as lowercase hex; field elements carry their field id so a receiver
cannot silently reinterpret them in another field.
"""
from __future__ import annotations

import json
from typing import Any

from .algebra import FieldMismatch, get_field


def dumps(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def loads(data: bytes) -> Any:
    return json.loads(data)


def fe_out(x) -> dict:
    return {"f": x.field.field_id, "v": x.hex()}


def fe_in(obj: dict, field=None):
    """Decode an element; with ``field`` given, ad-hoc fields (not in the registry) work too."""
    if field is None:
        return get_field(obj["f"]).from_hex(obj["v"])
    if obj["f"] != field.field_id:
        raise FieldMismatch(f"expected {field.field_id}, got {obj['f']}")
    return field.from_hex(obj["v"])


def fes_out(xs, field) -> dict:
    """Pack a list of elements of one field as a single hex string."""
    return {"f": field.field_id, "v": b"".join(x.to_bytes() for x in xs).hex()}


def fes_in(obj: dict, field) -> list:
    if obj["f"] != field.field_id:
        raise FieldMismatch(f"expected {field.field_id}, got {obj['f']}")
    raw = bytes.fromhex(obj["v"])
    w = field.byte_len
    if len(raw) % w:
        raise ValueError("packed field elements have a ragged length")
    return [field.from_bytes(raw[i : i + w]) for i in range(0, len(raw), w)]


def labels_out(labels) -> str:
    return b"".join(x.to_bytes(16, "little") for x in labels).hex()


def labels_in(text: str) -> list[int]:
    raw = bytes.fromhex(text)
    if len(raw) % 16:
        raise ValueError("label blob length is not a multiple of 16")
    return [int.from_bytes(raw[i : i + 16], "little") for i in range(0, len(raw), 16)]


def bits_out(bits) -> str:
    return "".join("1" if b else "0" for b in bits)


def bits_in(text: str) -> list[int]:
    if any(ch not in "01" for ch in text):
        raise ValueError("bit string contains non-binary characters")
    return [1 if ch == "1" else 0 for ch in text]
