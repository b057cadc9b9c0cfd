"""Salted SHA-256 hash commitments."""
from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass

SCHEME_ID = "sha256-salt16"
SALT_LEN = 16


@dataclass(frozen=True)
class Commitment:
    digest: bytes
    scheme_id: str = SCHEME_ID

    def hex(self) -> str:
        return self.digest.hex()


def commit_payload(payload: bytes, salt: bytes) -> Commitment:
    if len(salt) != SALT_LEN:
        raise ValueError("salt must be 16 bytes")
    return Commitment(hashlib.sha256(payload + salt).digest())


def open_ok(com: Commitment | bytes, payload: bytes, salt: bytes) -> bool:
    digest = com.digest if isinstance(com, Commitment) else com
    if len(salt) != SALT_LEN:
        return False
    return hmac.compare_digest(digest, hashlib.sha256(payload + salt).digest())
