"""Fixed test vectors and the checks behind ``tlsn-desk demo vectors``.

Each check returns (name, ok, detail). Oracles come from outside this
package where one exists: the ``cryptography`` X25519 and AES-GCM
implementations and the published GCM test cases.
"""
from __future__ import annotations

from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .algebra import X25519_BASE, x25519_derive
from .circuits.core import eval_int
from .circuits.library import multiplier
from .garble import decode, encode_inputs, evaluate, garble
from .mac2pc import _aes_block, gcm_encrypt_ref, gcm_ghash

X25519_CLIENT_SK = bytes(range(0x20, 0x40))
X25519_SERVER_SK = bytes(range(0x90, 0xB0))
X25519_SHARED = bytes.fromhex("df4a291baa1eb7cfa6934b29b474baad2697e29f1f920dcc77c8a0a088447624")

# (key, iv, plaintext, aad, ciphertext, tag) from the GCM specification's test cases 1-4
_TC3_P = ("d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a72"
          "1c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de657ba637b391aafd255")
_TC3_C = ("42831ec2217774244b7221b784d0d49ce3aa212f2c02a4e035c17e2329aca12e"
          "21d514b25466931c7d8f6a5aac84aa051ba30b396a0aac973d58e091473f5985")
GCM_VECTORS = [
    ("00" * 16, "00" * 12, "", "", "", "58e2fccefa7e3061367f1d57a4e7455a"),
    ("00" * 16, "00" * 12, "00" * 16, "", "0388dace60b6a392f328c2b971b2fe78", "ab6e47d42cec13bdf53a67b21257bddf"),
    ("feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888", _TC3_P, "", _TC3_C,
     "4d5c2af327cd64a62cf35abd2ba6fab4"),
    ("feffe9928665731c6d6a8f9467308308", "cafebabefacedbaddecaf888", _TC3_P[:120],
     "feedfacedeadbeeffeedfacedeadbeefabaddad2", _TC3_C[:120], "5bc94fbc3221a5db94fae95ae7121a47"),
]
# GHASH(H, A, C) for test case 2
GHASH_TC2 = ("66e94bd4ef8a2c3b884cfa59ca342b2e", "0388dace60b6a392f328c2b971b2fe78",
             "f38cbb1ad69223dcc3457ae5b6b0f885")


def check_x25519() -> tuple[str, bool, str]:
    c_pk = x25519_derive(X25519_CLIENT_SK, X25519_BASE)
    s_pk = x25519_derive(X25519_SERVER_SK, X25519_BASE)
    a = x25519_derive(X25519_CLIENT_SK, s_pk)
    b = x25519_derive(X25519_SERVER_SK, c_pk)
    oracle = X25519PrivateKey.from_private_bytes(X25519_CLIENT_SK).exchange(X25519PublicKey.from_public_bytes(s_pk))
    pub_ok = c_pk == X25519PrivateKey.from_private_bytes(X25519_CLIENT_SK).public_key().public_bytes(
        Encoding.Raw, PublicFormat.Raw)
    ok = a == b == X25519_SHARED == oracle and pub_ok
    return "x25519 shared secret", ok, a.hex()


def check_multiplier() -> tuple[str, bool, str]:
    c = multiplier().circuit
    rows, ok = [], True
    for a in range(4):
        for b in range(4):
            G = garble(c, f"mul{a}{b}".encode())
            X = encode_inputs(G.e, c, {"a": a, "b": b})
            y = decode(G.d, evaluate(c, G.F, X))
            v = sum(bit << i for i, bit in enumerate(y))
            ok &= v == a * b == eval_int(c, {"a": a, "b": b})
            rows.append(f"{a}*{b}={v}")
    return "2x2 multiplier (garbled, all inputs)", ok, " ".join(rows)


def check_gcm() -> tuple[str, bool, str]:
    ok = True
    for key, iv, pt, aad, ct, tag in GCM_VECTORS:
        k, n, p, a = (bytes.fromhex(x) for x in (key, iv, pt, aad))
        c, t = gcm_encrypt_ref(k, n, p, a)
        ok &= c.hex() == ct and t.hex() == tag
        ok &= AESGCM(k).encrypt(n, p, a or None) == c + t
    H, C, S = GHASH_TC2
    ok &= _aes_block(bytes(16), bytes(16)).hex() == H
    ok &= gcm_ghash(bytes.fromhex(H), b"", bytes.fromhex(C)).hex() == S
    return "GHASH / GCM test cases 1-4", ok, f"{len(GCM_VECTORS)} vectors"


def all_checks() -> list[tuple[str, bool, str]]:
    return [check_x25519(), check_multiplier(), check_gcm()]
