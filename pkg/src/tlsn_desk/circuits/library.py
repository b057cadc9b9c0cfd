"""The concrete circuits used by the protocols and tests."""
from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .builder import CircuitBuilder
from .core import BooleanCircuit, CircuitBundle, parse_circuit
from .spn import BLOCK_BITS, KEY_BITS, cipher_bits


def load_data_circuit(name: str) -> BooleanCircuit:
    text = resources.files("tlsn_desk.circuits").joinpath("data", f"{name}.circ").read_text("ascii")
    return parse_circuit(text)


@lru_cache(maxsize=None)
def multiplier() -> CircuitBundle:
    return CircuitBundle("multiplier", load_data_circuit("multiplier"),
                         {"inputs": {"a": 2, "b": 2}, "outputs": 4, "doc": "out = a * b"})


def _gate_circuit(kind: str) -> BooleanCircuit:
    b = CircuitBuilder()
    (x,) = b.input("a", 1)
    (y,) = b.input("b", 1)
    b.output([b.and_(x, y) if kind == "AND" else b.xor(x, y)])
    return b.build()


@lru_cache(maxsize=None)
def and_gate() -> CircuitBundle:
    return CircuitBundle("and", _gate_circuit("AND"), {"inputs": {"a": 1, "b": 1}, "outputs": 1})


@lru_cache(maxsize=None)
def xor_gate() -> CircuitBundle:
    return CircuitBundle("xor", _gate_circuit("XOR"), {"inputs": {"a": 1, "b": 1}, "outputs": 1})


@lru_cache(maxsize=None)
def equality(width: int) -> CircuitBundle:
    b = CircuitBuilder()
    x = b.input("a", width)
    y = b.input("b", width)
    b.output([b.eq(x, y)])
    return CircuitBundle(f"eq{width}", b.build(), {"inputs": {"a": width, "b": width}, "outputs": 1})


@lru_cache(maxsize=None)
def build_toy_cipher_circuit() -> CircuitBundle:
    b = CircuitBuilder()
    key = b.input("key", KEY_BITS)
    block = b.input("block", BLOCK_BITS)
    b.output(cipher_bits(b, key, block))
    return CircuitBundle("toy_cipher", b.build(),
                         {"inputs": {"key": KEY_BITS, "block": BLOCK_BITS}, "outputs": BLOCK_BITS})


@lru_cache(maxsize=None)
def record_encrypt() -> CircuitBundle:
    """c = Enc(k_c ^ k_n, ctr) ^ p; the keystream wires are named "ectr"."""
    b = CircuitBuilder()
    kc = b.input("k_c", KEY_BITS)
    p = b.input("p", BLOCK_BITS)
    kn = b.input("k_n", KEY_BITS)
    ctr = b.input("ctr", BLOCK_BITS)
    ectr = cipher_bits(b, b.xor_vec(kc, kn), ctr)
    b.name("ectr", ectr)
    b.output(b.xor_vec(ectr, p))
    widths = {"k_c": KEY_BITS, "p": BLOCK_BITS, "k_n": KEY_BITS, "ctr": BLOCK_BITS}
    return CircuitBundle("record_encrypt", b.build(), {"inputs": widths, "outputs": BLOCK_BITS})


@lru_cache(maxsize=None)
def record_decrypt() -> CircuitBundle:
    """ectr_z = Enc(k_c ^ k_n, ctr) ^ z; the unmasked keystream is named "ectr"."""
    b = CircuitBuilder()
    kc = b.input("k_c", KEY_BITS)
    z = b.input("z", BLOCK_BITS)
    kn = b.input("k_n", KEY_BITS)
    ctr = b.input("ctr", BLOCK_BITS)
    ectr = cipher_bits(b, b.xor_vec(kc, kn), ctr)
    b.name("ectr", ectr)
    b.output(b.xor_vec(ectr, z))
    widths = {"k_c": KEY_BITS, "z": BLOCK_BITS, "k_n": KEY_BITS, "ctr": BLOCK_BITS}
    return CircuitBundle("record_decrypt", b.build(), {"inputs": widths, "outputs": BLOCK_BITS})


@lru_cache(maxsize=None)
def mac_keys() -> CircuitBundle:
    """Masked Enc(k, 0) || Enc(k, j0), the GHASH key and the tag pad.

    Both parties contribute a 32-bit mask so that neither learns H or the pad.
    """
    b = CircuitBuilder()
    kc = b.input("k_c", KEY_BITS)
    mc = b.input("m_c", 32)
    kn = b.input("k_n", KEY_BITS)
    j0 = b.input("j0", BLOCK_BITS)
    mn = b.input("m_n", 32)
    k = b.xor_vec(kc, kn)
    h = cipher_bits(b, k, b.const_vec(0, BLOCK_BITS))
    pad = cipher_bits(b, k, j0)
    b.output(b.xor_vec(b.xor_vec(h + pad, mc), mn))
    widths = {"k_c": KEY_BITS, "m_c": 32, "k_n": KEY_BITS, "j0": BLOCK_BITS, "m_n": 32}
    return CircuitBundle("mac_keys", b.build(), {"inputs": widths, "outputs": 32})


@lru_cache(maxsize=None)
def key_schedule(p: int) -> CircuitBundle:
    """Masked session keys from additive PMS shares modulo ``p``.

    pms = s_c + s_n mod p, folded to a 32-bit master key, which encrypts the
    constants 1..4. Output is (k_sent || k_recv) ^ m_c ^ m_n, 64 bits.
    """
    w = p.bit_length()
    b = CircuitBuilder()
    sc = b.input("s_c", w)
    mc = b.input("m_c", 64)
    sn = b.input("s_n", w)
    mn = b.input("m_n", 64)
    pms = b.mod_add(sc, sn, p)
    pms = pms + b.const_vec(0, (-w) % 32)
    key = pms[:32]
    for s in range(32, len(pms), 32):
        key = b.xor_vec(key, pms[s : s + 32])
    out = []
    for i in range(1, 5):
        out.extend(cipher_bits(b, key, b.const_vec(i, BLOCK_BITS)))
    b.output(b.xor_vec(b.xor_vec(out, mc), mn))
    widths = {"s_c": w, "m_c": 64, "s_n": w, "m_n": 64}
    return CircuitBundle(f"key_schedule_{w}", b.build(), {"inputs": widths, "outputs": 64})


@lru_cache(maxsize=None)
def consistency(width: int) -> CircuitBundle:
    """1 iff p ^ ectr == c, bitwise over ``width`` bits."""
    b = CircuitBuilder()
    p = b.input("p", width)
    e = b.input("ectr", width)
    c = b.input("c", width)
    b.output([b.eq(b.xor_vec(p, e), c)])
    return CircuitBundle(f"consistency{width}", b.build(),
                         {"inputs": {"p": width, "ectr": width, "c": width}, "outputs": 1})


SHIPPED = {
    "multiplier": multiplier,
    "and": and_gate,
    "xor": xor_gate,
    "toy_cipher": build_toy_cipher_circuit,
    "record_encrypt": record_encrypt,
    "record_decrypt": record_decrypt,
    "mac_keys": mac_keys,
}
