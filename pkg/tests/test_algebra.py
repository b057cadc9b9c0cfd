import pytest
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat
from hypothesis import given, settings
from hypothesis import strategies as st

from tlsn_desk.algebra import (FieldMismatch, LowOrderPoint, OffCurvePoint, PrimeField, ZeroInverse,
                               ec_scalar_mul, fe_inv, get_curve, get_field, x25519_derive, x25519_public)


def test_small_prime_inverse():
    z7 = PrimeField("z7", 7)
    assert fe_inv(z7(3)) == z7(5)
    assert z7(3) * z7(5) == z7.one()
    with pytest.raises(ZeroInverse):
        z7(0).inv()


def test_field_axioms(field, prg):
    for _ in range(20):
        a, b, c = field.random(prg), field.random(prg), field.random(prg)
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a - a == field.zero()
        assert a + (-a) == field.zero()
        if a:
            assert a * a.inv() == field.one()


def test_mixing_fields_fails():
    with pytest.raises(FieldMismatch):
        get_field("toy")(1) + get_field("p256")(1)
    with pytest.raises(FieldMismatch):
        get_field("gf2_16")(1) * get_field("gf2_128")(1)


def test_gf2k_addition_is_xor():
    F = get_field("gf2_16")
    a, b = F(0x1234), F(0x00FF)
    assert (a + b).value == 0x1234 ^ 0x00FF
    assert a - b == a + b
    assert a + a == F.zero()


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 0xFFFF), st.integers(0, 0xFFFF))
def test_gf2_16_squaring_is_linear(x, y):
    F = get_field("gf2_16")
    a, b = F(x), F(y)
    assert (a + b).square() == a.square() + b.square()


def test_gcm_block_round_trip():
    F = get_field("gf2_128")
    block = bytes.fromhex("66e94bd4ef8a2c3b884cfa59ca342b2e")
    assert F.to_gcm_block(F.from_gcm_block(block)) == block
    # the leftmost bit of a GCM block is the constant coefficient
    assert F.from_gcm_block(b"\x80" + bytes(15)) == F.one()


def test_toy_group_order_and_ecdh(prg):
    toy = get_curve("toy")
    assert ec_scalar_mul(toy.n, toy.G).is_identity
    for _ in range(50):
        a, b = 1 + prg.randbelow(toy.n - 1), 1 + prg.randbelow(toy.n - 1)
        assert ec_scalar_mul(a, ec_scalar_mul(b, toy.G)) == ec_scalar_mul(b, ec_scalar_mul(a, toy.G))


def test_toy_group_enumeration_is_complete():
    from tlsn_desk.ot import get_group

    toy = get_curve("toy")
    g = get_group("toy")
    # n distinct encodings, the identity first, then k*G for k = 1..n-1
    assert len(set(g._enc)) == toy.n
    assert not any(g._enc[0])
    for k in (1, 2, 777, toy.n - 1):
        assert g._enc[k] == ec_scalar_mul(k, toy.G).to_bytes()


def test_p256_matches_cryptography(prg):
    curve = get_curve("p256")
    for _ in range(3):
        k = 1 + prg.randbelow(curve.n - 1)
        ours = ec_scalar_mul(k, curve.G)
        pub = ec.derive_private_key(k, ec.SECP256R1()).public_key()
        raw = pub.public_bytes(Encoding.X962, PublicFormat.UncompressedPoint)
        assert raw[1:] == ours.to_bytes()


def test_point_negation_and_identity():
    toy = get_curve("toy")
    P = ec_scalar_mul(1234, toy.G)
    assert (P + (-P)).is_identity
    assert P - P == toy.identity()
    assert P + toy.identity() == P


def test_off_curve_rejected():
    toy = get_curve("toy")
    with pytest.raises(OffCurvePoint):
        toy.point(1, 5)


def test_x25519_against_cryptography(prg):
    for _ in range(5):
        a, b = prg.bytes(32), prg.bytes(32)
        ours = x25519_derive(a, x25519_public(b))
        ka, kb = X25519PrivateKey.from_private_bytes(a), X25519PrivateKey.from_private_bytes(b)
        assert ours == ka.exchange(kb.public_key())
        assert x25519_public(a) == ka.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def test_x25519_low_order_point():
    with pytest.raises(LowOrderPoint):
        x25519_derive(bytes(range(32)), bytes(32))
