"""Finite fields, short Weierstrass curves and X25519.

Nothing in here is constant time. The arithmetic is written for
auditability at desk scale, not for handling production secrets.

Field elements carry the id of the field they live in; mixing fields raises
:class:`FieldMismatch`. Curve points are affine with an explicit identity.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union


class AlgebraError(ValueError):
    pass


class ZeroInverse(AlgebraError):
    pass


class FieldMismatch(AlgebraError):
    pass


class OffCurvePoint(AlgebraError):
    pass


class LowOrderPoint(AlgebraError):
    pass


# ---------------------------------------------------------------------------
# fields


class _Field:
    field_id: str
    bits: int

    @property
    def byte_len(self) -> int:
        return (self.bits + 7) // 8

    def zero(self):
        return self(0)

    def one(self):
        return self(1)

    def random(self, prg):
        raise NotImplementedError

    def random_nonzero(self, prg):
        while True:
            x = self.random(prg)
            if x:
                return x

    def from_bytes(self, data: bytes):
        return self(int.from_bytes(data, "big"))

    def from_hex(self, text: str):
        return self.from_bytes(bytes.fromhex(text))


class PrimeField(_Field):
    """The integers modulo a prime ``p``."""

    def __init__(self, field_id: str, p: int):
        self.field_id = field_id
        self.p = p
        self.bits = p.bit_length()

    def __call__(self, value: int) -> "FieldElement":
        return FieldElement(value % self.p, self)

    def __repr__(self):
        return f"PrimeField({self.field_id!r})"

    def random(self, prg) -> "FieldElement":
        return FieldElement(prg.randbelow(self.p), self)

    def basis(self, i: int) -> "FieldElement":
        return FieldElement(pow(2, i, self.p), self)

    def decompose(self, x: "FieldElement") -> list[int]:
        v = x.value
        return [(v >> i) & 1 for i in range(self.bits)]


class BinaryField(_Field):
    """GF(2^k) in polynomial basis; bit ``i`` of the value is the x^i coefficient."""

    def __init__(self, field_id: str, k: int, modulus: int):
        if modulus.bit_length() != k + 1:
            raise AlgebraError("modulus degree must equal k")
        self.field_id = field_id
        self.bits = k
        self.k = k
        self.modulus = modulus
        self.mask = (1 << k) - 1

    def __call__(self, value: int) -> "Gf2kElement":
        if value < 0 or value >> self.k:
            raise AlgebraError(f"value does not fit in {self.k} bits")
        return Gf2kElement(value, self)

    def __repr__(self):
        return f"BinaryField({self.field_id!r})"

    def random(self, prg) -> "Gf2kElement":
        return Gf2kElement(prg.randbits(self.k), self)

    def basis(self, i: int) -> "Gf2kElement":
        return Gf2kElement(1 << i, self)

    def decompose(self, x: "Gf2kElement") -> list[int]:
        v = x.value
        return [(v >> i) & 1 for i in range(self.k)]

    def mul_int(self, a: int, b: int) -> int:
        # carry-less product, then reduce from the top
        r = 0
        if a.bit_length() < b.bit_length():
            a, b = b, a
        while b:
            if b & 1:
                r ^= a
            a <<= 1
            b >>= 1
        k, m = self.k, self.modulus
        for i in range(r.bit_length() - 1, k - 1, -1):
            if (r >> i) & 1:
                r ^= m << (i - k)
        return r

    # GCM numbers the bits of a block from the left: bit 0 of byte 0 is x^0.
    def from_gcm_block(self, block: bytes) -> "Gf2kElement":
        n = int.from_bytes(block, "big")
        return Gf2kElement(_reverse_bits(n, self.k), self)

    def to_gcm_block(self, x: "Gf2kElement") -> bytes:
        return _reverse_bits(x.value, self.k).to_bytes(self.byte_len, "big")


def _reverse_bits(n: int, width: int) -> int:
    return int(format(n, f"0{width}b")[::-1], 2)


class _Element:
    __slots__ = ("value", "field")

    def __init__(self, value: int, field):
        self.value = value
        self.field = field

    def _check(self, other):
        if not isinstance(other, _Element):
            return NotImplemented
        if other.field is not self.field:
            raise FieldMismatch(f"{self.field.field_id} vs {other.field.field_id}")
        return None

    def __eq__(self, other):
        if not isinstance(other, _Element):
            return NotImplemented
        return self.field is other.field and self.value == other.value

    def __hash__(self):
        return hash((self.field.field_id, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{type(self).__name__}({self.field.field_id}:{self.hex()})"

    @property
    def modulus_id(self) -> str:
        return self.field.field_id

    field_id = modulus_id

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.field.byte_len, "big")

    def hex(self) -> str:
        return self.to_bytes().hex()

    def __truediv__(self, other):
        return self * other.inv()

    def __pow__(self, e: int):
        if e < 0:
            return self.inv() ** (-e)
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result


class FieldElement(_Element):
    """Element of a prime field."""

    __slots__ = ()

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldElement((self.value + other.value) % self.field.p, self.field)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldElement((self.value - other.value) % self.field.p, self.field)

    def __mul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return FieldElement(self.value * other.value % self.field.p, self.field)

    def __neg__(self):
        return FieldElement(-self.value % self.field.p, self.field)

    def inv(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroInverse(f"0 has no inverse in {self.field.field_id}")
        return FieldElement(pow(self.value, -1, self.field.p), self.field)


class Gf2kElement(_Element):
    """Element of GF(2^k); addition and subtraction are both XOR."""

    __slots__ = ()

    @property
    def bits(self) -> int:
        return self.value

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Gf2kElement(self.value ^ other.value, self.field)

    __sub__ = __add__
    __xor__ = __add__

    def __mul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Gf2kElement(self.field.mul_int(self.value, other.value), self.field)

    def __neg__(self):
        return self

    def square(self) -> "Gf2kElement":
        return self * self

    def inv(self) -> "Gf2kElement":
        if self.value == 0:
            raise ZeroInverse(f"0 has no inverse in {self.field.field_id}")
        # a^(2^k - 2)
        return self ** ((1 << self.field.k) - 2)


Element = Union[FieldElement, Gf2kElement]

# x^16 + x^5 + x^3 + x + 1
GF2_16_MODULUS = (1 << 16) | 0b101011
# x^128 + x^7 + x^2 + x + 1, the GCM polynomial
GF2_128_MODULUS = (1 << 128) | 0b10000111

P256_P = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
P256_N = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
TOY_P = 65521

FIELDS: dict[str, _Field] = {
    "toy": PrimeField("toy", TOY_P),
    "p256": PrimeField("p256", P256_P),
    "gf2_16": BinaryField("gf2_16", 16, GF2_16_MODULUS),
    "gf2_128": BinaryField("gf2_128", 128, GF2_128_MODULUS),
}


def get_field(field_id: str) -> _Field:
    try:
        return FIELDS[field_id]
    except KeyError:
        raise AlgebraError(f"unknown field {field_id!r}") from None


def fe_inv(x: FieldElement) -> FieldElement:
    return x.inv()


def gf2k_mul(a: Gf2kElement, b: Gf2kElement) -> Gf2kElement:
    return a * b


# ---------------------------------------------------------------------------
# short Weierstrass curves


@dataclass(frozen=True)
class CurveParams:
    name: str
    field: PrimeField
    a: int
    b: int
    gx: int
    gy: int
    n: int

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def G(self) -> "CurvePoint":
        return CurvePoint(self.gx, self.gy, self)

    @property
    def coord_len(self) -> int:
        return self.field.byte_len

    def is_on_curve(self, x: int, y: int) -> bool:
        p = self.p
        return 0 <= x < p and 0 <= y < p and (y * y - (x * x * x + self.a * x + self.b)) % p == 0

    def identity(self) -> "CurvePoint":
        return CurvePoint(None, None, self)

    def point(self, x: int, y: int) -> "CurvePoint":
        if not self.is_on_curve(x, y):
            raise OffCurvePoint(f"({x}, {y}) is not on {self.name}")
        return CurvePoint(x, y, self)


@dataclass(frozen=True)
class CurvePoint:
    x: int | None
    y: int | None
    curve: CurveParams

    @property
    def is_identity(self) -> bool:
        return self.x is None

    @property
    def curve_id(self) -> str:
        return self.curve.name

    @property
    def x_fe(self) -> FieldElement:
        return self.curve.field(self.x)

    @property
    def y_fe(self) -> FieldElement:
        return self.curve.field(self.y)

    def __add__(self, other: "CurvePoint") -> "CurvePoint":
        return point_add(self, other)

    def __neg__(self) -> "CurvePoint":
        return point_neg(self)

    def __sub__(self, other: "CurvePoint") -> "CurvePoint":
        return point_add(self, point_neg(other))

    def __rmul__(self, k: int) -> "CurvePoint":
        return ec_scalar_mul(k, self)

    def __repr__(self):
        if self.is_identity:
            return f"CurvePoint({self.curve.name}: identity)"
        return f"CurvePoint({self.curve.name}: {self.x:x}, {self.y:x})"

    def to_bytes(self) -> bytes:
        """Uncompressed x || y, each big-endian; identity encodes as all zeros."""
        n = self.curve.coord_len
        if self.is_identity:
            return bytes(2 * n)
        return self.x.to_bytes(n, "big") + self.y.to_bytes(n, "big")

    @classmethod
    def from_bytes(cls, curve: CurveParams, data: bytes) -> "CurvePoint":
        n = curve.coord_len
        if len(data) != 2 * n:
            raise OffCurvePoint("bad point encoding length")
        if not any(data):
            return curve.identity()
        return curve.point(int.from_bytes(data[:n], "big"), int.from_bytes(data[n:], "big"))


def point_neg(P: CurvePoint) -> CurvePoint:
    if P.is_identity:
        return P
    return CurvePoint(P.x, (-P.y) % P.curve.p, P.curve)


def point_add(P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    if P.curve is not Q.curve and P.curve != Q.curve:
        raise AlgebraError("points on different curves")
    if P.is_identity:
        return Q
    if Q.is_identity:
        return P
    curve = P.curve
    p = curve.p
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return curve.identity()
        lam = (3 * x1 * x1 + curve.a) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return CurvePoint(x3, (lam * (x1 - x3) - y1) % p, curve)


def ec_scalar_mul(k: int | FieldElement, P: CurvePoint) -> CurvePoint:
    """Double-and-add ``k * P``; ``k`` is reduced modulo the group order."""
    if isinstance(k, _Element):
        k = k.value
    curve = P.curve
    if not P.is_identity and not curve.is_on_curve(P.x, P.y):
        raise OffCurvePoint(f"{P!r} is not on {curve.name}")
    k %= curve.n
    result = curve.identity()
    addend = P
    while k:
        if k & 1:
            result = point_add(result, addend)
        addend = point_add(addend, addend)
        k >>= 1
    return result


TOY_CURVE = CurveParams("toy", FIELDS["toy"], a=2, b=13, gx=1, gy=4, n=65171)

P256 = CurveParams(
    "p256",
    FIELDS["p256"],
    a=P256_P - 3,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=P256_N,
)

CURVES: dict[str, CurveParams] = {"toy": TOY_CURVE, "p256": P256}


def get_curve(name: str) -> CurveParams:
    try:
        return CURVES[name]
    except KeyError:
        raise AlgebraError(f"unknown curve {name!r}") from None


# ---------------------------------------------------------------------------
# X25519 (Montgomery ladder)

_X25519_P = 2**255 - 19
_X25519_A24 = 121665
X25519_BASE = (9).to_bytes(32, "little")


def _clamp(sk: bytes) -> int:
    k = bytearray(sk)
    k[0] &= 248
    k[31] &= 127
    k[31] |= 64
    return int.from_bytes(k, "little")


def x25519_derive(sk: bytes, pk: bytes) -> bytes:
    """X25519(sk, pk) with scalar clamping. Raises LowOrderPoint on an all-zero result."""
    if len(sk) != 32 or len(pk) != 32:
        raise AlgebraError("X25519 inputs must be 32 bytes")
    p = _X25519_P
    k = _clamp(sk)
    u = int.from_bytes(pk, "little") & ((1 << 255) - 1)
    x1, x2, z2, x3, z3 = u, 1, 0, u, 1
    swap = 0
    for t in range(254, -1, -1):
        kt = (k >> t) & 1
        swap ^= kt
        if swap:
            x2, x3, z2, z3 = x3, x2, z3, z2
        swap = kt
        a = x2 + z2
        aa = a * a % p
        b = x2 - z2
        bb = b * b % p
        e = aa - bb
        c = x3 + z3
        d = x3 - z3
        da = d * a % p
        cb = c * b % p
        x3 = (da + cb) ** 2 % p
        z3 = x1 * (da - cb) ** 2 % p
        x2 = aa * bb % p
        z2 = e * (aa + _X25519_A24 * e) % p
    if swap:
        x2, z2 = x3, z3
    out = x2 * pow(z2, p - 2, p) % p
    if out == 0:
        raise LowOrderPoint("X25519 produced the all-zero output")
    return out.to_bytes(32, "little")


def x25519_public(sk: bytes) -> bytes:
    return x25519_derive(sk, X25519_BASE)
