"""Oblivious linear evaluation, the zero-input check and share conversion.

OLE is Gilboa's construction: the receiver's x is split into bits x_i and
one OT per bit hands over either r_i or r_i + a*e_i, where e_i is the i-th
basis element (2^i in Z_p, x^i in GF(2^k)) and the r_i sum to b. Summing what
was received gives a*x + b. VOLE reuses each choice bit for a whole vector of
slopes. Every OLE routine here is a pair of generators (sender, receiver)
driven by the transport layer.

Zero check. After a base OLE the checker holds alpha and t_chk, the verifier
holds beta and t_ver, with t_chk + t_ver = alpha*beta. A ROLE adds a term with
random beta_0. For each term a mirrored OLE gives the checker
y'_k = t_ver_k * alpha_k^-1 + w_k for verifier-chosen w_k; the checker sends
s = sum(t_chk_k * alpha_k^-1 + y'_k), which equals sum(beta_k + w_k) exactly
when every alpha_k is invertible. A checker with a zero input must guess the
verifier's random beta_0, so it passes with probability 1/|F|.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import wire
from .algebra import BinaryField, FieldMismatch, PrimeField, get_field
from .errors import ZeroInputDetected, ZeroSum
from .ot import ot_recv, ot_send


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class AdditiveShare:
    value: object
    party: str = ""

    @property
    def field_id(self) -> str:
        return self.value.field.field_id


@dataclass(frozen=True)
class MultiplicativeShare:
    value: object
    party: str = ""

    def __post_init__(self):
        if not self.value:
            raise ValueError("multiplicative shares must be nonzero")

    @property
    def field_id(self) -> str:
        return self.value.field.field_id


@dataclass(frozen=True)
class OleTriple:
    a: object
    b: object
    x: object
    y: object

    def holds(self) -> bool:
        return self.y == self.a * self.x + self.b


def _ops(field):
    """Integer-level add, basis step and random draw for one field."""
    if isinstance(field, PrimeField):
        p = field.p
        nbytes = field.byte_len + 8

        def add(u, v):
            return (u + v) % p

        def sub(u, v):
            return (u - v) % p

        def step(d):
            return (d << 1) % p

        def rand(prg):
            return int.from_bytes(prg.bytes(nbytes), "little") % p

        return add, sub, step, rand
    if isinstance(field, BinaryField):
        k, mod = field.k, field.modulus

        def xor(u, v):
            return u ^ v

        def step(d):
            d <<= 1
            return d ^ mod if d >> k else d

        def rand(prg):
            return prg.randbits(k)

        return xor, xor, step, rand
    raise TypeError(f"unsupported field {field!r}")


def _check_field(field, xs):
    for x in xs:
        if x.field is not field:
            raise FieldMismatch(f"{x.field.field_id} element in a {field.field_id} OLE")


def ole_send(ch, field, items: Sequence[tuple[Sequence, Sequence]], tag: str = "ole"):
    """Sender of a batch of VOLEs: item j is (a_vec, b_vec) against receiver x_j."""
    add, sub, step, _ = _ops(field)
    prg = ch.ctx.fork(f"ole:{tag}")
    k, w = field.bits, field.byte_len
    prime = isinstance(field, PrimeField)
    pairs = []
    for avec, bvec in items:
        if len(avec) != len(bvec) or not avec:
            raise LengthMismatch("slope and intercept vectors differ in length")
        _check_field(field, avec)
        _check_field(field, bvec)
        n = len(avec)
        d = [x.value for x in avec]  # a * e_i
        rem = [x.value for x in bvec]
        # all masks for this item in one PRG draw
        if prime:
            rb = field.byte_len + 8
            raw = prg.bytes(rb * n * (k - 1))
            rnd = [int.from_bytes(raw[i : i + rb], "little") % field.p for i in range(0, len(raw), rb)]
        else:
            rnd = [prg.randbits(k) for _ in range(n * (k - 1))]
        shift = 8 * w
        for i in range(k):
            if i < k - 1:
                r = rnd[i * n : (i + 1) * n]
                rem = [sub(u, v) for u, v in zip(rem, r)]
            else:
                r = rem
            if n == 1:
                pairs.append((r[0], add(r[0], d[0])))
            else:
                m0 = m1 = 0
                for e in range(n - 1, -1, -1):
                    m0 = (m0 << shift) | r[e]
                    m1 = (m1 << shift) | add(r[e], d[e])
                pairs.append((m0, m1))
            d = [step(v) for v in d]
    yield ch.send(f"{tag}.shape", {"f": field.field_id, "n": [len(a) for a, _ in items]})
    width = w * max([len(a) for a, _ in items] or [1])
    if len({len(a) for a, _ in items}) > 1:
        raise LengthMismatch("all VOLEs in one batch must have the same length")
    yield from ot_send(ch, pairs, tag, width=width)


def ole_recv(ch, field, xs: Sequence, tag: str = "ole") -> list[list]:
    """Receiver of a batch of VOLEs; returns y_j = a_j * x_j + b_j per item."""
    _check_field(field, xs)
    add, _, _, _ = _ops(field)
    shape = yield ch.recv(f"{tag}.shape")
    if shape["f"] != field.field_id:
        raise FieldMismatch(f"sender uses {shape['f']}, receiver {field.field_id}")
    ns = shape["n"]
    if len(ns) != len(xs) or len(set(ns)) > 1:
        raise LengthMismatch(f"sender has {len(ns)} OLEs, receiver {len(xs)}")
    k, w = field.bits, field.byte_len
    choices = []
    for x in xs:
        choices.extend(field.decompose(x))
    msgs = yield from ot_recv(ch, choices, tag, as_int=True)
    shift = 8 * w
    mask = (1 << shift) - 1
    out = []
    pos = 0
    for n in ns:
        acc = [0] * n
        for _ in range(k):
            m = msgs[pos]
            pos += 1
            for e in range(n):
                acc[e] = add(acc[e], (m >> (shift * e)) & mask)
        out.append([field(v) for v in acc])
    return out


# -- convenience runners --------------------------------------------------------

def _pair(fs, fr, seeds):
    from .transport import run_pair

    return run_pair(fs, fr, seeds, names=("sender", "receiver"))


def run_ole(a, b, x, seeds=(1, 2)):
    """y = a*x + b, run in-process between a fresh sender and receiver."""
    field = x.field
    _, ys = _pair(lambda ch: ole_send(ch, field, [([a], [b])]),
                  lambda ch: ole_recv(ch, field, [x]), seeds)
    return ys[0][0]


def run_vole(avec, bvec, x, seeds=(1, 2)):
    if len(avec) != len(bvec):
        raise LengthMismatch("slope and intercept vectors differ in length")
    field = x.field
    _, ys = _pair(lambda ch: ole_send(ch, field, [(avec, bvec)]),
                  lambda ch: ole_recv(ch, field, [x]), seeds)
    return ys[0]


def role_send(ch, field, tag: str = "role"):
    prg = ch.ctx.fork(f"role:{tag}")
    ra, rb = field.random(prg), field.random(prg)
    yield from ole_send(ch, field, [([ra], [rb])], tag)
    return ra, rb


def role_recv(ch, field, tag: str = "role"):
    prg = ch.ctx.fork(f"role:{tag}")
    rx = field.random(prg)
    (y,), = yield from ole_recv(ch, field, [rx], tag)
    return rx, y


def run_role(field, seeds=(1, 2)):
    """Returns ((r_a, r_b), (r_x, y)) with y = r_a*r_x + r_b."""
    return _pair(lambda ch: role_send(ch, field), lambda ch: role_recv(ch, field), seeds)


# -- zero check -----------------------------------------------------------------------

def _inv_or_zero(a):
    return a.inv() if a else a.field.zero()


def zero_check_prove(ch, field, alphas: Sequence, t_chk: Sequence, tag: str = "zc"):
    """Checker side: convince the verifier that every alpha_k is nonzero."""
    if len(alphas) != len(t_chk):
        raise LengthMismatch("one t_chk per alpha")
    prg = ch.ctx.fork(f"zc:{tag}")
    rx = field.random_nonzero(prg)
    if ch.ctx.cheats("zero_role_input"):
        rx = field.zero()
    alphas = [rx, *alphas]
    invs = [_inv_or_zero(a) for a in alphas]
    ys = yield from ole_recv(ch, field, [rx, *invs], tag)
    t_all = [ys[0][0], *t_chk]
    s = field.zero()
    for t, inv, (yk,) in zip(t_all, invs, ys[1:]):
        s = s + t * inv + yk
    yield ch.send(f"{tag}.sum", wire.fe_out(s))


def zero_check_verify(ch, field, betas: Sequence, t_ver: Sequence, tag: str = "zc"):
    """Verifier side; raises ZeroInputDetected if the checker's sum is off."""
    if len(betas) != len(t_ver):
        raise LengthMismatch("one t_ver per beta")
    prg = ch.ctx.fork(f"zc:{tag}")
    ra, rb = field.random(prg), field.random(prg)
    ws = [field.random(prg) for _ in range(len(betas) + 1)]
    slopes = [-rb, *t_ver]
    items = [([ra], [rb])] + [([a], [w]) for a, w in zip(slopes, ws)]
    yield from ole_send(ch, field, items, tag)
    msg = yield ch.recv(f"{tag}.sum")
    s = wire.fe_in(msg, field)
    expect = field.zero()
    for b, w in zip([ra, *betas], ws):
        expect = expect + b + w
    if s != expect:
        raise ZeroInputDetected(f"zero check {tag!r} failed")
    return True


# -- share conversion ---------------------------------------------------------------------

def a2m(ch, field, x_own, sampler: bool, tag: str = "a2m"):
    """Additive to multiplicative shares.

    The sampler draws r != 0, keeps z = r^-1 and acts as OLE sender with
    (a, b) = (r, r*x_own); the other party inputs its share and receives
    z = r*(x_C + x_N). A final status frame lets both parties raise ZeroSum
    when the shared value is zero. The sampler's slope is zero-checked.
    """
    _check_field(field, [x_own])
    if sampler:
        prg = ch.ctx.fork(f"a2m:{tag}")
        r = field.random_nonzero(prg)
        b = r * x_own
        yield from ole_send(ch, field, [([r], [b])], tag)
        yield from zero_check_prove(ch, field, [r], [-b], f"{tag}.zc")
        status = yield ch.recv(f"{tag}.status")
        if status["zero"]:
            raise ZeroSum("x_C + x_N = 0 has no multiplicative sharing")
        return r.inv()
    (y,), = yield from ole_recv(ch, field, [x_own], tag)
    yield from zero_check_verify(ch, field, [x_own], [y], f"{tag}.zc")
    yield ch.send(f"{tag}.status", {"zero": not y})
    if not y:
        raise ZeroSum("x_C + x_N = 0 has no multiplicative sharing")
    return y


def m2a(ch, field, x_own, sender: bool, tag: str = "m2a", input_override=None, perturb: bool = False):
    """Multiplicative to additive shares with one OLE.

    The sender draws z and uses (a, b) = (x_own, -z); the receiver inputs its
    share and gets x_C*x_N - z. The receiver's input is zero-checked.
    ``input_override`` and ``perturb`` model cheating parties in tests.
    """
    _check_field(field, [x_own])
    if not x_own:
        raise ValueError("m2a needs a nonzero multiplicative share")
    x_in = x_own if input_override is None else input_override
    if sender:
        prg = ch.ctx.fork(f"m2a:{tag}")
        z = field.random(prg)
        b = -z + (field.one() if perturb else field.zero())
        yield from ole_send(ch, field, [([x_in], [b])], tag)
        yield from zero_check_verify(ch, field, [x_in], [-b], f"{tag}.zc")
        return z
    (y,), = yield from ole_recv(ch, field, [x_in], tag)
    yield from zero_check_prove(ch, field, [x_in], [y], f"{tag}.zc")
    return y


def run_a2m(x_c, x_n, seeds=(1, 2), notary_samples: bool = True):
    """In-process a2m; returns (z_C, z_N)."""
    from .transport import run_pair

    field = x_c.field
    return run_pair(lambda ch: a2m(ch, field, x_c, not notary_samples),
                    lambda ch: a2m(ch, field, x_n, notary_samples), seeds)


def run_m2a(x_c, x_n, seeds=(1, 2), notary_sends: bool = True):
    from .transport import run_pair

    field = x_c.field
    return run_pair(lambda ch: m2a(ch, field, x_c, not notary_sends),
                    lambda ch: m2a(ch, field, x_n, notary_sends), seeds)


def field_of(field_id: str):
    return get_field(field_id)
