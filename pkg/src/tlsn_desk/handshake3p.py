"""Three-party handshake: the Client and the Notary jointly hold the session key.

The server sees an ordinary ECDH peer with public key P_pk = C_pk + N_pk.
Client and Notary each compute their own point (C = C_sk*S_pk and
N = N_sk*S_pk) and derive additive shares of the x-coordinate of R = C + N
without revealing their points:

    x_R = lambda^2 - x_C - x_N,  lambda = (y_N - y_C) / (x_N - x_C)

Numerator and denominator go through a2m, the quotient is squared locally
and m2a brings lambda^2 back to additive shares D_C + D_N. Then
s_C = D_C - x_C and s_N = D_N - x_N. The conversion runs twice with the
sampling roles swapped and a garbled equality check over the share
differences confirms both runs agree.
"""
from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

from .algebra import CurveParams, CurvePoint, ec_scalar_mul, get_curve
from .circuits.core import bits_to_int, int_to_bits
from .circuits.library import equality, key_schedule
from .deap import (DeapSpec, client_execute, client_setup, client_verify, deap_client, deap_notary,
                   notary_execute, notary_open, notary_setup)
from .errors import EqualityCheckFailed, PointCollision, ServerAuthFailure, ZeroSum
from .ole import a2m, m2a
from .prg import Prg

MAX_ATTEMPTS = 8


@dataclass(frozen=True)
class KeyShareSecret:
    sk: int
    pk: CurvePoint

    @classmethod
    def generate(cls, curve: CurveParams, prg: Prg) -> "KeyShareSecret":
        sk = 1 + prg.randbelow(curve.n - 1)
        return cls(sk, ec_scalar_mul(sk, curve.G))


@dataclass(frozen=True)
class PmsShare:
    value: object
    party: str


def combine_session_pubkey(C_pk: CurvePoint, N_pk: CurvePoint) -> CurvePoint:
    for P in (C_pk, N_pk):
        if not P.is_identity:
            P.curve.point(P.x, P.y)  # raises OffCurvePoint
    return C_pk + N_pk


def pms_from_server(P_pk: CurvePoint, S_sk: int) -> int:
    """What the server computes on its own: F_x(S_sk * P_pk)."""
    R = ec_scalar_mul(S_sk, P_pk)
    if R.is_identity:
        raise PointCollision("combined key times S_sk is the identity")
    return R.x


def _point_in(curve: CurveParams, text: str) -> CurvePoint:
    P = CurvePoint.from_bytes(curve, bytes.fromhex(text))
    if P.is_identity:
        raise PointCollision("peer sent the identity point")
    return P


# -- PMS share derivation -------------------------------------------------------------

def pms_share(ch, curve: CurveParams, own: CurvePoint, notary: bool, swap: bool = False, tag: str = "pms"):
    """One party's side of the share derivation; returns its PMS share.

    In the first run the Notary samples in a2m and sends in m2a; ``swap``
    hands both roles to the Client.
    """
    F = curve.field
    x, y = own.x_fe, own.y_fe
    num, den = (y, x) if notary else (-y, -x)
    samples = notary != swap
    try:
        B = yield from a2m(ch, F, den, samples, f"{tag}.den")
    except ZeroSum:
        raise PointCollision("x_C = x_N: the points coincide or are opposite") from None
    try:
        A = yield from a2m(ch, F, num, samples, f"{tag}.num")
    except ZeroSum:
        # y_C = y_N: lambda = 0, both parties learn it from the status frame
        return F.zero() - x
    q = A * B.inv()
    Cq = q * q
    override = F.zero() if ch.ctx.cheats("m2a_zero_input") and not samples else None
    perturb = ch.ctx.cheats("m2a_perturb_run2") and swap and samples
    D = yield from m2a(ch, F, Cq, samples, f"{tag}.m2a", input_override=override, perturb=perturb)
    return D - x


def run_pms_shares(C: CurvePoint, N: CurvePoint, seeds=(1, 2), swap: bool = False, deviations=((), ())):
    """compute_pms_shares in-process for two known points; returns (s_C, s_N)."""
    from .transport import run_pair

    curve = C.curve
    return run_pair(lambda ch: pms_share(ch, curve, C, False, swap),
                    lambda ch: pms_share(ch, curve, N, True, swap),
                    seeds, deviations=deviations)


def compute_pms_shares(C_sk: int, N_sk: int, S_pk: CurvePoint, seeds=(1, 2)):
    """Both PMS shares from the two secret scalars, as PmsShare values."""
    C = ec_scalar_mul(C_sk, S_pk)
    N = ec_scalar_mul(N_sk, S_pk)
    if C.is_identity or N.is_identity:
        raise PointCollision("a party's point is the identity")
    sc, sn = run_pms_shares(C, N, seeds)
    return PmsShare(sc, "client"), PmsShare(sn, "notary")


def _eq_spec(curve: CurveParams) -> DeapSpec:
    return DeapSpec(equality(curve.p.bit_length()).circuit, ("a",), ("b",))


def equality_client(ch, curve: CurveParams, d_c, tag: str = "pms.eq"):
    """Client side of the cross-run check on d_C = s_C^1 - s_C^2."""
    v = yield from deap_client(ch, _eq_spec(curve), {"a": d_c.value}, tag=tag)
    if v != [1]:
        raise EqualityCheckFailed("the two PMS runs disagree")
    return True


def equality_notary(ch, curve: CurveParams, d_n, tag: str = "pms.eq"):
    v = yield from deap_notary(ch, _eq_spec(curve), {"b": d_n.value}, tag=tag)
    if v != [1]:
        raise EqualityCheckFailed("the two PMS runs disagree")
    return True


def dual_pms_share(ch, curve: CurveParams, own: CurvePoint, notary: bool, tag: str = "pms"):
    """Both runs plus the equality check; returns the run-1 share."""
    s1 = yield from pms_share(ch, curve, own, notary, False, f"{tag}.1")
    s2 = yield from pms_share(ch, curve, own, notary, True, f"{tag}.2")
    if notary:
        yield from equality_notary(ch, curve, s2 - s1, f"{tag}.eq")
    else:
        yield from equality_client(ch, curve, s1 - s2, f"{tag}.eq")
    return s1


def pms_equality_circuit_check(run1, run2, seeds=(1, 2)) -> bool:
    """Check s_C^1 - s_C^2 = s_N^2 - s_N^1 with DEAP; run_i = (s_C, s_N)."""
    from .transport import run_pair

    curve = _curve_of(run1[0].field)
    d_c, d_n = run1[0] - run2[0], run2[1] - run1[1]
    try:
        run_pair(lambda ch: equality_client(ch, curve, d_c), lambda ch: equality_notary(ch, curve, d_n), seeds)
    except EqualityCheckFailed:
        return False
    return True


def _curve_of(field):
    for name in ("toy", "p256"):
        c = get_curve(name)
        if c.field is field:
            return c
    raise ValueError(f"no curve over {field.field_id}")


# -- key schedule ----------------------------------------------------------------------------

def key_schedule_spec(curve: CurveParams) -> DeapSpec:
    return DeapSpec(key_schedule(curve.p).circuit, ("s_c", "m_c"), ("s_n", "m_n"))


@dataclass
class KeyShares:
    """Masked session keys: k = share_C ^ share_N for each direction."""

    sent: int
    recv: int


def _split_keys(v_bits, mask: int) -> KeyShares:
    k = bits_to_int(v_bits) ^ mask
    return KeyShares(k & 0xFFFFFFFF, k >> 32)


def key_schedule_client(ch, curve: CurveParams, s_c, tag: str = "ks"):
    """Returns (KeyShares, DEAP state); the state's equality check waits for TLS close."""
    mask = ch.ctx.fork("ks-mask").randbits(64)
    st = yield from client_setup(ch, key_schedule_spec(curve), {"s_c": s_c.value, "m_c": mask}, tag=tag)
    yield from client_execute(ch, st)
    return KeyShares(mask & 0xFFFFFFFF, mask >> 32), st


def key_schedule_notary(ch, curve: CurveParams, s_n, tag: str = "ks"):
    mask = ch.ctx.fork("ks-mask").randbits(64)
    st = yield from notary_setup(ch, key_schedule_spec(curve), {"s_n": s_n.value, "m_n": mask}, tag=tag)
    v = yield from notary_execute(ch, st)
    return _split_keys(v, mask), st


# -- the three-party flow -------------------------------------------------------------------------

@dataclass
class ServerIdentity:
    """Opaque server identity: an Ed25519 key standing in for a certificate."""

    key: Ed25519PrivateKey

    @classmethod
    def from_seed(cls, seed: bytes) -> "ServerIdentity":
        return cls(Ed25519PrivateKey.from_private_bytes(Prg(seed, "server-identity").bytes(32)))

    @property
    def blob(self) -> bytes:
        return self.key.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)


def verify_server_signature(blob: bytes, client_random: bytes, S_pk: bytes, sig: bytes):
    try:
        Ed25519PublicKey.from_public_bytes(blob).verify(sig, client_random + S_pk)
    except (InvalidSignature, ValueError):
        raise ServerAuthFailure("server key share signature is invalid") from None


@dataclass
class ClientHandshake:
    pms_share: object
    C_sk: int
    P_pk: CurvePoint
    server_identity: bytes
    client_random: bytes
    S_pk: CurvePoint
    server_signature: bytes = b""


@dataclass
class NotaryHandshake:
    pms_share: object
    N_sk: int
    S_pk: CurvePoint


def client_handshake(eps: dict, curve: CurveParams):
    """Client program; ``eps`` maps "server" and "notary" to endpoints."""
    srv, nt = eps["server"], eps["notary"]
    prg = srv.ctx.fork("handshake")
    client_random = prg.bytes(16)
    yield srv.send("client_hello", {"random": client_random.hex(), "curve": curve.name})
    msg = yield srv.recv("server_pubkey")
    S_raw = bytes.fromhex(msg["pk"])
    identity = bytes.fromhex(msg["identity"])
    sig = bytes.fromhex(msg["sig"])
    verify_server_signature(identity, client_random, S_raw, sig)
    S_pk = _point_in(curve, msg["pk"])
    yield nt.send("server_pubkey", {"pk": S_raw.hex()})
    C_key = KeyShareSecret.generate(curve, prg)
    C = ec_scalar_mul(C_key.sk, S_pk)
    for attempt in range(MAX_ATTEMPTS):
        msg = yield nt.recv("notary_pubkey")
        N_pk = _point_in(curve, msg["pk"])
        try:
            s_c = yield from dual_pms_share(nt, curve, C, False, f"pms{attempt}")
        except PointCollision:
            nt.ctx.log.append(f"point collision on attempt {attempt}")
            continue
        P_pk = combine_session_pubkey(C_key.pk, N_pk)
        yield srv.send("combined_pubkey", {"pk": P_pk.to_bytes().hex()})
        return ClientHandshake(s_c, C_key.sk, P_pk, identity, client_random, S_pk, sig)
    raise PointCollision("no usable Notary key share")


def notary_handshake(ep, curve: CurveParams):
    msg = yield ep.recv("server_pubkey")
    S_pk = _point_in(curve, msg["pk"])
    prg = ep.ctx.fork("handshake")
    forced = getattr(ep.ctx, "forced_nsk", None)
    for attempt in range(MAX_ATTEMPTS):
        N_key = KeyShareSecret.generate(curve, prg)
        if forced and attempt == 0:
            N_key = KeyShareSecret(forced, ec_scalar_mul(forced, curve.G))
        yield ep.send("notary_pubkey", {"pk": N_key.pk.to_bytes().hex()})
        N = ec_scalar_mul(N_key.sk, S_pk)
        try:
            s_n = yield from dual_pms_share(ep, curve, N, True, f"pms{attempt}")
        except PointCollision:
            continue
        return NotaryHandshake(s_n, N_key.sk, S_pk)
    raise PointCollision("no usable Notary key share")


@dataclass
class ServerHandshake:
    pms: int
    S_sk: int
    client_random: bytes
    P_pk: CurvePoint


def server_handshake(ep, curve: CurveParams, identity: ServerIdentity):
    """Plain single-party ECDH as seen by the server."""
    msg = yield ep.recv("client_hello")
    client_random = bytes.fromhex(msg["random"])
    if msg["curve"] != curve.name:
        raise ValueError(f"client asked for {msg['curve']}, server runs {curve.name}")
    S_key = KeyShareSecret.generate(curve, ep.ctx.fork("handshake"))
    S_raw = S_key.pk.to_bytes()
    sig = identity.key.sign(client_random + S_raw)
    yield ep.send("server_pubkey", {"pk": S_raw.hex(), "identity": identity.blob.hex(), "sig": sig.hex()})
    msg = yield ep.recv("combined_pubkey")
    P_pk = _point_in(curve, msg["pk"])
    return ServerHandshake(pms_from_server(P_pk, S_key.sk), S_key.sk, client_random, P_pk)


def run_3p_handshake(curve: CurveParams | str = "toy", seeds=(1, 2, 3), deviations=((), (), ()),
                     forced_nsk: int | None = None):
    """Run the handshake alone; returns (ClientHandshake, NotaryHandshake, ServerHandshake)."""
    from .transport import Network, PartyCtx, run_programs

    curve = get_curve(curve) if isinstance(curve, str) else curve
    net = Network()
    cc = PartyCtx("client", seeds[0], deviations[0])
    cn = PartyCtx("notary", seeds[1], deviations[1])
    cs = PartyCtx("server", seeds[2], deviations[2])
    cn.forced_nsk = forced_nsk
    identity = ServerIdentity.from_seed(cs.seed)
    eps = {"server": net.endpoint(cc, "server"), "notary": net.endpoint(cc, "notary")}
    out = run_programs(net, {
        "client": (cc, client_handshake(eps, curve)),
        "notary": (cn, notary_handshake(net.endpoint(cn, "client"), curve)),
        "server": (cs, server_handshake(net.endpoint(cs, "client"), curve, identity)),
    })
    if out.error is not None:
        raise out.error
    return out.results["client"], out.results["notary"], out.results["server"]
