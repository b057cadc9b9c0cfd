import pytest

from tlsn_desk.algebra import OffCurvePoint, ec_scalar_mul, get_curve
from tlsn_desk.circuits.spn import derive_session_keys
from tlsn_desk.deap import client_verify, notary_open
from tlsn_desk.errors import EqualityCheckFailed, PointCollision, ServerAuthFailure, ZeroInputDetected
from tlsn_desk.handshake3p import (KeyShareSecret, ServerIdentity, combine_session_pubkey, compute_pms_shares,
                                   key_schedule_client, key_schedule_notary, pms_equality_circuit_check,
                                   pms_from_server, run_3p_handshake, run_pms_shares, verify_server_signature)
from tlsn_desk.transport import run_pair

TOY = get_curve("toy")


def _points(prg, curve=TOY):
    S = KeyShareSecret.generate(curve, prg)
    c, n = KeyShareSecret.generate(curve, prg), KeyShareSecret.generate(curve, prg)
    return S, c, n


def test_server_sees_plain_ecdh(prg):
    S, c, n = _points(prg)
    P = combine_session_pubkey(c.pk, n.pk)
    assert pms_from_server(P, S.sk) == ec_scalar_mul(c.sk + n.sk, S.pk).x


def test_combine_rejects_off_curve(prg):
    _, c, _ = _points(prg)
    bad = type(c.pk)(c.pk.x, (c.pk.y + 1) % TOY.p, TOY)
    with pytest.raises(OffCurvePoint):
        combine_session_pubkey(c.pk, bad)


@pytest.mark.parametrize("curve", ["toy", "p256"])
def test_shares_add_to_pms(curve, prg):
    S, c, n = _points(prg, get_curve(curve))
    sc, sn = compute_pms_shares(c.sk, n.sk, S.pk)
    assert (sc.value + sn.value).value == ec_scalar_mul(c.sk + n.sk, S.pk).x
    assert (sc.party, sn.party) == ("client", "notary")


def test_swapped_roles_give_other_shares_same_sum(prg):
    S, c, n = _points(prg)
    C, N = ec_scalar_mul(c.sk, S.pk), ec_scalar_mul(n.sk, S.pk)
    run1 = run_pms_shares(C, N)
    run2 = run_pms_shares(C, N, swap=True)
    assert run1[0] + run1[1] == run2[0] + run2[1]
    assert pms_equality_circuit_check(run1, run2)
    assert not pms_equality_circuit_check(run1, (run2[0] + run2[0].field.one(), run2[1]))


@pytest.mark.parametrize("flip", [False, True])
def test_collision_when_points_share_x(flip, prg):
    S, c, _ = _points(prg)
    C = ec_scalar_mul(c.sk, S.pk)
    N = -C if flip else C
    with pytest.raises(PointCollision):
        run_pms_shares(C, N)


def test_full_handshake_toy():
    c, n, s = run_3p_handshake("toy", seeds=(4, 5, 6))
    assert (c.pms_share + n.pms_share).value == s.pms
    assert c.P_pk == s.P_pk
    assert c.S_pk == n.S_pk
    assert c.client_random == s.client_random


def test_forced_collision_retries():
    c, n, s = run_3p_handshake("toy", seeds=(1, 2, 3))
    c2, n2, s2 = run_3p_handshake("toy", seeds=(1, 2, 3), forced_nsk=TOY.n - c.C_sk)
    assert n2.N_sk != TOY.n - c.C_sk
    assert (c2.pms_share + n2.pms_share).value == s2.pms


def test_perturbed_second_run_fails_equality():
    with pytest.raises(EqualityCheckFailed):
        run_3p_handshake("toy", deviations=(("m2a_perturb_run2",), (), ()))


@pytest.mark.parametrize("cheater", [0, 1])
def test_zero_m2a_input_detected(cheater):
    devs = [(), (), ()]
    devs[cheater] = ("m2a_zero_input",)
    with pytest.raises(ZeroInputDetected):
        run_3p_handshake("toy", deviations=tuple(devs))


def test_server_signature():
    ident = ServerIdentity.from_seed(b"srv")
    sig = ident.key.sign(b"r" * 16 + b"pk")
    verify_server_signature(ident.blob, b"r" * 16, b"pk", sig)
    with pytest.raises(ServerAuthFailure):
        verify_server_signature(ident.blob, b"x" * 16, b"pk", sig)
    with pytest.raises(ServerAuthFailure):
        verify_server_signature(b"short", b"r" * 16, b"pk", sig)


@pytest.mark.parametrize("curve", ["toy", "p256"])
def test_key_schedule_shares(curve, prg):
    cv = get_curve(curve)
    S, c, n = _points(prg, cv)
    sc, sn = compute_pms_shares(c.sk, n.sk, S.pk)
    pms = (sc.value + sn.value).value

    def client(ch):
        ks, st = yield from key_schedule_client(ch, cv, sc.value)
        yield from client_verify(ch, st, tls_closed=True)
        return ks

    def notary(ch):
        ks, st = yield from key_schedule_notary(ch, cv, sn.value)
        yield from notary_open(ch, st, tls_closed=True)
        return ks

    kc, kn = run_pair(client, notary)
    sent, recv = derive_session_keys(pms, cv.p.bit_length())
    assert (kc.sent ^ kn.sent, kc.recv ^ kn.recv) == (sent, recv)
    assert kn.sent != sent  # the Notary alone holds only a masked share
