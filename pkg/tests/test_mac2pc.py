import pytest
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from hypothesis import given, settings
from hypothesis import strategies as st

from tlsn_desk.algebra import get_field
from tlsn_desk.errors import MacMismatch
from tlsn_desk.mac2pc import (CiphertextBlocks, compute_mac_2pc, gcm_encrypt_ref, ghash_ref, ghash_share, mac_client,
                              mac_ref, run_share_powers, verify_mac_client, verify_mac_notary)
from tlsn_desk.prg import Prg
from tlsn_desk.transport import run_pair

F16 = get_field("gf2_16")


def _keys(prg, F=F16):
    h_c = F.random_nonzero(prg)
    h_n = F.random(prg)
    if h_c + h_n == F.zero():
        h_n = h_n + F.one()
    return h_c, h_n


@pytest.mark.parametrize("n", [1, 2, 3, 7, 8])
def test_power_shares(n, prg):
    h_c, h_n = _keys(prg)
    pc, pn = run_share_powers(h_c, h_n, n)
    H = h_c + h_n
    assert [a + b for a, b in zip(pc, pn)] == [H ** k for k in range(1, n + 1)]


def test_power_shares_over_gf2_128(prg):
    h_c, h_n = _keys(prg, get_field("gf2_128"))
    pc, pn = run_share_powers(h_c, h_n, 4)
    assert pc[3] + pn[3] == (h_c + h_n) ** 4


def test_ghash_share_is_linear(prg):
    blocks = [F16.random(prg) for _ in range(5)]
    h_c, h_n = _keys(prg)
    pc, pn = run_share_powers(h_c, h_n, 5)
    assert ghash_share(blocks, pc) + ghash_share(blocks, pn) == ghash_ref(blocks, h_c + h_n)
    with pytest.raises(ValueError):
        ghash_share(blocks, pc[:4])


def test_2pc_tag_matches_reference(prg):
    for i in range(20):
        blocks = [F16.random(prg) for _ in range(1 + i % 6)]
        h_c, h_n = _keys(prg)
        g_c, g_n = F16.random(prg), F16.random(prg)
        mac = compute_mac_2pc(blocks, (h_c, h_n), (g_c, g_n), seeds=(i, i + 1))
        assert mac == mac_ref(blocks, h_c + h_n, g_c + g_n)


def test_wrong_tag_rejected_by_both(prg):
    blocks = [F16(0x1234), F16(0xBEEF)]
    h_c, h_n = _keys(prg)
    good = mac_ref(blocks, h_c + h_n, F16(7))
    run_pair(lambda ch: verify_mac_client(ch, blocks, h_c, F16(3), good),
             lambda ch: verify_mac_notary(ch, blocks, h_n, F16(4), good))
    bad = good + F16.one()
    with pytest.raises(MacMismatch):
        run_pair(lambda ch: verify_mac_client(ch, blocks, h_c, F16(3), bad),
                 lambda ch: verify_mac_notary(ch, blocks, h_n, F16(4), good))


def test_field_mismatch_on_share():
    from tlsn_desk.algebra import FieldMismatch

    G = get_field("gf2_128")

    def notary(ch):
        yield ch.send("mac.mac_n", {"f": G.field_id, "v": "00" * 16})
        yield ch.recv("mac.mac_c")

    def client(ch):
        return (yield from mac_client(ch, [F16(1)], F16(2), F16(3)))

    with pytest.raises(FieldMismatch):
        run_pair(client, notary)


def test_ciphertext_blocks_validation():
    assert CiphertextBlocks((F16(1), F16(2))).n == 2
    with pytest.raises(ValueError):
        CiphertextBlocks(())
    with pytest.raises(ValueError):
        CiphertextBlocks((F16(1), get_field("gf2_128")(1)))


@settings(max_examples=25, deadline=None)
@given(st.binary(min_size=16, max_size=16), st.binary(min_size=12, max_size=12),
       st.binary(max_size=70), st.binary(max_size=40))
def test_gcm_reference_against_library(key, iv, pt, aad):
    ct, tag = gcm_encrypt_ref(key, iv, pt, aad)
    assert AESGCM(key).encrypt(iv, pt, aad or None) == ct + tag


def test_gcm_reference_rejects_long_iv():
    with pytest.raises(ValueError):
        gcm_encrypt_ref(bytes(16), bytes(16), b"")


def test_ghash_horner_matches_power_sum():
    prg = Prg(b"ghash", "sum")
    F = get_field("gf2_128")
    xs, H = [F.random(prg) for _ in range(4)], F.random(prg)
    direct = F.zero()
    for i, x in enumerate(xs):
        direct = direct + x * H ** (len(xs) - i)
    assert ghash_ref(xs, H) == direct
