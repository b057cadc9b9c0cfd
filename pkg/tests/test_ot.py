import pytest

from tlsn_desk.errors import CommitmentOpenFailure, DecryptionFailure, OtReplayMismatch
from tlsn_desk.harness.adversary import AdversaryScript, flip
from tlsn_desk.ot import (TAG_LEN, CommittedOtSeed, OtSenderInput, _hasher, _open, _prefix, _split, committed_ot_recv,
                          committed_ot_send, cot_recv, cot_send, get_group, ot_recv, ot_send, rot_recv, rot_send,
                          run_base_ot)
from tlsn_desk.prg import Prg
from tlsn_desk.transport import run_pair


def _xor(a, b):
    return bytes(x ^ y for x, y in zip(a, b))


def test_base_ot_1000_trials(prg):
    """Receiver gets m_b and fails the tag check on m_{1-b}, every time."""
    n = 1000
    inputs = [OtSenderInput(prg.bytes(16), prg.bytes(16)) for _ in range(n)]
    choices = [prg.bit() for _ in range(n)]
    group = get_group("toy")
    state = {}

    def snd(ch):
        yield from ot_send(ch, [(s.m0, s.m1) for s in inputs])

    def rcv(ch):
        out, rec = yield from ot_recv(ch, choices, keep=True)
        state["rec"], state["ctx"] = rec, ch.ctx
        return out

    _, got = run_pair(snd, rcv, seeds=(11, 12), names=("sender", "receiver"))
    assert got == [s.m1 if b else s.m0 for s, b in zip(inputs, choices)]

    # replay the receiver's secret keys and try to open the other ciphertext
    rec, ctx = state["rec"], state["ctx"]
    raw = ctx._prg.fork("ot-recv:ot#0").bytes(8 * n)
    sks = [1 + int.from_bytes(raw[8 * i : 8 * i + 8], "little") % (group.n - 1) for i in range(n)]
    C = group.decode(rec.s_pk)
    h, size = _hasher(16), 16 + TAG_LEN
    c0s, c1s = _split(rec.c0, size, n), _split(rec.c1, size, n)
    opened_other = 0
    for j, (b, k) in enumerate(zip(choices, sks)):
        key = _prefix("ot") + j.to_bytes(4, "little") + group.encode(group.mul(k, C))
        _open(h, key, c1s[j] if b else c0s[j], 16)  # the chosen one opens
        try:
            _open(h, key, c0s[j] if b else c1s[j], 16)
            opened_other += 1
        except DecryptionFailure:
            pass
    assert opened_other == 0


def test_run_base_ot_p256():
    inputs = [OtSenderInput(b"a" * 8, b"b" * 8), OtSenderInput(b"c" * 8, b"d" * 8)]
    assert run_base_ot(inputs, [1, 0], group="p256") == [b"b" * 8, b"c" * 8]


def test_unequal_message_lengths_rejected():
    with pytest.raises(ValueError):
        OtSenderInput(b"ab", b"abc")


def test_tampered_ciphertext_detected():
    script = AdversaryScript([flip("ot.ct", "c0", 3)])
    pairs = [(b"x" * 16, b"y" * 16)]
    with pytest.raises(DecryptionFailure):
        run_pair(lambda ch: ot_send(ch, pairs), lambda ch: ot_recv(ch, [0]), adversary=script)


def test_cot_correlation(prg):
    deltas = [prg.bytes(16) for _ in range(32)]
    choices = [prg.bit() for _ in range(32)]
    rs, got = run_pair(lambda ch: cot_send(ch, deltas), lambda ch: cot_recv(ch, choices))
    for r, d, b, m in zip(rs, deltas, choices, got):
        assert m == (_xor(r, d) if b else r)


def test_rot(prg):
    choices = [prg.bit() for _ in range(20)]
    pairs, got = run_pair(lambda ch: rot_send(ch, 20), lambda ch: rot_recv(ch, choices))
    assert got == [p[b] for p, b in zip(pairs, choices)]
    assert all(p[0] != p[1] for p in pairs)


def _committed(pairs, choices, seed, substitute=None):
    def snd(ch):
        yield from committed_ot_send(ch, pairs, seed.rho, "c", substitute=substitute)

    def rcv(ch):
        return (yield from committed_ot_recv(ch, choices, "c"))

    _, (out, opening) = run_pair(snd, rcv)
    return out, opening


def test_committed_ot_replays():
    pairs = [(bytes([i]) * 16, bytes([i + 100]) * 16) for i in range(8)]
    seed = CommittedOtSeed.fresh(Prg(b"rho", "t"))
    out, opening = _committed(pairs, [1, 0] * 4, seed)
    assert out == [p[b] for p, b in zip(pairs, [1, 0] * 4)]
    assert opening.verify(seed.rho, seed.salt, seed.com, pairs)


def test_committed_ot_wrong_rho():
    pairs = [(bytes([i]) * 16, bytes([i + 100]) * 16) for i in range(8)]
    seed = CommittedOtSeed.fresh(Prg(b"rho", "t"))
    other = CommittedOtSeed.fresh(Prg(b"rho", "other"))
    _, opening = _committed(pairs, [0] * 8, seed)
    with pytest.raises(CommitmentOpenFailure):
        opening.verify(other.rho, seed.salt, seed.com, pairs)
    with pytest.raises(OtReplayMismatch):
        opening.verify(other.rho, other.salt, other.com, pairs)


def test_committed_ot_substitution_caught():
    pairs = [(bytes([i]) * 16, bytes([i + 100]) * 16) for i in range(8)]
    seed = CommittedOtSeed.fresh(Prg(b"rho", "t"))
    _, opening = _committed(pairs, [0] * 8, seed, substitute={3: (b"z" * 16, b"z" * 16)})
    with pytest.raises(OtReplayMismatch):
        opening.verify(seed.rho, seed.salt, seed.com, pairs)
