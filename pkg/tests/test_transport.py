import pytest

from tlsn_desk.errors import ChannelError
from tlsn_desk.harness.adversary import AdversaryScript, Mutation, drop, flip, reorder, replace
from tlsn_desk.transport import Network, PartyCtx, run_pair, run_programs


def ping(n):
    def prog(ch):
        total = 0
        for i in range(n):
            yield ch.send("ping", {"i": i})
            total += (yield ch.recv("pong"))["i"]
        return total
    return prog


def pong(n):
    def prog(ch):
        for _ in range(n):
            msg = yield ch.recv("ping")
            yield ch.send("pong", {"i": msg["i"] * 2})
        return "done"
    return prog


@pytest.mark.parametrize("scheduler", ["sequential", "threaded"])
def test_ping_pong(scheduler):
    assert run_pair(ping(5), pong(5), scheduler=scheduler) == (20, "done")


@pytest.mark.parametrize("scheduler", ["sequential", "threaded"])
def test_deadlock_reported(scheduler):
    def waiter(ch):
        yield ch.recv("never")

    with pytest.raises(ChannelError, match="deadlock"):
        run_pair(waiter, waiter, scheduler=scheduler)


@pytest.mark.parametrize("scheduler", ["sequential", "threaded"])
def test_wrong_type_is_channel_error(scheduler):
    def a(ch):
        yield ch.send("x", 1)

    def b(ch):
        yield ch.recv("y")

    with pytest.raises(ChannelError):
        run_pair(a, b, scheduler=scheduler)


@pytest.mark.parametrize("scheduler", ["sequential", "threaded"])
def test_party_exception_stops_the_run(scheduler):
    def boom(ch):
        yield ch.send("ping", {"i": 0})
        raise RuntimeError("broken")

    net = Network()
    ca, cb = PartyCtx("a", 1), PartyCtx("b", 2)
    out = run_programs(net, {"a": (ca, boom(net.endpoint(ca, "b"))),
                             "b": (cb, pong(3)(net.endpoint(cb, "a")))}, scheduler)
    assert isinstance(out.error, RuntimeError)
    assert (out.abort.party, out.abort.cause) == ("a", "RuntimeError")


def test_transcript_and_views():
    net = Network(session="t")
    ca, cb = PartyCtx("a", 1), PartyCtx("b", 2)
    run_programs(net, {"a": (ca, ping(2)(net.endpoint(ca, "b"))), "b": (cb, pong(2)(net.endpoint(cb, "a")))})
    sent = net.transcript.messages("sent")
    assert [m.type for m in sent] == ["ping", "pong", "ping", "pong"]
    assert all(m.session == "t" for m in sent)
    view = net.transcript.view("a")
    assert sorted(d for d, _ in view) == ["recv", "recv", "sent", "sent"]
    assert net.transcript.summary()["init"]["messages"] == 4
    m = sent[0]
    assert m.decoded() == {"i": 0} and m.with_payload(b"{}").decoded() == {}
    assert len(m.frame()) > len(m.payload)


def test_ctx_forks_and_cheats():
    ctx = PartyCtx("p", 9, deviations=["x", "y@enc"])
    assert ctx.fork("l").bytes(8) != ctx.fork("l").bytes(8)
    assert PartyCtx("p", 9).fork("l").bytes(8) == PartyCtx("p", 9).fork("l").bytes(8)
    assert ctx.cheats("x") and ctx.cheats("y", "enc3.1") and not ctx.cheats("y", "dec0.0")
    assert not ctx.cheats("z")


def test_adversary_flip_replace_drop_reorder():
    script = AdversaryScript([flip("ping", "i", 0, occurrence=1)])
    assert run_pair(ping(3), pong(3), adversary=script) == (0 + 0 + 4, "done")  # i=1 arrives as 0
    assert script.log and not script.unapplied

    script = AdversaryScript([replace("pong", {"i": 100})])
    assert run_pair(ping(1), pong(1), adversary=script)[0] == 100

    with pytest.raises(ChannelError):
        run_pair(ping(2), pong(2), adversary=AdversaryScript([drop("ping")]))

    def burst(ch):
        yield ch.send("first", 1)
        yield ch.send("second", 2)

    def expect(ch):
        return [(yield ch.recv("first")), (yield ch.recv("second"))]

    with pytest.raises(ChannelError):
        run_pair(burst, expect, adversary=AdversaryScript([reorder("first")]))


def test_raw_payload_mutations():
    m = flip("ping", bit=3)
    assert m.mutate_payload(b"\x00\x00") == b"\x08\x00"
    assert replace("ping", b"raw").mutate_payload(b"x") == b"raw"
    with pytest.raises(ValueError):
        Mutation("smash", "ping")


def test_sender_filter():
    script = AdversaryScript([replace("pong", {"i": 1}, sender="nobody")])
    run_pair(ping(1), pong(1), adversary=script)
    assert script.unapplied == ["replace nobody->* pong#0"]
