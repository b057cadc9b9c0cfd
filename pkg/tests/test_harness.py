import json

import pytest

from tlsn_desk.harness import (CATALOG, SessionConfig, notary_blindness, run_audits, run_session,
                               transcript_digest)
from tlsn_desk.harness.audit import client_pre_reveal, int_encodings, scan, bytes_secret
from tlsn_desk.harness.cli import main, parse_ranges
from tlsn_desk.notarize import RECV, SENT, Attestation, verify_attestation
from tlsn_desk.transport import PartyMessage

REQ = b"GET /balance HTTP/1.1\r\n\r\n"
RESP = b"HTTP/1.1 200 OK\r\n\r\nbalance=987654"


@pytest.fixture(scope="module")
def result():
    res = run_session(SessionConfig(request=REQ, response=RESP, seed=3))
    assert res.ok, res.abort
    return res


def test_session_outputs(result):
    assert result.client.response == RESP
    assert result.server.requests == [REQ]
    assert verify_attestation(result.attestation, result.notary_key).accepted
    phases = result.transcript.summary()
    assert {"handshake", "record", "reveal", "notarize"} <= set(phases)


def test_same_seed_same_transcript(result):
    again = run_session(SessionConfig(request=REQ, response=RESP, seed=3))
    assert transcript_digest(again.transcript) == transcript_digest(result.transcript)
    other = run_session(SessionConfig(request=REQ, response=RESP, seed=4))
    assert transcript_digest(other.transcript) != transcript_digest(result.transcript)


def test_threaded_scheduler_matches(result):
    res = run_session(SessionConfig(request=REQ, response=RESP, seed=3, scheduler="threaded"))
    assert res.ok
    assert res.attestation.to_json() == result.attestation.to_json()
    for party in ("client", "notary", "server"):
        assert res.transcript.view_bytes(party) == result.transcript.view_bytes(party)


def test_empty_response():
    res = run_session(SessionConfig(request=b"HEAD / HTTP/1.1\r\n\r\n", response=b"", seed=1))
    assert res.ok, res.abort
    assert res.attestation.lengths[RECV] == 0
    rep = verify_attestation(res.attestation, res.notary_key)
    assert rep.accepted and rep.views["recv"] == []


def test_p256_session():
    res = run_session(SessionConfig(request=b"GET /", response=b"ok", curve="p256", seed=2))
    assert res.ok, res.abort
    assert verify_attestation(res.attestation, res.notary_key).accepted
    assert all(r.ok for r in run_audits(res))


def test_config_json_round_trip():
    cfg = SessionConfig(request=b"a", response=b"b", curve="p256", seeds=(1, 2, 3), redact=[(SENT, 0, 1)])
    again = SessionConfig.from_json(json.loads(json.dumps(cfg.to_json())))
    assert again.to_json() == cfg.to_json()
    with pytest.raises(ValueError):
        SessionConfig.from_json({"profile": "aes-gcm-128"})


def test_redaction_from_config():
    res = run_session(SessionConfig(request=REQ, response=RESP, seed=5, redact=[("recv", 19, len(RESP))]))
    view = verify_attestation(res.attestation, res.notary_key).views["recv"]
    assert view[19:] == [None] * (len(RESP) - 19)


def test_audits_clean(result):
    reports = run_audits(result)
    assert [r.name for r in reports] == ["notary blindness", "client pre-reveal"]
    for r in reports:
        assert r.ok, r.findings
        assert r.frames > 0 and r.secrets > 0


def _plant(result, party_from, party_to, phase, payload):
    t = result.transcript
    msg = PartyMessage("s3", party_from, party_to, phase, "leak", payload, 10_000)
    t.record("delivered", msg)
    return lambda: t.entries.remove(t.entries[-1])


def test_audit_catches_planted_plaintext(result):
    undo = _plant(result, "client", "notary", "record", json.dumps({"x": RESP.hex()}).encode())
    try:
        rep = notary_blindness(result)
    finally:
        undo()
    assert not rep.ok
    assert any(f.type == "leak" and "plaintext" in f.secret for f in rep.findings)


def test_audit_catches_planted_key_share(result):
    key = result.client.keys.sent
    undo = _plant(result, "client", "notary", "record", json.dumps({"k": f"{key:08x}"}).encode())
    try:
        assert not notary_blindness(result).ok
    finally:
        undo()
    seed = result.notary.record.encoder.seed
    undo = _plant(result, "notary", "client", "handshake", json.dumps({"s": seed.hex()}).encode())
    try:
        assert not client_pre_reveal(result).ok
    finally:
        undo()


def test_scan_helpers():
    assert {0x1234, "1234", "3412"} <= int_encodings(0x1234, 16)
    s = bytes_secret("p", b"0123456789abcdef")
    msg = PartyMessage("s", "a", "b", "x", "t", b'{"blob":"zz' + b"0123456789abcdef".hex().encode() + b'"}', 0)

    class T:
        def view(self, party):
            return [("recv", msg)]

    assert not scan("t", T(), "b", [s]).ok


@pytest.mark.parametrize("case", CATALOG[:4], ids=lambda c: c.name)
def test_catalog_cases(case):
    out = case.run(SessionConfig(request=b"GET /x", response=b"HTTP 200 ok"))
    assert out.passed, out.line()


def test_catalog_covers_every_phase():
    assert {c.phase for c in CATALOG} == {"handshake", "record", "reveal", "notarize"}
    assert len({c.name for c in CATALOG}) == len(CATALOG)


# -- CLI ---------------------------------------------------------------------------------------------

def test_parse_ranges():
    assert parse_ranges("0..4,recv:2..3") == [(SENT, 0, 4), (RECV, 2, 3)]
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        parse_ranges("nope:1..2")


def test_cli_round_trip(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(SessionConfig(request=REQ, response=RESP, seed=9).to_json()))
    att = tmp_path / "att.json"
    assert main(["notarize", "--config", str(cfg), "--out", str(att)]) == 0
    key = capsys.readouterr().err.split()[-1]

    assert main(["verify", "--in", str(att), "--notary-key", key]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["accepted"] and bytes(out["views"]["recv"]) == RESP

    red = tmp_path / "red.json"
    assert main(["redact", "--in", str(att), "--ranges", "recv:19..33", "--out", str(red)]) == 0
    assert main(["verify", "--in", str(red), "--notary-key", key]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["views"]["recv"][19:] == [None] * 14

    assert main(["redact", "--in", str(red), "--ranges", "recv:20..22"]) == 2

    # flip one disclosed byte
    d = json.loads(att.read_text())
    data = bytearray.fromhex(d["disclosures"][0]["data"])
    data[0] ^= 1
    d["disclosures"][0]["data"] = data.hex()
    att.write_text(json.dumps(d))
    capsys.readouterr()
    assert main(["verify", "--in", str(att), "--notary-key", key]) == 1
    assert json.loads(capsys.readouterr().out)["accepted"] is False


def test_cli_rejects_garbage(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "--in", str(bad), "--notary-key", "00" * 32]) == 1
    assert json.loads(capsys.readouterr().out)["accepted"] is False


def test_cli_demo_vectors(capsys):
    assert main(["demo", "vectors"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(l.startswith("PASS") for l in lines)


def test_cli_seed_override(capsys):
    assert main(["notarize", "--seed", "11"]) == 0
    att = Attestation.from_json(json.loads(capsys.readouterr().out))
    assert verify_attestation(att).accepted
