import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlsn_desk.circuits.core import assign_inputs, bits_to_int, eval_plain, eval_wires
from tlsn_desk.circuits.library import and_gate, build_toy_cipher_circuit, multiplier, xor_gate
from tlsn_desk.garble import (ROW_BYTES, GarbledCircuit, RowTagFailure, WidthMismatch, _row_pad, decode, encode,
                              encode_inputs, evaluate, evaluate_wires, garble, verify_garbling)


@settings(max_examples=30, deadline=None)
@given(st.binary(min_size=1, max_size=16), st.integers(0, 3), st.integers(0, 3))
def test_multiplier_correct_for_any_seed(seed, a, b):
    c = multiplier().circuit
    G = garble(c, seed)
    assert bits_to_int(decode(G.d, evaluate(c, G.F, encode_inputs(G.e, c, {"a": a, "b": b})))) == a * b


@pytest.mark.parametrize("bundle", [and_gate, xor_gate])
def test_single_gates(bundle):
    c = bundle().circuit
    for a in (0, 1):
        for b in (0, 1):
            G = garble(c, b"gate")
            y = decode(G.d, evaluate(c, G.F, encode_inputs(G.e, c, {"a": a, "b": b})))
            assert y == eval_plain(c, {"a": a, "b": b})


def test_garbling_is_deterministic():
    c = multiplier().circuit
    assert garble(c, b"s").F.to_bytes() == garble(c, b"s").F.to_bytes()
    assert garble(c, b"s").F.to_bytes() != garble(c, b"t").F.to_bytes()


def test_free_offset_on_every_wire():
    c = build_toy_cipher_circuit().circuit
    G = garble(c, b"offset")
    assert G.delta & 1
    x = assign_inputs(c, {"key": 0xDEADBEEF, "block": 0x1234})
    active = evaluate_wires(c, G.F, encode(G.e, x))
    truth = eval_wires(c, x)
    for w in range(c.n_wires):
        assert active[w] == G.label(w, truth[w])
        assert G.label(w, 0) ^ G.label(w, 1) == G.delta


def test_corrupted_row_raises():
    c = multiplier().circuit
    G = garble(c, b"row")
    X = encode_inputs(G.e, c, {"a": 3, "b": 3})
    # find a row the evaluation actually reads, then flip a byte in it
    vals = evaluate_wires(c, G.F, X)
    g0 = c.gates[0]
    r = 2 * (vals[g0.ins[0]] & 1) + (vals[g0.ins[1]] & 1)
    rows = bytearray(G.F.rows)
    rows[ROW_BYTES * r + 19] ^= 1
    bad = GarbledCircuit(G.F.circuit_hash, G.F.tweak_base, bytes(rows))
    with pytest.raises(RowTagFailure):
        evaluate(c, bad, X)


def test_wrong_circuit_hash_raises():
    c = multiplier().circuit
    G = garble(c, b"hash")
    bad = GarbledCircuit(bytes(32), G.F.tweak_base, G.F.rows)
    with pytest.raises(RowTagFailure):
        evaluate(c, bad, encode_inputs(G.e, c, {"a": 1, "b": 1}))


def test_off_path_rows_fail_their_tag():
    """With one input's labels, none of the 3 other rows per AND gate decrypts."""
    c = multiplier().circuit
    G = garble(c, b"oblivious")
    vals = evaluate_wires(c, G.F, encode_inputs(G.e, c, {"a": 2, "b": 3}))
    k = failures = 0
    for gi, g in enumerate(c.gates):
        if g.kind != "AND":
            continue
        ka, kb = vals[g.ins[0]], vals[g.ins[1]]
        used = 2 * (ka & 1) + (kb & 1)
        for r in range(4):
            if r == used:
                continue
            row = int.from_bytes(G.F.rows[ROW_BYTES * (4 * k + r) : ROW_BYTES * (4 * k + r + 1)], "little")
            failures += (row ^ _row_pad(ka, kb, G.F.tweak_base, gi)) >> 128 != 0
        k += 1
    assert failures == 3 * c.n_and


def test_verify_garbling():
    c = multiplier().circuit
    G = garble(c, b"verify")
    assert verify_garbling(G.F, c, b"verify")
    assert not verify_garbling(G.F, c, b"other")


def test_pinned_offset_and_input_labels():
    c = multiplier().circuit
    delta = (1 << 100) | 1
    G = garble(c, b"pin", delta=delta, input_zero={0: 12345})
    assert G.delta == delta and G.zero[0] == 12345
    assert bits_to_int(decode(G.d, evaluate(c, G.F, encode_inputs(G.e, c, {"a": 3, "b": 2})))) == 6
    with pytest.raises(ValueError):
        garble(c, b"pin", delta=2)


def test_gate_override_changes_the_function():
    c = multiplier().circuit
    G = garble(c, b"cheat", gate_override={0: (1, 1, 1, 0)})  # gate 0 (a0 AND b0) becomes NAND
    y = bits_to_int(decode(G.d, evaluate(c, G.F, encode_inputs(G.e, c, {"a": 0, "b": 0}))))
    assert y == 1
    with pytest.raises(ValueError):
        garble(c, b"cheat", gate_override={3: (1, 1, 1, 0)})  # gate 3 is an XOR


def test_width_checks():
    c = multiplier().circuit
    G = garble(c, b"w")
    with pytest.raises(WidthMismatch):
        encode(G.e, [0, 1])
    with pytest.raises(WidthMismatch):
        decode(G.d, [0])


def test_blob_round_trip():
    G = garble(multiplier().circuit, b"blob")
    assert GarbledCircuit.from_bytes(G.F.to_bytes()) == G.F
    with pytest.raises(ValueError):
        GarbledCircuit.from_bytes(G.F.to_bytes()[:-1])
