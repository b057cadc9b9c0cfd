import pytest

from tlsn_desk.circuits.library import equality, multiplier
from tlsn_desk.deap import (DeapSpec, check_value, client_execute, client_setup, client_verify, notary_execute,
                            notary_open, notary_setup, run_deap, wrong_function)
from tlsn_desk.errors import (CheckMismatch, CommitmentMalformed, CommitmentMismatch, CommitmentOpenFailure,
                              InauthenticLabels, OtReplayMismatch, PhaseError, RegarbleMismatch)
from tlsn_desk.harness.adversary import AdversaryScript, flip, replace
from tlsn_desk.transport import run_pair

MUL = DeapSpec(multiplier().circuit, ("a",), ("b",))


def _bits(v, n=4):
    return [(v >> i) & 1 for i in range(n)]


def test_honest_multiplier_all_inputs():
    for a in range(4):
        for b in range(4):
            v_c, v_n = run_deap(MUL, {"a": a}, {"b": b}, seeds=(a, 10 + b))
            assert v_c == v_n == _bits(a * b)


def test_public_inputs():
    spec = DeapSpec(equality(8).circuit, ("a",), (), public=("b",))
    assert run_deap(spec, {"a": 9}, {}, public={"b": 9})[0] == [1]
    assert run_deap(spec, {"a": 9}, {}, public={"b": 8})[0] == [0]


def test_spec_must_cover_all_groups():
    with pytest.raises(ValueError):
        DeapSpec(multiplier().circuit, ("a",), ())


def test_check_value_symmetric_inputs():
    assert check_value([1, 2], [3, 4]) == check_value([1, 2], [3, 4])
    assert check_value([1, 2], [3, 4]) != check_value([1, 2], [3, 5])


def test_wrong_function_is_caught_at_regarble():
    with pytest.raises(RegarbleMismatch):
        run_deap(MUL, {"a": 3}, {"b": 2}, gate_override=wrong_function(MUL.circuit))
    with pytest.raises(RegarbleMismatch):
        run_deap(MUL, {"a": 3}, {"b": 2}, deviations=((), ("deap_wrong_function",)))


def test_ot_substitution_is_caught_at_replay():
    with pytest.raises(OtReplayMismatch):
        run_deap(MUL, {"a": 1}, {"b": 1}, deviations=((), ("deap_ot_substitute",)))


def test_flipped_check_opening():
    with pytest.raises(CommitmentOpenFailure):
        run_deap(MUL, {"a": 1}, {"b": 1}, deviations=(("deap_flip_check",), ()))


def test_inconsistent_client_input():
    with pytest.raises(CheckMismatch):
        run_deap(MUL, {"a": 1}, {"b": 3}, deviations=(("deap_inconsistent_input",), ()))


def test_flipped_vc_labels():
    with pytest.raises(InauthenticLabels):
        run_deap(MUL, {"a": 1}, {"b": 3}, deviations=((), ("deap_flip_vc",)))


def test_output_commitment_tamper():
    script = AdversaryScript([replace("deap.gc", "cd" * 64, "com.1")])
    with pytest.raises(CommitmentMismatch):
        run_deap(MUL, {"a": 2}, {"b": 3}, adversary=script)


def test_malformed_commitment():
    script = AdversaryScript([replace("deap.gc", ["00"], "com")])
    with pytest.raises(CommitmentMalformed):
        run_deap(MUL, {"a": 2}, {"b": 3}, adversary=script)


def test_tampered_notary_table_is_caught():
    script = AdversaryScript([flip("deap.gn", "F", 8 * 60)])
    with pytest.raises(RegarbleMismatch):
        run_deap(MUL, {"a": 2}, {"b": 3}, adversary=script)


def test_scoped_deviation_only_hits_matching_tag():
    # "@other" scope: this instance is tagged "deap" and runs honestly
    v_c, v_n = run_deap(MUL, {"a": 3}, {"b": 3}, deviations=((), ("deap_wrong_function@other",)))
    assert v_c == _bits(9)


def test_equality_check_waits_for_tls_close():
    def client(ch):
        st = yield from client_setup(ch, MUL, {"a": 1})
        yield from client_execute(ch, st)
        yield from client_verify(ch, st, tls_closed=False)

    def notary(ch):
        st = yield from notary_setup(ch, MUL, {"b": 1})
        yield from notary_execute(ch, st)
        yield from notary_open(ch, st, tls_closed=True)

    with pytest.raises(PhaseError):
        run_pair(client, notary)


def test_phases_advance_in_order():
    out = {}

    def client(ch):
        st = yield from client_setup(ch, MUL, {"a": 2})
        out["c0"] = st.phase
        yield from client_execute(ch, st)
        out["c1"] = st.phase
        with pytest.raises(PhaseError):
            yield from client_execute(ch, st)
        x_n = yield from client_verify(ch, st, tls_closed=True)
        out["c2"], out["x_n"] = st.phase, x_n

    def notary(ch):
        st = yield from notary_setup(ch, MUL, {"b": 3})
        yield from notary_execute(ch, st)
        yield from notary_open(ch, st, tls_closed=True)
        out["n"] = st.phase

    run_pair(client, notary)
    assert (out["c0"], out["c1"], out["c2"], out["n"]) == ("setup", "executed", "checked", "checked")
    assert out["x_n"] == [1, 1]
