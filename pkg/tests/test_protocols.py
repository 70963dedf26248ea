import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entspread.errors import CleanViolationError, NormalizationError, PreconditionError, ShapeError, SizeError
from entspread.protocols import (
    ALICE,
    BOB,
    ENV,
    GATES,
    PHI,
    AddAncilla,
    BranchProgram,
    Discard,
    LocalUnitary,
    Local,
    SendCbit,
    SendQubit,
    Shared,
    clean_demo,
    coherent_teleport,
    concentration_sample,
    destroy_ebit_via_cbit,
    dirty_demo,
    new_session,
    noop_random_bit,
    payload_state,
    prepare_and_send,
    program_from_json,
    run_program,
    run_superposed,
    step,
)
from entspread.spectra import SchmidtSpectrum

S2 = 1 / math.sqrt(2)
PHI_RHO = np.outer(PHI, PHI.conj())


def trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def residual_rho(sess):
    env = [r.label for r in sess.registers if r.holder == ENV]
    msgs = [r.label for r in sess.registers if r.message]
    return sess.reduced(env + msgs)


# -- sessions and single steps -------------------------------------------------


def test_new_session_examples():
    assert np.allclose(new_session([Shared("ebits:1")]).joint, PHI)
    empty = new_session([])
    assert empty.dim == 1 and empty.joint[0] == 1
    both = new_session([Shared("ebits:1"), Local(ALICE, "+")])
    assert both.dim == 8
    assert np.allclose(both.joint, np.kron(PHI, [S2, S2]))


def test_dimension_cap():
    with pytest.raises(SizeError):
        new_session([Shared("ebits:1")] * 8)


def test_send_cbit_on_zero():
    sess = new_session([Local(ALICE, "0", "m")])
    step(sess, SendCbit("m"))
    env = [r for r in sess.registers if r.holder == ENV]
    assert len(env) == 1
    assert np.allclose(sess.reduced([env[0].label]), [[1, 0], [0, 0]])
    assert sess.register("m").holder == BOB and sess.register("m").message
    assert sess.ledger.cbits == 1


def test_send_cbit_on_plus_copies_coherently():
    sess = new_session([Local(ALICE, "+", "m")])
    step(sess, SendCbit("m"))
    env = next(r.label for r in sess.registers if r.holder == ENV)
    assert trace_distance(sess.reduced([env, "m"]), PHI_RHO) < 1e-12


def test_discard_one_is_dirty():
    sess = new_session([Local(ALICE, "0", "q")])
    step(sess, LocalUnitary(ALICE, ["q"], GATES["X"]))
    with pytest.raises(CleanViolationError) as info:
        step(sess, Discard("q"))
    assert info.value.trace_distance == pytest.approx(1.0)


def test_discard_zero_is_clean():
    sess = new_session([Shared("ebits:1")])
    step(sess, AddAncilla(BOB, 3, "z"))
    step(sess, Discard("z"))
    assert sess.labels() == ["A0", "B0"]
    assert np.allclose(sess.joint, PHI)


def test_discarding_half_of_phi_is_dirty():
    sess = new_session([Shared("ebits:1")])
    with pytest.raises(CleanViolationError) as info:
        step(sess, Discard("B0"))
    assert info.value.trace_distance == pytest.approx(0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-4, max_value=math.pi - 1e-4), st.floats(min_value=0, max_value=2 * math.pi))
def test_discard_enforcement_random_states(theta, phase):
    vec = [math.cos(theta / 2), np.exp(1j * phase) * math.sin(theta / 2)]
    sess = new_session([Local(BOB, vec, "q")])
    dist = abs(math.sin(theta / 2))
    if dist > 1e-9:
        with pytest.raises(CleanViolationError):
            step(sess, Discard("q"))


def test_local_unitary_checks_holder():
    sess = new_session([Shared("ebits:1")])
    with pytest.raises(PreconditionError):
        step(sess, LocalUnitary(ALICE, ["A0", "B0"], GATES["CNOT"]))


def test_send_qubit_counts_and_moves():
    sess = new_session([Shared("ebits:1")])
    step(sess, SendQubit("A0"))
    assert sess.register("A0").holder == BOB
    assert sess.ledger.qubits == 1 and sess.ledger.communication() == 2


actions = st.lists(
    st.sampled_from(["h_alice", "cnot_alice", "ancilla_bob", "send_qubit", "send_cbit", "cz_bob"]),
    max_size=8,
)


@settings(max_examples=60, deadline=None)
@given(actions)
def test_norm_preserved_and_ledger_counts(names):
    sess = new_session([Shared("partial:0.3"), Local(ALICE, "+", "a")])
    sent_c = sent_q = 0
    for name in names:
        alice = [r.label for r in sess.held_by(ALICE) if r.dim == 2 and not r.message]
        bob = [r.label for r in sess.held_by(BOB) if r.dim == 2]
        if name == "h_alice" and alice:
            step(sess, LocalUnitary(ALICE, alice[:1], GATES["H"]))
        elif name == "cnot_alice" and len(alice) >= 2:
            step(sess, LocalUnitary(ALICE, alice[:2], GATES["CNOT"]))
        elif name == "cz_bob" and len(bob) >= 2:
            step(sess, LocalUnitary(BOB, bob[:2], GATES["CZ"]))
        elif name == "ancilla_bob" and sess.dim * 2 <= sess.max_dim:
            step(sess, AddAncilla(BOB, 2))
        elif name == "send_qubit" and alice:
            step(sess, SendQubit(alice[0]))
            sent_q += 1
        elif name == "send_cbit" and alice and sess.dim * 2 <= sess.max_dim:
            step(sess, SendCbit(alice[0]))
            sent_c += 1
        assert abs(np.linalg.norm(sess.joint) - 1) < 1e-9
    assert (sess.ledger.cbits, sess.ledger.qubits) == (sent_c, sent_q)


# -- canned protocols ------------------------------------------------------------


def test_destroy_ebit_via_cbit():
    sess = destroy_ebit_via_cbit(new_session([Shared("ebits:1")]))
    assert trace_distance(residual_rho(sess), PHI_RHO) < 1e-12
    assert not [r for r in sess.registers if r.holder in (ALICE, BOB) and not r.message]
    assert sess.ledger.cbits == 1 and sess.ledger.ebits_consumed == 1


def test_destroy_leaves_second_pair_intact():
    sess = destroy_ebit_via_cbit(new_session([Shared("ebits:1"), Shared("ebits:1")]))
    assert trace_distance(sess.reduced(["A1", "B1"]), PHI_RHO) < 1e-12


def test_destroy_needs_phi():
    with pytest.raises(PreconditionError):
        destroy_ebit_via_cbit(new_session([Shared("product")]))


def test_noop_random_bit():
    sess = noop_random_bit(new_session([]))
    assert trace_distance(residual_rho(sess), PHI_RHO) < 1e-12
    assert sess.ledger.cbits == 1 and sess.ledger.ebits_consumed == 0


def test_residuals_of_pair_coincide():
    a = destroy_ebit_via_cbit(new_session([Shared("ebits:1")]))
    b = noop_random_bit(new_session([Shared("ebits:1")]))
    assert trace_distance(residual_rho(a), residual_rho(b)) <= 1e-9


def test_teleport_moves_state():
    amp = np.array([0.6, 0.8j])
    sess = new_session([Shared("ebits:1"), Local(ALICE, amp, "q")])
    coherent_teleport(sess, "q")
    assert abs(np.vdot(amp, sess.reduced(["B0"]) @ amp)) == pytest.approx(1.0, abs=1e-12)
    assert sess.ledger.cbits == 2 and sess.ledger.ebits_consumed == 1


def test_prepare_and_send_realizes_target():
    amps = np.diag([math.sqrt(0.75), math.sqrt(0.25)])
    sess = prepare_and_send(new_session([]), amps)
    spec, fid = payload_state(sess)
    assert spec.allclose(SchmidtSpectrum.from_values([0.75, 0.25]))
    assert fid == pytest.approx(1.0, abs=1e-12)
    assert sess.ledger.qubits == 1


def test_json_program():
    initial, steps = program_from_json(
        {
            "initial": [{"shared": "ebits:1"}],
            "steps": [
                {"op": "send_cbit", "register": "A0"},
                {"op": "local_unitary", "holder": "Bob", "registers": ["A0", "B0"], "gate": "cnot"},
                {"op": "discard", "register": "B0"},
            ],
        }
    )
    sess = run_program(new_session(initial), steps)
    assert sess.ledger.cbits == 1
    assert trace_distance(residual_rho(sess), PHI_RHO) < 1e-12


# -- superposition ----------------------------------------------------------------


def test_clean_demo():
    res = clean_demo()
    assert res.fidelity >= 1 - 1e-9
    assert res.residual_distance <= 1e-9


def test_dirty_demo():
    res = dirty_demo()
    # residual overlap is |Phi> + |00> over two, with norm cos(pi/8)
    assert res.fidelity == pytest.approx(math.cos(math.pi / 8), abs=1e-12)
    assert res.fidelity <= 0.95
    assert res.fidelity < 1 - 1e-3
    assert res.residual_distance > 0.5


def test_single_branch_fidelity_one():
    initial = new_session([Shared("ebits:1")])
    res = run_superposed([BranchProgram("noop", noop_random_bit)], [1.0], initial)
    assert res.fidelity == pytest.approx(1.0, abs=1e-12)


def test_branch_shape_mismatch():
    initial = new_session([Shared("ebits:1")])

    def with_qutrit(s):
        return s.step(AddAncilla(BOB, 3))

    def with_qubit(s):
        return s.step(AddAncilla(BOB, 2))

    with pytest.raises(ShapeError):
        run_superposed([BranchProgram("a", with_qutrit), BranchProgram("b", with_qubit)], [S2, S2], initial)


def test_amplitudes_must_be_normalized():
    initial = new_session([Shared("ebits:1")])
    with pytest.raises(NormalizationError):
        run_superposed([BranchProgram("a", lambda s: s)], [0.5], initial)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.05, max_value=math.pi / 2 - 0.05), st.floats(min_value=0, max_value=2 * math.pi))
def test_clean_pair_any_amplitudes(theta, phase):
    initial = new_session([Shared("ebits:1")])
    zero = np.zeros(4, dtype=complex)
    zero[0] = 1
    branches = [
        BranchProgram("destroy", destroy_ebit_via_cbit, zero),
        BranchProgram("noop", noop_random_bit),
    ]
    res = run_superposed(branches, [math.cos(theta), np.exp(1j * phase) * math.sin(theta)], initial)
    assert res.fidelity >= 1 - 1e-9


# -- concentration -----------------------------------------------------------------


def test_concentration_single_copy():
    mean, samples = concentration_sample(0.5, 1, 100, rng_seed=0)
    assert mean == 0.0 and np.all(samples == 0)


def test_concentration_deterministic():
    a = concentration_sample(0.3, 50, 200, rng_seed=7)[1]
    b = concentration_sample(0.3, 50, 200, rng_seed=7)[1]
    assert np.array_equal(a, b)


def test_concentration_floor():
    mean, samples = concentration_sample(0.3, 50, 200, rng_seed=7, floor=True)
    assert np.all(samples == np.floor(samples))
    assert mean <= concentration_sample(0.3, 50, 200, rng_seed=7)[0]


def test_concentration_yield_near_entropy():
    mean, _ = concentration_sample(0.2, 2000, 10_000, rng_seed=0)
    h = -0.2 * math.log2(0.2) - 0.8 * math.log2(0.8)
    assert abs(mean / 2000 - h) <= 0.05
