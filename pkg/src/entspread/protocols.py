"""State-vector simulator for two-party protocols with an explicit environment.

Every register is held by Alice, Bob or the Environment and the joint state is
kept pure.  A classical channel is modelled isometrically: the message is
copied into a fresh Environment register in the computational basis before
Bob receives it.  Only registers in |0>, or delivered classical messages, may
be discarded; anything else raises :class:`CleanViolationError`.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import (
    CleanViolationError,
    DomainError,
    NormalizationError,
    PreconditionError,
    ShapeError,
    SizeError,
    ValidityError,
)
from .spectra import BipartiteState, SchmidtSpectrum, schmidt_spectrum_of
from .states import NamedState, state_vector_of_named

ALICE, BOB, ENV = "Alice", "Bob", "Environment"
PARTIES = (ALICE, BOB)
HOLDERS = (ALICE, BOB, ENV)

MAX_DIM = 1 << 14
CLEAN_TOL = 1e-9
UNITARY_TOL = 1e-9

_S2 = 1 / math.sqrt(2)
GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
}

KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S2, _S2], dtype=complex),
    "-": np.array([_S2, -_S2], dtype=complex),
}

PHI = np.array([_S2, 0, 0, _S2], dtype=complex)


def _other(holder):
    return BOB if holder == ALICE else ALICE


def _qubit_count(dim):
    return max(1, math.ceil(math.log2(dim)))


@dataclass
class Register:
    label: str
    holder: str
    dim: int
    order: int
    message: bool = False
    initial: bool = False


@dataclass
class Ledger:
    cbits: int = 0
    qubits: int = 0
    ebits_consumed: int = 0
    ebits_created: int = 0
    leaks: int = 0

    def communication(self) -> int:
        """Classical-bit equivalent: a qubit counts as two cbits."""
        return self.cbits + 2 * self.qubits

    def as_dict(self) -> dict:
        return dict(vars(self))


# -- initial-state descriptors ---------------------------------------------


@dataclass
class Shared:
    """A bipartite pure state split between Alice (rows) and Bob (columns)."""

    state: object = "ebits:1"
    labels: tuple[str, str] | None = None

    def amplitudes(self) -> np.ndarray:
        if isinstance(self.state, (str, NamedState)):
            return state_vector_of_named(self.state)
        if isinstance(self.state, BipartiteState):
            return np.array(self.state.amplitudes)
        return BipartiteState(self.state).amplitudes.copy()


@dataclass
class Local:
    holder: str
    state: object = "0"
    label: str | None = None

    def vector(self) -> np.ndarray:
        if isinstance(self.state, str):
            if self.state not in KETS:
                raise DomainError(f"unknown ket {self.state!r}; expected one of {sorted(KETS)}")
            return KETS[self.state].copy()
        vec = np.asarray(self.state, dtype=complex).ravel()
        if abs(np.vdot(vec, vec).real - 1) > 1e-10:
            raise NormalizationError("local state is not normalized")
        return vec


# -- actions ---------------------------------------------------------------


@dataclass
class LocalUnitary:
    holder: str
    registers: Sequence[str]
    matrix: np.ndarray


@dataclass
class AddAncilla:
    holder: str
    dim: int = 2
    label: str | None = None


@dataclass
class Discard:
    register: str


@dataclass
class SendQubit:
    register: str


@dataclass
class SendCbit:
    register: str


@dataclass
class Leak:
    """Hand a register to the Environment without any check (not a clean step)."""

    register: str


Action = LocalUnitary | AddAncilla | Discard | SendQubit | SendCbit | Leak


class ProtocolSession:
    """Joint pure state over labelled registers plus a resource ledger.

    Single-owner and mutable: :meth:`step` updates the session in place and
    returns it so calls can be chained.
    """

    def __init__(self, max_dim: int = MAX_DIM):
        self.registers: list[Register] = []
        self.tensor = np.ones((), dtype=complex)
        self.ledger = Ledger()
        self.max_dim = max_dim
        self._created = 0

    # -- inspection --

    @property
    def joint(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    @property
    def dim(self) -> int:
        return int(self.tensor.size)

    def labels(self) -> list[str]:
        return [r.label for r in self.registers]

    def axis(self, label: str) -> int:
        for i, r in enumerate(self.registers):
            if r.label == label:
                return i
        raise PreconditionError(f"no register named {label!r}")

    def register(self, label: str) -> Register:
        return self.registers[self.axis(label)]

    def held_by(self, holder: str) -> list[Register]:
        return [r for r in self.registers if r.holder == holder]

    def reduced(self, labels: Sequence[str]) -> np.ndarray:
        """Density matrix of the listed registers (in the listed order)."""
        axes = [self.axis(lb) for lb in labels]
        rest = [i for i in range(len(self.registers)) if i not in axes]
        d = int(np.prod([self.registers[i].dim for i in axes], dtype=np.int64))
        m = np.transpose(self.tensor, axes + rest).reshape(d, -1)
        return m @ m.conj().T

    def copy(self) -> "ProtocolSession":
        return copy.deepcopy(self)

    def snapshot(self) -> dict:
        return {
            "registers": [
                {"label": r.label, "holder": r.holder, "dim": r.dim, "message": r.message}
                for r in self.registers
            ],
            "ledger": self.ledger.as_dict(),
        }

    # -- construction helpers --

    def _new_label(self, prefix: str) -> str:
        taken = set(self.labels())
        label = f"{prefix}{self._created}"
        while label in taken:
            label += "'"
        return label

    def _append(self, holder, vector_or_tensor, dims, labels, initial=False):
        new_dim = self.dim * int(np.prod(dims))
        if new_dim > self.max_dim:
            raise SizeError(f"joint dimension {new_dim} exceeds cap {self.max_dim}")
        taken = set(self.labels())
        for lb in labels:
            if lb in taken:
                raise PreconditionError(f"register label {lb!r} already in use")
        block = np.asarray(vector_or_tensor, dtype=complex).reshape(dims)
        self.tensor = np.multiply.outer(self.tensor, block)
        for h, d, lb in zip(holder, dims, labels):
            self.registers.append(Register(lb, h, int(d), self._created, initial=initial))
            self._created += 1

    # -- the five rules --

    def step(self, action: Action) -> "ProtocolSession":
        handler = {
            LocalUnitary: self._local_unitary,
            AddAncilla: self._add_ancilla,
            Discard: self._discard,
            SendQubit: self._send_qubit,
            SendCbit: self._send_cbit,
            Leak: self._leak,
        }.get(type(action))
        if handler is None:
            raise PreconditionError(f"unknown action {action!r}")
        handler(action)
        return self

    def _local_unitary(self, act: LocalUnitary):
        if act.holder not in PARTIES:
            raise PreconditionError("only Alice or Bob can apply local unitaries")
        regs = [self.register(lb) for lb in act.registers]
        if len({r.label for r in regs}) != len(regs):
            raise PreconditionError("a register is listed twice")
        for r in regs:
            if r.holder != act.holder:
                raise PreconditionError(f"{act.holder} does not hold register {r.label!r} (held by {r.holder})")
        d = int(np.prod([r.dim for r in regs]))
        u = np.asarray(act.matrix, dtype=complex)
        if u.shape != (d, d):
            raise ShapeError(f"unitary is {u.shape}, registers need {(d, d)}")
        if not np.allclose(u.conj().T @ u, np.eye(d), atol=UNITARY_TOL):
            raise ValidityError("matrix is not unitary")
        axes = [self.axis(lb) for lb in act.registers]
        moved = np.moveaxis(self.tensor, axes, range(len(axes)))
        shape = moved.shape
        out = (u @ moved.reshape(d, -1)).reshape(shape)
        self.tensor = np.moveaxis(out, range(len(axes)), axes)

    def _add_ancilla(self, act: AddAncilla):
        if act.holder not in PARTIES:
            raise PreconditionError("ancillas are added by Alice or Bob")
        label = act.label or self._new_label(act.holder[0].lower())
        ket = np.zeros(act.dim, dtype=complex)
        ket[0] = 1
        self._append([act.holder], ket, [act.dim], [label])

    def _discard(self, act: Discard):
        reg = self.register(act.register)
        if reg.message:
            # classical messages already have a copy in the Environment
            reg.holder = ENV
            return
        rho = self.reduced([reg.label])
        zero = np.zeros_like(rho)
        zero[0, 0] = 1
        dist = 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - zero))))
        if dist > CLEAN_TOL:
            raise CleanViolationError(reg.label, dist)
        ax = self.axis(reg.label)
        rest = np.take(self.tensor, 0, axis=ax)
        self.tensor = rest / np.linalg.norm(rest)
        del self.registers[ax]

    def _send_qubit(self, act: SendQubit):
        reg = self.register(act.register)
        if reg.holder not in PARTIES:
            raise PreconditionError("only Alice or Bob can send")
        reg.holder = _other(reg.holder)
        self.ledger.qubits += _qubit_count(reg.dim)

    def _send_cbit(self, act: SendCbit):
        reg = self.register(act.register)
        if reg.holder not in PARTIES:
            raise PreconditionError("only Alice or Bob can send")
        if self.dim * reg.dim > self.max_dim:
            raise SizeError(f"joint dimension {self.dim * reg.dim} exceeds cap {self.max_dim}")
        ax = self.axis(reg.label)
        # |x> -> |x>|x>_E
        moved = np.moveaxis(self.tensor, ax, -1)
        copied = moved[..., :, None] * np.eye(reg.dim)
        self.tensor = np.moveaxis(copied, -2, ax)
        env_label = self._new_label("e")
        self.registers.append(Register(env_label, ENV, reg.dim, self._created))
        self._created += 1
        reg.holder = _other(reg.holder)
        reg.message = True
        self.ledger.cbits += _qubit_count(reg.dim)

    def _leak(self, act: Leak):
        reg = self.register(act.register)
        reg.holder = ENV
        self.ledger.leaks += 1


def new_session(initial: Sequence[Shared | Local] = (), max_dim: int = MAX_DIM) -> ProtocolSession:
    """Session holding the tensor product of the requested initial states."""
    sess = ProtocolSession(max_dim=max_dim)
    n_shared = 0
    for item in initial:
        if isinstance(item, Shared):
            amps = item.amplitudes()
            dA, dB = amps.shape
            labels = item.labels or (f"A{n_shared}", f"B{n_shared}")
            sess._append([ALICE, BOB], amps, [dA, dB], list(labels), initial=True)
            n_shared += 1
        elif isinstance(item, Local):
            if item.holder not in PARTIES:
                raise PreconditionError("local states belong to Alice or Bob")
            vec = item.vector()
            label = item.label or sess._new_label(item.holder[0].lower())
            sess._append([item.holder], vec, [len(vec)], [label], initial=True)
        else:
            raise PreconditionError(f"unknown initial item {item!r}")
    return sess


def step(session: ProtocolSession, action: Action) -> ProtocolSession:
    return session.step(action)


def run_program(session: ProtocolSession, actions: Sequence[Action]) -> ProtocolSession:
    for act in actions:
        session.step(act)
    return session


# -- JSON programs ---------------------------------------------------------


def _matrix_from_json(spec: dict) -> np.ndarray:
    if "gate" in spec:
        name = spec["gate"].upper()
        if name not in GATES:
            raise DomainError(f"unknown gate {name!r}; expected one of {sorted(GATES)}")
        return GATES[name]
    re = np.asarray(spec["matrix_re"], dtype=float)
    im = np.asarray(spec.get("matrix_im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def action_from_json(spec: dict) -> Action:
    op = spec.get("op")
    if op == "local_unitary":
        return LocalUnitary(spec["holder"], list(spec["registers"]), _matrix_from_json(spec))
    if op == "add_ancilla":
        return AddAncilla(spec["holder"], int(spec.get("dim", 2)), spec.get("label"))
    if op == "discard":
        return Discard(spec["register"])
    if op == "send_qubit":
        return SendQubit(spec["register"])
    if op == "send_cbit":
        return SendCbit(spec["register"])
    if op == "leak":
        return Leak(spec["register"])
    raise DomainError(f"unknown protocol op {op!r}")


def initial_from_json(spec: dict) -> Shared | Local:
    if "shared" in spec:
        state = spec["shared"]
        if isinstance(state, dict):
            state = BipartiteState.from_dict(state)
        labels = tuple(spec["labels"]) if "labels" in spec else None
        return Shared(state, labels)
    if "local" in spec:
        return Local(spec["local"], spec.get("state", "0"), spec.get("label"))
    raise DomainError(f"initial entry needs 'shared' or 'local': {spec!r}")


def program_from_json(data: dict | list) -> tuple[list, list[Action]]:
    """Parse ``{"initial": [...], "steps": [...]}`` (or a bare step list)."""
    if isinstance(data, list):
        return [], [action_from_json(s) for s in data]
    initial = [initial_from_json(s) for s in data.get("initial", [])]
    return initial, [action_from_json(s) for s in data.get("steps", [])]


# -- canned protocols ------------------------------------------------------


def find_phi_pair(session: ProtocolSession) -> tuple[str, str] | None:
    """First (Alice, Bob) qubit pair, in creation order, holding |Phi> exactly."""
    alice = [r for r in session.held_by(ALICE) if r.dim == 2 and not r.message]
    bob = [r for r in session.held_by(BOB) if r.dim == 2 and not r.message]
    for a in alice:
        for b in bob:
            rho = session.reduced([a.label, b.label])
            if np.vdot(PHI, rho @ PHI).real >= 1 - CLEAN_TOL:
                return a.label, b.label
    return None


def destroy_ebit_via_cbit(session: ProtocolSession) -> ProtocolSession:
    """Use one cbit to cleanly remove a shared |Phi>.

    Alice sends her half through the classical channel; Bob applies CNOT
    (message as control) to his half, which ends in |0> and is discarded.
    """
    pair = find_phi_pair(session)
    if pair is None:
        raise PreconditionError("session holds no shared |Phi> pair")
    a, b = pair
    session.step(SendCbit(a))
    session.step(LocalUnitary(BOB, [a, b], GATES["CNOT"]))
    session.step(Discard(b))
    session.ledger.ebits_consumed += 1
    return session


def noop_random_bit(session: ProtocolSession) -> ProtocolSession:
    """Alice sends a uniformly random bit (a |+> through the classical channel)."""
    label = session._new_label("r")
    session.step(AddAncilla(ALICE, 2, label))
    session.step(LocalUnitary(ALICE, [label], GATES["H"]))
    session.step(SendCbit(label))
    return session


def dump_ebit_to_environment(session: ProtocolSession) -> ProtocolSession:
    """Unclean: both halves of a |Phi> pair are handed to the Environment."""
    pair = find_phi_pair(session)
    if pair is None:
        raise PreconditionError("session holds no shared |Phi> pair")
    for label in pair:
        session.step(Leak(label))
    return session


def coherent_teleport(session: ProtocolSession, source: str) -> ProtocolSession:
    """Teleport Alice's qubit ``source`` to Bob using one |Phi> and two cbits.

    Alice's Bell measurement is replaced by a basis change followed by two
    classical sends; Bob's corrections are controlled on the received
    messages, so nothing but channel copies reaches the Environment.
    The payload ends in Bob's half of the consumed pair.
    """
    pair = find_phi_pair(session)
    if pair is None:
        raise PreconditionError("teleportation needs a shared |Phi> pair")
    a, b = pair
    session.step(LocalUnitary(ALICE, [source, a], GATES["CNOT"]))
    session.step(LocalUnitary(ALICE, [source], GATES["H"]))
    session.step(SendCbit(a))
    session.step(SendCbit(source))
    session.step(LocalUnitary(BOB, [a, b], GATES["CNOT"]))
    session.step(LocalUnitary(BOB, [source, b], GATES["CZ"]))
    session.ledger.ebits_consumed += 1
    return session


def prepare_and_send(session: ProtocolSession, amplitudes, labels=None) -> ProtocolSession:
    """Alice prepares a bipartite state on two fresh ancillas and sends one half as qubits."""
    amps = BipartiteState(amplitudes).amplitudes
    dA, dB = amps.shape
    keep = labels[0] if labels else session._new_label("k")
    session.step(AddAncilla(ALICE, dA, keep))
    send = labels[1] if labels else session._new_label("s")
    session.step(AddAncilla(ALICE, dB, send))
    # any unitary taking |0,0> to the target vector
    d = dA * dB
    basis = np.eye(d, dtype=complex)
    basis[:, 0] = amps.reshape(-1)
    q, r = np.linalg.qr(basis)
    q[:, 0] *= np.vdot(q[:, 0], amps.reshape(-1)) / abs(np.vdot(q[:, 0], amps.reshape(-1)))
    session.step(LocalUnitary(ALICE, [keep, send], q))
    session.step(SendQubit(send))
    return session


# -- payload view ----------------------------------------------------------


def payload_registers(session: ProtocolSession) -> list[Register]:
    """Alice/Bob registers that are not delivered classical messages."""
    return [r for r in session.registers if r.holder in PARTIES and not r.message]


def payload_state(session: ProtocolSession) -> tuple[SchmidtSpectrum, float]:
    """Schmidt spectrum (Alice | Bob) of the dominant payload component and its fidelity.

    The fidelity is sqrt of the largest eigenvalue of the payload density
    matrix, i.e. the best overlap with a pure payload state.
    """
    regs = payload_registers(session)
    if not regs:
        return SchmidtSpectrum.from_classes([(1.0, 1)]), 1.0
    alice = [r.label for r in regs if r.holder == ALICE]
    bob = [r.label for r in regs if r.holder == BOB]
    rho = session.reduced(alice + bob)
    w, v = np.linalg.eigh(rho)
    top = v[:, -1]
    dA = int(np.prod([session.register(lb).dim for lb in alice]))
    spec = schmidt_spectrum_of(top.reshape(dA, -1) / np.linalg.norm(top))
    return spec, math.sqrt(max(0.0, min(1.0, float(w[-1]))))


# -- superposition ---------------------------------------------------------


@dataclass
class BranchProgram:
    """One branch of a superposed run.

    ``target`` is the intended payload output P_k|psi> on the initial
    registers (in creation order); None means the payload is left unchanged.
    """

    name: str
    run: Callable[[ProtocolSession], ProtocolSession]
    target: np.ndarray | None = None


class SuperposedResult(NamedTuple):
    joint: np.ndarray
    fidelity: float
    residual_distance: float
    layout: dict
    sessions: list


def _canonical_slots(initial: ProtocolSession, finals: list[ProtocolSession]):
    payload = [(r.label, r.dim) for r in sorted(initial.registers, key=lambda r: r.order)]
    payload_labels = {lb for lb, _ in payload}
    per_branch = []
    for sess in finals:
        groups = {h: [] for h in HOLDERS}
        for r in sorted(sess.registers, key=lambda r: r.order):
            if r.label in payload_labels and r.holder in PARTIES and not r.message:
                continue
            groups[r.holder].append(r)
        per_branch.append(groups)
    residual = []
    for h in HOLDERS:
        width = max(len(g[h]) for g in per_branch)
        for pos in range(width):
            dims = {g[h][pos].dim for g in per_branch if pos < len(g[h])}
            if len(dims) != 1:
                raise ShapeError(f"branches disagree on the dimension of {h} residual #{pos}: {sorted(dims)}")
            residual.append((h, pos, dims.pop()))
    return payload, residual, per_branch


def _branch_vector(sess, payload, residual, groups) -> np.ndarray:
    slots = []
    for label, dim in payload:
        reg = next((r for r in sess.registers if r.label == label), None)
        present = reg is not None and reg.holder in PARTIES and not reg.message
        slots.append((sess.axis(label) if present else None, dim))
    for h, pos, dim in residual:
        regs = groups[h]
        slots.append((sess.axis(regs[pos].label) if pos < len(regs) else None, dim))
    used = [ax for ax, _ in slots if ax is not None]
    if sorted(used) != list(range(len(sess.registers))):
        raise ShapeError("branch left registers outside the canonical layout")
    present = np.transpose(sess.tensor, used)
    full = np.zeros([d for _, d in slots], dtype=complex)
    full[tuple(slice(None) if ax is not None else 0 for ax, _ in slots)] = present
    return full.reshape(-1)


def run_superposed(
    branches: Sequence[BranchProgram],
    amplitudes: Sequence[complex],
    initial: ProtocolSession | Sequence[Shared | Local],
) -> SuperposedResult:
    """Run branch programs coherently, controlled on shared |k>_A|k>_B.

    Each program acts only on its own branch, so the controlled execution is
    the superposition of independent runs.  Residual registers (messages,
    environment copies, leftover ancillas) are paired across branches by
    (holder, creation order); a branch missing a residual register holds |0>
    there.  The fidelity is the overlap of the achieved state, traced over
    residuals, with sum_k c_k |k>|k> P_k|psi>.
    """
    if not isinstance(initial, ProtocolSession):
        initial = new_session(initial)
    amps = np.asarray(amplitudes, dtype=complex)
    if len(amps) != len(branches) or len(amps) == 0:
        raise ShapeError("need one amplitude per branch")
    if abs(np.vdot(amps, amps).real - 1) > 1e-10:
        raise NormalizationError("branch amplitudes are not normalized")

    finals = [b.run(initial.copy()) for b in branches]
    payload, residual, groups = _canonical_slots(initial, finals)
    d_pay = int(np.prod([d for _, d in payload], dtype=np.int64))
    d_res = int(np.prod([d for *_, d in residual], dtype=np.int64))
    psi = [_branch_vector(s, payload, residual, g).reshape(d_pay, d_res) for s, g in zip(finals, groups)]

    m = len(branches)
    joint = np.zeros((m, m, d_pay, d_res), dtype=complex)
    overlap = np.zeros(d_res, dtype=complex)
    for k, (br, c) in enumerate(zip(branches, amps)):
        joint[k, k] = c * psi[k]
        target = initial.joint if br.target is None else np.asarray(br.target, dtype=complex).reshape(-1)
        if target.shape != (d_pay,):
            raise ShapeError(f"branch {br.name!r} target has size {target.size}, payload needs {d_pay}")
        overlap += abs(c) ** 2 * (target.conj() @ psi[k])
    fidelity = float(min(1.0, np.linalg.norm(overlap)))

    res_states = [p.T @ p.conj() for p in psi]
    dist = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            ev = np.linalg.eigvalsh(res_states[i] - res_states[j])
            dist = max(dist, 0.5 * float(np.sum(np.abs(ev))))
    layout = {
        "branch_registers": [f"k_A (dim {m})", f"k_B (dim {m})"],
        "payload": [lb for lb, _ in payload],
        "residual": [f"{h}#{pos}" for h, pos, _ in residual],
    }
    return SuperposedResult(joint.reshape(-1), fidelity, dist, layout, finals)


def _zero_payload(initial: ProtocolSession) -> np.ndarray:
    vec = np.zeros(initial.dim, dtype=complex)
    vec[0] = 1
    return vec


def clean_demo() -> SuperposedResult:
    """Superpose destroying a |Phi> with one cbit against sending a random bit."""
    initial = new_session([Shared("ebits:1")])
    branches = [
        BranchProgram("destroy_ebit_via_cbit", destroy_ebit_via_cbit, _zero_payload(initial)),
        BranchProgram("noop_random_bit", noop_random_bit),
    ]
    return run_superposed(branches, [_S2, _S2], initial)


def dirty_demo() -> SuperposedResult:
    """Superpose throwing a |Phi> into the environment against doing nothing."""
    initial = new_session([Shared("ebits:1")])
    branches = [
        BranchProgram("dump_ebit_to_environment", dump_ebit_to_environment, _zero_payload(initial)),
        BranchProgram("idle", lambda s: s),
    ]
    return run_superposed(branches, [_S2, _S2], initial)


# -- concentration ---------------------------------------------------------


def concentration_sample(p: float, n: int, trials: int, rng_seed, floor: bool = False):
    """Monte Carlo of type-class measurement on n copies of partial(p).

    The measured Hamming weight k is binomial(n, p); the post-measurement
    state is maximally entangled of rank C(n, k), so the yield is
    log2 C(n, k) ebits (floored when ``floor`` is set).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if n < 1 or trials < 1:
        raise DomainError("n and trials must be positive")
    rng = np.random.default_rng(rng_seed)
    k = rng.binomial(n, p, size=trials)
    yields = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / math.log(2)
    yields = np.maximum(yields, 0.0)
    if floor:
        yields = np.floor(yields + 1e-9)
    return float(np.mean(yields)), yields
