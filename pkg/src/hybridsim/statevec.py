"""Dense state-vector simulation with named qubit registers.

Qubit k corresponds to bit k of the basis index, so a register occupying
qubits [offset, offset+width) holds the integer ``(index >> offset) & mask``.
States are numpy complex128 vectors of length 2**num_qubits and all
operations return new states; nothing mutates in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-9


@dataclass(frozen=True)
class Register:
    offset: int
    width: int

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    def extract(self, index: int) -> int:
        return (index >> self.offset) & self.mask

    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.offset, self.offset + self.width))


def make_register_map(layout) -> dict[str, Register]:
    """Build a contiguous register map from (name, width) pairs or a mapping.

    Registers are packed low-to-high in the order given.  Duplicate names and
    non-positive widths are rejected.
    """
    pairs = layout.items() if hasattr(layout, "items") else layout
    regs: dict[str, Register] = {}
    offset = 0
    for name, width in pairs:
        if width <= 0:
            raise ValueError(f"register {name!r} must have positive width, got {width}")
        if name in regs:
            raise ValueError(f"duplicate register name {name!r}")
        regs[name] = Register(offset, width)
        offset += width
    return regs


@dataclass
class QuantumState:
    """A pure state on num_qubits qubits with an optional register map."""

    num_qubits: int
    amps: np.ndarray
    registers: dict[str, Register] = field(default_factory=dict)

    def __post_init__(self):
        dim = 1 << self.num_qubits
        if self.amps.shape != (dim,):
            raise ValueError(f"amplitude vector has shape {self.amps.shape}, expected ({dim},)")
        norm = float(np.vdot(self.amps, self.amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1 by more than {NORM_TOL}")
        seen = []
        for name, reg in self.registers.items():
            if reg.offset < 0 or reg.offset + reg.width > self.num_qubits:
                raise ValueError(f"register {name!r} exceeds the qubit range")
            seen.append((reg.offset, reg.offset + reg.width, name))
        seen.sort()
        for (_, hi, a), (lo, _, b) in zip(seen, seen[1:]):
            if lo < hi:
                raise ValueError(f"registers {a!r} and {b!r} overlap")

    def register_value(self, name: str, index: int) -> int:
        return self.registers[name].extract(index)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def zero_state(num_qubits: int, registers: dict[str, Register] | None = None) -> QuantumState:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return QuantumState(num_qubits, amps, registers or {})


def basis_state(num_qubits: int, index: int, registers=None) -> QuantumState:
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[index] = 1.0
    return QuantumState(num_qubits, amps, registers or {})


# -- gates ------------------------------------------------------------------

H_GATE = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
X_GATE = np.array([[0, 1], [1, 0]], dtype=np.complex128)
I_GATE = np.eye(2, dtype=np.complex128)


def cnot_gate() -> np.ndarray:
    """4x4 CNOT for targets (control, target).

    Gate-local basis index is ``control_bit + 2 * target_bit``: targets[0]
    supplies the least significant local bit.
    """
    m = np.zeros((4, 4), dtype=np.complex128)
    for c in (0, 1):
        for t in (0, 1):
            m[(c + 2 * (t ^ c)), (c + 2 * t)] = 1.0
    return m


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    targets: tuple[int, ...]

    def __post_init__(self):
        k = len(self.targets)
        if self.matrix.shape != (1 << k, 1 << k):
            raise ValueError(
                f"gate on {k} qubits needs a {1 << k}x{1 << k} matrix, got {self.matrix.shape}"
            )
        if len(set(self.targets)) != k:
            raise ValueError(f"repeated target in {self.targets}")


@dataclass
class GateLayer:
    """One circuit layer: gates acting on pairwise disjoint qubits."""

    gates: list[Gate]

    def __post_init__(self):
        used: set[int] = set()
        for g in self.gates:
            overlap = used.intersection(g.targets)
            if overlap:
                raise ValueError(f"layer reuses qubits {sorted(overlap)}")
            used.update(g.targets)

    def touched(self) -> set[int]:
        out: set[int] = set()
        for g in self.gates:
            out.update(g.targets)
        return out


def hadamard_layer(qubits) -> GateLayer:
    return GateLayer([Gate(H_GATE, (q,)) for q in qubits])


def x_layer(qubits) -> GateLayer:
    return GateLayer([Gate(X_GATE, (q,)) for q in qubits])


def _apply_gate(amps: np.ndarray, num_qubits: int, gate: Gate) -> np.ndarray:
    k = len(gate.targets)
    rest = [q for q in range(num_qubits) if q not in gate.targets]
    r_idx = np.arange(1 << len(rest), dtype=np.intp)
    base = np.zeros(1 << len(rest), dtype=np.intp)
    for j, q in enumerate(rest):
        base += ((r_idx >> j) & 1) << q
    v_idx = np.arange(1 << k, dtype=np.intp)
    offs = np.zeros(1 << k, dtype=np.intp)
    for j, q in enumerate(gate.targets):
        offs += ((v_idx >> j) & 1) << q
    gather = offs[:, None] + base[None, :]
    out = amps.copy()
    out[gather] = gate.matrix @ amps[gather]
    return out


def apply_layer(state: QuantumState, layer: GateLayer) -> QuantumState:
    """Apply one layer of disjoint 1- and 2-qubit gates."""
    for g in layer.gates:
        for q in g.targets:
            if not 0 <= q < state.num_qubits:
                raise ValueError(f"gate target {q} outside 0..{state.num_qubits - 1}")
    amps = state.amps
    for g in layer.gates:
        amps = _apply_gate(amps, state.num_qubits, g)
    return QuantumState(state.num_qubits, amps, state.registers)


# -- measurement ------------------------------------------------------------


def _outcome_keys(num_qubits: int, qubits: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << num_qubits, dtype=np.int64)
    keys = np.zeros(1 << num_qubits, dtype=np.int64)
    for j, q in enumerate(qubits):
        keys |= ((idx >> q) & 1) << j
    return keys


def measure(state: QuantumState, qubits, rng: np.random.Generator):
    """Measure a subset of qubits in the computational basis.

    Args:
        state: state to measure (not mutated).
        qubits: qubit indices; bit j of the outcome is qubits[j].
        rng: numpy generator supplying the Born-rule sample.

    Returns:
        (outcome, post_state): the sampled integer outcome and the
        renormalized post-measurement state.
    """
    qubits = tuple(qubits)
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {qubits}")
    keys = _outcome_keys(state.num_qubits, qubits)
    probs = np.zeros(1 << len(qubits), dtype=float)
    np.add.at(probs, keys, state.probabilities())
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {total}")
    outcome = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    outcome = min(outcome, len(probs) - 1)
    return outcome, project(state, qubits, outcome)


def project(state: QuantumState, qubits, outcome: int) -> QuantumState:
    """Deterministically project onto a measurement outcome.

    Raises:
        ValueError: if the requested branch has zero probability.
    """
    qubits = tuple(qubits)
    keys = _outcome_keys(state.num_qubits, qubits)
    sel = keys == outcome
    weight = float(np.sum(np.abs(state.amps[sel]) ** 2))
    if weight <= 1e-12:
        raise ValueError(f"impossible outcome {outcome} on qubits {qubits}")
    amps = np.where(sel, state.amps, 0.0) / np.sqrt(weight)
    return QuantumState(state.num_qubits, amps, state.registers)


# -- ensembles and distances -------------------------------------------------


@dataclass
class Ensemble:
    """A mixed state as an explicit list of (probability, pure state)."""

    members: list[tuple[float, QuantumState]]

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        total = sum(p for p, _ in self.members)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ensemble weights sum to {total}")
        n = self.members[0][1].num_qubits
        for _, st in self.members:
            if st.num_qubits != n:
                raise ValueError("ensemble members disagree on qubit count")

    @property
    def num_qubits(self) -> int:
        return self.members[0][1].num_qubits


DENSITY_MAX_QUBITS = 10


def density_matrix(state: QuantumState | Ensemble) -> np.ndarray:
    if isinstance(state, QuantumState):
        members = [(1.0, state)]
        n = state.num_qubits
    else:
        members = state.members
        n = state.num_qubits
    if n > DENSITY_MAX_QUBITS:
        raise ValueError(f"density matrices capped at {DENSITY_MAX_QUBITS} qubits, got {n}")
    rho = np.zeros((1 << n, 1 << n), dtype=np.complex128)
    for p, st in members:
        rho += p * np.outer(st.amps, st.amps.conj())
    return rho


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def fidelity(a, b) -> float:
    """Fidelity F = tr sqrt(sqrt(rho) rho' sqrt(rho)), in [0, 1].

    Pure-pure inputs take the |<a|b>| fast path; anything involving an
    Ensemble goes through density matrices.
    """
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        if a.num_qubits != b.num_qubits:
            raise ValueError("states live on different qubit counts")
        return float(min(1.0, abs(np.vdot(a.amps, b.amps))))
    ra, rb = density_matrix(a), density_matrix(b)
    if ra.shape != rb.shape:
        raise ValueError("ensembles live on different qubit counts")
    # tr sqrt(sqrt(ra) rb sqrt(ra)) equals the nuclear norm of sqrt(ra) sqrt(rb).
    s = np.linalg.svd(_psd_sqrt(ra) @ _psd_sqrt(rb), compute_uv=False)
    return float(min(1.0, s.sum()))


def bures(a, b) -> float:
    """Bures distance sqrt(2 - 2F)."""
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * fidelity(a, b))))


def trace_distance(a, b) -> float:
    if isinstance(a, QuantumState) and isinstance(b, QuantumState):
        f = fidelity(a, b)
        return float(np.sqrt(max(0.0, 1.0 - f * f)))
    diff = density_matrix(a) - density_matrix(b)
    vals = np.linalg.eigvalsh(diff)
    return float(0.5 * np.sum(np.abs(vals)))


# -- random helpers ----------------------------------------------------------


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_layer(num_qubits: int, rng: np.random.Generator) -> GateLayer:
    """A random layer: qubits shuffled, then paired into 2q gates with a
    leftover 1q gate when the count is odd."""
    order = list(rng.permutation(num_qubits))
    gates = []
    while len(order) >= 2:
        a, b = order.pop(), order.pop()
        gates.append(Gate(random_unitary(4, rng), (int(a), int(b))))
    if order:
        gates.append(Gate(random_unitary(2, rng), (int(order.pop()),)))
    return GateLayer(gates)


def random_state(num_qubits: int, rng: np.random.Generator, registers=None) -> QuantumState:
    z = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    z /= np.linalg.norm(z)
    return QuantumState(num_qubits, z.astype(np.complex128), registers or {})
