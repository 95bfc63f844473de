"""Classical-function oracles and their quantum access modes.

A sub-oracle is a dense truth table on in_bits inputs whose outputs may be
absent.  Responses travel in a register of width out_bits+1: the top bit
flags an absent value, so enc(v) = v and enc(absent) = 1 << out_bits.
Quantum access XORs the encoded response into the response registers, which
makes every oracle application an involution on basis states.

Multi-register operands: when a slot names several registers for its query or
response, the first-listed register holds the most significant bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hybridsim.statevec import QuantumState, Register

MAX_IN_BITS = 24


class AbsentValue:
    """Singleton marker for inputs an oracle does not answer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOT"


BOT = AbsentValue()


@dataclass
class FunctionTable:
    """Dense table for f: {0,1}^in_bits -> {0,1}^out_bits, entries may be absent.

    entries is an int64 array of length 2**in_bits with -1 encoding absent.
    """

    in_bits: int
    out_bits: int
    entries: np.ndarray

    def __post_init__(self):
        if not 0 < self.in_bits <= MAX_IN_BITS:
            raise ValueError(f"in_bits must be in 1..{MAX_IN_BITS}, got {self.in_bits}")
        if self.out_bits <= 0:
            raise ValueError(f"out_bits must be positive, got {self.out_bits}")
        self.entries = np.asarray(self.entries, dtype=np.int64)
        if self.entries.shape != (1 << self.in_bits,):
            raise ValueError(
                f"entries has shape {self.entries.shape}, expected ({1 << self.in_bits},)"
            )
        valid = (self.entries >= -1) & (self.entries < (1 << self.out_bits))
        if not valid.all():
            raise ValueError("table entries outside the output range")

    @property
    def response_bits(self) -> int:
        return self.out_bits + 1

    @property
    def bot_code(self) -> int:
        return 1 << self.out_bits

    def lookup(self, x: int):
        """Value at x, or BOT when absent."""
        if not 0 <= x < (1 << self.in_bits):
            raise ValueError(f"input {x} outside 0..{(1 << self.in_bits) - 1}")
        v = int(self.entries[x])
        return BOT if v < 0 else v

    def encoded(self) -> np.ndarray:
        """Encoded response per input: value, or flag<<out_bits for absent."""
        return np.where(self.entries < 0, self.bot_code, self.entries).astype(np.int64)

    def domain(self) -> np.ndarray:
        """Sorted inputs with a present value."""
        return np.flatnonzero(self.entries >= 0).astype(np.int64)

    @staticmethod
    def from_mapping(in_bits: int, out_bits: int, pairs) -> "FunctionTable":
        entries = np.full(1 << in_bits, -1, dtype=np.int64)
        for x, v in pairs:
            entries[x] = v
        return FunctionTable(in_bits, out_bits, entries)

    @staticmethod
    def total(in_bits: int, out_bits: int, values) -> "FunctionTable":
        entries = np.asarray(values, dtype=np.int64)
        if (entries < 0).any():
            raise ValueError("total table cannot contain absent entries")
        return FunctionTable(in_bits, out_bits, entries)


def identity_table(bits: int) -> FunctionTable:
    return FunctionTable.total(bits, bits, np.arange(1 << bits))


@dataclass
class OracleBundle:
    """An ordered collection of sub-oracles addressed by index."""

    subs: list[FunctionTable]
    label: str = ""

    def sub(self, i: int) -> FunctionTable:
        if not 0 <= i < len(self.subs):
            raise ValueError(f"sub-oracle index {i} outside 0..{len(self.subs) - 1}")
        return self.subs[i]


@dataclass(frozen=True)
class ShadowMask:
    """Per-sub-oracle input sets to blank out. Aligned with bundle.subs."""

    sets: tuple[frozenset, ...]

    @staticmethod
    def empty(num_subs: int) -> "ShadowMask":
        return ShadowMask(tuple(frozenset() for _ in range(num_subs)))

    def is_empty(self) -> bool:
        return all(not s for s in self.sets)


def make_shadow(bundle: OracleBundle, mask: ShadowMask) -> OracleBundle:
    """Blank the masked inputs of every sub-oracle.

    Masking is idempotent and leaves unmasked inputs untouched.
    """
    if len(mask.sets) != len(bundle.subs):
        raise ValueError(
            f"mask covers {len(mask.sets)} subs, bundle has {len(bundle.subs)}"
        )
    shadowed = []
    for table, masked in zip(bundle.subs, mask.sets):
        entries = table.entries.copy()
        for x in masked:
            if not 0 <= x < entries.size:
                raise ValueError(f"masked input {x} outside the sub-oracle domain")
            entries[x] = -1
        shadowed.append(FunctionTable(table.in_bits, table.out_bits, entries))
    return OracleBundle(shadowed, label=f"{bundle.label}~shadow")


# -- query accounting ---------------------------------------------------------


@dataclass
class QueryLedger:
    """Counts quantum parallel slots and records classical queries."""

    quantum_applications: list[tuple[str, int]] = field(default_factory=list)
    classical_queries: list[tuple[str, int, int, object]] = field(default_factory=list)

    @property
    def qbar(self) -> int:
        return sum(slots for _, slots in self.quantum_applications)

    @property
    def classical_count(self) -> int:
        return len(self.classical_queries)

    def record_quantum(self, kind: str, slots: int):
        self.quantum_applications.append((kind, slots))

    def record_classical(self, label: str, sub: int, x: int, result):
        self.classical_queries.append((label, sub, x, result))


def classical_query(bundle: OracleBundle, sub: int, x: int, ledger: QueryLedger | None = None):
    """Query one sub-oracle classically. Returns the value or BOT."""
    result = bundle.sub(sub).lookup(x)
    if ledger is not None:
        ledger.record_classical(bundle.label, sub, x, result)
    return result


# -- quantum application ------------------------------------------------------


@dataclass(frozen=True)
class Slot:
    """One parallel query: sub-oracle index plus query/response registers.

    query and response are register-name tuples; the first name carries the
    most significant bits of the packed operand.
    """

    sub: int
    query: tuple[str, ...]
    response: tuple[str, ...]

    @staticmethod
    def of(sub: int, query, response) -> "Slot":
        q = (query,) if isinstance(query, str) else tuple(query)
        r = (response,) if isinstance(response, str) else tuple(response)
        return Slot(sub, q, r)


def _resolve(regs: dict[str, Register], names: tuple[str, ...]) -> list[Register]:
    out = []
    for name in names:
        if name not in regs:
            raise ValueError(f"unknown register {name!r}")
        out.append(regs[name])
    return out


def _operand_width(pieces: list[Register]) -> int:
    return sum(r.width for r in pieces)


def _read_operand(pieces: list[Register], idx: np.ndarray) -> np.ndarray:
    value = np.zeros_like(idx)
    for reg in pieces:
        value = (value << reg.width) | ((idx >> reg.offset) & reg.mask)
    return value


def _xor_operand(idx: np.ndarray, pieces: list[Register], values: np.ndarray) -> np.ndarray:
    out = idx.copy()
    shift = 0
    for reg in reversed(pieces):
        out ^= ((values >> shift) & reg.mask) << reg.offset
        shift += reg.width
    return out


def _check_disjoint(slots_regs: list[list[Register]]):
    used: set[int] = set()
    for pieces in slots_regs:
        for reg in pieces:
            qubits = set(reg.qubits())
            if used & qubits:
                raise ValueError("oracle slots touch overlapping registers")
            used |= qubits


def _validated_slot_regs(bundle, state, slots):
    all_regs = []
    per_slot = []
    for slot in slots:
        table = bundle.sub(slot.sub)
        q = _resolve(state.registers, slot.query)
        r = _resolve(state.registers, slot.response)
        if _operand_width(q) != table.in_bits:
            raise ValueError(
                f"slot query width {_operand_width(q)} != in_bits {table.in_bits}"
            )
        if _operand_width(r) != table.response_bits:
            raise ValueError(
                f"slot response width {_operand_width(r)} != out_bits+1 {table.response_bits}"
            )
        per_slot.append((table, q, r))
        all_regs.append(q + r)
    _check_disjoint(all_regs)
    return per_slot


def quantum_apply(
    bundle: OracleBundle,
    state: QuantumState,
    slots: list[Slot],
    ledger: QueryLedger | None = None,
) -> QuantumState:
    """Apply one parallel oracle call: for each slot, XOR enc(f(x)) into the
    response registers, controlled on the query registers.

    All slot registers must be pairwise disjoint.  Counts len(slots) parallel
    queries on the ledger.
    """
    per_slot = _validated_slot_regs(bundle, state, slots)
    idx = np.arange(state.amps.size, dtype=np.int64)
    target = idx
    for table, q, r in per_slot:
        x = _read_operand(q, idx)
        target = _xor_operand(target, r, table.encoded()[x])
    amps = np.zeros_like(state.amps)
    amps[target] = state.amps
    if ledger is not None:
        ledger.record_quantum("quantum_apply", len(slots))
    return QuantumState(state.num_qubits, amps, state.registers)


def _mask_lookup(table: FunctionTable, masked: frozenset) -> np.ndarray:
    hit = np.zeros(1 << table.in_bits, dtype=bool)
    if masked:
        hit[np.fromiter(masked, dtype=np.int64)] = True
    return hit


def flagged_apply(
    bundle: OracleBundle,
    mask: ShadowMask,
    state: QuantumState,
    slots: list[Slot],
    flag_register: str,
    ledger: QueryLedger | None = None,
) -> QuantumState:
    """Flip the flag qubit on branches whose query tuple meets the mask, then
    apply the true oracle.

    With an empty mask this equals quantum_apply with the flag untouched.
    The flag register must be declared and one qubit wide.
    """
    if len(mask.sets) != len(bundle.subs):
        raise ValueError("mask does not match the bundle")
    if flag_register not in state.registers:
        raise ValueError(f"flag register {flag_register!r} is not declared")
    flag = state.registers[flag_register]
    if flag.width != 1:
        raise ValueError(f"flag register {flag_register!r} must be one qubit")
    per_slot = _validated_slot_regs(bundle, state, slots)
    for _, q, r in per_slot:
        if flag.offset in {qb for reg in q + r for qb in reg.qubits()}:
            raise ValueError("flag register overlaps a slot operand")

    idx = np.arange(state.amps.size, dtype=np.int64)
    hit = np.zeros(state.amps.size, dtype=bool)
    for slot, (table, q, _) in zip(slots, per_slot):
        x = _read_operand(q, idx)
        hit |= _mask_lookup(table, mask.sets[slot.sub])[x]
    target = np.where(hit, idx ^ (1 << flag.offset), idx)
    for table, q, r in per_slot:
        x = _read_operand(q, idx)
        target = _xor_operand(target, r, table.encoded()[x])
    amps = np.zeros_like(state.amps)
    amps[target] = state.amps
    if ledger is not None:
        ledger.record_quantum("flagged_apply", len(slots))
    return QuantumState(state.num_qubits, amps, state.registers)


def flag_probability(state: QuantumState, flag_register: str) -> float:
    flag = state.registers[flag_register]
    idx = np.arange(state.amps.size, dtype=np.int64)
    return float(state.probabilities()[((idx >> flag.offset) & 1) == 1].sum())


# -- stochastic oracles -------------------------------------------------------


@dataclass
class StochasticOracleSpec:
    """An oracle that draws fresh randomness y on every application.

    payload(y) must return a total FunctionTable (in_bits -> out_bits); the
    response XORs raw out_bits with no absent-value flag.  The same y serves
    every branch of a superposition within one application.
    """

    in_bits: int
    out_bits: int
    y_values: np.ndarray
    payload: object  # callable y -> FunctionTable

    def __post_init__(self):
        self.y_values = np.asarray(self.y_values, dtype=np.int64)
        if self.y_values.size == 0:
            raise ValueError("y distribution has empty support")

    def draw_y(self, rng: np.random.Generator) -> int:
        return int(self.y_values[rng.integers(self.y_values.size)])

    def table_for(self, y: int) -> FunctionTable:
        table = self.payload(y)
        if table.in_bits != self.in_bits or table.out_bits != self.out_bits:
            raise ValueError("payload table shape disagrees with the spec")
        if (table.entries < 0).any():
            raise ValueError("stochastic payloads must be total functions")
        return table


def stochastic_apply(
    spec: StochasticOracleSpec,
    state: QuantumState,
    query,
    response,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> tuple[QuantumState, int]:
    """One stochastic application: draw y, XOR g_y(x) into the response.

    Returns (new_state, y). The caller never needs y for correctness; it is
    exposed so experiments can verify freshness properties.
    """
    y = spec.draw_y(rng)
    table = spec.table_for(y)
    q = _resolve(state.registers, (query,) if isinstance(query, str) else tuple(query))
    r = _resolve(state.registers, (response,) if isinstance(response, str) else tuple(response))
    if _operand_width(q) != spec.in_bits:
        raise ValueError(f"query width {_operand_width(q)} != in_bits {spec.in_bits}")
    if _operand_width(r) != spec.out_bits:
        raise ValueError(f"response width {_operand_width(r)} != out_bits {spec.out_bits}")
    _check_disjoint([q + r])
    idx = np.arange(state.amps.size, dtype=np.int64)
    x = _read_operand(q, idx)
    target = _xor_operand(idx, r, table.entries[x])
    amps = np.zeros_like(state.amps)
    amps[target] = state.amps
    if ledger is not None:
        ledger.record_quantum("stochastic_apply", 1)
    return QuantumState(state.num_qubits, amps, state.registers), y


def stochastic_query(
    spec: StochasticOracleSpec,
    x: int,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
) -> tuple[int, int]:
    """Classical overload: draw y, return (g_y(x), y)."""
    y = spec.draw_y(rng)
    value = int(spec.table_for(y).entries[x])
    if ledger is not None:
        ledger.record_classical("stochastic", 0, x, value)
    return value, y
