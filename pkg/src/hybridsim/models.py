"""Hybrid quantum-classical programs: grammar, validation, and execution.

Three program shapes share one executor:

* "qnc": a single quantum round (unitary and oracle stages interleaved, at
  most `depth` oracle stages) ended by a full measurement, then classical
  post-processing.
* "cq": a sequence of such rounds, each on a fresh all-zero state with the
  per-round oracle depth capped at `depth`, with classical processing and
  classical oracle queries between rounds.
* "qc": at most `depth` rounds sharing one persistent state.  Each round is
  one unitary stage, then one oracle stage, then a projective measurement of
  a register subset.  A round may not skip its oracle stage and may not
  apply gates after it; classical processing runs between rounds.

The executor keeps the state as a set of entanglement clusters, each holding
a sparse amplitude map over its own qubits.  Bits outside every cluster live
in a classical word.  Clusters merge when an operation spans them and shrink
back when bits become constant or get measured, so disjoint program tracks
never cost more than their own support.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hybridsim.oracles import (
    BOT,
    OracleBundle,
    QueryLedger,
    ShadowMask,
    Slot,
    StochasticOracleSpec,
    classical_query,
)
from hybridsim.statevec import make_register_map
from hybridsim.stats import wilson_interval

MAX_TOTAL_BITS = 4096
MAX_CLUSTER_BITS = 62
MAX_SUPPORT = 1 << 22
AMP_PRUNE = 1e-12

MODELS = ("qnc", "cq", "qc")

COHERENT_CLASSICAL_CALL = "COHERENT_CLASSICAL_CALL"
TRAILING_UNITARY = "TRAILING_UNITARY"
PARTIAL_MEASURE = "PARTIAL_MEASURE"
DEPTH_EXCEEDED = "DEPTH_EXCEEDED"
REGISTER_OVERLAP = "REGISTER_OVERLAP"
MISSING_FLAG = "MISSING_FLAG"
MALFORMED = "MALFORMED"


# -- gate and stage vocabulary -------------------------------------------------


@dataclass(frozen=True)
class H:
    """Hadamard on a whole register (str) or a single (register, bit)."""

    target: object


@dataclass(frozen=True)
class X:
    target: object


@dataclass(frozen=True)
class CNOT:
    control: tuple[str, int]
    target: tuple[str, int]


@dataclass(frozen=True)
class Load:
    """XOR a value taken from classical memory into a register.

    Resolves `memory[key]` at execution time; on the usual all-zero register
    this writes the value outright.
    """

    register: str
    key: str


@dataclass(frozen=True)
class UnitaryStage:
    gates: tuple = ()


@dataclass(frozen=True)
class OracleStage:
    """One oracle depth unit: parallel queries on disjoint registers."""

    slots: tuple = ()


@dataclass(frozen=True)
class FlaggedOracleStage:
    """Oracle stage against a blanked bundle that also flips a flag qubit on
    every query amplitude lying in the blanked set."""

    slots: tuple = ()
    flag: str = "FLAG"


@dataclass(frozen=True)
class StochasticSlot:
    query: tuple[str, ...]
    response: tuple[str, ...]

    @classmethod
    def of(cls, query, response):
        q = (query,) if isinstance(query, str) else tuple(query)
        r = (response,) if isinstance(response, str) else tuple(response)
        return cls(q, r)


@dataclass(frozen=True)
class StochasticStage:
    """Oracle stage whose responder draws a fresh hidden y per slot."""

    slots: tuple = ()


@dataclass(frozen=True)
class ClassicalStage:
    fn: object = None


@dataclass(frozen=True)
class QuantumRound:
    """A qnc-shaped round: interleaved stages, then a full measurement."""

    stages: tuple = ()
    measure: object = "all"
    post: ClassicalStage | None = None


@dataclass(frozen=True)
class QCRound:
    """Unitary, then mandatory oracle stage, then partial measurement."""

    unitary: UnitaryStage = UnitaryStage()
    oracle: object = None
    measure: tuple[str, ...] = ()
    post: ClassicalStage | None = None


@dataclass(frozen=True)
class HybridProgram:
    model: str
    depth: int
    layout: dict
    rounds: tuple
    finalize: object = None


@dataclass(frozen=True)
class OracleEnv:
    bundle: OracleBundle | None = None
    stochastic: StochasticOracleSpec | None = None
    mask: ShadowMask | None = None


@dataclass(frozen=True)
class Violation:
    kind: str
    where: str
    detail: str


class ProgramError(Exception):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{v.kind} at {v.where}: {v.detail}" for v in self.violations))


# -- validation ----------------------------------------------------------------

_ORACLE_STAGES = (OracleStage, FlaggedOracleStage, StochasticStage)


def _slot_operands(stage) -> list[tuple[str, ...]]:
    ops = []
    for slot in stage.slots:
        ops.append(tuple(slot.query))
        ops.append(tuple(slot.response))
    return ops


def _check_layout(program, out):
    total = 0
    for name, width in program.layout.items():
        if not isinstance(width, int) or width < 1:
            out.append(Violation(MALFORMED, "layout", f"register {name!r} has width {width!r}"))
            return
        total += width
    if total > MAX_TOTAL_BITS:
        out.append(Violation(MALFORMED, "layout", f"{total} bits exceeds {MAX_TOTAL_BITS}"))


def _check_gates(stage, layout, where, out):
    for g in stage.gates:
        if isinstance(g, (H, X)):
            name = g.target if isinstance(g.target, str) else g.target[0]
            if name not in layout:
                out.append(Violation(MALFORMED, where, f"gate targets unknown register {name!r}"))
        elif isinstance(g, CNOT):
            for name, bit in (g.control, g.target):
                if name not in layout or not 0 <= bit < layout[name]:
                    out.append(Violation(MALFORMED, where, f"CNOT leg {name!r}[{bit}] out of range"))
            if g.control == g.target:
                out.append(Violation(MALFORMED, where, "CNOT control equals target"))
        elif isinstance(g, Load):
            if g.register not in layout:
                out.append(Violation(MALFORMED, where, f"load into unknown register {g.register!r}"))
        else:
            out.append(Violation(MALFORMED, where, f"unknown gate {type(g).__name__}"))


def _check_oracle_stage(stage, layout, env, where, out):
    operands = _slot_operands(stage)
    if isinstance(stage, FlaggedOracleStage):
        if stage.flag not in layout or layout[stage.flag] != 1:
            out.append(Violation(MISSING_FLAG, where, f"flag register {stage.flag!r} absent or not 1 bit"))
            return
        if env is not None and env.mask is None:
            out.append(Violation(MISSING_FLAG, where, "flagged stage but no blanking sets supplied"))
        operands.append((stage.flag,))
    for regs in operands:
        for name in regs:
            if name not in layout:
                out.append(Violation(MALFORMED, where, f"slot uses unknown register {name!r}"))
                return
    seen = set()
    for regs in operands:
        for name in regs:
            if name in seen:
                out.append(Violation(REGISTER_OVERLAP, where, f"register {name!r} used twice"))
                return
            seen.add(name)
    if env is None:
        return
    width = lambda regs: sum(layout[n] for n in regs)
    if isinstance(stage, StochasticStage):
        spec = env.stochastic
        if spec is None:
            out.append(Violation(MALFORMED, where, "stochastic stage but no stochastic oracle supplied"))
            return
        for slot in stage.slots:
            if width(slot.query) != spec.in_bits or width(slot.response) != spec.out_bits:
                out.append(Violation(MALFORMED, where, "stochastic slot operand widths do not match the responder"))
    else:
        bundle = env.bundle
        if bundle is None:
            out.append(Violation(MALFORMED, where, "oracle stage but no bundle supplied"))
            return
        for slot in stage.slots:
            if not 0 <= slot.sub < len(bundle.subs):
                out.append(Violation(MALFORMED, where, f"slot addresses missing sub-oracle {slot.sub}"))
                continue
            table = bundle.sub(slot.sub)
            if width(slot.query) != table.in_bits or width(slot.response) != table.response_bits:
                out.append(Violation(MALFORMED, where, f"slot widths do not match sub-oracle {slot.sub}"))


def _check_quantum_round(rnd, program, env, where, out):
    prev_unitary = False
    oracle_stages = 0
    unitary_stages = 0
    for k, stage in enumerate(rnd.stages):
        swhere = f"{where}.stage[{k}]"
        if isinstance(stage, ClassicalStage):
            out.append(Violation(COHERENT_CLASSICAL_CALL, swhere, "classical processing inside a coherent round"))
            prev_unitary = False
        elif isinstance(stage, UnitaryStage):
            if prev_unitary:
                out.append(Violation(MALFORMED, swhere, "two adjacent unitary stages"))
            unitary_stages += 1
            prev_unitary = True
            _check_gates(stage, program.layout, swhere, out)
        elif isinstance(stage, _ORACLE_STAGES):
            oracle_stages += 1
            prev_unitary = False
            _check_oracle_stage(stage, program.layout, env, swhere, out)
        else:
            out.append(Violation(MALFORMED, swhere, f"unknown stage {type(stage).__name__}"))
            prev_unitary = False
    if oracle_stages > program.depth:
        out.append(Violation(DEPTH_EXCEEDED, where, f"{oracle_stages} oracle stages exceed depth {program.depth}"))
    if unitary_stages > program.depth + 1:
        out.append(Violation(DEPTH_EXCEEDED, where, f"{unitary_stages} unitary stages exceed {program.depth + 1}"))
    if rnd.measure != "all":
        out.append(Violation(PARTIAL_MEASURE, where, "round must end in a full measurement"))


def validate(program: HybridProgram, env: OracleEnv | None = None) -> list[Violation]:
    """Static grammar check; with an env, operand widths are checked too."""
    out: list[Violation] = []
    if program.model not in MODELS:
        out.append(Violation(MALFORMED, "program", f"unknown model {program.model!r}"))
        return out
    _check_layout(program, out)
    if out:
        return out
    if not program.rounds:
        out.append(Violation(MALFORMED, "program", "no rounds"))
        return out
    if program.depth < 0:
        out.append(Violation(MALFORMED, "program", "negative depth"))
        return out
    if program.model in ("qnc", "cq"):
        if program.model == "qnc" and len(program.rounds) != 1:
            out.append(Violation(MALFORMED, "program", "this model is a single round"))
        for r, rnd in enumerate(program.rounds):
            where = f"round[{r}]"
            if not isinstance(rnd, QuantumRound):
                out.append(Violation(MALFORMED, where, f"expected a measured quantum round, got {type(rnd).__name__}"))
                continue
            _check_quantum_round(rnd, program, env, where, out)
    else:
        if len(program.rounds) > program.depth:
            out.append(Violation(DEPTH_EXCEEDED, "program", f"{len(program.rounds)} rounds exceed depth {program.depth}"))
        for r, rnd in enumerate(program.rounds):
            where = f"round[{r}]"
            if not isinstance(rnd, QCRound):
                out.append(Violation(MALFORMED, where, f"expected an oracle round, got {type(rnd).__name__}"))
                continue
            if isinstance(rnd.unitary, ClassicalStage):
                out.append(Violation(COHERENT_CLASSICAL_CALL, where, "classical processing in place of the round unitary"))
            elif not isinstance(rnd.unitary, UnitaryStage):
                out.append(Violation(MALFORMED, where, f"round unitary is {type(rnd.unitary).__name__}"))
            else:
                _check_gates(rnd.unitary, program.layout, where, out)
            if rnd.oracle is None:
                out.append(Violation(TRAILING_UNITARY, where, "round applies a unitary but never queries"))
            elif not isinstance(rnd.oracle, _ORACLE_STAGES):
                out.append(Violation(MALFORMED, where, f"round oracle is {type(rnd.oracle).__name__}"))
            else:
                _check_oracle_stage(rnd.oracle, program.layout, env, where, out)
            if rnd.measure != "all":
                for name in rnd.measure:
                    if name not in program.layout:
                        out.append(Violation(MALFORMED, where, f"measures unknown register {name!r}"))
    return out


# -- sparse cluster executor ----------------------------------------------------

_SQRT_HALF = 2.0 ** -0.5


class _Cluster:
    __slots__ = ("bits", "local", "keys", "amps")

    def __init__(self, bits, keys, amps):
        self.bits = tuple(bits)
        self.local = {b: j for j, b in enumerate(self.bits)}
        self.keys = keys
        self.amps = amps


class Executor:
    """Sparse simulator over the program's register layout.

    Qubits start classical (value 0) and are promoted into clusters on first
    quantum contact; constant bits are demoted back to the classical word.
    """

    def __init__(self, layout):
        self.regs = make_register_map(layout)
        self.total_bits = sum(layout.values())
        self.clusters: list[_Cluster] = []
        self.owner: dict[int, _Cluster] = {}
        self.classical = 0
        self.phase = 1.0 + 0.0j

    def reg_bits(self, name) -> list[int]:
        r = self.regs[name]
        return list(range(r.offset, r.offset + r.width))

    def _bit(self, spec) -> int:
        name, bit = spec
        return self.regs[name].offset + bit

    def register_value(self, name) -> int:
        r = self.regs[name]
        for b in self.reg_bits(name):
            if b in self.owner:
                raise RuntimeError(f"register {name!r} is still coherent")
        return (self.classical >> r.offset) & int(r.mask)

    def _absorb(self, gbits) -> _Cluster:
        touched, seen = [], set()
        for b in gbits:
            cl = self.owner.get(b)
            if cl is not None and id(cl) not in seen:
                touched.append(cl)
                seen.add(id(cl))
        bits = sorted(set(gbits).union(*(cl.bits for cl in touched)) if touched else set(gbits))
        if len(bits) > MAX_CLUSTER_BITS:
            raise RuntimeError(f"entanglement cluster of {len(bits)} bits exceeds {MAX_CLUSTER_BITS}")
        pos = {b: j for j, b in enumerate(bits)}
        keys = np.zeros(1, dtype=np.int64)
        amps = np.ones(1, dtype=np.complex128)
        for cl in touched:
            rk = np.zeros_like(cl.keys)
            for j, b in enumerate(cl.bits):
                rk |= ((cl.keys >> j) & 1) << pos[b]
            keys = (keys[:, None] | rk[None, :]).reshape(-1)
            amps = (amps[:, None] * cl.amps[None, :]).reshape(-1)
            if keys.size > MAX_SUPPORT:
                raise RuntimeError("state support exceeded the simulator budget")
        const = 0
        for b in bits:
            if b not in self.owner and (self.classical >> b) & 1:
                const |= 1 << pos[b]
                self.classical &= ~(1 << b)
        if const:
            keys = keys | np.int64(const)
        merged = _Cluster(bits, keys, amps)
        self.clusters = [cl for cl in self.clusters if id(cl) not in seen]
        self.clusters.append(merged)
        for b in bits:
            self.owner[b] = merged
        return merged

    def _demote(self, cl: _Cluster):
        if cl.keys.size == 0:
            raise RuntimeError("empty support")
        diff = int(np.bitwise_or.reduce(cl.keys ^ cl.keys[0])) if cl.keys.size > 1 else 0
        keep = [j for j in range(len(cl.bits)) if (diff >> j) & 1]
        if len(keep) == len(cl.bits):
            return
        k0 = int(cl.keys[0])
        for j, b in enumerate(cl.bits):
            if (diff >> j) & 1:
                continue
            if (k0 >> j) & 1:
                self.classical |= 1 << b
            else:
                self.classical &= ~(1 << b)
            del self.owner[b]
        if not keep:
            self.phase *= complex(cl.amps[0])
            self.clusters.remove(cl)
            return
        new_keys = np.zeros_like(cl.keys)
        for i, j in enumerate(keep):
            new_keys |= ((cl.keys >> j) & 1) << i
        bits = tuple(cl.bits[j] for j in keep)
        cl.bits = bits
        cl.local = {b: i for i, b in enumerate(bits)}
        cl.keys = new_keys

    def x_bit(self, b):
        cl = self.owner.get(b)
        if cl is None:
            self.classical ^= 1 << b
        else:
            cl.keys = cl.keys ^ np.int64(1 << cl.local[b])

    def h_bit(self, b):
        cl = self._absorb({b})
        j = cl.local[b]
        mask = np.int64(1 << j)
        base = cl.keys & ~mask
        hi = ((cl.keys >> j) & 1).astype(np.intp)
        uniq, inv = np.unique(base, return_inverse=True)
        acc = np.zeros((uniq.size, 2), dtype=np.complex128)
        acc[inv, hi] = cl.amps
        plus = (acc[:, 0] + acc[:, 1]) * _SQRT_HALF
        minus = (acc[:, 0] - acc[:, 1]) * _SQRT_HALF
        keys = np.concatenate([uniq, uniq | mask])
        amps = np.concatenate([plus, minus])
        live = np.abs(amps) > AMP_PRUNE
        cl.keys, cl.amps = keys[live], amps[live]
        self._demote(cl)

    def cnot_bits(self, bc, bt):
        if bc not in self.owner:
            if (self.classical >> bc) & 1:
                self.x_bit(bt)
            return
        cl = self._absorb({bc, bt})
        jc, jt = cl.local[bc], cl.local[bt]
        cl.keys = cl.keys ^ (((cl.keys >> jc) & 1) << jt)
        self._demote(cl)

    def _read_operand(self, cl, names):
        vals = np.zeros(cl.keys.size, dtype=np.int64)
        for name in names:
            r = self.regs[name]
            piece = np.zeros_like(vals)
            for i, b in enumerate(self.reg_bits(name)):
                piece |= ((cl.keys >> cl.local[b]) & 1) << i
            vals = (vals << r.width) | piece
        return vals

    def _xor_operand(self, cl, names, values):
        for name in reversed(names):
            r = self.regs[name]
            for i, b in enumerate(self.reg_bits(name)):
                cl.keys = cl.keys ^ (((values >> i) & 1) << cl.local[b])
            values = values >> r.width
        return values

    def _slot_bits(self, query, response, extra=()):
        bits = set()
        for name in (*query, *response, *extra):
            bits.update(self.reg_bits(name))
        return bits

    def apply_table_slot(self, encoded: np.ndarray, slot: Slot):
        cl = self._absorb(self._slot_bits(slot.query, slot.response))
        x = self._read_operand(cl, slot.query)
        self._xor_operand(cl, slot.response, encoded[x])
        self._demote(cl)

    def apply_flagged_stage(self, per_slot, flag_bit: int):
        """per_slot: (encoded table, hit lookup, slot) triples.  The flag flips
        once wherever any slot's query lands in its blanked set; all slots
        then XOR their unblanked responses.  Shares one cluster, so keep it
        for small states."""
        bits = {flag_bit}
        for _, _, slot in per_slot:
            bits |= self._slot_bits(slot.query, slot.response)
        cl = self._absorb(bits)
        hit = np.zeros(cl.keys.size, dtype=bool)
        for _, lookup, slot in per_slot:
            hit |= lookup[self._read_operand(cl, slot.query)]
        cl.keys = cl.keys ^ (hit.astype(np.int64) << cl.local[flag_bit])
        for encoded, _, slot in per_slot:
            x = self._read_operand(cl, slot.query)
            self._xor_operand(cl, slot.response, encoded[x])
        self._demote(cl)

    def apply_stochastic_slot(self, table_entries: np.ndarray, slot: StochasticSlot):
        cl = self._absorb(self._slot_bits(slot.query, slot.response))
        x = self._read_operand(cl, slot.query)
        self._xor_operand(cl, slot.response, table_entries[x])
        self._demote(cl)

    def measure_bits(self, gbits, rng) -> int:
        by_cluster: dict[int, tuple[_Cluster, int]] = {}
        for b in gbits:
            cl = self.owner.get(b)
            if cl is None:
                continue
            prev = by_cluster.get(id(cl))
            mask = (prev[1] if prev else 0) | (1 << cl.local[b])
            by_cluster[id(cl)] = (cl, mask)
        for cl, mask in by_cluster.values():
            patt = cl.keys & np.int64(mask)
            uniq, inv = np.unique(patt, return_inverse=True)
            w = np.zeros(uniq.size)
            np.add.at(w, inv, np.abs(cl.amps) ** 2)
            cum = np.cumsum(w)
            idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
            idx = min(idx, uniq.size - 1)
            keep = inv == idx
            cl.keys = cl.keys[keep]
            cl.amps = cl.amps[keep] / np.sqrt(w[idx])
            self._demote(cl)
        out = 0
        for b in gbits:
            if b in self.owner:
                raise RuntimeError("measured bit still coherent after collapse")
            out |= ((self.classical >> b) & 1) << b
        return out

    def snapshot(self) -> dict[int, complex]:
        """Joint sparse state as {basis index: amplitude}, for small states."""
        acc = {int(self.classical): self.phase}
        for cl in self.clusters:
            nxt = {}
            for key, amp in zip(cl.keys, cl.amps):
                g = 0
                for j, b in enumerate(cl.bits):
                    g |= ((int(key) >> j) & 1) << b
                for base, a in acc.items():
                    nxt[base | g] = a * amp
            acc = nxt
        return acc


# -- program execution -----------------------------------------------------------


@dataclass
class RoundRecord:
    outcomes: dict = field(default_factory=dict)
    loads: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


@dataclass
class Transcript:
    rounds: list = field(default_factory=list)
    answer: object = None
    finished_early: bool = False


class Context:
    """What classical stages get to see: memory, outcomes, oracle access."""

    def __init__(self, env, rng, ledger, transcript, memory):
        self._env = env
        self.rng = rng
        self._ledger = ledger
        self._transcript = transcript
        self.memory = memory
        self.last: dict = {}
        self.outcomes: list[dict] = []
        self._answer = None
        self._finished = False

    def classical_query(self, sub: int, x: int):
        if self._env.bundle is None:
            raise RuntimeError("no oracle bundle to query")
        return classical_query(self._env.bundle, sub, x, self._ledger)

    def note(self, **kw):
        self._transcript.rounds[-1].notes.append(kw)

    def finish(self, answer):
        self._answer = answer
        self._finished = True


@dataclass
class RunResult:
    answer: object
    transcript: Transcript
    ledger: QueryLedger


def _resolve_load_value(memory, key):
    if key not in memory:
        raise KeyError(f"load references missing memory key {key!r}")
    return int(memory[key])


def _apply_unitary(ex: Executor, stage: UnitaryStage, memory, record: RoundRecord):
    for g in stage.gates:
        if isinstance(g, H):
            bits = ex.reg_bits(g.target) if isinstance(g.target, str) else [ex._bit(g.target)]
            for b in bits:
                ex.h_bit(b)
        elif isinstance(g, X):
            bits = ex.reg_bits(g.target) if isinstance(g.target, str) else [ex._bit(g.target)]
            for b in bits:
                ex.x_bit(b)
        elif isinstance(g, CNOT):
            ex.cnot_bits(ex._bit(g.control), ex._bit(g.target))
        elif isinstance(g, Load):
            value = _resolve_load_value(memory, g.key)
            record.loads[g.key] = value
            for i, b in enumerate(ex.reg_bits(g.register)):
                if (value >> i) & 1:
                    ex.x_bit(b)
        else:
            raise ProgramError([Violation(MALFORMED, "run", f"unknown gate {type(g).__name__}")])


def _mask_lookup(mask_set, in_bits):
    table = np.zeros(1 << in_bits, dtype=bool)
    for x in mask_set:
        table[x] = True
    return table


def _apply_oracle_stage(ex: Executor, stage, env: OracleEnv, rng, ledger: QueryLedger):
    if isinstance(stage, StochasticStage):
        for slot in stage.slots:
            y = env.stochastic.draw_y(rng)
            table = env.stochastic.table_for(y)
            ex.apply_stochastic_slot(table.entries, slot)
            ledger.record_quantum("stochastic_apply", 1)
        return
    if isinstance(stage, FlaggedOracleStage):
        flag_bit = ex.regs[stage.flag].offset
        per_slot = []
        for slot in stage.slots:
            table = env.bundle.sub(slot.sub)
            hit = _mask_lookup(env.mask.sets[slot.sub], table.in_bits)
            per_slot.append((table.encoded(), hit, slot))
        ex.apply_flagged_stage(per_slot, flag_bit)
        ledger.record_quantum("flagged_apply", len(stage.slots))
        return
    for slot in stage.slots:
        table = env.bundle.sub(slot.sub)
        ex.apply_table_slot(table.encoded(), slot)
    ledger.record_quantum("quantum_apply", len(stage.slots))


def _measure_registers(ex: Executor, names, rng) -> dict:
    bits = []
    for name in names:
        bits.extend(ex.reg_bits(name))
    ex.measure_bits(bits, rng)
    return {name: ex.register_value(name) for name in names}


def run(program: HybridProgram, env: OracleEnv, rng: np.random.Generator,
        memory: dict | None = None) -> RunResult:
    """Validate, then execute; raises ProgramError on any grammar violation."""
    violations = validate(program, env)
    if violations:
        raise ProgramError(violations)
    ledger = QueryLedger()
    transcript = Transcript()
    memory = dict(memory or {})
    ctx = Context(env, rng, ledger, transcript, memory)
    all_names = list(program.layout)

    ex = Executor(program.layout) if program.model in ("qnc", "qc") else None
    for rnd in program.rounds:
        record = RoundRecord()
        transcript.rounds.append(record)
        if program.model == "cq":
            ex = Executor(program.layout)
        if isinstance(rnd, QuantumRound):
            for stage in rnd.stages:
                if isinstance(stage, UnitaryStage):
                    _apply_unitary(ex, stage, memory, record)
                else:
                    _apply_oracle_stage(ex, stage, env, rng, ledger)
            record.outcomes = _measure_registers(ex, all_names, rng)
        else:
            _apply_unitary(ex, rnd.unitary, memory, record)
            _apply_oracle_stage(ex, rnd.oracle, env, rng, ledger)
            names = all_names if rnd.measure == "all" else list(rnd.measure)
            record.outcomes = _measure_registers(ex, names, rng)
        ctx.last = dict(record.outcomes)
        ctx.outcomes.append(ctx.last)
        if rnd.post is not None:
            rnd.post.fn(ctx)
            if ctx._finished:
                transcript.finished_early = True
                break
    if ctx._finished:
        answer = ctx._answer
    elif program.finalize is not None:
        answer = program.finalize(ctx)
    else:
        answer = memory.get("answer")
    transcript.answer = answer
    return RunResult(answer, transcript, ledger)


def estimate_success(run_once, trials: int, rng: np.random.Generator, z: float = 3.0):
    """Bernoulli estimate of Pr[run_once(rng) succeeds] with a Wilson interval."""
    wins = 0
    for _ in range(trials):
        wins += bool(run_once(rng))
    lo, hi = wilson_interval(wins, trials, z=z)
    return wins / trials, lo, hi
