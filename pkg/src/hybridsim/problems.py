"""Problem instance generators and their shadow-set algorithms.

Conventions shared by every generator:

* Pair inputs (x, z) on 2n bits pack as (x << n) | z: the first component of
  a pair is the high half.
* n-bit values embed into 2n-bit space as the low half, high half zero, so
  the embedding of x is just x.
* "Ascending" always means ordinary integer order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from hybridsim.oracles import BOT, FunctionTable, OracleBundle, ShadowMask, StochasticOracleSpec

FORMAT_VERSION = 1


# -- elementary samplers ------------------------------------------------------


def sample_one_to_one(n: int, rng: np.random.Generator) -> FunctionTable:
    """Uniform 1-to-1 function on n bits (a permutation table)."""
    return FunctionTable.total(n, n, rng.permutation(1 << n))


def sample_two_to_one(n: int, rng: np.random.Generator) -> FunctionTable:
    """Uniform 2-to-1 function: random perfect pairing of the domain plus a
    random injection of the pairs into the codomain."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    order = rng.permutation(1 << n)
    images = rng.permutation(1 << n)[: 1 << (n - 1)]
    entries = np.empty(1 << n, dtype=np.int64)
    for k in range(1 << (n - 1)):
        entries[order[2 * k]] = images[k]
        entries[order[2 * k + 1]] = images[k]
    return FunctionTable.total(n, n, entries)


def preimage_pairs(table: FunctionTable) -> dict[int, tuple[int, int]]:
    """Map each image of a 2-to-1 table to its ascending preimage pair."""
    buckets: dict[int, list[int]] = {}
    for x, v in enumerate(table.entries):
        buckets.setdefault(int(v), []).append(x)
    out = {}
    for y, xs in buckets.items():
        if len(xs) != 2:
            raise ValueError(f"image {y} has {len(xs)} preimages, expected 2")
        out[y] = (xs[0], xs[1])
    return out


@dataclass
class SimonInstance:
    """A 2-to-1 table with f(x) = f(x ^ s) for a hidden nonzero period s."""

    n: int
    table: FunctionTable
    s: int

    def verify(self):
        if not 0 < self.s < (1 << self.n):
            raise ValueError(f"period {self.s} out of range")
        for x in range(1 << self.n):
            if self.table.lookup(x) != self.table.lookup(x ^ self.s):
                raise ValueError("table does not respect the period")
        if len(set(map(int, self.table.entries))) != 1 << (self.n - 1):
            raise ValueError("table is not 2-to-1")


def sample_simon(n: int, rng: np.random.Generator) -> SimonInstance:
    """Uniform Simon instance: uniform nonzero s, uniform injection of the
    {x, x^s} cosets into the codomain."""
    if n < 2:
        raise ValueError(f"need n >= 2 for a nonzero period, got {n}")
    s = int(rng.integers(1, 1 << n))
    images = rng.permutation(1 << n)[: 1 << (n - 1)]
    entries = np.empty(1 << n, dtype=np.int64)
    k = 0
    for x in range(1 << n):
        if x < x ^ s:
            entries[x] = entries[x ^ s] = images[k]
            k += 1
    return SimonInstance(n, FunctionTable.total(n, n, entries), s)


# -- serial chains ------------------------------------------------------------


@dataclass
class SerialInstance:
    """A chain of c gated Simon stages plus a gated terminal stage.

    Stage 0 answers f_0(x) for every key z; stage i (1 <= i <= c-1) answers
    f_i(x) only when z equals the previous stage's period; the terminal stage
    c wraps the inner problem the same way.  Search instances carry the
    terminal period as `answer`; decision instances carry `label` = 1 when
    the terminal is structured and 0 when it is a random 1-to-1 decoy.
    """

    c: int
    n: int
    tables: list[FunctionTable]
    periods: list[int]
    variant: str
    answer: int | None = None
    label: int | None = None

    def bundle(self) -> OracleBundle:
        return OracleBundle(list(self.tables), label="serial")

    def verify(self):
        if len(self.tables) != self.c + 1:
            raise ValueError(f"expected {self.c + 1} stage tables, got {len(self.tables)}")
        if len(self.periods) != self.c:
            raise ValueError(f"expected {self.c} gate periods, got {len(self.periods)}")
        n = self.n
        for i, table in enumerate(self.tables):
            if table.in_bits != 2 * n or table.out_bits != n:
                raise ValueError(f"stage {i} has shape {table.in_bits}->{table.out_bits}")
            grid = table.entries.reshape(1 << n, 1 << n)
            if i == 0:
                if (grid != grid[:, :1]).any():
                    raise ValueError("stage 0 must ignore the key half")
                if (grid < 0).any():
                    raise ValueError("stage 0 must be total")
            else:
                key = self.periods[i - 1]
                open_col = grid[:, key]
                if (open_col < 0).any():
                    raise ValueError(f"stage {i} is absent on its open key")
                rest = np.delete(grid, key, axis=1)
                if (rest >= 0).any():
                    raise ValueError(f"stage {i} answers outside its open key")


def _gated_table(n: int, inner: FunctionTable, key: int | None) -> FunctionTable:
    grid = np.full((1 << n, 1 << n), -1, dtype=np.int64)
    if key is None:
        grid[:, :] = inner.entries[:, None]
    else:
        grid[:, key] = inner.entries
    return FunctionTable(2 * n, n, grid.reshape(-1))


@dataclass(frozen=True)
class InnerSampler:
    """Sampler pair for the terminal stage of a serial chain: a structured
    (table, answer) source and an unstructured decoy source."""

    sample_search: object
    sample_decoy: object


SIMON_INNER = InnerSampler(
    sample_search=lambda n, rng: (lambda inst: (inst.table, inst.s))(sample_simon(n, rng)),
    sample_decoy=lambda n, rng: sample_one_to_one(n, rng),
)


def sample_serial(
    c: int,
    n: int,
    rng: np.random.Generator,
    inner: InnerSampler = SIMON_INNER,
    variant: str = "search",
) -> SerialInstance:
    """Sample a c-stage serial chain with the given terminal problem.

    variant "search": the terminal is always structured and `answer` holds
    its hidden value.  variant "decision": the terminal is structured or a
    decoy with probability 1/2 each, recorded in `label`.
    """
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    if variant not in ("search", "decision"):
        raise ValueError(f"unknown variant {variant!r}")
    stages = [sample_simon(n, rng) for _ in range(c)]
    periods = [st.s for st in stages]
    tables = [_gated_table(n, stages[0].table, None)]
    for i in range(1, c):
        tables.append(_gated_table(n, stages[i].table, periods[i - 1]))
    if variant == "search":
        terminal, answer = inner.sample_search(n, rng)
        label = None
    else:
        structured = bool(rng.integers(2))
        if structured:
            terminal, _ = inner.sample_search(n, rng)
        else:
            terminal = inner.sample_decoy(n, rng)
        answer, label = None, int(structured)
    tables.append(_gated_table(n, terminal, periods[c - 1]))
    return SerialInstance(c, n, tables, periods, variant, answer=answer, label=label)


def shadow_sets_serial(j: int, inst: SerialInstance) -> ShadowMask:
    """Blanking sets for stage-j knowledge: stages before j stay open, stages
    j and later lose their open key column.  Stage 0 is never masked."""
    if not 1 <= j <= inst.c:
        raise ValueError(f"j must be in 1..{inst.c}, got {j}")
    n = inst.n
    sets: list[frozenset] = [frozenset()]
    for i in range(1, inst.c + 1):
        if i < j:
            sets.append(frozenset())
        else:
            key = inst.periods[i - 1]
            sets.append(frozenset((x << n) | key for x in range(1 << n)))
    return ShadowMask(tuple(sets))


# -- shufflers ----------------------------------------------------------------


@dataclass
class ShufflerInstance:
    """A function f on n bits hidden behind d layers of masked relabelings.

    Stage tables f_0 .. f_d live on 2n bits.  Stage i answers exactly on the
    set of the previous tuple t_{i-1}; the composite over embedded inputs
    equals the embedded f.  tuples[k] is t_{k-1} (tuples[0] is the identity
    column, tuples[d+1] the f-values).
    """

    d: int
    n: int
    tuples: list[np.ndarray]
    tables: list[FunctionTable] = field(default_factory=list)

    @property
    def num_stages(self) -> int:
        return self.d + 1

    def bundle(self) -> OracleBundle:
        return OracleBundle(list(self.tables), label="shuffler")

    def dom(self, i: int) -> set[int]:
        """Answering set of stage i: the elements of tuple t_{i-1}."""
        if not 0 <= i <= self.d:
            raise ValueError(f"stage {i} outside 0..{self.d}")
        return set(map(int, self.tuples[i]))

    def func_view(self, i: int, x: int):
        return self.tables[i].lookup(x)

    def tuple_view(self, i: int, x: int):
        prev, nxt = self.tuples[i], self.tuples[i + 1]
        j = np.flatnonzero(prev == x)
        return BOT if j.size == 0 else int(nxt[j[0]])

    def composite(self, x: int):
        v = x
        for i in range(self.num_stages):
            v = self.func_view(i, v)
            if v is BOT:
                return BOT
        return v

    def paths(self) -> list[tuple[int, ...]]:
        """Rows of the tuple matrix, one full path per domain point."""
        cols = np.stack(self.tuples, axis=1)
        return [tuple(map(int, row)) for row in cols]

    def verify(self):
        n, d = self.n, self.d
        N, M = 1 << n, 1 << (2 * n)
        if len(self.tuples) != d + 2:
            raise ValueError(f"expected {d + 2} tuples, got {len(self.tuples)}")
        if not np.array_equal(self.tuples[0], np.arange(N)):
            raise ValueError("the leading tuple must be the identity column")
        for k in range(1, d + 1):
            t = self.tuples[k]
            if t.shape != (N,) or len(set(map(int, t))) != N:
                raise ValueError(f"tuple {k} is not an N-tuple of distinct elements")
            if (t < 0).any() or (t >= M).any():
                raise ValueError(f"tuple {k} leaves the 2n-bit space")
        for i in range(self.num_stages):
            dom = self.dom(i)
            present = set(map(int, self.tables[i].domain()))
            if present != dom:
                raise ValueError(f"stage {i} answers off its tuple set")
        for x in range(M):
            for i in range(self.num_stages):
                if self.func_view(i, x) != self.tuple_view(i, x):
                    raise ValueError(f"views disagree at stage {i}, input {x}")

    def verify_composite(self, f: FunctionTable):
        for x in range(1 << self.n):
            if self.composite(x) != int(f.entries[x]):
                raise ValueError(f"composite disagrees with f at {x}")


def _tables_from_tuples(d: int, n: int, tuples: list[np.ndarray]) -> list[FunctionTable]:
    tables = []
    for i in range(d + 1):
        entries = np.full(1 << (2 * n), -1, dtype=np.int64)
        entries[tuples[i]] = tuples[i + 1]
        tables.append(FunctionTable(2 * n, 2 * n, entries))
    return tables


def sample_shuffler(
    d: int,
    n: int,
    rng: np.random.Generator,
    f: FunctionTable | None = None,
) -> ShufflerInstance:
    """Sample a uniform d-layer shuffler hiding f (default: fresh 1-to-1).

    Intermediate tuples are uniform distinct-element N-tuples over the 2n-bit
    space; the stage tables are derived from the tuples.
    """
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if f is None:
        f = sample_one_to_one(n, rng)
    if f.in_bits != n or f.out_bits != n:
        raise ValueError(f"f must map n bits to n bits, got {f.in_bits}->{f.out_bits}")
    N, M = 1 << n, 1 << (2 * n)
    tuples = [np.arange(N, dtype=np.int64)]
    for _ in range(d):
        tuples.append(rng.choice(M, size=N, replace=False).astype(np.int64))
    tuples.append(f.entries.astype(np.int64).copy())
    return ShufflerInstance(d, n, tuples, _tables_from_tuples(d, n, tuples))


def sample_shuffler_conditioned(
    d: int,
    n: int,
    rng: np.random.Generator,
    f: FunctionTable | None = None,
    pinned_paths: list[tuple[int, ...]] = (),
    excluded: dict[int, set[int]] | None = None,
) -> ShufflerInstance:
    """Uniform shuffler conditioned on containing the pinned paths and on the
    listed intermediate tuples avoiding the excluded points.

    A pinned path is a full (d+2)-long row; excluded maps a tuple index k in
    1..d to points that tuple must avoid.  Pins are applied constructively
    (fix the row, sample the rest), exclusions by restricting the draw pool.
    """
    if f is None:
        f = sample_one_to_one(n, rng)
    N, M = 1 << n, 1 << (2 * n)
    excluded = excluded or {}
    for path in pinned_paths:
        if len(path) != d + 2:
            raise ValueError(f"path length {len(path)} != {d + 2}")
        if any(not 0 <= int(v) < M for v in path[1:-1]):
            raise ValueError("pinned path leaves the 2n-bit space")
        if path[-1] != int(f.entries[path[0]]):
            raise ValueError("pinned path must end at the f-value of its start")
    for k, pts in excluded.items():
        if any(not 0 <= int(v) < M for v in pts):
            raise ValueError(f"excluded points for tuple {k} leave the 2n-bit space")
    starts = [p[0] for p in pinned_paths]
    if len(set(starts)) != len(starts):
        raise ValueError("pinned paths must start at distinct domain points")
    for k in range(1, d + 1):
        col = [p[k] for p in pinned_paths]
        if len(set(col)) != len(col):
            raise ValueError(f"pinned paths collide inside tuple {k}")
    tuples = [np.arange(N, dtype=np.int64)]
    for k in range(1, d + 1):
        pins = {p[0]: p[k] for p in pinned_paths}
        avoid = set(pins.values()) | set(excluded.get(k, ()))
        pool = np.setdiff1d(np.arange(M, dtype=np.int64), np.fromiter(avoid, dtype=np.int64, count=len(avoid)) if avoid else np.empty(0, dtype=np.int64))
        draw = rng.choice(pool, size=N - len(pins), replace=False)
        t = np.empty(N, dtype=np.int64)
        free = iter(draw)
        for j in range(N):
            t[j] = pins[j] if j in pins else next(free)
        tuples.append(t)
    tuples.append(f.entries.astype(np.int64).copy())
    return ShufflerInstance(d, n, tuples, _tables_from_tuples(d, n, tuples))


def sample_ss(d: int, n: int, rng: np.random.Generator) -> tuple[ShufflerInstance, int]:
    """Shuffled Simon search instance: hide a Simon table behind d layers."""
    simon = sample_simon(n, rng)
    return sample_shuffler(d, n, rng, f=simon.table), simon.s


def sample_ss_decision(d: int, n: int, rng: np.random.Generator) -> tuple[ShufflerInstance, int]:
    """Decision partner: label 1 hides a Simon table, label 0 a 1-to-1."""
    structured = bool(rng.integers(2))
    if structured:
        inst, _ = sample_ss(d, n, rng)
    else:
        inst = sample_shuffler(d, n, rng, f=sample_one_to_one(n, rng))
    return inst, int(structured)


def shadow_sets_ss(
    j: int,
    inst: ShufflerInstance,
    exposed_paths: list[tuple[int, ...]] = (),
) -> ShadowMask:
    """Blanking sets for stage-j knowledge of a shuffler.

    Stages before j stay open; stages i >= j lose their whole answering set
    except the i-th coordinates of the exposed full paths.  Stage 0 is never
    masked.  With no exposed paths this is the quantum-only variant.
    """
    if not 1 <= j <= inst.d:
        raise ValueError(f"j must be in 1..{inst.d}, got {j}")
    rows = set(inst.paths())
    for path in exposed_paths:
        if tuple(map(int, path)) not in rows:
            raise ValueError(f"exposed path {path} is not realized by the instance")
    sets: list[frozenset] = [frozenset()]
    for i in range(1, inst.d + 1):
        if i < j:
            sets.append(frozenset())
        else:
            keep = {int(path[i]) for path in exposed_paths}
            sets.append(frozenset(inst.dom(i) - keep))
    return ShadowMask(tuple(sets))


# -- collision-keyed instances -------------------------------------------------


@dataclass
class SCSInstance:
    """A 2-to-1 f whose collisions unlock a Simon problem g via a keyed map.

    p carries f's colliding pairs onto g's (rank by image, preimages in
    ascending order), so p(x0) ^ p(x1) equals g's period for every collision.
    p is only reachable through oracles keyed by h(f(x)), where h hides
    behind a d-layer shuffler, and f itself is only reachable through a
    stochastic oracle that draws a fresh image y per application.
    """

    n: int
    d: int
    f: FunctionTable
    g: SimonInstance
    p: FunctionTable
    p_inv: FunctionTable
    h: FunctionTable
    shuffler: ShufflerInstance
    keyed_map: FunctionTable
    keyed_map_inv: FunctionTable
    stochastic: StochasticOracleSpec

    @property
    def s(self) -> int:
        return self.g.s

    def maps_bundle(self) -> OracleBundle:
        return OracleBundle([self.keyed_map, self.keyed_map_inv], label="keyed-maps")

    def collision_partner(self, x: int) -> int:
        pair = preimage_pairs(self.f)[int(self.f.entries[x])]
        return pair[1] if pair[0] == x else pair[0]

    def verify(self):
        self.g.verify()
        pairs = preimage_pairs(self.f)
        for x0, x1 in pairs.values():
            if int(self.p.entries[x0]) ^ int(self.p.entries[x1]) != self.s:
                raise ValueError("keyed pairs do not differ by the hidden period")
        for x in range(1 << self.n):
            if int(self.p_inv.entries[int(self.p.entries[x])]) != x:
                raise ValueError("p_inv is not the inverse of p")
        self.shuffler.verify_composite(self.h)
        for x in range(1 << self.n):
            key = int(self.h.entries[int(self.f.entries[x])])
            if self.keyed_map.lookup((key << self.n) | x) != int(self.p.entries[x]):
                raise ValueError("keyed map misses a valid (key, x) input")
            back = self.keyed_map_inv.lookup((key << self.n) | int(self.p.entries[x]))
            if back != x:
                raise ValueError("keyed inverse misses a valid (key, p(x)) input")
        if int(self.keyed_map.domain().size) != 1 << self.n:
            raise ValueError("keyed map answers off its valid inputs")
        if int(self.keyed_map_inv.domain().size) != 1 << self.n:
            raise ValueError("keyed inverse answers off its valid inputs")


def _rank_by_image(pairs: dict[int, tuple[int, int]]) -> list[tuple[int, int]]:
    return [pairs[y] for y in sorted(pairs, reverse=True)]


def sample_scs(d: int, n: int, rng: np.random.Generator) -> SCSInstance:
    """Sample a collision-keyed Simon instance of shuffler depth d."""
    f = sample_two_to_one(n, rng)
    g = sample_simon(n, rng)
    f_pairs = preimage_pairs(f)
    g_pairs = preimage_pairs(g.table)
    p_entries = np.empty(1 << n, dtype=np.int64)
    for (x0, x1), (z0, z1) in zip(_rank_by_image(f_pairs), _rank_by_image(g_pairs)):
        p_entries[x0], p_entries[x1] = z0, z1
    p = FunctionTable.total(n, n, p_entries)
    p_inv_entries = np.empty(1 << n, dtype=np.int64)
    p_inv_entries[p_entries] = np.arange(1 << n)
    p_inv = FunctionTable.total(n, n, p_inv_entries)

    h = sample_one_to_one(n, rng)
    shuffler = sample_shuffler(d, n, rng, f=h)

    keyed = np.full(1 << (2 * n), -1, dtype=np.int64)
    keyed_inv = np.full(1 << (2 * n), -1, dtype=np.int64)
    for x in range(1 << n):
        key = int(h.entries[int(f.entries[x])])
        keyed[(key << n) | x] = p_entries[x]
        keyed_inv[(key << n) | int(p_entries[x])] = x
    keyed_map = FunctionTable(2 * n, n, keyed)
    keyed_map_inv = FunctionTable(2 * n, n, keyed_inv)

    images = np.array(sorted(f_pairs), dtype=np.int64)

    def payload(y, _pairs=f_pairs, _n=n):
        x0, x1 = _pairs[y]
        return FunctionTable.total(1, 2 * _n, [(y << _n) | x0, (y << _n) | x1])

    stochastic = StochasticOracleSpec(1, 2 * n, images, payload)
    return SCSInstance(n, d, f, g, p, p_inv, h, shuffler, keyed_map, keyed_map_inv, stochastic)


def shadow_sets_scs(inst: SCSInstance, revealed: set[int]) -> ShadowMask:
    """Blanking sets for the keyed-map bundle given revealed domain points.

    revealed holds x values whose full keyed triples are known.  Knowledge is
    collision-complete: the key h(f(x)) is shared within a colliding pair, so
    each revealed x also exposes its partner's entries.  The mask blanks
    everything else: with nothing revealed both maps go fully absent, with
    everything revealed the shadow equals the original bundle.
    """
    n = inst.n
    closure = set()
    for x in revealed:
        closure.add(int(x))
        closure.add(inst.collision_partner(int(x)))
    keep_map = set()
    keep_inv = set()
    for x in closure:
        key = int(inst.h.entries[int(inst.f.entries[x])])
        keep_map.add((key << n) | x)
        keep_inv.add((key << n) | int(inst.p.entries[x]))
    dom_map = set(map(int, inst.keyed_map.domain()))
    dom_inv = set(map(int, inst.keyed_map_inv.domain()))
    return ShadowMask((frozenset(dom_map - keep_map), frozenset(dom_inv - keep_inv)))


# -- serialization -------------------------------------------------------------


def _table_to_obj(t: FunctionTable) -> dict:
    return {"in_bits": t.in_bits, "out_bits": t.out_bits, "entries": [int(v) for v in t.entries]}


def _table_from_obj(obj: dict) -> FunctionTable:
    return FunctionTable(obj["in_bits"], obj["out_bits"], np.array(obj["entries"], dtype=np.int64))


def instance_to_obj(inst, seed: int | None = None) -> dict:
    """Plain-dict form of any instance, suitable for canonical JSON."""
    base = {"format": FORMAT_VERSION}
    if seed is not None:
        base["seed"] = int(seed)
    if isinstance(inst, SimonInstance):
        base |= {"kind": "simon", "n": inst.n, "s": inst.s, "table": _table_to_obj(inst.table)}
    elif isinstance(inst, SerialInstance):
        base |= {
            "kind": "serial",
            "c": inst.c,
            "n": inst.n,
            "variant": inst.variant,
            "periods": list(map(int, inst.periods)),
            "answer": inst.answer,
            "label": inst.label,
            "tables": [_table_to_obj(t) for t in inst.tables],
        }
    elif isinstance(inst, ShufflerInstance):
        base |= {
            "kind": "shuffler",
            "d": inst.d,
            "n": inst.n,
            "tuples": [[int(v) for v in t] for t in inst.tuples],
        }
    elif isinstance(inst, SCSInstance):
        base |= {
            "kind": "scs",
            "n": inst.n,
            "d": inst.d,
            "f": _table_to_obj(inst.f),
            "g_table": _table_to_obj(inst.g.table),
            "g_s": inst.g.s,
            "h": _table_to_obj(inst.h),
            "shuffler_tuples": [[int(v) for v in t] for t in inst.shuffler.tuples],
        }
    else:
        raise TypeError(f"cannot serialize {type(inst).__name__}")
    return base


def instance_from_obj(obj: dict):
    if obj.get("format") != FORMAT_VERSION:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    kind = obj.get("kind")
    if kind == "simon":
        inst = SimonInstance(obj["n"], _table_from_obj(obj["table"]), obj["s"])
        inst.verify()
        return inst
    if kind == "serial":
        inst = SerialInstance(
            obj["c"],
            obj["n"],
            [_table_from_obj(t) for t in obj["tables"]],
            list(obj["periods"]),
            obj["variant"],
            answer=obj.get("answer"),
            label=obj.get("label"),
        )
        inst.verify()
        return inst
    if kind == "shuffler":
        tuples = [np.array(t, dtype=np.int64) for t in obj["tuples"]]
        d, n = obj["d"], obj["n"]
        inst = ShufflerInstance(d, n, tuples, _tables_from_tuples(d, n, tuples))
        return inst
    if kind == "scs":
        n, d = obj["n"], obj["d"]
        f = _table_from_obj(obj["f"])
        g = SimonInstance(n, _table_from_obj(obj["g_table"]), obj["g_s"])
        # Rebuild the derived maps from the stored primitives.
        rebuilt = _rebuild_scs(n, d, f, g, _table_from_obj(obj["h"]),
                               [np.array(t, dtype=np.int64) for t in obj["shuffler_tuples"]])
        return rebuilt
    raise ValueError(f"unknown instance kind {kind!r}")


def _rebuild_scs(n, d, f, g, h, shuffler_tuples) -> SCSInstance:
    f_pairs = preimage_pairs(f)
    g_pairs = preimage_pairs(g.table)
    p_entries = np.empty(1 << n, dtype=np.int64)
    for (x0, x1), (z0, z1) in zip(_rank_by_image(f_pairs), _rank_by_image(g_pairs)):
        p_entries[x0], p_entries[x1] = z0, z1
    p = FunctionTable.total(n, n, p_entries)
    p_inv_entries = np.empty(1 << n, dtype=np.int64)
    p_inv_entries[p_entries] = np.arange(1 << n)
    p_inv = FunctionTable.total(n, n, p_inv_entries)
    shuffler = ShufflerInstance(d, n, shuffler_tuples, _tables_from_tuples(d, n, shuffler_tuples))
    keyed = np.full(1 << (2 * n), -1, dtype=np.int64)
    keyed_inv = np.full(1 << (2 * n), -1, dtype=np.int64)
    for x in range(1 << n):
        key = int(h.entries[int(f.entries[x])])
        keyed[(key << n) | x] = p_entries[x]
        keyed_inv[(key << n) | int(p_entries[x])] = x
    images = np.array(sorted(f_pairs), dtype=np.int64)

    def payload(y, _pairs=f_pairs, _n=n):
        x0, x1 = _pairs[y]
        return FunctionTable.total(1, 2 * _n, [(y << _n) | x0, (y << _n) | x1])

    return SCSInstance(
        n, d, f, g, p, p_inv, h, shuffler,
        FunctionTable(2 * n, n, keyed), FunctionTable(2 * n, n, keyed_inv),
        StochasticOracleSpec(1, 2 * n, images, payload),
    )


def dumps_canonical(obj: dict) -> str:
    """Canonical JSON: sorted keys, tight separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"
