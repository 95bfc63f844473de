"""Analysis-layer tests: hand-computed chain cases, enumeration-backed
permutation checks, and small Monte Carlo runs held to their own intervals."""

import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from hybridsim import analysis as an
from hybridsim.oracles import FunctionTable, OracleBundle, ShadowMask, Slot
from hybridsim.problems import (
    sample_serial,
    sample_shuffler,
    sample_shuffler_conditioned,
    shadow_sets_serial,
    shadow_sets_ss,
)
from hybridsim.statevec import hadamard_layer, make_register_map, zero_state
from hybridsim.stats import binomial_within_3sigma, derive_rng


def brute_parts(n):
    """Every injective nonempty pair set on range(n), by direct product."""
    out = set()
    for k in range(1, n + 1):
        for xs in itertools.combinations(range(n), k):
            for ys in itertools.permutations(range(n), k):
                out.add(frozenset(zip(xs, ys)))
    return out


def brute_delta(dist, fixed=frozenset()):
    """Worst log-ratio over all parts, scanning the full part space."""
    banned_x = {x for x, _ in fixed}
    banned_y = {y for _, y in fixed}
    n = dist.size
    best = 0.0
    for part in brute_parts(n):
        if any(x in banned_x or y in banned_y for x, y in part):
            continue
        mass = sum(
            (w for p, w in dist.weights.items() if all(p[x] == y for x, y in part)),
            Fraction(0),
        )
        base = Fraction(
            math.factorial(n - len(fixed) - len(part)), math.factorial(n - len(fixed))
        )
        if mass > base:
            best = max(best, math.log2(mass / base) / len(part))
    return best


class TestPartSpace:
    def test_count_matches_enumeration(self):
        assert [an.count_parts(n) for n in range(2, 6)] == [6, 33, 208, 1545]
        for n in range(2, 6):
            assert len(brute_parts(n)) == an.count_parts(n)

    def test_part_rejects_bad_pairs(self):
        with pytest.raises(ValueError):
            an.Part(frozenset())
        with pytest.raises(ValueError):
            an.Part.of([(0, 1), (0, 2)])
        with pytest.raises(ValueError):
            an.Part.of([(0, 1), (2, 1)])

    def test_part_accessors(self):
        part = an.Part.of([(0, 2), (3, 1)])
        assert part.size == 2
        assert part.xs() == frozenset({0, 3})
        assert part.ys() == frozenset({2, 1})
        assert part.contained_in((2, 0, 3, 1))
        assert not part.contained_in((2, 0, 1, 3))
        grown = part.union(an.Part.of([(1, 0)]))
        assert grown.size == 3

    def test_baseline_masses(self):
        assert an.uniform_part_mass(4, 1) == Fraction(1, 4)
        assert an.uniform_part_mass(4, 4) == Fraction(1, 24)
        assert an.conditioned_part_mass(4, 0, 2) == an.uniform_part_mass(4, 2)
        assert an.conditioned_part_mass(4, 1, 1) == Fraction(1, 3)

    def test_part_probability_uniform(self):
        base = an.uniform_perms(4)
        for size in (1, 2, 3):
            pairs = [(i, (i + 1) % 4) for i in range(size)]
            assert an.part_probability(base, pairs) == an.uniform_part_mass(4, size)


class TestNonuniformity:
    def test_uniform_is_flat(self):
        for n in (3, 4):
            delta, witness = an.nonuniformity_delta(an.uniform_perms(n))
            assert delta == 0.0
            assert witness is None

    def test_point_mass_peaks_on_single_pairs(self):
        delta, witness = an.nonuniformity_delta(an.point_mass((0, 1, 2)))
        assert delta == pytest.approx(math.log2(3), abs=1e-12)
        assert witness.size == 1

    def test_conditioning_on_first_point(self):
        conditioned, mass = an.condition_on_advice(
            an.uniform_perms(3), lambda p: p[0], 0
        )
        assert mass == Fraction(1, 3)
        delta, witness = an.nonuniformity_delta(conditioned)
        assert delta == pytest.approx(math.log2(3), abs=1e-12)
        assert witness.pairs == frozenset({(0, 0)})

    def test_matches_brute_force_scan(self):
        rng = derive_rng(401)
        base = an.uniform_perms(4)
        for _ in range(8):
            table = {
                p: int(v)
                for p, v in zip(base.weights, rng.integers(0, 3, size=len(base.weights)))
            }
            conditioned, _ = an.condition_on_advice(base, table.__getitem__, 0)
            delta, _ = an.nonuniformity_delta(conditioned)
            assert delta == pytest.approx(brute_delta(conditioned), abs=1e-12)

    def test_brute_force_agrees_under_a_pin(self):
        conditioned, _ = an.condition_on_advice(an.uniform_perms(4), lambda p: p[1], 2)
        pin = an.Part.of([(1, 2)])
        delta, _ = an.nonuniformity_delta(conditioned, fixed=pin)
        assert delta == pytest.approx(brute_delta(conditioned, pin.pairs), abs=1e-12)

    def test_refuses_sizes_beyond_enumeration(self):
        with pytest.raises(ValueError):
            an.nonuniformity_delta(an.uniform_perms(6))

    def test_fixed_part_must_cover_support(self):
        with pytest.raises(ValueError):
            an.nonuniformity_delta(an.point_mass((0, 1, 2)), fixed=an.Part.of([(0, 1)]))

    def test_advice_value_must_occur(self):
        with pytest.raises(ValueError):
            an.condition_on_advice(an.uniform_perms(3), lambda p: p[0], 9)


class TestDecomposition:
    def test_first_coordinate_advice_pins_one_pair(self):
        res = an.decompose_conditioned(
            an.uniform_perms(3), lambda p: p[0], 0, Fraction(1, 6), 1.0
        )
        res.verify()
        assert len(res.components) == 1
        assert res.components[0].part.pairs == frozenset({(0, 0)})
        assert res.components[0].weight == 1
        assert res.residual_weight == 0
        delta, _ = an.nonuniformity_delta(
            res.components[0].dist, fixed=res.components[0].part
        )
        assert delta <= 1.0 + 1e-9

    def test_constant_advice_needs_no_pin(self):
        res = an.decompose_conditioned(
            an.uniform_perms(3), lambda p: 7, 7, Fraction(1, 8), 1.0
        )
        res.verify()
        assert len(res.components) == 1
        assert res.components[0].part is None
        assert res.residual is None

    def test_low_weight_remainder_becomes_residual(self):
        # Conditioned on this set, the pairs (0,0), (1,2) and (2,1) each
        # carry mass 1/2 against a baseline of 1/3; the tie breaks on (0,0),
        # and the two permutations avoiding it drop to exactly gamma.
        kept = {(0, 1, 2), (0, 2, 1), (1, 2, 0), (2, 0, 1)}
        res = an.decompose_conditioned(
            an.uniform_perms(3), lambda p: p in kept, True, Fraction(1, 2), 0.5
        )
        res.verify()
        assert len(res.components) == 1
        assert res.components[0].part.pairs == frozenset({(0, 0)})
        assert res.components[0].weight == Fraction(1, 2)
        assert res.residual_weight == Fraction(1, 2)
        assert set(res.residual.weights) == {(1, 2, 0), (2, 0, 1)}

    def test_preconditions(self):
        base = an.uniform_perms(3)
        with pytest.raises(ValueError):
            an.decompose_conditioned(base, lambda p: p[0], 0, Fraction(1, 2), 1.0)
        with pytest.raises(ValueError):
            an.decompose_conditioned(base, lambda p: p[0], 0, Fraction(3, 2), 1.0)
        with pytest.raises(ValueError):
            an.decompose_conditioned(base, lambda p: p[0], 0, Fraction(1, 6), 0.0)

    def test_random_families_stay_within_budget(self):
        rng = derive_rng(402)
        gamma, delta = Fraction(1, 8), 0.5
        first_cap = -math.log2(float(gamma)) / delta
        for fam in range(10):
            n = 3 + fam % 2
            base = an.uniform_perms(n)
            table = {
                p: int(v)
                for p, v in zip(base.weights, rng.integers(0, 3, size=len(base.weights)))
            }
            masses = {}
            for p in base.weights:
                masses[table[p]] = masses.get(table[p], 0) + 1
            value = max(masses, key=masses.get)
            res = an.decompose_conditioned(base, table.__getitem__, value, gamma, delta)
            res.verify()
            if res.components[0].part is not None:
                assert res.components[0].part.size < first_cap
            for comp in res.components:
                if comp.part is None:
                    continue
                assert comp.part.size <= res.part_cap
                d_star, _ = an.nonuniformity_delta(comp.dist, fixed=comp.part)
                assert d_star <= delta + 1e-9

    def test_second_conditioning_doubles_the_budget(self):
        rng = derive_rng(403)
        gamma, delta = Fraction(1, 8), 0.5
        base = an.uniform_perms(4)
        composed = 0
        for _ in range(6):
            table = {
                p: int(v)
                for p, v in zip(base.weights, rng.integers(0, 3, size=len(base.weights)))
            }
            res = an.decompose_conditioned(base, table.__getitem__, 0, gamma, delta)
            pinned = [c for c in res.components if c.part is not None]
            if not pinned:
                continue
            comp = max(pinned, key=lambda c: c.weight)
            table2 = {
                p: int(v)
                for p, v in zip(
                    comp.dist.weights, rng.integers(0, 3, size=len(comp.dist.weights))
                )
            }
            masses = {}
            for p, w in comp.dist.weights.items():
                masses[table2[p]] = masses.get(table2[p], Fraction(0)) + w
            value = max(masses, key=masses.get)
            second = an.decompose_conditioned(
                comp.dist, table2.__getitem__, value, gamma, delta, fixed=comp.part
            )
            second.verify()
            composed += 1
            for sub in second.components:
                pin = comp.part if sub.part is None else comp.part.union(sub.part)
                d_star, _ = an.nonuniformity_delta(sub.dist, fixed=pin)
                assert d_star <= 2 * delta + 1e-9
        assert composed > 0


class TestDomHit:
    def test_uniform_rate(self):
        rng = derive_rng(404)
        trials = 1200
        check = an.check_dom_hit(2, 3, 1, 11, an.BetaCondition.of(), trials, rng)
        assert check.exact == pytest.approx(1 / 8)
        assert check.passed
        assert check.ci[0] <= check.exact <= check.ci[1]
        assert binomial_within_3sigma(round(check.estimate * trials), trials, check.exact)

    def test_pinned_path_shifts_the_rate(self):
        rng = derive_rng(405)
        f = an._one_to_one_with_pins(3, rng, {})
        beta = an.BetaCondition.of(paths=[(6, 40, 41, int(f.entries[6]))])
        check = an.check_dom_hit(2, 3, 1, 5, beta, 1500, rng)
        assert check.exact == pytest.approx(7 / 63)
        assert check.bound == pytest.approx(2 / 8)
        assert check.passed
        assert check.ci[0] <= check.exact <= check.ci[1]

    def test_excluded_point_never_lands(self):
        rng = derive_rng(406)
        beta = an.BetaCondition.of(excluded={1: {5}})
        check = an.check_dom_hit(2, 3, 1, 5, beta, 300, rng)
        assert check.exact == 0.0
        assert check.estimate == 0.0

    def test_point_pinned_into_stage_is_rejected(self):
        rng = derive_rng(407)
        f = an._one_to_one_with_pins(3, rng, {})
        beta = an.BetaCondition.of(paths=[(6, 5, 41, int(f.entries[6]))])
        with pytest.raises(ValueError):
            an.check_dom_hit(2, 3, 1, 5, beta, 100, rng)

    def test_stage_and_point_ranges(self):
        rng = derive_rng(408)
        with pytest.raises(ValueError):
            an.check_dom_hit(2, 3, 3, 5, an.BetaCondition.of(), 100, rng)
        with pytest.raises(ValueError):
            an.check_dom_hit(2, 3, 1, 64, an.BetaCondition.of(), 100, rng)

    def test_conditioned_sampler_respects_pins(self):
        rng = derive_rng(409)
        f = an._one_to_one_with_pins(3, rng, {})
        path = (6, 40, 41, int(f.entries[6]))
        for _ in range(20):
            inst = sample_shuffler_conditioned(
                2, 3, rng, f=f, pinned_paths=[path], excluded={1: {5}}
            )
            inst.verify()
            assert int(inst.tuples[1][6]) == 40
            assert int(inst.tuples[2][6]) == 41
            assert 5 not in set(map(int, inst.tuples[1]))

    def test_conditioned_sampler_range_checks(self):
        rng = derive_rng(410)
        f = an._one_to_one_with_pins(3, rng, {})
        with pytest.raises(ValueError):
            sample_shuffler_conditioned(
                2, 3, rng, f=f, pinned_paths=[(6, 300, 41, int(f.entries[6]))]
            )
        with pytest.raises(ValueError):
            sample_shuffler_conditioned(2, 3, rng, f=f, excluded={1: {999}})

    def test_pins_collide(self):
        rng = derive_rng(411)
        f = an._one_to_one_with_pins(3, rng, {})
        clash = [
            (0, 9, 10, int(f.entries[0])),
            (1, 9, 11, int(f.entries[1])),
        ]
        with pytest.raises(ValueError):
            sample_shuffler_conditioned(2, 3, rng, f=f, pinned_paths=clash)

    def test_one_to_one_with_pins(self):
        rng = derive_rng(412)
        table = an._one_to_one_with_pins(3, rng, {0: 5, 3: 1})
        assert int(table.entries[0]) == 5
        assert int(table.entries[3]) == 1
        assert sorted(map(int, table.entries)) == list(range(8))
        with pytest.raises(ValueError):
            an._one_to_one_with_pins(3, rng, {0: 5, 3: 5})


class TestCountingIdentities:
    def test_clean_up_to_twelve(self):
        assert an.counting_identity_failures(max_a=12) == []

    def test_falling_ratio_value(self):
        assert an.falling_ratio(2, 1) == Fraction(1, 3)
        assert an.falling_ratio(5, 0) == Fraction(1, 6)

    def test_binomial_ratio_keeps_the_numerator(self):
        # the b/(a+1) form would give 1/3 here; the true ratio is (b+1)/(a+1)
        assert an.binomial_ratio(2, 1) == Fraction(2, 3)
        assert an.binomial_ratio(2, 1) != Fraction(1, 3)

    def test_membership_rates_by_enumeration(self):
        for m in range(1, 7):
            for k in range(1, m + 1):
                subsets = list(itertools.combinations(range(m), k))
                with_zero = sum(0 in s for s in subsets)
                assert an.set_membership_rate(m, k) == Fraction(with_zero, len(subsets))
                tuples = list(itertools.permutations(range(m), k))
                hit = sum(0 in t for t in tuples)
                assert an.tuple_membership_rate(m, k) == Fraction(hit, len(tuples))


class TestYDistinct:
    def test_frozen_three_call_value(self):
        value = an.y_distinct_probability(6, 3)
        assert value == Fraction(930, 1024)
        assert float(value) >= 0.9

    def test_long_run_matches_direct_product(self):
        product = Fraction(1)
        for k in range(20):
            product *= Fraction(32 - k, 32)
        assert an.y_distinct_probability(6, 20) == product
        assert float(product) < 1e-3

    def test_more_calls_than_images(self):
        assert an.y_distinct_probability(3, 5) == 0
        assert an.birthday_bound(3, 5) == 1.0

    def test_birthday_is_the_complement(self):
        assert an.birthday_bound(6, 3) == pytest.approx(1 - 930 / 1024)


class TestFindExperiments:
    def test_disjoint_mask_never_catches(self):
        rng = derive_rng(413)
        table = FunctionTable.total(2, 2, [1, 2, 3, 0])
        bundle = OracleBundle([table])
        regs = make_register_map({"Q": 2, "R": 3, "F0": 1})
        state = zero_state(6, regs)
        fragment = [(Slot.of(0, "Q", "R"),)]
        mask = ShadowMask((frozenset({3}),))
        exp = an.estimate_find(state, fragment, (bundle, mask), 50, rng)
        assert exp.estimate == 0.0
        assert exp.exact_mean == 0.0
        assert exp.qbar == 1

    def test_singleton_masks_sit_exactly_on_the_bound(self):
        rng = derive_rng(414)
        exp = an.random_find_single_stage(rng, n=3, trials=600)
        assert exp.bound == pytest.approx(1 / 8)
        assert abs(exp.exact_mean - 1 / 8) < 1e-12
        assert exp.passed

    def test_serial_chain_respects_slot_budget(self):
        rng = derive_rng(415)
        exp = an.serial_find_example(500, rng, n=3, c=2)
        assert exp.qbar == 2
        assert exp.bound == pytest.approx(0.5)
        assert exp.passed
        assert exp.exact_mean < exp.bound

    def test_flag_count_must_match_stages(self):
        rng = derive_rng(416)
        table = FunctionTable.total(2, 2, [0, 1, 2, 3])
        bundle = OracleBundle([table])
        regs = make_register_map({"Q": 2, "R": 3, "F0": 1})
        state = zero_state(6, regs)
        fragment = [(Slot.of(0, "Q", "R"),)]
        with pytest.raises(ValueError):
            an.estimate_find(
                state, fragment, (bundle, ShadowMask.empty(1)), 10, rng, flags=("F0", "F1")
            )

    def test_small_sweep_passes(self):
        rng = derive_rng(417)
        experiments, _ = an.find_sweep(rng, configs=6, trials=400, n=3)
        assert len(experiments) == 6
        assert all(e.passed for e in experiments)

    def test_fragment_qbar_counts_slots(self):
        fragment = [
            hadamard_layer([0]),
            (Slot.of(0, "Q", "R"),),
            hadamard_layer([0]),
            (Slot.of(0, "Q", "R"), Slot.of(1, "A", "B")),
        ]
        assert an.fragment_qbar(fragment) == 3

    def test_retry_runs_once_at_higher_volume(self):
        calls = []

        def flaky(t):
            calls.append(t)
            return an.CheckResult("stub", 0.0, 0.0, (0.0, 0.0), len(calls) > 1)

        result, attempts = an.run_with_retry(flaky, 100)
        assert attempts == 2
        assert calls == [100, 1000]
        assert result.passed

        steady, attempts = an.run_with_retry(
            lambda t: an.CheckResult("stub", 0.0, 0.0, (0.0, 0.0), True), 100
        )
        assert attempts == 1


class TestSingleApplicationChain:
    def test_empty_mask_collapses_the_chain(self):
        rng = derive_rng(418)
        inst = an.random_hiding_instance(rng, n=2)
        inst.mask = ShadowMask.empty(1)
        lhs, mid, rhs = inst.check()
        assert lhs == 0.0
        assert rhs == 0.0
        assert mid < 1e-7

    def test_full_mask_hand_case(self):
        # One qubit, f = (1, 0), uniform query.  Blanking everything sends
        # both branches to the marker arm: overlap 0, distance sqrt(2), and
        # the marker-clear event separates the runs with probability 1.
        table = FunctionTable.total(1, 1, [1, 0])
        regs = make_register_map({"Q": 1, "R": 2, "F0": 1})
        state = zero_state(4, regs)
        event = [i for i in range(8) if not (i >> 2) & 1]
        lhs, mid, rhs = an.check_o2h(
            state,
            (hadamard_layer([0]),),
            (Slot.of(0, "Q", "R"),),
            (),
            OracleBundle([table]),
            ShadowMask((frozenset({0, 1}),)),
            event,
        )
        assert lhs == pytest.approx(1.0, abs=1e-12)
        assert mid == pytest.approx(math.sqrt(2), abs=1e-9)
        assert rhs == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_random_instances_never_violate(self):
        rng = derive_rng(419)
        for _ in range(120):
            lhs, mid, rhs = an.random_hiding_instance(rng, n=2).check()
            assert lhs <= rhs + 1e-9

    def test_pre_layers_must_leave_the_flag_alone(self):
        rng = derive_rng(420)
        inst = an.random_hiding_instance(rng, n=2)
        flag_bit = inst.state.registers["F0"].offset
        with pytest.raises(ValueError):
            an.check_o2h(
                inst.state,
                (hadamard_layer([flag_bit]),),
                inst.slots,
                (),
                inst.bundle,
                inst.mask,
                inst.event,
            )

    def test_dirty_marker_is_rejected(self):
        rng = derive_rng(421)
        inst = an.random_hiding_instance(rng, n=2)
        marker = inst.state.registers["R"].offset + 2
        with pytest.raises(ValueError, match="marker"):
            an.check_o2h(
                inst.state,
                (hadamard_layer([marker]),),
                inst.slots,
                (),
                inst.bundle,
                inst.mask,
                inst.event,
            )


class TestShadowProbes:
    def test_serial_probe_within_budget(self):
        rng = derive_rng(422)
        chain = sample_serial(2, 3, rng, variant="search")
        state, fragment, masks = an.build_serial_probe(chain, rng)
        probe = an.shadow_equivalence_probe(state, fragment, chain.bundle(), masks)
        assert probe.passed
        assert len(probe.stage_finds) == 2
        assert probe.bound == pytest.approx(
            sum(math.sqrt(2 * f) for f in probe.stage_finds)
        )

    def test_single_stage_cascade_probe(self):
        rng = derive_rng(423)
        shuf = sample_shuffler(1, 2, rng)
        regs = make_register_map({"X": 4, "R": 5, "F0": 1})
        state = zero_state(10, regs)
        fragment = [
            an.random_layer_on(range(8), rng),
            (Slot.of(1, "X", "R"),),
            an.random_layer_on(range(9), rng),
        ]
        probe = an.shadow_equivalence_probe(
            state, fragment, shuf.bundle(), [shadow_sets_ss(1, shuf)]
        )
        assert probe.passed

    def test_empty_masks_give_zero_distance(self):
        rng = derive_rng(424)
        chain = sample_serial(2, 3, rng, variant="search")
        state, fragment, _ = an.build_serial_probe(chain, rng)
        probe = an.shadow_equivalence_probe(
            state, fragment, chain.bundle(), [ShadowMask.empty(3)] * 2
        )
        assert probe.tv < 1e-9
        assert probe.bound == 0.0

    def test_mask_count_must_match_stages(self):
        rng = derive_rng(425)
        chain = sample_serial(2, 3, rng, variant="search")
        state, fragment, masks = an.build_serial_probe(chain, rng)
        with pytest.raises(ValueError):
            an.shadow_equivalence_probe(state, fragment, chain.bundle(), masks[:1])

    def test_shared_response_register_is_rejected(self):
        # two stages answering into one register: the first blanked stage
        # writes its marker, so the second leg is no longer an identity
        rng = derive_rng(426)
        chain = sample_serial(2, 2, rng, variant="search")
        regs = make_register_map({"X": 4, "R": 3, "F0": 1})
        state = zero_state(8, regs)
        fragment = [
            hadamard_layer(state.registers["X"].qubits()),
            (Slot.of(1, "X", "R"),),
            (Slot.of(2, "X", "R"),),
        ]
        masks = [shadow_sets_serial(1, chain)] * 2
        with pytest.raises(ValueError, match="marker"):
            an.shadow_equivalence_probe(state, fragment, chain.bundle(), masks)

    def test_guess_rate_stays_at_chance(self):
        rng = derive_rng(427)
        est = an.shadow_guess_experiment(40, rng, n=3, c=2)
        assert est.lo <= 1 / 8 + 1e-9


class TestHardnessProbe:
    def test_wrapper_shape(self):
        program = an.build_scs_probe(3)
        assert program.model == "cq"
        assert program.depth == 2
        assert len(program.rounds) == 2
        assert program.layout == {"B": 1, "RP": 6, "W": 6, "WR": 7}

    def test_depth_guard(self):
        rng = derive_rng(428)
        with pytest.raises(ValueError):
            an.scs_hardness_probe(10, rng, n=4, d=2)

    def test_small_probe_passes(self):
        rng = derive_rng(429)
        probe = an.scs_hardness_probe(250, rng, n=4, d=3)
        assert probe.passed
        assert probe.draws_per_trial == 6
        assert probe.collision_baseline == pytest.approx(an.birthday_bound(4, 6))
        assert probe.distinct_expected == pytest.approx(
            float(an.y_distinct_probability(4, 6))
        )
        assert 0.0 <= probe.guess_rate <= 1.0
        assert 0.0 <= probe.collision_rate <= 1.0


SUITE_ROWS = {
    "o2h": ["o2h-chain", "o2h-empty-mask", "shadow-tv", "shadow-guess"],
    "find": ["find-sweep", "find-singleton-average", "find-serial-chain"],
    "shuffler": ["shuffler-views", "dom-hit-uniform", "dom-hit-pinned-other", "dom-hit-excluded"],
    "decomposition": [
        "decomposition-reconstruction",
        "decomposition-residual",
        "decomposition-part-size",
        "decomposition-component-delta",
        "decomposition-composition-delta",
    ],
    "combinatorics": ["counting-identities", "part-space-sizes"],
    "hardness-probe": [
        "hardness-guess",
        "hardness-collision",
        "hardness-distinct-images",
        "distinct-image-floor",
    ],
}

SUITE_SMOKE_TRIALS = {
    "o2h": 60,
    "find": 60,
    "shuffler": 300,
    "decomposition": 4,
    "combinatorics": None,
    "hardness-probe": 150,
}


class TestSuites:
    def test_registry(self):
        assert set(an.SUITES) == set(SUITE_ROWS)

    @pytest.mark.parametrize("name", sorted(SUITE_ROWS))
    def test_suite_rows_pass_and_serialize(self, name):
        rng = derive_rng(430 + sorted(SUITE_ROWS).index(name))
        rows = an.SUITES[name](rng, trials=SUITE_SMOKE_TRIALS[name])
        assert [r.name for r in rows] == SUITE_ROWS[name]
        assert all(r.passed for r in rows)
        encoded = json.dumps([r.to_obj() for r in rows])
        assert all(r["passed"] for r in json.loads(encoded))

    def test_check_result_serialization(self):
        row = an.CheckResult(
            "demo",
            np.float64(0.25),
            0.5,
            (np.float64(0.2), np.float64(0.3)),
            True,
            {"mass": Fraction(1, 3), "count": np.int64(4), "ci": (0.1, 0.2)},
        )
        obj = row.to_obj()
        assert obj["statistic"] == 0.25
        assert obj["detail"]["mass"] == "1/3"
        assert obj["detail"]["count"] == 4
        json.dumps(obj)
