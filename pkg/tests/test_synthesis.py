import unittest
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dropmix.configuration import (
    Configuration,
    apply_mix,
    average,
    is_near_final_partition,
    odd_scale,
    psi,
    size_bits,
)
from dropmix.constants import (
    GAMMA,
    INV_I,
    INV_I_PRIME_5,
    INV_I_PRIME_6,
    PATH_DIRECT,
    PATH_GREEDY,
    PATH_LAMBDA,
    PATH_POLY,
    PATH_POWER_OF_TWO,
    POWER_OF_TWO,
    SAFE,
)
from dropmix.graph import MixStep, fold_steps, metrics, simulate
from dropmix.mixability import NotMixableError, is_perfectly_mixable
from dropmix.strategies import Greedy, Poly
from dropmix.synthesis_base import (
    NearFinalPartition,
    SafetyContext,
    SynthesisError,
    build_E,
    find_safe_or_nearfinal_pair,
    is_blocking,
    is_lambda_safe,
    is_pr_safe,
    lambda_mix_subset,
    mix_near_final,
    mix_power_of_two,
    near_final_partition,
    poly_case,
    poly_step,
    same_parity_pairs,
    satisfies_invariant,
    small_near_final_partition,
    structured_near_final_partition,
)
from dropmix.utils import synthesize

FIG2 = ["1/16", "3/16", "7/32", "11/32", "7/16"]

EXAMPLES = [
    [0, 0, 0, 3, 7],
    FIG2,
    [0, 0, 1, 3],
    [0, 0, 0, 1, 2, 3],
    [0, 0, 0, 0, 0, 1, 6],
]


class TestSafety(unittest.TestCase):
    def test_context(self):
        self.assertEqual(SafetyContext.for_size(8).invariant_kind, POWER_OF_TWO)
        self.assertEqual(SafetyContext.for_size(8).pbar, ())
        self.assertEqual(SafetyContext.for_size(5).invariant_kind, INV_I_PRIME_5)
        self.assertEqual(SafetyContext.for_size(6).invariant_kind, INV_I_PRIME_6)
        self.assertEqual(SafetyContext.for_size(6).pbar, (3,))
        ctx = SafetyContext.for_size(15)
        self.assertEqual((ctx.invariant_kind, ctx.pbar), (INV_I, (3, 5)))

    def test_pr_safety(self):
        E = Configuration({3: 11, 10: 1, 16: 1, 18: 1, 28: 1})
        self.assertFalse(is_pr_safe(E, 10, 16, 5))
        self.assertTrue(is_pr_safe(E, 18, 28, 5))
        self.assertRaises(ValueError, is_pr_safe, E, 3, 10, 5)
        self.assertRaises(ValueError, is_pr_safe, E, 4, 10, 5)
        self.assertRaises(
            ValueError, is_pr_safe, Configuration({0: 3, 5: 2}), 0, 0, 5
        )

    def test_blocking(self):
        self.assertTrue(is_blocking(Configuration.from_values([0, 0, 0, 3, 7]), 5))
        self.assertFalse(is_blocking(Configuration.from_values([0, 0, 0, 6, 14]), 5))
        self.assertFalse(is_blocking(Configuration.from_values([0, 0, 0, 1, -1]), 5))
        self.assertTrue(is_blocking(Configuration({0: 4, 1: 1, 3: 1}), 6))

    def test_invariant(self):
        ctx = SafetyContext.for_size(7)
        self.assertTrue(satisfies_invariant(Configuration({0: 3, 2: 2, 4: 1, 6: 1}), ctx))
        self.assertFalse(satisfies_invariant(Configuration({0: 5, 7: 2}), ctx))
        self.assertFalse(
            satisfies_invariant(Configuration({0: 4, 2: 1, 4: 1, 8: 1}), ctx)
        )
        self.assertFalse(
            satisfies_invariant(Configuration({0: 6, 1: 1}), ctx)
        )

        ctx = SafetyContext.for_size(5)
        self.assertTrue(satisfies_invariant(Configuration({0: 3, 6: 1, 14: 1}), ctx))
        self.assertFalse(satisfies_invariant(Configuration({0: 3, 3: 1, 7: 1}), ctx))
        self.assertTrue(
            satisfies_invariant(Configuration({0: 3, 4: 1}), SafetyContext.for_size(4))
        )

    def test_same_parity_pairs(self):
        E = Configuration.from_values([0, 1, 2, 4, 5])
        self.assertEqual(same_parity_pairs(E), [(0, 4), (1, 5), (0, 2), (2, 4)])

    def test_lambda_safety(self):
        ctx = SafetyContext.for_size(5)
        E = Configuration({0: 3, 6: 1, 14: 1})
        self.assertTrue(is_lambda_safe(E, 0, 14, ctx))
        self.assertFalse(is_lambda_safe(E, 0, 0, ctx))
        self.assertFalse(is_lambda_safe(Configuration({0: 2, 1: 2}), 0, 1, ctx))


class TestNearFinal(unittest.TestCase):
    def test_structured(self):
        E = Configuration.from_values([1, 3, 2, 2, 0, 4])
        partition = structured_near_final_partition(E)
        self.assertIsNotNone(partition)
        self.assertTrue(is_near_final_partition(E, partition.blocks))
        self.assertEqual(mix_near_final(E, partition), [MixStep(0, 4), MixStep(1, 3)])

        E = Configuration({0: 3, 4: 3})
        partition = structured_near_final_partition(E)
        self.assertEqual(partition.blocks, (Configuration({0: 1, 4: 1}),) * 3)

        self.assertEqual(
            structured_near_final_partition(Configuration.from_values([0, 0, 1, 3])).blocks,
            (Configuration.from_values([0, 0, 1, 3]),),
        )

    def test_exhaustive(self):
        E = Configuration.from_values([0, 0, 3, 5, 2, 2])
        self.assertIsNone(structured_near_final_partition(E))
        partition = small_near_final_partition(E)
        self.assertIsNotNone(partition)
        self.assertTrue(is_near_final_partition(E, partition.blocks))
        self.assertEqual(near_final_partition(E), partition)

        self.assertIsNone(near_final_partition(Configuration({0: 2, 5: 3})))
        self.assertIsNone(near_final_partition(Configuration({0: 3, 6: 1, 14: 1})))
        self.assertRaises(
            ValueError, small_near_final_partition, Configuration({0: 22})
        )

    def test_invalid_partition(self):
        E = Configuration.from_values([0, 4, 1, 3])
        bad = NearFinalPartition(
            (Configuration.from_values([0, 1]), Configuration.from_values([3, 4]))
        )
        self.assertRaises(ValueError, mix_near_final, E, bad)


class TestMixHelpers(unittest.TestCase):
    def test_power_of_two(self):
        seq = mix_power_of_two(Configuration.from_values([0, 0, 1, 3]))
        self.assertEqual([str(step) for step in seq], ["mix 1 3 -> 2", "mix 0 2 -> 1", "mix 0 2 -> 1"])
        self.assertEqual(
            mix_power_of_two(Configuration.from_values([0, "1/2"])), [MixStep(0, "1/2")]
        )
        self.assertEqual(mix_power_of_two(Configuration({5: 4})), [])
        self.assertRaises(ValueError, mix_power_of_two, Configuration({0: 2, 3: 1}))

    @given(
        st.integers(min_value=0, max_value=3).flatmap(
            lambda k: st.lists(
                st.integers(min_value=0, max_value=64), min_size=2**k, max_size=2**k
            )
        )
    )
    def test_power_of_two_reaches_average(self, values):
        C = Configuration.from_values(values)
        seq = mix_power_of_two(C)
        mu = average(C)
        self.assertEqual(fold_steps(C, seq), Configuration({mu: C.n}))
        bound = max([c.exp for c in C.distinct()] + [mu.exp])
        self.assertTrue(all(step.result.exp <= bound for step in seq))

    def test_pair_finder(self):
        ctx = SafetyContext.for_size(5)
        choice = find_safe_or_nearfinal_pair(Configuration({0: 3, 6: 1, 14: 1}), ctx)
        self.assertEqual(choice, (0, 14, SAFE, "n=5 m=3 case 2"))
        self.assertEqual(choice.case, "n=5 m=3 case 2")
        self.assertRaises(
            ValueError,
            find_safe_or_nearfinal_pair,
            Configuration.from_values([0, 4, 1, 3]),
            SafetyContext.for_size(4),
        )

    def test_pair_finder_repeated_value_case(self):
        ctx = SafetyContext.for_size(5)
        E = Configuration({0: 1, 3: 1, 5: 2, 7: 1})
        self.assertEqual(
            find_safe_or_nearfinal_pair(E, ctx), (3, 5, SAFE, "n=5 m=4 case 1")
        )
        self.assertIsNotNone(near_final_partition(apply_mix(E, 3, 5)))

    def test_pair_finder_rejects_broken_invariant(self):
        # 5-congruent
        E = Configuration({0: 2, 10: 2, 20: 1})
        self.assertRaises(
            SynthesisError, find_safe_or_nearfinal_pair, E, SafetyContext.for_size(5)
        )

    def test_build_from_heavy_value(self):
        ctx = SafetyContext.for_size(7)
        prefix, E = build_E(Configuration({0: 3, 2: 1, 4: 1, 6: 1, 16: 1}), ctx)
        self.assertEqual(prefix, [MixStep(0, 2)])
        self.assertEqual(E, Configuration({0: 2, 1: 2, 4: 1, 6: 1, 16: 1}))
        self.assertTrue(satisfies_invariant(E, ctx))

    def test_build_from_singletons(self):
        ctx = SafetyContext.for_size(7)
        prefix, E = build_E(Configuration.from_values([0, 2, 4, 6, 8, 10, 12]), ctx)
        self.assertEqual(prefix, [MixStep(0, 2), MixStep(4, 6)])
        self.assertEqual(E, Configuration({1: 2, 5: 2, 8: 1, 10: 1, 12: 1}))

    def test_build_is_skipped(self):
        C_hat = Configuration({0: 3, 6: 1, 14: 1})
        self.assertEqual(build_E(C_hat, SafetyContext.for_size(5)), ([], C_hat))
        E = Configuration({0: 3, 2: 2, 4: 1, 6: 1})
        self.assertEqual(build_E(E, SafetyContext.for_size(7)), ([], E))

    def test_lambda_mix_exhausts_safe_pairs(self):
        ctx = SafetyContext.for_size(5)
        E = Configuration({0: 3, 6: 1, 14: 1})
        seq = lambda_mix_subset(E, E, ctx)
        self.assertTrue(seq)
        state = fold_steps(E, seq)
        self.assertEqual(state.total(), E.total())
        for x, y in same_parity_pairs(state):
            self.assertFalse(is_lambda_safe(state, x, y, ctx))


CASE_FIXTURES = [
    ({0: 4, 1: 2, 12: 1}, (0, 12), "n>=7 m=3 heavy"),
    ({0: 3, 1: 2, 13: 2}, (1, 13), "n>=7 m=3 opposite pair"),
    ({0: 3, 1: 2, 2: 1, 17: 1}, (0, 2), "n>=7 m=4 case 1 heavy"),
    ({0: 3, 1: 2, 3: 2, 5: 2}, (3, 5), "n>=7 m=4 case 1 two repeated"),
    ({0: 3, 1: 2, 3: 1, 9: 1}, (1, 9), "n>=7 m=4 case 1 one repeated"),
    ({0: 2, 2: 2, 5: 2, 14: 1}, (2, 14), "n>=7 m=4 case 2 three same parity"),
    ({0: 2, 1: 2, 3: 2, 6: 1}, (0, 6), "n>=7 m=4 case 2 lone value"),
    ({0: 3, 1: 2, 3: 2, 6: 1, 22: 1}, (0, 6), "n>=7 m>=5 case 1 heavy"),
    ({0: 2, 1: 2, 4: 2, 6: 1, 7: 1, 22: 1}, (4, 6), "n>=7 m>=5 case 2.1"),
    ({0: 2, 1: 2, 2: 1, 4: 1, 13: 1}, (0, 4), "n>=7 m>=5 case 2.2"),
    ({0: 2, 1: 2, 3: 1, 4: 1, 5: 1}, (1, 5), "n>=7 m>=5 case 2.2"),
    ({0: 2, 2: 2, 4: 1, 5: 1, 8: 1}, (2, 4), "n>=7 m>=5 case 2.3 repeated"),
    ({0: 2, 2: 2, 1: 1, 5: 1, 11: 1}, (1, 11), "n>=7 m>=5 case 2.3 safe singleton"),
    ({0: 2, 2: 2, 11: 1}, (0, 2), "n=5 m=3 case 1.1"),
    ({0: 2, 1: 2, 8: 1}, (0, 8), "n=5 m=3 case 1.2"),
    ({0: 3, 6: 1, 14: 1}, (0, 14), "n=5 m=3 case 2"),
    ({0: 2, 2: 1, 4: 1, 9: 1}, (0, 4), "n=5 m=4 case 1"),
    ({0: 2, 1: 1, 2: 1, 17: 1}, (0, 2), "n=5 m=4 case 2"),
    ({0: 2, 1: 1, 5: 1, 9: 1}, (1, 5), "n=5 m=4 case 3"),
    # (1, 9) would leave every droplet divisible by 5
    ({0: 2, 1: 1, 9: 1, 15: 1}, (1, 15), "n=5 m=4 case 3"),
    ({0: 1, 2: 1, 4: 1, 6: 1, 28: 1}, (0, 2), "n=5 m=5 case 1"),
    ({0: 1, 2: 1, 4: 1, 6: 1, 13: 1}, (0, 6), "n=5 m=5 case 2"),
    ({0: 1, 1: 1, 2: 1, 8: 1, 9: 1}, (0, 2), "n=5 m=5 case 3"),
    ({0: 3, 1: 1, 3: 1, 14: 1}, (0, 14), "n=6 m=4 case 2"),
    # dropping a 1 leads to (1, 3) and {1, 4:2, 9}; dropping a 2 does not
    ({1: 2, 2: 2, 3: 1, 9: 1}, (1, 9), "n=6 m=4 case 1"),
]


class TestCaseAnalysis(unittest.TestCase):
    def test_each_case_picks_its_pair(self):
        for counts, pair, case in CASE_FIXTURES:
            E = Configuration(counts)
            ctx = SafetyContext.for_size(E.n)
            with self.subTest(E=E, case=case):
                self.assertTrue(satisfies_invariant(E, ctx))
                self.assertIsNone(near_final_partition(E))
                choice = find_safe_or_nearfinal_pair(E, ctx)
                self.assertEqual(choice.case, case)
                self.assertEqual((choice.x, choice.y), pair)
                self.assertEqual(choice.tag, SAFE)
                self.assertTrue(satisfies_invariant(apply_mix(E, *pair), ctx))

    def test_opposite_parity_cases_use_either_parity(self):
        firsts = {
            find_safe_or_nearfinal_pair(
                Configuration(counts), SafetyContext.for_size(7)
            ).x
            for counts in ({0: 2, 1: 2, 2: 1, 4: 1, 13: 1}, {0: 2, 1: 2, 3: 1, 4: 1, 5: 1})
        }
        self.assertEqual(firsts, {0, 1})


class TestPolynomialCases(unittest.TestCase):
    ctx = SafetyContext.for_size(22)

    def test_far_mix(self):
        E = Configuration({0: 12, 20: 8, 30: 2})
        self.assertEqual(poly_case(E), ("2", 0))
        self.assertEqual(poly_step(E, self.ctx), [MixStep(0, 30)])

    def test_single_value_inside(self):
        E = Configuration({10: 12, 1: 4, 9: 3, 23: 3})
        self.assertEqual(poly_case(E), ("1.1", 0))
        seq = poly_step(E, self.ctx)
        self.assertLessEqual(len(seq), 2)
        self.assertEqual(seq, [MixStep(1, 23)])

    def test_rejects_small_sizes(self):
        E = Configuration({0: 3, 6: 1, 14: 1})
        self.assertRaises(ValueError, poly_step, E, SafetyContext.for_size(5))

    def test_fragments_shrink_psi(self):
        E = Configuration({0: 19, 1: 2, 20: 1})
        factor = 32 * GAMMA**2 * E.n
        cases = set()
        for _ in range(200):
            if structured_near_final_partition(E) is not None:
                break
            cases.add(poly_case(E)[0])
            seq = poly_step(E, self.ctx)
            self.assertTrue(seq)
            after = fold_steps(E, seq)
            self.assertTrue(
                satisfies_invariant(after, self.ctx)
                or structured_near_final_partition(after) is not None
            )
            before_psi = psi(E).to_fraction()
            self.assertLessEqual(psi(after).to_fraction() * factor, before_psi * (factor - 1))
            E = after
        self.assertIsNotNone(structured_near_final_partition(E))
        self.assertLessEqual({"1.2", "2", "3"}, cases)


class TestStrategies(unittest.TestCase):
    def test_power_of_two(self):
        steps = Poly(Configuration.from_values([0, 0, 1, 3]))
        self.assertEqual(steps.path, PATH_POWER_OF_TWO)
        self.assertEqual(len(steps), 3)
        self.assertEqual(steps.state, Configuration({1: 4}))
        self.assertIn("Poly(", repr(steps))

    def test_lambda_path(self):
        C_hat = Configuration({0: 5, 2: 1, 12: 1})
        steps = Poly(C_hat)
        self.assertEqual(steps.path, PATH_LAMBDA)
        self.assertEqual(steps.prefix_length, 1)
        self.assertEqual(steps[0], MixStep(0, 2))
        self.assertEqual(steps.state, Configuration({2: 7}))
        self.assertLessEqual(len(steps) - steps.prefix_length, steps.bound)

    def test_direct_path(self):
        steps = Poly(Configuration.from_values([1, 3, 2, 2, 0, 4]))
        self.assertEqual(steps.path, PATH_DIRECT)
        self.assertEqual(len(steps), 2)

    def test_polynomial_path(self):
        C_hat = Configuration({0: 20, 2: 1, 20: 1})
        steps = Poly(C_hat)
        self.assertEqual(steps.path, PATH_POLY)
        self.assertEqual(steps.state, Configuration({1: 22}))
        self.assertLessEqual(len(steps) - steps.prefix_length, steps.bound)

    def test_greedy(self):
        steps = Greedy(Configuration({0: 3, 6: 1, 14: 1}))
        self.assertEqual(steps.path, PATH_GREEDY)
        self.assertEqual(steps[0], MixStep(0, 14))
        self.assertEqual(steps.state, Configuration({4: 5}))

    def test_invalid_mix(self):
        steps = Greedy(Configuration.from_values([0, 0, 1, 3]))
        self.assertRaises(SynthesisError, steps.mix, 0, 1)
        self.assertRaises(SynthesisError, steps.mix, 1, 1)
        self.assertRaises(SynthesisError, steps.mix, "1/2", "5/2")

    def test_ceiling(self):
        steps = Poly(Configuration.from_values([0, 0, 1, 3]))
        s = size_bits(steps.initial)
        self.assertEqual(steps.ceiling(), 144 * 4**3 * s**2)
        self.assertRaises(SynthesisError, steps.check_ceiling, 2)

    def test_synthesis_error_carries_state(self):
        error = SynthesisError("stuck", Configuration({0: 1}))
        self.assertEqual(error.state, Configuration({0: 1}))
        self.assertIn("state={0}", str(error))


class TestSynthesize(unittest.TestCase):
    def check(self, values, strategy="Poly"):
        C = Configuration.from_values(values)
        result = synthesize(C, strategy)
        mu = average(C)
        outputs, node_values = simulate(result.graph, C)
        self.assertEqual(outputs, Configuration({mu: C.n}))
        bound = max([c.exp for c in C.distinct()] + [mu.exp]) + 1
        self.assertLessEqual(metrics(result.graph, C).max_precision, bound)
        self.assertEqual(fold_steps(C, result.sequence), Configuration({mu: C.n}))
        return result

    def test_examples(self):
        for values in EXAMPLES:
            with self.subTest(values=values):
                self.check(values)

    def test_greedy_examples(self):
        for values in ([0, 0, 0, 3, 7], [0, 0, 1, 3], [0, 0, 0, 0, 0, 1, 6]):
            with self.subTest(values=values):
                self.assertIn(
                    self.check(values, "greedy").path, (PATH_GREEDY, PATH_POWER_OF_TWO)
                )

    def test_paths(self):
        self.assertEqual(self.check([0, 0, 0, 3, 7]).path, PATH_LAMBDA)
        self.assertEqual(self.check([0, 0, 1, 3]).path, PATH_POWER_OF_TWO)
        self.assertEqual(self.check([0] * 20 + [1, 10]).path, PATH_POLY)
        self.assertEqual(self.check([0, 2, 4]).path, PATH_DIRECT)
        self.assertEqual(self.check(["3/8"] * 6).path, "wires")

    def test_frames(self):
        result = self.check([0, 0, 0, 3, 7])
        self.assertEqual(result.start, Configuration({0: 3, 6: 1, 14: 1}))
        self.assertEqual(result.frame_sequence[0], MixStep(0, 14))
        self.assertEqual(result.sequence[0], MixStep(0, 7))
        self.assertLessEqual(result.ceilings["mixes"], result.ceilings["bound"])

    def test_not_mixable(self):
        with self.assertRaises(NotMixableError) as cm:
            synthesize(Configuration.from_values([0, 0, 0, 5, 5]))
        self.assertEqual(cm.exception.verdict.b, 5)
        self.assertRaises(NotMixableError, synthesize, Configuration.from_values([0, 1, 5]))

    def test_accepts_plain_lists(self):
        result = synthesize([0, 1])
        self.assertEqual(result.sequence, [MixStep(0, 1)])


@pytest.mark.slow
class TestSynthesizeSweep(unittest.TestCase):
    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(st.integers(min_value=0, max_value=12), min_size=4, max_size=9),
        st.sampled_from(["Poly", "Greedy"]),
    )
    def test_random_mixable(self, values, strategy):
        C = Configuration.from_values(values)
        assume(is_perfectly_mixable(C))
        result = synthesize(C, strategy)
        self.assertEqual(
            simulate(result.graph, C)[0], Configuration({average(C): C.n})
        )

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=6), min_size=22, max_size=26))
    def test_polynomial_sizes(self, values):
        C = Configuration.from_values(values)
        assume(is_perfectly_mixable(C))
        result = synthesize(C)
        self.assertLessEqual(result.ceilings["mixes"], result.ceilings["bound"])
        self.assertEqual(fold_steps(C, result.sequence), Configuration({average(C): C.n}))

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.integers(min_value=0, max_value=12), min_size=5, max_size=7),
        st.sampled_from([3, 5, 7, 9]),
        st.sampled_from(["Poly", "Greedy"]),
    )
    def test_odd_scale_invariance(self, values, q, strategy):
        # integral mean
        values[0] += -sum(values) % len(values)
        C = Configuration.from_values(values)
        assume(C.m > 1 and is_perfectly_mixable(C))
        first = synthesize(C, strategy)
        second = synthesize(odd_scale(C, q), strategy)
        self.assertEqual(second.path, first.path)
        self.assertEqual(second.frame_sequence, first.frame_sequence)
        self.assertEqual(second.graph.nodes, first.graph.nodes)
        self.assertEqual(second.graph.edges, first.graph.edges)


def _random_mixable(rng, count):
    configs = []
    for _ in range(50 * count):
        n = int(rng.integers(5, 27))
        values = [int(v) for v in rng.integers(0, 65, size=n)]
        r = sum(values) % n
        values[-1] += -r if values[-1] >= r else n - r
        C = Configuration.from_values(values)
        if C.m > 1 and is_perfectly_mixable(C):
            configs.append(C)
            if len(configs) == count:
                break
    return configs


@pytest.mark.slow
class TestCeilings(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.configs = _random_mixable(np.random.default_rng(2024), 200)

    def test_enough_configurations(self):
        self.assertEqual(len(self.configs), 200)

    def test_mix_counts_within_bound(self):
        bounded = 0
        for C in self.configs:
            for strategy in ("Poly", "Greedy"):
                result = synthesize(C, strategy)
                with self.subTest(C=C, strategy=strategy):
                    self.assertEqual(
                        fold_steps(C, result.sequence),
                        Configuration({average(C): C.n}),
                    )
                    if "bound" in result.ceilings:
                        bounded += 1
                        self.assertLessEqual(
                            result.ceilings["mixes"], result.ceilings["bound"]
                        )
        self.assertGreater(bounded, 0)

    def test_psi_drops_by_half_squared_gap(self):
        for C in self.configs:
            mu = average(C).to_fraction()
            for strategy in ("Poly", "Greedy"):
                state = C
                for step in synthesize(C, strategy).sequence:
                    before = psi(state, mu)
                    state = apply_mix(state, step.a, step.b)
                    gap = (step.a - step.b).to_fraction()
                    self.assertEqual(before - psi(state, mu), gap * gap / 2)
                self.assertEqual(psi(state, mu), Fraction(0))
