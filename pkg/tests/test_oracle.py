import itertools
import unittest

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dropmix.configuration import Configuration, normalize_integral
from dropmix.constants import (
    BUDGET_EXCEEDED,
    NON_DYADIC_MEAN,
    REACHABLE,
    UNREACHABLE_PROVEN,
    UNREACHABLE_WITHIN_BOUND,
)
from dropmix.graph import MixStep, fold_steps, metrics, simulate
from dropmix.hardness import dinh_counterexample
from dropmix.mixability import is_perfectly_mixable
from dropmix.oracle import (
    BudgetExceededError,
    depth1_decide,
    min_depth_search,
    mixable_bruteforce,
    reachable_bfs,
)

FIG1_INPUT = Configuration.from_values([0, 0, 0, 1, 1])
FIG1_OUTPUT = Configuration.from_values(["1/8", "5/16", "5/16", "1/2", "3/4"])


class TestReachability(unittest.TestCase):
    def test_reachable_with_witness(self):
        verdict = reachable_bfs(FIG1_INPUT, FIG1_OUTPUT)
        self.assertEqual(verdict.status, REACHABLE)
        self.assertTrue(verdict)
        self.assertGreater(verdict.states_explored, 0)
        self.assertEqual(fold_steps(FIG1_INPUT, verdict.sequence), FIG1_OUTPUT)

    def test_no_extra_precision_needed(self):
        verdict = reachable_bfs(FIG1_INPUT, FIG1_OUTPUT, extra_bits=0)
        self.assertEqual(verdict.status, REACHABLE)

    def test_unreachable_within_bound(self):
        verdict = reachable_bfs(
            Configuration.from_values([0, 1]), Configuration.from_values(["1/4", "3/4"])
        )
        self.assertEqual(verdict.status, UNREACHABLE_WITHIN_BOUND)
        self.assertFalse(verdict)
        self.assertIsNone(verdict.sequence)

    def test_unreachable_proven(self):
        verdict = reachable_bfs(
            Configuration.from_values([0, 0, 0, 5, 5]), Configuration({2: 5})
        )
        self.assertEqual(verdict.status, UNREACHABLE_PROVEN)
        verdict = reachable_bfs(
            Configuration.from_values([0, 1]), Configuration.from_values([0, 0])
        )
        self.assertEqual((verdict.status, verdict.states_explored), (UNREACHABLE_PROVEN, 0))
        verdict = reachable_bfs(
            Configuration.from_values([0, 1]), Configuration.from_values(["1/2"])
        )
        self.assertEqual(verdict.status, UNREACHABLE_PROVEN)

    def test_integral_only_search_misses_mixable_input(self):
        I = Configuration.from_values([0, 0, 0, 3, 7])
        T = Configuration({2: 5})
        verdict = reachable_bfs(I, T, extra_bits=0)
        self.assertNotEqual(verdict.status, REACHABLE)
        self.assertEqual(verdict.status, UNREACHABLE_WITHIN_BOUND)
        verdict = reachable_bfs(I, T, extra_bits=1)
        self.assertEqual(verdict.status, REACHABLE)
        self.assertEqual(fold_steps(I, verdict.sequence), T)

    def test_trivial(self):
        verdict = reachable_bfs(FIG1_INPUT, FIG1_INPUT)
        self.assertEqual((verdict.status, verdict.sequence), (REACHABLE, []))

    def test_budget(self):
        verdict = reachable_bfs(FIG1_INPUT, FIG1_OUTPUT, max_states=1)
        self.assertEqual(verdict.status, BUDGET_EXCEEDED)


class TestBruteforceMixability(unittest.TestCase):
    def test_examples(self):
        self.assertTrue(mixable_bruteforce(Configuration.from_values([0, 0, 0, 3, 7])))
        self.assertFalse(mixable_bruteforce(Configuration.from_values([0, 0, 0, 5, 5])))
        self.assertFalse(mixable_bruteforce(Configuration.from_values([0, 0, 0, 0, 3, 3])))
        self.assertFalse(mixable_bruteforce(Configuration.from_values([0, 0, 1])))
        self.assertTrue(mixable_bruteforce(Configuration.from_values([0, 0, 1, 3])))

    def test_budget(self):
        with self.assertRaises(BudgetExceededError) as cm:
            mixable_bruteforce(Configuration.from_values([0, 0, 0, 3, 7]), max_states=1)
        self.assertGreaterEqual(cm.exception.states_explored, 1)

    @pytest.mark.slow
    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=6), min_size=2, max_size=6))
    def test_agrees_with_condition_mc(self, values):
        C = Configuration.from_values(values)
        verdict = is_perfectly_mixable(C)
        if C.m == 1 or not verdict and verdict.reason == NON_DYADIC_MEAN:
            return
        C_int, _ = normalize_integral(C)
        self.assertEqual(bool(verdict), mixable_bruteforce(C_int))

    @pytest.mark.slow
    def test_agrees_with_condition_mc_exhaustively(self):
        for n in range(4, 9):
            for values in itertools.combinations_with_replacement(range(7), n):
                if sum(values) % n:
                    continue
                C = Configuration.from_values(values)
                if C.m == 1:
                    continue
                with self.subTest(values=values):
                    self.assertEqual(
                        bool(is_perfectly_mixable(C)), mixable_bruteforce(C)
                    )


class TestDepthSearch(unittest.TestCase):
    def test_small(self):
        I = Configuration.from_values([0, 0, 0, 1])
        T = Configuration({"1/4": 4})
        self.assertIsNone(min_depth_search(I, T, 1))
        G = min_depth_search(I, T, 2)
        self.assertEqual(simulate(G, I)[0], T)
        self.assertEqual(metrics(G, I).depth, 2)

    def test_trivial_and_mismatched(self):
        I = Configuration.from_values([0, 1])
        self.assertEqual(metrics(min_depth_search(I, I, 0), I).mixers, 0)
        self.assertIsNone(min_depth_search(I, Configuration.from_values([0, 0]), 3))
        self.assertIsNone(min_depth_search(I, Configuration.from_values([1]), 3))

    def test_budget(self):
        I = Configuration.from_values([0, 0, 0, 1])
        self.assertRaises(
            BudgetExceededError,
            min_depth_search,
            I,
            Configuration({"1/4": 4}),
            2,
            0,
        )

    @pytest.mark.slow
    def test_counterexample_depth(self):
        I, T, G = dinh_counterexample(2)
        self.assertEqual(metrics(G, I).depth, 4)
        found = min_depth_search(I, T, 4)
        self.assertIsNotNone(found)
        self.assertEqual(simulate(found, I)[0], T)


class TestDepthOne(unittest.TestCase):
    def test_pairs(self):
        self.assertEqual(
            depth1_decide(
                Configuration.from_values([0, 0, 1, 1]), Configuration({"1/2": 4})
            ),
            [MixStep(0, 1), MixStep(0, 1)],
        )
        self.assertEqual(
            depth1_decide(
                Configuration.from_values([0, 1, 1, 1]),
                Configuration.from_values(["1/2", "1/2", 1, 1]),
            ),
            [MixStep(0, 1)],
        )

    def test_wires_only(self):
        self.assertEqual(depth1_decide(FIG1_INPUT, FIG1_INPUT), [])

    def test_impossible(self):
        self.assertIsNone(
            depth1_decide(
                Configuration.from_values([0, 1]),
                Configuration.from_values(["1/4", "3/4"]),
            )
        )
        self.assertIsNone(depth1_decide(FIG1_INPUT, Configuration({"1/2": 2})))
        self.assertIsNone(depth1_decide(FIG1_INPUT, FIG1_OUTPUT))
