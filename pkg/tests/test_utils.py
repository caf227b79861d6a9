import unittest
import warnings
from fractions import Fraction

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from hypothesis import assume, given, settings  # noqa: E402
from hypothesis import strategies as st  # noqa: E402

from dropmix.configuration import Configuration, average, offset  # noqa: E402
from dropmix.graph import MixStep, simulate  # noqa: E402
from dropmix.mixability import is_perfectly_mixable  # noqa: E402
from dropmix.numeric import is_power_of_two  # noqa: E402
from dropmix.strategies import Greedy, Poly  # noqa: E402
from dropmix.utils import (  # noqa: E402
    PerfectMix,
    depth_graph,
    list_supported_strategies,
    mixing_strategy,
    perfect_mix,
    psi_graph,
    sequence_frame,
    stats_series,
    synthesize,
)


class TestStrategyLookup(unittest.TestCase):
    def test_lookup(self):
        E = Configuration.from_values([0, 0, 1, 3])
        self.assertIsInstance(mixing_strategy("Poly", E), Poly)
        self.assertIsInstance(mixing_strategy("greedy", E), Greedy)
        self.assertIsInstance(mixing_strategy("GREEDY", E), Greedy)
        self.assertRaises(NotImplementedError, mixing_strategy, "Random", E)

    def test_list(self):
        self.assertEqual(list_supported_strategies(), ["Greedy", "Poly"])

    def test_strategy_is_a_list(self):
        steps = mixing_strategy("Poly", Configuration.from_values([0, 0, 1, 3]))
        self.assertEqual(
            [str(step) for step in steps],
            ["mix 1 3 -> 2", "mix 0 2 -> 1", "mix 0 2 -> 1"],
        )
        self.assertIsInstance(steps, list)

    def test_unknown_strategy_in_synthesis(self):
        self.assertRaises(
            NotImplementedError,
            synthesize,
            Configuration.from_values([0, 0, 1, 3]),
            "Random",
        )


class TestPerfectMix(unittest.TestCase):
    def test_perfect_mix(self):
        C = Configuration.from_values([0, 0, 0, 3, 7])
        self.assertEqual(simulate(perfect_mix(C), C)[0], Configuration({2: 5}))

    def test_deprecated_alias(self):
        C = Configuration.from_values([0, 1])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            G = PerfectMix(C)
        self.assertTrue(
            any(issubclass(w.category, DeprecationWarning) for w in caught)
        )
        self.assertEqual(simulate(G, C)[0], Configuration({"1/2": 2}))

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.integers(min_value=0, max_value=10), min_size=4, max_size=6),
        st.integers(min_value=-8, max_value=8),
    )
    def test_offset_invariance(self, values, shift):
        C = Configuration.from_values(values)
        assume(C.m > 1 and is_perfectly_mixable(C))
        first = synthesize(C)
        second = synthesize(offset(C, shift))
        if not is_power_of_two(C.n):
            self.assertEqual(first.frame_sequence, second.frame_sequence)
        self.assertEqual(first.path, second.path)
        self.assertEqual(
            [MixStep(step.a + shift, step.b + shift) for step in first.sequence],
            second.sequence,
        )
        self.assertEqual(first.graph.edges, second.graph.edges)


class TestReports(unittest.TestCase):
    def setUp(self):
        self.C = Configuration.from_values([0, 0, 0, 3, 7])
        self.seq = synthesize(self.C).sequence

    def test_sequence_frame(self):
        frame = sequence_frame(self.C, self.seq)
        self.assertEqual(
            list(frame.columns),
            ["step", "a", "b", "mid", "psi", "psi_drop", "max_precision"],
        )
        self.assertEqual(len(frame), len(self.seq))
        self.assertEqual(frame.loc[0, "a"], "0")
        self.assertEqual(frame.loc[0, "b"], "7")
        self.assertEqual(frame.loc[0, "mid"], "7/2")
        self.assertTrue(all(Fraction(v) > 0 for v in frame["psi_drop"]))
        self.assertEqual(frame["psi"].iloc[-1], "0")
        self.assertEqual(frame["max_precision"].max(), 1)

    def test_empty_frame(self):
        frame = sequence_frame(self.C, [])
        self.assertEqual(len(frame), 0)
        self.assertEqual(len(frame.columns), 7)

    def test_stats_series(self):
        series = stats_series(self.C)
        self.assertEqual(series["n"], 5)
        self.assertEqual(series["mu"], "2")
        self.assertEqual(series["psi"], "38")
        self.assertEqual(stats_series(Configuration.from_values([0, 0, 1]))["mu"], "1/3")

    def test_graphs(self):
        fig = psi_graph(self.C, self.seq, show=False)
        self.assertEqual(len(fig.axes[0].patches), len(self.seq) + 1)
        plt.close(fig)
        fig = depth_graph(3, show=False)
        heights = [bar.get_height() for bar in fig.axes[0].patches]
        self.assertEqual(heights, [4, 6])
        plt.close(fig)

    def test_average_of_result(self):
        result = synthesize(self.C)
        self.assertEqual(average(self.C), 2)
        self.assertEqual(result.record.inverse(average(result.start)), 2)
