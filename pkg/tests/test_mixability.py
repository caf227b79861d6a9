import unittest

from hypothesis import assume, given
from hypothesis import strategies as st

from dropmix.configuration import Configuration, average, normalize_integral, offset
from dropmix.constants import (
    ALL_EQUAL,
    CONDITION_MC,
    MC_VIOLATION,
    N2_TRIVIAL,
    N3_VIOLATION,
    NON_DYADIC_MEAN,
    SMALL_N_RULE,
)
from dropmix.mixability import (
    NotMixableError,
    check_mc,
    check_mc_naive,
    is_b_congruent,
    is_perfectly_mixable,
)


def verdict(values):
    return is_perfectly_mixable(Configuration.from_values(values))


class TestPerfectMixability(unittest.TestCase):
    def test_short_circuits(self):
        self.assertEqual(verdict([0, 0, 1]).reason, NON_DYADIC_MEAN)
        self.assertFalse(verdict([0, 0, 1]))
        self.assertEqual(verdict([5, 5, 5, 5, 5, 5, 5]).reason, ALL_EQUAL)
        self.assertEqual(verdict([0, 1]).reason, N2_TRIVIAL)
        self.assertTrue(verdict(["1/8", "3/4"]))
        self.assertRaises(ValueError, is_perfectly_mixable, Configuration())

    def test_three_droplets(self):
        self.assertEqual(verdict([0, 2, 4]).reason, SMALL_N_RULE)
        self.assertTrue(verdict([0, 2, 4]))
        self.assertEqual(verdict([0, 1, 5]).reason, N3_VIOLATION)
        self.assertFalse(verdict([0, 1, 5]))

    def test_condition_mc(self):
        result = verdict([0, 0, 0, 3, 7])
        self.assertTrue(result)
        self.assertEqual(result.reason, CONDITION_MC)
        self.assertIsNone(result.b)

        result = verdict([0, 0, 0, 5, 5])
        self.assertFalse(result)
        self.assertEqual((result.reason, result.b), (MC_VIOLATION, 5))
        self.assertEqual(
            result.describe(), "not perfectly mixable: Condition (MC) fails for b=5"
        )

        self.assertEqual(verdict([0] * 8 + [9]).b, 3)
        self.assertEqual(verdict([0, 0, 0, 0, 3, 3]).b, 3)
        self.assertTrue(verdict([0, 0, 0, 4]))

    def test_fractional_inputs_are_normalized(self):
        self.assertFalse(verdict([0, 0, 0, "5/2", "5/2"]))
        self.assertTrue(
            verdict(["1/16", "3/16", "7/32", "11/32", "7/16"])
        )

    def test_negative_values(self):
        result = verdict([-3, -3, 2, 2, 2])
        self.assertFalse(result)
        self.assertEqual(result.b, 5)

    def test_not_mixable_error(self):
        error = NotMixableError(verdict([0, 0, 0, 5, 5]))
        self.assertIsInstance(error, ValueError)
        self.assertIn("b=5", str(error))
        self.assertEqual(error.verdict.b, 5)

    @given(
        st.lists(st.integers(min_value=-12, max_value=12), min_size=2, max_size=9),
        st.integers(min_value=-50, max_value=50),
    )
    def test_offset_invariance(self, values, shift):
        C = Configuration.from_values(values)
        self.assertEqual(
            bool(is_perfectly_mixable(C)), bool(is_perfectly_mixable(offset(C, shift)))
        )


class TestConditionMC(unittest.TestCase):
    def test_b_congruence(self):
        C = Configuration.from_values([1, 4, 10])
        self.assertTrue(is_b_congruent(C, 3))
        self.assertFalse(is_b_congruent(C, 5))
        self.assertTrue(is_b_congruent(C, 1))
        self.assertRaises(ValueError, is_b_congruent, C, 0)

    def test_requires_normalized_input(self):
        self.assertRaises(ValueError, check_mc, Configuration.from_values([0, 0, 1]))
        self.assertRaises(ValueError, check_mc, Configuration.from_values(["1/2", 1]))

    def test_naive_check(self):
        C = Configuration.from_values([0, 0, 0, 5, 5])
        self.assertEqual(check_mc_naive(C, 5), 5)
        self.assertIsNone(check_mc_naive(C, 3))
        self.assertIsNone(check_mc_naive(Configuration.from_values([0, 0, 0, 3, 7]), 7))

    @given(st.lists(st.integers(min_value=0, max_value=40), min_size=4, max_size=12))
    def test_prime_powers_suffice(self, values):
        C = Configuration.from_values(values)
        assume(C.m > 1 and average(C) is not None)
        C_int, _ = normalize_integral(C)
        limit = int(C_int.max())
        self.assertEqual(
            check_mc(C_int).mixable, check_mc_naive(C_int, limit) is None
        )
