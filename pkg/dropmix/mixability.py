import logging
from dataclasses import dataclass
from typing import Optional

from dropmix.configuration import (
    Configuration,
    average,
    normalize_integral,
)
from dropmix.constants import (
    ALL_EQUAL,
    CONDITION_MC,
    MC_VIOLATION,
    N2_TRIVIAL,
    N3_VIOLATION,
    NON_DYADIC_MEAN,
    SMALL_N_RULE,
)
from dropmix.numeric import Dyadic, mid, odd_prime_power_candidates

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MixabilityVerdict:
    """Outcome of the perfect-mixability test.

    ``b`` is the witness modulus of an ``MCViolation``: a power of an odd
    prime factor of ``n`` for which ``C`` is b-congruent but ``C ∪ {μ}``
    is not. The verdict is truthy iff the configuration is mixable.
    """

    mixable: bool
    reason: str
    b: Optional[int] = None

    def __bool__(self) -> bool:
        return self.mixable

    def describe(self) -> str:
        if self.reason == MC_VIOLATION:
            return (
                f"not perfectly mixable: Condition (MC) fails for b={self.b}"
            )
        if self.reason == NON_DYADIC_MEAN:
            return (
                "not perfectly mixable: average has no finite binary "
                "representation"
            )
        if self.reason == N3_VIOLATION:
            return (
                "not perfectly mixable: three droplets whose middle value "
                "is not the average of the outer two"
            )
        return f"perfectly mixable ({self.reason})"


class NotMixableError(ValueError):
    """Raised when synthesis is requested for an unmixable configuration."""

    def __init__(self, verdict: MixabilityVerdict):
        self.verdict = verdict
        super().__init__(verdict.describe())


def is_b_congruent(A: Configuration, b: int) -> bool:
    """True iff every value of the integral configuration ``A`` lies in
    one residue class modulo ``b``."""
    if b < 1:
        raise ValueError(f"Modulus must be positive: {b}")
    residues = {int(c) % b for c in A.distinct()}
    return len(residues) <= 1


def _congruent_with(A: Configuration, extra: Dyadic, b: int) -> bool:
    residues = {int(c) % b for c in A.distinct()}
    residues.add(int(extra) % b)
    return len(residues) <= 1


def check_mc(C_int: Configuration) -> MixabilityVerdict:
    """
    Condition (MC) restricted to the powers of the odd prime factors of
    ``n`` that are at most ``c_max``. With negative values the bound
    widens to the diameter.

    :raise ValueError:
        If ``C_int`` or its average is not integral.
    """
    mu = average(C_int)
    if not C_int.is_integral() or mu is None or not mu.is_integer():
        raise ValueError(
            f"{C_int} must be integral with an integral average; normalize "
            "it first"
        )
    c_max = int(max(abs(C_int.min()), abs(C_int.max())))
    limit = max(c_max, int(C_int.max() - C_int.min()))
    for b in odd_prime_power_candidates(C_int.n, limit):
        if is_b_congruent(C_int, b) and not _congruent_with(C_int, mu, b):
            logger.debug("Condition (MC) fails for %s with b=%d", C_int, b)
            return MixabilityVerdict(False, MC_VIOLATION, b)
    return MixabilityVerdict(True, CONDITION_MC)


def check_mc_naive(C_int: Configuration, b_limit: int) -> Optional[int]:
    """Tests Condition (MC) for every odd ``b <= b_limit`` and returns the
    smallest violating ``b``, or ``None``."""
    mu = average(C_int)
    for b in range(3, b_limit + 1, 2):
        if is_b_congruent(C_int, b) and not _congruent_with(C_int, mu, b):
            return b
    return None


def is_perfectly_mixable(C: Configuration) -> MixabilityVerdict:
    """
    Decides whether ``C`` can be converted into ``n`` droplets of its
    average ``μ`` by a mixing graph.

    :raise ValueError:
        If ``C`` is empty.
    """
    if C.n == 0:
        raise ValueError("Mixability of an empty configuration")
    mu = average(C)
    if mu is None:
        return MixabilityVerdict(False, NON_DYADIC_MEAN)
    if C.m == 1:
        return MixabilityVerdict(True, ALL_EQUAL)
    if C.n <= 2:
        return MixabilityVerdict(True, N2_TRIVIAL)
    if C.n == 3:
        low, middle, high = C.droplets()
        if middle == mid(low, high):
            return MixabilityVerdict(True, SMALL_N_RULE)
        return MixabilityVerdict(False, N3_VIOLATION)
    C_int, _ = normalize_integral(C)
    return check_mc(C_int)
