import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, Union

_DYADIC_FORMAT = re.compile(
    r"""
    \A\s*
    (?P<sign>[-+]?)
    (?=\d|\.\d)
    (?P<num>\d*)
    (?:
       (?:\s*/\s*(?P<denom>\d+))?
    |
       (?:\.(?P<decimal>\d*))?
    )
    \s*\Z
""",
    re.VERBOSE,
)


class ParseError(ValueError):
    """Raised on malformed text input: concentrations, configuration,
    graph and 3DM instance files.

    :param line:
        1-based line number of the offending input, when known.

    :param field:
        Name of the offending field, when known.
    """

    def __init__(self, message: str, line: int = None, field: str = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class Dyadic:
    """
    An exact binary rational ``num / 2**exp``, the concentration type of
    every droplet.

    The value is always kept canonical: ``exp == 0`` or ``num`` is odd, so
    two dyadics are equal iff their fields are equal. Instances are
    immutable and hash like the equal :class:`int` or
    :class:`fractions.Fraction`, so they can be mixed freely with both as
    dictionary keys.

    >>> Dyadic(10, 5)
    Dyadic('5/16')
    >>> Dyadic.coerce('3/4') + 1
    Dyadic('7/4')
    """

    __slots__ = ("_num", "_exp")

    def __new__(cls, num: int = 0, exp: int = 0) -> "Dyadic":
        if not isinstance(num, int) or not isinstance(exp, int):
            raise TypeError(
                "Dyadic fields must be integers, got %s and %s"
                % (type(num).__name__, type(exp).__name__)
            )
        if exp < 0:
            raise ValueError(f"Dyadic exponent must be non-negative: {exp}")
        num = int(num)
        if num == 0:
            exp = 0
        elif exp:
            shift = min((num & -num).bit_length() - 1, exp)
            num >>= shift
            exp -= shift
        self = super(Dyadic, cls).__new__(cls)
        self._num = num
        self._exp = exp
        return self

    @classmethod
    def coerce(cls, value: Union["Dyadic", int, str, Fraction]) -> "Dyadic":
        """Converts a dyadic, an integer, a :class:`Fraction` with a
        power-of-two denominator, or a text literal to :class:`Dyadic`."""
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        if isinstance(value, str):
            return parse_dyadic(value)
        raise TypeError("Cannot convert type '%s' to Dyadic." % type(value))

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Dyadic":
        den = value.denominator
        if den & (den - 1):
            raise ValueError(
                f"{value} has no finite binary representation"
            )
        return cls(value.numerator, den.bit_length() - 1)

    @property
    def num(self) -> int:
        return self._num

    @property
    def exp(self) -> int:
        return self._exp

    def to_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._exp)

    def is_integer(self) -> bool:
        return self._exp == 0

    def parity(self) -> int:
        """0 for even and 1 for odd integers."""
        if self._exp:
            raise ValueError(f"{self} is not an integer")
        return self._num & 1

    def shift(self, k: int) -> "Dyadic":
        """Multiplies by ``2**k``; ``k`` may be negative."""
        if k >= 0:
            if k <= self._exp:
                return Dyadic(self._num, self._exp - k)
            return Dyadic(self._num << (k - self._exp))
        return Dyadic(self._num, self._exp - k)

    def _aligned(self, other: "Dyadic"):
        exp = max(self._exp, other._exp)
        return (
            self._num << (exp - self._exp),
            other._num << (exp - other._exp),
            exp,
        )

    @staticmethod
    def _operand(other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        return None

    def __add__(self, other):
        other = self._operand(other)
        if other is None:
            return NotImplemented
        a, b, exp = self._aligned(other)
        return Dyadic(a + b, exp)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._operand(other)
        if other is None:
            return NotImplemented
        a, b, exp = self._aligned(other)
        return Dyadic(a - b, exp)

    def __rsub__(self, other):
        other = self._operand(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._operand(other)
        if other is None:
            return NotImplemented
        return Dyadic(self._num * other._num, self._exp + other._exp)

    __rmul__ = __mul__

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self._num, self._exp)

    def __pos__(self) -> "Dyadic":
        return self

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self._num), self._exp)

    def __int__(self) -> int:
        # truncates toward zero, like Fraction
        return int(self.to_fraction())

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __bool__(self) -> bool:
        return self._num != 0

    def _compare(self, other):
        if isinstance(other, Fraction):
            return (self.to_fraction() > other) - (self.to_fraction() < other)
        other = self._operand(other)
        if other is None:
            return None
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other) -> bool:
        result = self._compare(other)
        if result is None:
            return NotImplemented
        return result == 0

    def __lt__(self, other) -> bool:
        result = self._compare(other)
        if result is None:
            return NotImplemented
        return result < 0

    def __le__(self, other) -> bool:
        result = self._compare(other)
        if result is None:
            return NotImplemented
        return result <= 0

    def __gt__(self, other) -> bool:
        result = self._compare(other)
        if result is None:
            return NotImplemented
        return result > 0

    def __ge__(self, other) -> bool:
        result = self._compare(other)
        if result is None:
            return NotImplemented
        return result >= 0

    def __hash__(self) -> int:
        if self._exp == 0:
            return hash(self._num)
        return hash(self.to_fraction())

    def __reduce__(self):
        return (self.__class__, (self._num, self._exp))

    def __str__(self) -> str:
        if self._exp == 0:
            return str(self._num)
        return f"{self._num}/{1 << self._exp}"

    def __repr__(self) -> str:
        return f"Dyadic('{self}')"


def parse_dyadic(text: str) -> Dyadic:
    """
    Parses an integer literal (``-3``), a fraction with a power-of-two
    denominator (``5/16``) or a binary-exact decimal (``0.375``).

    :raise ParseError:
        If the literal is malformed or not dyadic.
    """
    m = _DYADIC_FORMAT.match(text)
    if m is None:
        raise ParseError(f"Cannot parse concentration from string '{text}'")
    num = int(m.group("num") or "0")
    den = 1
    if m.group("denom"):
        den = int(m.group("denom"))
        if den == 0 or den & (den - 1):
            raise ParseError(
                f"Denominator of '{text.strip()}' is not a power of two"
            )
    elif m.group("decimal"):
        decimal = m.group("decimal")
        num = num * 10 ** len(decimal) + int(decimal)
        den = 10 ** len(decimal)
    if m.group("sign") == "-":
        num = -num
    try:
        return Dyadic.from_fraction(Fraction(num, den))
    except ValueError:
        raise ParseError(
            f"'{text.strip()}' has no finite binary representation"
        )


def format_dyadic(x: Dyadic) -> str:
    return str(x)


def mid(x: Dyadic, y: Dyadic) -> Dyadic:
    """The concentration produced by mixing one droplet of ``x`` with one
    droplet of ``y``."""
    return (Dyadic.coerce(x) + Dyadic.coerce(y)).shift(-1)


def precision(x: Dyadic) -> int:
    return Dyadic.coerce(x).exp


def max_precision(values: Iterable[Dyadic]) -> int:
    return max((precision(v) for v in values), default=0)


def odd_part(n: int) -> int:
    if n == 0:
        return 0
    n = abs(n)
    return n >> ((n & -n).bit_length() - 1)


def is_power_of_two(n: int) -> bool:
    return n > 0 and not n & (n - 1)


def prime_factors(n: int) -> List[int]:
    """Distinct prime factors of ``n`` by trial division, ascending."""
    factors = []
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


def odd_prime_factors(n: int) -> List[int]:
    return [p for p in prime_factors(n) if p != 2]


def odd_prime_power_candidates(n: int, cap: int) -> List[int]:
    """
    All ``b = p**k`` (``k >= 1``) with ``p`` an odd prime dividing ``n``
    and ``b <= cap``, sorted ascending.

    These are the only moduli Condition (MC) has to be tested for.

    >>> odd_prime_power_candidates(15, 28)
    [3, 5, 9, 25, 27]
    """
    if n < 1:
        raise ValueError(f"n must be positive: {n}")
    candidates = []
    for p in odd_prime_factors(n):
        b = p
        while b <= cap:
            candidates.append(b)
            b *= p
    return sorted(candidates)


def greatest_common_odd_divisor(values: Iterable[int]) -> int:
    """
    The largest odd integer dividing every value: the gcd with all factors
    of two removed.

    :raise ValueError:
        If every value is zero.
    """
    g = reduce(math.gcd, (int(v) for v in values), 0)
    if g == 0:
        raise ValueError(
            "greatest common odd divisor is undefined for all-zero values"
        )
    return odd_part(g)
