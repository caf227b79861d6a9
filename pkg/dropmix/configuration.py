import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import (
    Any,
    Iterable,
    List,
    Mapping,
    Optional,
    Tuple,
    Union,
)

from dropmix.numeric import (
    Dyadic,
    ParseError,
    greatest_common_odd_divisor,
    max_precision,
    mid,
    parse_dyadic,
)

logger = logging.getLogger(__name__)

Value = Union[Dyadic, int, str, Fraction]


class Configuration(dict):
    """
    A dict-like multiset of droplet concentrations; inherits the dict class
    (so behaves similarly to a dict). The key is the concentration and the
    value is its multiplicity. Concentrations without a key are not present.

    When passing a concentration as a key, it can be expressed as one of the
    following types:

    * :class:`dropmix.numeric.Dyadic`,
    * an :class:`int`,
    * a :class:`fractions.Fraction` with a power-of-two denominator,
    * or a :class:`str` literal such as ``'5/16'`` or ``'0.375'``.

    The key is always stored as a :class:`Dyadic`.

    Configurations are immutable values: every operation of this module
    returns a new configuration, and the mutating dict methods raise
    :class:`TypeError`. They hash, so they can be used as search states.

    >>> C = Configuration.from_values([0, 0, 0, 3, 7])
    >>> C[0], C.n, C.m
    (3, 5, 3)
    >>> apply_mix(C, 3, 7)
    Configuration('{3:0, 2:5}')

    Two configurations are combined into their multiset union with ``+``:

    >>> Configuration.from_values([0, 1]) + Configuration.from_values([1])
    Configuration('{0, 2:1}')
    """

    def __init__(
        self,
        entries: Union[
            Mapping[Value, int], Iterable[Tuple[Value, int]], None
        ] = None,
    ) -> None:
        """
        :param entries:
            A mapping from concentration to multiplicity, or an iterable of
            ``(concentration, multiplicity)`` pairs. Repeated concentrations
            are merged. Use :meth:`from_values` to build a configuration
            from one value per droplet.
        """
        super().__init__()
        if entries is None:
            entries = ()
        elif isinstance(entries, Mapping):
            entries = entries.items()
        for key, count in entries:
            if not isinstance(count, int) or count < 0:
                raise ValueError(f"Invalid multiplicity {count!r} for {key}")
            if count == 0:
                continue
            key = self.__keytransform__(key)
            dict.__setitem__(self, key, dict.get(self, key, 0) + count)
        self._entries = tuple(sorted(dict.items(self)))

    @classmethod
    def from_values(cls, values: Iterable[Value]) -> "Configuration":
        """Builds a configuration holding one droplet per listed value."""
        counts: dict = {}
        for value in values:
            key = cls.__keytransform__(value)
            counts[key] = counts.get(key, 0) + 1
        return cls(counts)

    @staticmethod
    def __keytransform__(key: Value) -> Dyadic:
        """Transforms a concentration from one of the accepted types to
        :class:`Dyadic`, which is how it's stored by the class."""
        if isinstance(key, float):
            raise TypeError("Cannot convert type '%s' to Dyadic." % type(key))
        return Dyadic.coerce(key)

    def __contains__(self, key: Any) -> bool:  # type: ignore[override]
        try:
            return dict.__contains__(self, self.__keytransform__(key))
        except (TypeError, ValueError):
            return False

    def __getitem__(self, key: Value) -> int:
        return dict.__getitem__(self, self.__keytransform__(key))

    def get(self, key: Value, default: int = 0) -> int:  # type: ignore
        """Returns the multiplicity of ``key``, ``0`` by default. This
        method never raises a KeyError."""
        try:
            return dict.get(self, self.__keytransform__(key), default)
        except (TypeError, ValueError):
            return default

    def _immutable(self, *args, **kwargs):
        raise TypeError("Configuration objects are immutable")

    __setitem__ = _immutable
    __delitem__ = _immutable
    update = _immutable
    pop = _immutable
    popitem = _immutable
    clear = _immutable
    setdefault = _immutable

    def __hash__(self) -> int:  # type: ignore[override]
        return hash(self._entries)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._entries == other._entries
        return dict.__eq__(self, other)

    def __ne__(self, other: object) -> bool:
        return not self == other

    def __add__(self, other: "Configuration") -> "Configuration":
        if not isinstance(other, Configuration):
            raise TypeError(
                "Configurations can only be added with other configurations"
            )
        return Configuration(list(self._entries) + list(other._entries))

    def __reduce__(self):
        return (self.__class__, (list(self._entries),))

    def entries(self) -> List[Tuple[Dyadic, int]]:
        """``(concentration, multiplicity)`` pairs, ascending."""
        return list(self._entries)

    def distinct(self) -> List[Dyadic]:
        return [value for value, _ in self._entries]

    def droplets(self) -> List[Dyadic]:
        """One value per droplet, ascending."""
        return [value for value, count in self._entries for _ in range(count)]

    @property
    def n(self) -> int:
        return sum(count for _, count in self._entries)

    @property
    def m(self) -> int:
        return len(self._entries)

    def min(self) -> Dyadic:
        return self._entries[0][0]

    def max(self) -> Dyadic:
        return self._entries[-1][0]

    def total(self) -> Dyadic:
        return sum((value * count for value, count in self._entries), Dyadic(0))

    def is_integral(self) -> bool:
        return all(value.is_integer() for value, _ in self._entries)

    def to_text(self) -> str:
        """Renders the configuration in the file format, one entry per
        line."""
        lines = []
        for value, count in self._entries:
            lines.append(str(value) if count == 1 else f"{count}:{value}")
        return "\n".join(lines) + "\n"

    def __str__(self) -> str:
        return format_multiset(self)

    def __repr__(self) -> str:
        return f"Configuration('{format_multiset(self)}')"


def format_multiset(C: Configuration) -> str:
    """``{3:0, 3, 7}`` notation."""
    parts = [
        str(value) if count == 1 else f"{count}:{value}"
        for value, count in C.entries()
    ]
    return "{" + ", ".join(parts) + "}"


def parse_configuration_text(text: str) -> Configuration:
    """
    Parses the configuration file format: one entry per line, either
    ``<value>`` or ``<mult>:<value>``; ``#`` starts a comment and blank
    lines are ignored.

    :raise ParseError:
        On a malformed line or an empty configuration.
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        count = 1
        if ":" in line:
            head, line = line.split(":", 1)
            try:
                count = int(head.strip())
            except ValueError:
                raise ParseError(
                    f"Invalid multiplicity '{head.strip()}'",
                    line=lineno,
                    field="multiplicity",
                )
            if count < 1:
                raise ParseError(
                    f"Multiplicity must be positive: {count}",
                    line=lineno,
                    field="multiplicity",
                )
        try:
            value = parse_dyadic(line)
        except ParseError as e:
            raise ParseError(str(e), line=lineno, field="value")
        entries.append((value, count))
    if not entries:
        raise ParseError("Configuration is empty")
    return Configuration(entries)


def read_configuration(path) -> Configuration:
    with open(path, "r", encoding="UTF8") as fh:
        return parse_configuration_text(fh.read())


@dataclass(frozen=True)
class ConfigStats:
    """Statistics of a configuration.

    ``mu`` is ``None`` when the average has no finite binary
    representation; ``mean`` is always exact. ``psi`` is a :class:`Dyadic`
    whenever ``mu`` is.
    """

    n: int
    m: int
    mu: Optional[Dyadic]
    mean: Fraction
    psi: Union[Dyadic, Fraction]
    diam: Dyadic
    size_bits: float
    c_max: Dyadic

    @property
    def mu_is_dyadic(self) -> bool:
        return self.mu is not None


def mean(C: Configuration) -> Fraction:
    return C.total().to_fraction() / C.n


def average(C: Configuration) -> Optional[Dyadic]:
    """The dyadic average of ``C``, or ``None`` if it is not dyadic."""
    try:
        return Dyadic.from_fraction(mean(C))
    except ValueError:
        return None


def psi(C: Configuration, mu: Union[Dyadic, Fraction, None] = None):
    """``Σ (c − μ)²`` over droplets, the un-normalized variance."""
    if mu is None:
        mu = average(C)
        if mu is None:
            mu = mean(C)
    if isinstance(mu, Dyadic):
        return sum(((c - mu) * (c - mu) * f for c, f in C.entries()), Dyadic(0))
    return sum(
        ((c.to_fraction() - mu) ** 2 * f for c, f in C.entries()), Fraction(0)
    )


def size_bits(C: Configuration) -> float:
    """``s(C) = Σ log2(|c| + 2)`` over droplets."""
    return sum(
        f * math.log2(abs(c.to_fraction()) + 2) for c, f in C.entries()
    )


def stats(C: Configuration) -> ConfigStats:
    if C.n == 0:
        raise ValueError("Statistics of an empty configuration")
    mu = average(C)
    return ConfigStats(
        n=C.n,
        m=C.m,
        mu=mu,
        mean=mean(C),
        psi=psi(C, mu if mu is not None else mean(C)),
        diam=C.max() - C.min(),
        size_bits=size_bits(C),
        c_max=max(abs(C.min()), abs(C.max())),
    )


def offset(C: Configuration, x: Value) -> Configuration:
    x = Dyadic.coerce(x)
    return Configuration((c + x, f) for c, f in C.entries())


def scale_pow2(C: Configuration, delta: int) -> Configuration:
    return Configuration((c.shift(delta), f) for c, f in C.entries())


def odd_scale(C: Configuration, q: int) -> Configuration:
    """Multiplies every value by the odd integer ``q``."""
    if q % 2 == 0:
        raise ValueError(f"Scaling factor must be odd: {q}")
    return Configuration((c * q, f) for c, f in C.entries())


def apply_mix(C: Configuration, x: Value, y: Value) -> Configuration:
    """
    Mixes one droplet of ``x`` with one droplet of ``y``, producing two
    droplets of their midpoint.

    :raise KeyError:
        If ``x`` or ``y`` (twice, when equal) is not in ``C``.
    """
    x = Dyadic.coerce(x)
    y = Dyadic.coerce(y)
    counts = dict(C.entries())
    for value in (x, y):
        if counts.get(value, 0) < 1:
            raise KeyError(f"No droplet with concentration {value} in {C}")
        counts[value] -= 1
    z = mid(x, y)
    counts[z] = counts.get(z, 0) + 2
    return Configuration(counts)


def parity_split(C: Configuration) -> Tuple[Configuration, Configuration]:
    """``(even part, odd part)`` of an integral configuration."""
    even, odd = [], []
    for c, f in C.entries():
        if not c.is_integer():
            raise ValueError(f"Parity of non-integral concentration {c}")
        (odd if c.parity() else even).append((c, f))
    return Configuration(even), Configuration(odd)


@dataclass(frozen=True)
class NormalizationRecord:
    """
    The affine map from an original configuration to a normalized one:

        ``y = (x * 2**pow2_shift − offset) * (2 if doubled else 1) / odd_divisor``

    ``offset`` is expressed in the power-of-two scaled frame. The map is
    strictly increasing, so it preserves the order of droplets.
    """

    offset: Dyadic = Dyadic(0)
    pow2_shift: int = 0
    odd_divisor: int = 1
    doubled: bool = False

    def forward(self, x: Value) -> Dyadic:
        y = Dyadic.coerce(x).shift(self.pow2_shift) - self.offset
        if self.doubled:
            y = y.shift(1)
        return Dyadic.from_fraction(y.to_fraction() / self.odd_divisor)

    def inverse(self, y: Value) -> Dyadic:
        x = Dyadic.coerce(y) * self.odd_divisor
        if self.doubled:
            x = x.shift(-1)
        return (x + self.offset).shift(-self.pow2_shift)

    def replay(self, C: Configuration) -> Configuration:
        return Configuration((self.forward(c), f) for c, f in C.entries())

    def invert(self, C: Configuration) -> Configuration:
        return Configuration((self.inverse(c), f) for c, f in C.entries())

    def then(self, other: "NormalizationRecord") -> "NormalizationRecord":
        """Composes this power-of-two scaling with a following
        offset/odd-rescaling record."""
        if self.offset or self.odd_divisor != 1 or self.doubled:
            raise ValueError("Only a pure power-of-two record can be composed")
        if other.pow2_shift:
            raise ValueError("Cannot compose two power-of-two shifts")
        return NormalizationRecord(
            offset=other.offset,
            pow2_shift=self.pow2_shift,
            odd_divisor=other.odd_divisor,
            doubled=other.doubled,
        )


def normalize_integral(
    C: Configuration,
) -> Tuple[Configuration, NormalizationRecord]:
    """
    Rescales ``C`` by ``2**δ`` with ``δ = max(prec(C), prec(μ))`` so that
    every value and the average become integers.

    :raise ValueError:
        If the average has no finite binary representation.
    """
    mu = average(C)
    if mu is None:
        raise ValueError(
            "not perfectly mixable: average has no finite binary "
            "representation"
        )
    delta = max(max_precision(C.distinct()), mu.exp)
    return scale_pow2(C, delta), NormalizationRecord(pow2_shift=delta)


def normalize_hat(
    C_int: Configuration,
) -> Tuple[Configuration, NormalizationRecord]:
    """
    Builds ``Ĉ = 2 (C − min C) / θ`` with ``θ`` the greatest common odd
    divisor of the offsets. The result has only even values, and an
    integral average when ``C_int`` satisfies Condition (MC).

    :raise ValueError:
        If all droplets are equal, or ``C_int`` is not integral.
    """
    if not C_int.is_integral():
        raise ValueError(f"{C_int} is not integral")
    if C_int.m == 1:
        raise ValueError(f"{C_int} is already perfectly mixed")
    c1 = C_int.min()
    theta = greatest_common_odd_divisor(int(c - c1) for c in C_int.distinct())
    record = NormalizationRecord(offset=c1, odd_divisor=theta, doubled=True)
    C_hat = record.replay(C_int)
    logger.debug("normalized %s to %s with theta=%d", C_int, C_hat, theta)
    return C_hat, record


def is_near_final_partition(
    E: Configuration, blocks: Iterable[Configuration]
) -> bool:
    """Checks that ``blocks`` partition ``E`` into power-of-two sized
    multisets that all share the average of ``E``."""
    blocks = list(blocks)
    if not blocks:
        return False
    union = blocks[0]
    for block in blocks[1:]:
        union = union + block
    if union != E:
        return False
    mu = mean(E)
    for block in blocks:
        n = block.n
        if n == 0 or n & (n - 1) or mean(block) != mu:
            return False
    return True
