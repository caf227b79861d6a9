import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, List, NamedTuple, Optional, Tuple

from dropmix.configuration import (
    Configuration,
    apply_mix,
    average,
    is_near_final_partition,
    parity_split,
    size_bits,
)
from dropmix.constants import (
    GAMMA,
    INV_I,
    INV_I_PRIME_5,
    INV_I_PRIME_6,
    NEAR_FINAL,
    POLY_THRESHOLD,
    POWER_OF_TWO,
    SAFE,
)
from dropmix.graph import MixingSequence, MixStep
from dropmix.numeric import Dyadic, is_power_of_two, odd_part, odd_prime_factors

logger = logging.getLogger(__name__)


class SynthesisError(RuntimeError):
    """An internal contradiction of the mixing case analysis. The message
    carries the configuration the synthesis got stuck on."""

    def __init__(self, message: str, state: Optional[Configuration] = None):
        self.state = state
        if state is not None:
            message = f"{message}; state={state}"
        super().__init__(message)


@dataclass(frozen=True)
class SafetyContext:
    """The odd prime factors of ``n`` and the invariant that mixing the
    normalized configuration has to maintain."""

    n: int
    pbar: Tuple[int, ...]
    invariant_kind: str

    @classmethod
    def for_size(cls, n: int) -> "SafetyContext":
        if is_power_of_two(n):
            kind = POWER_OF_TWO
        elif n == 5:
            kind = INV_I_PRIME_5
        elif n == 6:
            kind = INV_I_PRIME_6
        else:
            kind = INV_I
        return cls(n=n, pbar=tuple(odd_prime_factors(n)), invariant_kind=kind)


@dataclass(frozen=True)
class NearFinalPartition:
    blocks: Tuple[Configuration, ...]


def _ints(E: Configuration) -> List[Tuple[int, int]]:
    return [(int(c), f) for c, f in E.entries()]


def is_p_incongruent(E: Configuration, p: int) -> bool:
    return len({int(c) % p for c in E.distinct()}) > 1


def is_pbar_incongruent(E: Configuration, pbar: Iterable[int]) -> bool:
    return all(is_p_incongruent(E, p) for p in pbar)


def is_pr_safe(E: Configuration, x, y, p: int) -> bool:
    """
    True iff mixing ``x`` and ``y`` leaves ``E`` p-incongruent, that is,
    some other droplet is not congruent to ``½(x + y)`` modulo ``p``.

    :raise ValueError:
        If ``x`` and ``y`` are not distinct same-parity values of ``E`` or
        ``E`` is p-congruent.
    """
    x, y = int(Dyadic.coerce(x)), int(Dyadic.coerce(y))
    if x == y or (x - y) % 2 or x not in E or y not in E:
        raise ValueError(
            f"({x}, {y}) is not a pair of distinct same-parity values of {E}"
        )
    if not is_p_incongruent(E, p):
        raise ValueError(f"{E} is {p}-congruent")
    z = (x + y) // 2 % p
    for c, f in _ints(E):
        left = f - (c == x) - (c == y)
        if left > 0 and c % p != z:
            return True
    return False


def is_blocking(E: Configuration, n: int) -> bool:
    """The obstruction ``{(n−2):a1, a2, a3}`` with ``a1`` off-parity from
    ``a2, a3`` and ``a1 ≠ ½(a2 + a3)``, for ``n`` in {5, 6}."""
    if E.m != 3:
        return False
    entries = _ints(E)
    heavy = [c for c, f in entries if f == n - 2]
    if len(heavy) != 1:
        return False
    a1 = heavy[0]
    a2, a3 = (c for c, f in entries if c != a1)
    return (
        a2 % 2 == a3 % 2 != a1 % 2
        and 2 * a1 != a2 + a3
    )


def satisfies_invariant(E: Configuration, ctx: SafetyContext) -> bool:
    """Invariant (I) for ``n >= 7``, (I′) for ``n`` in {5, 6}; only
    integrality is required when ``n`` is a power of two."""
    mu = average(E)
    if not E.is_integral() or mu is None or not mu.is_integer():
        return False
    if ctx.invariant_kind == POWER_OF_TWO:
        return True
    if not is_pbar_incongruent(E, ctx.pbar):
        return False
    if ctx.invariant_kind == INV_I:
        return sum(1 for _, f in E.entries() if f >= 2) >= 2
    return not is_blocking(E, ctx.n)


def structured_near_final_partition(
    E: Configuration,
) -> Optional[NearFinalPartition]:
    """
    A near-final partition of ``E`` for the shapes that arise while mixing:

    * all droplets equal (one singleton block per droplet),
    * ``n`` a power of two (one block),
    * two concentrations ``{f1:c1, f2:c2}`` with ``σ | f1, f2`` for the
      odd part ``σ`` of ``n`` (``σ`` blocks ``{f1/σ:c1, f2/σ:c2}``),
    * droplets at the average plus mirrored pairs ``{x, 2μ − x}`` of
      equal multiplicity.

    Returns ``None`` for anything else.
    """
    mu = average(E)
    if mu is None or E.n == 0:
        return None
    n = E.n
    if E.m == 1:
        return NearFinalPartition(
            tuple(Configuration({mu: 1}) for _ in range(n))
        )
    if is_power_of_two(n):
        return NearFinalPartition((E,))
    if E.m == 2:
        sigma = odd_part(n)
        (c1, f1), (c2, f2) = E.entries()
        if f1 % sigma == 0 and f2 % sigma == 0:
            block = Configuration({c1: f1 // sigma, c2: f2 // sigma})
            blocks = tuple(block for _ in range(sigma))
            if is_near_final_partition(E, blocks):
                return NearFinalPartition(blocks)
        return None
    blocks = [Configuration({mu: 1}) for _ in range(E.get(mu))]
    for c, f in E.entries():
        if c >= mu:
            break
        mirror = mu + mu - c
        if E.get(mirror) != f:
            return None
        blocks.extend(Configuration({c: 1, mirror: 1}) for _ in range(f))
    if sum(block.n for block in blocks) != n:
        return None
    return NearFinalPartition(tuple(blocks))


def _block_candidates(entries, start, size, total):
    """Yields multiplicity vectors (over ``entries[start:]``) choosing
    ``size`` droplets that sum to ``total``."""
    if size == 0:
        if total == 0:
            yield ()
        return
    if start == len(entries):
        return
    value, count = entries[start]
    rest = [v for v, c in entries[start + 1:] for _ in range(c)]
    for take in range(min(count, size), -1, -1):
        left = size - take
        if left > len(rest):
            continue
        remaining = total - take * value
        # rest is ascending
        if left and not (sum(rest[:left]) <= remaining <= sum(rest[-left:])):
            continue
        if not left and remaining:
            continue
        for tail in _block_candidates(entries, start + 1, left, remaining):
            yield (take,) + tail


def small_near_final_partition(
    E: Configuration,
) -> Optional[NearFinalPartition]:
    """
    Exhaustive near-final test for ``n`` below the polynomial threshold.

    Blocks of equal size can be merged, so a near-final configuration has a
    partition whose block sizes are the powers of two in the binary
    expansion of ``n``.
    """
    if E.n >= POLY_THRESHOLD:
        raise ValueError(
            f"Exhaustive near-final search is limited to n < {POLY_THRESHOLD}"
        )
    mu = average(E)
    if mu is None or (E.n & 1 and mu not in E):
        return None
    sizes = [1 << k for k in range(E.n.bit_length() - 1, -1, -1) if E.n >> k & 1]

    def search(rest: Configuration, sizes: List[int]):
        if not sizes:
            return []
        size = sizes[0]
        entries = rest.entries()
        for take in _block_candidates(entries, 0, size, mu * size):
            block = Configuration(
                (value, k) for (value, _), k in zip(entries, take)
            )
            remainder = Configuration(
                (value, f - k) for (value, f), k in zip(entries, take)
            )
            found = search(remainder, sizes[1:])
            if found is not None:
                return [block] + found
        return None

    blocks = search(E, sizes)
    if blocks is None:
        return None
    return NearFinalPartition(tuple(blocks))


def near_final_partition(E: Configuration) -> Optional[NearFinalPartition]:
    partition = structured_near_final_partition(E)
    if partition is None and E.n < POLY_THRESHOLD:
        partition = small_near_final_partition(E)
    return partition


def _pair_steps(pairs: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    return sorted(pairs, key=lambda p: (-(p[1] - p[0]), p[0], p[1]))


def same_parity_pairs(E: Configuration) -> List[Tuple[int, int]]:
    """Distinct same-parity value pairs ``(x, y)``, ``x < y``, farthest
    apart first, ties by smaller values."""
    values = [int(c) for c in E.distinct()]
    return _pair_steps(
        (x, y) for x, y in combinations(values, 2) if (y - x) % 2 == 0
    )


def is_lambda_safe(E: Configuration, x: int, y: int, ctx: SafetyContext) -> bool:
    """True iff mixing ``x, y`` preserves the invariant of ``ctx``."""
    if x == y or (x - y) % 2:
        return False
    return satisfies_invariant(apply_mix(E, x, y), ctx)


NearFinalTest = Callable[[Configuration], Optional[NearFinalPartition]]


class PairChoice(NamedTuple):
    """A pair picked by the case analysis, its tag and the case that
    picked it."""

    x: int
    y: int
    tag: str
    case: str


def _ordered(E: Configuration) -> List[Tuple[int, int]]:
    # multiplicity descending, then value
    return sorted(_ints(E), key=lambda e: (-e[1], e[0]))


def _same_parity(x: int, y: int) -> bool:
    return (x - y) % 2 == 0


def _farthest_first(x: int, candidates: Iterable[int]) -> List[int]:
    return sorted(candidates, key=lambda c: (-abs(c - x), c))


def _nearest(x: int, candidates: Iterable[int]) -> int:
    return min(candidates, key=lambda c: (abs(c - x), c))


def _pbar_safe(E: Configuration, x: int, y: int, pbar: Iterable[int]) -> bool:
    return all(is_pr_safe(E, x, y, p) for p in pbar)


def _two_repeated(ei: int, ej: int, ek: int) -> Tuple[int, int]:
    """Three same-parity values, ``ei`` and ``ej`` repeated: whichever of
    the two is nearer ``ek`` mixes with it."""
    if abs(ei - ek) <= abs(ej - ek):
        return ei, ek
    return ej, ek


def _one_repeated(
    entries: List[Tuple[int, int]], ei: int, ej: int, ek: int
) -> Tuple[int, int]:
    """``ei`` repeated, ``ej`` and ``ek`` singletons of its parity: ``ej``
    unless the midpoint lands on another repeated value."""
    el = next(c for c, f in entries if f >= 2 and c != ei)
    ej, ek = _farthest_first(ei, (ej, ek))
    if ei + ej != 2 * el:
        return ei, ej
    return ei, ek


def _heavy_value_case(entries, label: str) -> Tuple[int, int, str]:
    """``f1 >= 3``: pair ``e1`` with a value of its parity among ``e2..e4``,
    otherwise work on the three opposite-parity values."""
    (e1, _), (e2, _), (e3, f3), (e4, _) = entries[:4]
    partners = [e for e in (e2, e3, e4) if _same_parity(e, e1)]
    if partners:
        return e1, _farthest_first(e1, partners)[0], f"{label} case 1 heavy"
    if f3 >= 2:
        return (*_two_repeated(e2, e3, e4), f"{label} case 1 two repeated")
    return (*_one_repeated(entries, e2, e3, e4), f"{label} case 1 one repeated")


def _invariant_i_pair(E: Configuration, ctx: SafetyContext) -> Tuple[int, int, str]:
    entries = _ordered(E)
    m = len(entries)
    (e1, f1), (e2, f2) = entries[:2]
    if m == 3:
        e3 = entries[2][0]
        partners = [e for e in (e2, e3) if _same_parity(e, e1)]
        if partners:
            return e1, _farthest_first(e1, partners)[0], "n>=7 m=3 heavy"
        return e2, e3, "n>=7 m=3 opposite pair"

    if m == 4:
        if f1 >= 3:
            return _heavy_value_case(entries, "n>=7 m=4")
        # f1 = f2 = f3 = 2, f4 = 1
        e3, e4 = entries[2][0], entries[3][0]
        same = [e for e in (e2, e3, e4) if _same_parity(e, e1)]
        if len(same) >= 2:
            ei, ej, ek = [e1] + same[:2]
            return (*_two_repeated(ei, ej, ek), "n>=7 m=4 case 2 three same parity")
        if not same:
            return (*_two_repeated(e2, e3, e4), "n>=7 m=4 case 2 three same parity")
        partner = next(e for e in (e1, e2, e3) if _same_parity(e, e4))
        return partner, e4, "n>=7 m=4 case 2 lone value"

    if f1 >= 3:
        return _heavy_value_case(entries, "n>=7 m>=5")
    f3 = entries[2][1]
    if f3 == 2:
        first = [c for c, _ in entries[:5]]
        for parity in (0, 1):
            triple = [c for c in first if c % 2 == parity]
            if len(triple) >= 3:
                break
        counts = dict(entries)
        ei, ej, ek = triple[:3]
        if counts[ej] >= 2:
            return (*_two_repeated(ei, ej, ek), "n>=7 m>=5 case 2.1")
        return (*_one_repeated(entries, ei, ej, ek), "n>=7 m>=5 case 2.1")
    if not _same_parity(e1, e2):
        e3, e4, e5 = (c for c, _ in entries[2:5])
        for ej, ek in ((e3, e4), (e3, e5), (e4, e5)):
            if _same_parity(ej, ek):
                break
        ei = e1 if _same_parity(e1, ej) else e2
        return (*_one_repeated(entries, ei, ej, ek), "n>=7 m>=5 case 2.2")
    singles = [c for c, _ in entries[2:]]
    same = [e for e in singles if _same_parity(e, e1)]
    if same:
        return (*_two_repeated(e1, e2, same[0]), "n>=7 m>=5 case 2.3 repeated")
    for ei in singles:
        others = [e for e in singles if e != ei]
        if all(_pbar_safe(E, ei, ej, ctx.pbar) for ej in others):
            partner = _farthest_first(ei, others)[0]
            return ei, partner, "n>=7 m>=5 case 2.3 safe singleton"
    raise SynthesisError("case 2.3: every singleton is in an unsafe pair", E)


def _small_pair(
    F: Configuration, E: Configuration, ctx: SafetyContext, label: str
) -> Tuple[int, int, str]:
    """The five-droplet case analysis on ``F``; safety is judged on ``E``,
    which is ``F`` for ``n = 5`` and ``F`` plus one droplet for ``n = 6``."""
    entries = _ordered(F)
    m = len(entries)
    e1, f1 = entries[0]
    if m == 3:
        e2, e3 = entries[1][0], entries[2][0]
        if f1 == 2:
            if _same_parity(e1, e2):
                return e1, e2, f"{label} m=3 case 1.1"
            partner = e1 if _same_parity(e1, e3) else e2
            return partner, e3, f"{label} m=3 case 1.2"
        partners = [e for e in (e2, e3) if _same_parity(e, e1)]
        if not partners:
            raise SynthesisError(
                f"{label} m=3 case 2: no value shares the parity of {e1}", E
            )
        return e1, _farthest_first(e1, partners)[0], f"{label} m=3 case 2"

    if m == 4:
        others = [c for c, _ in entries[1:]]
        same = [e for e in others if _same_parity(e, e1)]
        if len(same) >= 2:
            ej, ek = _farthest_first(e1, same)[:2]
            rest = next(e for e in others if e not in (ej, ek))
            partner = ej if e1 + ej != 2 * rest else ek
            return e1, partner, f"{label} m=4 case 1"
        if same:
            return e1, same[0], f"{label} m=4 case 2"
        e2, e3, e4 = others
        partner = e3 if _pbar_safe(E, e2, e3, ctx.pbar) else e4
        return e2, partner, f"{label} m=4 case 3"

    if m != 5:
        raise SynthesisError(f"{label}: {m} distinct values", E)
    values = [c for c, _ in entries]
    S = [c for c in values if _same_parity(c, values[0])]
    if len(S) < 3:
        S = [c for c in values if not _same_parity(c, values[0])]
    e1 = next(
        (s for s in S if all(_pbar_safe(E, s, t, ctx.pbar) for t in S if t != s)),
        None,
    )
    if e1 is None:
        raise SynthesisError(f"{label} m=5: more than one unsafe pair", E)
    rest = [s for s in S if s != e1]
    if len(S) == 5:
        return e1, _nearest(e1, rest), f"{label} m=5 case 1"
    if len(S) == 4:
        e5 = next(c for c in values if c not in S)
        candidates = _farthest_first(e1, rest)
        partner = next((e for e in candidates if e1 + e != 2 * e5), candidates[0])
        return e1, partner, f"{label} m=5 case 2"
    return e1, _nearest(e1, rest), f"{label} m=5 case 3"


def _case_pairs(E: Configuration, ctx: SafetyContext) -> List[Tuple[int, int, str]]:
    if ctx.invariant_kind == INV_I:
        return [_invariant_i_pair(E, ctx)]
    if ctx.invariant_kind == INV_I_PRIME_5:
        return [_small_pair(E, E, ctx, "n=5")]
    # n = 6: drop one droplet of a most repeated value, each in turn
    entries = _ordered(E)
    pairs = []
    for dropped, f in entries:
        if f < entries[0][1]:
            break
        F = Configuration(
            {c: g - (c == dropped) for c, g in entries if g - (c == dropped) > 0}
        )
        pairs.append(_small_pair(F, E, ctx, "n=6"))
    return pairs


def _scan_pair(
    E: Configuration, ctx: SafetyContext, near_final: "NearFinalTest"
) -> Optional[Tuple[int, int]]:
    for x, y in same_parity_pairs(E):
        mixed = apply_mix(E, x, y)
        if satisfies_invariant(mixed, ctx) or near_final(mixed) is not None:
            return x, y
    return None


def find_safe_or_nearfinal_pair(
    E: Configuration,
    ctx: SafetyContext,
    near_final: NearFinalTest = near_final_partition,
) -> PairChoice:
    """
    A same-parity pair whose mixing preserves the invariant (tag
    ``Safe``) or makes ``E`` near-final (tag ``NearFinal``), picked by the
    case analysis on multiplicities and parities: ``n >= 7`` by the number
    of distinct values, ``n = 5`` directly and ``n = 6`` on ``E`` less one
    droplet of a most repeated value, trying each such value. Where a case
    leaves a choice of partner, the farthest one is taken.

    :raise ValueError:
        If ``E`` already is near-final.

    :raise SynthesisError:
        If ``E`` breaks the invariant or the pair of its case qualifies
        neither way.
    """
    if near_final(E) is not None:
        raise ValueError(f"{E} is already near-final")
    if not satisfies_invariant(E, ctx):
        raise SynthesisError("configuration breaks the invariant", E)
    candidates = _case_pairs(E, ctx)
    for x, y, case in candidates:
        x, y = min(x, y), max(x, y)
        mixed = apply_mix(E, x, y)
        if satisfies_invariant(mixed, ctx):
            tag = SAFE
        elif near_final(mixed) is not None:
            tag = NEAR_FINAL
        else:
            logger.debug("%s: (%d, %d) does not qualify", case, x, y)
            continue
        logger.debug("%s picks (%d, %d) tagged %s", case, x, y, tag)
        return PairChoice(x, y, tag, case)
    x, y, case = candidates[0]
    other = _scan_pair(E, ctx, near_final)
    hint = f", while {other} would qualify" if other else ""
    raise SynthesisError(
        f"{case}: ({x}, {y}) keeps neither the invariant nor a "
        f"near-final partition{hint}",
        E,
    )


def mix_power_of_two(E: Configuration) -> MixingSequence:
    """
    Perfectly mixes a power-of-two sized configuration by repeatedly
    mixing the farthest-apart same-parity pair. Values are taken in the
    integer frame ``2**d`` where ``d`` covers the values and the average,
    so the emitted mixes add no precision.
    """
    n = E.n
    if not is_power_of_two(n):
        raise ValueError(f"Configuration size {n} is not a power of two")
    mu = average(E)
    d = max([c.exp for c in E.distinct()] + [mu.exp])
    counts = {c.num << (d - c.exp): f for c, f in E.entries()}
    seq: MixingSequence = []
    while len(counts) > 1:
        best = None
        for parity in (0, 1):
            values = sorted(v for v in counts if v % 2 == parity)
            if len(values) >= 2:
                pair = (values[0], values[-1])
                key = (-(pair[1] - pair[0]), pair)
                if best is None or key < best[0]:
                    best = (key, pair)
        if best is None:
            raise SynthesisError(
                "no same-parity pair in a power-of-two block", E
            )
        x, y = best[1]
        z = (x + y) // 2
        for v in (x, y):
            counts[v] -= 1
            if not counts[v]:
                del counts[v]
        counts[z] = counts.get(z, 0) + 2
        seq.append(MixStep(Dyadic(x, d), Dyadic(y, d)))
    return seq


def mix_near_final(
    E: Configuration, partition: NearFinalPartition
) -> MixingSequence:
    """
    :raise ValueError:
        If ``partition`` is not a near-final partition of ``E``.
    """
    if not is_near_final_partition(E, partition.blocks):
        raise ValueError(f"Invalid near-final partition of {E}")
    seq: MixingSequence = []
    for block in partition.blocks:
        if block.m > 1:
            seq.extend(mix_power_of_two(block))
    return seq


def _unsafe_members(E: Configuration, ctx: SafetyContext) -> set:
    """Values involved in at least one p̄-unsafe same-parity pair."""
    involved = set()
    for x, y in same_parity_pairs(E):
        if not all(is_pr_safe(E, x, y, p) for p in ctx.pbar):
            involved.update((x, y))
    return involved


def build_E(
    C_hat: Configuration, ctx: SafetyContext
) -> Tuple[MixingSequence, Configuration]:
    """
    Turns ``Ĉ`` into a configuration with two distinct non-singletons
    using at most two mixes, keeping it p̄-incongruent. Only ``n >= 7``
    needs it; other sizes start from ``Ĉ`` itself.

    :raise SynthesisError:
        If fewer singletons than required avoid the p̄-unsafe pairs.
    """
    if ctx.invariant_kind != INV_I:
        return [], C_hat
    entries = _ints(C_hat)
    heavy = [c for c, f in entries if f >= 2]
    if len(heavy) >= 2:
        return [], C_hat
    singles = [c for c, f in entries if f == 1]
    prefix: MixingSequence = []
    E = C_hat

    if not heavy:
        # every droplet distinct: mix a safe singleton with its nearest
        unsafe = _unsafe_members(E, ctx)
        safe = [c for c in singles if c not in unsafe]
        if not safe:
            raise SynthesisError("no singleton outside the unsafe pairs", E)
        b = safe[0]
        c = min((v for v in singles if v != b), key=lambda v: (abs(v - b), v))
        prefix.append(MixStep(Dyadic(b), Dyadic(c)))
        E = apply_mix(E, b, c)
        entries = _ints(E)
        heavy = [v for v, f in entries if f >= 2]
        singles = [v for v, f in entries if f == 1]

    (a,) = heavy
    if E.get(a) >= 3:
        b = singles[0]
        prefix.append(MixStep(Dyadic(a), Dyadic(b)))
        E = apply_mix(E, a, b)
    else:
        unsafe = _unsafe_members(E, ctx)
        safe = [c for c in singles if c not in unsafe]
        if len(safe) < 3:
            raise SynthesisError(
                "fewer than three singletons outside the unsafe pairs", E
            )
        b, c, d = safe[:3]
        partner = c if (b + c) != 2 * a else d
        prefix.append(MixStep(Dyadic(b), Dyadic(partner)))
        E = apply_mix(E, b, partner)

    if not satisfies_invariant(E, ctx):
        raise SynthesisError("building E broke the invariant", E)
    return prefix, E


def _furthest_safe_pair(
    E: Configuration, A: Configuration, ctx: SafetyContext
) -> Optional[Tuple[int, int]]:
    for x, y in same_parity_pairs(A):
        if is_lambda_safe(E, x, y, ctx):
            return x, y
    return None


def _empty_segment(A: Configuration, k: int) -> Tuple[Fraction, Fraction]:
    low = A.min().to_fraction()
    width = (A.max().to_fraction() - low) / k
    values = [c.to_fraction() for c in A.distinct()]
    for i in range(k):
        left, right = low + i * width, low + (i + 1) * width
        if not any(left < v < right for v in values):
            return left, right
    raise SynthesisError(f"no empty segment among {k}", A)


def _lambda_mix(
    E: Configuration, A: Configuration, ctx: SafetyContext
) -> Tuple[MixingSequence, Configuration, Configuration]:
    seq: MixingSequence = []
    k = A.n
    while True:
        pair = _furthest_safe_pair(E, A, ctx)
        if pair is None:
            return seq, E, A
        x, y = pair
        diam = int(A.max() - A.min())
        if (y - x) * k >= diam:
            seq.append(MixStep(Dyadic(x), Dyadic(y)))
            E = apply_mix(E, x, y)
            A = apply_mix(A, x, y)
            continue
        left, right = _empty_segment(A, k)
        A1 = Configuration((c, f) for c, f in A.entries() if c <= left)
        A2 = Configuration((c, f) for c, f in A.entries() if c >= right)
        sub, E, A1 = _lambda_mix(E, A1, ctx)
        seq.extend(sub)
        sub, E, A2 = _lambda_mix(E, A2, ctx)
        seq.extend(sub)
        A = A1 + A2


def lambda_mix_subset(
    E: Configuration, A: Configuration, ctx: SafetyContext
) -> MixingSequence:
    """
    Mixes furthest-apart invariant-preserving pairs inside the
    sub-multiset ``A`` of ``E`` until no such pair is left. When the
    furthest pair is closer than ``diam(A)/|A|``, ``A`` is split at an
    empty segment of its range and both halves are mixed first.
    """
    seq, _, _ = _lambda_mix(E, A, ctx)
    return seq


def _acceptable(
    E: Configuration, x: int, y: int, ctx: SafetyContext
) -> Optional[str]:
    mixed = apply_mix(E, x, y)
    if satisfies_invariant(mixed, ctx):
        return SAFE
    if structured_near_final_partition(mixed) is not None:
        return NEAR_FINAL
    return None


def _furthest_acceptable(
    E: Configuration,
    part: Configuration,
    ctx: SafetyContext,
    at_least: Fraction = Fraction(0),
) -> Optional[Tuple[int, int, str]]:
    for x, y in same_parity_pairs(part):
        if y - x < at_least:
            return None
        tag = _acceptable(E, x, y, ctx)
        if tag is not None:
            return x, y, tag
    return None


def poly_case(E: Configuration) -> Tuple[str, int]:
    """
    The case of the polynomial strategy for ``E`` and the majority parity
    ``π`` it is decided on:

    * ``1.1``: one value ``a`` of parity ``π``, inside the range of the
      other parity;
    * ``1.2``: one value of parity ``π``, outside that range;
    * ``2``: several values of parity ``π`` spanning at least ``diam(E)/γ``;
    * ``3``: several values of parity ``π`` spanning less.
    """
    even, odd = parity_split(E)
    parity = 0 if even.n >= odd.n else 1
    pi, pibar = (even, odd) if parity == 0 else (odd, even)
    delta = E.max() - E.min()
    if pi.m == 1:
        a = pi.min()
        if pibar.n and pibar.min() < a < pibar.max():
            return "1.1", parity
        return "1.2", parity
    if (pi.max() - pi.min()) * GAMMA >= delta:
        return "2", parity
    return "3", parity


class _Fragment:
    """The configuration and the mixes of one polynomial fragment; every
    mix is checked to keep the invariant or reach a near-final partition."""

    def __init__(self, E: Configuration, ctx: SafetyContext) -> None:
        self.E = E
        self.ctx = ctx
        self.seq: MixingSequence = []
        self.limit = 256 * E.n * size_bits(E) + 1
        self.done = False

    def part(self, parity: int) -> Configuration:
        return parity_split(self.E)[parity]

    def mix(self, x: int, y: int, case: str) -> None:
        x, y = min(x, y), max(x, y)
        if x == y or (y - x) % 2:
            raise SynthesisError(
                f"polynomial case {case}: ({x}, {y}) is no pair", self.E
            )
        if _acceptable(self.E, x, y, self.ctx) is None:
            raise SynthesisError(
                f"polynomial case {case}: ({x}, {y}) keeps neither the "
                "invariant nor a near-final partition",
                self.E,
            )
        self.seq.append(MixStep(Dyadic(x), Dyadic(y)))
        self.E = apply_mix(self.E, x, y)
        if len(self.seq) > self.limit:
            raise SynthesisError("polynomial fragment exceeded its length", self.E)
        self.done = structured_near_final_partition(self.E) is not None


def _repeated_and_far_end(part: Configuration, E: Configuration, case: str):
    """A repeated value ``b`` of ``part`` and the end of ``part`` farthest
    from it, taking the ``b`` with the longest such reach."""
    lo, hi = int(part.min()), int(part.max())
    best = None
    for b, f in _ints(part):
        if f < 2:
            continue
        t = lo if b - lo >= hi - b else hi
        key = (-abs(t - b), b)
        if best is None or key < best[0]:
            best = (key, b, t)
    if best is None:
        raise SynthesisError(f"polynomial case {case}: no repeated value", E)
    return best[1], best[2]


def _poly_far_pair(frag: _Fragment, parity: int, case: str) -> None:
    """One mix across the part of the given parity: its two ends, or else
    the value that pairs acceptably with the end farther from it."""
    part = frag.part(parity)
    if part.m < 2:
        raise SynthesisError(
            f"polynomial case {case}: a single value of the part", frag.E
        )
    a, b = int(part.min()), int(part.max())
    if _acceptable(frag.E, a, b, frag.ctx) is not None:
        frag.mix(a, b, case)
        return
    best = None
    for c in (int(v) for v in part.distinct()):
        if c in (a, b):
            continue
        end = a if c - a >= b - c else b
        if _acceptable(frag.E, c, end, frag.ctx) is None:
            continue
        key = (-abs(end - c), c)
        if best is None or key < best[0]:
            best = (key, c, end)
    if best is None:
        raise SynthesisError(
            f"polynomial case {case}: no value pairs with the far end", frag.E
        )
    frag.mix(best[1], best[2], case)


def _poly_inside(frag: _Fragment, parity: int, a: int, case: str) -> None:
    # at most two mixes
    pibar = frag.part(1 - parity)
    b, t = _repeated_and_far_end(pibar, frag.E, case)
    if _acceptable(frag.E, b, t, frag.ctx) is not None:
        frag.mix(b, t, case)
        return
    lo, hi = int(pibar.min()), int(pibar.max())
    u = hi if t == lo else lo
    if b == u:
        inner = [
            c for c in (int(v) for v in pibar.distinct()) if min(b, t) < c < max(b, t)
        ]
        if not inner:
            raise SynthesisError(
                f"polynomial case {case}: no value between the ends", frag.E
            )
        c = _nearest(t, inner)
    else:
        c = u
    frag.mix(b, c, case)
    if frag.done or (c - a) * (t - a) > 0:
        return
    d = (b + c) // 2
    if d % 2 != parity:
        frag.mix(d, t, case)
    else:
        frag.mix(a, d, case)


def _poly_outside(frag: _Fragment, parity: int, a: int, case: str) -> None:
    pibar = frag.part(1 - parity)
    delta = int(frag.E.max() - frag.E.min())
    if int(pibar.max() - pibar.min()) * 2 * GAMMA >= delta:
        b, t = _repeated_and_far_end(pibar, frag.E, case)
        frag.mix(b, t, case)
        return
    # mix the other parity until a second value of parity π shows up
    while frag.part(parity).m < 2:
        choice = _furthest_acceptable(frag.E, frag.part(1 - parity), frag.ctx)
        if choice is None:
            raise SynthesisError(
                f"polynomial case {case}: no pair left before a second value "
                "of the majority parity",
                frag.E,
            )
        frag.mix(choice[0], choice[1], case)
        if frag.done:
            return
    others = [int(v) for v in frag.part(parity).distinct() if int(v) != a]
    frag.mix(a, _farthest_first(a, others)[0], case)


def _poly_single_value(frag: _Fragment, parity: int, prefix: str = "") -> None:
    pi, pibar = frag.part(parity), frag.part(1 - parity)
    if pi.m != 1:
        raise SynthesisError(
            f"polynomial case {prefix}1: {pi.m} values of the majority parity", frag.E
        )
    a = int(pi.min())
    if pibar.n and int(pibar.min()) < a < int(pibar.max()):
        _poly_inside(frag, parity, a, f"{prefix}1.1")
    else:
        _poly_outside(frag, parity, a, f"{prefix}1.2")


def _poly_majority_mix(frag: _Fragment, parity: int) -> None:
    while True:
        choice = _furthest_acceptable(frag.E, frag.part(parity), frag.ctx)
        if choice is None:
            break
        frag.mix(choice[0], choice[1], "3")
        if frag.done:
            return
    if frag.part(parity).n >= frag.part(1 - parity).n:
        _poly_single_value(frag, parity, "3.1/")
    else:
        _poly_far_pair(frag, 1 - parity, "3.2")


def poly_step(E: Configuration, ctx: SafetyContext) -> MixingSequence:
    """
    One fragment of the polynomial strategy for ``n >= 22``, chosen by
    :func:`poly_case`. Case ``2`` is a single far mix and case ``1.1`` at
    most two; cases ``1.2`` and ``3`` first mix inside one parity class.
    The fragment stops early once ``E`` is near-final and shrinks ``Ψ(E)``
    by a factor of at least ``1 − 1/(32γ²n)``.
    """
    if ctx.invariant_kind != INV_I or E.n < POLY_THRESHOLD:
        raise ValueError(f"poly_step needs Invariant (I) and n >= {POLY_THRESHOLD}")
    frag = _Fragment(E, ctx)
    if structured_near_final_partition(E) is not None:
        return frag.seq
    case, parity = poly_case(E)
    logger.debug("polynomial fragment case %s on %s", case, E)
    if case == "2":
        _poly_far_pair(frag, parity, case)
    elif case == "3":
        _poly_majority_mix(frag, parity)
    else:
        _poly_single_value(frag, parity)
    return frag.seq


class MixingStrategy(list):
    """
    A list-like perfect-mixing sequence for a normalized configuration;
    inherits the list class. Items are :class:`MixStep` objects in the
    normalized (integral) frame.

    The sequence is built at instantiation: first the configuration ``E``
    is prepared (for ``n >= 7`` by :func:`build_E`), then
    :meth:`_populate` is called. Strategies are subclasses that define
    their own :meth:`_populate` and share the helpers of this class.
    """

    name: str = "base"
    """The strategy name used by :func:`dropmix.utils.mixing_strategy`."""

    def __init__(
        self, E: Configuration, ctx: Optional[SafetyContext] = None
    ) -> None:
        """
        :param E:
            An integral configuration with an integral average:
            the power-of-two normalized configuration, or ``Ĉ``.

        :param ctx:
            The safety context; derived from ``E.n`` when omitted.
        """
        super().__init__()
        self.ctx = ctx or SafetyContext.for_size(E.n)
        self.start = E
        self.state = E
        self.path: Optional[str] = None
        self.prefix_length = 0
        self.bound: Optional[float] = None
        if self.ctx.invariant_kind == INV_I and near_final_partition(E) is None:
            prefix, _ = build_E(E, self.ctx)
            self.extend_steps(prefix)
            self.prefix_length = len(prefix)
        self.initial = self.state
        self._populate(self.state)

    def mix(self, x, y) -> MixStep:
        step = MixStep(x, y)
        if step.a == step.b or not (step.a.is_integer() and step.b.is_integer()):
            raise SynthesisError(f"invalid mix {step}", self.state)
        if (int(step.a) - int(step.b)) % 2:
            raise SynthesisError(f"mix of different parity {step}", self.state)
        self.state = apply_mix(self.state, step.a, step.b)
        self.append(step)
        logger.debug("%s", step)
        return step

    def extend_steps(self, seq: Iterable[MixStep]) -> None:
        for step in seq:
            if step.a.is_integer() and step.b.is_integer():
                self.mix(step.a, step.b)
            else:
                # power-of-two blocks may mix at a finer dyadic frame
                self.state = apply_mix(self.state, step.a, step.b)
                self.append(step)
                logger.debug("%s", step)

    def finish_near_final(self) -> bool:
        partition = near_final_partition(self.state)
        if partition is None:
            return False
        self.extend_steps(mix_near_final(self.state, partition))
        return True

    def check_ceiling(self, bound: float) -> None:
        self.bound = bound
        steps = len(self) - self.prefix_length
        if steps > bound:
            raise SynthesisError(
                f"{steps} mixes exceed the ceiling {bound:.3g}", self.initial
            )

    def ceiling(self) -> float:
        n = self.initial.n
        s = size_bits(self.initial)
        return 144 * n**3 * s**2

    def _populate(self, E: Configuration) -> None:
        """meta: public"""
        pass

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(start={self.start}, "
            f"steps={len(self)}, path={self.path!r})"
        )
