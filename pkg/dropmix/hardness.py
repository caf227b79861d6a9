import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from dropmix.configuration import Configuration
from dropmix.constants import MIXER, SINK, SOURCE
from dropmix.graph import MixingGraph
from dropmix.numeric import Dyadic, ParseError

logger = logging.getLogger(__name__)

Triple = Tuple[int, int, int]


@dataclass(frozen=True)
class ThreeDMInstance:
    """
    A Numerical 3-Dimensional Matching instance: can ``X``, ``Y`` and ``Z``
    be partitioned into ``m`` triples ``(x, y, z)`` with ``x + y + z = S``?
    """

    X: Tuple[int, ...]
    Y: Tuple[int, ...]
    Z: Tuple[int, ...]
    S: int

    def __post_init__(self):
        for name in ("X", "Y", "Z"):
            values = tuple(getattr(self, name))
            if any(not isinstance(v, int) or v < 0 for v in values):
                raise ValueError(f"{name} must hold non-negative integers")
            object.__setattr__(self, name, values)
        if not (len(self.X) == len(self.Y) == len(self.Z)):
            raise ValueError(
                f"X, Y and Z must have equal sizes, got "
                f"{len(self.X)}, {len(self.Y)} and {len(self.Z)}"
            )
        if self.S < 0:
            raise ValueError(f"S must be non-negative: {self.S}")

    @property
    def m(self) -> int:
        return len(self.X)


def parse_3dm_text(text: str) -> ThreeDMInstance:
    """
    Parses the four-line format::

        X: 1 2
        Y: 0 1
        Z: 1 2
        S: 3

    :raise ParseError:
        On a missing, repeated or malformed line.
    """
    fields = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or name not in ("X", "Y", "Z", "S"):
            raise ParseError(f"Cannot parse '{raw.strip()}'", line=number)
        if name in fields:
            raise ParseError("repeated field", line=number, field=name)
        try:
            fields[name] = [int(token) for token in rest.split()]
        except ValueError:
            raise ParseError("values must be integers", line=number, field=name)
    for name in ("X", "Y", "Z", "S"):
        if name not in fields:
            raise ParseError("missing field", field=name)
    if len(fields["S"]) != 1:
        raise ParseError("exactly one value expected", field="S")
    try:
        return ThreeDMInstance(
            tuple(fields["X"]), tuple(fields["Y"]), tuple(fields["Z"]), fields["S"][0]
        )
    except ValueError as e:
        raise ParseError(str(e))


def format_3dm_text(inst: ThreeDMInstance) -> str:
    lines = [
        f"{name}: " + " ".join(str(v) for v in getattr(inst, name))
        for name in ("X", "Y", "Z")
    ]
    lines.append(f"S: {inst.S}")
    return "\n".join(lines) + "\n"


def read_3dm(path) -> ThreeDMInstance:
    with open(path, "r", encoding="UTF8") as fh:
        return parse_3dm_text(fh.read())


def random_3dm_instance(
    m: int,
    max_value: int,
    rng: np.random.Generator,
    planted: bool = False,
) -> ThreeDMInstance:
    """
    A random instance with values in ``[0, max_value]``. With ``planted``
    the instance is built from ``m`` triples of a common sum, so it has a
    matching; otherwise values and ``S`` are drawn independently.
    """
    if m < 1 or max_value < 0:
        raise ValueError(f"Invalid instance shape m={m}, max_value={max_value}")
    if not planted:
        X, Y, Z = (
            tuple(int(v) for v in rng.integers(0, max_value + 1, size=m))
            for _ in range(3)
        )
        return ThreeDMInstance(X, Y, Z, int(rng.integers(0, 3 * max_value + 1)))
    S = int(rng.integers(0, 3 * max_value + 1))
    X, Y, Z = [], [], []
    for _ in range(m):
        x = int(rng.integers(max(0, S - 2 * max_value), min(max_value, S) + 1))
        y = int(
            rng.integers(max(0, S - x - max_value), min(max_value, S - x) + 1)
        )
        X.append(x)
        Y.append(y)
        Z.append(S - x - y)
    return ThreeDMInstance(
        tuple(X),
        tuple(int(v) for v in rng.permutation(Y)),
        tuple(int(v) for v in rng.permutation(Z)),
        S,
    )


def dinh_counterexample(d: int) -> Tuple[Configuration, Configuration, MixingGraph]:
    """
    Pure droplets ``I`` of 0 and 1, the target
    ``T = {2^-d, ((d−1)2^d + 1) : 1 − 2^-d}`` and a waste-free mixing graph
    from ``I`` to ``T``.

    The graph mixes 0 with 1, dilutes one half with d−1 zeros and the other
    with d−1 ones, setting one droplet aside at every stage, recombines
    the set-aside droplets ``2^-a`` and ``1 − 2^-a`` pairwise, and raises
    every recombined droplet to ``1 − 2^-d`` with a full binary tree of
    mixes with ones. Its depth is ``2d``.

    :raise ValueError:
        If ``d < 2``.
    """
    if d < 2:
        raise ValueError(f"Counterexample needs d >= 2, got {d}")
    n = (d - 1) * (1 << d) + 2
    low = Dyadic(1, d)
    high = 1 - low
    target = Configuration({low: 1, high: n - 1})
    ones = int(low + high * (n - 1))
    source = Configuration({0: n - ones, 1: ones})

    G = MixingGraph()
    zeros = [G.add_node(SOURCE) for _ in range(n - ones)]
    units = [G.add_node(SOURCE) for _ in range(ones)]

    def mixer(u: str, v: str) -> str:
        node = G.add_node(MIXER)
        G.add_edge(u, node)
        G.add_edge(v, node)
        return node

    def sink(u: str) -> None:
        G.add_edge(u, G.add_node(SINK))

    def tree(u: str, levels: int) -> None:
        if levels == 0:
            sink(u)
            return
        node = mixer(u, units.pop())
        tree(node, levels - 1)
        tree(node, levels - 1)

    central = mixer(zeros.pop(), units.pop())
    set_aside = {}
    for pool, chain in ((zeros, "low"), (units, "high")):
        current = central
        for a in range(2, d + 1):
            current = mixer(current, pool.pop())
            set_aside[chain, a] = current
        sink(current)
    for a in range(2, d + 1):
        node = mixer(set_aside["low", a], set_aside["high", a])
        tree(node, d - 1)
        tree(node, d - 1)

    if zeros or units:
        raise RuntimeError(f"{len(zeros) + len(units)} source droplets left unused")
    G.validate()
    return source, target, G


def reduce_3dm(inst: ThreeDMInstance) -> Tuple[Configuration, Configuration]:
    """
    Droplets ``2x + ½`` and ``2y + 1`` and targets ``S − z + ¾`` (twice
    each) such that a depth-one graph exists iff ``inst`` has a matching.
    """
    half, quarter3 = Dyadic(1, 1), Dyadic(3, 2)
    I = Configuration.from_values(
        [2 * x + half for x in inst.X] + [Dyadic(2 * y + 1) for y in inst.Y]
    )
    T = Configuration.from_values(
        Dyadic(inst.S - z) + quarter3 for z in inst.Z for _ in (0, 1)
    )
    return I, T


def reduce_3dm_sigma(
    inst: ThreeDMInstance, sigma: int
) -> Tuple[Configuration, Configuration]:
    """
    The variant of :func:`reduce_3dm` with ``2^σ`` droplets per target:
    droplets ``2^σ x + 2^-σ``, ``2^σ y + 1`` and ``m (2^σ − 2)`` zeros, and
    ``2^σ`` targets ``S − z + 2^-σ + 2^-2σ`` per ``z``.

    :raise ValueError:
        If ``sigma < 2``.
    """
    if sigma < 2:
        raise ValueError(f"sigma must be at least 2, got {sigma}")
    k = 1 << sigma
    tag = Dyadic(1, sigma)
    I = Configuration(
        [(k * x + tag, 1) for x in inst.X]
        + [(Dyadic(k * y + 1), 1) for y in inst.Y]
        + [(Dyadic(0), inst.m * (k - 2))]
    )
    T = Configuration(
        (inst.S - z + tag + Dyadic(1, 2 * sigma), k) for z in inst.Z
    )
    return I, T


def solve_3dm_bruteforce(inst: ThreeDMInstance) -> Optional[List[Triple]]:
    """Backtracking over assignments of ``Y`` and ``Z`` to the ``X``
    values in order. Factorial in ``m``."""
    m = inst.m
    used_y = [False] * m
    used_z = [False] * m
    triples: List[Triple] = []

    def search(i: int) -> bool:
        if i == m:
            return True
        x = inst.X[i]
        for j in range(m):
            if used_y[j]:
                continue
            for k in range(m):
                if used_z[k] or x + inst.Y[j] + inst.Z[k] != inst.S:
                    continue
                used_y[j] = used_z[k] = True
                triples.append((x, inst.Y[j], inst.Z[k]))
                if search(i + 1):
                    return True
                triples.pop()
                used_y[j] = used_z[k] = False
        return False

    return list(triples) if search(0) else None
