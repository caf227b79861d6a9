"""
Brute-force ground truth for mixability and reachability.

States are sorted tuples of integers: every concentration scaled by
``2**d`` for a precision cap ``d``. Mixing two droplets stays inside the
cap exactly when their scaled values have the same parity.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from dropmix.configuration import Configuration, average
from dropmix.constants import (
    BUDGET_EXCEEDED,
    DEFAULT_EXTRA_BITS,
    DEFAULT_MAX_STATES,
    REACHABLE,
    UNREACHABLE_PROVEN,
    UNREACHABLE_WITHIN_BOUND,
)
from dropmix.graph import MixingGraph, MixingSequence, MixStep, layers_to_graph
from dropmix.numeric import Dyadic, max_precision

logger = logging.getLogger(__name__)

State = Tuple[int, ...]


class BudgetExceededError(RuntimeError):
    """Raised when an exhaustive search gives up before deciding."""

    def __init__(self, message: str, states_explored: int):
        self.states_explored = states_explored
        super().__init__(message)


@dataclass
class OracleVerdict:
    status: str
    states_explored: int
    sequence: Optional[MixingSequence] = field(default=None)

    def __bool__(self) -> bool:
        return self.status == REACHABLE


def _scaled(C: Configuration, d: int) -> State:
    return tuple(v.num << (d - v.exp) for v in C.droplets())


def _square_sum(state: State) -> int:
    return sum(v * v for v in state)


def _mix(state: State, x: int, y: int) -> State:
    values = list(state)
    values.remove(x)
    values.remove(y)
    z = (x + y) // 2
    values.extend((z, z))
    values.sort()
    return tuple(values)


def _successors(state: State):
    distinct = sorted(set(state))
    for i, x in enumerate(distinct):
        for y in distinct[i + 1:]:
            if (y - x) % 2 == 0:
                yield x, y, _mix(state, x, y)


def reachable_bfs(
    I: Configuration,
    T: Configuration,
    extra_bits: int = DEFAULT_EXTRA_BITS,
    max_states: int = DEFAULT_MAX_STATES,
) -> OracleVerdict:
    """
    Breadth-first search for a mixing sequence from ``I`` to ``T`` that
    never uses a concentration finer than ``max(prec(I ∪ T)) + extra_bits``.

    States whose range no longer covers the range of ``T``, or whose
    potential already dropped below that of ``T``, are pruned: mixing
    never widens ``[min, max]`` and never increases the potential.

    The verdict is ``UnreachableProven`` when the search is known to be
    complete: differing sizes or sums, or a perfect-mixing target for an
    integral ``I`` with at least one extra bit. Otherwise exhausting the
    search yields ``UnreachableWithinBound``.
    """
    if I.n != T.n or I.total() != T.total():
        return OracleVerdict(UNREACHABLE_PROVEN, 0)
    if I == T:
        return OracleVerdict(REACHABLE, 1, [])
    d = max(max_precision(I.distinct()), max_precision(T.distinct())) + extra_bits
    start, target = _scaled(I, d), _scaled(T, d)
    low, high = target[0], target[-1]
    floor = _square_sum(target)

    parents: Dict[State, Optional[Tuple[State, int, int]]] = {start: None}
    frontier = deque([start])
    explored = 0
    while frontier:
        state = frontier.popleft()
        explored += 1
        if explored % 100000 == 0:
            logger.debug(
                "explored %d states, frontier %d", explored, len(frontier)
            )
        for x, y, successor in _successors(state):
            if successor in parents:
                continue
            if successor[0] > low or successor[-1] < high:
                continue
            if _square_sum(successor) < floor:
                continue
            parents[successor] = (state, x, y)
            if successor == target:
                return OracleVerdict(
                    REACHABLE, explored, _witness(parents, successor, d)
                )
            if len(parents) > max_states:
                logger.warning(
                    "state budget of %d exhausted after %d expansions",
                    max_states,
                    explored,
                )
                return OracleVerdict(BUDGET_EXCEEDED, explored)
            frontier.append(successor)

    complete = (
        extra_bits >= 1
        and I.is_integral()
        and T.m == 1
        and T.min().is_integer()
    )
    status = UNREACHABLE_PROVEN if complete else UNREACHABLE_WITHIN_BOUND
    return OracleVerdict(status, explored)


def _witness(parents, state: State, d: int) -> MixingSequence:
    steps = []
    while parents[state] is not None:
        state, x, y = parents[state]
        steps.append(MixStep(Dyadic(x, d), Dyadic(y, d)))
    steps.reverse()
    return steps


def mixable_bruteforce(
    C_int: Configuration, max_states: int = DEFAULT_MAX_STATES
) -> bool:
    """
    Decides perfect mixability of an integral configuration by searching
    all mixing sequences of precision at most one, which is complete.

    :raise BudgetExceededError:
        If the search does not finish within ``max_states`` states.
    """
    mu = average(C_int)
    if mu is None or not mu.is_integer():
        return False
    verdict = reachable_bfs(C_int, Configuration({mu: C_int.n}), 1, max_states)
    if verdict.status == BUDGET_EXCEEDED:
        raise BudgetExceededError(
            f"no decision for {C_int} within {max_states} states",
            verdict.states_explored,
        )
    return verdict.status == REACHABLE


def _layer_results(state: State) -> Set[Tuple[State, Tuple[Tuple[int, int], ...]]]:
    """Every configuration reachable by one layer of disjoint mixes of
    distinct values, with the mixes used. Droplets not mixed pass through."""
    results: Dict[State, Tuple[Tuple[int, int], ...]] = {}

    def expand(rest: List[int], kept: List[int], pairs: List[Tuple[int, int]]):
        if not rest:
            if pairs:
                values = sorted(kept + [(x + y) // 2 for x, y in pairs for _ in (0, 1)])
                results.setdefault(tuple(values), tuple(pairs))
            return
        x, tail = rest[0], rest[1:]
        expand(tail, kept + [x], pairs)
        seen = set()
        for i, y in enumerate(tail):
            if y == x or y in seen:
                continue
            seen.add(y)
            expand(tail[:i] + tail[i + 1:], kept, pairs + [(x, y)])

    expand(list(state), [], [])
    return set(results.items())


def min_depth_search(
    I: Configuration,
    T: Configuration,
    max_depth: int,
    max_states: int = DEFAULT_MAX_STATES,
) -> Optional[MixingGraph]:
    """
    Exhaustive search for a waste-free mixing graph of depth at most
    ``max_depth`` that converts ``I`` into ``T``. Exponential; intended
    for instances of a handful of droplets.

    :raise BudgetExceededError:
        If more than ``max_states`` layered states are expanded.
    """
    if I.n != T.n or I.total() != T.total():
        return None
    if I == T:
        return layers_to_graph(I, [])
    d = max(max_precision(I.distinct()), max_precision(T.distinct())) + max_depth
    start, target = _scaled(I, d), _scaled(T, d)
    low, high = target[0], target[-1]
    floor = _square_sum(target)
    failed: Dict[State, int] = {}
    explored = 0

    def search(state: State, depth: int):
        nonlocal explored
        if state == target:
            return []
        if depth == 0 or failed.get(state, -1) >= depth:
            return None
        explored += 1
        if explored > max_states:
            raise BudgetExceededError(
                f"depth search exceeded {max_states} states", explored
            )
        for successor, pairs in sorted(_layer_results(state)):
            if successor[0] > low or successor[-1] < high:
                continue
            if _square_sum(successor) < floor:
                continue
            found = search(successor, depth - 1)
            if found is not None:
                return [pairs] + found
        failed[state] = depth
        return None

    layers = search(start, max_depth)
    logger.debug("depth search expanded %d states", explored)
    if layers is None:
        return None
    return layers_to_graph(
        I,
        [
            [MixStep(Dyadic(x, d), Dyadic(y, d)) for x, y in pairs]
            for pairs in layers
        ],
    )


def depth1_decide(
    I: Configuration, T: Configuration
) -> Optional[List[MixStep]]:
    """
    Searches for a depth-one graph from ``I`` to ``T``: a pairing of some
    droplets of ``I`` whose midpoints each appear twice in ``T``, with
    every unpaired droplet passing through to an equal droplet of ``T``.

    :return:
        The mixed pairs (unpaired droplets are wires), or ``None``.
    """
    if I.n != T.n:
        return None
    failed: Set[Tuple[Tuple[Dyadic, ...], Tuple[Tuple[Dyadic, int], ...]]] = set()

    def search(rest: Tuple[Dyadic, ...], target: Counter):
        if not rest:
            return []
        key = (rest, tuple(sorted((k, v) for k, v in target.items() if v)))
        if key in failed:
            return None
        x, tail = rest[0], rest[1:]
        if target[x] > 0:
            target[x] -= 1
            found = search(tail, target)
            target[x] += 1
            if found is not None:
                return found
        tried = set()
        for i, y in enumerate(tail):
            if y == x or y in tried:
                continue
            tried.add(y)
            z = (x + y).shift(-1)
            if target[z] >= 2:
                target[z] -= 2
                found = search(tail[:i] + tail[i + 1:], target)
                target[z] += 2
                if found is not None:
                    return [MixStep(x, y)] + found
        failed.add(key)
        return None

    target = Counter(T.droplets())
    return search(tuple(I.droplets()), target)
