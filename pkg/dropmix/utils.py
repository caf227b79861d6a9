import inspect
import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

import matplotlib.pyplot as plt
import pandas as pd

import dropmix.strategies
from dropmix.configuration import (
    Configuration,
    NormalizationRecord,
    apply_mix,
    average,
    normalize_hat,
    normalize_integral,
    psi,
    size_bits,
    stats,
)
from dropmix.constants import (
    DEFAULT_STRATEGY,
    PATH_DIRECT,
    PATH_WIRES,
)
from dropmix.graph import (
    MixingGraph,
    MixingSequence,
    MixStep,
    metrics,
    sequence_to_graph,
    simulate,
)
from dropmix.mixability import (
    MixabilityVerdict,
    NotMixableError,
    is_perfectly_mixable,
)
from dropmix.numeric import is_power_of_two, max_precision
from dropmix.synthesis_base import (
    MixingStrategy,
    SafetyContext,
    SynthesisError,
)

logger = logging.getLogger(__name__)


def mixing_strategy(
    strategy: str,
    E: Configuration,
    ctx: Optional[SafetyContext] = None,
) -> MixingStrategy:
    """
    Returns a new list-like :py:class:`MixingStrategy` object holding the
    mixing sequence for the normalized configuration **E**, built by the
    strategy named **strategy**.

    :param strategy:
        A strategy class name, compared case-insensitively (``Poly`` or
        ``Greedy``).

    :param E:
        An integral configuration with an integral average.

    :param ctx:
        The safety context; derived from the size of **E** when omitted.

    :raise NotImplementedError:
        If no strategy has that name.

    >>> from dropmix import Configuration, mixing_strategy
    >>> steps = mixing_strategy('Poly', Configuration.from_values([0, 0, 1, 3]))
    >>> [str(step) for step in steps]
    ['mix 1 3 -> 2', 'mix 0 2 -> 1', 'mix 0 2 -> 1']
    """
    try:
        strategy_classes = inspect.getmembers(dropmix.strategies, inspect.isclass)
        strategy_class = next(
            obj
            for name, obj in strategy_classes
            if name.lower() == strategy.lower()
        )
    except StopIteration:
        raise NotImplementedError(f"Strategy {strategy} not available")
    return strategy_class(E, ctx)


def list_supported_strategies() -> List[str]:
    return sorted(
        name
        for name, obj in inspect.getmembers(dropmix.strategies, inspect.isclass)
        if issubclass(obj, MixingStrategy)
    )


@dataclass
class SynthesisResult:
    """
    The graph and both traces of one synthesis run.

    ``frame_sequence`` is the sequence on the normalized configuration
    ``start``; ``sequence`` is its replay on the original droplets, mapped
    back through ``record``. ``ceilings`` holds the emitted mix count and
    the bound it was checked against.
    """

    graph: MixingGraph
    sequence: MixingSequence
    frame_sequence: MixingSequence
    record: NormalizationRecord
    path: str
    verdict: MixabilityVerdict
    start: Configuration
    ceilings: Dict[str, float] = field(default_factory=dict)


def _direct(C: Configuration) -> MixingSequence:
    if C.m == 1:
        return []
    return [MixStep(C.min(), C.max())]


def synthesize(C: Configuration, strategy: str = DEFAULT_STRATEGY) -> SynthesisResult:
    """
    Perfect-mixing synthesis for an arbitrary configuration.

    The configuration is normalized (power-of-two scaling, then offset and
    odd rescaling unless ``n`` is a power of two), the chosen strategy
    mixes the normalized configuration, and its sequence is replayed on
    the original droplets. Every normalization step is affine, so the
    replayed sequence yields the same graph.

    :raise NotMixableError:
        If ``C`` is not perfectly mixable.

    :raise SynthesisError:
        If the strategy contradicts itself, or the graph fails to simulate
        to ``{n : μ}`` within the precision bound.
    """
    if not isinstance(C, Configuration):
        C = Configuration.from_values(C)
    verdict = is_perfectly_mixable(C)
    if not verdict:
        raise NotMixableError(verdict)
    mu = average(C)
    ceilings: Dict[str, float] = {}

    if C.m == 1 or C.n <= 3:
        record = NormalizationRecord()
        frame_sequence = sequence = _direct(C)
        path = PATH_WIRES if C.m == 1 else PATH_DIRECT
        start = C
    else:
        C_int, record = normalize_integral(C)
        start = C_int
        if not is_power_of_two(C.n):
            start, hat_record = normalize_hat(C_int)
            record = record.then(hat_record)
        steps = mixing_strategy(strategy, start)
        frame_sequence = list(steps)
        sequence = [
            MixStep(record.inverse(step.a), record.inverse(step.b))
            for step in frame_sequence
        ]
        path = steps.path
        ceilings = {
            "mixes": len(steps) - steps.prefix_length,
            "size_bits": size_bits(steps.initial),
        }
        if steps.bound is not None:
            ceilings["bound"] = steps.bound
    logger.info("synthesized %d mixes for %s along the %s path", len(sequence), C, path)

    graph = sequence_to_graph(C, sequence)
    outputs, _ = simulate(graph, C)
    if outputs != Configuration({mu: C.n}):
        raise SynthesisError(f"graph produces {outputs}", C)
    bound = max(max_precision(C.distinct()), mu.exp) + 1
    if metrics(graph, C).max_precision > bound:
        raise SynthesisError(f"graph exceeds precision {bound}", C)
    return SynthesisResult(
        graph=graph,
        sequence=sequence,
        frame_sequence=frame_sequence,
        record=record,
        path=path,
        verdict=verdict,
        start=start,
        ceilings=ceilings,
    )


def perfect_mix(C: Configuration, strategy: str = DEFAULT_STRATEGY) -> MixingGraph:
    """
    Returns a mixing graph that converts ``C`` into ``n`` droplets of its
    average. See :func:`synthesize` for the trace of the run.

    >>> from dropmix import Configuration, perfect_mix, simulate
    >>> C = Configuration.from_values([0, 0, 0, 3, 7])
    >>> simulate(perfect_mix(C), C)[0]
    Configuration('{5:2}')
    """
    return synthesize(C, strategy).graph


def PerfectMix(C: Configuration, strategy: str = DEFAULT_STRATEGY) -> MixingGraph:
    """
    Deprecated name for :py:func:`perfect_mix`.

    :meta private:
    """

    warnings.warn(
        "PerfectMix is deprecated, use perfect_mix instead.",
        DeprecationWarning,
    )
    return perfect_mix(C, strategy)


def sequence_frame(C: Configuration, seq: Iterable[MixStep]) -> pd.DataFrame:
    """One row per mix with the potential before and after it."""
    rows = []
    mu = average(C)
    state = C
    precision = max_precision(C.distinct())
    before = psi(state, mu)
    for index, step in enumerate(seq):
        state = apply_mix(state, step.a, step.b)
        after = psi(state, mu)
        precision = max(precision, step.result.exp)
        rows.append(
            {
                "step": index,
                "a": str(step.a),
                "b": str(step.b),
                "mid": str(step.result),
                "psi": str(after),
                "psi_drop": str(before - after),
                "max_precision": precision,
            }
        )
        before = after
    return pd.DataFrame(
        rows,
        columns=["step", "a", "b", "mid", "psi", "psi_drop", "max_precision"],
    )


def stats_series(C: Configuration) -> pd.Series:
    summary = stats(C)
    return pd.Series(
        {
            "n": summary.n,
            "m": summary.m,
            "mu": str(summary.mu) if summary.mu_is_dyadic else str(summary.mean),
            "psi": str(summary.psi),
            "diam": str(summary.diam),
            "size_bits": summary.size_bits,
            "c_max": str(summary.c_max),
        }
    )


def psi_graph(C: Configuration, seq: Iterable[MixStep], show: bool = True):
    """Bar chart of the potential after every mix."""
    mu = average(C)
    heights = [float(psi(C, mu))]
    state = C
    for step in seq:
        state = apply_mix(state, step.a, step.b)
        heights.append(float(psi(state, mu)))
    fig = plt.figure(figsize=(20, 12))
    plt.bar(x=list(range(len(heights))), height=heights, color="#FF92FD")
    plt.title(f"Potential over {len(heights) - 1} mixes of {C}", fontsize=20)
    if show:
        plt.show()
    return fig


def depth_graph(d_max: int, show: bool = True):
    """Depth of the waste-free counterexample graph against ``d``."""
    from dropmix.hardness import dinh_counterexample

    ds = list(range(2, d_max + 1))
    depths = []
    for d in ds:
        I, _, G = dinh_counterexample(d)
        depths.append(metrics(G, I).depth)
    fig = plt.figure(figsize=(20, 12))
    plt.bar(x=ds, height=depths, color="#B0BF1A")
    plt.title("Depth of waste-free graphs by target precision", fontsize=20)
    if show:
        plt.show()
    return fig
