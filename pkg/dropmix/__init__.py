from dropmix.strategies import *
from dropmix.constants import (
    GAMMA,
    POLY_THRESHOLD,
    DEFAULT_MAX_STATES,
    DEFAULT_EXTRA_BITS,
    DEFAULT_STRATEGY,
)
from dropmix.numeric import (
    Dyadic,
    ParseError,
    mid,
    parse_dyadic,
    precision,
    odd_prime_power_candidates,
)
from dropmix.configuration import (
    Configuration,
    NormalizationRecord,
    average,
    normalize_hat,
    normalize_integral,
    parse_configuration_text,
    psi,
    read_configuration,
    stats,
)
from dropmix.mixability import (
    MixabilityVerdict,
    NotMixableError,
    check_mc,
    is_perfectly_mixable,
)
from dropmix.graph import (
    MalformedGraphError,
    MixingGraph,
    MixStep,
    deserialize,
    layers_to_graph,
    metrics,
    sequence_to_graph,
    serialize,
    simulate,
    to_dot,
)
from dropmix.synthesis_base import MixingStrategy, SafetyContext, SynthesisError
from dropmix.oracle import (
    OracleVerdict,
    depth1_decide,
    min_depth_search,
    mixable_bruteforce,
    reachable_bfs,
)
from dropmix.hardness import (
    ThreeDMInstance,
    dinh_counterexample,
    reduce_3dm,
    reduce_3dm_sigma,
    solve_3dm_bruteforce,
)
from dropmix.utils import (
    PerfectMix,
    SynthesisResult,
    list_supported_strategies,
    mixing_strategy,
    perfect_mix,
    synthesize,
    sequence_frame,
    stats_series,
    psi_graph,
    depth_graph,
)

__version__ = "0.1.0"
