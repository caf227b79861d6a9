import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from dropmix.configuration import Configuration, apply_mix
from dropmix.constants import MIXER, NODE_KINDS, SINK, SOURCE
from dropmix.numeric import Dyadic, ParseError, mid, parse_dyadic

logger = logging.getLogger(__name__)

_PREFIX = {SOURCE: "s", MIXER: "m", SINK: "t"}


class MalformedGraphError(ValueError):
    """Raised when a graph violates the degree or acyclicity rules of a
    mixing graph. ``node`` names the offending node."""

    def __init__(self, message: str, node: Optional[str] = None):
        self.node = node
        super().__init__(message)


@dataclass(frozen=True)
class MixStep:
    """One mixing operation on concentrations ``a <= b``."""

    a: Dyadic
    b: Dyadic

    def __post_init__(self):
        a, b = Dyadic.coerce(self.a), Dyadic.coerce(self.b)
        if b < a:
            a, b = b, a
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def result(self) -> Dyadic:
        return mid(self.a, self.b)

    def __str__(self) -> str:
        return f"mix {self.a} {self.b} -> {self.result}"


MixingSequence = List[MixStep]


def format_steps(seq: Iterable[MixStep]) -> str:
    """Renders a sequence in the ``mix <a> <b> -> <mid>`` audit format."""
    return "".join(f"{step}\n" for step in seq)


def parse_steps(text: str) -> MixingSequence:
    seq = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (3, 5) or parts[0] != "mix":
            raise ParseError(f"Cannot parse mix step '{line}'", line=lineno)
        step = MixStep(parse_dyadic(parts[1]), parse_dyadic(parts[2]))
        if len(parts) == 5 and (
            parts[3] != "->" or parse_dyadic(parts[4]) != step.result
        ):
            raise ParseError(
                f"Step '{line}' does not produce the stated concentration",
                line=lineno,
            )
        seq.append(step)
    return seq


def fold_steps(C: Configuration, seq: Iterable[MixStep]) -> Configuration:
    for step in seq:
        if step.a != step.b:
            C = apply_mix(C, step.a, step.b)
    return C


@dataclass(frozen=True)
class GraphMetrics:
    depth: int
    mixers: int
    max_precision: int


class MixingGraph:
    """
    A mixing graph: sources (dispensers) feed one droplet each, mixers
    take two droplets and emit two droplets of their average, sinks
    collect one droplet each.

    The graph does not store concentrations; it can be evaluated on any
    input assignment with :func:`simulate`. Node ids are ``s<k>``,
    ``m<k>`` and ``t<k>`` in creation order.
    """

    def __init__(self) -> None:
        self._graph = nx.MultiDiGraph()
        self._counts = {kind: 0 for kind in NODE_KINDS}
        self._edges: List[Tuple[str, str]] = []
        self.input_order: List[str] = []

    def add_node(self, kind: str, node_id: Optional[str] = None) -> str:
        if kind not in NODE_KINDS:
            raise ValueError(f"Unknown node kind '{kind}'")
        if node_id is None:
            node_id = f"{_PREFIX[kind]}{self._counts[kind]}"
        if node_id in self._graph:
            raise MalformedGraphError(f"Duplicate node id '{node_id}'", node_id)
        self._counts[kind] += 1
        self._graph.add_node(node_id, kind=kind)
        if kind == SOURCE:
            self.input_order.append(node_id)
        return node_id

    def add_edge(self, u: str, v: str) -> None:
        for node in (u, v):
            if node not in self._graph:
                raise MalformedGraphError(f"Unknown node '{node}'", node)
        self._graph.add_edge(u, v)
        self._edges.append((u, v))

    @property
    def nodes(self) -> List[Tuple[str, str]]:
        return [(node, kind) for node, kind in self._graph.nodes(data="kind")]

    @property
    def edges(self) -> List[Tuple[str, str]]:
        return list(self._edges)

    def kind(self, node: str) -> str:
        return self._graph.nodes[node]["kind"]

    def of_kind(self, kind: str) -> List[str]:
        return [node for node, k in self.nodes if k == kind]

    @property
    def sources(self) -> List[str]:
        return self.of_kind(SOURCE)

    @property
    def mixers(self) -> List[str]:
        return self.of_kind(MIXER)

    @property
    def sinks(self) -> List[str]:
        return self.of_kind(SINK)

    def predecessors(self, node: str) -> List[str]:
        return [u for u, _ in self._graph.in_edges(node)]

    def topological_order(self) -> List[str]:
        return list(nx.lexicographical_topological_sort(self._graph))

    def validate(self) -> None:
        """
        :raise MalformedGraphError:
            If a node has the wrong degree for its kind, the graph has a
            cycle, or sources and sinks do not pair up.
        """
        wanted = {SOURCE: (0, 1), MIXER: (2, 2), SINK: (1, 0)}
        for node, kind in self.nodes:
            degrees = (self._graph.in_degree(node), self._graph.out_degree(node))
            if degrees != wanted[kind]:
                raise MalformedGraphError(
                    f"{kind} '{node}' has in/out degree {degrees[0]}/"
                    f"{degrees[1]}, expected {wanted[kind][0]}/"
                    f"{wanted[kind][1]}",
                    node,
                )
        if not nx.is_directed_acyclic_graph(self._graph):
            cycle = nx.find_cycle(self._graph)
            raise MalformedGraphError(
                f"Mixing graph has a cycle through '{cycle[0][0]}'",
                cycle[0][0],
            )
        if len(self.sources) != len(self.sinks):
            raise MalformedGraphError(
                f"{len(self.sources)} sources but {len(self.sinks)} sinks"
            )
        if sorted(self.input_order) != sorted(self.sources):
            raise MalformedGraphError("input_order must list every source")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixingGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and sorted(self._edges) == sorted(other._edges)
            and self.input_order == other.input_order
        )

    def __repr__(self) -> str:
        return (
            f"MixingGraph(sources={len(self.sources)}, "
            f"mixers={len(self.mixers)}, sinks={len(self.sinks)})"
        )


def _input_list(
    G: MixingGraph, I: Union[Configuration, Sequence]
) -> List[Dyadic]:
    if isinstance(I, Configuration):
        values = I.droplets()
    else:
        values = [Dyadic.coerce(v) for v in I]
    if len(values) != len(G.input_order):
        raise ValueError(
            f"Graph has {len(G.input_order)} sources but {len(values)} "
            "input droplets were given"
        )
    return values


def simulate(
    G: MixingGraph, I: Union[Configuration, Sequence]
) -> Tuple[Configuration, Dict[str, Dyadic]]:
    """
    Propagates the input droplets through ``G`` exactly.

    :param I:
        A configuration, assigned to the sources in ascending value order,
        or an explicit list of values in ``G.input_order`` order.

    :return:
        The output multiset at the sinks and the value of every node.
    """
    G.validate()
    values: Dict[str, Dyadic] = dict(zip(G.input_order, _input_list(G, I)))
    for node in G.topological_order():
        kind = G.kind(node)
        if kind == MIXER:
            a, b = (values[u] for u in G.predecessors(node))
            values[node] = mid(a, b)
        elif kind == SINK:
            (u,) = G.predecessors(node)
            values[node] = values[u]
    outputs = Configuration.from_values(values[t] for t in G.sinks)
    return outputs, values


class _Terminals:
    """Open droplet terminals keyed by value, handed out lowest creation
    index first."""

    def __init__(self) -> None:
        self._pool: Dict[Dyadic, deque] = {}
        self._created = 0

    def push(self, value: Dyadic, node: str) -> None:
        self._pool.setdefault(value, deque()).append((self._created, node))
        self._created += 1

    def take(self, value: Dyadic) -> Optional[str]:
        queue = self._pool.get(value)
        if not queue:
            return None
        return queue.popleft()[1]

    def remaining(self) -> List[Tuple[int, str]]:
        return sorted(t for queue in self._pool.values() for t in queue)


def _attach_mixer(
    G: MixingGraph, terminals: _Terminals, a: Dyadic, b: Dyadic, where: str
) -> Tuple[Dyadic, str]:
    first = terminals.take(a)
    second = terminals.take(b)
    if first is None or second is None:
        raise ValueError(f"{where}: no open droplet for mix {a}, {b}")
    mixer = G.add_node(MIXER)
    G.add_edge(first, mixer)
    G.add_edge(second, mixer)
    return mid(a, b), mixer


def _close(G: MixingGraph, terminals: _Terminals) -> MixingGraph:
    for _, node in terminals.remaining():
        G.add_edge(node, G.add_node(SINK))
    G.validate()
    return G


def sequence_to_graph(I: Configuration, seq: Iterable[MixStep]) -> MixingGraph:
    """
    Builds the mixing graph realizing ``seq`` on ``I``. Each step consumes
    the lowest-indexed open terminals carrying its two values; leftover
    terminals are wired to sinks. Steps mixing equal values are no-ops
    and are omitted.

    :raise ValueError:
        If a step mixes a value with no open droplet, naming the step.
    """
    G = MixingGraph()
    terminals = _Terminals()
    for value in I.droplets():
        terminals.push(value, G.add_node(SOURCE))
    for index, step in enumerate(seq):
        if step.a == step.b:
            continue
        value, mixer = _attach_mixer(
            G, terminals, step.a, step.b, f"step {index}"
        )
        terminals.push(value, mixer)
        terminals.push(value, mixer)
    return _close(G, terminals)


def layers_to_graph(
    I: Configuration, layers: Iterable[Iterable[MixStep]]
) -> MixingGraph:
    """Like :func:`sequence_to_graph`, but every layer only mixes
    droplets that existed before the layer, so the depth of the graph is
    at most the number of layers."""
    G = MixingGraph()
    terminals = _Terminals()
    for value in I.droplets():
        terminals.push(value, G.add_node(SOURCE))
    for index, layer in enumerate(layers):
        produced = []
        for step in layer:
            produced.append(
                _attach_mixer(G, terminals, step.a, step.b, f"layer {index}")
            )
        for value, mixer in produced:
            terminals.push(value, mixer)
            terminals.push(value, mixer)
    return _close(G, terminals)


def metrics(G: MixingGraph, I: Union[Configuration, Sequence]) -> GraphMetrics:
    """Depth (mixers on the longest source-to-sink path), mixer count and
    the maximum precision over all node values under input ``I``."""
    _, values = simulate(G, I)
    depth: Dict[str, int] = {}
    for node in G.topological_order():
        below = max((depth[u] for u in G.predecessors(node)), default=0)
        depth[node] = below + (1 if G.kind(node) == MIXER else 0)
    return GraphMetrics(
        depth=max(depth.values(), default=0),
        mixers=len(G.mixers),
        max_precision=max((v.exp for v in values.values()), default=0),
    )


def serialize(G: MixingGraph) -> str:
    """Byte-stable JSON rendering; concentrations are never stored."""
    document = {
        "nodes": [{"id": node, "kind": kind} for node, kind in G.nodes],
        "edges": [[u, v] for u, v in G.edges],
        "input_order": list(G.input_order),
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def deserialize(text: str) -> MixingGraph:
    """
    :raise ParseError:
        If the document is not valid JSON or misses a field.

    :raise MalformedGraphError:
        If the graph violates the mixing-graph rules.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, line=e.lineno)
    if not isinstance(document, dict):
        raise ParseError("Graph document must be a JSON object")
    for field in ("nodes", "edges", "input_order"):
        if not isinstance(document.get(field), list):
            raise ParseError("missing or not a list", field=field)
    G = MixingGraph()
    for index, entry in enumerate(document["nodes"]):
        if (
            not isinstance(entry, dict)
            or not isinstance(entry.get("id"), str)
            or entry.get("kind") not in NODE_KINDS
        ):
            raise ParseError(f"invalid node entry {entry!r}", field=f"nodes[{index}]")
        G.add_node(entry["kind"], entry["id"])
    for index, entry in enumerate(document["edges"]):
        if not (
            isinstance(entry, list)
            and len(entry) == 2
            and all(isinstance(x, str) for x in entry)
        ):
            raise ParseError(f"invalid edge entry {entry!r}", field=f"edges[{index}]")
        G.add_edge(*entry)
    if not all(isinstance(x, str) for x in document["input_order"]):
        raise ParseError("ids must be strings", field="input_order")
    G.input_order = list(document["input_order"])
    G.validate()
    return G


def read_graph(path) -> MixingGraph:
    with open(path, "r", encoding="UTF8") as fh:
        return deserialize(fh.read())


def _dot_id(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(G: MixingGraph, node_values: Optional[Dict[str, Dyadic]] = None) -> str:
    """Graphviz rendering; mixers are labeled with the concentration they
    produce when ``node_values`` is given."""
    shapes = {SOURCE: "invtriangle", MIXER: "circle", SINK: "box"}
    lines = ["digraph mixing {", "    rankdir=TB", "    node [fontname=Arial fontsize=10]"]
    for node, kind in G.nodes:
        label = str(node_values[node]) if node_values else node
        lines.append(
            f"    {_dot_id(node)} [label={_dot_id(label)} shape={shapes[kind]}]"
        )
    for u, v in G.edges:
        lines.append(f"    {_dot_id(u)} -> {_dot_id(v)}")
    lines.append("}")
    return "\n".join(lines) + "\n"
