"""Directed sparse graphs and the path algorithms used across the package.

Distances are plain doubles.  A distance is always accumulated along the path
it belongs to (``d(v) = d(u) + l(u, v)``), so re-summing a reconstructed path
in order reproduces the reported value bit for bit.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

UNREACHABLE = math.inf
DEFAULT_LONGEST_PATH_CAP = 24


class CapacityError(RuntimeError):
    """Raised when an exhaustive routine is asked to run beyond its size cap."""


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int
    length: float


class Graph:
    """Immutable directed graph with node 0 as the depot.

    Arc ids are the positions ``0..|A|-1``; use :meth:`from_arcs` to build a
    graph from ``(tail, head, length)`` triples and let ids be assigned.
    """

    __slots__ = ("nodes", "arcs", "_out", "_in", "_by_pair")

    def __init__(self, nodes: Iterable[int], arcs: Iterable[Arc]):
        nodes = tuple(sorted(set(int(v) for v in nodes)))
        arcs = tuple(arcs)
        node_set = set(nodes)
        if 0 not in node_set:
            raise ValueError("graph has no depot (node 0)")
        out: dict[int, list[int]] = {v: [] for v in nodes}
        inc: dict[int, list[int]] = {v: [] for v in nodes}
        by_pair: dict[tuple[int, int], int] = {}
        for pos, arc in enumerate(arcs):
            if arc.id != pos:
                raise ValueError(f"arc ids must be consecutive from 0; got {arc.id} at {pos}")
            if arc.tail not in node_set or arc.head not in node_set:
                raise ValueError(f"arc {arc.id} references an unknown node")
            if arc.tail == arc.head:
                raise ValueError(f"arc {arc.id} is a self-loop")
            if not arc.length > 0 or not math.isfinite(arc.length):
                raise ValueError(f"arc {arc.id} has non-positive length {arc.length}")
            if (arc.tail, arc.head) in by_pair:
                raise ValueError(f"duplicate arc ({arc.tail}, {arc.head})")
            by_pair[(arc.tail, arc.head)] = arc.id
            out[arc.tail].append(arc.id)
            inc[arc.head].append(arc.id)
        if not out[0] or not inc[0]:
            raise ValueError("depot needs at least one outgoing and one incoming arc")
        self.nodes = nodes
        self.arcs = arcs
        self._out = {v: tuple(ks) for v, ks in out.items()}
        self._in = {v: tuple(ks) for v, ks in inc.items()}
        self._by_pair = by_pair

    @classmethod
    def from_arcs(cls, nodes: Iterable[int], triples: Iterable[tuple[int, int, float]]) -> "Graph":
        arcs = [Arc(k, int(i), int(j), float(l)) for k, (i, j, l) in enumerate(triples)]
        return cls(nodes, arcs)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def out_arcs(self, node: int) -> tuple[int, ...]:
        return self._out[node]

    def in_arcs(self, node: int) -> tuple[int, ...]:
        return self._in[node]

    def arc_between(self, tail: int, head: int) -> int | None:
        return self._by_pair.get((tail, head))

    def __contains__(self, node: object) -> bool:
        return node in self._out

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.nodes == other.nodes and self.arcs == other.arcs

    def __hash__(self) -> int:
        return hash((self.nodes, self.arcs))

    def __repr__(self) -> str:
        return f"Graph(|V|={self.n_nodes}, |A|={self.n_arcs})"


def shortest_paths(
    graph: Graph, source: int, avoid: Iterable[int] = ()
) -> dict[int, tuple[float, int | None]]:
    """Dijkstra from ``source``.

    Returns ``node -> (distance, predecessor arc id)``; unreachable nodes map to
    ``(UNREACHABLE, None)``.  Nodes in ``avoid`` may end a path but are never
    passed through.  Among equal tentative distances the lower node id is
    settled first, and a predecessor is only replaced on strict improvement,
    so the shortest-path tree is deterministic.
    """
    if source not in graph:
        raise ValueError(f"source {source} is not a node of the graph")
    blocked = set(avoid) - {source}
    dist = {v: UNREACHABLE for v in graph.nodes}
    pred: dict[int, int | None] = {v: None for v in graph.nodes}
    dist[source] = 0.0
    done: set[int] = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u in blocked:
            continue
        for k in graph.out_arcs(u):
            arc = graph.arcs[k]
            nd = d + arc.length
            if nd < dist[arc.head]:
                dist[arc.head] = nd
                pred[arc.head] = k
                heapq.heappush(heap, (nd, arc.head))
    return {v: (dist[v], pred[v]) for v in graph.nodes}


def reconstruct_path(
    graph: Graph, tree: Mapping[int, tuple[float, int | None]], target: int
) -> list[int] | None:
    """Arc ids of the tree path ending at ``target`` (None if unreachable)."""
    if tree[target][0] == UNREACHABLE:
        return None
    path = []
    node = target
    while tree[node][1] is not None:
        k = tree[node][1]
        path.append(k)
        node = graph.arcs[k].tail
    path.reverse()
    return path


def longest_simple_path(
    graph: Graph,
    source: int,
    targets: Iterable[int] | None = None,
    max_nodes: int = DEFAULT_LONGEST_PATH_CAP,
) -> dict[int, float]:
    """Maximum length over simple directed paths from ``source``.

    Exact depth-first enumeration, so it is exponential in the worst case and
    guarded by ``max_nodes``.  Unreachable targets map to ``-inf``.
    """
    if graph.n_nodes > max_nodes:
        raise CapacityError(
            f"longest_simple_path enumerates simple paths; |V|={graph.n_nodes} exceeds "
            f"max_nodes={max_nodes} (raise the cap to proceed)"
        )
    if source not in graph:
        raise ValueError(f"source {source} is not a node of the graph")
    index = {v: pos for pos, v in enumerate(graph.nodes)}
    succ = [
        [(index[graph.arcs[k].head], graph.arcs[k].length) for k in graph.out_arcs(v)]
        for v in graph.nodes
    ]
    best = [-math.inf] * graph.n_nodes
    start = index[source]
    best[start] = 0.0
    # iterative DFS: (node, visited mask, length, next successor position)
    stack = [(start, 1 << start, 0.0, 0)]
    while stack:
        u, mask, length, pos = stack.pop()
        if pos < len(succ[u]):
            stack.append((u, mask, length, pos + 1))
            v, l = succ[u][pos]
            if not mask >> v & 1:
                nl = length + l
                if nl > best[v]:
                    best[v] = nl
                stack.append((v, mask | 1 << v, nl, 0))
    wanted = graph.nodes if targets is None else tuple(targets)
    return {v: best[index[v]] for v in wanted}


@dataclass(frozen=True)
class ClosureEntry:
    distance: float
    arcs: tuple[int, ...]

    @property
    def reachable(self) -> bool:
        return self.distance != UNREACHABLE


def metric_closure(
    graph: Graph, nodes: Sequence[int], avoid: Iterable[int] = ()
) -> dict[tuple[int, int], ClosureEntry]:
    """Shortest distance and one witnessing arc sequence for every ordered pair.

    ``avoid`` is forwarded to :func:`shortest_paths`: those nodes can start or
    end a leg but are not used as intermediate stops.
    """
    nodes = tuple(nodes)
    for v in nodes:
        if v not in graph:
            raise ValueError(f"node {v} is not in the graph")
    avoid = tuple(avoid)
    out: dict[tuple[int, int], ClosureEntry] = {}
    for u in nodes:
        tree = shortest_paths(graph, u, avoid)
        for v in nodes:
            if u == v:
                out[(u, v)] = ClosureEntry(0.0, ())
                continue
            path = reconstruct_path(graph, tree, v)
            if path is None:
                out[(u, v)] = ClosureEntry(UNREACHABLE, ())
            else:
                out[(u, v)] = ClosureEntry(tree[v][0], tuple(path))
    return out


def path_length(graph: Graph, arc_ids: Iterable[int]) -> float:
    """Sequential sum of arc lengths, in path order."""
    total = 0.0
    for k in arc_ids:
        total += graph.arcs[k].length
    return total


def is_strongly_connected(graph: Graph) -> bool:
    def reach(forward: bool) -> set[int]:
        seen = {0}
        todo = [0]
        while todo:
            u = todo.pop()
            ks = graph.out_arcs(u) if forward else graph.in_arcs(u)
            for k in ks:
                v = graph.arcs[k].head if forward else graph.arcs[k].tail
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return seen

    every = set(graph.nodes)
    return reach(True) == every and reach(False) == every
