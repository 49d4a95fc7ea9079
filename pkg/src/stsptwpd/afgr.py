"""Arc filtering and graph reduction.

Only arcs that lie on a (deterministically chosen) shortest path between two
relevant nodes, the depot and the required customers, are kept.  Steiner
nodes left without arcs are dropped.  Node ids are preserved; arcs are
renumbered in their original order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .graph import Arc, Graph, reconstruct_path, shortest_paths, UNREACHABLE
from .instance import Instance, big_m
from .model import var_reduction_pct


class ReductionError(RuntimeError):
    """A relevant pair lost its connection during reduction (should not happen)."""


@dataclass(frozen=True)
class ReductionReport:
    arcs_before: int
    arcs_after: int
    nodes_before: int
    nodes_after: int
    removed_arc_ids: tuple[int, ...]
    removed_node_ids: tuple[int, ...]
    var_reduction_estimate_abf: float
    var_reduction_estimate_nbf: float
    step1_arcs: int = 0  # arcs touching a relevant node (informational)

    def to_dict(self) -> dict:
        return {
            "arcs_before": self.arcs_before,
            "arcs_after": self.arcs_after,
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "removed_arc_ids": list(self.removed_arc_ids),
            "removed_node_ids": list(self.removed_node_ids),
            "var_reduction_estimate_abf": self.var_reduction_estimate_abf,
            "var_reduction_estimate_nbf": self.var_reduction_estimate_nbf,
            "step1_arcs": self.step1_arcs,
        }


def marked_arcs(graph: Graph, relevant) -> set[int]:
    """Arc ids on the Dijkstra predecessor path between every ordered relevant pair."""
    relevant = sorted(relevant)
    marked: set[int] = set()
    for u in relevant:
        tree = shortest_paths(graph, u)
        for v in relevant:
            if v == u:
                continue
            path = reconstruct_path(graph, tree, v)
            if path is None:
                raise ValueError(f"relevant node {v} is unreachable from {u}")
            marked.update(path)
    return marked


def reduce(instance: Instance) -> tuple[Instance, ReductionReport]:
    g = instance.graph
    relevant = {0, *instance.required}

    step1 = [a.id for a in g.arcs if a.tail in relevant or a.head in relevant]
    keep = marked_arcs(g, relevant)

    kept = [a for a in g.arcs if a.id in keep]
    nodes = sorted(v for v in g.nodes if v in relevant or any(a.tail == v or a.head == v for a in kept))
    new_graph = Graph(nodes, [Arc(k, a.tail, a.head, a.length) for k, a in enumerate(kept)])

    for u in sorted(relevant):
        before = shortest_paths(g, u)
        after = shortest_paths(new_graph, u)
        for v in relevant:
            if after[v][0] == UNREACHABLE or after[v][0] != before[v][0]:
                raise ReductionError(f"distance {u}->{v} changed by the reduction")

    def restrict(table):
        return {v: table[v] for v in nodes}

    b, s = restrict(instance.b), restrict(instance.s)
    reduced = replace(
        instance,
        graph=new_graph,
        a=restrict(instance.a),
        b=b,
        s=s,
        d=restrict(instance.d),
        M=big_m(new_graph, b, s),
        coords={v: xy for v, xy in instance.coords.items() if v in new_graph},
    )
    pct = var_reduction_pct((g.n_nodes, g.n_arcs), (new_graph.n_nodes, new_graph.n_arcs))
    report = ReductionReport(
        arcs_before=g.n_arcs,
        arcs_after=new_graph.n_arcs,
        nodes_before=g.n_nodes,
        nodes_after=new_graph.n_nodes,
        removed_arc_ids=tuple(a.id for a in g.arcs if a.id not in keep),
        removed_node_ids=tuple(v for v in g.nodes if v not in new_graph),
        var_reduction_estimate_abf=pct,
        var_reduction_estimate_nbf=pct,
        step1_arcs=len(step1),
    )
    return reduced, report
