"""Slow, independent reference implementations used only by the tests.

Nothing here imports the path or solver code under test; they work from the
raw arc list of an instance.
"""

from __future__ import annotations

import math


def arc_list(graph):
    return [(a.tail, a.head, a.length) for a in graph.arcs]


def bellman_ford(nodes, arcs, source):
    dist = {v: math.inf for v in nodes}
    dist[source] = 0.0
    for _ in range(len(nodes) - 1):
        changed = False
        for i, j, l in arcs:
            if dist[i] + l < dist[j]:
                dist[j] = dist[i] + l
                changed = True
        if not changed:
            break
    return dist


def all_simple_paths(nodes, arcs, source):
    """Yield (end node, length) for every simple path starting at source."""
    succ = {v: [] for v in nodes}
    for i, j, l in arcs:
        succ[i].append((j, l))

    def walk(u, seen, length):
        yield u, length
        for v, l in succ[u]:
            if v not in seen:
                yield from walk(v, seen | {v}, length + l)

    yield from walk(source, {source}, 0.0)


def brute_longest(nodes, arcs, source):
    best = {v: -math.inf for v in nodes}
    for v, length in all_simple_paths(nodes, arcs, source):
        best[v] = max(best[v], length)
    return best


def segments_cross(p1, p2, q1, q2):
    """Proper crossing or collinear overlap; touching at a shared endpoint is allowed."""
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-7 else (1 if v > 0 else -1)

    def within(a, b, c):
        return min(a[0], b[0]) - 1e-9 <= c[0] <= max(a[0], b[0]) + 1e-9 and min(a[1], b[1]) - 1e-9 <= c[1] <= max(a[1], b[1]) + 1e-9

    same = lambda a, b: abs(a[0] - b[0]) < 1e-9 and abs(a[1] - b[1]) < 1e-9
    shared = [(a, b) for a in (p1, p2) for b in (q1, q2) if same(a, b)]
    o1, o2, o3, o4 = orient(p1, p2, q1), orient(p1, p2, q2), orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 == o2 == o3 == o4 == 0:
        # collinear pair: only a single shared endpoint with no overlap is fine
        if len(shared) == 2:
            return True
        pts = [c for c in (q1, q2) if within(p1, p2, c)] + [c for c in (p1, p2) if within(q1, q2, c)]
        return any(not any(same(c, s[0]) for s in shared) for c in pts)
    if shared:
        return False
    return o1 * o2 <= 0 and o3 * o4 <= 0


def walk_space_optimum(instance, variant):
    """Cheapest feasible depot-to-depot walk by exhaustive search.

    Walks have at most |A| arcs and touch the depot only at both ends.  At
    every arrival at an unserved required node the search branches on serving
    it (earliest start) or passing through.  Only a cost bound prunes.
    Returns (objective, walk) or (inf, None).
    """
    g = instance.graph
    arcs = arc_list(g)
    nodes = list(g.nodes)
    horizon = len(arcs)
    windows = variant != "no_time_windows"
    load0 = 0.0 if variant == "delivery_only" else instance.Q
    succ = {v: [] for v in nodes}
    for k, (i, j, l) in enumerate(arcs):
        succ[i].append((k, j, l))
    # lower bound on the cost back to the depot (reverse graph, unrestricted)
    back = bellman_ford(nodes, [(j, i, l) for i, j, l in arcs], 0)
    req = list(instance.required)
    bit = {v: 1 << p for p, v in enumerate(req)}
    full = (1 << len(req)) - 1
    best = [math.inf, None]

    def serve_options(v, t, load, mask):
        yield t, load, mask  # pass through
        if v in bit and not mask & bit[v]:
            start = max(t, instance.a[v]) if windows else t
            if windows and start > instance.b[v]:
                return
            nl = load - instance.d[v]
            if nl < 0 or nl > instance.Q:
                return
            yield start + instance.s[v], nl, mask | bit[v]

    def dfs(u, t, load, mask, cost, path):
        if len(path) >= horizon:
            return
        for k, v, l in succ[u]:
            c = cost + l
            if c + back[v] > best[0] * (1 + 1e-12):
                continue
            path.append(k)
            if v == 0:
                if mask == full:
                    total = math.fsum(arcs[a][2] for a in path)
                    if total < best[0]:
                        best[0], best[1] = total, list(path)
            else:
                for nt, nl, nm in serve_options(v, t + l, load, mask):
                    dfs(v, nt, nl, nm, c, path)
            path.pop()

    dfs(0, 0.0, load0, 0, 0.0, [])
    return best[0], best[1]
