"""Benchmark instance generation and the instance JSON format.

Nodes sit on a circle, edges are picked greedily by length under two
geometric rules (no crossings, no angle under 60 degrees at a shared vertex),
then a repair pass adds single directed arcs until the digraph is strongly
connected.  Randomness comes from numpy's PCG64 seeded with ``[seed, stream]``
so edges and parameters draw from independent, reproducible streams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import Arc, Graph, longest_simple_path, shortest_paths, UNREACHABLE

VARIANTS = ("full", "no_time_windows", "delivery_only")
UNRESTRICTED_B = 100000.0
MIN_ANGLE = math.pi / 3
ALPHA = 0.7
BETA = 0.3
DEFAULT_RADIUS = 100.0
DEFAULT_FRACTION = 0.7

_EDGE_STREAM = 1
_PARAM_STREAM = 2


class GenerationError(RuntimeError):
    """The geometric rules left the graph without a strongly connected repair."""

    def __init__(self, seed: int, message: str = ""):
        self.seed = seed
        super().__init__(message or f"could not make the graph strongly connected (seed {seed}); retry with seed {seed + 1}")


def check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {', '.join(VARIANTS)}")
    return variant


def big_m(graph: Graph, b: Mapping[int, float], s: Mapping[int, float]) -> float:
    return max(b[v] for v in graph.nodes) + max(s[v] for v in graph.nodes) + max(a.length for a in graph.arcs)


def required_count(n: int, fraction: float) -> int:
    """Number of required customers for ``n`` nodes (depot included).

    Rounds up, which is what reproduces the published model sizes.  The small
    epsilon keeps exact products such as 0.7 * 10 from rounding to 8.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"required fraction must lie in (0, 1), got {fraction}")
    r = math.ceil(fraction * (n - 1) - 1e-9)
    if r < 1:
        raise ValueError(f"fraction {fraction} selects no required node out of {n - 1}")
    return min(r, n - 1)


@dataclass(frozen=True)
class Instance:
    graph: Graph
    required: tuple[int, ...]
    a: Mapping[int, float]
    b: Mapping[int, float]
    s: Mapping[int, float]
    d: Mapping[int, float]
    Q: float
    M: float
    seed: int | None = None
    variant_hint: str = "full"
    coords: Mapping[int, tuple[float, float]] = field(default_factory=dict)
    radius: float = DEFAULT_RADIUS
    fraction: float = DEFAULT_FRACTION

    def __post_init__(self):
        nodes = set(self.graph.nodes)
        req = tuple(sorted(self.required))
        object.__setattr__(self, "required", req)
        if not req:
            raise ValueError("instance has no required node")
        if 0 in req or not set(req) <= nodes:
            raise ValueError("required nodes must be non-depot nodes of the graph")
        for name in ("a", "b", "s", "d"):
            table = getattr(self, name)
            missing = nodes - set(table)
            if missing:
                raise ValueError(f"parameter {name} missing for nodes {sorted(missing)}")
            object.__setattr__(self, name, {v: float(table[v]) for v in self.graph.nodes})
        check_variant(self.variant_hint)
        for v in req:
            if not 0 <= self.a[v] <= self.b[v]:
                raise ValueError(f"node {v}: window [{self.a[v]}, {self.b[v]}] is invalid")
            if self.d[v] == 0:
                raise ValueError(f"required node {v} has zero demand")
        if self.Q < sum(abs(self.d[v]) for v in nodes):
            raise ValueError("capacity Q is below the total absolute demand")

    @property
    def n(self) -> int:
        return self.graph.n_nodes

    def with_variant(self, variant: str) -> "Instance":
        from dataclasses import replace

        return replace(self, variant_hint=check_variant(variant))


# -- geometry ---------------------------------------------------------------


def generate_layout(n: int, radius: float = DEFAULT_RADIUS, seed: int | None = None) -> list[tuple[int, float, float]]:
    """Evenly spaced points on a circle; node 0 (the depot) sits at angle 0.

    ``seed`` is accepted so every generation stage shares one signature, but
    the layout itself involves no randomness.
    """
    if n < 3:
        raise ValueError(f"need at least 3 nodes, got {n}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    return [(i, radius * math.cos(2 * math.pi * i / n), radius * math.sin(2 * math.pi * i / n)) for i in range(n)]


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _sign(x: float, scale: float) -> int:
    eps = 1e-12 * scale * scale
    return 0 if abs(x) <= eps else (1 if x > 0 else -1)


def _on_segment(p, q, r) -> bool:
    # r collinear with p-q: is it within the bounding box?
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segments_conflict(p1, p2, q1, q2, scale: float = 1.0) -> bool:
    """True if two segments cross properly or overlap collinearly.

    Touching at a shared endpoint is fine; any other contact is a conflict.
    """
    shared = {tuple(p1), tuple(p2)} & {tuple(q1), tuple(q2)}
    o1 = _sign(_orient(p1, p2, q1), scale)
    o2 = _sign(_orient(p1, p2, q2), scale)
    o3 = _sign(_orient(q1, q2, p1), scale)
    o4 = _sign(_orient(q1, q2, p2), scale)
    if o1 == o2 == o3 == o4 == 0:
        # collinear: conflict unless they only meet at one shared endpoint
        if {tuple(p1), tuple(p2)} == {tuple(q1), tuple(q2)}:
            return True
        overlap = [r for r in (q1, q2) if _on_segment(p1, p2, r)] + [r for r in (p1, p2) if _on_segment(q1, q2, r)]
        return any(tuple(r) not in shared for r in overlap)
    if shared:
        return False
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    # an endpoint lying in the interior of the other segment
    return (
        (o1 == 0 and _on_segment(p1, p2, q1))
        or (o2 == 0 and _on_segment(p1, p2, q2))
        or (o3 == 0 and _on_segment(q1, q2, p1))
        or (o4 == 0 and _on_segment(q1, q2, p2))
    )


def vertex_angle(center, p, q) -> float:
    """Angle at ``center`` between rays towards ``p`` and ``q`` (radians)."""
    ux, uy = p[0] - center[0], p[1] - center[1]
    vx, vy = q[0] - center[0], q[1] - center[1]
    return abs(math.atan2(ux * vy - uy * vx, ux * vx + uy * vy))


class _Plane:
    """Accepted undirected segments plus the admissibility test."""

    def __init__(self, points: Mapping[int, tuple[float, float]], scale: float):
        self.points = points
        self.scale = scale
        self.segments: set[frozenset[int]] = set()
        self.incident: dict[int, set[int]] = {v: set() for v in points}

    def admissible(self, i: int, j: int) -> bool:
        if frozenset((i, j)) in self.segments:
            return True
        pi, pj = self.points[i], self.points[j]
        for seg in self.segments:
            u, v = tuple(seg)
            if segments_conflict(pi, pj, self.points[u], self.points[v], self.scale):
                return False
        for end, other in ((i, j), (j, i)):
            for k in self.incident[end]:
                if vertex_angle(self.points[end], self.points[other], self.points[k]) < MIN_ANGLE - 1e-9:
                    return False
        return True

    def add(self, i: int, j: int) -> None:
        self.segments.add(frozenset((i, j)))
        self.incident[i].add(j)
        self.incident[j].add(i)


def _dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def _ranked(candidates: Iterable[tuple[float, int, int]], rng: np.random.Generator) -> list[tuple[int, int]]:
    """Sort (length, tail, head) by length; equal lengths come out in random order."""
    rows = sorted(candidates, key=lambda c: (round(c[0], 9), c[1], c[2]))
    out: list[tuple[int, int]] = []
    pos = 0
    while pos < len(rows):
        end = pos
        while end < len(rows) and round(rows[end][0], 9) == round(rows[pos][0], 9):
            end += 1
        group = rows[pos:end]
        if len(group) > 1:
            group = [group[k] for k in rng.permutation(len(group))]
        out.extend((t, h) for _, t, h in group)
        pos = end
    return out


def select_edges(coords: Sequence[tuple[int, float, float]], seed: int) -> Graph:
    """Planar-ish sparse digraph over the layout (see module docstring)."""
    points = {int(i): (float(x), float(y)) for i, x, y in coords}
    if 0 not in points or len(points) < 3:
        raise ValueError("coords must contain the depot and at least 3 nodes")
    scale = max(max(abs(x), abs(y)) for x, y in points.values()) or 1.0
    rng = np.random.default_rng([seed, _EDGE_STREAM])
    plane = _Plane(points, scale)
    arcs: set[tuple[int, int]] = set()

    def try_add(options: list[tuple[int, int]]) -> bool:
        for t, h in options:
            if (t, h) not in arcs and plane.admissible(t, h):
                plane.add(t, h)
                arcs.add((t, h))
                return True
        return False

    customers = sorted(v for v in points if v != 0)
    # The depot takes no part in the greedy pass, so its repair arcs are placed
    # first; otherwise a chord between its two neighbours can fence it off.
    try_add(_ranked(((_dist(points[0], points[u]), 0, u) for u in customers), rng))
    try_add(_ranked(((_dist(points[0], points[u]), u, 0) for u in customers), rng))
    candidates = sorted(
        ((_dist(points[i], points[j]), i, j) for i in customers for j in customers if i < j),
        key=lambda c: (round(c[0], 9), c[1], c[2]),
    )
    for _, i, j in candidates:
        if plane.admissible(i, j):
            plane.add(i, j)
            arcs.add((i, j))
            arcs.add((j, i))

    nodes = sorted(points)
    # vertices with no way out or no way in get one arc to/from the nearest admissible neighbour
    for v in nodes:
        if not any(t == v for t, _ in arcs):
            try_add(_ranked(((_dist(points[v], points[u]), v, u) for u in nodes if u != v), rng))
        if not any(h == v for _, h in arcs):
            try_add(_ranked(((_dist(points[v], points[u]), u, v) for u in nodes if u != v), rng))

    index = {v: k for k, v in enumerate(nodes)}
    while True:
        rows = [index[t] for t, _ in arcs]
        cols = [index[h] for _, h in arcs]
        mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
        n_comp, label = connected_components(mat, directed=True, connection="strong")
        if n_comp == 1:
            break
        comp_of = {v: int(label[index[v]]) for v in nodes}
        has_out = {c: False for c in range(n_comp)}
        has_in = {c: False for c in range(n_comp)}
        for t, h in arcs:
            if comp_of[t] != comp_of[h]:
                has_out[comp_of[t]] = True
                has_in[comp_of[h]] = True
        added = False
        for c in sorted(range(n_comp), key=lambda c: min(v for v in nodes if comp_of[v] == c)):
            inside = [v for v in nodes if comp_of[v] == c]
            outside = [v for v in nodes if comp_of[v] != c]
            if not has_out[c]:
                added = try_add(_ranked(((_dist(points[u], points[w]), u, w) for u in inside for w in outside), rng))
            if not added and not has_in[c]:
                added = try_add(_ranked(((_dist(points[u], points[w]), w, u) for u in inside for w in outside), rng))
            if added:
                break
        if not added:
            raise GenerationError(seed)

    ordered = sorted(arcs)
    return Graph(nodes, [Arc(k, t, h, _dist(points[t], points[h])) for k, (t, h) in enumerate(ordered)])


# -- parameters -------------------------------------------------------------


def _open_uniform(rng: np.random.Generator, low: float, high: float) -> float:
    """Uniform draw from the open interval (low, high).

    Intervals only a few ulps wide (equal shortest and longest paths) collapse
    to their midpoint.
    """
    for _ in range(8):
        x = float(rng.uniform(low, high))
        if low < x < high:
            return x
    return low + (high - low) / 2


def blend_targets(lmin: float, lmax: float) -> tuple[float, float]:
    """The two window anchors between the shortest and longest depot distance."""
    return ALPHA * lmin + (1 - ALPHA) * lmax, BETA * lmin + (1 - BETA) * lmax


def draw_capacity(demands: Iterable[float], rng: np.random.Generator) -> float:
    """Total absolute demand plus a slack drawn between the smallest and largest |d|."""
    mags = [abs(x) for x in demands if x != 0]
    if not mags:
        raise ValueError("no nonzero demand to size the vehicle")
    return math.fsum(mags) + _open_uniform(rng, min(mags), max(mags))


def assign_parameters(
    graph: Graph,
    required_fraction: float = DEFAULT_FRACTION,
    seed: int = 0,
    variant: str = "full",
    coords: Mapping[int, tuple[float, float]] | None = None,
    radius: float = DEFAULT_RADIUS,
    max_nodes: int | None = None,
) -> Instance:
    check_variant(variant)
    rng = np.random.default_rng([seed, _PARAM_STREAM])
    customers = [v for v in graph.nodes if v != 0]
    r = required_count(graph.n_nodes, required_fraction)
    required = sorted(int(v) for v in rng.choice(customers, size=r, replace=False))

    tree = shortest_paths(graph, 0)
    lmin = {v: tree[v][0] for v in required}
    if any(x == UNREACHABLE for x in lmin.values()):
        raise ValueError("some required node is unreachable from the depot")
    kwargs = {} if max_nodes is None else {"max_nodes": max_nodes}
    lmax = longest_simple_path(graph, 0, required, **kwargs)

    a = {v: 0.0 for v in graph.nodes}
    b = {v: UNRESTRICTED_B for v in graph.nodes}
    s = {v: 0.0 for v in graph.nodes}
    d = {v: 0.0 for v in graph.nodes}

    order = [required[k] for k in rng.permutation(r)]
    early = set(order[: math.ceil(r / 2)])
    for v in required:
        l1, l2 = blend_targets(lmin[v], lmax[v])
        base = l1 if v in early else l2
        a[v] = base + _open_uniform(rng, 0.0, 0.5 * base)
        b[v] = a[v] + _open_uniform(rng, min(l1, l2), max(l1, l2))
        s[v] = float(rng.integers(5, 11))

    order = [required[k] for k in rng.permutation(r)]
    pickups = set() if variant == "delivery_only" else set(order[: math.ceil(r / 2)])
    for v in required:
        d[v] = float(rng.integers(10, 21)) if v in pickups else float(rng.integers(-5, 0))

    Q = draw_capacity([d[v] for v in required], rng)
    return Instance(
        graph=graph,
        required=tuple(required),
        a=a,
        b=b,
        s=s,
        d=d,
        Q=Q,
        M=big_m(graph, b, s),
        seed=seed,
        variant_hint=variant,
        coords=dict(coords or {}),
        radius=radius,
        fraction=required_fraction,
    )


def generate_instance(
    n: int,
    seed: int,
    radius: float = DEFAULT_RADIUS,
    fraction: float = DEFAULT_FRACTION,
    variant: str = "full",
) -> Instance:
    layout = generate_layout(n, radius, seed)
    graph = select_edges(layout, seed)
    coords = {i: (x, y) for i, x, y in layout}
    return assign_parameters(graph, fraction, seed, variant, coords=coords, radius=radius)


# -- JSON -------------------------------------------------------------------


def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite number {x}")
    text = format(x, ".17g")
    if "e" not in text and "." not in text:
        text += ".0"
    return text


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    close = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + close + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    return json.dumps(obj)


def dumps_json(obj) -> str:
    """JSON text with every float written at 17 significant digits."""
    return _dump(obj) + "\n"


def instance_to_dict(inst: Instance) -> dict:
    nodes = [
        {"id": v, "x": float(inst.coords[v][0]), "y": float(inst.coords[v][1])}
        if v in inst.coords
        else {"id": v, "x": 0.0, "y": 0.0}
        for v in inst.graph.nodes
    ]

    def table(m):
        return {str(v): float(m[v]) for v in inst.graph.nodes}

    return {
        "meta": {
            "seed": inst.seed,
            "n": inst.n,
            "radius": float(inst.radius),
            "fraction": float(inst.fraction),
            "variant": inst.variant_hint,
        },
        "nodes": nodes,
        "required": list(inst.required),
        "arcs": [{"id": a.id, "from": a.tail, "to": a.head, "length": a.length} for a in inst.graph.arcs],
        "params": {
            "a": table(inst.a),
            "b": table(inst.b),
            "s": table(inst.s),
            "d": table(inst.d),
            "Q": float(inst.Q),
            "M": float(inst.M),
        },
    }


def instance_to_json(inst: Instance) -> str:
    return dumps_json(instance_to_dict(inst))


def instance_from_dict(data: Mapping) -> Instance:
    try:
        meta = data["meta"]
        params = data["params"]
        nodes = [int(n["id"]) for n in data["nodes"]]
        coords = {int(n["id"]): (float(n["x"]), float(n["y"])) for n in data["nodes"]}
        arcs = sorted(data["arcs"], key=lambda a: int(a["id"]))
        graph = Graph(nodes, [Arc(int(a["id"]), int(a["from"]), int(a["to"]), float(a["length"])) for a in arcs])

        def table(key):
            return {int(k): float(v) for k, v in params[key].items()}

        return Instance(
            graph=graph,
            required=tuple(int(v) for v in data["required"]),
            a=table("a"),
            b=table("b"),
            s=table("s"),
            d=table("d"),
            Q=float(params["Q"]),
            M=float(params["M"]),
            seed=meta.get("seed"),
            variant_hint=meta.get("variant", "full"),
            coords=coords,
            radius=float(meta.get("radius", DEFAULT_RADIUS)),
            fraction=float(meta.get("fraction", DEFAULT_FRACTION)),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed instance document: {exc!r}") from exc


def instance_from_json(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_to_json(inst))


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_json(fh.read())
