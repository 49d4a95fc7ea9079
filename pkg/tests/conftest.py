import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stsptwpd.graph import Graph  # noqa: E402
from stsptwpd.instance import Instance, UNRESTRICTED_B  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

# Lines collected by the acceptance tests, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def make_instance(nodes, triples, required, *, a=None, b=None, s=None, d=None, Q=None, variant="full", M=None):
    """Hand-built instance; unspecified parameters take the non-required defaults."""
    g = Graph.from_arcs(nodes, triples)
    a = {v: 0.0 for v in g.nodes} | (a or {})
    b = {v: UNRESTRICTED_B for v in g.nodes} | (b or {})
    s = {v: 0.0 for v in g.nodes} | (s or {})
    d = {v: 0.0 for v in g.nodes} | (d or {})
    for v in required:
        d.setdefault(v, 1.0)
        if d[v] == 0:
            d[v] = -1.0
    if Q is None:
        Q = sum(abs(x) for x in d.values()) + 1.0
    if M is None:
        M = max(b.values()) + max(s.values()) + max(l for _, _, l in triples)
    return Instance(g, tuple(required), a, b, s, d, Q, M, variant_hint=variant)


def count_instance(n, m, depot_out, required=None):
    """Synthetic instance with n nodes, m arcs and the given depot out-degree."""
    from stsptwpd.instance import required_count

    pairs = [(0, j) for j in range(1, depot_out + 1)]
    others = [(i, j) for i in range(n) for j in range(n) if i != j and i != 0]
    for p in others:
        if len(pairs) == m:
            break
        pairs.append(p)
    assert len(pairs) == m, "not enough node pairs for that arc count"
    r = required if required is not None else required_count(n, 0.7)
    req = list(range(1, r + 1))
    return make_instance(
        range(n),
        [(i, j, 1.0 + (i * n + j) % 7) for i, j in pairs],
        req,
        a={v: 1.0 for v in req},
        b={v: 500.0 for v in req},
        s={v: 5.0 for v in req},
        d={v: (12.0 if k % 2 == 0 else -3.0) for k, v in enumerate(req)},
    )


@pytest.fixture
def triangle():
    """0->1 (3), 1->2 (4), 2->0 (5); node 2 required, no real windows."""
    return make_instance(range(3), [(0, 1, 3.0), (1, 2, 4.0), (2, 0, 5.0)], [2], d={2: 4.0})
