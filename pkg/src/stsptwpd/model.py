"""Time-indexed MILP models for the routing problem and an assignment checker.

Both formulations share the same layout: ``T = |A|`` time steps, a binary
``y`` per (arc, step), a service binary ``x`` per (node, step), a departure
time ``tau`` and a free-capacity level ``q`` per (node, step).  The arc-based
model names routing variables by arc id, the node-based one by endpoint pair.

Families and index ranges (``T = |A|``; ``n = |V|``; ``r = |V_r|``)::

    depot_start_first            1
    depot_start_total            1
    depot_arc_restriction_k      T - |out(0)|      (arc-based only)
    node_start_i                 n - 1             (node-based only)
    depot_flow_balance           1
    flow_conservation_i_t        (n - 1)(T - 1)
    service_link_i_t             n T
    single_service_i             r
    time_consistency_k_t         T (T - 1)
    time_link_i_t                n T
    window_lower_i_t             r T               (dropped without time windows)
    window_upper_i_t             r T               (dropped without time windows)
    initial_load_depot           1
    initial_load_i               n - 1
    load_link_i_t                n T
    load_propagation_j_t         (n - 1) T
    return_load                  1
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .instance import Instance, check_variant

FORMULATIONS = ("ABF", "NBF")
SENSES = ("=", "<=", ">=")
TOLERANCE = 1e-6


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" | "continuous"
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    name: str
    coefs: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    sense: str
    rhs: float

    @property
    def family(self) -> str:
        return _family(self.name)


def _family(name: str) -> str:
    parts = name.split("_")
    while parts and parts[-1].lstrip("-").isdigit():
        parts.pop()
    return "_".join(parts)


@dataclass(frozen=True)
class ModelSpec:
    variables: tuple[Variable, ...]
    objective: tuple[tuple[int, float], ...]
    constraints: tuple[Constraint, ...]
    formulation: str
    variant: str
    index: Mapping[str, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        if not self.index:
            object.__setattr__(self, "index", {v.name: k for k, v in enumerate(self.variables)})
        if len(self.index) != len(self.variables):
            raise ValueError("variable names must be unique")
        n = len(self.variables)
        for c in self.constraints:
            if c.sense not in SENSES:
                raise ValueError(f"constraint {c.name} has unknown sense {c.sense!r}")
            for k, _ in c.coefs:
                if not 0 <= k < n:
                    raise ValueError(f"constraint {c.name} references an undeclared variable")

    @property
    def n_binary(self) -> int:
        return sum(v.kind == "binary" for v in self.variables)

    @property
    def n_continuous(self) -> int:
        return sum(v.kind == "continuous" for v in self.variables)

    def sense_counts(self) -> dict[str, int]:
        out = {s: 0 for s in SENSES}
        for c in self.constraints:
            out[c.sense] += 1
        return out

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.family] = out.get(c.family, 0) + 1
        return out

    def constraint(self, name: str) -> Constraint:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        names = [v.name for v in self.variables]
        return {
            "formulation": self.formulation,
            "variant": self.variant,
            "variables": [{"name": v.name, "kind": v.kind, "lower": v.lower, "upper": v.upper} for v in self.variables],
            "objective": {names[k]: c for k, c in self.objective},
            "constraints": [
                {"name": c.name, "coefs": {names[k]: v for k, v in c.coefs}, "sense": c.sense, "rhs": c.rhs}
                for c in self.constraints
            ],
        }


class Assignment(dict):
    """Variable name -> value, checked against a model's domains on creation."""

    def __init__(self, values: Mapping[str, float], model: ModelSpec | None = None):
        super().__init__((str(k), float(v)) for k, v in values.items())
        if model is not None:
            self.validate(model)

    def validate(self, model: ModelSpec) -> None:
        for var in model.variables:
            if var.name not in self:
                continue
            val = self[var.name]
            if var.kind == "binary" and val not in (0.0, 1.0):
                raise ValueError(f"binary variable {var.name} has non-integral value {val}")
            if val < var.lower - TOLERANCE or val > var.upper + TOLERANCE:
                raise ValueError(f"variable {var.name} = {val} outside [{var.lower}, {var.upper}]")


@dataclass(frozen=True)
class Violation:
    name: str
    lhs: float
    sense: str
    rhs: float
    slack: float  # signed: negative means violated


@dataclass(frozen=True)
class ViolationReport:
    violations: tuple[Violation, ...]
    worst: float
    objective: float
    tolerance: float = TOLERANCE

    @property
    def feasible(self) -> bool:
        return self.worst <= self.tolerance

    def __bool__(self) -> bool:
        return self.feasible


# -- building ---------------------------------------------------------------


class _Builder:
    def __init__(self):
        self.variables: list[Variable] = []
        self.index: dict[str, int] = {}
        self.constraints: list[Constraint] = []

    def var(self, name: str, kind: str, lower: float, upper: float) -> None:
        self.index[name] = len(self.variables)
        self.variables.append(Variable(name, kind, lower, upper))

    def add(self, name: str, terms: Iterable[tuple[str, float]], sense: str, rhs: float) -> None:
        merged: dict[int, float] = {}
        for var, coef in terms:
            k = self.index[var]
            merged[k] = merged.get(k, 0.0) + coef
        coefs = tuple((k, c) for k, c in merged.items() if c != 0.0)
        self.constraints.append(Constraint(name, coefs, sense, float(rhs)))


def _build(inst: Instance, variant: str, formulation: str, tail_service: bool = False) -> ModelSpec:
    check_variant(variant)
    g = inst.graph
    if g.n_arcs == 0:
        raise ValueError("instance graph has no arcs")
    if 0 not in g:
        raise ValueError("instance graph has no depot")
    T = g.n_arcs
    V = g.nodes
    customers = [v for v in V if v != 0]
    Vr = inst.required
    Q, M = inst.Q, inst.M
    arcs = g.arcs
    abf = formulation == "ABF"

    def y(k: int, t: int) -> str:
        a = arcs[k]
        return f"y_{k}_{t}" if abf else f"y_{a.tail}_{a.head}_{t}"

    m = _Builder()
    for t in range(1, T + 1):
        for k in range(T):
            m.var(y(k, t), "binary", 0.0, 1.0)
    for i in V:
        for t in range(1, T + 1):
            m.var(f"x_{i}_{t}", "binary", 0.0, 1.0)
    for i in V:
        for t in range(T + 1):
            m.var(f"tau_{i}_{t}", "continuous", 0.0, math.inf)
    for i in V:
        for t in range(T + 1):
            m.var(f"q_{i}_{t}", "continuous", 0.0, Q)

    out0 = g.out_arcs(0)
    in0 = g.in_arcs(0)

    objective = [(m.index[y(k, t)], arcs[k].length) for t in range(1, T + 1) for k in range(T)]

    m.add("depot_start_first", [(y(k, 1), 1.0) for k in out0], "=", 1.0)
    m.add("depot_start_total", [(y(k, t), 1.0) for t in range(1, T + 1) for k in out0], "=", 1.0)
    if abf:
        for k in range(T):
            if arcs[k].tail != 0:
                m.add(f"depot_arc_restriction_{k}", [(y(k, 1), 1.0)], "=", 0.0)
    else:
        for i in customers:
            m.add(f"node_start_{i}", [(y(k, 1), 1.0) for k in g.out_arcs(i)], "=", 0.0)
    m.add(
        "depot_flow_balance",
        [(y(k, t), 1.0) for t in range(1, T + 1) for k in out0]
        + [(y(k, t), -1.0) for t in range(1, T + 1) for k in in0],
        "=",
        0.0,
    )
    for i in customers:
        for t in range(1, T):
            m.add(
                f"flow_conservation_{i}_{t}",
                [(y(k, t), 1.0) for k in g.in_arcs(i)] + [(y(k, t + 1), -1.0) for k in g.out_arcs(i)],
                "=",
                0.0,
            )
    for i in V:
        for t in range(1, T + 1):
            m.add(
                f"service_link_{i}_{t}",
                [(f"x_{i}_{t}", 1.0)] + [(y(k, t), -M) for k in g.in_arcs(i)],
                "<=",
                0.0,
            )
    for i in Vr:
        m.add(f"single_service_{i}", [(f"x_{i}_{t}", 1.0) for t in range(1, T + 1)], "=", 1.0)
    for k, arc in enumerate(arcs):
        i, j = arc.tail, arc.head
        serv = inst.s[i] if tail_service else inst.s[j]
        for t in range(T - 1):
            m.add(
                f"time_consistency_{k}_{t}",
                [
                    (f"tau_{j}_{t + 1}", 1.0),
                    (f"tau_{i}_{t}", -1.0),
                    (f"x_{j}_{t + 1}", -serv),
                    (y(k, t + 1), -M),
                ],
                ">=",
                arc.length - M,
            )
    for i in V:
        for t in range(1, T + 1):
            m.add(
                f"time_link_{i}_{t}",
                [(f"tau_{i}_{t}", 1.0)] + [(y(k, t), -M) for k in g.in_arcs(i)],
                "<=",
                0.0,
            )
    if variant != "no_time_windows":
        for i in Vr:
            for t in range(1, T + 1):
                m.add(
                    f"window_lower_{i}_{t}",
                    [(f"tau_{i}_{t}", 1.0), (f"x_{i}_{t}", -(inst.a[i] + inst.s[i]))],
                    ">=",
                    0.0,
                )
        for i in Vr:
            for t in range(1, T + 1):
                m.add(
                    f"window_upper_{i}_{t}",
                    [(f"tau_{i}_{t}", 1.0), (f"x_{i}_{t}", M - inst.b[i] - inst.s[i])],
                    "<=",
                    M,
                )
    m.add("initial_load_depot", [("q_0_0", 1.0)], "=", 0.0 if variant == "delivery_only" else Q)
    for i in customers:
        m.add(f"initial_load_{i}", [(f"q_{i}_0", 1.0)], "<=", 0.0)
    for i in V:
        for t in range(1, T + 1):
            m.add(
                f"load_link_{i}_{t}",
                [(f"q_{i}_{t}", 1.0)] + [(y(k, t), -Q) for k in g.in_arcs(i)],
                "<=",
                0.0,
            )
    for j in customers:
        preds = sorted({arcs[k].tail for k in g.in_arcs(j)})
        for t in range(T):
            m.add(
                f"load_propagation_{j}_{t}",
                [(f"q_{j}_{t + 1}", 1.0)]
                + [(f"q_{i}_{t}", -1.0) for i in preds]
                + [(f"x_{j}_{t + 1}", inst.d[j])]
                + [(y(k, t + 1), -Q) for k in g.in_arcs(j)],
                ">=",
                -Q,
            )
    m.add("return_load", [(f"q_0_{t}", 1.0) for t in range(1, T + 1)], "=", return_load_rhs(inst, variant))

    return ModelSpec(
        variables=tuple(m.variables),
        objective=tuple(objective),
        constraints=tuple(m.constraints),
        formulation=formulation,
        variant=variant,
        index=m.index,
    )


def return_load_rhs(inst: Instance, variant: str) -> float:
    total = math.fsum(inst.d[i] for i in inst.required)
    return inst.Q + total if variant == "delivery_only" else inst.Q - total


def initial_load(inst: Instance, variant: str) -> float:
    return 0.0 if variant == "delivery_only" else inst.Q


def build_abf(instance: Instance, variant: str = "full", tail_service: bool = False) -> ModelSpec:
    """Arc-indexed model.

    ``tail_service=True`` charges the tail node's service time in the time
    consistency rows instead of the head's.  That reading rejects ordinary
    routes whenever neighbouring service times differ, so it is off by default.
    """
    return _build(instance, variant, "ABF", tail_service)


def build_nbf(instance: Instance, variant: str = "full") -> ModelSpec:
    """Node-pair-indexed model; same rows as :func:`build_abf` apart from the start rules."""
    return _build(instance, variant, "NBF")


def build_model(instance: Instance, formulation: str, variant: str = "full") -> ModelSpec:
    f = formulation.upper()
    if f == "ABF":
        return build_abf(instance, variant)
    if f == "NBF":
        return build_nbf(instance, variant)
    raise ValueError(f"unknown formulation {formulation!r}")


# -- counts -----------------------------------------------------------------


def variable_counts(n_nodes: int, n_arcs: int) -> tuple[int, int]:
    """(binary, continuous) variable counts of either formulation."""
    return n_arcs * n_arcs + n_nodes * n_arcs, 2 * n_nodes * (n_arcs + 1)


def constraint_counts(
    n_nodes: int,
    n_arcs: int,
    n_required: int,
    depot_out_degree: int,
    formulation: str = "ABF",
    variant: str = "full",
) -> dict[str, int]:
    """Closed-form row counts by sense, matching what the builders emit."""
    n, T, r = n_nodes, n_arcs, n_required
    windows = 0 if variant == "no_time_windows" else 1
    start = T - depot_out_degree if formulation.upper() == "ABF" else n - 1
    eq = 1 + 1 + start + 1 + (n - 1) * (T - 1) + r + 1 + 1
    le = n * T + n * T + windows * r * T + (n - 1) + n * T
    ge = T * (T - 1) + windows * r * T + (n - 1) * T
    return {"=": eq, "<=": le, ">=": ge, "total": eq + le + ge}


def var_reduction_pct(before: tuple[int, int], after: tuple[int, int]) -> float:
    """Percentage drop in total variable count given (nodes, arcs) before/after."""
    vb = sum(variable_counts(*before))
    va = sum(variable_counts(*after))
    return 100.0 * (1.0 - va / vb)


# -- checking ---------------------------------------------------------------


def check_assignment(model: ModelSpec, assignment: Mapping[str, float], tolerance: float = TOLERANCE) -> ViolationReport:
    """Evaluate every row; the report lists violated rows only."""
    values = [0.0] * len(model.variables)
    for var in model.variables:
        if var.name not in assignment:
            raise ValueError(f"assignment is missing variable {var.name}")
        values[model.index[var.name]] = float(assignment[var.name])
    worst = 0.0
    bad: list[Violation] = []
    for var, val in zip(model.variables, values):
        gap = max(var.lower - val, val - var.upper, 0.0)
        if var.kind == "binary" and val not in (0.0, 1.0):
            gap = max(gap, min(abs(val), abs(val - 1.0)))
        if gap > tolerance:
            bad.append(Violation(f"bounds_{var.name}", val, "in", var.upper, -gap))
        worst = max(worst, gap)
    for c in model.constraints:
        lhs = math.fsum(coef * values[k] for k, coef in c.coefs)
        if c.sense == "=":
            slack = -abs(lhs - c.rhs)
        elif c.sense == "<=":
            slack = c.rhs - lhs
        else:
            slack = lhs - c.rhs
        if slack < -tolerance:
            bad.append(Violation(c.name, lhs, c.sense, c.rhs, slack))
        worst = max(worst, -slack)
    objective = math.fsum(coef * values[k] for k, coef in model.objective)
    return ViolationReport(tuple(bad), worst, objective, tolerance)


# -- LP export --------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _expr(coefs: Iterable[tuple[int, float]], names: list[str]) -> str:
    parts = []
    for k, c in coefs:
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(c))} {names[k]}")
    if not parts:
        return "0 " + names[0]
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else "-" + text[1:]


def _wrap(text: str, width: int = 200) -> list[str]:
    # LP readers cap line length; break only between terms
    lines, cur = [], ""
    for tok in text.split(" "):
        if cur and len(cur) + 1 + len(tok) > width and tok in "+-":
            lines.append(cur)
            cur = tok
        else:
            cur = f"{cur} {tok}" if cur else tok
    if cur:
        lines.append(cur)
    return lines


def export_lp(model: ModelSpec) -> str:
    """CPLEX-LP text; variables in declaration order, rows sorted by name."""
    names = [v.name for v in model.variables]
    out = ["\\ " + f"{model.formulation} {model.variant}", "Minimize"]
    obj = sorted(model.objective, key=lambda kc: kc[0])
    out += ["  " + line for line in _wrap("obj: " + _expr(obj, names))]
    out.append("Subject To")
    sense = {"=": "=", "<=": "<=", ">=": ">="}
    for c in sorted(model.constraints, key=lambda c: c.name):
        coefs = sorted(c.coefs, key=lambda kc: kc[0])
        body = f"{c.name}: {_expr(coefs, names)} {sense[c.sense]} {_fmt(c.rhs)}"
        out += ["  " + line for line in _wrap(body)]
    out.append("Bounds")
    for v in model.variables:
        if v.kind == "binary":
            continue
        upper = "+inf" if math.isinf(v.upper) else _fmt(v.upper)
        out.append(f"  {_fmt(v.lower)} <= {v.name} <= {upper}")
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    if binaries:
        out.append("Binaries")
        for pos in range(0, len(binaries), 10):
            out.append("  " + " ".join(binaries[pos : pos + 10]))
    out.append("End")
    return "\n".join(out) + "\n"
