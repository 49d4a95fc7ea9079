"""Route evaluation, an exhaustive oracle, a simulated-annealing heuristic, and
the mapping from routes to model assignments.

A route is an order over the required customers.  Consecutive stops are
joined by shortest paths that never pass through the depot (the models let
the vehicle leave the depot only once), service starts as early as the window
allows, and the objective is total travel length.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .graph import CapacityError, metric_closure
from .instance import Instance, check_variant
from .model import Assignment, ModelSpec, build_model, initial_load, return_load_rhs

DEFAULT_EXACT_CAP = 9


class SolveTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class Visit:
    node: int
    arrival: float
    service_start: float
    departure: float
    load_after: float
    served: bool


@dataclass(frozen=True)
class Solution:
    visit_order: tuple[int, ...]
    walk: tuple[int, ...]
    schedule: tuple[Visit, ...]
    objective: float
    feasible: bool
    solver: str = "schedule"
    variant: str = "full"
    reason: str = ""
    elapsed_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "visit_order": list(self.visit_order),
            "walk": list(self.walk),
            "schedule": [
                {
                    "node": v.node,
                    "arrival": v.arrival,
                    "service_start": v.service_start,
                    "departure": v.departure,
                    "load_after": v.load_after,
                    "served": v.served,
                }
                for v in self.schedule
            ],
            "objective": self.objective if math.isfinite(self.objective) else None,
            "feasible": self.feasible,
            "solver": self.solver,
            "variant": self.variant,
            "reason": self.reason,
            "elapsed_ms": self.elapsed_ms,
        }


def infeasible_solution(solver: str, variant: str, reason: str, elapsed_ms: float = 0.0) -> Solution:
    return Solution((), (), (), math.inf, False, solver, variant, reason, elapsed_ms)


@dataclass(frozen=True)
class Evaluation:
    """Relaxed evaluation of an order: travel cost plus how far it breaks the rules."""

    objective: float
    window_overshoot: float
    capacity_overshoot: float
    horizon_overshoot: int
    first_failure: str

    @property
    def feasible(self) -> bool:
        return not self.first_failure


class Router:
    """Per-(instance, variant) cache of leg distances and witness paths."""

    def __init__(self, instance: Instance, variant: str | None = None):
        self.instance = instance
        self.variant = check_variant(variant or instance.variant_hint)
        stops = (0, *instance.required)
        self.closure = metric_closure(instance.graph, stops, avoid=(0,))
        self.windows = self.variant != "no_time_windows"
        self.start_load = initial_load(instance, self.variant)

    def dist(self, u: int, v: int) -> float:
        return self.closure[(u, v)].distance

    def _check_order(self, order: Sequence[int]) -> tuple[int, ...]:
        order = tuple(int(v) for v in order)
        if sorted(order) != list(self.instance.required):
            raise ValueError(f"visit order {list(order)} is not a permutation of the required nodes")
        return order

    def evaluate(self, order: Sequence[int]) -> Evaluation:
        """Cost and rule violations without building the walk."""
        inst = self.instance
        order = self._check_order(order)
        t, load, arcs_used = 0.0, self.start_load, 0
        cost: list[float] = []
        win = cap = 0.0
        failure = ""
        prev = 0
        for v in (*order, 0):
            leg = self.closure[(prev, v)]
            if not leg.reachable:
                return Evaluation(math.inf, math.inf, 0.0, 0, f"no path from {prev} to {v}")
            for k in leg.arcs:
                t += inst.graph.arcs[k].length
                cost.append(inst.graph.arcs[k].length)
            arcs_used += len(leg.arcs)
            if v != 0:
                start = max(t, inst.a[v]) if self.windows else t
                if self.windows and start > inst.b[v]:
                    win += start - inst.b[v]
                    failure = failure or f"window missed at node {v}"
                t = start + inst.s[v]
                load -= inst.d[v]
                if load < 0 or load > inst.Q:
                    cap += -load if load < 0 else load - inst.Q
                    failure = failure or f"capacity exceeded at node {v}"
            prev = v
        extra = max(0, arcs_used - inst.graph.n_arcs)
        if extra:
            failure = failure or f"walk needs {arcs_used} arcs but the horizon is {inst.graph.n_arcs}"
        return Evaluation(math.fsum(cost), win, cap, extra, failure)

    def schedule(self, order: Sequence[int], solver: str = "schedule") -> Solution:
        inst = self.instance
        order = self._check_order(order)
        walk: list[int] = []
        visits = [Visit(0, 0.0, 0.0, 0.0, self.start_load, False)]
        t, load = 0.0, self.start_load
        failure = ""
        prev = 0
        for v in (*order, 0):
            leg = self.closure[(prev, v)]
            if not leg.reachable:
                return infeasible_solution(solver, self.variant, f"no path from {prev} to {v}")
            for pos, k in enumerate(leg.arcs):
                arc = inst.graph.arcs[k]
                walk.append(k)
                t += arc.length
                if pos < len(leg.arcs) - 1 or v == 0:
                    visits.append(Visit(arc.head, t, t, t, load, False))
            if v != 0:
                arrival = t
                start = max(arrival, inst.a[v]) if self.windows else arrival
                if self.windows and start > inst.b[v]:
                    failure = failure or f"window missed at node {v}"
                t = start + inst.s[v]
                load -= inst.d[v]
                if load < 0 or load > inst.Q:
                    failure = failure or f"capacity exceeded at node {v}"
                visits.append(Visit(v, arrival, start, t, load, True))
            prev = v
        if len(walk) > inst.graph.n_arcs:
            failure = failure or f"walk needs {len(walk)} arcs but the horizon is {inst.graph.n_arcs}"
        objective = math.fsum(inst.graph.arcs[k].length for k in walk)
        return Solution(order, tuple(walk), tuple(visits), objective, not failure, solver, self.variant, failure)


def schedule_route(instance: Instance, visit_order: Sequence[int], variant: str | None = None) -> Solution:
    """Earliest-start schedule of one visit order; ``feasible``/``reason`` say whether it works."""
    return Router(instance, variant).schedule(visit_order)


# -- exact ------------------------------------------------------------------


def solve_exact(
    instance: Instance,
    variant: str | None = None,
    cap: int = DEFAULT_EXACT_CAP,
    time_limit: float | None = None,
) -> Solution:
    """Best visit order by depth-first enumeration in lexicographic order.

    Prefixes that already miss a window, break capacity, or overrun the
    horizon are cut, as are prefixes whose cost plus a return lower bound
    cannot beat the incumbent.  Ties keep the lexicographically first order.
    """
    started = time.perf_counter()
    router = Router(instance, variant)
    req = instance.required
    if len(req) > cap:
        raise CapacityError(f"{len(req)} required nodes exceed the exact cap of {cap}; use solve_anneal instead")
    inst = instance
    horizon = inst.graph.n_arcs
    windows = router.windows
    dist = {key: entry.distance for key, entry in router.closure.items()}
    nlegs = {key: len(entry.arcs) for key, entry in router.closure.items()}
    deadline = None if time_limit is None else started + time_limit

    best: Solution | None = None
    best_cost = math.inf
    counter = 0
    order: list[int] = []
    remaining = list(req)

    def bound(prev: int, cost: float) -> float:
        lb = cost + dist[(prev, 0)]
        for u in remaining:
            lb = max(lb, cost + dist[(prev, u)] + dist[(u, 0)])
        return lb

    def dfs(prev: int, t: float, load: float, cost: float, arcs_used: int) -> None:
        nonlocal best, best_cost, counter
        counter += 1
        if deadline is not None and counter % 1024 == 0 and time.perf_counter() > deadline:
            raise SolveTimeout(f"exact search exceeded {time_limit} s")
        if not remaining:
            if arcs_used + nlegs[(prev, 0)] > horizon or dist[(prev, 0)] == math.inf:
                return
            sol = router.schedule(order, "oracle")
            if sol.feasible and sol.objective < best_cost:
                best, best_cost = sol, sol.objective
            return
        if bound(prev, cost) > best_cost * (1 + 1e-9) + 1e-9:
            return
        for pos, v in enumerate(list(remaining)):
            leg = dist[(prev, v)]
            if leg == math.inf:
                continue
            used = arcs_used + nlegs[(prev, v)]
            if used > horizon:
                continue
            arrival = t + leg
            start = max(arrival, inst.a[v]) if windows else arrival
            if windows and start > inst.b[v]:
                continue
            new_load = load - inst.d[v]
            if new_load < 0 or new_load > inst.Q:
                continue
            order.append(v)
            remaining.pop(pos)
            dfs(v, start + inst.s[v], new_load, cost + leg, used)
            remaining.insert(pos, v)
            order.pop()

    dfs(0, 0.0, router.start_load, 0.0, 0)
    elapsed = (time.perf_counter() - started) * 1000
    if best is None:
        return infeasible_solution("oracle", router.variant, "infeasible instance", elapsed)
    return _stamp(best, elapsed)


def _stamp(sol: Solution, elapsed_ms: float) -> Solution:
    return replace(sol, elapsed_ms=elapsed_ms)


# -- annealing --------------------------------------------------------------


@dataclass(frozen=True)
class AnnealConfig:
    iterations: int = 20000
    initial_temperature: float | None = None  # None: energy of the greedy order
    cooling_rate: float = 0.999
    restarts: int = 8
    seed: int = 0
    penalty_weight: float = 100.0
    time_limit: float | None = None  # seconds

    def __post_init__(self):
        if self.iterations < 0 or self.restarts < 1:
            raise ValueError("iterations must be >= 0 and restarts >= 1")
        if not 0 < self.cooling_rate < 1:
            raise ValueError(f"cooling_rate must lie in (0, 1), got {self.cooling_rate}")
        if self.initial_temperature is not None and not self.initial_temperature > 0:
            raise ValueError("initial_temperature must be positive")
        if self.penalty_weight < 0:
            raise ValueError("penalty_weight must be non-negative")


def greedy_order(router: Router) -> tuple[int, ...]:
    """Nearest feasible next stop; falls back to the nearest stop when none fits."""
    inst = router.instance
    left = list(inst.required)
    order: list[int] = []
    prev, t, load = 0, 0.0, router.start_load
    while left:
        def key(v):
            arrival = t + router.dist(prev, v)
            start = max(arrival, inst.a[v]) if router.windows else arrival
            ok = (not router.windows or start <= inst.b[v]) and 0 <= load - inst.d[v] <= inst.Q
            return (not ok, router.dist(prev, v), v)

        v = min(left, key=key)
        arrival = t + router.dist(prev, v)
        t = (max(arrival, inst.a[v]) if router.windows else arrival) + inst.s[v]
        load -= inst.d[v]
        order.append(v)
        left.remove(v)
        prev = v
    return tuple(order)


def _neighbour(order: list[int], u: Sequence[float]) -> list[int]:
    """Apply one random move; ``u`` holds three uniform draws in [0, 1)."""
    n = len(order)
    new = list(order)
    move = int(u[0] * 4)
    i = int(u[1] * n)
    j = int(u[2] * (n - 1))
    j += j >= i  # distinct from i
    if move == 0:
        i = min(i, n - 2)
        new[i], new[i + 1] = new[i + 1], new[i]
    elif move == 1:
        new[i], new[j] = new[j], new[i]
    elif move == 2:
        new.insert(j, new.pop(i))
    else:
        lo, hi = min(i, j), max(i, j)
        new[lo : hi + 1] = new[lo : hi + 1][::-1]
    return new


def solve_anneal(instance: Instance, variant: str | None = None, config: AnnealConfig | None = None) -> Solution:
    config = config or AnnealConfig()
    started = time.perf_counter()
    deadline = None if config.time_limit is None else started + config.time_limit
    router = Router(instance, variant)
    memo: dict[tuple[int, ...], tuple[float, Evaluation]] = {}

    def energy(order) -> tuple[float, Evaluation]:
        key = tuple(order)
        hit = memo.get(key)
        if hit is None:
            ev = router.evaluate(key)
            penalty = ev.window_overshoot + ev.capacity_overshoot + ev.horizon_overshoot
            e = ev.objective + config.penalty_weight * penalty if math.isfinite(ev.objective) else math.inf
            hit = memo[key] = (e, ev)
        return hit

    start_order = list(greedy_order(router))
    e0, _ = energy(start_order)
    T0 = config.initial_temperature or (e0 if math.isfinite(e0) and e0 > 0 else 1.0)

    best_feasible: tuple[float, tuple[int, ...]] | None = None
    best_any: tuple[float, tuple[int, ...]] = (e0, tuple(start_order))

    def record(order, e, ev):
        nonlocal best_feasible, best_any
        key = tuple(order)
        if ev.feasible and (best_feasible is None or (ev.objective, key) < best_feasible):
            best_feasible = (ev.objective, key)
        if (e, key) < best_any:
            best_any = (e, key)

    record(start_order, *energy(start_order))
    timed_out = False
    for restart in range(config.restarts):
        rng = np.random.default_rng([config.seed, restart])
        cur = list(start_order) if restart == 0 else [start_order[k] for k in rng.permutation(len(start_order))]
        cur_e, cur_ev = energy(cur)
        record(cur, cur_e, cur_ev)
        temp = T0
        if len(cur) < 2:
            break
        draws = rng.random((config.iterations, 4)).tolist()
        for it, u in enumerate(draws):
            if deadline is not None and it % 256 == 0 and time.perf_counter() > deadline:
                timed_out = True
                break
            cand = _neighbour(cur, u)
            cand_e, cand_ev = energy(cand)
            delta = cand_e - cur_e
            if delta <= 0 or (math.isfinite(delta) and u[3] < math.exp(-delta / temp)):
                cur, cur_e = cand, cand_e
                record(cur, cur_e, cand_ev)
            temp *= config.cooling_rate
        if timed_out:
            break

    elapsed = (time.perf_counter() - started) * 1000
    if best_feasible is not None:
        sol = router.schedule(best_feasible[1], "anneal")
    else:
        sol = router.schedule(best_any[1], "anneal")
    return _stamp(sol, elapsed)


# -- model assignment -------------------------------------------------------


def route_to_assignment(
    instance: Instance,
    solution: Solution,
    formulation: str = "ABF",
    variant: str | None = None,
    model: ModelSpec | None = None,
) -> Assignment:
    """Transcribe a feasible walk into values for every model variable."""
    variant = check_variant(variant or solution.variant or instance.variant_hint)
    if not solution.feasible:
        raise ValueError(f"cannot map an infeasible solution ({solution.reason})")
    g = instance.graph
    T = g.n_arcs
    if len(solution.walk) > T:
        raise ValueError("walk is longer than the model horizon")
    model = model or build_model(instance, formulation, variant)
    values = {v.name: 0.0 for v in model.variables}
    abf = model.formulation == "ABF"
    values["q_0_0"] = initial_load(instance, variant)
    for t, k in enumerate(solution.walk, start=1):
        arc = g.arcs[k]
        values[f"y_{k}_{t}" if abf else f"y_{arc.tail}_{arc.head}_{t}"] = 1.0
        visit = solution.schedule[t]
        if visit.node != arc.head:
            raise ValueError("schedule does not follow the walk")
        if visit.served:
            values[f"x_{visit.node}_{t}"] = 1.0
        values[f"tau_{visit.node}_{t}"] = visit.departure
        values[f"q_{visit.node}_{t}"] = visit.load_after
    last = len(solution.walk)
    values[f"q_0_{last}"] = return_load_rhs(instance, variant)
    return Assignment(values, model)
