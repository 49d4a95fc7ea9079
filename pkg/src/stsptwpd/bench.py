"""Batch benchmark: generate, optionally reduce, solve, validate, aggregate.

Every solve is checked against both formulations through
``route_to_assignment`` + ``check_assignment`` before its objective counts.
Two CSV files are written: the aggregated results and the raw per-run
records they were folded from (``aggregate(read_runs(...))`` rebuilds the
results exactly).
"""

from __future__ import annotations

import csv
import json
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .afgr import reduce
from .graph import CapacityError
from .instance import DEFAULT_FRACTION, DEFAULT_RADIUS, GenerationError, check_variant, generate_instance
from .model import build_model, check_assignment
from .solver import AnnealConfig, SolveTimeout, route_to_assignment, solve_anneal, solve_exact

RESULTS_HEADER = [
    "V", "arcs", "required", "formulation", "variant", "afgr", "vars_bin", "vars_cont", "constraints",
    "of_avg", "of_std", "gap", "pct_solved", "time_avg_ms", "time_std_ms", "var_red_pct",
]
RUNS_HEADER = [
    "V", "seed", "arcs", "required", "formulation", "variant", "afgr", "vars_bin", "vars_cont", "constraints",
    "solved", "objective", "oracle_objective", "time_ms", "var_red_pct", "status",
]
MAX_GENERATION_RETRIES = 20


@dataclass(frozen=True)
class BenchConfig:
    v_range: tuple[int, ...]
    seeds_per_v: int = 10
    variant: str = "full"
    formulations: tuple[str, ...] = ("ABF", "NBF")
    solver: str = "oracle"
    afgr: str = "both"  # off | on | both
    time_budget_ms: float | None = None
    output_dir: str = "results"
    radius: float = DEFAULT_RADIUS
    fraction: float = DEFAULT_FRACTION
    anneal_iterations: int = 20000
    anneal_restarts: int = 8
    anneal_seed: int = 0
    first_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "v_range", tuple(int(v) for v in self.v_range))
        object.__setattr__(self, "formulations", tuple(f.upper() for f in self.formulations))
        if not self.v_range:
            raise ValueError("v_range must not be empty")
        if self.seeds_per_v < 1:
            raise ValueError("seeds_per_v must be at least 1")
        check_variant(self.variant)
        if self.solver not in ("oracle", "anneal"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.afgr not in ("off", "on", "both"):
            raise ValueError(f"afgr must be off, on or both, got {self.afgr!r}")
        if not self.formulations or not set(self.formulations) <= {"ABF", "NBF"}:
            raise ValueError("formulations must be a non-empty subset of ABF, NBF")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "BenchConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @property
    def afgr_flags(self) -> tuple[bool, ...]:
        return {"off": (False,), "on": (True,), "both": (False, True)}[self.afgr]


@dataclass(frozen=True)
class RunRecord:
    V: int
    seed: int
    arcs: int
    required: int
    formulation: str
    variant: str
    afgr: bool
    vars_bin: int
    vars_cont: int
    constraints: int
    solved: bool
    objective: float | None
    oracle_objective: float | None
    time_ms: float
    var_red_pct: float
    status: str


@dataclass(frozen=True)
class BenchRow:
    V: int
    arcs: float
    required: float
    formulation: str
    variant: str
    afgr: bool
    vars_bin: float
    vars_cont: float
    constraints: float
    of_avg: float | None
    of_std: float | None
    gap: float | None
    pct_solved: float
    time_avg_ms: float
    time_std_ms: float
    var_red_pct: float


def _generate(config: BenchConfig, n: int, seed: int):
    for attempt in range(MAX_GENERATION_RETRIES):
        try:
            return generate_instance(n, seed + attempt, config.radius, config.fraction, config.variant)
        except GenerationError:
            continue
    raise GenerationError(seed, f"no connected instance for n={n} from seed {seed} onwards")


def _solve(config: BenchConfig, inst):
    limit = None if config.time_budget_ms is None else config.time_budget_ms / 1000
    started = time.perf_counter()
    try:
        if config.solver == "oracle":
            sol = solve_exact(inst, config.variant, time_limit=limit)
        else:
            cfg = AnnealConfig(
                iterations=config.anneal_iterations,
                restarts=config.anneal_restarts,
                seed=config.anneal_seed,
                time_limit=limit,
            )
            sol = solve_anneal(inst, config.variant, cfg)
        status = "ok" if sol.feasible else (sol.reason or "infeasible")
    except SolveTimeout:
        sol, status = None, "timeout"
    except CapacityError:
        sol, status = None, "capacity"
    return sol, status, (time.perf_counter() - started) * 1000


def run_one(config: BenchConfig, n: int, seed: int) -> list[RunRecord]:
    """All records for one (V, seed): one per AFGR flag and formulation."""
    base = _generate(config, n, seed)
    records = []
    reference = None
    try:
        ref = solve_exact(base, config.variant)
        reference = ref.objective if ref.feasible else None
    except CapacityError:
        pass
    for flag in config.afgr_flags:
        if flag:
            inst, report = reduce(base)
            red = report.var_reduction_estimate_abf
        else:
            inst, red = base, 0.0
        models = {f: build_model(inst, f, config.variant) for f in ("ABF", "NBF")}
        sol, status, elapsed = _solve(config, inst)
        valid = sol is not None and sol.feasible
        if valid:
            for m in models.values():
                rep = check_assignment(m, route_to_assignment(inst, sol, m.formulation, config.variant, model=m))
                if not rep.feasible or rep.objective != sol.objective:
                    valid, status = False, f"rejected by {m.formulation}"
        for f in config.formulations:
            m = models[f]
            records.append(
                RunRecord(
                    V=n,
                    seed=seed,
                    arcs=inst.graph.n_arcs,
                    required=len(inst.required),
                    formulation=f,
                    variant=config.variant,
                    afgr=flag,
                    vars_bin=m.n_binary,
                    vars_cont=m.n_continuous,
                    constraints=len(m.constraints),
                    solved=valid,
                    objective=sol.objective if valid else None,
                    oracle_objective=reference,
                    time_ms=elapsed,
                    var_red_pct=red,
                    status=status,
                )
            )
    return records


def _mean(xs: Sequence[float]) -> float:
    return math.fsum(xs) / len(xs)


def _pstd(xs: Sequence[float]) -> float:
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


def _count(xs: Sequence[int]) -> float:
    return xs[0] if len(set(xs)) == 1 else _mean(xs)


def aggregate(records: Iterable[RunRecord]) -> list[BenchRow]:
    """Fold per-run records into one row per (V, formulation, variant, afgr)."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in sorted(records, key=lambda r: (r.V, r.variant, r.afgr, r.formulation, r.seed)):
        groups.setdefault((r.V, r.variant, r.afgr, r.formulation), []).append(r)
    rows = []
    for (V, variant, flag, formulation), rs in groups.items():
        solved = [r for r in rs if r.solved]
        objs = [r.objective for r in solved]
        refs = [r.oracle_objective for r in solved if r.oracle_objective is not None]
        of_avg = _mean(objs) if objs else None
        gap = None
        if objs and len(refs) == len(solved) and _mean(refs) > 0:
            gap = (of_avg - _mean(refs)) / _mean(refs)
        times = [r.time_ms for r in rs]
        rows.append(
            BenchRow(
                V=V,
                arcs=_count([r.arcs for r in rs]),
                required=_count([r.required for r in rs]),
                formulation=formulation,
                variant=variant,
                afgr=flag,
                vars_bin=_count([r.vars_bin for r in rs]),
                vars_cont=_count([r.vars_cont for r in rs]),
                constraints=_count([r.constraints for r in rs]),
                of_avg=of_avg,
                of_std=_pstd(objs) if objs else None,
                gap=gap,
                pct_solved=100.0 * len(solved) / len(rs),
                time_avg_ms=_mean(times),
                time_std_ms=_pstd(times),
                var_red_pct=_mean([r.var_red_pct for r in rs]),
            )
        )
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            d = asdict(row)
            w.writerow([_cell(d[h]) for h in header])


def write_results(path, rows: Sequence[BenchRow]) -> None:
    _write(Path(path), RESULTS_HEADER, rows)


def write_runs(path, records: Sequence[RunRecord]) -> None:
    _write(Path(path), RUNS_HEADER, records)


def _parse(value: str, kind):
    if value == "":
        return None
    if kind is bool:
        return value in ("1", "True", "true")
    if kind is int:
        return int(value)
    if kind is float:
        return float(value)
    return value


def read_runs(path) -> list[RunRecord]:
    kinds = {
        "V": int, "seed": int, "arcs": int, "required": int, "formulation": str, "variant": str, "afgr": bool,
        "vars_bin": int, "vars_cont": int, "constraints": int, "solved": bool, "objective": float,
        "oracle_objective": float, "time_ms": float, "var_red_pct": float, "status": str,
    }
    with open(path, newline="", encoding="utf-8") as fh:
        return [RunRecord(**{k: _parse(row[k], kinds[k]) for k in RUNS_HEADER}) for row in csv.DictReader(fh)]


def run_benchmark(config: BenchConfig) -> list[BenchRow]:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")
    jobs = [(n, config.first_seed + k) for n in config.v_range for k in range(config.seeds_per_v)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            parts = list(pool.map(run_one, [config] * len(jobs), *zip(*jobs)))
    else:
        parts = [run_one(config, n, seed) for n, seed in jobs]
    records = [r for part in parts for r in part]
    rows = aggregate(records)
    write_runs(out / "runs.csv", records)
    write_results(out / "results.csv", rows)
    return rows
