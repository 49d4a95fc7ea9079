"""Command-line entry point (``python -m stsptwpd`` or ``stsptwpd``).

Exit codes: 0 success, 2 invalid input, 3 infeasible instance,
4 timeout or size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .afgr import reduce
from .bench import BenchConfig, run_benchmark
from .graph import CapacityError
from .instance import VARIANTS, GenerationError, dumps_json, generate_instance, load_instance, save_instance
from .model import build_model, export_lp
from .render import ResultsParseError, emit_scaling_plot, render_route_svg
from .solver import AnnealConfig, SolveTimeout, solve_anneal, solve_exact

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def cmd_gen(args) -> int:
    inst = generate_instance(args.n, args.seed, args.radius, args.fraction, args.variant)
    if args.out:
        save_instance(inst, args.out)
    else:
        from .instance import instance_to_json

        sys.stdout.write(instance_to_json(inst))
    return EXIT_OK


def cmd_reduce(args) -> int:
    inst = load_instance(args.inp)
    reduced, report = reduce(inst)
    save_instance(reduced, args.out)
    text = dumps_json(report.to_dict())
    if args.report:
        _write(args.report, text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def cmd_build(args) -> int:
    inst = load_instance(args.inp)
    variant = args.variant or inst.variant_hint
    model = build_model(inst, args.formulation, variant)
    _write(args.lp_out, export_lp(model))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = load_instance(args.inp)
    variant = args.variant or inst.variant_hint
    if args.solver == "oracle":
        sol = solve_exact(inst, variant, time_limit=args.time_limit)
    else:
        cfg = AnnealConfig(
            iterations=args.anneal_iters,
            restarts=args.anneal_restarts,
            seed=args.anneal_seed,
            cooling_rate=args.anneal_cooling,
            penalty_weight=args.anneal_penalty,
            time_limit=args.time_limit,
        )
        sol = solve_anneal(inst, variant, cfg)
    _write(args.out, dumps_json(sol.to_dict()))
    if args.svg and sol.walk:
        _write(args.svg, render_route_svg(inst, sol))
    if not sol.feasible:
        sys.stderr.write(f"no feasible route: {sol.reason}\n")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig.from_file(args.config)
    rows = run_benchmark(config)
    sys.stdout.write(f"{len(rows)} rows written to {Path(config.output_dir) / 'results.csv'}\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    _, svg = emit_scaling_plot(args.results, args.out)
    if svg is None:
        sys.stderr.write("results cover a single V; wrote the CSV only\n")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stsptwpd", description="Steiner TSP with time windows and pickup/delivery toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--radius", type=float, default=100.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fraction", type=float, default=0.7)
    g.add_argument("--variant", choices=VARIANTS, default="full")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="apply the arc filtering reduction")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--report")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("build", help="export a model as an LP file")
    b.add_argument("--in", dest="inp", required=True)
    b.add_argument("--formulation", type=str.upper, choices=("ABF", "NBF"), required=True)
    b.add_argument("--variant", choices=VARIANTS)
    b.add_argument("--lp-out")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--solver", choices=("oracle", "anneal"), default="oracle")
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--anneal-iters", type=int, default=20000)
    s.add_argument("--anneal-restarts", type=int, default=8)
    s.add_argument("--anneal-seed", type=int, default=0)
    s.add_argument("--anneal-cooling", type=float, default=0.999)
    s.add_argument("--anneal-penalty", type=float, default=100.0)
    s.add_argument("--time-limit", type=float, help="seconds")
    s.add_argument("--out")
    s.add_argument("--svg", help="also draw the route")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("bench", help="run a benchmark batch from a JSON config")
    c.add_argument("--config", required=True)
    c.set_defaults(func=cmd_bench)

    t = sub.add_parser("plot", help="objective vs V chart from a results CSV")
    t.add_argument("--results", required=True)
    t.add_argument("--out", required=True, help="output prefix; writes .csv and .svg")
    t.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SolveTimeout, CapacityError) as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_LIMIT
    except (ValueError, KeyError, json.JSONDecodeError, FileNotFoundError, GenerationError, ResultsParseError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
