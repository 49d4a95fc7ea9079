"""Steiner TSP with time windows and pickup/delivery: instances, models, solvers."""

from .afgr import ReductionReport, reduce
from .bench import BenchConfig, run_benchmark
from .graph import CapacityError, Graph, longest_simple_path, metric_closure, shortest_paths
from .instance import (
    GenerationError,
    Instance,
    assign_parameters,
    generate_instance,
    generate_layout,
    load_instance,
    save_instance,
    select_edges,
)
from .model import (
    Assignment,
    ModelSpec,
    ViolationReport,
    build_abf,
    build_model,
    build_nbf,
    check_assignment,
    constraint_counts,
    export_lp,
    variable_counts,
)
from .render import emit_scaling_plot, render_route_svg
from .solver import (
    AnnealConfig,
    Solution,
    SolveTimeout,
    route_to_assignment,
    schedule_route,
    solve_anneal,
    solve_exact,
)

__all__ = [
    "AnnealConfig", "Assignment", "BenchConfig", "CapacityError", "GenerationError", "Graph", "Instance",
    "ModelSpec", "ReductionReport", "Solution", "SolveTimeout", "ViolationReport", "assign_parameters",
    "build_abf", "build_model", "build_nbf", "check_assignment", "constraint_counts", "emit_scaling_plot",
    "export_lp", "generate_instance", "generate_layout", "load_instance", "longest_simple_path",
    "metric_closure", "reduce", "render_route_svg", "route_to_assignment", "run_benchmark", "save_instance",
    "schedule_route", "select_edges", "shortest_paths", "solve_anneal", "solve_exact", "variable_counts",
]
__version__ = "0.1.0"
