"""Command line front end.

Exit codes: 0 success (valid / feasible), 1 semantic failure (invalid
instance, infeasible problem, hard-constraint violations), 2 usage or
syntax errors.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .control import STRATEGIES, ControlError, StrategyConfig, run_strategy
from .evaluation import (check_hard, evaluate, format_solution, objective,
                         parse_solution, penalties)
from .formulations import (DIVE_KINDS, build_monolithic, build_surface,
                           build_surface2)
from .instance import (CttError, CttSemanticError, CttSyntaxError,
                       build_multirooms, instance_stats, parse_ctt)
from .milp import export_mps, format_values, parse_mps
from .solver import SolveConfig, SolverError, branch_and_bound

SECONDS_PER_CPU_UNIT = 780.0


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise CttSyntaxError(0, f"cannot read {path}: {exc}")


def _parse_weights(text: str | None):
    if text is None:
        return None
    fields = text.split(",")
    if len(fields) != 4:
        raise argparse.ArgumentTypeError(
            "weights must be four comma-separated integers")
    return tuple(int(f) for f in fields)


def _load_instance(args):
    return parse_ctt(_read(args.instance), weights=args.weights)


def cmd_validate(args) -> int:
    instance = _load_instance(args)
    print(f"{instance.name}: valid ({len(instance.courses)} courses,"
          f" {len(instance.rooms)} rooms, {instance.periods} periods)")
    return 0


def cmd_stats(args) -> int:
    instance = _load_instance(args)
    stats = instance_stats(instance)
    print(f"instance: {instance.name}")
    print(f"courses: {stats.courses}")
    print(f"rooms: {stats.rooms}")
    print(f"periods: {stats.periods}")
    print(f"events: {stats.events}")
    print(f"curricula: {stats.curricula}")
    print(f"frequency: {stats.frequency:.4f}")
    print(f"utilisation: {stats.utilisation:.4f}")
    print(f"conflict edges: {stats.conflict_edges}")
    print(f"conflict density: {stats.conflict_density:.4f}")
    return 0


def cmd_evaluate(args) -> int:
    instance = _load_instance(args)
    solution = parse_solution(_read(args.solution), instance)
    violations = check_hard(instance, solution)
    if violations:
        for v in violations:
            print(f"violation [{v.kind}] {v.detail}", file=sys.stderr)
        return 1
    p = penalties(instance, solution)
    print(f"capacity: {p.capacity}")
    print(f"spread: {p.spread}")
    print(f"compactness: {p.compactness}")
    print(f"stability: {p.stability}")
    print(f"objective: {objective(instance.weights, p)}")
    return 0


def cmd_build(args) -> int:
    instance = _load_instance(args)
    if args.formulation == "monolithic":
        model = build_monolithic(instance)
    elif args.formulation == "surface":
        model = build_surface(instance)
    else:
        multirooms = build_multirooms(instance, args.multiroom_policy)
        model = build_surface2(instance, multirooms)
    text = export_mps(model)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {args.output} ({len(model.variables)} variables,"
              f" {len(model.constraints)} constraints)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_solve(args) -> int:
    instance = _load_instance(args)
    total_time = args.total_time
    if total_time is None and args.cpu_units is not None:
        total_time = args.cpu_units * SECONDS_PER_CPU_UNIT
    config = StrategyConfig(
        strategy=args.strategy,
        surface_model=args.surface_model,
        multiroom_policy=args.multiroom_policy,
        dive_kinds=tuple(args.dive_kinds),
        surface_time=args.surface_time,
        per_dive_time=args.per_dive_time,
        total_time=total_time,
        surface_nodes=args.surface_nodes,
        dive_nodes=args.dive_nodes,
        dive_gap_stop=args.dive_gap_stop,
        clique_cover_cuts=not args.no_clique_cuts,
        clique_separation=args.separation,
        pattern_cuts=args.pattern_cuts,
    )
    report = run_strategy(instance, config)
    if args.json:
        print(report.to_json())
    else:
        sys.stdout.write(report.to_text())
    if report.solution is not None and args.output:
        from .control import solution_from_payload
        solution = solution_from_payload(report.solution)
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(format_solution(instance, solution))
        print(f"wrote {args.output}")
    return 1 if report.status == "infeasible" else 0


def cmd_solve_mps(args) -> int:
    model = parse_mps(_read(args.model)).freeze()
    config = SolveConfig(time_limit=args.time_limit,
                         node_limit=args.node_limit)
    result = branch_and_bound(model, config)
    print(f"status: {result.status}")
    print(f"lower bound: {result.lower_bound}")
    if result.incumbent is None:
        return 1 if result.status == "infeasible" else 0
    print(f"objective: {result.incumbent.objective_value}")
    if args.output:
        nonzero = {k: v for k, v in result.incumbent.values.items() if v != 0}
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(format_values(nonzero))
        print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cttsolve",
        description="Curriculum-based course timetabling solver")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_instance_arg(p):
        p.add_argument("instance", help="instance file (.ctt)")
        p.add_argument("--weights", type=_parse_weights, default=None,
                       metavar="C,S,P,R",
                       help="soft-penalty weights: capacity, spread,"
                            " compactness, stability (default 1,5,2,1)")

    p = sub.add_parser("validate", help="parse and validate an instance")
    add_instance_arg(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="print instance statistics")
    add_instance_arg(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="score a timetable against an instance")
    add_instance_arg(p)
    p.add_argument("solution", help="solution file (courseId roomId day period)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("build", help="export a model as MPS")
    add_instance_arg(p)
    p.add_argument("--formulation", default="monolithic",
                   choices=("monolithic", "surface", "surface2"))
    p.add_argument("--multiroom-policy", default="median-split",
                   choices=("single", "median-split", "identity"))
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="run a solve strategy")
    add_instance_arg(p)
    p.add_argument("--strategy", default="contract", choices=STRATEGIES)
    p.add_argument("--surface-model", default="surface",
                   choices=("surface", "surface2"))
    p.add_argument("--multiroom-policy", default="median-split",
                   choices=("single", "median-split", "identity"))
    p.add_argument("--dive-kinds", nargs="+", default=list(DIVE_KINDS[:2]),
                   choices=list(DIVE_KINDS))
    p.add_argument("--surface-time", type=float, default=None)
    p.add_argument("--per-dive-time", type=float, default=None)
    p.add_argument("--total-time", type=float, default=None)
    p.add_argument("--cpu-units", type=float, default=None,
                   help=f"total budget in CPU units"
                        f" ({SECONDS_PER_CPU_UNIT:.0f} s each)")
    p.add_argument("--surface-nodes", type=int, default=None)
    p.add_argument("--dive-nodes", type=int, default=None)
    p.add_argument("--dive-gap-stop", type=float, default=0.02)
    p.add_argument("--no-clique-cuts", action="store_true")
    p.add_argument("--separation", action="store_true",
                   help="separate clique cuts at the root node")
    p.add_argument("--pattern-cuts", action="store_true")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--output", default=None,
                   help="write the best timetable to this file")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("solve-mps", help="solve an MPS model exactly")
    p.add_argument("model", help="model file (.mps)")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--node-limit", type=int, default=None)
    p.add_argument("-o", "--output", default=None,
                   help="write nonzero variable values to this file")
    p.set_defaults(func=cmd_solve_mps)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CttSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CttSemanticError, ControlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (CttError, SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
