"""Run strategies: a surface solve harvests period assignments and valid
lower bounds, then restricted dives turn those assignments into full
timetables and upper bounds.

The contract strategy runs the surface to its budget first and dives
afterwards; the anytime strategy dives as soon as the surface finds each
improving assignment.  All bound movements go through a monotonic ledger.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field

from . import formulations
from .evaluation import (PenaltyVector, Solution, check_hard, evaluate, gap,
                         penalties)
from .formulations import (DAY_DECOMP, DAY_FIXED, DAY_FIXED_ZERO_STABILITY,
                           DIVE_KINDS, PERIOD_FIXED, Neighborhood,
                           PeriodAssignment, add_clique_cuts,
                           add_implied_bound_cuts, add_pattern_cuts,
                           all_patterns, build_dive, build_monolithic,
                           build_surface, build_surface2, clique_separator,
                           decode_monolithic, greedy_clique_cover,
                           relax_to_days)
from .instance import Instance, build_conflict_graph, build_multirooms
from .milp import MilpSolution
from .solver import SolveConfig, SolveResult, branch_and_bound

STRATEGIES = ("exact", "contract", "anytime")


class ControlError(Exception):
    pass


@dataclass
class StrategyConfig:
    strategy: str = "contract"
    surface_model: str = "surface"  # "surface" | "surface2"
    multiroom_policy: str = "median-split"
    dive_kinds: tuple[str, ...] = (PERIOD_FIXED, DAY_FIXED)
    # budgets; node budgets keep runs deterministic, time budgets do not
    surface_time: float | None = None
    per_dive_time: float | None = None
    total_time: float | None = None
    surface_nodes: int | None = None
    dive_nodes: int | None = None
    max_dive_sources: int | None = None
    dive_gap_stop: float = 0.02
    clique_cover_cuts: bool = True
    clique_separation: bool = False
    implied_bound_cuts: bool = True
    pattern_cuts: bool = False
    stratified_bounds: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ControlError(f"unknown strategy {self.strategy!r}")
        if self.surface_model not in ("surface", "surface2"):
            raise ControlError(f"unknown surface model {self.surface_model!r}")
        if not self.dive_kinds and self.strategy != "exact":
            raise ControlError("dive sequence must be non-empty")
        for kind in self.dive_kinds:
            if kind not in DIVE_KINDS:
                raise ControlError(f"unknown dive kind {kind!r}")
        if not 0 <= self.dive_gap_stop < 1:
            raise ControlError("dive gap stop must lie in [0, 1)")
        if (self.total_time is not None and self.surface_time is not None
                and self.total_time < self.surface_time):
            raise ControlError("total time must cover the surface time")

    def timed(self) -> bool:
        return any(t is not None for t in
                   (self.surface_time, self.per_dive_time, self.total_time))


@dataclass(frozen=True)
class LedgerEvent:
    at: float  # logical step count, or seconds when a time budget is set
    kind: str  # "lower" | "upper"
    value: float
    source: str


class BoundsLedger:
    """Monotonic bound tracker: the lower bound never decreases, the upper
    bound never increases; non-improving reports are ignored."""

    def __init__(self, clock=None):
        if clock is None:
            counter = itertools.count(1)
            clock = lambda: float(next(counter))
        self._clock = clock
        self.lower = -math.inf
        self.upper = math.inf
        self.best_solution: Solution | None = None
        self.history: list[LedgerEvent] = []

    def record_lower(self, value: float, source: str) -> bool:
        if value <= self.lower:
            return False
        self.lower = value
        self.history.append(LedgerEvent(self._clock(), "lower", value, source))
        return True

    def record_upper(self, value: float, source: str,
                     solution: Solution | None = None) -> bool:
        if value >= self.upper:
            return False
        self.upper = value
        if solution is not None:
            self.best_solution = solution
        self.history.append(LedgerEvent(self._clock(), "upper", value, source))
        return True

    def gap(self) -> float | None:
        if not math.isfinite(self.upper) or not math.isfinite(self.lower):
            return None
        return gap(self.upper, max(self.lower, 0.0))


@dataclass
class DiveRecord:
    kind: str
    source_objective: float
    discovery_index: int
    status: str
    objective: float | None
    nodes: int


@dataclass
class RunReport:
    instance: str
    strategy: str
    status: str  # "optimal" | "feasible" | "infeasible" | "bounds-only"
    lower_bound: float | None
    upper_bound: float | None
    gap: float | None
    penalties: tuple[int, int, int, int] | None
    solution: dict[str, list[list]] | None
    surface_status: str
    surface_nodes: int
    dives: list[DiveRecord]
    history: list[LedgerEvent]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        raw = json.loads(text)
        raw["dives"] = [DiveRecord(**d) for d in raw["dives"]]
        raw["history"] = [LedgerEvent(**e) for e in raw["history"]]
        if raw["penalties"] is not None:
            raw["penalties"] = tuple(raw["penalties"])
        return cls(**raw)

    def to_text(self) -> str:
        lines = [f"instance: {self.instance}",
                 f"strategy: {self.strategy}",
                 f"status: {self.status}",
                 f"lower bound: {self.lower_bound}",
                 f"upper bound: {self.upper_bound}",
                 f"gap: {self.gap if self.gap is not None else 'n/a'}%"]
        if self.penalties is not None:
            cap, spread, comp, stab = self.penalties
            lines.append(f"penalties: capacity={cap} spread={spread}"
                         f" compactness={comp} stability={stab}")
        lines.append(f"surface: {self.surface_status}"
                     f" ({self.surface_nodes} nodes)")
        for d in self.dives:
            obj = "-" if d.objective is None else d.objective
            lines.append(f"dive {d.kind} from {d.source_objective}"
                         f" (#{d.discovery_index}): {d.status}, obj={obj},"
                         f" {d.nodes} nodes")
        for e in self.history:
            lines.append(f"  [{e.at:g}] {e.kind} -> {e.value:g} ({e.source})")
        return "\n".join(lines) + "\n"


def _solution_payload(instance: Instance,
                      solution: Solution | None) -> dict | None:
    if solution is None:
        return None
    return {cid: [[p, room] for p, room in pairs]
            for cid, pairs in solution.canonical().assignments.items()}


def solution_from_payload(payload: dict | None) -> Solution | None:
    if payload is None:
        return None
    return Solution({cid: tuple((int(p), room) for p, room in pairs)
                     for cid, pairs in payload.items()})


def order_dives(neighborhoods: list[Neighborhood],
                kind_order: tuple[str, ...]) -> list[Neighborhood]:
    """Dive kinds in configured order; within a kind, better (lower) surface
    objectives first, then later discoveries first."""
    rank = {kind: i for i, kind in enumerate(kind_order)}
    return sorted(neighborhoods,
                  key=lambda n: (rank[n.kind], n.source_objective,
                                 -n.discovery_index))


def _basis_from_values(instance: Instance, values: dict) -> PeriodAssignment:
    periods: dict[str, set[int]] = {c.id: set() for c in instance.courses}
    for name, value in values.items():
        if value < 0.5:
            continue
        if name.startswith("times["):
            p, cid = name[len("times["):-1].split(",")
            periods[cid].add(int(p))
        elif name.startswith("m_taught["):
            p, _key, cid = name[len("m_taught["):-1].split(",")
            periods[cid].add(int(p))
    return PeriodAssignment({cid: frozenset(v) for cid, v in periods.items()})


def _prepare_surface(instance: Instance, config: StrategyConfig):
    if config.surface_model == "surface":
        model = build_surface(instance,
                              stratified_bounds=config.stratified_bounds)
    else:
        multirooms = build_multirooms(instance, config.multiroom_policy)
        model = build_surface2(instance, multirooms)
    graph = build_conflict_graph(instance)
    if config.clique_cover_cuts:
        add_clique_cuts(model, greedy_clique_cover(graph), graph)
    if config.implied_bound_cuts:
        add_implied_bound_cuts(model)
    if config.pattern_cuts and instance.periods_per_day <= 6:
        add_pattern_cuts(model, all_patterns(instance.periods_per_day))
    return model.freeze(), graph


def _budget(limit_time, limit_nodes, deadline, **extra) -> SolveConfig:
    if deadline is not None:
        remaining = max(0.01, deadline - time.monotonic())
        limit_time = remaining if limit_time is None else min(limit_time,
                                                              remaining)
    return SolveConfig(time_limit=limit_time, node_limit=limit_nodes, **extra)


def _run_dive(instance: Instance, monolithic, neighborhood: Neighborhood,
              ledger: BoundsLedger, config: StrategyConfig,
              deadline) -> DiveRecord:
    model = build_dive(monolithic, neighborhood)
    if config.implied_bound_cuts:
        add_implied_bound_cuts(model)
    model.freeze()
    cutoff = ledger.upper if math.isfinite(ledger.upper) else None
    solve_config = _budget(config.per_dive_time, config.dive_nodes, deadline,
                           cutoff=cutoff, gap_target=config.dive_gap_stop)
    result = branch_and_bound(model, solve_config)
    objective = None
    if result.incumbent is not None:
        solution = decode_monolithic(instance, result.incumbent)
        violations = check_hard(instance, solution)
        if violations:
            raise ControlError(
                f"dive produced an infeasible timetable: {violations[0]}")
        objective = evaluate(instance, solution)
        ledger.record_upper(objective, f"dive:{neighborhood.kind}", solution)
    return DiveRecord(neighborhood.kind, neighborhood.source_objective,
                      neighborhood.discovery_index, result.status,
                      objective, result.nodes_explored)


def run_strategy(instance: Instance,
                 config: StrategyConfig | None = None) -> RunReport:
    config = config or StrategyConfig()
    clock = time.monotonic if config.timed() else None
    ledger = BoundsLedger(clock=clock)
    deadline = (time.monotonic() + config.total_time
                if config.total_time is not None else None)

    if config.strategy == "exact":
        return _run_exact(instance, config, ledger, deadline)

    monolithic = build_monolithic(instance).freeze()
    surface, graph = _prepare_surface(instance, config)
    sources: list[tuple[PeriodAssignment, float]] = []
    dives: list[DiveRecord] = []

    def harvest(values: dict, objective: float) -> None:
        basis = _basis_from_values(instance, values)
        sources.append((basis, objective))
        if config.strategy == "anytime":
            for kind in config.dive_kinds:
                neighborhood = _make_neighborhood(
                    instance, kind, basis, objective, len(sources) - 1)
                dives.append(_run_dive(instance, monolithic, neighborhood,
                                       ledger, config, deadline))

    surface_config = _budget(
        config.surface_time, config.surface_nodes, deadline,
        on_incumbent=harvest,
        separation=config.clique_separation,
        separator=clique_separator(graph) if config.clique_separation else None)
    surface_result = branch_and_bound(surface, surface_config)

    if surface_result.status == "infeasible":
        # the surface relaxes the full problem, so its infeasibility is final
        return _report(instance, config, ledger, "infeasible",
                       surface_result, dives)
    if math.isfinite(surface_result.lower_bound):
        ledger.record_lower(surface_result.lower_bound, "surface")

    if config.strategy == "contract":
        neighborhoods = []
        picked = sources
        if config.max_dive_sources is not None:
            picked = sources[-config.max_dive_sources:]
        offset = len(sources) - len(picked)
        for i, (basis, objective) in enumerate(picked):
            for kind in config.dive_kinds:
                neighborhoods.append(_make_neighborhood(
                    instance, kind, basis, objective, offset + i))
        for neighborhood in order_dives(neighborhoods, config.dive_kinds):
            if deadline is not None and time.monotonic() >= deadline:
                break
            dives.append(_run_dive(instance, monolithic, neighborhood,
                                   ledger, config, deadline))

    status = _final_status(ledger, surface_result)
    return _report(instance, config, ledger, status, surface_result, dives)


def run_contract(instance: Instance,
                 config: StrategyConfig | None = None) -> RunReport:
    config = config or StrategyConfig(strategy="contract")
    if config.strategy != "contract":
        raise ControlError("run_contract requires the contract strategy")
    return run_strategy(instance, config)


def run_anytime(instance: Instance,
                config: StrategyConfig | None = None) -> RunReport:
    config = config or StrategyConfig(strategy="anytime")
    if config.strategy != "anytime":
        raise ControlError("run_anytime requires the anytime strategy")
    return run_strategy(instance, config)


def report(run_report: RunReport, format: str = "text") -> str:
    if format == "text":
        return run_report.to_text()
    if format == "json":
        return run_report.to_json()
    raise ControlError(f"unknown report format {format!r}")


def _make_neighborhood(instance: Instance, kind: str,
                       basis: PeriodAssignment, objective: float,
                       discovery: int) -> Neighborhood:
    if kind == PERIOD_FIXED:
        return Neighborhood(kind, basis, objective, discovery)
    return Neighborhood(kind, relax_to_days(basis, instance), objective,
                        discovery)


def _final_status(ledger: BoundsLedger, surface_result: SolveResult) -> str:
    if not math.isfinite(ledger.upper):
        return "bounds-only"
    if (surface_result.status == "optimal"
            and ledger.upper <= ledger.lower + 1e-6):
        return "optimal"
    return "feasible"


def _run_exact(instance: Instance, config: StrategyConfig,
               ledger: BoundsLedger, deadline) -> RunReport:
    model = build_monolithic(instance)
    if config.clique_cover_cuts:
        graph = build_conflict_graph(instance)
        add_clique_cuts(model, greedy_clique_cover(graph), graph)
    if config.implied_bound_cuts:
        add_implied_bound_cuts(model)
    model.freeze()
    solve_config = _budget(config.total_time, config.surface_nodes, deadline)
    result = branch_and_bound(model, solve_config)
    if result.status == "infeasible":
        return _report(instance, config, ledger, "infeasible", result, [])
    if math.isfinite(result.lower_bound):
        ledger.record_lower(result.lower_bound, "exact")
    if result.incumbent is not None:
        solution = decode_monolithic(instance, result.incumbent)
        violations = check_hard(instance, solution)
        if violations:
            raise ControlError(
                f"exact solve produced an infeasible timetable:"
                f" {violations[0]}")
        ledger.record_upper(evaluate(instance, solution), "exact", solution)
    status = ("optimal" if result.status == "optimal"
              else _final_status(ledger, result))
    return _report(instance, config, ledger, status, result, [])


def _report(instance: Instance, config: StrategyConfig, ledger: BoundsLedger,
            status: str, surface_result: SolveResult,
            dives: list[DiveRecord]) -> RunReport:
    best = ledger.best_solution
    return RunReport(
        instance=instance.name,
        strategy=config.strategy,
        status=status,
        lower_bound=ledger.lower if math.isfinite(ledger.lower) else None,
        upper_bound=ledger.upper if math.isfinite(ledger.upper) else None,
        gap=ledger.gap(),
        penalties=(penalties(instance, best).as_tuple()
                   if best is not None else None),
        solution=_solution_payload(instance, best),
        surface_status=surface_result.status,
        surface_nodes=surface_result.nodes_explored,
        dives=dives,
        history=list(ledger.history),
    )
