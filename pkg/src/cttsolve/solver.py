"""Exact desk-scale solving: LP relaxation, branch and bound, brute force,
and a file-based adapter for external solvers.

Each solve is single-threaded; distinct models may be solved concurrently.
"""

from __future__ import annotations

import itertools
import math
import subprocess
import time
from dataclasses import dataclass, field
from heapq import heappop, heappush
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from . import evaluation
from .instance import Instance
from .milp import MilpModel, MilpSolution, export_mps, import_solution

INT_TOL = 1e-6
BOUND_TOL = 1e-6


class SolverError(Exception):
    pass


class SearchSpaceError(SolverError):
    """Brute-force guard tripped."""


class ExternalSolverError(SolverError):
    pass


@dataclass
class SolveConfig:
    time_limit: float | None = None  # seconds; None disables the clock
    cutoff: float | None = None  # prune nodes whose bound reaches this value
    gap_target: float | None = None  # e.g. 0.02 stops at a 2% relative gap
    node_limit: int | None = None
    separation: bool = False
    separator: Callable | None = None  # (model, fractional values) -> cut specs
    on_incumbent: Callable | None = None  # (values, objective) -> None

    def __post_init__(self):
        if self.time_limit is not None and self.time_limit <= 0:
            raise SolverError("time limit must be positive")
        if self.gap_target is not None and not 0 <= self.gap_target < 1:
            raise SolverError("gap target must lie in [0, 1)")


@dataclass
class SolveResult:
    status: str  # optimal | feasible | infeasible | unbounded | limit-reached
    incumbent: MilpSolution | None
    lower_bound: float
    nodes_explored: int
    wall_time: float


@dataclass(frozen=True)
class LpResult:
    status: str  # optimal | infeasible | unbounded | limit-reached
    value: float
    point: dict[str, float]


class _Arrays:
    """Dense objective plus sparse constraint matrices for one model."""

    def __init__(self, model: MilpModel):
        n = len(model.variables)
        self.model = model
        self.c = np.zeros(n)
        for coef, idx in model.objective_terms:
            self.c[idx] += coef
        self.constant = model.objective_constant
        self.lo = np.array([v.lower for v in model.variables])
        self.hi = np.array([v.upper for v in model.variables])
        self.int_idx = np.array(
            [i for i, v in enumerate(model.variables) if v.is_integer()],
            dtype=int)

        ub_rows, eq_rows = [], []
        self.b_ub, self.b_eq = [], []
        for con in model.constraints:
            row = [(idx, coef) for coef, idx in con.terms]
            if con.sense == "<=":
                ub_rows.append(row)
                self.b_ub.append(con.rhs)
            elif con.sense == ">=":
                ub_rows.append([(i, -c) for i, c in row])
                self.b_ub.append(-con.rhs)
            else:
                eq_rows.append(row)
                self.b_eq.append(con.rhs)
        self.A_ub = self._matrix(ub_rows, n)
        self.A_eq = self._matrix(eq_rows, n)

        obj_vars_integer = all(
            model.variables[idx].is_integer()
            for coef, idx in model.objective_terms if coef != 0.0)
        obj_coefs_integral = all(
            float(coef).is_integer() for coef, idx in model.objective_terms
        ) and float(self.constant).is_integer()
        self.integral_objective = obj_vars_integer and obj_coefs_integral

    @staticmethod
    def _matrix(rows, n):
        if not rows:
            return None
        data, ri, ci = [], [], []
        for r, row in enumerate(rows):
            for idx, coef in row:
                ri.append(r)
                ci.append(idx)
                data.append(coef)
        return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    def add_ub_row(self, terms: list[tuple[float, int]], rhs: float) -> None:
        n = len(self.model.variables)
        row = sparse.csr_matrix(
            ([c for c, _ in terms], ([0] * len(terms), [i for _, i in terms])),
            shape=(1, n))
        self.A_ub = row if self.A_ub is None else sparse.vstack(
            [self.A_ub, row], format="csr")
        self.b_ub.append(rhs)

    def solve_lp(self, lo=None, hi=None):
        """Returns (status, value incl. constant, point array or None)."""
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        b_ub = np.array(self.b_ub) if self.b_ub else None
        b_eq = np.array(self.b_eq) if self.b_eq else None
        if len(self.c) == 0:
            feasible = (b_ub is None or (b_ub >= -BOUND_TOL).all()) and (
                b_eq is None or (np.abs(b_eq) <= BOUND_TOL).all())
            if feasible:
                return "optimal", self.constant, np.zeros(0)
            return "infeasible", math.inf, None
        res = linprog(self.c, A_ub=self.A_ub, b_ub=b_ub,
                      A_eq=self.A_eq, b_eq=b_eq,
                      bounds=np.column_stack([lo, hi]), method="highs")
        status = {0: "optimal", 1: "limit-reached", 2: "infeasible",
                  3: "unbounded", 4: "infeasible"}[res.status]
        if status == "limit-reached":
            raise SolverError("LP iteration limit exceeded")
        if status != "optimal":
            return status, math.inf if status == "infeasible" else -math.inf, None
        return status, res.fun + self.constant, res.x


def solve_lp(model: MilpModel) -> LpResult:
    """Solve the LP relaxation (integrality relaxed to bounds)."""
    arrays = _Arrays(model)
    status, value, x = arrays.solve_lp()
    point = {}
    if x is not None:
        point = {v.name: float(x[i]) for i, v in enumerate(model.variables)}
    return LpResult(status, value, point)


def _round_bound(value: float, integral: bool) -> float:
    if integral and math.isfinite(value):
        return math.ceil(value - INT_TOL)
    return value


def branch_and_bound(model: MilpModel, config: SolveConfig | None = None,
                     arrays: _Arrays | None = None) -> SolveResult:
    """Best-bound branch and bound over the model's integer variables.

    Branches on the most fractional integer variable (ties to the lowest
    index); nodes are pruned once their bound reaches the lesser of the
    cutoff and the incumbent.  Deterministic when no time limit binds.
    """
    config = config or SolveConfig()
    start = time.monotonic()
    arrays = arrays or _Arrays(model)
    integral = arrays.integral_objective

    if config.separation and config.separator is not None:
        _root_separation(model, arrays, config)

    incumbent: dict[str, float] | None = None
    inc_obj = math.inf
    pruned_min = math.inf
    explored = 0
    heap = [(-math.inf, 0, arrays.lo.copy(), arrays.hi.copy())]
    seq = itertools.count(1)
    stop_status = None

    def cut_line() -> float:
        if config.cutoff is None:
            return inc_obj
        return min(config.cutoff, inc_obj)

    def open_lower() -> float:
        candidates = [b for b, *_ in heap] + [pruned_min]
        lb = min(candidates) if candidates else math.inf
        return min(lb, inc_obj)

    while heap:
        if config.node_limit is not None and explored >= config.node_limit:
            stop_status = "limit-reached"
            break
        if (config.time_limit is not None
                and time.monotonic() - start > config.time_limit):
            stop_status = "limit-reached"
            break
        if (config.gap_target is not None and incumbent is not None
                and _relative_gap(inc_obj, open_lower()) <= config.gap_target):
            stop_status = "limit-reached"
            break

        bound, _, lo, hi = heappop(heap)
        if bound >= cut_line() - BOUND_TOL:
            pruned_min = min(pruned_min, bound)
            continue

        explored += 1
        status, value, x = arrays.solve_lp(lo, hi)
        if status == "infeasible":
            continue
        if status == "unbounded":
            return SolveResult("unbounded", None, -math.inf, explored,
                               time.monotonic() - start)
        node_bound = _round_bound(value, integral)
        if node_bound >= cut_line() - BOUND_TOL:
            pruned_min = min(pruned_min, node_bound)
            continue

        branch_var = _most_fractional(arrays, x)
        if branch_var is None:
            values = _integral_point(model, arrays, x)
            exact = model.objective_value(values)
            if exact < cut_line() - BOUND_TOL:
                incumbent = values
                inc_obj = exact
                if config.on_incumbent is not None:
                    config.on_incumbent(dict(values), exact)
            else:
                pruned_min = min(pruned_min, exact)
            continue

        xv = x[branch_var]
        down_hi = hi.copy()
        down_hi[branch_var] = math.floor(xv)
        up_lo = lo.copy()
        up_lo[branch_var] = math.ceil(xv)
        heappush(heap, (node_bound, next(seq), lo, down_hi))
        heappush(heap, (node_bound, next(seq), up_lo, hi))

    wall = time.monotonic() - start
    if stop_status == "limit-reached":
        lb = open_lower()
        status = "limit-reached"
        sol = _as_solution(model, incumbent, inc_obj, "feasible")
        return SolveResult(status, sol, lb, explored, wall)

    # tree exhausted
    if incumbent is None:
        lb = pruned_min if math.isfinite(pruned_min) else math.inf
        return SolveResult("infeasible", None, lb, explored, wall)
    lb = min(pruned_min, inc_obj)
    status = "optimal" if lb >= inc_obj - BOUND_TOL else "feasible"
    sol = _as_solution(model, incumbent, inc_obj,
                       "optimal" if status == "optimal" else "feasible")
    return SolveResult(status, sol, lb, explored, wall)


def _relative_gap(upper: float, lower: float) -> float:
    if not math.isfinite(lower):
        return math.inf
    if upper == 0:
        return 0.0 if lower >= -BOUND_TOL else math.inf
    return (upper - lower) / abs(upper)


def _most_fractional(arrays: _Arrays, x) -> int | None:
    best, best_frac = None, INT_TOL
    for idx in arrays.int_idx:
        frac = abs(x[idx] - round(x[idx]))
        if frac > best_frac:
            best, best_frac = int(idx), frac
    return best


def _integral_point(model: MilpModel, arrays: _Arrays, x) -> dict[str, float]:
    values = {}
    for i, v in enumerate(model.variables):
        values[v.name] = float(round(x[i])) if v.is_integer() else float(x[i])
    return values


def _as_solution(model, values, obj, status) -> MilpSolution | None:
    if values is None:
        return None
    return MilpSolution(values, obj, status)


def _root_separation(model: MilpModel, arrays: _Arrays,
                     config: SolveConfig, rounds: int = 3) -> None:
    """Root-node cutting loop: solve the relaxation, ask the separator for
    violated cuts, add them, repeat up to `rounds` times."""
    for _ in range(rounds):
        status, _value, x = arrays.solve_lp()
        if status != "optimal":
            return
        point = {v.name: float(x[i]) for i, v in enumerate(model.variables)}
        cuts = config.separator(model, point)
        if not cuts:
            return
        for terms, rhs in cuts:
            arrays.add_ub_row(terms, rhs)


# -- brute force oracles ----------------------------------------------------

BRUTE_FORCE_GUARD = 10 ** 7


def brute_force_model(model: MilpModel,
                      guard: int = BRUTE_FORCE_GUARD) -> SolveResult:
    """Exhaustive enumeration over integer variable assignments."""
    start = time.monotonic()
    ranges = []
    for v in model.variables:
        if not v.is_integer():
            if v.lower == v.upper:
                ranges.append([v.lower])
                continue
            raise SolverError(
                f"brute force requires integer or fixed variables ({v.name})")
        if not (math.isfinite(v.lower) and math.isfinite(v.upper)):
            raise SolverError(f"variable {v.name} is unbounded")
        ranges.append(list(range(int(math.ceil(v.lower)),
                                 int(math.floor(v.upper)) + 1)))
    space = math.prod(len(r) for r in ranges)
    if space > guard:
        raise SearchSpaceError(f"search space {space} exceeds guard {guard}")

    names = [v.name for v in model.variables]
    best, best_obj = None, math.inf
    for combo in itertools.product(*ranges):
        values = dict(zip(names, (float(c) for c in combo)))
        if model.first_violation(values) is not None:
            continue
        obj = model.objective_value(values)
        if obj < best_obj:
            best, best_obj = values, obj
    wall = time.monotonic() - start
    if best is None:
        return SolveResult("infeasible", None, math.inf, space, wall)
    return SolveResult("optimal", MilpSolution(best, best_obj, "optimal"),
                       best_obj, space, wall)


def brute_force_instance(instance: Instance,
                         guard: int = BRUTE_FORCE_GUARD) -> SolveResult:
    """Exhaustive enumeration over event -> (period, room) assignments."""
    start = time.monotonic()
    room_ids = [r.id for r in instance.rooms]
    per_course: list[tuple[str, list[tuple[tuple[int, str], ...]]]] = []
    space = 1
    for c in instance.courses:
        allowed = [p for p in range(instance.periods)
                   if (c.id, p) not in instance.unavailability]
        options = []
        for periods in itertools.combinations(allowed, c.events):
            for rooms in itertools.product(room_ids, repeat=c.events):
                options.append(tuple(zip(periods, rooms)))
        if not options:
            return SolveResult("infeasible", None, math.inf, 0,
                               time.monotonic() - start)
        space *= len(options)
        if space > guard:
            raise SearchSpaceError(f"search space exceeds guard {guard}")
        per_course.append((c.id, options))

    best, best_obj = None, math.inf
    stack_ids = [cid for cid, _ in per_course]
    for combo in itertools.product(*(opts for _, opts in per_course)):
        solution = evaluation.Solution(dict(zip(stack_ids, combo)))
        if evaluation.check_hard(instance, solution):
            continue
        obj = evaluation.evaluate(instance, solution)
        if obj < best_obj:
            best, best_obj = solution, obj
    wall = time.monotonic() - start
    if best is None:
        return SolveResult("infeasible", None, math.inf, space, wall)
    values = {"objective": best_obj}
    result = SolveResult("optimal",
                         MilpSolution(values, best_obj, "optimal"),
                         best_obj, space, wall)
    result.solution = best  # domain Solution rides along
    return result


# -- external adapter --------------------------------------------------------

@dataclass
class AdapterConfig:
    command: list[str]  # template; {mps}, {time_limit}, {solution} placeholders
    workdir: str | Path
    solution_path: str | Path
    bound_path: str | Path | None = None
    time_limit: float = 60.0


def external_solve(model: MilpModel, adapter: AdapterConfig) -> SolveResult:
    """Write MPS, invoke the external process, read back and verify.

    The external point is re-checked against the model; a constraint-violating
    file is reported as an inconsistency, never trusted.
    """
    start = time.monotonic()
    workdir = Path(adapter.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    mps_path = workdir / f"{model.name}.mps"
    mps_path.write_text(export_mps(model))
    solution_path = Path(adapter.solution_path)

    command = [arg.format(mps=str(mps_path),
                          time_limit=str(adapter.time_limit),
                          solution=str(solution_path))
               for arg in adapter.command]
    try:
        proc = subprocess.run(command, cwd=workdir, capture_output=True,
                              text=True, timeout=adapter.time_limit + 60)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise ExternalSolverError(f"external process failed: {exc}")
    if proc.returncode != 0:
        raise ExternalSolverError(
            f"external process exited with {proc.returncode}: {proc.stderr}")
    if not solution_path.exists():
        raise ExternalSolverError(f"missing solution file {solution_path}")

    imported = import_solution(model, solution_path.read_text())
    if imported.status != "feasible":
        violated = model.first_violation(imported.values)
        raise ExternalSolverError(
            f"external solution is inconsistent (violates {violated})")

    lower = -math.inf
    if adapter.bound_path is not None:
        bound_path = Path(adapter.bound_path)
        if bound_path.exists():
            fields = bound_path.read_text().split()
            if len(fields) != 2 or fields[0] != "LOWER_BOUND":
                raise ExternalSolverError("malformed bound file")
            lower = float(fields[1])
    return SolveResult("feasible", imported, lower, 0,
                       time.monotonic() - start)
