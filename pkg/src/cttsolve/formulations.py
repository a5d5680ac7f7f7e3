"""Model builders: the full timetabling formulation, the period-only
surface relaxations, dive restrictions, cuts, and decoders.

Builders are pure; callers may freeze produced models before sharing them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .evaluation import Solution, count_isolated
from .instance import ConflictGraph, Instance, MultiRoom, build_multirooms
from .milp import MilpModel, MilpSolution

PERIOD_FIXED = "period-fixed"
DAY_FIXED = "day-fixed"
DAY_DECOMP = "day-decomp"
DAY_FIXED_ZERO_STABILITY = "day-fixed-zero-stability"
DIVE_KINDS = (PERIOD_FIXED, DAY_FIXED, DAY_DECOMP, DAY_FIXED_ZERO_STABILITY)

INT_TOL = 1e-6


class FormulationError(Exception):
    pass


@dataclass(frozen=True)
class PeriodAssignment:
    """Periods used by each course (one period per event)."""

    periods: dict[str, frozenset[int]]

    def validate(self, instance: Instance) -> None:
        for c in instance.courses:
            used = self.periods.get(c.id, frozenset())
            if len(used) != c.events:
                raise FormulationError(
                    f"course {c.id} uses {len(used)} periods, needs {c.events}")
            for p in used:
                if not 0 <= p < instance.periods:
                    raise FormulationError(f"period {p} out of range")
                if (c.id, p) in instance.unavailability:
                    raise FormulationError(
                        f"course {c.id} placed at forbidden period {p}")
        for p in range(instance.periods):
            present = [c.id for c in instance.courses
                       if p in self.periods.get(c.id, frozenset())]
            if len(present) > len(instance.rooms):
                raise FormulationError(
                    f"period {p} hosts {len(present)} events for"
                    f" {len(instance.rooms)} rooms")
            teachers = [instance.course_by_id[c].teacher for c in present]
            if len(set(teachers)) != len(teachers):
                raise FormulationError(f"teacher clash at period {p}")
            present_set = set(present)
            for u in instance.curricula:
                if len(present_set & u.courses) > 1:
                    raise FormulationError(
                        f"curriculum {u.id} clash at period {p}")


@dataclass(frozen=True)
class DayAssignment:
    """Events per (course, day)."""

    counts: dict[str, tuple[int, ...]]

    def validate(self, instance: Instance) -> None:
        for c in instance.courses:
            per_day = self.counts.get(c.id)
            if per_day is None or len(per_day) != instance.days:
                raise FormulationError(f"course {c.id} day counts missing")
            if sum(per_day) != c.events:
                raise FormulationError(
                    f"course {c.id} day counts sum to {sum(per_day)},"
                    f" needs {c.events}")
            if max(per_day) > instance.periods_per_day:
                raise FormulationError(
                    f"course {c.id} exceeds periods per day")


@dataclass(frozen=True)
class Neighborhood:
    kind: str
    basis: PeriodAssignment | DayAssignment
    source_objective: float
    discovery_index: int = 0

    def __post_init__(self):
        if self.kind not in DIVE_KINDS:
            raise FormulationError(f"unknown dive kind {self.kind!r}")
        needs_periods = self.kind == PERIOD_FIXED
        if needs_periods != isinstance(self.basis, PeriodAssignment):
            raise FormulationError(
                f"dive kind {self.kind} does not match basis type"
                f" {type(self.basis).__name__}")


# -- shared naming ----------------------------------------------------------

def _vname(tag: tuple) -> str:
    return f"{tag[0]}[{','.join(str(t) for t in tag[1:])}]"


def _tag_map(model: MilpModel) -> dict[tuple, int]:
    return {v.tag: i for i, v in enumerate(model.variables) if v.tag}


def _taught_kind(model: MilpModel) -> str:
    kinds = {v.tag[0] for v in model.variables if v.tag}
    for kind in ("taught", "m_taught", "times"):
        if kind in kinds:
            return kind
    raise FormulationError("model carries no period-assignment variables")


def _room_keys(model: MilpModel) -> list:
    kind = _taught_kind(model)
    if kind == "times":
        return []
    keys = []
    for v in model.variables:
        if v.tag and v.tag[0] == kind and v.tag[2] not in keys:
            keys.append(v.tag[2])
    return keys


def occupancy_terms(model: MilpModel, period: int, course_id: str,
                    tags: dict[tuple, int] | None = None) -> list:
    """Terms summing to 1 iff the course meets at the period."""
    tags = tags if tags is not None else _tag_map(model)
    kind = _taught_kind(model)
    if kind == "times":
        return [(1.0, tags[("times", period, course_id)])]
    return [(1.0, tags[(kind, period, key, course_id)])
            for key in _room_keys(model)]


# -- builders ---------------------------------------------------------------

def _add_day_spread_machinery(model: MilpModel, instance: Instance,
                              occ_of) -> None:
    """Day indicators, min-days shortfalls, and isolated-lecture indicators.

    `occ_of(p, c)` yields the terms that indicate course c meets at period p.
    """
    for d in range(instance.days):
        for c in instance.courses:
            model.add_variable(_vname(("sched", d, c.id)), "binary",
                               tag=("sched", d, c.id))
    for c in instance.courses:
        model.add_variable(_vname(("mdv", c.id)), "integer", 0, instance.days,
                           tag=("mdv", c.id))
    for u in instance.curricula:
        for d in range(instance.days):
            for s in range(instance.periods_per_day):
                model.add_variable(_vname(("single", u.id, d, s)), "binary",
                                   tag=("single", u.id, d, s))

    for c in instance.courses:
        for d in range(instance.days):
            sched = _vname(("sched", d, c.id))
            for p in instance.day_periods(d):
                model.add_constraint(
                    f"day_ub[{c.id},{d},{p}]",
                    occ_of(p, c.id) + [(-1.0, sched)],
                    "<=", 0.0, origin="day-aggregation")
            lower = []
            for p in instance.day_periods(d):
                lower += occ_of(p, c.id)
            model.add_constraint(
                f"day_lb[{c.id},{d}]", lower + [(-1.0, sched)],
                ">=", 0.0, origin="day-aggregation")
        model.add_constraint(
            f"min_days[{c.id}]",
            [(1.0, _vname(("sched", d, c.id))) for d in range(instance.days)]
            + [(1.0, _vname(("mdv", c.id)))],
            ">=", float(c.min_days), origin="min-days")

    n = instance.periods_per_day
    for u in instance.curricula:
        for d in range(instance.days):
            day = list(instance.day_periods(d))

            def occ(j):
                terms = []
                for cid in sorted(u.courses):
                    terms += occ_of(day[j], cid)
                return terms

            for j in range(n):
                terms = occ(j)
                if n > 1:
                    if j > 0:
                        terms += [(-coef, ref) for coef, ref in occ(j - 1)]
                    if j < n - 1:
                        terms += [(-coef, ref) for coef, ref in occ(j + 1)]
                terms.append((-1.0, _vname(("single", u.id, d, j))))
                model.add_constraint(
                    f"pattern[{u.id},{d},{j}]", terms, "<=", 0.0,
                    origin="pattern")


def _build_full(instance: Instance, rooms: list[MultiRoom],
                aggregated: bool) -> MilpModel:
    """Full formulation over (multi-)rooms; the plain model is the identity
    aggregation with unit multiplicities."""
    name = "surface2" if aggregated else "monolithic"
    taught = "m_taught" if aggregated else "taught"
    uses = "m_uses" if aggregated else "uses"
    model = MilpModel(name, instance.name)
    model.metadata["formulation"] = name
    model.metadata["instance"] = instance
    if aggregated:
        model.metadata["multirooms"] = tuple(rooms)
    w = instance.weights

    room_keys = [r.id for r in rooms]
    by_key = {r.id: r for r in rooms}

    obj = []
    for p in range(instance.periods):
        for key in room_keys:
            for c in instance.courses:
                idx = model.add_variable(
                    _vname((taught, p, key, c.id)), "binary",
                    tag=(taught, p, key, c.id))
                overflow = c.students - by_key[key].capacity
                if w.capacity and overflow > 0:
                    obj.append((float(w.capacity * overflow), idx))

    def occ_of(p, cid):
        return [(1.0, _vname((taught, p, key, cid))) for key in room_keys]

    for c in instance.courses:
        terms = []
        for p in range(instance.periods):
            terms += occ_of(p, c.id)
        model.add_constraint(f"event_count[{c.id}]", terms, "=",
                             float(c.events), origin="event-count")
    for p in range(instance.periods):
        for key in room_keys:
            model.add_constraint(
                f"room_clash[{p},{key}]",
                [(1.0, _vname((taught, p, key, c.id)))
                 for c in instance.courses],
                "<=", float(by_key[key].multiplicity), origin="room-clash")
    for p in range(instance.periods):
        for c in instance.courses:
            model.add_constraint(f"course_clash[{p},{c.id}]",
                                 occ_of(p, c.id), "<=", 1.0,
                                 origin="course-clash")
        for t in sorted(instance.teachers):
            terms = []
            for c in instance.courses:
                if c.teacher == t:
                    terms += occ_of(p, c.id)
            model.add_constraint(f"teacher_clash[{p},{t}]", terms, "<=", 1.0,
                                 origin="teacher-clash")
        for u in instance.curricula:
            terms = []
            for cid in sorted(u.courses):
                terms += occ_of(p, cid)
            model.add_constraint(f"curriculum_clash[{p},{u.id}]", terms,
                                 "<=", 1.0, origin="curriculum-clash")
    for cid, p in sorted(instance.unavailability):
        model.add_constraint(f"forbidden[{cid},{p}]", occ_of(p, cid), "=",
                             0.0, origin="forbidden-period")

    _add_day_spread_machinery(model, instance, occ_of)

    for key in room_keys:
        for c in instance.courses:
            model.add_variable(_vname((uses, key, c.id)), "binary",
                               tag=(uses, key, c.id))
    for p in range(instance.periods):
        for key in room_keys:
            for c in instance.courses:
                model.add_constraint(
                    f"room_used_ub[{p},{key},{c.id}]",
                    [(1.0, _vname((taught, p, key, c.id))),
                     (-1.0, _vname((uses, key, c.id)))],
                    "<=", 0.0, origin="room-aggregation")
    for key in room_keys:
        for c in instance.courses:
            model.add_constraint(
                f"room_used_lb[{key},{c.id}]",
                [(1.0, _vname((taught, p, key, c.id)))
                 for p in range(instance.periods)]
                + [(-1.0, _vname((uses, key, c.id)))],
                ">=", 0.0, origin="room-aggregation")

    for c in instance.courses:
        obj.append((float(w.spread), model.var(_vname(("mdv", c.id)))))
    for u in instance.curricula:
        for d in range(instance.days):
            for s in range(instance.periods_per_day):
                obj.append((float(w.compactness),
                            model.var(_vname(("single", u.id, d, s)))))
    for key in room_keys:
        for c in instance.courses:
            obj.append((float(w.stability),
                        model.var(_vname((uses, key, c.id)))))
    stability_constant = -float(w.stability) * len(instance.courses)
    model.metadata["stability_constant"] = stability_constant
    model.set_objective(obj, constant=stability_constant)
    return model


def build_monolithic(instance: Instance) -> MilpModel:
    rooms = build_multirooms(instance, "identity")
    by_member = {next(iter(r.members)): r for r in rooms}
    ordered = [by_member[r.id] for r in instance.rooms]
    return _build_full(instance, ordered, aggregated=False)


def build_surface2(instance: Instance,
                   multirooms: tuple[MultiRoom, ...]) -> MilpModel:
    members = sorted(m for r in multirooms for m in r.members)
    if members != sorted(r.id for r in instance.rooms):
        raise FormulationError("multirooms must partition the room set")
    return _build_full(instance, list(multirooms), aggregated=True)


def build_surface(instance: Instance,
                  stratified_bounds: bool = False) -> MilpModel:
    """Period-assignment relaxation: bounded colouring with only the
    spread and compactness terms kept in the objective."""
    model = MilpModel("surface", instance.name)
    model.metadata["formulation"] = "surface"
    model.metadata["instance"] = instance
    w = instance.weights

    for p in range(instance.periods):
        for c in instance.courses:
            model.add_variable(_vname(("times", p, c.id)), "binary",
                               tag=("times", p, c.id))

    def occ_of(p, cid):
        return [(1.0, _vname(("times", p, cid)))]

    for c in instance.courses:
        model.add_constraint(
            f"event_count[{c.id}]",
            [(1.0, _vname(("times", p, c.id))) for p in range(instance.periods)],
            "=", float(c.events), origin="event-count")
    for p in range(instance.periods):
        for u in instance.curricula:
            model.add_constraint(
                f"curriculum_clash[{p},{u.id}]",
                [(1.0, _vname(("times", p, cid))) for cid in sorted(u.courses)],
                "<=", 1.0, origin="curriculum-clash")
        for t in sorted(instance.teachers):
            model.add_constraint(
                f"teacher_clash[{p},{t}]",
                [(1.0, _vname(("times", p, c.id)))
                 for c in instance.courses if c.teacher == t],
                "<=", 1.0, origin="teacher-clash")
        model.add_constraint(
            f"room_bound[{p}]",
            [(1.0, _vname(("times", p, c.id))) for c in instance.courses],
            "<=", float(len(instance.rooms)), origin="room-bound")
    for cid, p in sorted(instance.unavailability):
        model.add_constraint(f"forbidden[{cid},{p}]",
                             [(1.0, _vname(("times", p, cid)))], "=", 0.0,
                             origin="forbidden-period")

    if stratified_bounds:
        # Optional variant: also bound large courses by the count of rooms
        # above each capacity threshold.  This restricts the surface search
        # space; it is NOT a relaxation of the full problem, so lower bounds
        # from a stratified surface are not globally valid.
        caps = sorted({r.capacity for r in instance.rooms})
        for a in caps[:-1]:
            large_rooms = sum(1 for r in instance.rooms if r.capacity > a)
            big = [c.id for c in instance.courses if c.students > a]
            if not big:
                continue
            for p in range(instance.periods):
                model.add_constraint(
                    f"room_bound_gt{a}[{p}]",
                    [(1.0, _vname(("times", p, cid))) for cid in big],
                    "<=", float(large_rooms), origin="room-bound")

    _add_day_spread_machinery(model, instance, occ_of)

    obj = []
    for c in instance.courses:
        obj.append((float(w.spread), model.var(_vname(("mdv", c.id)))))
    for u in instance.curricula:
        for d in range(instance.days):
            for s in range(instance.periods_per_day):
                obj.append((float(w.compactness),
                            model.var(_vname(("single", u.id, d, s)))))
    model.set_objective(obj)
    return model


# -- restrictions (dives) -----------------------------------------------------

def restrict_period_fixed(monolithic: MilpModel,
                          basis: PeriodAssignment) -> MilpModel:
    instance: Instance = monolithic.metadata["instance"]
    basis.validate(instance)
    model = monolithic.copy(name=f"{monolithic.name}+{PERIOD_FIXED}")
    model.metadata["dive"] = PERIOD_FIXED
    tags = _tag_map(model)
    for c in instance.courses:
        used = basis.periods.get(c.id, frozenset())
        for p in range(instance.periods):
            model.add_constraint(
                f"period_fix[{p},{c.id}]",
                occupancy_terms(model, p, c.id, tags),
                "=", 1.0 if p in used else 0.0, origin="period-fix")
    return model


def restrict_day_fixed(monolithic: MilpModel, basis: DayAssignment,
                       variant: str = "plain") -> MilpModel:
    if variant not in ("plain", "decomp", "zero-stability"):
        raise FormulationError(f"unknown day-fixed variant {variant!r}")
    instance: Instance = monolithic.metadata["instance"]
    basis.validate(instance)
    source = monolithic
    if variant == "decomp":
        source = _strip_room_stability(monolithic)
    model = source.copy(name=f"{monolithic.name}+day-{variant}")
    model.metadata["dive"] = {
        "plain": DAY_FIXED, "decomp": DAY_DECOMP,
        "zero-stability": DAY_FIXED_ZERO_STABILITY}[variant]
    tags = _tag_map(model)
    for c in instance.courses:
        per_day = basis.counts[c.id]
        for d in range(instance.days):
            terms = []
            for p in instance.day_periods(d):
                terms += occupancy_terms(model, p, c.id, tags)
            model.add_constraint(f"day_fix[{c.id},{d}]", terms, "=",
                                 float(per_day[d]), origin="day-fix")
    if variant == "zero-stability":
        uses_kind = "m_uses" if ("m_taught" in {v.tag[0] for v in
                                                model.variables if v.tag}
                                 ) else "uses"
        for c in instance.courses:
            if c.events < 1:
                continue
            terms = [(1.0, idx) for tag, idx in tags.items()
                     if tag[0] == uses_kind and tag[2] == c.id]
            model.add_constraint(f"one_room[{c.id}]", terms, "=", 1.0,
                                 origin="one-room")
    return model


def _strip_room_stability(model: MilpModel) -> MilpModel:
    """Copy without the room-usage indicators and their aggregation rows;
    the stability objective term (and its constant) goes with them."""
    instance: Instance = model.metadata["instance"]
    out = MilpModel(model.name, model.instance_name)
    out.metadata = dict(model.metadata)
    out.metadata.pop("stability_constant", None)
    dropped = {i for i, v in enumerate(model.variables)
               if v.tag and v.tag[0] in ("uses", "m_uses")}
    keep_name: dict[int, str] = {}
    for i, v in enumerate(model.variables):
        if i in dropped:
            continue
        keep_name[i] = v.name
        out.add_variable(v.name, v.kind, v.lower, v.upper, v.tag)
    for con in model.constraints:
        if any(idx in dropped for _, idx in con.terms):
            continue
        out.add_constraint(
            con.name, [(coef, keep_name[idx]) for coef, idx in con.terms],
            con.sense, con.rhs, con.origin)
    obj = [(coef, keep_name[idx]) for coef, idx in model.objective_terms
           if idx not in dropped]
    constant = model.objective_constant - model.metadata.get(
        "stability_constant", 0.0)
    out.set_objective(obj, constant=constant)
    assert instance is out.metadata["instance"]
    return out


def build_dive(monolithic: MilpModel, neighborhood: Neighborhood) -> MilpModel:
    if neighborhood.kind == PERIOD_FIXED:
        return restrict_period_fixed(monolithic, neighborhood.basis)
    variant = {DAY_FIXED: "plain", DAY_DECOMP: "decomp",
               DAY_FIXED_ZERO_STABILITY: "zero-stability"}[neighborhood.kind]
    return restrict_day_fixed(monolithic, neighborhood.basis, variant)


# -- decoding ----------------------------------------------------------------

def _integral(value: float, context: str) -> int:
    if abs(value - round(value)) > INT_TOL:
        raise FormulationError(f"non-integral value {value} for {context}")
    return int(round(value))


def decode_monolithic(instance: Instance,
                      milp_solution: MilpSolution) -> Solution:
    if milp_solution.status not in ("optimal", "feasible"):
        raise FormulationError(
            f"cannot decode solution with status {milp_solution.status}")
    assignments: dict[str, list[tuple[int, str]]] = {
        c.id: [] for c in instance.courses}
    for name, value in milp_solution.values.items():
        if not name.startswith("taught["):
            continue
        if _integral(value, name):
            p, room, cid = name[len("taught["):-1].split(",")
            assignments[cid].append((int(p), room))
    return Solution({cid: tuple(sorted(v)) for cid, v in assignments.items()})


def decode_surface(instance: Instance,
                   milp_solution: MilpSolution) -> PeriodAssignment:
    """Invert the variable tagging of a surface or aggregated-surface
    solution into the periods used by each course."""
    if milp_solution.status not in ("optimal", "feasible"):
        raise FormulationError(
            f"cannot decode solution with status {milp_solution.status}")
    periods: dict[str, set[int]] = {c.id: set() for c in instance.courses}
    for name, value in milp_solution.values.items():
        if name.startswith("times["):
            if _integral(value, name):
                p, cid = name[len("times["):-1].split(",")
                periods[cid].add(int(p))
        elif name.startswith(("taught[", "m_taught[")):
            if _integral(value, name):
                p, _key, cid = name.split("[", 1)[1][:-1].split(",")
                periods[cid].add(int(p))
    return PeriodAssignment({cid: frozenset(v) for cid, v in periods.items()})


def relax_to_days(basis: PeriodAssignment, instance: Instance) -> DayAssignment:
    counts = {}
    for cid, used in basis.periods.items():
        per_day = [0] * instance.days
        for p in used:
            per_day[instance.day_of(p)] += 1
        counts[cid] = tuple(per_day)
    return DayAssignment(counts)


def project_solution(instance: Instance, solution: Solution) -> PeriodAssignment:
    return PeriodAssignment({
        cid: frozenset(p for p, _ in pairs)
        for cid, pairs in solution.assignments.items()})


def encode_solution(instance: Instance, model: MilpModel,
                    solution: Solution) -> dict[str, float]:
    """Variable values realising a full solution in a full-formulation model
    (auxiliaries at their forced minima)."""
    taught_kind = _taught_kind(model)
    multirooms: tuple[MultiRoom, ...] = model.metadata.get("multirooms", ())
    room_to_key = {}
    if taught_kind == "m_taught":
        for mr in multirooms:
            for member in mr.members:
                room_to_key[member] = mr.id
    else:
        room_to_key = {r.id: r.id for r in instance.rooms}

    values = {v.name: 0.0 for v in model.variables}
    days_used: dict[str, set[int]] = {c.id: set() for c in instance.courses}
    rooms_used: dict[str, set[str]] = {c.id: set() for c in instance.courses}
    curriculum_periods: dict[str, set[int]] = {
        u.id: set() for u in instance.curricula}

    for cid, period, room in solution.events():
        key = room_to_key[room]
        if taught_kind == "times":
            values[_vname(("times", period, cid))] = 1.0
        else:
            values[_vname((taught_kind, period, key, cid))] = 1.0
        days_used[cid].add(instance.day_of(period))
        rooms_used[cid].add(key)
        for u in instance.curricula:
            if cid in u.courses:
                curriculum_periods[u.id].add(period)

    for c in instance.courses:
        for d in days_used[c.id]:
            name = _vname(("sched", d, c.id))
            if name in values:
                values[name] = 1.0
        name = _vname(("mdv", c.id))
        if name in values:
            values[name] = float(max(0, c.min_days - len(days_used[c.id])))
        uses_kind = "m_uses" if taught_kind == "m_taught" else "uses"
        for key in rooms_used[c.id]:
            name = _vname((uses_kind, key, c.id))
            if name in values:
                values[name] = 1.0

    for u in instance.curricula:
        for d in range(instance.days):
            day = list(instance.day_periods(d))
            occ = [p in curriculum_periods[u.id] for p in day]
            for j, busy in enumerate(occ):
                if not busy:
                    continue
                left = j > 0 and occ[j - 1]
                right = j < len(occ) - 1 and occ[j + 1]
                if not left and not right:
                    name = _vname(("single", u.id, d, j))
                    if name in values:
                        values[name] = 1.0
    return values


# -- cuts ---------------------------------------------------------------------

def add_clique_cuts(model: MilpModel, cliques, graph: ConflictGraph) -> int:
    """One at-most-one row per (clique, period); duplicates by name are
    skipped.  Returns the number of rows added."""
    instance: Instance = model.metadata["instance"]
    tags = _tag_map(model)
    added = 0
    for clique in cliques:
        members = sorted(clique)
        for a, b in itertools.combinations(members, 2):
            if not graph.are_adjacent(a, b):
                raise FormulationError(
                    f"{{{a}, {b}}} is not an edge; not a clique")
        for p in range(instance.periods):
            name = f"clique[{p},{'+'.join(members)}]"
            if model.has_constraint(name):
                continue
            terms = []
            for cid in members:
                terms += occupancy_terms(model, p, cid, tags)
            model.add_constraint(name, terms, "<=", 1.0, origin="clique-cut")
            added += 1
    return added


def greedy_clique_cover(graph: ConflictGraph) -> list[frozenset[str]]:
    """Maximal cliques covering all vertices, grown greedily from vertices in
    decreasing degree order."""
    degree = {v: len(graph.neighbours(v)) for v in graph.vertices}
    order = sorted(graph.vertices, key=lambda v: (-degree[v], v))
    covered: set[str] = set()
    cliques: list[frozenset[str]] = []
    for v in order:
        if v in covered:
            continue
        clique = {v}
        candidates = sorted(graph.neighbours(v),
                            key=lambda u: (-degree[u], u))
        for u in candidates:
            if all(graph.are_adjacent(u, m) for m in clique):
                clique.add(u)
        covered |= clique
        if len(clique) >= 2:
            cliques.append(frozenset(clique))
    return cliques


def separate_cliques(graph: ConflictGraph, fractional: dict,
                     keep_ungrown: bool = True,
                     tol: float = 1e-6) -> list[frozenset[str]]:
    """Find cliques whose per-period fractional occupancy exceeds one.

    Triangles are enumerated; each violated one is greedily grown by
    vertices adjacent to all members that increase the violated sum.
    """
    periods = sorted({p for p, _ in fractional})
    vertices = sorted(graph.vertices)
    found: list[frozenset[str]] = []
    seen: set[frozenset[str]] = set()
    for tri in itertools.combinations(vertices, 3):
        a, b, c = tri
        if not (graph.are_adjacent(a, b) and graph.are_adjacent(a, c)
                and graph.are_adjacent(b, c)):
            continue
        for p in periods:
            val = {v: fractional.get((p, v), 0.0) for v in vertices}
            total = val[a] + val[b] + val[c]
            if total <= 1.0 + tol:
                continue
            clique = set(tri)
            grown = False
            while True:
                extensions = [
                    v for v in vertices
                    if v not in clique and val[v] > tol
                    and all(graph.are_adjacent(v, m) for m in clique)]
                if not extensions:
                    break
                best = max(extensions, key=lambda v: (val[v], v))
                clique.add(best)
                grown = True
            if not grown and not keep_ungrown:
                continue
            key = frozenset(clique)
            if key not in seen:
                seen.add(key)
                found.append(key)
    return found


def clique_separator(graph: ConflictGraph):
    """Root-node separation callback for the built-in solver."""

    def separate(model: MilpModel, point: dict[str, float]):
        instance: Instance = model.metadata["instance"]
        tags = _tag_map(model)
        fractional: dict[tuple[int, str], float] = {}
        for v in model.variables:
            if not v.tag:
                continue
            if v.tag[0] == "times":
                _, p, cid = v.tag
                fractional[(p, cid)] = point.get(v.name, 0.0)
            elif v.tag[0] in ("taught", "m_taught"):
                _, p, _key, cid = v.tag
                fractional[(p, cid)] = fractional.get((p, cid), 0.0) \
                    + point.get(v.name, 0.0)
        cuts = []
        for clique in separate_cliques(graph, fractional):
            members = sorted(clique)
            for p in range(instance.periods):
                if sum(fractional.get((p, c), 0.0) for c in members) <= 1 + 1e-6:
                    continue
                terms = []
                for cid in members:
                    terms += occupancy_terms(model, p, cid, tags)
                cuts.append((terms, 1.0))
        return cuts

    return separate


def add_implied_bound_cuts(model: MilpModel) -> int:
    """Static at-least-one rows on day indicators and, when present, on
    room-usage indicators."""
    instance: Instance = model.metadata["instance"]
    tags = _tag_map(model)
    kinds = {tag[0] for tag in tags}
    added = 0
    for c in instance.courses:
        if c.events < 1:
            continue
        if "sched" in kinds:
            name = f"implied_days[{c.id}]"
            if not model.has_constraint(name):
                model.add_constraint(
                    name,
                    [(1.0, tags[("sched", d, c.id)])
                     for d in range(instance.days)],
                    ">=", 1.0, origin="implied-bound-cut")
                added += 1
        for uses_kind in ("uses", "m_uses"):
            if uses_kind not in kinds:
                continue
            name = f"implied_rooms[{c.id}]"
            if not model.has_constraint(name):
                model.add_constraint(
                    name,
                    [(1.0, idx) for tag, idx in sorted(tags.items())
                     if tag[0] == uses_kind and tag[2] == c.id],
                    ">=", 1.0, origin="implied-bound-cut")
                added += 1
    return added


def add_pattern_cuts(model: MilpModel, patterns) -> int:
    """Pattern-enumeration rows: when a curriculum's daily occupancy matches
    a +1/-1 pattern exactly, its isolated-lecture indicators must absorb
    that pattern's penalty."""
    instance: Instance = model.metadata["instance"]
    tags = _tag_map(model)
    n = instance.periods_per_day
    added = 0
    for pattern, penalty in patterns:
        if len(pattern) != n:
            raise FormulationError(
                f"pattern length {len(pattern)} != periods per day {n}")
        if any(a not in (-1, 1) for a in pattern):
            raise FormulationError("pattern entries must be -1 or +1")
        expected = count_isolated([a == 1 for a in pattern])
        if penalty != expected:
            raise FormulationError(
                f"pattern {pattern} has penalty {expected}, got {penalty}")
        if penalty == 0:
            continue
        m = sum(1 for a in pattern if a == 1)
        label = "".join("1" if a == 1 else "0" for a in pattern)
        for u in instance.curricula:
            for d in range(instance.days):
                name = f"pattern_cut[{u.id},{d},{label}]"
                if model.has_constraint(name):
                    continue
                day = list(instance.day_periods(d))
                terms = []
                for j, a in enumerate(pattern):
                    for cid in sorted(u.courses):
                        terms += [(float(penalty * a), ref) for _, ref in
                                  occupancy_terms(model, day[j], cid, tags)]
                for s in range(n):
                    terms.append((-1.0, tags[("single", u.id, d, s)]))
                model.add_constraint(name, terms, "<=",
                                     float(penalty * (m - 1)),
                                     origin="pattern-cut")
                added += 1
    return added


def all_patterns(periods_per_day: int):
    """Every +1/-1 day pattern with its isolated-lecture penalty."""
    out = []
    for bits in itertools.product((1, -1), repeat=periods_per_day):
        out.append((bits, count_isolated([a == 1 for a in bits])))
    return out
