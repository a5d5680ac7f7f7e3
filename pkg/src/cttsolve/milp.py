"""Abstract mixed-integer linear models with MPS interchange.

A model is mutable while it is being built (single writer) and immutable
once frozen; frozen models are safe to share across concurrent solves.
Coefficients are 64-bit floats with a 1e-6 feasibility and integrality
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

FEAS_TOL = 1e-6

VarKind = str  # "binary" | "integer" | "continuous"
Sense = str  # "<=" | ">=" | "="


class MilpError(Exception):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: float
    upper: float
    tag: tuple = ()

    def is_integer(self) -> bool:
        return self.kind in ("binary", "integer")


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    terms: tuple[tuple[float, int], ...]  # (coefficient, variable index)
    sense: Sense
    rhs: float
    origin: str = ""


@dataclass(frozen=True)
class MilpSolution:
    values: dict[str, float]
    objective_value: float
    status: str  # optimal | feasible | infeasible | unbounded | limit-reached


class MilpModel:
    def __init__(self, name: str, instance_name: str = ""):
        self.name = name
        self.instance_name = instance_name
        self.variables: list[Variable] = []
        self.constraints: list[LinearConstraint] = []
        self.objective_terms: tuple[tuple[float, int], ...] = ()
        self.objective_constant: float = 0.0
        self.metadata: dict = {}
        self._var_index: dict[str, int] = {}
        self._con_index: dict[str, int] = {}
        self._frozen = False

    # -- building ---------------------------------------------------------

    def _check_mutable(self):
        if self._frozen:
            raise MilpError(f"model {self.name!r} is frozen")

    def add_variable(self, name: str, kind: VarKind = "continuous",
                     lower: float = 0.0, upper: float = math.inf,
                     tag: tuple = ()) -> int:
        self._check_mutable()
        if name in self._var_index:
            raise MilpError(f"duplicate variable name {name!r}")
        if kind not in ("binary", "integer", "continuous"):
            raise MilpError(f"unknown variable kind {kind!r}")
        if kind == "binary":
            if upper == math.inf:
                upper = 1.0
            if lower < 0 or upper > 1:
                raise MilpError(f"binary variable {name!r} must lie in [0, 1]")
        if lower > upper:
            raise MilpError(f"variable {name!r} has lower > upper")
        idx = len(self.variables)
        self.variables.append(Variable(name, kind, lower, upper, tag))
        self._var_index[name] = idx
        return idx

    def var(self, name: str) -> int:
        try:
            return self._var_index[name]
        except KeyError:
            raise MilpError(f"unknown variable {name!r}")

    def has_variable(self, name: str) -> bool:
        return name in self._var_index

    def has_constraint(self, name: str) -> bool:
        return name in self._con_index

    def _resolve_terms(self, terms) -> tuple[tuple[float, int], ...]:
        merged: dict[int, float] = {}
        order: list[int] = []
        for coef, ref in terms:
            idx = ref if isinstance(ref, int) else self.var(ref)
            if not 0 <= idx < len(self.variables):
                raise MilpError(f"variable index {idx} out of range")
            if idx not in merged:
                merged[idx] = 0.0
                order.append(idx)
            merged[idx] += float(coef)
        return tuple((merged[i], i) for i in order)

    def add_constraint(self, name: str, terms, sense: Sense, rhs: float,
                       origin: str = "") -> int:
        self._check_mutable()
        if name in self._con_index:
            raise MilpError(f"duplicate constraint name {name!r}")
        if sense not in ("<=", ">=", "="):
            raise MilpError(f"unknown constraint sense {sense!r}")
        idx = len(self.constraints)
        self.constraints.append(LinearConstraint(
            name, self._resolve_terms(terms), sense, float(rhs), origin))
        self._con_index[name] = idx
        return idx

    def set_objective(self, terms, constant: float = 0.0) -> None:
        self._check_mutable()
        self.objective_terms = self._resolve_terms(terms)
        self.objective_constant = float(constant)

    def freeze(self) -> "MilpModel":
        self._frozen = True
        return self

    def copy(self, name: str | None = None) -> "MilpModel":
        """Mutable copy (restriction builders extend copies of frozen models)."""
        out = MilpModel(name or self.name, self.instance_name)
        out.variables = list(self.variables)
        out.constraints = list(self.constraints)
        out.objective_terms = self.objective_terms
        out.objective_constant = self.objective_constant
        out.metadata = dict(self.metadata)
        out._var_index = dict(self._var_index)
        out._con_index = dict(self._con_index)
        return out

    # -- evaluation -------------------------------------------------------

    def objective_value(self, values: dict[str, float]) -> float:
        total = self.objective_constant
        for coef, idx in self.objective_terms:
            total += coef * values.get(self.variables[idx].name, 0.0)
        return total

    def constraint_activity(self, con: LinearConstraint,
                            values: dict[str, float]) -> float:
        return sum(coef * values.get(self.variables[idx].name, 0.0)
                   for coef, idx in con.terms)

    def first_violation(self, values: dict[str, float],
                        tol: float = FEAS_TOL) -> str | None:
        """Name of the first violated bound or constraint, or None."""
        for v in self.variables:
            x = values.get(v.name, 0.0)
            if x < v.lower - tol or x > v.upper + tol:
                return f"bound:{v.name}"
            if v.is_integer() and abs(x - round(x)) > tol:
                return f"integrality:{v.name}"
        for con in self.constraints:
            lhs = self.constraint_activity(con, values)
            if con.sense == "<=" and lhs > con.rhs + tol:
                return con.name
            if con.sense == ">=" and lhs < con.rhs - tol:
                return con.name
            if con.sense == "=" and abs(lhs - con.rhs) > tol:
                return con.name
        return None

    def origins(self) -> set[str]:
        return {c.origin for c in self.constraints}


# -- MPS interchange -------------------------------------------------------

_OBJ_ROW = "COST"
_SENSE_TO_ROW = {"<=": "L", ">=": "G", "=": "E"}
_ROW_TO_SENSE = {v: k for k, v in _SENSE_TO_ROW.items()}


def _num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def export_mps(model: MilpModel) -> str:
    """Deterministic fixed-section MPS text, insertion order throughout."""
    lines = [f"NAME          {model.name}"]
    lines.append("ROWS")
    lines.append(f" N  {_OBJ_ROW}")
    for con in model.constraints:
        lines.append(f" {_SENSE_TO_ROW[con.sense]}  {con.name}")

    obj_coef = {idx: coef for coef, idx in model.objective_terms}
    by_var: dict[int, list[tuple[str, float]]] = {
        i: [] for i in range(len(model.variables))
    }
    for con in model.constraints:
        for coef, idx in con.terms:
            by_var[idx].append((con.name, coef))

    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for i, v in enumerate(model.variables):
        if v.is_integer() != in_int:
            state = "INTORG" if v.is_integer() else "INTEND"
            lines.append(f"    MARKER{marker}    'MARKER'    '{state}'")
            marker += 1
            in_int = v.is_integer()
        entries = [(_OBJ_ROW, obj_coef.get(i, 0.0))] + by_var[i]
        for row, coef in entries:
            lines.append(f"    {v.name}  {row}  {_num(coef)}")
    if in_int:
        lines.append(f"    MARKER{marker}    'MARKER'    'INTEND'")

    lines.append("RHS")
    if model.objective_constant != 0.0:
        lines.append(f"    RHS  {_OBJ_ROW}  {_num(-model.objective_constant)}")
    for con in model.constraints:
        if con.rhs != 0.0:
            lines.append(f"    RHS  {con.name}  {_num(con.rhs)}")

    lines.append("BOUNDS")
    for v in model.variables:
        if v.lower == -math.inf and v.upper == math.inf:
            lines.append(f" FR BND  {v.name}")
            continue
        if v.lower == -math.inf:
            lines.append(f" MI BND  {v.name}")
        elif v.lower != 0.0 or v.is_integer():
            lines.append(f" LO BND  {v.name}  {_num(v.lower)}")
        if v.upper != math.inf:
            lines.append(f" UP BND  {v.name}  {_num(v.upper)}")

    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def parse_mps(text: str) -> MilpModel:
    """Inverse of export_mps for the subset it emits (tags are not carried)."""
    model = MilpModel("mps")
    section = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    col_entries: dict[str, list[tuple[str, float]]] = {}
    col_order: list[str] = []
    col_kind: dict[str, str] = {}
    rhs: dict[str, float] = {}
    bounds: dict[str, list[float]] = {}
    in_int = False

    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        fields = raw.split()
        head = fields[0]
        indented = raw[0] in " \t"  # section headers start at column one
        if not indented and head == "NAME":
            model.name = fields[1] if len(fields) > 1 else "mps"
            continue
        if not indented and head in ("ROWS", "COLUMNS", "RHS", "BOUNDS",
                                     "RANGES", "ENDATA"):
            section = head
            continue
        if section == "ROWS":
            sense, name = fields[0], fields[1]
            if sense == "N":
                continue
            row_sense[name] = sense
            row_order.append(name)
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                in_int = fields[2] == "'INTORG'"
                continue
            name = fields[0]
            if name not in col_entries:
                col_entries[name] = []
                col_order.append(name)
                col_kind[name] = "integer" if in_int else "continuous"
            pairs = fields[1:]
            for row, coef in zip(pairs[0::2], pairs[1::2]):
                col_entries[name].append((row, float(coef)))
        elif section == "RHS":
            pairs = fields[1:]
            for row, value in zip(pairs[0::2], pairs[1::2]):
                rhs[row] = float(value)
        elif section == "BOUNDS":
            btype, name = fields[0], fields[2]
            lohi = bounds.setdefault(name, [0.0, math.inf])
            if btype == "LO":
                lohi[0] = float(fields[3])
            elif btype == "UP":
                lohi[1] = float(fields[3])
            elif btype == "MI":
                lohi[0] = -math.inf
            elif btype == "FR":
                lohi[0], lohi[1] = -math.inf, math.inf
            elif btype == "FX":
                lohi[0] = lohi[1] = float(fields[3])
            elif btype == "BV":
                lohi[0], lohi[1] = 0.0, 1.0
            else:
                raise MilpError(f"unsupported bound type {btype!r}")

    for name in col_order:
        lo, hi = bounds.get(name, [0.0, math.inf])
        kind = col_kind[name]
        if kind == "integer" and lo == 0.0 and hi == 1.0:
            kind = "binary"
        model.add_variable(name, kind, lo, hi)

    obj_terms: list[tuple[float, str]] = []
    row_terms: dict[str, list[tuple[float, str]]] = {r: [] for r in row_order}
    for name in col_order:
        for row, coef in col_entries[name]:
            if row == _OBJ_ROW:
                if coef != 0.0:
                    obj_terms.append((coef, name))
            else:
                row_terms[row].append((coef, name))
    for row in row_order:
        model.add_constraint(row, row_terms[row], _ROW_TO_SENSE[row_sense[row]],
                             rhs.get(row, 0.0))
    model.set_objective(obj_terms, constant=-rhs.get(_OBJ_ROW, 0.0))
    return model


def import_solution(model: MilpModel, text: str) -> MilpSolution:
    """Read whitespace-separated ``name value`` lines and check feasibility.

    Unlisted variables default to zero.  Status is ``feasible`` when every
    constraint holds within tolerance, else ``infeasible``.
    """
    values: dict[str, float] = {}
    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise MilpError(f"solution line {idx}: expected 'name value'")
        name, value = fields
        if not model.has_variable(name):
            raise MilpError(f"solution line {idx}: unknown variable {name!r}")
        values[name] = float(value)
    full = {v.name: values.get(v.name, 0.0) for v in model.variables}
    violated = model.first_violation(full)
    status = "feasible" if violated is None else "infeasible"
    return MilpSolution(full, model.objective_value(full), status)


def format_values(values: dict[str, float]) -> str:
    lines = [f"{name} {_num(float(v))}" for name, v in values.items()]
    return "\n".join(lines) + "\n" if lines else ""
