"""Arithmetic instances over nonnegative reals.

An instance is a set of variables x_1..x_n ranging over the nonnegative
reals together with constraints of exactly three forms:

    x_i = 1        (const)
    x_i = x_j + x_k  (add)
    x_i = x_j * x_k  (mul)

This module provides the model, the line-based file format, exact and
tolerant evaluation, a certified interval oracle over a bounded box, and
a restricted compiler from integer-coefficient polynomial systems.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .fileio import ParseError, content_lines, format_number, parse_number
from .quadsys import (
    Equation,
    QuadraticSystem,
    SearchStatus,
    branch_and_prune,
)


class ConstraintKind(enum.Enum):
    CONST = "const"
    ADD = "add"
    MUL = "mul"


@dataclass(frozen=True)
class AmiConstraint:
    kind: ConstraintKind
    target: int
    operands: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind is ConstraintKind.CONST:
            if self.operands:
                raise ValueError("const constraint takes no operands")
        elif len(self.operands) != 2:
            raise ValueError(f"{self.kind.value} constraint needs two operands")

    def indices(self) -> tuple[int, ...]:
        return (self.target, *self.operands)

    def validate(self, n: int) -> None:
        for idx in self.indices():
            if not 1 <= idx <= n:
                raise ValueError(f"index {idx} out of range [1, {n}]")


@dataclass(frozen=True)
class AmiInstance:
    n: int
    constraints: tuple[AmiConstraint, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("variable count must be at least 1")
        object.__setattr__(self, "constraints", tuple(self.constraints))
        seen = set()
        for c in self.constraints:
            c.validate(self.n)
            key = (c.kind, c.target, c.operands)
            if key in seen:
                warnings.warn(f"duplicate constraint {serialize_constraint(c)}")
            seen.add(key)

    @property
    def m(self) -> int:
        return len(self.constraints)


@dataclass(frozen=True)
class Assignment:
    """Nonnegative values for x_1..x_n; exact rationals or binary64."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        for v in self.values:
            if v < 0:
                raise ValueError(f"negative assignment value {v}")

    def __len__(self):
        return len(self.values)

    def is_rational(self) -> bool:
        return all(isinstance(v, (Fraction, int)) for v in self.values)


# ---------------------------------------------------------------------------
# file format

def parse_ami(text: str) -> AmiInstance:
    lines = list(content_lines(text))
    if not lines:
        raise ParseError("missing 'vars <n>' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "vars":
        raise ParseError("expected 'vars <n>' header", lineno)
    try:
        n = int(parts[1])
    except ValueError:
        raise ParseError(f"bad variable count {parts[1]!r}", lineno) from None
    if n < 1:
        raise ParseError("variable count must be at least 1", lineno)

    constraints = []
    for lineno, line in lines[1:]:
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "const":
                if len(parts) != 2:
                    raise ParseError("expected 'const <i>'", lineno)
                c = AmiConstraint(ConstraintKind.CONST, int(parts[1]))
            elif kind in ("add", "mul"):
                if len(parts) != 4:
                    raise ParseError(f"expected '{kind} <i> <j> <k>'", lineno)
                c = AmiConstraint(
                    ConstraintKind(kind), int(parts[1]), (int(parts[2]), int(parts[3]))
                )
            else:
                raise ParseError(f"unknown constraint kind {kind!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad index in {line!r}", lineno) from None
        try:
            c.validate(n)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        constraints.append(c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        inst = AmiInstance(n, tuple(constraints))
    return inst


def serialize_constraint(c: AmiConstraint) -> str:
    if c.kind is ConstraintKind.CONST:
        return f"const {c.target}"
    return f"{c.kind.value} {c.target} {c.operands[0]} {c.operands[1]}"


def serialize_ami(inst: AmiInstance) -> str:
    lines = [f"vars {inst.n}"]
    lines.extend(serialize_constraint(c) for c in inst.constraints)
    return "\n".join(lines) + "\n"


def parse_assignment(text: str) -> Assignment:
    values = []
    for lineno, line in content_lines(text):
        values.append(parse_number(line, lineno))
    if not values:
        raise ParseError("empty assignment file")
    return Assignment(tuple(values))


def serialize_assignment(a: Assignment) -> str:
    return "\n".join(format_number(v) for v in a.values) + "\n"


# ---------------------------------------------------------------------------
# evaluation

def constraint_residual(c: AmiConstraint, values: Sequence):
    x = values
    if c.kind is ConstraintKind.CONST:
        return x[c.target - 1] - 1
    j, k = c.operands
    if c.kind is ConstraintKind.ADD:
        return x[c.target - 1] - (x[j - 1] + x[k - 1])
    return x[c.target - 1] - x[j - 1] * x[k - 1]


def evaluate_ami(inst: AmiInstance, a: Assignment, tol=0) -> bool:
    """True iff every constraint holds within tol (tol=0 is exact)."""
    if len(a) != inst.n:
        raise ValueError(f"assignment length {len(a)} != n = {inst.n}")
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    for c in inst.constraints:
        if abs(constraint_residual(c, a.values)) > tol:
            return False
    return True


# ---------------------------------------------------------------------------
# interval oracle

class OracleStatus(enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    UNKNOWN = "UNKNOWN"


@dataclass
class OracleResult:
    status: OracleStatus
    box: Optional[list[tuple[float, float]]] = None
    witness: Optional[Assignment] = None
    stats: dict = field(default_factory=dict)


def ami_to_quadratic_system(inst: AmiInstance) -> QuadraticSystem:
    one = Fraction(1)
    eqs = []
    for c in inst.constraints:
        i = c.target - 1
        if c.kind is ConstraintKind.CONST:
            eqs.append(Equation(((one, (i,)),), Fraction(1)))
        elif c.kind is ConstraintKind.ADD:
            j, k = (o - 1 for o in c.operands)
            eqs.append(
                Equation(((one, (i,)), (-one, (j,)), (-one, (k,))), Fraction(0))
            )
        else:
            j, k = (o - 1 for o in c.operands)
            pair = (j, k) if j <= k else (k, j)
            eqs.append(Equation(((one, (i,)), (-one, pair)), Fraction(0)))
    return QuadraticSystem(inst.n, eqs, [f"x_{i+1}" for i in range(inst.n)])


def ami_interval_oracle(
    inst: AmiInstance,
    bound: float,
    max_depth: int = 120,
    *,
    max_nodes: int = 100_000,
    feas_tol: float = 1e-9,
) -> OracleResult:
    """Branch-and-prune search for a satisfying point in [0, bound]^n.

    INFEASIBLE is certified only within the given box.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if max_depth < 0:
        raise ValueError("depth budget must be nonnegative")
    system = ami_to_quadratic_system(inst)
    outcome = branch_and_prune(
        system,
        bound,
        tol=feas_tol,
        max_depth=max_depth,
        max_nodes=max_nodes,
    )
    if outcome.status is SearchStatus.FEASIBLE:
        witness = Assignment(tuple(max(0.0, v) for v in outcome.point))
        return OracleResult(OracleStatus.FEASIBLE, outcome.box, witness, outcome.stats)
    if outcome.status is SearchStatus.INFEASIBLE:
        return OracleResult(OracleStatus.INFEASIBLE, outcome.box, None, outcome.stats)
    return OracleResult(OracleStatus.UNKNOWN, None, None, outcome.stats)


# ---------------------------------------------------------------------------
# restricted polynomial front end

PolyTerm = tuple[int, tuple[int, ...]]
PolyEquation = Sequence[PolyTerm]


class _AmiBuilder:
    """Accumulates auxiliary variables and constraints during compilation."""

    def __init__(self, n_source: int):
        self.next_var = n_source
        self.constraints: list[AmiConstraint] = []
        self._one: Optional[int] = None
        self._zero: Optional[int] = None
        self._consts: dict[int, int] = {}
        self._pow2: list[int] = []

    def fresh(self) -> int:
        self.next_var += 1
        return self.next_var

    def add(self, kind: ConstraintKind, target: int, operands=()):
        self.constraints.append(AmiConstraint(kind, target, tuple(operands)))

    def one(self) -> int:
        if self._one is None:
            v = self.fresh()
            self.add(ConstraintKind.CONST, v)
            self._one = v
            self._consts[1] = v
        return self._one

    def zero(self) -> int:
        # x = x + x forces x = 0
        if self._zero is None:
            v = self.fresh()
            self.add(ConstraintKind.ADD, v, (v, v))
            self._zero = v
            self._consts[0] = v
        return self._zero

    def power_of_two(self, k: int) -> int:
        while len(self._pow2) <= k:
            if not self._pow2:
                self._pow2.append(self.one())
            else:
                prev = self._pow2[-1]
                v = self.fresh()
                self.add(ConstraintKind.ADD, v, (prev, prev))
                self._pow2.append(v)
        return self._pow2[k]

    def constant(self, value: int) -> int:
        # binary expansion keeps the encoding linear in the bit length
        if value < 0:
            raise ValueError("constants are built for nonnegative values only")
        if value in self._consts:
            return self._consts[value]
        bits = [k for k in range(value.bit_length()) if value >> k & 1]
        acc = self.power_of_two(bits[0])
        for k in bits[1:]:
            v = self.fresh()
            self.add(ConstraintKind.ADD, v, (acc, self.power_of_two(k)))
            acc = v
        self._consts[value] = acc
        return acc

    def monomial(self, variables: tuple[int, ...]) -> int:
        if not variables:
            return self.one()
        acc = variables[0]
        for v in variables[1:]:
            t = self.fresh()
            self.add(ConstraintKind.MUL, t, (acc, v))
            acc = t
        return acc

    def term(self, coef: int, variables: tuple[int, ...]) -> int:
        if not variables:
            return self.constant(coef)
        m = self.monomial(variables)
        if coef == 1:
            return m
        t = self.fresh()
        self.add(ConstraintKind.MUL, t, (self.constant(coef), m))
        return t

    def total(self, parts: list[int]) -> int:
        if not parts:
            return self.zero()
        acc = parts[0]
        for p in parts[1:]:
            v = self.fresh()
            self.add(ConstraintKind.ADD, v, (acc, p))
            acc = v
        return acc

    def equate(self, a: int, b: int):
        # x_a = x_b * 1
        self.add(ConstraintKind.MUL, a, (b, self.one()))


def compile_polysystem_to_ami(system: Sequence[PolyEquation]) -> AmiInstance:
    """Compile integer-coefficient polynomial equations p(x) = 0 over
    nonnegative variables into an equisatisfiable arithmetic instance.

    Input terms are (coefficient, variable-index tuple); a repeated index
    raises the degree.  Source variables keep their indices 1..n; all
    further variables are auxiliaries.  Each equation is split into its
    positive and negative parts, which are summed separately and equated.
    """
    n_source = 0
    for eq in system:
        for coef, variables in eq:
            if not isinstance(coef, int):
                raise ValueError(f"non-integer coefficient {coef!r} is unsupported")
            for v in variables:
                if v < 1:
                    raise ValueError(f"bad variable index {v}")
                n_source = max(n_source, v)
    if n_source == 0:
        n_source = 1

    builder = _AmiBuilder(n_source)
    for eq in system:
        pos = [builder.term(c, tuple(vs)) for c, vs in eq if c > 0]
        neg = [builder.term(-c, tuple(vs)) for c, vs in eq if c < 0]
        if not pos and not neg:
            continue
        builder.equate(builder.total(pos), builder.total(neg))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return AmiInstance(builder.next_var, tuple(builder.constraints))
