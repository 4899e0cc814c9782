"""Constrained nonnegative Gram feasibility instances.

An instance prescribes exact rational values for selected entries of a
symmetric matrix W, plus affine relations among selected entries, and asks
for a nonnegative N x r matrix H with (H H^T)_ij matching every specified
entry and satisfying every affine relation after substituting
W_ij = <h_i, h_j>.  Gram entries are always derived from H, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .fileio import (
    ParseError,
    content_lines,
    format_number,
    format_rational,
    parse_number,
    parse_rational,
)
from .quadsys import Equation, QuadraticSystem


@dataclass(frozen=True)
class SpecifiedEntry:
    i: int
    j: int
    value: Fraction

    @staticmethod
    def make(i: int, j: int, value) -> "SpecifiedEntry":
        if i > j:
            i, j = j, i
        return SpecifiedEntry(i, j, Fraction(value))


@dataclass(frozen=True)
class AffineConstraint:
    """Sum of coefficient * W_ij terms equated to a rational constant."""

    terms: tuple[tuple[Fraction, int, int], ...]
    rhs: Fraction

    @staticmethod
    def make(terms, rhs) -> "AffineConstraint":
        canon = []
        for a, i, j in terms:
            if i > j:
                i, j = j, i
            canon.append((Fraction(a), i, j))
        if not canon:
            raise ValueError("affine constraint needs at least one term")
        return AffineConstraint(tuple(canon), Fraction(rhs))


@dataclass(frozen=True)
class GramInstance:
    num_rows: int
    rank: int
    specified: tuple[SpecifiedEntry, ...]
    affine: tuple[AffineConstraint, ...]

    def __post_init__(self):
        if self.num_rows < 1:
            raise ValueError("row count must be at least 1")
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        values = {}
        deduped = []
        for e in self.specified:
            if not (1 <= e.i <= e.j <= self.num_rows):
                raise ValueError(f"entry ({e.i},{e.j}) out of range")
            key = (e.i, e.j)
            if key in values:
                if values[key] != e.value:
                    raise ValueError(
                        f"conflicting values for entry ({e.i},{e.j}): "
                        f"{values[key]} vs {e.value}"
                    )
                continue
            values[key] = e.value
            deduped.append(e)
        object.__setattr__(
            self, "specified", tuple(sorted(deduped, key=lambda e: (e.i, e.j)))
        )
        for c in self.affine:
            for _a, i, j in c.terms:
                if not (1 <= i <= j <= self.num_rows):
                    raise ValueError(f"affine term entry ({i},{j}) out of range")
        object.__setattr__(self, "affine", tuple(self.affine))


@dataclass(frozen=True)
class Realization:
    """Candidate H: rows of nonnegative vectors of equal width."""

    rows: tuple[tuple, ...]

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("realization needs at least one row")
        width = len(rows[0])
        for r in rows:
            if len(r) != width:
                raise ValueError("ragged realization rows")

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        return len(self.rows[0])

    def is_rational(self) -> bool:
        return all(
            isinstance(v, (Fraction, int)) for row in self.rows for v in row
        )

    def gram_entry(self, i: int, j: int):
        """Inner product <h_i, h_j> with 1-based row indices."""
        hi, hj = self.rows[i - 1], self.rows[j - 1]
        return sum(a * b for a, b in zip(hi, hj))


@dataclass(frozen=True)
class VerificationReport:
    entry_residuals: tuple
    affine_residuals: tuple
    negativity: object
    max_violation: object
    tolerance: object
    passed: bool


def check_realization(inst: GramInstance, H: Realization, tol=0) -> VerificationReport:
    """Residuals of H against every specified entry and affine relation.

    With rational H and tol = 0 the check is exact; otherwise residuals
    are binary64.
    """
    if H.num_rows != inst.num_rows or H.width != inst.rank:
        raise ValueError(
            f"realization shape {H.num_rows}x{H.width} does not match "
            f"instance {inst.num_rows}x{inst.rank}"
        )
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    entry_residuals = tuple(
        abs(H.gram_entry(e.i, e.j) - e.value) for e in inst.specified
    )
    affine_residuals = tuple(
        abs(sum(a * H.gram_entry(i, j) for a, i, j in c.terms) - c.rhs)
        for c in inst.affine
    )
    most_negative = min((v for row in H.rows for v in row), default=0)
    negativity = -most_negative if most_negative < 0 else most_negative * 0
    max_violation = max(
        [*entry_residuals, *affine_residuals, negativity],
        default=negativity,
    )
    return VerificationReport(
        entry_residuals=entry_residuals,
        affine_residuals=affine_residuals,
        negativity=negativity,
        max_violation=max_violation,
        tolerance=tol,
        passed=max_violation <= tol,
    )


# ---------------------------------------------------------------------------
# file formats

def parse_gram(text: str) -> GramInstance:
    lines = list(content_lines(text))
    if not lines:
        raise ParseError("missing 'gram rank <r> rows <N>' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "gram" or parts[1] != "rank" or parts[3] != "rows":
        raise ParseError("expected 'gram rank <r> rows <N>' header", lineno)
    try:
        rank, num_rows = int(parts[2]), int(parts[4])
    except ValueError:
        raise ParseError("bad rank/row count", lineno) from None

    specified = []
    affine = []
    for lineno, line in lines[1:]:
        parts = line.split()
        if parts[0] == "entry":
            if len(parts) != 4:
                raise ParseError("expected 'entry <i> <j> <value>'", lineno)
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise ParseError("bad entry indices", lineno) from None
            specified.append(SpecifiedEntry.make(i, j, parse_rational(parts[3], lineno)))
        elif parts[0] == "affine":
            body = line[len("affine"):].strip()
            if ":" not in body:
                raise ParseError("expected 'affine <b> : <a> <i> <j> [; ...]'", lineno)
            rhs_text, terms_text = body.split(":", 1)
            rhs = parse_rational(rhs_text.strip(), lineno)
            terms = []
            for chunk in terms_text.split(";"):
                fields = chunk.split()
                if len(fields) != 3:
                    raise ParseError(f"bad affine term {chunk.strip()!r}", lineno)
                try:
                    i, j = int(fields[1]), int(fields[2])
                except ValueError:
                    raise ParseError("bad affine term indices", lineno) from None
                terms.append((parse_rational(fields[0], lineno), i, j))
            affine.append(AffineConstraint.make(terms, rhs))
        else:
            raise ParseError(f"unknown directive {parts[0]!r}", lineno)
    try:
        return GramInstance(num_rows, rank, tuple(specified), tuple(affine))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def serialize_gram(inst: GramInstance) -> str:
    lines = [f"gram rank {inst.rank} rows {inst.num_rows}"]
    for e in inst.specified:
        lines.append(f"entry {e.i} {e.j} {format_rational(e.value)}")
    for c in inst.affine:
        terms = "; ".join(f"{format_rational(a)} {i} {j}" for a, i, j in c.terms)
        lines.append(f"affine {format_rational(c.rhs)} : {terms}")
    return "\n".join(lines) + "\n"


def parse_realization(text: str) -> Realization:
    lines = list(content_lines(text))
    if not lines:
        raise ParseError("missing 'real rows <N> cols <r>' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "real" or parts[1] != "rows" or parts[3] != "cols":
        raise ParseError("expected 'real rows <N> cols <r>' header", lineno)
    try:
        num_rows, width = int(parts[2]), int(parts[4])
    except ValueError:
        raise ParseError("bad row/column count", lineno) from None
    rows = []
    for lineno, line in lines[1:]:
        tokens = line.split()
        if len(tokens) != width:
            raise ParseError(f"expected {width} values per row", lineno)
        rows.append(tuple(parse_number(t, lineno) for t in tokens))
    if len(rows) != num_rows:
        raise ParseError(f"expected {num_rows} rows, found {len(rows)}")
    return Realization(tuple(rows))


def serialize_realization(H: Realization) -> str:
    lines = [f"real rows {H.num_rows} cols {H.width}"]
    for row in H.rows:
        lines.append(" ".join(format_number(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# polynomial-system view

def gram_to_quadratic_system(inst: GramInstance) -> QuadraticSystem:
    """Quadratic equations over the entries h_<i>_<k> of the unknown H."""
    r = inst.rank

    def var(i: int, k: int) -> int:  # 1-based row, 1-based column
        return (i - 1) * r + (k - 1)

    names = [f"h_{i}_{k}" for i in range(1, inst.num_rows + 1) for k in range(1, r + 1)]
    equations = []
    one = Fraction(1)
    for e in inst.specified:
        terms = tuple(
            (one, _ordered(var(e.i, k), var(e.j, k))) for k in range(1, r + 1)
        )
        equations.append(Equation(terms, e.value))
    for c in inst.affine:
        terms = tuple(
            (a, _ordered(var(i, k), var(j, k)))
            for a, i, j in c.terms
            for k in range(1, r + 1)
        )
        equations.append(Equation(terms, c.rhs))
    return QuadraticSystem(inst.num_rows * r, equations, names)


def _ordered(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def export_polynomial_system(inst: GramInstance) -> str:
    """Emit the instance as an explicit polynomial system over h_<i>_<k>.

    One equation per specified entry, one per affine constraint (after
    substituting each W entry by its inner product), and one nonnegativity
    inequality per variable.
    """
    system = gram_to_quadratic_system(inst)
    lines = [f"var {name}" for name in system.var_names]
    for eq in system.equations:
        monomials = []
        for c, vs in eq.terms:
            factors = " * ".join(system.var_names[v] for v in vs)
            monomials.append(f"{format_rational(c)} * {factors}" if factors else format_rational(c))
        lines.append(f"eq {' + '.join(monomials)} = {format_rational(eq.rhs)}")
    for name in system.var_names:
        lines.append(f"ge {name} 0")
    return "\n".join(lines) + "\n"


def parse_polynomial_system(text: str) -> QuadraticSystem:
    """Parse the export format back into a quadratic system."""
    names: list[str] = []
    index: dict[str, int] = {}
    equations: list[Equation] = []
    for lineno, line in content_lines(text):
        parts = line.split(None, 1)
        directive = parts[0]
        if directive == "var":
            name = parts[1].strip()
            if name in index:
                raise ParseError(f"duplicate variable {name!r}", lineno)
            index[name] = len(names)
            names.append(name)
        elif directive == "eq":
            if "=" not in parts[1]:
                raise ParseError("equation missing '='", lineno)
            lhs, rhs_text = parts[1].rsplit("=", 1)
            rhs = parse_rational(rhs_text.strip(), lineno)
            terms = []
            for monomial in lhs.split(" + "):
                factors = [f.strip() for f in monomial.split("*")]
                coef = parse_rational(factors[0], lineno)
                vs = []
                for name in factors[1:]:
                    if name not in index:
                        raise ParseError(f"unknown variable {name!r}", lineno)
                    vs.append(index[name])
                if len(vs) > 2:
                    raise ParseError("monomial degree exceeds 2", lineno)
                terms.append((coef, tuple(sorted(vs))))
            equations.append(Equation(tuple(terms), rhs))
        elif directive == "ge":
            fields = parts[1].split()
            if len(fields) != 2 or fields[0] not in index or fields[1] != "0":
                raise ParseError("expected 'ge <var> 0'", lineno)
        else:
            raise ParseError(f"unknown directive {directive!r}", lineno)
    return QuadraticSystem(len(names), equations, names)
