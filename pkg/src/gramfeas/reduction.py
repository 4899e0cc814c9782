"""Compilation of arithmetic instances into constrained Gram feasibility.

The construction uses r anchor rows pinned to an orthonormal nonnegative
frame and one row per arithmetic variable constrained to the slice
(x, 1, 0, ..., 0).  Constant, addition, and multiplication constraints
then become affine relations among Gram entries:

    x_i = 1        ->  W[e1, u_i] = 1
    x_i = x_j+x_k  ->  W[e1, u_j] + W[e1, u_k] - W[e1, u_i] = 0
    x_i = x_j*x_k  ->  W[u_j, u_k] - W[e1, u_i] = 1

Row numbering is fixed: anchors occupy rows 1..r, variable row u_i is
row r + i.  This makes serializations canonical and byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .ami import AmiConstraint, AmiInstance, Assignment, ConstraintKind
from .fileio import ParseError, content_lines
from .gram import AffineConstraint, GramInstance, Realization, SpecifiedEntry


@dataclass(frozen=True)
class ReductionMap:
    """Links a reduced Gram instance back to its source arithmetic instance."""

    rank: int
    anchor_rows: tuple[int, ...]
    var_rows: tuple[int, ...]
    source_n: int
    source_m: int

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be at least 2")
        if len(self.anchor_rows) != self.rank or len(self.var_rows) != self.source_n:
            raise ValueError("anchor/variable row counts do not match rank/n")
        rows = (*self.anchor_rows, *self.var_rows)
        if sorted(rows) != list(range(1, self.source_n + self.rank + 1)):
            raise ValueError("rows must cover exactly 1..n+r without repeats")

    @property
    def num_rows(self) -> int:
        return self.source_n + self.rank


def reduce_rank_r(inst: AmiInstance, r: int) -> tuple[GramInstance, ReductionMap]:
    """Compile an arithmetic instance at any fixed rank r >= 2.

    Emits n + r rows, r(r+1)/2 anchor entries (orthonormal frame),
    (r-1) entries per variable row, and one affine constraint per source
    constraint with coefficients in {-1, 0, 1} and constants in {0, 1}.
    """
    if r < 2:
        raise ValueError("rank must be at least 2")
    n = inst.n
    anchors = tuple(range(1, r + 1))
    var_rows = tuple(r + i for i in range(1, n + 1))
    e1 = anchors[0]
    e2 = anchors[1]

    specified = []
    for a in range(1, r + 1):
        for b in range(a, r + 1):
            specified.append(SpecifiedEntry.make(a, b, Fraction(1 if a == b else 0)))
    for u in var_rows:
        specified.append(SpecifiedEntry.make(e2, u, Fraction(1)))
        for t in range(3, r + 1):
            specified.append(SpecifiedEntry.make(anchors[t - 1], u, Fraction(0)))

    one = Fraction(1)
    affine = []
    for c in inst.constraints:
        ui = var_rows[c.target - 1]
        if c.kind is ConstraintKind.CONST:
            affine.append(AffineConstraint.make(((one, e1, ui),), 1))
        elif c.kind is ConstraintKind.ADD:
            uj, uk = (var_rows[o - 1] for o in c.operands)
            affine.append(
                AffineConstraint.make(
                    ((one, e1, uj), (one, e1, uk), (-one, e1, ui)), 0
                )
            )
        else:
            uj, uk = (var_rows[o - 1] for o in c.operands)
            affine.append(
                AffineConstraint.make(((one, uj, uk), (-one, e1, ui)), 1)
            )

    gram = GramInstance(n + r, r, tuple(specified), tuple(affine))
    rmap = ReductionMap(r, anchors, var_rows, n, inst.m)
    return gram, rmap


def reduce_rank2(inst: AmiInstance) -> tuple[GramInstance, ReductionMap]:
    return reduce_rank_r(inst, 2)


def witness_from_assignment(rmap: ReductionMap, a: Assignment) -> Realization:
    """Build the explicit realization for a satisfying assignment.

    Anchor rows become the standard basis vectors; variable row u_i becomes
    (x_i, 1, 0, ..., 0).  A rational assignment yields a rational witness.
    """
    if len(a) != rmap.source_n:
        raise ValueError(f"assignment length {len(a)} != n = {rmap.source_n}")
    rational = a.is_rational()
    zero = Fraction(0) if rational else 0.0
    unit = Fraction(1) if rational else 1.0
    r = rmap.rank
    rows: list[tuple] = [None] * rmap.num_rows
    for pos, row in enumerate(rmap.anchor_rows):
        vec = [zero] * r
        vec[pos] = unit
        rows[row - 1] = tuple(vec)
    for i, row in enumerate(rmap.var_rows):
        value = a.values[i]
        if value < 0:
            raise ValueError(f"negative assignment value {value}")
        vec = [zero] * r
        vec[0] = Fraction(value) if rational else float(value)
        vec[1] = unit
        rows[row - 1] = tuple(vec)
    return Realization(tuple(rows))


def extract_assignment(rmap: ReductionMap, H: Realization, tol=0) -> Assignment:
    """Read the encoded variable values off a (near-)feasible realization.

    First matches each anchor row to a distinct column by its largest
    coordinate (greedily in anchor order, hard threshold 1 - tol); this
    fixes the column permutation.  The value of variable i is then the
    Gram entry between the first anchor row and row u_i, clamped to 0 when
    it dips below by at most tol.
    """
    if H.num_rows != rmap.num_rows or H.width != rmap.rank:
        raise ValueError(
            f"realization shape {H.num_rows}x{H.width} does not match "
            f"map ({rmap.num_rows}x{rmap.rank})"
        )
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    claimed = set()
    for row in rmap.anchor_rows:
        vec = H.rows[row - 1]
        best = max(range(rmap.rank), key=lambda k: vec[k])
        if vec[best] < 1 - tol:
            raise ValueError(
                f"anchor row {row} has largest coordinate {vec[best]}, "
                f"below 1 - tol"
            )
        if best in claimed:
            raise ValueError(f"two anchor rows map to column {best + 1}")
        claimed.add(best)

    e1 = rmap.anchor_rows[0]
    values = []
    for u in rmap.var_rows:
        value = H.gram_entry(e1, u)
        if value < 0:
            if -value > tol:
                raise ValueError(f"extracted value {value} below -tol")
            value = value * 0  # clamp, preserving exact/float type
        values.append(value)
    return Assignment(tuple(values))


def lift_instance(inst: GramInstance, new_rank: int) -> GramInstance:
    """Same entries and affine constraints at a larger target rank."""
    if new_rank < inst.rank:
        raise ValueError(f"cannot lower rank {inst.rank} to {new_rank}")
    if new_rank == inst.rank:
        return inst
    return GramInstance(inst.num_rows, new_rank, inst.specified, inst.affine)


def lift_realization(H: Realization, new_width: int) -> Realization:
    """Append zero columns; all inner products are preserved."""
    if new_width < H.width:
        raise ValueError(f"cannot lower width {H.width} to {new_width}")
    if new_width == H.width:
        return H
    pad = new_width - H.width
    rows = []
    for row in H.rows:
        zero = Fraction(0) if all(isinstance(v, (Fraction, int)) for v in row) else 0.0
        rows.append(tuple(row) + (zero,) * pad)
    return Realization(tuple(rows))


# ---------------------------------------------------------------------------
# construction inversion (used by the structural solver engine)

def recover_ami(inst: GramInstance, rmap: ReductionMap) -> AmiInstance:
    """Rebuild the source arithmetic instance from a reduced Gram instance.

    Raises ValueError when the instance does not match the construction
    pattern for the given map (wrong specified entries or affine shapes).
    """
    if inst.num_rows != rmap.num_rows or inst.rank != rmap.rank:
        raise ValueError("instance shape does not match map")
    expected = {}
    r = rmap.rank
    for a in range(r):
        for b in range(a, r):
            ra, rb = rmap.anchor_rows[a], rmap.anchor_rows[b]
            expected[_key(ra, rb)] = Fraction(1 if a == b else 0)
    e2 = rmap.anchor_rows[1]
    for u in rmap.var_rows:
        expected[_key(e2, u)] = Fraction(1)
        for t in range(3, r + 1):
            expected[_key(rmap.anchor_rows[t - 1], u)] = Fraction(0)
    actual = {(e.i, e.j): e.value for e in inst.specified}
    if actual != expected:
        raise ValueError("specified entries do not match the construction")

    e1 = rmap.anchor_rows[0]
    var_of_row = {row: i + 1 for i, row in enumerate(rmap.var_rows)}
    constraints = []
    for c in inst.affine:
        constraints.append(_match_affine(c, e1, var_of_row))
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return AmiInstance(rmap.source_n, tuple(constraints))


def _key(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i <= j else (j, i)


def _match_affine(c: AffineConstraint, e1: int, var_of_row: dict) -> AmiConstraint:
    def as_var_entry(i, j):
        # returns the variable index for a W[e1, u] term, else None
        if i == e1 and j in var_of_row:
            return var_of_row[j]
        if j == e1 and i in var_of_row:
            return var_of_row[i]
        return None

    terms = c.terms
    if c.rhs == 1 and len(terms) == 1:
        a, i, j = terms[0]
        v = as_var_entry(i, j)
        if a == 1 and v is not None:
            return AmiConstraint(ConstraintKind.CONST, v)
    if c.rhs == 0 and len(terms) == 3:
        pos, neg = [], []
        for a, i, j in terms:
            v = as_var_entry(i, j)
            if v is None:
                break
            if a == 1:
                pos.append(v)
            elif a == -1:
                neg.append(v)
        else:
            if len(pos) == 2 and len(neg) == 1:
                return AmiConstraint(ConstraintKind.ADD, neg[0], (pos[0], pos[1]))
    if c.rhs == 1 and len(terms) == 2:
        prod = target = None
        for a, i, j in terms:
            v = as_var_entry(i, j)
            if a == -1 and v is not None:
                target = v
            elif a == 1 and i in var_of_row and j in var_of_row:
                prod = (var_of_row[i], var_of_row[j])
        if prod is not None and target is not None:
            return AmiConstraint(ConstraintKind.MUL, target, prod)
    raise ValueError(f"affine constraint does not match the construction: {c}")


# ---------------------------------------------------------------------------
# map file format

def serialize_map(rmap: ReductionMap) -> str:
    lines = [f"map rank {rmap.rank} n {rmap.source_n}"]
    for a, row in enumerate(rmap.anchor_rows, start=1):
        lines.append(f"anchor {a} {row}")
    for i, row in enumerate(rmap.var_rows, start=1):
        lines.append(f"var {i} {row}")
    return "\n".join(lines) + "\n"


def parse_map(text: str, source_m: int = 0) -> ReductionMap:
    lines = list(content_lines(text))
    if not lines:
        raise ParseError("missing 'map rank <r> n <n>' header")
    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "map" or parts[1] != "rank" or parts[3] != "n":
        raise ParseError("expected 'map rank <r> n <n>' header", lineno)
    try:
        rank, n = int(parts[2]), int(parts[4])
    except ValueError:
        raise ParseError("bad rank/variable count", lineno) from None
    anchors = {}
    var_rows = {}
    for lineno, line in lines[1:]:
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("anchor", "var"):
            raise ParseError("expected 'anchor <a> <row>' or 'var <i> <row>'", lineno)
        try:
            idx, row = int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError("bad map indices", lineno) from None
        (anchors if parts[0] == "anchor" else var_rows)[idx] = row
    if sorted(anchors) != list(range(1, rank + 1)):
        raise ParseError("anchor lines must cover 1..r")
    if sorted(var_rows) != list(range(1, n + 1)):
        raise ParseError("var lines must cover 1..n")
    try:
        return ReductionMap(
            rank,
            tuple(anchors[a] for a in range(1, rank + 1)),
            tuple(var_rows[i] for i in range(1, n + 1)),
            n,
            source_m,
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
