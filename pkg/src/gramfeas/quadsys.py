"""Quadratic polynomial systems over nonnegative variables.

A QuadraticSystem is a conjunction of equations, each a sum of terms
``c * x_a * x_b``, ``c * x_a`` or a constant ``c`` equated to a rational
right-hand side, with every variable restricted to ``x >= 0``.  Both the
arithmetic-instance oracle and the Gram-instance interval engine compile
to this shape, so the branch-and-prune search below serves both.

The search is certified on the refutation side: interval evaluation uses
outward rounding (one ulp per operation via math.nextafter), so a box is
discarded only when it provably contains no solution.  Feasibility claims
are made only for concrete points whose plain floating-point residuals
pass the caller's tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

_INF = math.inf


@dataclass(frozen=True)
class Equation:
    """Sum of degree <= 2 terms equated to a rational constant.

    Each term is (coefficient, vars) where vars is a tuple of 0, 1 or 2
    variable indices (a repeated index means a square).
    """

    terms: tuple[tuple[Fraction, tuple[int, ...]], ...]
    rhs: Fraction


@dataclass
class QuadraticSystem:
    num_vars: int
    equations: list[Equation]
    var_names: Optional[list[str]] = None

    def name(self, v: int) -> str:
        if self.var_names is not None:
            return self.var_names[v]
        return f"x{v + 1}"


class SearchStatus(enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"
    UNKNOWN = "UNKNOWN"


@dataclass
class SearchOutcome:
    status: SearchStatus
    point: Optional[list[float]] = None
    box: Optional[list[tuple[float, float]]] = None
    stats: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# outward-rounded interval primitives (intervals are (lo, hi) float pairs)

def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def iv_add(a, b):
    return (_down(a[0] + b[0]), _up(a[1] + b[1]))


def iv_sub(a, b):
    return (_down(a[0] - b[1]), _up(a[1] - b[0]))


def iv_mul(a, b):
    p0 = a[0] * b[0]
    p1 = a[0] * b[1]
    p2 = a[1] * b[0]
    p3 = a[1] * b[1]
    return (_down(min(p0, p1, p2, p3)), _up(max(p0, p1, p2, p3)))


def iv_div_pos(a, b):
    """a / b where b is strictly positive."""
    q0 = a[0] / b[1]
    q1 = a[0] / b[0]
    q2 = a[1] / b[1]
    q3 = a[1] / b[0]
    return (_down(min(q0, q1, q2, q3)), _up(max(q0, q1, q2, q3)))


def iv_sqrt_nonneg(a):
    """Nonnegative square root hull of a ∩ [0, inf); None if a < 0."""
    if a[1] < 0.0:
        return None
    lo = max(a[0], 0.0)
    return (_down(math.sqrt(lo)), _up(math.sqrt(a[1])))


def iv_from_fraction(q: Fraction):
    f = float(q)
    if Fraction(f) == q:
        return (f, f)
    return (_down(f), _up(f))


# ---------------------------------------------------------------------------
# compiled form

class _CompiledEq:
    __slots__ = ("terms", "rhs", "rhs_f")

    def __init__(self, eq: Equation):
        # terms: (coef_interval, coef_float, vars)
        self.terms = tuple(
            (iv_from_fraction(c), float(c), vs) for c, vs in eq.terms
        )
        self.rhs = iv_from_fraction(eq.rhs)
        self.rhs_f = float(eq.rhs)


def _compile(system: QuadraticSystem) -> list[_CompiledEq]:
    return [_CompiledEq(eq) for eq in system.equations]


def _term_interval(coef_iv, vs, box):
    r = coef_iv
    for v in vs:
        r = iv_mul(r, box[v])
    return r


def _contract(eqs, box, ordering, max_rounds=40):
    """Narrow box in place by constraint propagation.

    Returns False when the box is certified empty of solutions.
    ``ordering`` is a sequence of (v, w) pairs enforcing x_v >= x_w
    (used only as a symmetry cut supplied by the caller).
    """
    for _ in range(max_rounds):
        changed = False
        for v, w in ordering:  # enforces x_v >= x_w
            vlo, vhi = box[v]
            wlo, whi = box[w]
            if vhi < wlo:
                return False
            if whi > vhi:
                box[w] = (wlo, vhi)
                changed = True
            if vlo < wlo:
                box[v] = (wlo, vhi)
                changed = True
        for ceq in eqs:
            terms = ceq.terms
            ivs = [_term_interval(c_iv, vs, box) for c_iv, _cf, vs in terms]
            total = (0.0, 0.0)
            for iv in ivs:
                total = iv_add(total, iv)
            rhs = ceq.rhs
            if total[0] > rhs[1] or total[1] < rhs[0]:
                return False
            for t, (c_iv, _cf, vs) in enumerate(terms):
                if not vs:
                    continue
                # residual available for this term
                resid = rhs
                for s, iv in enumerate(ivs):
                    if s != t:
                        resid = iv_sub(resid, iv)
                if c_iv[0] == 0.0 and c_iv[1] == 0.0:
                    continue
                if c_iv[0] > 0.0:
                    target = iv_div_pos(resid, c_iv)
                elif c_iv[1] < 0.0:
                    target = iv_div_pos(
                        (-resid[1], -resid[0]), (-c_iv[1], -c_iv[0])
                    )
                else:
                    continue
                # target is the hull for prod(vs)
                if len(vs) == 1:
                    narrowed = _intersect_nonneg(box[vs[0]], target)
                    if narrowed is None:
                        return False
                    if narrowed != box[vs[0]]:
                        box[vs[0]] = narrowed
                        changed = True
                elif vs[0] == vs[1]:
                    root = iv_sqrt_nonneg(target)
                    if root is None:
                        return False
                    narrowed = _intersect_nonneg(box[vs[0]], root)
                    if narrowed is None:
                        return False
                    if narrowed != box[vs[0]]:
                        box[vs[0]] = narrowed
                        changed = True
                else:
                    for v, other in ((vs[0], vs[1]), (vs[1], vs[0])):
                        ob = box[other]
                        if ob[0] <= 0.0:
                            continue
                        quot = iv_div_pos(target, ob)
                        narrowed = _intersect_nonneg(box[v], quot)
                        if narrowed is None:
                            return False
                        if narrowed != box[v]:
                            box[v] = narrowed
                            changed = True
        if not changed:
            break
    return True


def _intersect_nonneg(a, b):
    lo = max(a[0], b[0], 0.0)
    hi = min(a[1], b[1])
    if lo > hi:
        return None
    return (lo, hi)


# ---------------------------------------------------------------------------
# point evaluation and local polishing

def residuals_at(system: QuadraticSystem, point: Sequence[float]) -> list[float]:
    out = []
    for eq in system.equations:
        acc = 0.0
        for c, vs in eq.terms:
            val = float(c)
            for v in vs:
                val *= point[v]
            acc += val
        out.append(acc - float(eq.rhs))
    return out


def max_residual(system: QuadraticSystem, point: Sequence[float]) -> float:
    return max((abs(r) for r in residuals_at(system, point)), default=0.0)


def _polish(eqs_raw: QuadraticSystem, x0, lo, hi, tol, iters):
    """Clipped Gauss-Newton refinement from x0 inside [lo, hi].

    Returns a point with max residual <= tol, or None.
    """
    n = eqs_raw.num_vars
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    eqs = eqs_raw.equations
    m = len(eqs)
    if m == 0:
        return list(x)

    def resid(vec):
        r = np.empty(m)
        for q, eq in enumerate(eqs):
            acc = 0.0
            for c, vs in eq.terms:
                val = float(c)
                for v in vs:
                    val *= vec[v]
                acc += val
            r[q] = acc - float(eq.rhs)
        return r

    r = resid(x)
    best = np.max(np.abs(r))
    if best <= tol:
        return list(x)
    for _ in range(iters):
        jac = np.zeros((m, n))
        for q, eq in enumerate(eqs):
            for c, vs in eq.terms:
                cf = float(c)
                if len(vs) == 1:
                    jac[q, vs[0]] += cf
                elif len(vs) == 2:
                    a, b = vs
                    if a == b:
                        jac[q, a] += 2.0 * cf * x[a]
                    else:
                        jac[q, a] += cf * x[b]
                        jac[q, b] += cf * x[a]
        try:
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        except np.linalg.LinAlgError:
            return None
        norm_r = float(np.linalg.norm(r))
        accepted = False
        scale = 1.0
        for _bt in range(12):
            cand = np.clip(x + scale * step, lo, hi)
            rc = resid(cand)
            if float(np.linalg.norm(rc)) < norm_r:
                x, r = cand, rc
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            return None
        worst = float(np.max(np.abs(r)))
        if worst <= tol:
            return list(x)
    return None


# ---------------------------------------------------------------------------
# branch and prune

_MIN_SPLIT_WIDTH = 1e-11


def branch_and_prune(
    system: QuadraticSystem,
    bound: float,
    *,
    tol: float = 1e-9,
    max_depth: int = 200,
    max_nodes: int = 200_000,
    ordering: Sequence[tuple[int, int]] = (),
    priority_vars: Optional[Sequence[int]] = None,
    polish_every: int = 8,
) -> SearchOutcome:
    """Search [0, bound]^n for a solution of the system.

    INFEASIBLE is returned only when every sub-box has been refuted by
    interval arithmetic; FEASIBLE only with a concrete verified point.
    ``priority_vars`` are bisected first while wider than a threshold,
    which lets callers steer branching toward structurally rigid
    coordinates.  The search is deterministic.
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if max_depth < 0 or max_nodes < 1:
        raise ValueError("invalid search budget")
    n = system.num_vars
    eqs = _compile(system)
    root = [(0.0, float(bound))] * n
    stack: list[tuple[list, int]] = [(root, 0)]
    nodes = 0
    exhausted = False
    priority = list(priority_vars) if priority_vars else []

    while stack:
        box, depth = stack.pop()
        nodes += 1
        if nodes > max_nodes:
            return SearchOutcome(
                SearchStatus.UNKNOWN, stats={"nodes": nodes - 1, "budget": "nodes"}
            )
        box = list(box)
        if not _contract(eqs, box, ordering):
            continue
        mid = [(b[0] + b[1]) * 0.5 for b in box]
        if nodes == 1 or nodes % polish_every == 0:
            hi_arr = np.array([b[1] for b in box])
            lo_box = np.array([b[0] for b in box])
            iters = 60 if nodes == 1 else 20
            point = _polish(system, mid, lo_box, hi_arr, tol, iters)
            if point is not None:
                return SearchOutcome(
                    SearchStatus.FEASIBLE,
                    point=point,
                    box=[(p, p) for p in point],
                    stats={"nodes": nodes},
                )
        elif max_residual(system, mid) <= tol:
            return SearchOutcome(
                SearchStatus.FEASIBLE,
                point=mid,
                box=[(p, p) for p in mid],
                stats={"nodes": nodes},
            )
        if depth >= max_depth:
            exhausted = True
            continue
        v = _pick_branch_var(box, priority)
        if v is None:
            exhausted = True
            continue
        blo, bhi = box[v]
        split = 0.5 * (blo + bhi)
        upper = list(box)
        upper[v] = (split, bhi)
        lower = list(box)
        lower[v] = (blo, split)
        stack.append((upper, depth + 1))
        stack.append((lower, depth + 1))

    if exhausted:
        return SearchOutcome(SearchStatus.UNKNOWN, stats={"nodes": nodes, "budget": "depth"})
    return SearchOutcome(
        SearchStatus.INFEASIBLE,
        box=[(0.0, float(bound))] * n,
        stats={"nodes": nodes},
    )


def _pick_branch_var(box, priority):
    # structurally rigid coordinates first, then the globally widest interval;
    # ties break toward the lowest index
    if priority:
        best, width = None, _MIN_SPLIT_WIDTH
        for v in priority:
            w = box[v][1] - box[v][0]
            if w > width:
                best, width = v, w
        if best is not None:
            return best
    best, width = None, _MIN_SPLIT_WIDTH
    for v, (blo, bhi) in enumerate(box):
        w = bhi - blo
        if w > width:
            best, width = v, w
    return best
