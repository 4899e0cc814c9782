"""Feasibility engines for constrained Gram instances.

Three engines with honest verdict semantics:

* structural — exact fixpoint propagation over the source arithmetic
  constraints of a reduced instance (needs the reduction map);
* numeric — seeded multistart nonlinear least squares; reports FEASIBLE
  only with a re-verified witness and never claims infeasibility;
* interval — certified branch-and-prune; the only engine allowed to
  report infeasibility, and only within its search box.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .ami import Assignment, ConstraintKind, constraint_residual
from .gram import GramInstance, Realization, check_realization, gram_to_quadratic_system
from .quadsys import SearchStatus, branch_and_prune
from .reduction import ReductionMap, recover_ami, witness_from_assignment


class SolveStatus(enum.Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE_IN_BOX = "INFEASIBLE_IN_BOX"
    UNKNOWN = "UNKNOWN"


@dataclass
class SolveVerdict:
    status: SolveStatus
    witness: Optional[Realization] = None
    residual: object = None
    certificate_box: Optional[str] = None
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    box_bound: float = 1e3
    max_depth: int = 160
    max_nodes: int = 60_000
    restarts: int = 64
    seed: int = 0
    tau: Optional[float] = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.box_bound <= 0:
            raise ValueError("box bound must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be nonnegative")


# ---------------------------------------------------------------------------
# structural engine

def solve_structural(inst: GramInstance, rmap: ReductionMap) -> SolveVerdict:
    """Exact forward propagation over the source constraints.

    Pins values implied by const constraints and by add/mul constraints
    whose operands are already pinned.  A pin conflict or an exactly
    violated constraint certifies infeasibility; a fully pinned consistent
    system yields an exact witness; anything else is UNKNOWN.
    """
    started = time.perf_counter()
    src = recover_ami(inst, rmap)  # raises on map/instance mismatch
    pinned: dict[int, Fraction] = {}

    def pin(i: int, value: Fraction) -> bool:
        if i in pinned:
            if pinned[i] != value:
                raise _Contradiction(
                    f"x_{i} pinned to both {pinned[i]} and {value}"
                )
            return False
        pinned[i] = value
        return True

    try:
        changed = True
        while changed:
            changed = False
            for c in src.constraints:
                if c.kind is ConstraintKind.CONST:
                    changed |= pin(c.target, Fraction(1))
                else:
                    j, k = c.operands
                    if j in pinned and k in pinned:
                        if c.kind is ConstraintKind.ADD:
                            changed |= pin(c.target, pinned[j] + pinned[k])
                        else:
                            changed |= pin(c.target, pinned[j] * pinned[k])
    except _Contradiction as exc:
        return SolveVerdict(
            SolveStatus.INFEASIBLE_IN_BOX,
            certificate_box=f"point derivation: {exc}",
            stats=_stats(started, engine="structural"),
        )

    if len(pinned) < src.n:
        return SolveVerdict(
            SolveStatus.UNKNOWN, stats=_stats(started, engine="structural")
        )
    values = tuple(pinned[i] for i in range(1, src.n + 1))
    if any(v < 0 for v in values):
        return SolveVerdict(
            SolveStatus.INFEASIBLE_IN_BOX,
            certificate_box="point derivation: negative pinned value",
            stats=_stats(started, engine="structural"),
        )
    assignment = Assignment(values)
    for c in src.constraints:
        if constraint_residual(c, values) != 0:
            return SolveVerdict(
                SolveStatus.INFEASIBLE_IN_BOX,
                certificate_box=(
                    "point derivation: pinned values violate "
                    f"{c.kind.value} on x_{c.target}"
                ),
                stats=_stats(started, engine="structural"),
            )
    witness = witness_from_assignment(rmap, assignment)
    report = check_realization(inst, witness, 0)
    assert report.passed
    return SolveVerdict(
        SolveStatus.FEASIBLE,
        witness=witness,
        residual=report.max_violation,
        stats=_stats(started, engine="structural"),
    )


class _Contradiction(Exception):
    pass


# ---------------------------------------------------------------------------
# numeric engine

def solve_numeric(inst: GramInstance, cfg: SolverConfig = SolverConfig()) -> SolveVerdict:
    """Seeded multistart least squares over H = S*S (entrywise square).

    The squared parametrization keeps iterates unconstrained while the
    candidate realization stays nonnegative.  FEASIBLE requires the
    verified max violation to pass cfg.tol, or, with cfg.tau set, the
    squared residual sum over specified entries and affine constraints to
    stay within tau.  Never reports infeasibility.
    """
    started = time.perf_counter()
    system = gram_to_quadratic_system(inst)
    n_vars = system.num_vars
    eqs = system.equations
    coefs = [np.array([float(c) for c, _ in eq.terms]) for eq in eqs]
    rhss = np.array([float(eq.rhs) for eq in eqs])

    def residuals_h(h):
        out = np.empty(len(eqs))
        for q, eq in enumerate(eqs):
            acc = 0.0
            for (c, vs), cf in zip(eq.terms, coefs[q]):
                val = cf
                for v in vs:
                    val *= h[v]
                acc += val
            out[q] = acc - rhss[q]
        return out

    def fun(s):
        return residuals_h(s * s)

    def jac(s):
        h = s * s
        jh = np.zeros((len(eqs), n_vars))
        for q, eq in enumerate(eqs):
            for c, vs in eq.terms:
                cf = float(c)
                if len(vs) == 1:
                    jh[q, vs[0]] += cf
                elif len(vs) == 2:
                    a, b = vs
                    if a == b:
                        jh[q, a] += 2.0 * cf * h[a]
                    else:
                        jh[q, a] += cf * h[b]
                        jh[q, b] += cf * h[a]
        return jh * (2.0 * s)

    rng = np.random.default_rng(cfg.seed)
    best_violation = None
    for restart in range(cfg.restarts):
        s0 = rng.uniform(0.0, 1.5, size=n_vars)
        if not eqs:
            h = s0 * s0
        else:
            result = least_squares(
                fun, s0, jac=jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15
            )
            h = result.x * result.x
        H = _realization_from_flat(inst, h)
        report = check_realization(inst, H, cfg.tol)
        if cfg.tau is not None:
            sq = float(np.sum(residuals_h(h) ** 2))
            if sq <= cfg.tau and report.negativity <= cfg.tol:
                return SolveVerdict(
                    SolveStatus.FEASIBLE,
                    witness=H,
                    residual=report.max_violation,
                    stats=_stats(started, engine="numeric", restarts=restart + 1,
                                 squared_residual=sq),
                )
        elif report.passed:
            return SolveVerdict(
                SolveStatus.FEASIBLE,
                witness=H,
                residual=report.max_violation,
                stats=_stats(started, engine="numeric", restarts=restart + 1),
            )
        violation = float(report.max_violation)
        if best_violation is None or violation < best_violation:
            best_violation = violation
    return SolveVerdict(
        SolveStatus.UNKNOWN,
        residual=best_violation,
        stats=_stats(started, engine="numeric", restarts=cfg.restarts),
    )


def _realization_from_flat(inst: GramInstance, flat) -> Realization:
    r = inst.rank
    rows = tuple(
        tuple(float(flat[(i - 1) * r + k]) for k in range(r))
        for i in range(1, inst.num_rows + 1)
    )
    return Realization(rows)


# ---------------------------------------------------------------------------
# interval engine

def solve_interval(
    inst: GramInstance,
    cfg: SolverConfig = SolverConfig(),
    rmap: Optional[ReductionMap] = None,
) -> SolveVerdict:
    """Certified branch-and-prune over H in [0, B]^(N x r).

    When a reduction map is supplied, the column-permutation symmetry is
    cut by sorting the coordinates of the first anchor row, and branching
    prefers anchor-row coordinates, whose rigidity drives propagation.
    """
    started = time.perf_counter()
    system = gram_to_quadratic_system(inst)
    r = inst.rank

    ordering = []
    priority = None
    if rmap is not None:
        if rmap.num_rows != inst.num_rows or rmap.rank != r:
            raise ValueError("map does not match instance shape")
        first = rmap.anchor_rows[0]
        base = (first - 1) * r
        ordering = [(base + k, base + k + 1) for k in range(r - 1)]
        priority = [
            (row - 1) * r + k for row in rmap.anchor_rows for k in range(r)
        ]

    outcome = branch_and_prune(
        system,
        cfg.box_bound,
        tol=cfg.tol,
        max_depth=cfg.max_depth,
        max_nodes=cfg.max_nodes,
        ordering=ordering,
        priority_vars=priority,
    )
    stats = _stats(started, engine="interval", **outcome.stats)
    if outcome.status is SearchStatus.FEASIBLE:
        H = _realization_from_flat(inst, outcome.point)
        report = check_realization(inst, H, cfg.tol)
        assert report.passed
        return SolveVerdict(
            SolveStatus.FEASIBLE, witness=H, residual=report.max_violation, stats=stats
        )
    if outcome.status is SearchStatus.INFEASIBLE:
        return SolveVerdict(
            SolveStatus.INFEASIBLE_IN_BOX,
            certificate_box=f"[0, {cfg.box_bound}]^{system.num_vars}",
            stats=stats,
        )
    return SolveVerdict(SolveStatus.UNKNOWN, stats=stats)


# ---------------------------------------------------------------------------

def solve_auto(
    inst: GramInstance,
    cfg: SolverConfig = SolverConfig(),
    rmap: Optional[ReductionMap] = None,
) -> SolveVerdict:
    """structural (when a map is available), then numeric, then interval."""
    if rmap is not None:
        verdict = solve_structural(inst, rmap)
        if verdict.status is not SolveStatus.UNKNOWN:
            return verdict
    verdict = solve_numeric(inst, cfg)
    if verdict.status is SolveStatus.FEASIBLE:
        return verdict
    return solve_interval(inst, cfg, rmap)


def _stats(started: float, **extra) -> dict:
    extra["wall_time"] = time.perf_counter() - started
    return extra
