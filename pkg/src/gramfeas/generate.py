"""Deterministic test-corpus generators for arithmetic instances."""

from __future__ import annotations

import random
import warnings
from fractions import Fraction
from typing import Optional

from .ami import AmiConstraint, AmiInstance, Assignment, ConstraintKind

# small rationals with numerators and denominators bounded by 16; the pool
# is biased toward values whose sums and products stay in the pool so that
# planted instances carry add/mul constraints, not just constants
_VALUE_POOL = [
    Fraction(0), Fraction(1), Fraction(1), Fraction(2), Fraction(3),
    Fraction(4), Fraction(6), Fraction(8), Fraction(12),
    Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(3, 2),
    Fraction(2, 3), Fraction(5, 2), Fraction(3, 4),
]

_MAX_NUM = 16


def _in_pool_range(v: Fraction) -> bool:
    return 0 <= v and v.numerator <= _MAX_NUM and v.denominator <= _MAX_NUM


def planted_instance(seed: int, n: int, m: int) -> tuple[AmiInstance, Assignment]:
    """Instance with a known satisfying assignment (x_1 is always 1)."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    rng = random.Random(seed)
    values = [Fraction(1)]
    guaranteed: list[AmiConstraint] = []
    for i in range(2, n + 1):
        derived = None
        if i >= 3 and rng.random() < 0.5:
            j = rng.randint(1, i - 1)
            k = rng.randint(1, i - 1)
            kind = rng.choice((ConstraintKind.ADD, ConstraintKind.MUL))
            v = (
                values[j - 1] + values[k - 1]
                if kind is ConstraintKind.ADD
                else values[j - 1] * values[k - 1]
            )
            if _in_pool_range(v):
                derived = (kind, j, k, v)
        if derived is not None:
            kind, j, k, v = derived
            values.append(v)
            guaranteed.append(AmiConstraint(kind, i, (j, k)))
        else:
            values.append(rng.choice(_VALUE_POOL))

    by_value: dict[Fraction, list[int]] = {}
    for i, v in enumerate(values, start=1):
        by_value.setdefault(v, []).append(i)
    ones = by_value[Fraction(1)]

    constraints = []
    for _ in range(m):
        constraints.append(_plant_one(rng, values, by_value, ones, guaranteed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        inst = AmiInstance(n, tuple(constraints))
    return inst, Assignment(tuple(values))


def _plant_one(rng, values, by_value, ones, guaranteed) -> AmiConstraint:
    if guaranteed and rng.random() < 0.5:
        return guaranteed.pop(rng.randrange(len(guaranteed)))
    n = len(values)
    for _ in range(12):
        kind = rng.choice((ConstraintKind.ADD, ConstraintKind.MUL, ConstraintKind.CONST))
        if kind is ConstraintKind.CONST:
            return AmiConstraint(ConstraintKind.CONST, rng.choice(ones))
        j = rng.randint(1, n)
        k = rng.randint(1, n)
        v = (
            values[j - 1] + values[k - 1]
            if kind is ConstraintKind.ADD
            else values[j - 1] * values[k - 1]
        )
        targets = by_value.get(v)
        if targets:
            return AmiConstraint(kind, rng.choice(targets), (j, k))
    return AmiConstraint(ConstraintKind.CONST, rng.choice(ones))


def contradiction_instance(seed: int, n: int, m: int) -> AmiInstance:
    """Provably infeasible instance: a forced chain pins x_2 = 2, then a
    const constraint demands x_2 = 1.

    The first two of the m planted constraints are replaced by the pinning
    chain, and the violated const is appended (m + 1 constraints total).
    """
    if n < 2 or m < 2:
        raise ValueError("contradiction mode needs n >= 2 and m >= 2")
    rng = random.Random(seed)
    base, assignment = planted_instance(rng.randrange(2**31), n, m - 2)
    values = list(assignment.values)
    values[0] = Fraction(1)
    values[1] = Fraction(2)
    # drop planted constraints touching x_1/x_2, whose values were overridden
    kept = [
        c
        for c in base.constraints
        if not ({1, 2} & set(c.indices()))
    ]
    constraints = [
        AmiConstraint(ConstraintKind.CONST, 1),
        AmiConstraint(ConstraintKind.ADD, 2, (1, 1)),
        *kept,
        AmiConstraint(ConstraintKind.CONST, 2),
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return AmiInstance(n, tuple(constraints))


def random_instance(seed: int, n: int, m: int) -> AmiInstance:
    """Uniformly random constraints; feasibility is not controlled."""
    if n < 1 or m < 0:
        raise ValueError("need n >= 1 and m >= 0")
    rng = random.Random(seed)
    constraints = []
    for _ in range(m):
        kind = rng.choice(
            (ConstraintKind.CONST, ConstraintKind.ADD, ConstraintKind.MUL)
        )
        if kind is ConstraintKind.CONST:
            constraints.append(AmiConstraint(kind, rng.randint(1, n)))
        else:
            constraints.append(
                AmiConstraint(
                    kind, rng.randint(1, n), (rng.randint(1, n), rng.randint(1, n))
                )
            )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return AmiInstance(n, tuple(constraints))


def generate(
    seed: int, n: int, m: int, mode: str
) -> tuple[AmiInstance, Optional[Assignment]]:
    if mode == "planted":
        inst, assignment = planted_instance(seed, n, m)
        return inst, assignment
    if mode == "contradiction":
        return contradiction_instance(seed, n, m), None
    if mode == "random":
        return random_instance(seed, n, m), None
    raise ValueError(f"unknown mode {mode!r}")
