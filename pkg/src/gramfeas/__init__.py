"""Arithmetic-to-Gram feasibility reduction toolkit.

Models arithmetic instances over nonnegative reals (constraints x = 1,
x = y + z, x = y * z) and constrained nonnegative Gram feasibility
instances, compiles the former into the latter at any fixed rank >= 2,
constructs and extracts witnesses, and decides desk-scale instances with
structural, numeric, and certified interval engines.
"""

from .ami import (
    AmiConstraint,
    AmiInstance,
    Assignment,
    ConstraintKind,
    OracleResult,
    OracleStatus,
    ami_interval_oracle,
    compile_polysystem_to_ami,
    evaluate_ami,
    parse_ami,
    parse_assignment,
    serialize_ami,
    serialize_assignment,
)
from .gram import (
    AffineConstraint,
    GramInstance,
    Realization,
    SpecifiedEntry,
    VerificationReport,
    check_realization,
    export_polynomial_system,
    parse_gram,
    parse_polynomial_system,
    parse_realization,
    serialize_gram,
    serialize_realization,
)
from .reduction import (
    ReductionMap,
    extract_assignment,
    lift_instance,
    lift_realization,
    parse_map,
    recover_ami,
    reduce_rank2,
    reduce_rank_r,
    serialize_map,
    witness_from_assignment,
)
from .solver import (
    SolveStatus,
    SolveVerdict,
    SolverConfig,
    solve_auto,
    solve_interval,
    solve_numeric,
    solve_structural,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
