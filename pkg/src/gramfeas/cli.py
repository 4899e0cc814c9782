"""Command-line front end.

Exit codes: 0 = feasible / success, 20 = infeasible within the search box,
30 = unknown, 1 = usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import generate as gen
from .ami import (
    ami_interval_oracle,
    evaluate_ami,
    OracleStatus,
    parse_ami,
    parse_assignment,
    serialize_ami,
    serialize_assignment,
)
from .fileio import ParseError, atomic_write, format_number
from .gram import (
    check_realization,
    export_polynomial_system,
    parse_gram,
    parse_realization,
    serialize_gram,
    serialize_realization,
)
from .reduction import (
    extract_assignment,
    parse_map,
    reduce_rank_r,
    serialize_map,
    witness_from_assignment,
)
from .solver import (
    SolveStatus,
    SolverConfig,
    solve_auto,
    solve_interval,
    solve_numeric,
    solve_structural,
)

EXIT_FEASIBLE = 0
EXIT_INFEASIBLE = 20
EXIT_UNKNOWN = 30
EXIT_ERROR = 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gramfeas",
        description="Arithmetic-to-Gram feasibility reduction toolkit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("reduce", help="compile an arithmetic instance to a Gram instance")
    p.add_argument("ami_path")
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--out", required=True, help="output Gram file")
    p.add_argument("--map-out", help="output map file (default: <out>.map)")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="decide feasibility of a Gram instance")
    p.add_argument("gram_path")
    p.add_argument("--map", dest="map_path")
    p.add_argument(
        "--engine",
        choices=("structural", "numeric", "interval", "auto"),
        default="auto",
    )
    _solver_flags(p)
    p.add_argument("--out", help="witness realization file (written when feasible)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a realization against a Gram instance")
    p.add_argument("gram_path")
    p.add_argument("realization_path")
    p.add_argument("--tol", default="0")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("extract", help="read the encoded assignment off a realization")
    p.add_argument("map_path")
    p.add_argument("realization_path")
    p.add_argument("--tol", default="0")
    p.add_argument("--out", help="assignment file (default: stdout)")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("witness", help="build the realization for an assignment")
    p.add_argument("map_path")
    p.add_argument("assignment_path")
    p.add_argument("--out", help="realization file (default: stdout)")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("export-poly", help="emit a Gram instance as a polynomial system")
    p.add_argument("gram_path")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export_poly)

    p = sub.add_parser("oracle", help="interval search on an arithmetic instance")
    p.add_argument("ami_path")
    p.add_argument("--box", type=float, default=1e3)
    p.add_argument("--depth", type=int, default=120)
    p.add_argument("--nodes", type=int, default=100_000)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate a test instance")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--mode", choices=("planted", "contradiction", "random"), default="planted")
    p.add_argument("--out", required=True)
    p.add_argument(
        "--assignment-out",
        help="sidecar assignment file in planted mode (default: <out>.assignment)",
    )
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser(
        "roundtrip",
        help="gen(planted) -> reduce -> solve(auto) -> extract -> evaluate, in memory",
    )
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rank", type=int, default=2)
    _solver_flags(p)  # --seed drives both generation and the solver
    p.set_defaults(func=cmd_roundtrip)

    return parser


def _solver_flags(p):
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--box", type=float, default=1e3)
    p.add_argument("--depth", type=int, default=160)
    p.add_argument("--nodes", type=int, default=60_000)
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float)


def _config(args) -> SolverConfig:
    return SolverConfig(
        tol=args.tol,
        box_bound=args.box,
        max_depth=args.depth,
        max_nodes=args.nodes,
        restarts=args.restarts,
        seed=args.seed,
        tau=args.tau,
    )


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _parse_tol(text: str):
    # "0" stays the exact rational zero; anything else becomes a float
    return Fraction(0) if text.strip() == "0" else float(text)


def cmd_reduce(args) -> int:
    if args.rank < 2:
        print("error: rank must be at least 2", file=sys.stderr)
        return EXIT_ERROR
    inst = parse_ami(_read(args.ami_path))
    gram, rmap = reduce_rank_r(inst, args.rank)
    map_out = args.map_out or args.out + ".map"
    atomic_write(args.out, serialize_gram(gram))
    atomic_write(map_out, serialize_map(rmap))
    print(
        f"rows {gram.num_rows}, entries {len(gram.specified)}, "
        f"affine {len(gram.affine)}"
    )
    return EXIT_FEASIBLE


def cmd_solve(args) -> int:
    inst = parse_gram(_read(args.gram_path))
    rmap = None
    if args.map_path:
        rmap = parse_map(_read(args.map_path), source_m=len(inst.affine))
    cfg = _config(args)
    if args.engine == "structural":
        if rmap is None:
            print("error: structural engine requires --map", file=sys.stderr)
            return EXIT_ERROR
        verdict = solve_structural(inst, rmap)
    elif args.engine == "numeric":
        verdict = solve_numeric(inst, cfg)
    elif args.engine == "interval":
        verdict = solve_interval(inst, cfg, rmap)
    else:
        verdict = solve_auto(inst, cfg, rmap)

    print(f"verdict {verdict.status.value}")
    if verdict.residual is not None:
        print(f"residual {format_number(verdict.residual)}")
    if verdict.certificate_box is not None:
        print(f"box {verdict.certificate_box}")
    for key in sorted(verdict.stats):
        print(f"stat {key} {verdict.stats[key]}")
    if verdict.status is SolveStatus.FEASIBLE and args.out:
        atomic_write(args.out, serialize_realization(verdict.witness))
        print(f"witness {args.out}")
    return {
        SolveStatus.FEASIBLE: EXIT_FEASIBLE,
        SolveStatus.INFEASIBLE_IN_BOX: EXIT_INFEASIBLE,
        SolveStatus.UNKNOWN: EXIT_UNKNOWN,
    }[verdict.status]


def cmd_verify(args) -> int:
    inst = parse_gram(_read(args.gram_path))
    H = parse_realization(_read(args.realization_path))
    report = check_realization(inst, H, _parse_tol(args.tol))
    for entry, resid in zip(inst.specified, report.entry_residuals):
        print(f"entry {entry.i} {entry.j} residual {format_number(resid)}")
    for idx, resid in enumerate(report.affine_residuals, start=1):
        print(f"affine {idx} residual {format_number(resid)}")
    print(f"negativity {format_number(report.negativity)}")
    print(f"max_violation {format_number(report.max_violation)}")
    print(f"pass {str(report.passed).lower()}")
    return EXIT_FEASIBLE if report.passed else EXIT_ERROR


def cmd_extract(args) -> int:
    rmap = parse_map(_read(args.map_path))
    H = parse_realization(_read(args.realization_path))
    assignment = extract_assignment(rmap, H, _parse_tol(args.tol))
    text = serialize_assignment(assignment)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_FEASIBLE


def cmd_witness(args) -> int:
    rmap = parse_map(_read(args.map_path))
    assignment = parse_assignment(_read(args.assignment_path))
    H = witness_from_assignment(rmap, assignment)
    text = serialize_realization(H)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_FEASIBLE


def cmd_export_poly(args) -> int:
    inst = parse_gram(_read(args.gram_path))
    text = export_polynomial_system(inst)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_FEASIBLE


def cmd_oracle(args) -> int:
    inst = parse_ami(_read(args.ami_path))
    result = ami_interval_oracle(
        inst, args.box, args.depth, max_nodes=args.nodes
    )
    print(f"verdict {result.status.value}")
    if result.witness is not None:
        print("witness " + " ".join(format_number(v) for v in result.witness.values))
    for key in sorted(result.stats):
        print(f"stat {key} {result.stats[key]}")
    return {
        OracleStatus.FEASIBLE: EXIT_FEASIBLE,
        OracleStatus.INFEASIBLE: EXIT_INFEASIBLE,
        OracleStatus.UNKNOWN: EXIT_UNKNOWN,
    }[result.status]


def cmd_gen(args) -> int:
    inst, assignment = gen.generate(args.seed, args.n, args.m, args.mode)
    atomic_write(args.out, serialize_ami(inst))
    if assignment is not None:
        sidecar = args.assignment_out or args.out + ".assignment"
        atomic_write(sidecar, serialize_assignment(assignment))
        print(f"assignment {sidecar}")
    print(f"instance {args.out}")
    return EXIT_FEASIBLE


def cmd_roundtrip(args) -> int:
    inst, planted = gen.planted_instance(args.seed, args.n, args.m)
    gram, rmap = reduce_rank_r(inst, args.rank)
    cfg = _config(args)
    verdict = solve_auto(gram, cfg, rmap)
    if verdict.status is not SolveStatus.FEASIBLE:
        print(f"roundtrip failed: verdict {verdict.status.value}")
        return EXIT_UNKNOWN
    exact = verdict.witness.is_rational()
    assignment = extract_assignment(
        rmap, verdict.witness, Fraction(0) if exact else 1e-6
    )
    ok = evaluate_ami(inst, assignment, 0 if exact else 1e-6)
    print(f"planted {' '.join(format_number(v) for v in planted.values)}")
    print(f"extracted {' '.join(format_number(v) for v in assignment.values)}")
    print(f"evaluate {'pass' if ok else 'fail'}")
    return EXIT_FEASIBLE if ok else EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
