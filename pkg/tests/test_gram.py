from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramfeas.fileio import ParseError
from gramfeas.gram import (
    AffineConstraint,
    GramInstance,
    Realization,
    SpecifiedEntry,
    check_realization,
    export_polynomial_system,
    gram_to_quadratic_system,
    parse_gram,
    parse_polynomial_system,
    parse_realization,
    serialize_gram,
    serialize_realization,
)
from gramfeas.quadsys import SearchStatus, branch_and_prune

ANCHORS_TEXT = "gram rank 2 rows 2\nentry 1 1 1\nentry 2 2 1\nentry 1 2 0\n"


class TestParse:
    def test_anchors_document(self, anchors_gram):
        assert anchors_gram.num_rows == 2
        assert anchors_gram.rank == 2
        assert len(anchors_gram.specified) == 3
        assert anchors_gram.affine == ()

    def test_symmetric_duplicates_fold(self):
        inst = parse_gram(
            "gram rank 2 rows 2\nentry 1 2 0\nentry 2 1 0\n"
        )
        assert len(inst.specified) == 1
        assert inst.specified[0] == SpecifiedEntry(1, 2, Fraction(0))

    def test_conflicting_duplicates_rejected(self):
        with pytest.raises(ParseError, match="conflicting"):
            parse_gram("gram rank 2 rows 2\nentry 1 2 0\nentry 2 1 1\n")

    def test_decimal_values_become_exact(self):
        inst = parse_gram("gram rank 1 rows 1\nentry 1 1 0.5\n")
        assert inst.specified[0].value == Fraction(1, 2)

    def test_affine_line(self):
        inst = parse_gram(
            "gram rank 2 rows 4\naffine 1 : 1 3 4; -1 1 3\n"
        )
        (c,) = inst.affine
        assert c.rhs == 1
        assert c.terms == ((Fraction(1), 3, 4), (Fraction(-1), 1, 3))

    def test_index_out_of_range(self):
        with pytest.raises(ParseError, match="out of range"):
            parse_gram("gram rank 2 rows 2\nentry 1 3 0\n")

    def test_round_trip_is_canonical(self, anchors_gram):
        text = serialize_gram(anchors_gram)
        assert parse_gram(text) == anchors_gram
        assert serialize_gram(parse_gram(text)) == text

    def test_serialize_sorts_entries(self):
        inst = parse_gram("gram rank 2 rows 3\nentry 2 3 1\nentry 1 1 1\n")
        lines = serialize_gram(inst).splitlines()
        assert lines[1] == "entry 1 1 1"
        assert lines[2] == "entry 2 3 1"

    def test_diagonal_entries_allowed_in_affine(self):
        inst = parse_gram("gram rank 2 rows 2\naffine 2 : 1 1 1; 1 2 2\n")
        assert len(inst.affine) == 1


class TestCheckRealization:
    def test_anchor_witness_passes(self, anchors_gram):
        H = Realization(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))
        report = check_realization(anchors_gram, H, 0)
        assert report.passed
        assert report.max_violation == 0

    def test_degenerate_rows_fail(self, anchors_gram):
        H = Realization(((Fraction(1), Fraction(0)), (Fraction(1), Fraction(0))))
        report = check_realization(anchors_gram, H, 0)
        assert not report.passed
        # residual of the off-diagonal entry <(1,0),(1,0)> = 1 vs 0
        assert report.entry_residuals[1] == 1

    def test_affine_residual(self):
        # constraint W34 - W13 = 1 against rows giving W34 = 7, W13 = 2
        inst = parse_gram(
            "gram rank 2 rows 4\naffine 1 : 1 3 4; -1 1 3\n"
        )
        H = Realization(
            (
                (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1)),
                (Fraction(2), Fraction(1)),
                (Fraction(3), Fraction(1)),
            )
        )
        report = check_realization(inst, H, 0)
        assert report.affine_residuals[0] == 4
        assert not report.passed

    def test_shape_mismatch(self, anchors_gram):
        with pytest.raises(ValueError, match="shape"):
            check_realization(anchors_gram, Realization(((Fraction(1),),)), 0)

    def test_exact_rational_pass_iff_zero_residuals(self, anchors_gram):
        H = Realization(
            ((Fraction(1), Fraction(0)), (Fraction(1, 7), Fraction(1)))
        )
        report = check_realization(anchors_gram, H, 0)
        assert report.passed == all(
            r == 0 for r in report.entry_residuals + report.affine_residuals
        )

    def test_tolerant_float_path(self, anchors_gram):
        H = Realization(((1.0, 1e-9), (0.0, 1.0)))
        assert check_realization(anchors_gram, H, 1e-8).passed
        assert not check_realization(anchors_gram, H, 1e-12).passed


@st.composite
def rational_realizations(draw, rows, cols):
    grid = [
        [
            Fraction(draw(st.integers(0, 8)), draw(st.integers(1, 4)))
            for _ in range(cols)
        ]
        for _ in range(rows)
    ]
    return Realization(tuple(tuple(r) for r in grid))


class TestColumnPermutationInvariance:
    @given(rational_realizations(3, 2), st.permutations([0, 1]))
    @settings(max_examples=100)
    def test_reports_identical(self, H, perm):
        inst = parse_gram(
            "gram rank 2 rows 3\n"
            "entry 1 1 1\nentry 2 2 1\nentry 1 2 0\n"
            "affine 1 : 1 1 3; 1 2 3\n"
        )
        permuted = Realization(
            tuple(tuple(row[p] for p in perm) for row in H.rows)
        )
        a = check_realization(inst, H, 0)
        b = check_realization(inst, permuted, 0)
        assert a.entry_residuals == b.entry_residuals
        assert a.affine_residuals == b.affine_residuals
        assert a.max_violation == b.max_violation


class TestExport:
    def test_anchors_counts(self, anchors_gram):
        lines = export_polynomial_system(anchors_gram).splitlines()
        assert sum(1 for l in lines if l.startswith("var ")) == 4
        assert sum(1 for l in lines if l.startswith("eq ")) == 3
        assert sum(1 for l in lines if l.startswith("ge ")) == 4

    def test_reduced_const_counts(self, golden_ami):
        from gramfeas.ami import parse_ami
        from gramfeas.reduction import reduce_rank2

        gram, _ = reduce_rank2(parse_ami("vars 1\nconst 1\n"))
        lines = export_polynomial_system(gram).splitlines()
        assert sum(1 for l in lines if l.startswith("var ")) == 6
        assert sum(1 for l in lines if l.startswith("eq ")) == 5
        assert sum(1 for l in lines if l.startswith("ge ")) == 6

    def test_degenerate_instance(self):
        inst = GramInstance(1, 1, (), ())
        lines = export_polynomial_system(inst).splitlines()
        assert lines == ["var h_1_1", "ge h_1_1 0"]

    def test_export_parse_round_trip(self, anchors_gram):
        text = export_polynomial_system(anchors_gram)
        system = parse_polynomial_system(text)
        direct = gram_to_quadratic_system(anchors_gram)
        assert system.num_vars == direct.num_vars
        assert system.equations == direct.equations

    def test_exported_system_agrees_with_instance(self):
        # searching the exported system and the instance itself must agree
        from gramfeas.reduction import reduce_rank2
        from gramfeas.solver import SolveStatus, SolverConfig, solve_interval
        from conftest import mixed_corpus

        for inst, _a, feasible in mixed_corpus(20, n_max=4, m_max=5):
            gram, rmap = reduce_rank2(inst)
            system = parse_polynomial_system(export_polynomial_system(gram))
            outcome = branch_and_prune(
                system, 1e3, tol=1e-8, max_depth=160, max_nodes=60_000
            )
            verdict = solve_interval(gram, SolverConfig(), rmap)
            expected = (
                SearchStatus.FEASIBLE if feasible else SearchStatus.INFEASIBLE
            )
            assert outcome.status is expected
            mapped = {
                SearchStatus.FEASIBLE: SolveStatus.FEASIBLE,
                SearchStatus.INFEASIBLE: SolveStatus.INFEASIBLE_IN_BOX,
            }[outcome.status]
            assert verdict.status is mapped


class TestRealizationFiles:
    def test_round_trip_rational(self):
        H = Realization(((Fraction(1), Fraction(0)), (Fraction(1, 3), Fraction(1))))
        assert parse_realization(serialize_realization(H)) == H

    def test_round_trip_float(self):
        H = Realization(((1.0, 0.25), (0.3333333333333333, 1.0)))
        parsed = parse_realization(serialize_realization(H))
        assert parsed.rows == H.rows

    def test_bad_shape(self):
        with pytest.raises(ParseError, match="expected 2 values"):
            parse_realization("real rows 1 cols 2\n1\n")
