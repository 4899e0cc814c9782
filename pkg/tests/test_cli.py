import time

import pytest

from gramfeas.cli import main

GOLDEN = "vars 3\nconst 1\nadd 2 1 1\nmul 3 2 2\n"
CONTRA = "vars 2\nconst 1\nadd 2 1 1\nconst 2\n"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def golden_file(tmp_path):
    path = tmp_path / "golden.ami"
    path.write_text(GOLDEN)
    return path


class TestReduce:
    def test_writes_gram_and_map(self, tmp_path, capsys, golden_file):
        out = tmp_path / "golden.gram"
        code, stdout, _ = run(
            capsys, "reduce", str(golden_file), "--out", str(out)
        )
        assert code == 0
        assert "rows 5, entries 6, affine 3" in stdout
        assert out.exists()
        assert (tmp_path / "golden.gram.map").exists()

    def test_custom_map_path(self, tmp_path, capsys, golden_file):
        out = tmp_path / "g.gram"
        mp = tmp_path / "g.rmap"
        code, _, _ = run(
            capsys, "reduce", str(golden_file), "--out", str(out),
            "--map-out", str(mp),
        )
        assert code == 0 and mp.exists()

    def test_rank_too_low(self, tmp_path, capsys, golden_file):
        code, _, err = run(
            capsys, "reduce", str(golden_file), "--rank", "1",
            "--out", str(tmp_path / "x"),
        )
        assert code == 1 and "rank" in err

    def test_missing_input(self, tmp_path, capsys):
        code, _, err = run(
            capsys, "reduce", str(tmp_path / "nope.ami"), "--out", str(tmp_path / "x")
        )
        assert code == 1 and "error" in err

    def test_parse_error_reported(self, tmp_path, capsys):
        bad = tmp_path / "bad.ami"
        bad.write_text("vars 1\nfrobnicate\n")
        code, _, err = run(capsys, "reduce", str(bad), "--out", str(tmp_path / "x"))
        assert code == 1 and "line 2" in err


class TestSolve:
    def test_feasible_exit_zero(self, tmp_path, capsys, golden_file):
        out = tmp_path / "g.gram"
        run(capsys, "reduce", str(golden_file), "--out", str(out))
        wit = tmp_path / "g.real"
        code, stdout, _ = run(
            capsys, "solve", str(out), "--map", str(out) + ".map",
            "--out", str(wit),
        )
        assert code == 0
        assert "verdict FEASIBLE" in stdout
        assert wit.exists()

    def test_infeasible_exit_twenty(self, tmp_path, capsys):
        ami = tmp_path / "c.ami"
        ami.write_text(CONTRA)
        out = tmp_path / "c.gram"
        run(capsys, "reduce", str(ami), "--out", str(out))
        code, stdout, _ = run(
            capsys, "solve", str(out), "--map", str(out) + ".map"
        )
        assert code == 20
        assert "verdict INFEASIBLE_IN_BOX" in stdout

    def test_unknown_exit_thirty(self, tmp_path, capsys):
        ami = tmp_path / "c.ami"
        ami.write_text(CONTRA)
        out = tmp_path / "c.gram"
        run(capsys, "reduce", str(ami), "--out", str(out))
        # numeric engine alone cannot refute, so it must answer UNKNOWN
        code, stdout, _ = run(
            capsys, "solve", str(out), "--engine", "numeric", "--restarts", "2"
        )
        assert code == 30
        assert "verdict UNKNOWN" in stdout

    def test_structural_requires_map(self, tmp_path, capsys, golden_file):
        out = tmp_path / "g.gram"
        run(capsys, "reduce", str(golden_file), "--out", str(out))
        code, _, err = run(capsys, "solve", str(out), "--engine", "structural")
        assert code == 1 and "--map" in err


class TestVerifyExtractWitness:
    def test_full_pipeline(self, tmp_path, capsys, golden_file):
        gram = tmp_path / "g.gram"
        run(capsys, "reduce", str(golden_file), "--out", str(gram))
        wit = tmp_path / "g.real"
        run(capsys, "solve", str(gram), "--map", str(gram) + ".map", "--out", str(wit))

        code, stdout, _ = run(capsys, "verify", str(gram), str(wit))
        assert code == 0 and "pass true" in stdout

        asg = tmp_path / "g.assignment"
        code, _, _ = run(
            capsys, "extract", str(gram) + ".map", str(wit), "--out", str(asg)
        )
        assert code == 0
        assert asg.read_text().split() == ["1", "2", "4"]

        rebuilt = tmp_path / "g2.real"
        code, _, _ = run(
            capsys, "witness", str(gram) + ".map", str(asg), "--out", str(rebuilt)
        )
        assert code == 0
        assert rebuilt.read_text() == wit.read_text()

    def test_verify_failure_exit_one(self, tmp_path, capsys, golden_file):
        gram = tmp_path / "g.gram"
        run(capsys, "reduce", str(golden_file), "--out", str(gram))
        bad = tmp_path / "bad.real"
        bad.write_text(
            "real rows 5 cols 2\n1 0\n0 1\n1 1\n2 1\n5 1\n"
        )
        code, stdout, _ = run(capsys, "verify", str(gram), str(bad))
        assert code == 1 and "pass false" in stdout


class TestExportAndOracle:
    def test_export_poly(self, tmp_path, capsys, golden_file):
        gram = tmp_path / "g.gram"
        run(capsys, "reduce", str(golden_file), "--out", str(gram))
        code, stdout, _ = run(capsys, "export-poly", str(gram))
        assert code == 0
        assert stdout.startswith("var h_1_1")
        assert "ge h_1_1 0" in stdout

    def test_oracle_exit_codes(self, tmp_path, capsys):
        feas = tmp_path / "f.ami"
        feas.write_text("vars 1\nconst 1\n")
        code, stdout, _ = run(capsys, "oracle", str(feas), "--box", "10")
        assert code == 0 and "verdict FEASIBLE" in stdout

        infeas = tmp_path / "i.ami"
        infeas.write_text(CONTRA)
        code, stdout, _ = run(capsys, "oracle", str(infeas), "--box", "10")
        assert code == 20 and "verdict INFEASIBLE" in stdout


class TestGen:
    def test_planted_with_sidecar(self, tmp_path, capsys):
        out = tmp_path / "p.ami"
        code, stdout, _ = run(
            capsys, "gen", "--seed", "3", "--n", "4", "--m", "5",
            "--out", str(out),
        )
        assert code == 0
        assert out.exists()
        assert (tmp_path / "p.ami.assignment").exists()

    def test_contradiction_no_sidecar(self, tmp_path, capsys):
        out = tmp_path / "c.ami"
        code, stdout, _ = run(
            capsys, "gen", "--seed", "3", "--n", "4", "--m", "5",
            "--mode", "contradiction", "--out", str(out),
        )
        assert code == 0
        assert not (tmp_path / "c.ami.assignment").exists()

    def test_byte_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a.ami"
        b = tmp_path / "b.ami"
        run(capsys, "gen", "--seed", "11", "--n", "5", "--m", "7", "--out", str(a))
        run(capsys, "gen", "--seed", "11", "--n", "5", "--m", "7", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert (
            (tmp_path / "a.ami.assignment").read_bytes()
            == (tmp_path / "b.ami.assignment").read_bytes()
        )


class TestRoundtrip:
    def test_single(self, capsys):
        code, stdout, _ = run(
            capsys, "roundtrip", "--n", "4", "--m", "6", "--seed", "5"
        )
        assert code == 0
        assert "evaluate pass" in stdout

    def test_many_seeds_fast(self, capsys):
        started = time.perf_counter()
        for seed in range(500):
            code, stdout, _ = run(
                capsys, "roundtrip",
                "--n", str(2 + seed % 5), "--m", str(2 + seed % 8),
                "--seed", str(seed),
            )
            assert code == 0, stdout
        assert time.perf_counter() - started < 60
