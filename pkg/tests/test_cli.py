import re

import pytest

from bestprox.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestSolve:
    def test_benchmark_cell(self, capsys):
        code, out, _ = run_cli(
            capsys, "solve", "--map", "example1", "--lambda", "0.5", "--p", "2",
            "--x0", "1000,8", "--criterion", "aposteriori", "--eps", "1e-2",
        )
        assert code == 0
        assert "stopped at even step: 30" in out

    def test_trivial_start(self, capsys):
        code, out, _ = run_cli(
            capsys, "solve", "--x0", "1,0", "--criterion", "aposteriori",
            "--eps", "1e-6",
        )
        assert code == 0
        assert "stopped at even step: 2" in out
        assert "approximation: (1, 0)" in out

    def test_apriori_criterion_with_oracle(self, capsys):
        code, out, _ = run_cli(
            capsys, "solve", "--p", "3", "--x0", "1000,8",
            "--criterion", "apriori", "--eps", "1e-4",
        )
        assert code == 0
        match = re.search(r"true error: ([0-9.e+-]+)", out)
        assert match and float(match.group(1)) < 1e-4

    def test_trace_csv_format(self, capsys, tmp_path):
        path = tmp_path / "trace.csv"
        code, _, _ = run_cli(
            capsys, "solve", "--x0", "1000,8", "--eps", "1e-2",
            "--out", str(path), "--format", "csv",
        )
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "step,side,coord_0,coord_1,displacement,apriori,aposteriori"
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "A"
        assert first[2] == "1000"
        # odd steps carry no budget columns
        odd = lines[2].split(",")
        assert odd[1] == "B" and odd[5] == "" and odd[6] == ""
        even = lines[3].split(",")
        assert even[1] == "A" and even[5] != "" and even[6] != ""
        # 17 significant digits round-trip
        assert float(lines[1].split(",")[4]) == pytest.approx(1500.5479832381238, abs=1e-9)

    def test_csv_deterministic(self, capsys, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            run_cli(
                capsys, "solve", "--x0", "1000,8", "--eps", "1e-4",
                "--out", str(path), "--format", "csv", "--seed", "3",
            )
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_budget_exhaustion_is_exit_1(self, capsys):
        code, _, err = run_cli(
            capsys, "solve", "--x0", "1000,8", "--eps", "1e-2", "--max-steps", "10",
        )
        assert code == 1
        assert "10" in err

    def test_start_outside_a_is_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "solve", "--x0", "0,0", "--eps", "1e-2")
        assert code == 2
        assert "input error" in err

    def test_bad_eps_is_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "--x0", "1000,8", "--eps", "-1")
        assert code == 2

    def test_bad_p_is_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "--p", "1", "--x0", "1000,8")
        assert code == 2

    def test_unknown_map_is_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "--map", "moebius", "--x0", "1000,8")
        assert code == 2

    def test_wrong_dimension_is_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "solve", "--x0", "1000,8,3")
        assert code == 2


class TestTable:
    def test_single_cell(self, capsys):
        code, out, _ = run_cli(
            capsys, "table", "--criterion", "aposteriori", "--eps", "1e-2", "--p", "2",
        )
        assert code == 0
        assert "30" in out

    def test_compare_reference_aposteriori_passes(self, capsys):
        code, out, _ = run_cli(
            capsys, "table", "--criterion", "aposteriori", "--compare-paper",
            "--format", "csv",
        )
        assert code == 0
        assert "# computed" in out and "# reference" in out and "# delta" in out
        delta_block = out.split("# delta")[1]
        data_rows = [r for r in delta_block.strip().splitlines() if not r.startswith("eps")]
        for row in data_rows:
            assert all(int(cell) == 0 for cell in row.split(",")[1:])

    def test_compare_reference_apriori_reports_offset(self, capsys):
        # the literal step predictor exceeds the published grid on p >= 2
        # columns; the CLI must surface that as exit 1, with all three
        # grids emitted for inspection
        code, out, err = run_cli(
            capsys, "table", "--criterion", "apriori", "--compare-paper",
            "--format", "csv",
        )
        assert code == 1
        assert "# computed" in out and "# reference" in out and "# delta" in out
        assert "authoritative" in err

    def test_compare_requires_benchmark_grid(self, capsys):
        code, _, _ = run_cli(
            capsys, "table", "--criterion", "apriori", "--compare-paper",
            "--eps", "1e-3",
        )
        assert code == 2

    def test_markdown_format(self, capsys):
        code, out, _ = run_cli(
            capsys, "table", "--criterion", "apriori", "--format", "markdown",
        )
        assert code == 0
        assert out.count("|") > 10

    def test_table_deterministic(self, capsys):
        _, first, _ = run_cli(capsys, "table", "--criterion", "apriori", "--format", "csv")
        _, second, _ = run_cli(capsys, "table", "--criterion", "apriori", "--format", "csv")
        assert first == second


class TestModulus:
    def test_endpoint(self, capsys):
        code, out, _ = run_cli(capsys, "modulus", "--p", "2", "--eps", "2")
        assert code == 0
        assert "delta_p(eps) for p=2, eps=2: 1" in out
        assert "C*eps^q: 0.5" in out
        assert "C = 0.125, q = 2" in out

    def test_cubic_case(self, capsys):
        code, out, _ = run_cli(capsys, "modulus", "--p", "3", "--eps", "1")
        assert code == 0
        assert "0.0435344" in out
        assert "q = 3" in out

    def test_bisection_case(self, capsys):
        code, out, _ = run_cli(capsys, "modulus", "--p", "1.5", "--eps", "0.5")
        assert code == 0
        assert "0.0158785" in out
        assert "0.015625" in out  # C*eps^q = (1/16) * 0.25

    def test_out_of_range_is_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, "modulus", "--p", "2", "--eps", "3")
        assert code == 2
        code, _, _ = run_cli(capsys, "modulus", "--p", "0.9", "--eps", "1")
        assert code == 2


class TestVerify:
    def test_cyclic_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "cyclic", "--seed", "42")
        assert code == 0
        assert "FAIL" not in out
        assert "all properties passed" in out

    def test_corrupted_k_fails_with_named_property(self, capsys):
        code, out, _ = run_cli(
            capsys, "verify", "--suite", "cyclic", "--seed", "42",
            "--k-override", "0.05",
        )
        assert code == 1
        assert "FAIL" in out
        assert "contraction inequality" in out

    def test_tables_suite_passes(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "--suite", "tables")
        assert code == 0
        assert "matches reference exactly" in out
