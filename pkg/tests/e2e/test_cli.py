"""
End-to-end tests for the sam-dde command line
"""

import io
import json
import sys

import pandas as pd
import pytest

from sam_dde.cli.main import main


def _response(err: str) -> dict:
    lines = [line for line in err.splitlines() if line.startswith('{"success"')]
    assert lines, err
    return json.loads(lines[-1])


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestRun:
    @pytest.mark.e2e
    def test_step_point_csv(self, workdir, capsys):
        code = main(["run", "--problem", "toggle", "--N", "8", "--omega", "200", "--out", "x.csv"])

        assert code == 0
        frame = pd.read_csv(workdir / "x.csv")
        assert list(frame.columns) == ["t", "X_1", "X_2"]
        assert len(frame) == 33
        assert frame["t"].iloc[-1] == pytest.approx(2.0)
        assert frame.iloc[0][["X_1", "X_2"]].tolist() == pytest.approx([0.5, 2.0])
        summary = _response(capsys.readouterr().err)
        assert summary["success"] is True
        assert summary["data"]["steps"] == 32

    @pytest.mark.e2e
    def test_infeasible_grid_exits_with_user_error(self, capsys):
        code = main(["run", "--N", "2", "--omega", "25"])

        assert code == 2
        response = _response(capsys.readouterr().err)
        assert response["error"]["code"] == "INFEASIBLE_GRID"

    @pytest.mark.e2e
    def test_pi_expression_on_stdout(self, capsys):
        code = main(["run", "--problem", "newpro", "--N", "1", "--omega", "8pi"])

        out = capsys.readouterr().out
        assert code == 0
        assert out.splitlines()[0] == "t,X_1"
        assert len(out.splitlines()) == 1 + 5

    @pytest.mark.e2e
    def test_output_is_deterministic(self, workdir):
        args = ["run", "--N", "2", "--omega", "100"]
        assert main(args + ["--out", "a.csv"]) == 0
        assert main(args + ["--out", "b.csv"]) == 0

        assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()

    @pytest.mark.e2e
    def test_invalid_request_exits_with_user_error(self, capsys):
        assert main(["run", "--N", "0", "--omega", "200"]) == 2
        assert main(["run", "--N", "1", "--omega", "fast"]) == 2


class TestTableAndRatios:
    @pytest.mark.e2e
    def test_table_then_ratios_from_csv(self, workdir, capsys):
        code = main(["table", "--N", "1,2,4", "--omega", "25,50,100", "--out", "t.csv", "--plot", "t.gp"])
        assert code == 0
        frame = pd.read_csv(workdir / "t.csv")
        assert len(frame) == 9
        assert int(frame["excluded"].sum()) == 3
        assert (workdir / "t.gp").exists()
        capsys.readouterr()

        code = main(["ratios", "--from-csv", "t.csv", "--out", "r.csv"])

        assert code == 0
        ratios = pd.read_csv(workdir / "r.csv")
        diagonal = ratios[ratios["kind"] == "diagonal"]["ratio"]
        assert len(diagonal) == 2
        assert all(2.0 < r < 10.0 for r in diagonal)

    @pytest.mark.e2e
    def test_oscillatory_reference_needs_whole_periods(self, capsys):
        code = main(["table", "--N", "1", "--omega", "25", "--reference", "oscillatory"])

        assert code == 2
        assert _response(capsys.readouterr().err)["error"]["code"] == "NON_STROBOSCOPIC_COMPARISON"


class TestAvgCheck:
    @pytest.mark.e2e
    def test_toggle(self, workdir):
        assert main(["avg-check", "--problem", "toggle", "--omega", "60", "--out", "a.csv"]) == 0

        row = pd.read_csv(workdir / "a.csv").iloc[0]
        assert bool(row["H1"]) is True
        assert row["max_deviation"] < 1e-8

    @pytest.mark.e2e
    @pytest.mark.parametrize("omega, h2", [("8pi", True), ("8pi+pi/64", False)])
    def test_newpro_conditions(self, workdir, omega, h2):
        assert main(["avg-check", "--problem", "newpro", "--omega", omega, "--out", "a.csv"]) == 0

        row = pd.read_csv(workdir / "a.csv").iloc[0]
        assert bool(row["H1"]) is False
        assert bool(row["H2"]) is h2

    @pytest.mark.e2e
    def test_gene_closed_form(self, workdir):
        assert main(["avg-check", "--problem", "toggle-gene", "--omega", "8pi", "--out", "a.csv"]) == 0

        row = pd.read_csv(workdir / "a.csv").iloc[0]
        assert row["check"] == "closed-form-vs-quadrature"


class TestReference:
    @pytest.mark.e2e
    def test_averaged_reference_mesh(self, workdir):
        code = main(["reference", "--omega", "200", "--points", "11", "--out", "ref.csv"])

        assert code == 0
        frame = pd.read_csv(workdir / "ref.csv")
        assert frame["t"].tolist() == pytest.approx([0.2 * i for i in range(11)])
        assert frame.iloc[0][["x_1", "x_2"]].tolist() == pytest.approx([0.5, 2.0])

    @pytest.mark.e2e
    def test_unknown_problem_exits_with_user_error(self):
        assert main(["reference", "--omega", "200", "--problem", "lorenz"]) == 2


class TestRepeatedInvocation:
    """Several commands in one process, each with its own stderr"""

    @pytest.mark.e2e
    def test_second_command_after_stderr_closed(self, monkeypatch, capsys):
        captured = sys.stderr
        first = io.StringIO()
        monkeypatch.setattr(sys, "stderr", first)
        assert main(["run", "--problem", "newpro", "--N", "1", "--omega", "8pi", "--out", "a.csv"]) == 0
        first.close()
        monkeypatch.setattr(sys, "stderr", captured)

        code = main(["run", "--N", "2", "--omega", "25"])

        assert code == 2
        assert _response(capsys.readouterr().err)["error"]["code"] == "INFEASIBLE_GRID"

    @pytest.mark.e2e
    def test_two_commands_back_to_back(self, capsys):
        assert main(["avg-check", "--problem", "toggle", "--omega", "60", "--out", "a.csv"]) == 0
        assert _response(capsys.readouterr().err)["success"] is True

        assert main(["run", "--N", "0", "--omega", "200"]) == 2
        assert _response(capsys.readouterr().err)["success"] is False


class TestTableRequests:
    @pytest.mark.e2e
    def test_named_omega_list_supplies_rows(self, workdir, capsys):
        code = main(["table", "--problem", "newpro", "--omega-list", "h2", "--out", "t.csv"])

        assert code == 0
        frame = pd.read_csv(workdir / "t.csv")
        assert sorted(set(frame["N"])) == [1, 2, 4, 8, 16, 32, 64]
        assert len(frame) == 7 * 7
        summary = _response(capsys.readouterr().err)["data"]
        assert summary["problem"] == "newpro"
        assert summary["populated"] > 0

    @pytest.mark.e2e
    def test_reference_overrides_preset(self, workdir, capsys):
        code = main(["table", "--preset", "tab3", "--reference", "averaged", "--N", "1,2", "--omega", "8pi,16pi"])

        assert code == 0
        assert _response(capsys.readouterr().err)["data"]["reference"] == "averaged"

    @pytest.mark.e2e
    def test_preset_keeps_its_reference(self, workdir, capsys):
        code = main(["table", "--preset", "tab3", "--N", "1", "--omega", "8pi", "--out", "t.csv"])

        assert code == 0
        assert _response(capsys.readouterr().err)["data"]["reference"] == "oscillatory"

    @pytest.mark.e2e
    def test_problem_conflicting_with_preset(self, capsys):
        code = main(["table", "--preset", "tab3", "--problem", "newpro"])

        assert code == 2
        response = _response(capsys.readouterr().err)
        assert response["error"]["code"] == "CONFIG_VALIDATION_ERROR"


class TestDiagnostics:
    @pytest.mark.e2e
    def test_counts_are_per_invocation(self, capsys):
        args = ["table", "--N", "1", "--omega", "25,50", "--out", "t.csv"]

        for _ in range(2):
            assert main(args) == 0
            summary = _response(capsys.readouterr().err)["data"]
            assert summary["references_solved"] == 2
            assert summary["sweep_ms"] > 0

    @pytest.mark.e2e
    def test_debug_environment_lowers_log_level(self, monkeypatch, capsys):
        monkeypatch.setenv("DEBUG", "1")

        assert main(["run", "--problem", "newpro", "--N", "1", "--omega", "8pi", "--out", "a.csv"]) == 0

        err = capsys.readouterr().err
        assert "[DEBUG][sam_dde.cli.main] configuration" in err
