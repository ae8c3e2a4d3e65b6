"""The command-line frontend: records, formats, seeds, exit codes."""

import csv
import io
import json

import pytest

from agglogic.cli import run, validate_record
from agglogic.errors import NotStabilizedError

MODEL_JSON = '{"signature": {"E": 2}, "probs": {"E": 0.3}, "schedule": [20, 40], "seed": 1}'
MODEL_TOML = 'schedule = [20, 40]\nseed = 1\n[signature]\nE = 2\n[probs]\nE = 0.3\n'


@pytest.fixture
def model_path(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(MODEL_JSON)
    return str(path)


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, (json.loads(out) if out else None)


class TestEval:
    def test_constant(self, capsys):
        code, record = run_json(capsys, ["eval", "-f", "0.7", "--n", "5", "--seed", "1"])
        assert code == 0
        validate_record(record)
        assert record["results"]["rows"] == [{"value": 0.7}]

    def test_open_formula_lists_assignments(self, capsys, model_path):
        code, record = run_json(
            capsys, ["eval", "-f", "am { E(x,y) : y : true }", "--n", "20",
                     "--model", model_path, "--seed", "3"]
        )
        assert code == 0
        rows = record["results"]["rows"]
        assert len(rows) == 20
        assert all(0.0 <= row["value"] <= 1.0 for row in rows)

    def test_no_model_means_empty_relations(self, capsys):
        code, record = run_json(capsys, ["eval", "-f", "exists y E(x,y)", "--n", "3"])
        assert code == 0
        assert all(row["value"] == 0.0 for row in record["results"]["rows"])


class TestSampleAndFormats:
    def test_sample_counts(self, capsys, model_path):
        code, record = run_json(capsys, ["sample", "--model", model_path, "--n", "20"])
        assert code == 0
        assert record["results"]["counts"]["E"] == len(record["results"]["rows"])

    def test_toml_model(self, capsys, tmp_path):
        path = tmp_path / "model.toml"
        path.write_text(MODEL_TOML)
        code, record = run_json(capsys, ["sample", "--model", str(path), "--n", "20"])
        assert code == 0

    def test_byte_identical_reruns(self, capsys, model_path):
        argv = ["sample", "--model", model_path, "--n", "30", "--seed", "9"]
        run(argv)
        first = capsys.readouterr().out
        run(argv)
        second = capsys.readouterr().out
        assert first == second

    def test_csv_carries_same_rows_as_json(self, capsys, model_path):
        argv = ["eval", "-f", "am { E(x,y) : y : true }", "--n", "10",
                "--model", model_path, "--seed", "2"]
        code, record = run_json(capsys, argv)
        assert code == 0
        assert run(argv + ["--format", "csv"]) == 0
        text = capsys.readouterr().out
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == len(record["results"]["rows"])
        for got, want in zip(rows, record["results"]["rows"]):
            assert json.loads(got["assignment"]) == want["assignment"]
            assert float(got["value"]) == want["value"]


class TestMetrics:
    def test_replicated_sequences_at_distance_zero(self, capsys):
        code, record = run_json(
            capsys, ["metrics", "--p", "0,0.5,1", "--q", "0,0,0.5,0.5,1,1"]
        )
        assert code == 0
        row = record["results"]["rows"][0]
        assert row["mu1_unordered"] == 0.0
        assert row["muinf_ordered"] == 0.0


class TestProbe:
    def test_passing_probe_record(self, capsys):
        code, record = run_json(
            capsys, ["probe", "--agg", "am", "--params", "0.2:0.5,0.8:0.5",
                     "--schedule", "64,256,1024", "--seed", "4"]
        )
        assert code == 0
        assert record["results"]["ct"]["verdict"] == "pass"
        assert record["results"]["up"]["verdict"] == "pass"
        assert record["results"]["agree"] is True

    def test_failing_probe_reports_counterexample(self, capsys):
        code, record = run_json(
            capsys, ["probe", "--agg", "max", "--params", "0:1,1:0",
                     "--schedule", "64,256,1024", "--seed", "4"]
        )
        assert code == 0
        assert record["results"]["ct"]["verdict"] == "fail"
        assert record["results"]["ct"]["counterexample"]["gap"] == 1.0


class TestEliminate:
    def test_mean_elimination_with_validation(self, capsys, model_path):
        code, record = run_json(
            capsys, ["eliminate", "-f", "am { E(x,y) : y : true }",
                     "--model", model_path, "--validate", "--eps", "0.25",
                     "--samples", "20", "--seed", "5"]
        )
        assert code == 0
        for row in record["results"]["rows"]:
            assert abs(row["value"] - 0.3) < 1e-9
        fractions = record["results"]["validation"]["fractions"]
        assert fractions[-1]["fraction"] >= 0.95

    def test_boundary_proportional_exits_3(self, capsys, model_path):
        code = run(["eliminate", "-f", "proportional[beta=0.3] { E(x,y) : y : true }",
                    "--model", model_path])
        assert code == 3

    def test_parse_error_exits_2(self, capsys, model_path):
        assert run(["eliminate", "-f", "am {", "--model", model_path]) == 2

    def test_missing_model_exits_1(self, capsys, tmp_path):
        gone = str(tmp_path / "absent.json")
        assert run(["eliminate", "-f", "0.5", "--model", gone]) == 1

    def test_not_stabilized_exits_4(self, capsys, model_path, monkeypatch):
        from agglogic import cli as cli_module

        def explode(args):
            raise NotStabilizedError("synthetic")

        monkeypatch.setitem(cli_module._DISPATCH, "eliminate", explode)
        assert run(["eliminate", "-f", "0.5", "--model", model_path]) == 4


class TestValidateCommand:
    def test_against_explicit_formula(self, capsys, model_path):
        code, record = run_json(
            capsys, ["validate", "-f", "am { E(x,y) : y : true }", "-g", "0.3",
                     "--model", model_path, "--eps", "0.3", "--samples", "10",
                     "--seed", "6"]
        )
        assert code == 0
        assert all(row["fraction"] == 1.0 for row in record["results"]["rows"])

    def test_defaults_to_own_elimination(self, capsys, model_path):
        code, record = run_json(
            capsys, ["validate", "-f", "max { E(x,y) : y : true }",
                     "--model", model_path, "--eps", "0.01", "--samples", "10",
                     "--seed", "6"]
        )
        assert code == 0
        assert record["results"]["rows"][-1]["fraction"] >= 0.9
