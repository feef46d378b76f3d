import csv
import json

import pytest
from click.testing import CliRunner

from diageval.cli import main, parse_grid
from diageval.cohort import ColumnSchema, write_cohort
from diageval.errors import InputError
from diageval.synth import DemoSpec, generate_demo


@pytest.fixture(scope="module")
def demo_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "demo.csv"
    schema = ColumnSchema(
        scores=("model_a", "model_b"), pct_normal="pct_normal",
        neutrophils="neutrophils", monocytes="monocytes", lymphocytes="lymphocytes",
    )
    write_cohort(generate_demo(DemoSpec(n=200)), path, schema)
    return path


@pytest.fixture
def runner():
    return CliRunner()


class TestGridParsing:
    def test_colon_form_inclusive(self):
        assert parse_grid("0:0.5:0.1") == (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)

    def test_comma_form(self):
        assert parse_grid("0.05,0.1,0.25") == (0.05, 0.1, 0.25)

    def test_bad_grid(self):
        with pytest.raises(InputError):
            parse_grid("0:0.5")
        with pytest.raises(InputError):
            parse_grid("0:0.5:-0.1")


class TestCommands:
    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])
        assert result.exit_code == 0
        assert "diageval" in result.output

    def test_sweep(self, runner, demo_csv, tmp_path):
        out = tmp_path / "sweep.csv"
        result = runner.invoke(main, [
            "sweep", "--input", str(demo_csv), "--score-col", "model_a",
            "--grid", "0:0.5:0.1", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 6
        assert rows[0]["threshold"] == "0.0"
        assert float(rows[0]["sensitivity"]) == 1.0

    def test_curves(self, runner, demo_csv, tmp_path):
        prefix = tmp_path / "m_"
        result = runner.invoke(main, [
            "curves", "--input", str(demo_csv), "--score-col", "model_a",
            "--out-prefix", str(prefix),
        ])
        assert result.exit_code == 0, result.output
        for suffix in ("roc.csv", "roc.svg", "pr.csv", "pr.svg"):
            assert (tmp_path / f"m_{suffix}").exists()
        assert "ROC AUC" in result.output

    def test_compare_paired(self, runner, demo_csv, tmp_path):
        out = tmp_path / "cmp.json"
        result = runner.invoke(main, [
            "compare", "--input", str(demo_csv),
            "--score-col", "model_a", "--score-col", "model_b",
            "--mode", "paired", "--replicates", "150", "--seed", "42",
            "--ci", "percentile", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["delong"]["mode"] == "paired"
        assert payload["models"]["model_a"]["n_replicates"] == 150
        assert payload["seed"] == 42

    def test_compare_needs_two_columns(self, runner, demo_csv):
        result = runner.invoke(main, [
            "compare", "--input", str(demo_csv), "--score-col", "model_a",
            "--mode", "paired",
        ])
        assert result.exit_code == 2

    def test_calibrate(self, runner, demo_csv, tmp_path):
        out = tmp_path / "calib.csv"
        svg = tmp_path / "calib.svg"
        result = runner.invoke(main, [
            "calibrate", "--input", str(demo_csv), "--score-col", "model_a",
            "--bins", "10", "--binning", "equal", "--out", str(out),
            "--svg", str(svg),
        ])
        assert result.exit_code == 0, result.output
        assert "ECE" in result.output
        assert len(list(csv.DictReader(out.open()))) == 10
        assert svg.exists()

    def test_dca(self, runner, demo_csv, tmp_path):
        out = tmp_path / "dca.csv"
        result = runner.invoke(main, [
            "dca", "--input", str(demo_csv), "--score-col", "model_a",
            "--grid", "0.05:0.5:0.05", "--replicates", "100", "--seed", "1",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        rows = list(csv.DictReader(out.open()))
        assert len(rows) == 10
        assert rows[0]["band_lo"] != ""

    def test_fit_baseline_and_report(self, runner, demo_csv, tmp_path):
        fit_path = tmp_path / "fit.json"
        result = runner.invoke(main, [
            "fit-baseline", "--train", str(demo_csv),
            "--pct-normal-col", "pct_normal", "--neut-col", "neutrophils",
            "--mono-col", "monocytes", "--lymph-col", "lymphocytes",
            "--out", str(fit_path),
        ])
        assert result.exit_code == 0, result.output
        fit = json.loads(fit_path.read_text())
        assert fit["converged"] is True
        assert len(fit["coefficients"]) == 3

    def test_synth_binormal_and_roundtrip(self, runner, tmp_path):
        out = tmp_path / "b.csv"
        result = runner.invoke(main, [
            "synth", "binormal", "--n-pos", "40", "--n-neg", "60",
            "--mu-pos", "1.0", "--mu-neg", "0.0", "--seed", "3",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert "true AUC" in result.output
        assert len(out.read_text().splitlines()) == 101

    def test_synth_clinical_bad_betas(self, runner, tmp_path):
        result = runner.invoke(main, [
            "synth", "clinical", "--n", "10", "--betas", "1,2",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert result.exit_code == 2

    def test_synth_demo(self, runner, tmp_path):
        out = tmp_path / "demo.csv"
        result = runner.invoke(main, ["synth", "demo", "--n", "50", "--out", str(out)])
        assert result.exit_code == 0, result.output
        header = out.read_text().splitlines()[0]
        assert "model_a" in header and "model_b" in header

    def test_report_with_flags(self, runner, demo_csv, tmp_path):
        out_dir = tmp_path / "report"
        result = runner.invoke(main, [
            "report", "--input", str(demo_csv),
            "--score-col", "model_a", "--score-col", "model_b",
            "--mode", "paired", "--replicates", "120", "--seed", "5",
            "--ci", "percentile", "--out-dir", str(out_dir),
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "summary.json").exists()
        assert (out_dir / "table_thresholds.csv").exists()

    def test_report_env_var_out_dir(self, runner, demo_csv, tmp_path, monkeypatch):
        out_dir = tmp_path / "env_report"
        monkeypatch.setenv("DIAGEVAL_OUT_DIR", str(out_dir))
        result = runner.invoke(main, [
            "report", "--input", str(demo_csv), "--score-col", "model_a",
            "--replicates", "120", "--ci", "percentile",
        ])
        assert result.exit_code == 0, result.output
        assert (out_dir / "summary.json").exists()

    def test_report_requires_input_or_config(self, runner):
        result = runner.invoke(main, ["report"])
        assert result.exit_code == 2

    def test_single_class_exit_code(self, runner, tmp_path):
        path = tmp_path / "single.csv"
        path.write_text(
            "case_id,label,m\n" +
            "".join(f"s{i},1,0.5\n" for i in range(5)),
            encoding="utf-8",
        )
        result = runner.invoke(main, [
            "curves", "--input", str(path), "--score-col", "m",
            "--out-prefix", str(tmp_path / "x_"),
        ])
        assert result.exit_code == 3

    def test_missing_column_exit_code(self, runner, demo_csv, tmp_path):
        result = runner.invoke(main, [
            "sweep", "--input", str(demo_csv), "--score-col", "nope",
            "--out", str(tmp_path / "s.csv"),
        ])
        assert result.exit_code == 2
