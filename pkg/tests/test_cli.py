"""Command-line interface: exit codes, config files, subcommand output."""

import json
import subprocess
import sys

import numpy as np
import pytest

from sizedist.cli import _read_config_file, main


@pytest.fixture
def sizes_csv(tmp_path):
    rng = np.random.default_rng(5)
    path = tmp_path / "sizes.csv"
    values = np.exp(rng.normal(6.0, 2.0, 400))
    path.write_text("size\n" + "".join(f"{v:.8g}\n" for v in values))
    return path


def test_describe_prints_summary(sizes_csv, capsys):
    assert main(["describe", "--input", str(sizes_csv)]) == 0
    out = capsys.readouterr().out
    assert "n: 400" in out
    assert "log_mean:" in out
    assert "kurtosis:" in out


def test_describe_named_column(sizes_csv, capsys):
    assert main(["describe", "--input", str(sizes_csv), "--column", "size"]) == 0
    assert "n: 400" in capsys.readouterr().out


def test_fit_lognormal_output(sizes_csv, capsys):
    assert main(["fit", "--input", str(sizes_csv), "--model", "ln"]) == 0
    out = capsys.readouterr().out
    assert "model: ln" in out
    assert "mu = " in out and "sigma = " in out
    assert "std errors:" in out
    assert "k = 2   n = 400" in out


def test_fit_mixture_flattens_tuples(sizes_csv, capsys):
    code = main(
        ["fit", "--input", str(sizes_csv), "--model", "2ln", "--restarts", "2"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "mu[0] = " in out and "mu[1] = " in out
    assert "weights[0] = " in out


def test_fit_tail_model_requires_cutoff(sizes_csv, capsys):
    assert main(["fit", "--input", str(sizes_csv), "--model", "pareto"]) == 2
    assert "requires --x-min" in capsys.readouterr().err

    assert (
        main(["fit", "--input", str(sizes_csv), "--model", "pareto", "--x-min", "1000"])
        == 0
    )
    assert "alpha = " in capsys.readouterr().out


def test_tail_scan_output(sizes_csv, capsys):
    assert main(["tail", "--input", str(sizes_csv)]) == 0
    out = capsys.readouterr().out
    assert "chosen x_min = " in out
    assert "tail exponent alpha = " in out


def test_gof_reports_p_value(sizes_csv, capsys):
    code = main(
        ["gof", "--input", str(sizes_csv), "--model", "ln", "--replicates", "20"]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "statistic: ks = " in out
    assert "p value: " in out
    assert "replicates used: 20" in out


def test_compare_table_and_winners(sizes_csv, capsys):
    code = main(
        [
            "compare",
            "--input",
            str(sizes_csv),
            "--models",
            "stexp,ln",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "AIC" in out and "BIC" in out and "HQC" in out
    assert "best by aic: ln" in out  # lognormal data
    assert "best by bic: ln" in out


def test_compare_tail_pair_adds_vuong_line(sizes_csv, capsys):
    code = main(
        [
            "compare",
            "--input",
            str(sizes_csv),
            "--models",
            "pareto,lnt",
            "--x-min",
            "2000",
        ]
    )
    assert code == 0
    assert "vuong pareto vs lnt: stat = " in capsys.readouterr().out


def test_compare_rejects_bad_model_lists(sizes_csv, capsys):
    assert main(["compare", "--input", str(sizes_csv), "--models", "ln,zipf"]) == 2
    assert "unknown model" in capsys.readouterr().err
    assert main(["compare", "--input", str(sizes_csv), "--models", "pareto,lnt"]) == 2
    assert "require --x-min" in capsys.readouterr().err
    code = main(
        ["compare", "--input", str(sizes_csv), "--models", "ln,pareto", "--x-min", "9"]
    )
    assert code == 2
    assert "cannot mix body and tail" in capsys.readouterr().err


def test_sde_check_passes_for_catalog_target(capsys):
    code = main(
        [
            "sde",
            "--drift",
            "normal",
            "--params",
            "mu=6.5,sigma=2",
            "--check",
            "--steps",
            "1500000",
            "--burnin",
            "100000",
            "--thin",
            "64",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "score identity max abs error" in out
    assert "pass" in out


def test_sde_simulate_writes_draws(tmp_path, capsys):
    out_file = tmp_path / "draws.txt"
    code = main(
        [
            "sde",
            "--drift",
            "exp",
            "--params",
            "rate=0.9,y_min=8",
            "--steps",
            "200000",
            "--burnin",
            "10000",
            "--thin",
            "64",
            "--out",
            str(out_file),
        ]
    )
    assert code == 0
    draws = np.loadtxt(out_file)
    assert draws.size == (200_000 - 10_000 + 63) // 64
    assert draws.min() >= 8.0


def test_sde_missing_param_is_input_error(capsys):
    assert main(["sde", "--drift", "normal", "--params", "mu=1", "--check"]) == 2
    assert "missing parameter" in capsys.readouterr().err


def test_exit_codes():
    # missing file -> input error
    assert main(["describe", "--input", "/nonexistent/file.csv"]) == 2
    # argparse-level misuse raises SystemExit(2)
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--model", "ln"])  # --input missing
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["no-such-command"])


def test_analysis_error_exit_code(tmp_path, capsys):
    path = tmp_path / "tiny.csv"
    path.write_text("5\n5\n5\n")
    # constant data cannot support a lognormal (zero log-spread)
    assert main(["fit", "--input", str(path), "--model", "ln"]) == 3
    assert "analysis error" in capsys.readouterr().err


def test_config_file_parser(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# bootstrap settings\n"
        "replicates = 25\n"
        "lnt-starts = light   # dashes fold to underscores\n"
        "no-plots = true\n"
        "\n"
    )
    values = _read_config_file(cfg)
    assert values == {"replicates": 25, "lnt_starts": "light", "no_plots": True}


def test_config_file_supplies_defaults_and_flags_override(sizes_csv, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("replicates = 7\nkind = cm\n")
    code = main(
        [
            "gof",
            "--input",
            str(sizes_csv),
            "--model",
            "ln",
            "--config",
            str(cfg),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "statistic: cm = " in out
    assert "replicates used: 7" in out

    # an explicit flag beats the file value
    code = main(
        [
            "gof",
            "--input",
            str(sizes_csv),
            "--model",
            "ln",
            "--config",
            str(cfg),
            "--replicates",
            "9",
        ]
    )
    assert code == 0
    assert "replicates used: 9" in capsys.readouterr().out


def test_config_file_rejects_unknown_keys(sizes_csv, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("replicats = 7\n")  # typo
    code = main(
        ["gof", "--input", str(sizes_csv), "--model", "ln", "--config", str(cfg)]
    )
    assert code == 2
    assert "unknown option" in capsys.readouterr().err


def test_report_command_end_to_end(sizes_csv, tmp_path, capsys):
    out_dir = tmp_path / "out"
    code = main(
        [
            "report",
            "--input",
            str(sizes_csv),
            "--out",
            str(out_dir),
            "--replicates",
            "0",
            "--restarts",
            "2",
            "--no-plots",
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "fit_ln: ok" in out
    assert "report written to" in out
    doc = json.loads((out_dir / "report.json").read_text())
    assert doc["meta"]["config"]["mixture_restarts"] == 2


def test_module_and_script_entry_points(sizes_csv):
    for cmd in (
        [sys.executable, "-m", "sizedist", "--version"],
        ["sizedist", "--version"],
    ):
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0
        assert "sizedist" in proc.stdout

    proc = subprocess.run(
        [sys.executable, "-m", "sizedist", "describe", "--input", str(sizes_csv)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "n: 400" in proc.stdout
