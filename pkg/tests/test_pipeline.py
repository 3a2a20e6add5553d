"""CSV intake, descriptive stats, plot data, and the report orchestrator."""

import json
import logging
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
import scipy.stats

from sizedist import (
    InputError,
    Lognormal,
    Sample,
    SupportError,
    corank_plot_data,
    describe,
    load_csv,
    rank_plot_data,
    read_sizes,
    run_report,
    write_plot_files,
)
from sizedist.pipeline import (
    _GOF_STAGE_INDEX,
    PipelineConfig,
    _jsonable,
    _stage_seed,
)

# ---------------------------------------------------------------------------
# CSV intake
# ---------------------------------------------------------------------------


def test_read_numeric_first_row_is_data(csv_file):
    path = csv_file(["3", "1.5", "2e3"])
    values, issues, header_skipped = read_sizes(path)
    np.testing.assert_allclose(values, [3.0, 1.5, 2000.0])
    assert issues == []
    assert not header_skipped


def test_read_text_first_row_is_header(csv_file):
    path = csv_file(["size", "3", "1.5"])
    values, issues, header_skipped = read_sizes(path)
    np.testing.assert_allclose(values, [3.0, 1.5])
    assert issues == []
    assert header_skipped


def test_read_column_by_name(csv_file):
    path = csv_file(["id,size", "1,30", "2,40"])
    values, _, header_skipped = read_sizes(path, column="size")
    np.testing.assert_allclose(values, [30.0, 40.0])
    assert header_skipped
    with pytest.raises(InputError):
        read_sizes(path, column="weight")


def test_read_column_by_index(csv_file):
    path = csv_file(["1,30", "2,40"])
    values, _, _ = read_sizes(path, column=1)
    np.testing.assert_allclose(values, [30.0, 40.0])


def test_read_records_rejection_reasons(csv_file):
    path = csv_file(["10", "-3", "abc", " ", "inf", "", "5.5"])
    values, issues, _ = read_sizes(path)
    np.testing.assert_allclose(values, [10.0, 5.5])
    assert [(lineno, reason.split()[0]) for lineno, reason in issues] == [
        (2, "non-positive"),
        (3, "non-numeric"),
        (4, "blank"),
        (5, "non-finite"),
        (6, "missing"),
    ]


def test_read_short_row_missing_named_column(csv_file):
    path = csv_file(["x,y", "1,20", "2"])
    values, issues, _ = read_sizes(path, column="y")
    np.testing.assert_allclose(values, [20.0])
    assert issues == [(3, "missing column")]


def test_read_rejects_hopeless_files(csv_file, tmp_path):
    with pytest.raises(InputError):
        read_sizes(csv_file([], name="empty.csv"))
    with pytest.raises(InputError):
        read_sizes(csv_file(["size", "-1", "junk"], name="allbad.csv"))
    with pytest.raises(InputError):
        read_sizes(tmp_path / "does_not_exist.csv")


def test_load_csv_returns_sorted_sample_and_logs_issues(csv_file, caplog):
    path = csv_file(["9", "2", "-1", "7"])
    with caplog.at_level(logging.WARNING, logger="sizedist.pipeline"):
        sample = load_csv(path)
    assert isinstance(sample, Sample)
    np.testing.assert_allclose(sample.values, [2.0, 7.0, 9.0])
    assert any("rejected" in rec.message for rec in caplog.records)


# ---------------------------------------------------------------------------
# descriptive statistics
# ---------------------------------------------------------------------------


def test_describe_matches_reference_implementations():
    rng = np.random.default_rng(7)
    values = np.exp(rng.normal(5.0, 1.3, 400))
    stats = describe(Sample.from_values(values))
    logs = np.log(values)
    assert stats.n == 400
    assert stats.mean == pytest.approx(np.mean(values), rel=1e-12)
    assert stats.sd == pytest.approx(np.std(values, ddof=1), rel=1e-12)
    assert stats.log_mean == pytest.approx(np.mean(logs), rel=1e-12)
    assert stats.log_sd == pytest.approx(np.std(logs, ddof=1), rel=1e-12)
    # shape moments are computed on the logs with divisor-n conventions
    assert stats.skewness == pytest.approx(scipy.stats.skew(logs, bias=True), rel=1e-10)
    assert stats.kurtosis == pytest.approx(
        scipy.stats.kurtosis(logs, fisher=False, bias=True), rel=1e-10
    )
    assert stats.minimum == pytest.approx(values.min())
    assert stats.maximum == pytest.approx(values.max())


def test_describe_log_moments_converge_for_lognormal_data():
    rng = np.random.default_rng(11)
    stats = describe(Sample.from_values(np.exp(rng.normal(6.0, 2.0, 200_000))))
    assert stats.log_mean == pytest.approx(6.0, abs=0.02)
    assert stats.log_sd == pytest.approx(2.0, abs=0.02)
    assert stats.skewness == pytest.approx(0.0, abs=0.03)
    assert stats.kurtosis == pytest.approx(3.0, abs=0.1)


def test_describe_degenerate_cases():
    const = describe(Sample.from_values([4.0, 4.0, 4.0]))
    assert const.sd == 0.0
    assert const.skewness is None and const.kurtosis is None

    single = describe(Sample.from_values([4.0]))
    assert single.sd is None and single.log_sd is None
    assert single.skewness is None
    assert single.mean == 4.0 and single.minimum == 4.0 == single.maximum


# ---------------------------------------------------------------------------
# rank / co-rank plot data
# ---------------------------------------------------------------------------


def test_rank_plot_conventions(lognormal_sample):
    model = Lognormal(6.0, 2.0)
    plot = rank_plot_data(lognormal_sample, {"ln": model}, n_grid=64)
    n = lognormal_sample.n
    assert plot.kind == "rank"
    np.testing.assert_array_equal(plot.empirical_x, lognormal_sample.logs)
    # largest observation has rank 1 -> log-rank 0; smallest has rank n
    assert plot.empirical_y[-1] == 0.0
    assert plot.empirical_y[0] == pytest.approx(np.log(n))
    assert plot.grid[0] == lognormal_sample.logs[0]
    assert plot.grid[-1] == lognormal_sample.logs[-1]
    expected = np.log(n * (1.0 - model.to_log_space().cdf(plot.grid)))
    np.testing.assert_allclose(plot.curves["ln"], expected, rtol=1e-12)


def test_corank_plot_conventions(lognormal_sample):
    model = Lognormal(6.0, 2.0)
    plot = corank_plot_data(lognormal_sample, {"ln": model}, n_grid=64)
    n = lognormal_sample.n
    assert plot.kind == "corank"
    # smallest observation has co-rank 1 -> log co-rank 0
    assert plot.empirical_y[0] == 0.0
    assert plot.empirical_y[-1] == pytest.approx(np.log(n))
    expected = np.log(n * model.to_log_space().cdf(plot.grid))
    np.testing.assert_allclose(plot.curves["ln"], expected, rtol=1e-12)


def test_write_plot_files_products(lognormal_sample, tmp_path):
    models = {"ln": Lognormal(6.0, 2.0), "stexp_img": Lognormal(5.0, 1.0)}
    plot = rank_plot_data(lognormal_sample, models, n_grid=40)
    arts = write_plot_files(plot, tmp_path, "rank_full", "Tail rank")
    assert set(arts) == {"rank_full_empirical", "rank_full_models", "rank_full"}

    emp = (tmp_path / "rank_full_empirical.tsv").read_text().splitlines()
    assert emp[0].split("\t") == ["log_size", "log_rank"]
    assert len(emp) == 1 + lognormal_sample.n
    first = [float(v) for v in emp[1].split("\t")]
    assert first[0] == pytest.approx(lognormal_sample.logs[0])

    mod = (tmp_path / "rank_full_models.tsv").read_text().splitlines()
    assert mod[0].split("\t") == ["log_size", "ln", "stexp_img"]
    assert len(mod) == 1 + 40

    svg_text = (tmp_path / "rank_full.svg").read_text()
    root = ET.fromstring(svg_text)  # well-formed XML
    descs = [el.text for el in root.iter() if el.tag.endswith("desc")]
    assert len(descs) == 1
    assert "rank_full_empirical.tsv#data" in descs[0]
    assert "rank_full_models.tsv#ln" in descs[0]


# ---------------------------------------------------------------------------
# report orchestration
# ---------------------------------------------------------------------------


def _fast_config(out_dir, **overrides):
    base = dict(
        out_dir=str(out_dir),
        gof_replicates=5,
        gof_kinds=("ks",),
        mixture_restarts=2,
        n_floor=50,
    )
    base.update(overrides)
    return PipelineConfig(**base)


def test_run_report_happy_path(lognormal_sample, tmp_path):
    report = run_report(lognormal_sample, _fast_config(tmp_path))

    bad = {k: v for k, v in report["stages"].items() if v != "ok"}
    assert bad == {}

    assert set(report["full_fits"]) == {"stexp", "ln", "2ln", "3ln"}
    assert set(report["tail_fits"]) == {"pareto", "lnt"}
    assert report["meta"]["input"] == "<in-memory>"
    assert report["tail_scan"]["source"] == "scan"
    assert report["tail_scan"]["tail_n"] >= 50

    ln_fit = report["full_fits"]["ln"]
    assert ln_fit["k"] == 2 and ln_fit["n"] == lognormal_sample.n
    assert set(report["criteria_full"]["winners"]) == {"aic", "bic", "hqc"}

    gof = report["gof_full"]["ln"]["ks"]
    assert 0.0 < gof["p_value"] <= 1.0
    assert gof["replicates_used"] == 5
    assert gof["seed"] == _stage_seed(0, _GOF_STAGE_INDEX[("ln", "ks")])

    assert report["vuong"]["name_a"] == "pareto"
    assert report["vuong"]["name_b"] == "lnt"

    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["full_fits"]["ln"]["log_likelihood"] == ln_fit["log_likelihood"]
    for key in ("rank_full", "corank_full", "rank_tail"):
        assert Path(report["artifacts"][key]).exists()


def test_run_report_from_csv_counts_rejected_rows(csv_file, tmp_path):
    rng = np.random.default_rng(3)
    rows = ["size"] + [f"{v:.6g}" for v in np.exp(rng.normal(5, 1.5, 220))] + ["-4", "junk"]
    path = csv_file(rows)
    report = run_report(
        path, _fast_config(tmp_path, gof_replicates=0, write_plots=False)
    )
    assert report["meta"]["input"] == str(path)
    assert report["meta"]["n_rejected_rows"] == 2
    assert report["descriptive"]["full"]["n"] == 220


def test_run_report_stage_failure_is_contained(lognormal_sample, tmp_path):
    report = run_report(
        lognormal_sample,
        _fast_config(tmp_path, gof_replicates=0, write_plots=False),
        x_min=1e15,  # beyond the sample maximum: the tail slice must fail
    )
    st = report["stages"]
    assert st["tail_scan"] == "ok"
    assert st["tail_slice"].startswith("error: SupportError")
    assert st["fit_pareto"] == "skipped: no tail"
    assert st["fit_lnt"] == "skipped: no tail"
    assert st["gof_full_ln_ks"] == "skipped: disabled"
    assert st["gof_tail_pareto_ks"] == "skipped: disabled"
    assert st["criteria_tail"] == "skipped: no tail fits"
    assert st["vuong"] == "skipped: needs both tail fits"
    # the untouched stages still ran and the report still landed on disk
    assert st["fit_ln"] == "ok"
    assert report["criteria_full"] is not None
    assert report["vuong"] is None
    assert (tmp_path / "report.json").exists()


def test_run_report_with_provided_xmin(lognormal_sample, tmp_path):
    x_min = float(np.quantile(lognormal_sample.values, 0.8))
    report = run_report(
        lognormal_sample,
        _fast_config(tmp_path, gof_replicates=0, write_plots=False),
        x_min=x_min,
    )
    assert report["tail_scan"] == {"source": "provided", "chosen_xmin": x_min}
    assert report["tail_fits"]["pareto"]["params"]["x_min"] == x_min


def test_run_report_is_deterministic(tmp_path):
    rng = np.random.default_rng(21)
    sample = Sample.from_values(np.exp(rng.normal(6.0, 1.8, 300)))

    out = []
    for sub in ("a", "b"):
        d = tmp_path / sub
        run_report(sample, _fast_config(d, gof_replicates=4, write_plots=False))
        doc = json.loads((d / "report.json").read_text())
        del doc["meta"]["timestamp"]
        del doc["meta"]["config"]["out_dir"]
        out.append(json.dumps(doc, sort_keys=True))
    assert out[0] == out[1]


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def test_stage_seeds_are_stable_and_distinct():
    assert _stage_seed(0, 1) == _stage_seed(0, 1)
    seeds = {_stage_seed(0, i) for i in range(40)}
    assert len(seeds) == 40
    assert _stage_seed(0, 1) != _stage_seed(1, 1)


def test_jsonable_handles_numpy_and_dataclasses():
    from dataclasses import dataclass

    @dataclass
    class Inner:
        a: np.ndarray

    obj = {
        "f": np.float64(1.5),
        "i": np.int64(3),
        "b": np.bool_(True),
        "arr": np.array([1.0, 2.0]),
        "t": (1, 2),
        "dc": Inner(a=np.array([3])),
    }
    out = _jsonable(obj)
    assert out == {
        "f": 1.5,
        "i": 3,
        "b": True,
        "arr": [1.0, 2.0],
        "t": [1, 2],
        "dc": {"a": [3]},
    }
    json.dumps(out)  # round-trips through the serializer


def test_tail_slice_error_type():
    sample = Sample.from_values([1.0, 2.0, 3.0])
    with pytest.raises(SupportError):
        sample.tail(10.0)
