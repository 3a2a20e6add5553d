"""Batch orchestration: CSV in, fitted/compared/checked report out.

Stages run in dependency order; a failing stage is recorded in the report
and only the stages that need its output are skipped, so one bad fit does
not take down the whole analysis.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import time
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .fitting import (
    FitResult,
    fit_lognormal,
    fit_mixture,
    fit_pareto,
    fit_stexp,
    fit_trunc_lognormal,
    make_family,
)
from .gof import format_p, mc_pvalue
from .sample import Sample
from .selection import selection_report, vuong
from .svgplot import Series, line_plot_svg
from .tail import select_xmin

log = logging.getLogger("sizedist.pipeline")

# ---------------------------------------------------------------------------
# input
# ---------------------------------------------------------------------------


def read_sizes(path, column=0):
    """Parse one CSV column of positive sizes.

    Returns (values, issues, header_skipped) where issues is a list of
    (line_number, reason) for every rejected row.  A non-numeric first row is
    treated as a header when the column is selected by index; selecting by
    name requires one.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path} is empty")

    start = 0
    header_skipped = False
    if isinstance(column, str):
        header = [c.strip() for c in rows[0]]
        if column not in header:
            raise InputError(f"column {column!r} not found in header {header}")
        idx = header.index(column)
        start = 1
        header_skipped = True
    else:
        idx = int(column)
        first = rows[0]
        try:
            float(first[idx].strip())
        except (ValueError, IndexError):
            start = 1
            header_skipped = True

    values = []
    issues = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if idx >= len(row):
            issues.append((lineno, "missing column"))
            continue
        cell = row[idx].strip()
        if not cell:
            issues.append((lineno, "blank value"))
            continue
        try:
            v = float(cell)
        except ValueError:
            issues.append((lineno, f"non-numeric value {cell!r}"))
            continue
        if not np.isfinite(v):
            issues.append((lineno, "non-finite value"))
            continue
        if v <= 0.0:
            issues.append((lineno, f"non-positive value {v}"))
            continue
        values.append(v)

    if not values:
        raise InputError(f"{path} holds no usable positive values in column {column!r}")
    return np.asarray(values, dtype=float), issues, header_skipped


def load_csv(path, column=0) -> Sample:
    """Load a CSV column into a Sample, logging every rejected row."""
    values, issues, _ = read_sizes(path, column)
    for lineno, reason in issues[:20]:
        log.warning("%s line %d rejected: %s", path, lineno, reason)
    if len(issues) > 20:
        log.warning("%s: %d further rows rejected", path, len(issues) - 20)
    if issues:
        log.warning("%s: %d rows rejected, %d values kept", path, len(issues), len(values))
    return Sample.from_values(values)


# ---------------------------------------------------------------------------
# descriptive statistics
# ---------------------------------------------------------------------------


@dataclass
class DescriptiveStats:
    """Summary-table row.  Skewness/kurtosis describe the log sizes
    (divisor-n central moments, kurtosis not excess) and are None for
    degenerate samples instead of NaN."""

    n: int
    mean: float
    sd: Optional[float]
    log_mean: float
    log_sd: Optional[float]
    skewness: Optional[float]
    kurtosis: Optional[float]
    minimum: float
    maximum: float


def describe(sample: Sample) -> DescriptiveStats:
    sample = sample if isinstance(sample, Sample) else Sample.from_values(sample)
    v = sample.values
    y = sample.logs
    n = sample.n
    sd = float(np.std(v, ddof=1)) if n >= 2 else None
    log_sd = float(np.std(y, ddof=1)) if n >= 2 else None
    centered = y - y.mean()
    m2 = float(np.mean(centered**2))
    if m2 > 0.0:
        skew = float(np.mean(centered**3)) / m2**1.5
        kurt = float(np.mean(centered**4)) / m2**2
    else:
        skew = None
        kurt = None
    return DescriptiveStats(
        n=n,
        mean=float(np.mean(v)),
        sd=sd,
        log_mean=float(np.mean(y)),
        log_sd=log_sd,
        skewness=skew,
        kurtosis=kurt,
        minimum=float(v[0]),
        maximum=float(v[-1]),
    )


# ---------------------------------------------------------------------------
# rank / co-rank plot data
# ---------------------------------------------------------------------------


@dataclass
class PlotData:
    kind: str  # "rank" or "corank"
    empirical_x: np.ndarray  # log sizes, ascending
    empirical_y: np.ndarray  # log rank or log co-rank
    grid: np.ndarray
    curves: dict


def rank_plot_data(sample: Sample, models: dict, n_grid: int = 512) -> PlotData:
    """Log-rank of each observation plus model curves ln(n * survival).

    Ranks count from the top: the largest observation has rank 1, so its
    log-rank is 0.  Model curves can reach -inf where the fitted survival
    underflows; consumers are expected to skip non-finite points.
    """
    y = sample.logs
    n = sample.n
    ranks = np.log(np.arange(n, 0, -1, dtype=float))
    grid = np.linspace(y[0], y[-1], n_grid)
    curves = {}
    with np.errstate(divide="ignore"):
        for name, model in models.items():
            sf = 1.0 - np.asarray(model.to_log_space().cdf(grid), dtype=float)
            curves[name] = np.log(n * np.maximum(sf, 0.0))
    return PlotData("rank", y, ranks, grid, curves)


def corank_plot_data(sample: Sample, models: dict, n_grid: int = 512) -> PlotData:
    """Log co-rank (count from the bottom) and ln(n * cdf) model curves."""
    y = sample.logs
    n = sample.n
    coranks = np.log(np.arange(1, n + 1, dtype=float))
    grid = np.linspace(y[0], y[-1], n_grid)
    curves = {}
    with np.errstate(divide="ignore"):
        for name, model in models.items():
            cdf = np.asarray(model.to_log_space().cdf(grid), dtype=float)
            curves[name] = np.log(n * np.maximum(cdf, 0.0))
    return PlotData("corank", y, coranks, grid, curves)


def _write_tsv(path: Path, header: list[str], columns: list[np.ndarray]):
    lines = ["\t".join(header)]
    for row in zip(*columns):
        lines.append("\t".join(f"{v:.10g}" for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_plot_files(plot: PlotData, out_dir: Path, stem: str, title: str) -> dict:
    """Two TSVs (empirical points, model curves) plus an SVG referencing them."""
    emp_path = out_dir / f"{stem}_empirical.tsv"
    mod_path = out_dir / f"{stem}_models.tsv"
    ylab = "log rank" if plot.kind == "rank" else "log co-rank"
    _write_tsv(emp_path, ["log_size", ylab.replace(" ", "_")], [plot.empirical_x, plot.empirical_y])
    names = list(plot.curves)
    _write_tsv(mod_path, ["log_size"] + names, [plot.grid] + [plot.curves[k] for k in names])

    series = [
        Series(
            name="data",
            x=plot.empirical_x,
            y=plot.empirical_y,
            kind="points",
            source=f"{emp_path.name}#data",
        )
    ]
    for name in names:
        series.append(
            Series(
                name=name,
                x=plot.grid,
                y=plot.curves[name],
                source=f"{mod_path.name}#{name}",
            )
        )
    svg_path = out_dir / f"{stem}.svg"
    _atomic_write(svg_path, line_plot_svg(series, title, "log size", ylab))
    return {f"{stem}_empirical": str(emp_path), f"{stem}_models": str(mod_path), stem: str(svg_path)}


# ---------------------------------------------------------------------------
# report orchestration
# ---------------------------------------------------------------------------

FULL_MODELS = ("stexp", "ln", "2ln", "3ln")
TAIL_MODELS = ("pareto", "lnt")
GOF_KINDS = ("ks", "cm", "ad")

_FIT_STAGE_INDEX = {name: i + 1 for i, name in enumerate(FULL_MODELS + TAIL_MODELS)}
_GOF_STAGE_INDEX = {
    pair: 10 + i for i, pair in enumerate(product(FULL_MODELS + TAIL_MODELS, GOF_KINDS))
}


@dataclass
class PipelineConfig:
    seed: int = 0
    column: object = 0
    out_dir: str = "."
    gof_replicates: int = 350
    gof_kinds: tuple = GOF_KINDS
    mixture_restarts: int = 20
    x_min: Optional[float] = None
    n_floor: int = 50
    max_candidates: int = 2000
    lnt_starts: str = "full"
    n_jobs: int = 1
    write_plots: bool = True


def _stage_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence(entropy=(master, index)).generate_state(1)[0])


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _atomic_write(path: Path, text: str):
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _fit_dict(fit: FitResult) -> dict:
    model = fit.model
    params = {f.name: getattr(model, f.name) for f in dataclasses.fields(model)}
    return {
        "family": model.family_name,
        "params": _jsonable(params),
        "log_likelihood": fit.log_likelihood,
        "k": fit.k,
        "n": fit.n,
        "std_errors": _jsonable(fit.std_errors),
        "diagnostics": _jsonable(fit.diagnostics),
    }


def _gof_dict(report) -> dict:
    return {
        "kind": report.statistic_kind,
        "observed_stat": report.observed_stat,
        "p_value": report.p_value,
        "display": format_p(report),
        "exceed_count": report.exceed_count,
        "replicates_used": report.replicates_used,
        "dropped": report.dropped,
        "reliability_warning": report.reliability_warning,
        "seed": report.seed,
    }


class _Stages:
    def __init__(self):
        self.status = {}

    def run(self, name, fn, ok=True, reason="upstream failure"):
        if not ok:
            self.status[name] = f"skipped: {reason}"
            return None
        try:
            out = fn()
            self.status[name] = "ok"
            return out
        except Exception as exc:  # recorded, not raised: independent stages go on
            self.status[name] = f"error: {type(exc).__name__}: {exc}"
            log.warning("stage %s failed: %s", name, exc)
            return None


def _fit_full(name, sample, cfg):
    seed = _stage_seed(cfg.seed, _FIT_STAGE_INDEX[name])
    if name == "stexp":
        return fit_stexp(sample)
    if name == "ln":
        return fit_lognormal(sample)
    return fit_mixture(sample, int(name[0]), restarts=cfg.mixture_restarts, seed=seed)


def run_report(source, config: Optional[PipelineConfig] = None, **overrides) -> dict:
    """Full analysis pass; returns the report dict and writes report.json.

    `source` is a CSV path or an existing Sample.  Every randomized stage
    draws its seed from the master seed and a fixed stage index, so reruns
    with one configuration reproduce byte-identical reports apart from the
    timestamp field.
    """
    cfg = dataclasses.replace(config or PipelineConfig(), **overrides)
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stages = _Stages()
    artifacts = {}

    if isinstance(source, Sample):
        sample = source
        input_name = "<in-memory>"
        n_rejected = 0
    else:
        values, issues, _ = read_sizes(source, cfg.column)
        sample = Sample.from_values(values)
        input_name = str(source)
        n_rejected = len(issues)

    report = {
        "meta": {
            "input": input_name,
            "n_rejected_rows": n_rejected,
            "seed": cfg.seed,
            "config": _jsonable(cfg),
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        },
        "stages": stages.status,
    }

    report["descriptive"] = {"full": stages.run("describe", lambda: _jsonable(describe(sample)))}

    fits: dict[str, FitResult] = {}
    for name in FULL_MODELS:
        res = stages.run(f"fit_{name}", lambda name=name: _fit_full(name, sample, cfg))
        if res is not None:
            fits[name] = res
    report["full_fits"] = {name: _fit_dict(fit) for name, fit in fits.items()}

    gof_full = {}
    for name in FULL_MODELS:
        for kind in cfg.gof_kinds:
            stage = f"gof_full_{name}_{kind}"
            if cfg.gof_replicates < 1:
                stages.status[stage] = "skipped: disabled"
                continue
            rep = stages.run(
                stage,
                lambda name=name, kind=kind: mc_pvalue(
                    _report_family(name, cfg, None),
                    sample,
                    kind=kind,
                    replicates=cfg.gof_replicates,
                    seed=_stage_seed(cfg.seed, _GOF_STAGE_INDEX[(name, kind)]),
                    n_jobs=cfg.n_jobs,
                ),
                ok=name in fits,
                reason=f"fit_{name} unavailable",
            )
            if rep is not None:
                gof_full.setdefault(name, {})[kind] = _gof_dict(rep)
    report["gof_full"] = gof_full

    sel_full = stages.run(
        "criteria_full", lambda: selection_report(fits), ok=bool(fits), reason="no full fits"
    )
    report["criteria_full"] = (
        {
            "table": {e.name: _jsonable(e) for e in sel_full.entries},
            "winners": sel_full.winners,
        }
        if sel_full
        else None
    )

    if cfg.x_min is not None:
        x_min = float(cfg.x_min)
        stages.status["tail_scan"] = "ok"
        report["tail_scan"] = {"source": "provided", "chosen_xmin": x_min}
        scan = None
    else:
        scan = stages.run(
            "tail_scan", lambda: select_xmin(sample, cfg.n_floor, cfg.max_candidates)
        )
        x_min = scan.chosen_xmin if scan else None
        report["tail_scan"] = (
            {
                "source": "scan",
                "chosen_xmin": scan.chosen_xmin,
                "tail_n": scan.tail_n,
                "alpha_at_choice": scan.alpha_at_choice,
                "n_candidates": int(scan.candidates.size),
            }
            if scan
            else None
        )

    tail_sample = None
    if x_min is not None:
        tail_sample = stages.run("tail_slice", lambda: sample.tail(x_min))
    have_tail = tail_sample is not None

    tail_fits: dict[str, FitResult] = {}
    if have_tail:
        res = stages.run("fit_pareto", lambda: fit_pareto(tail_sample, x_min))
        if res is not None:
            tail_fits["pareto"] = res
        res = stages.run(
            "fit_lnt", lambda: fit_trunc_lognormal(tail_sample, x_min, starts=cfg.lnt_starts)
        )
        if res is not None:
            tail_fits["lnt"] = res
    else:
        stages.run("fit_pareto", None, ok=False, reason="no tail")
        stages.run("fit_lnt", None, ok=False, reason="no tail")
    report["tail_fits"] = {name: _fit_dict(fit) for name, fit in tail_fits.items()}

    gof_tail = {}
    for name in TAIL_MODELS:
        for kind in cfg.gof_kinds:
            stage = f"gof_tail_{name}_{kind}"
            if cfg.gof_replicates < 1:
                stages.status[stage] = "skipped: disabled"
                continue
            rep = stages.run(
                stage,
                lambda name=name, kind=kind: mc_pvalue(
                    _report_family(name, cfg, x_min),
                    tail_sample,
                    kind=kind,
                    replicates=cfg.gof_replicates,
                    seed=_stage_seed(cfg.seed, _GOF_STAGE_INDEX[(name, kind)]),
                    n_jobs=cfg.n_jobs,
                ),
                ok=name in tail_fits,
                reason=f"fit_{name} unavailable",
            )
            if rep is not None:
                gof_tail.setdefault(name, {})[kind] = _gof_dict(rep)
    report["gof_tail"] = gof_tail

    sel_tail = stages.run(
        "criteria_tail",
        lambda: selection_report(tail_fits),
        ok=bool(tail_fits),
        reason="no tail fits",
    )
    report["criteria_tail"] = (
        {
            "table": {e.name: _jsonable(e) for e in sel_tail.entries},
            "winners": sel_tail.winners,
        }
        if sel_tail
        else None
    )

    vg = stages.run(
        "vuong",
        lambda: vuong(tail_fits["pareto"], tail_fits["lnt"], tail_sample),
        ok=("pareto" in tail_fits and "lnt" in tail_fits),
        reason="needs both tail fits",
    )
    report["vuong"] = _jsonable(vg) if vg else None

    if cfg.write_plots:
        if fits:
            models = {name: fit.model for name, fit in fits.items()}
            arts = stages.run(
                "plots_full",
                lambda: {
                    **write_plot_files(
                        rank_plot_data(sample, models), out_dir, "rank_full", "Tail rank"
                    ),
                    **write_plot_files(
                        corank_plot_data(sample, models), out_dir, "corank_full", "Co-rank"
                    ),
                },
            )
            if arts:
                artifacts.update(arts)
        else:
            stages.run("plots_full", None, ok=False, reason="no full fits")
        if tail_fits:
            tmodels = {name: fit.model for name, fit in tail_fits.items()}
            arts = stages.run(
                "plots_tail",
                lambda: write_plot_files(
                    rank_plot_data(tail_sample, tmodels), out_dir, "rank_tail", "Tail rank"
                ),
            )
            if arts:
                artifacts.update(arts)
        else:
            stages.run("plots_tail", None, ok=False, reason="no tail fits")

    report["artifacts"] = artifacts
    report_path = out_dir / "report.json"
    _atomic_write(report_path, json.dumps(_jsonable(report), sort_keys=True, indent=2) + "\n")
    artifacts["report"] = str(report_path)
    return report


def _report_family(name, cfg: PipelineConfig, x_min):
    if name in ("2ln", "3ln"):
        # bootstrap refits get a lighter but identical-for-all-replicates
        # setup; the statistic needs parameters only, so skip standard errors
        return make_family(
            name, restarts=2, max_iter=600, full_starts=False, compute_se=False
        )
    if name == "lnt":
        return make_family(name, x_min=x_min, starts="light", compute_se=False)
    if name == "pareto":
        return make_family(name, x_min=x_min)
    return make_family(name)
