"""Command-line front end.

Exit codes: 0 success, 2 bad input or configuration, 3 analysis failure
(degenerate data, optimizer breakdown, step-size blowup), 4 unexpected error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, SizedistError
from .fitting import (
    fit_lognormal,
    fit_mixture,
    fit_pareto,
    fit_stexp,
    fit_trunc_lognormal,
    make_family,
)
from .gof import STATISTICS, format_p, mc_pvalue
from .models import (
    ExpStretchedExponential,
    NormalMixture,
    NormalModel,
    ShiftedExponential,
    TruncatedNormal,
)
from .pipeline import PipelineConfig, describe, load_csv, run_report
from .sde import SdeSpec, score_identity_check, simulate, stationary_check
from .selection import selection_report, vuong
from .tail import select_xmin

FULL_CHOICES = ("stexp", "ln", "2ln", "3ln")
TAIL_CHOICES = ("pareto", "lnt")


def _read_config_file(path):
    """key = value lines; '#' comments; values coerced to bool/int/float."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path} line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if value.lower() in ("true", "false"):
            out[key] = value.lower() == "true"
            continue
        for cast in (int, float):
            try:
                out[key] = cast(value)
                break
            except ValueError:
                continue
        else:
            out[key] = value
    return out


def _add_common(parser, with_input=True):
    if with_input:
        parser.add_argument("--input", required=True, help="CSV file of sizes")
        parser.add_argument(
            "--column", default="0", help="column index or header name (default 0)"
        )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", help="key = value config file; flags override it")


def _column(arg):
    return int(arg) if isinstance(arg, str) and arg.lstrip("-").isdigit() else arg


def _load(args):
    return load_csv(args.input, _column(args.column))


def _print_fit(name, fit):
    model = fit.model
    print(f"model: {name}")
    fields = [f.name for f in dataclasses.fields(model)]
    ses = list(fit.std_errors) if fit.std_errors is not None else None
    flat = []
    for fname in fields:
        value = getattr(model, fname)
        if isinstance(value, tuple):
            flat.extend((f"{fname}[{i}]", v) for i, v in enumerate(value))
        else:
            flat.append((fname, value))
    free = model.free_parameters()
    for label, value in flat:
        print(f"  {label} = {value:.6g}")
    if ses is not None and len(ses) == len(free):
        print("  std errors: " + ", ".join(f"{s:.4g}" for s in ses))
    print(f"  log likelihood = {fit.log_likelihood:.4f}   k = {fit.k}   n = {fit.n}")
    d = fit.diagnostics
    if d.boundary_fit:
        print("  warning: shape estimate at parameter boundary")
    if d.ridge_suspected:
        print("  note: near-flat likelihood ridge, location poorly identified")


def _fit_one(name, sample, args):
    if name == "stexp":
        return fit_stexp(sample)
    if name == "ln":
        return fit_lognormal(sample)
    if name in ("2ln", "3ln"):
        return fit_mixture(sample, int(name[0]), restarts=args.restarts, seed=args.seed)
    if args.x_min is None:
        raise InputError(f"model {name} requires --x-min")
    tail = sample.tail(args.x_min)
    if name == "pareto":
        return fit_pareto(tail, args.x_min)
    return fit_trunc_lognormal(tail, args.x_min, starts=args.lnt_starts)


def cmd_describe(args):
    stats = describe(_load(args))
    for key, value in vars(stats).items():
        if value is None:
            print(f"{key}: undefined")
        elif isinstance(value, int):
            print(f"{key}: {value}")
        else:
            print(f"{key}: {value:.6g}")
    return 0


def cmd_fit(args):
    sample = _load(args)
    _print_fit(args.model, _fit_one(args.model, sample, args))
    return 0


def cmd_tail(args):
    sample = _load(args)
    scan = select_xmin(sample, args.n_floor, args.max_candidates)
    print(f"chosen x_min = {scan.chosen_xmin:.6g}")
    print(f"tail n = {scan.tail_n}")
    print(f"tail exponent alpha = {scan.alpha_at_choice:.4f}")
    print(f"candidates scanned = {scan.candidates.size}")
    return 0


def cmd_gof(args):
    sample = _load(args)
    if args.model in TAIL_CHOICES:
        if args.x_min is None:
            raise InputError(f"model {args.model} requires --x-min")
        sample = sample.tail(args.x_min)
        family = make_family(
            args.model,
            x_min=args.x_min,
            **({"starts": args.lnt_starts} if args.model == "lnt" else {}),
        )
    elif args.model in ("2ln", "3ln"):
        family = make_family(args.model, restarts=args.restarts)
    else:
        family = make_family(args.model)
    report = mc_pvalue(
        family,
        sample,
        kind=args.kind,
        replicates=args.replicates,
        seed=args.seed,
        n_jobs=args.n_jobs,
    )
    print(f"statistic: {args.kind} = {report.observed_stat:.6g}")
    print(f"p value: {format_p(report)}")
    print(f"replicates used: {report.replicates_used} (dropped {report.dropped})")
    if report.reliability_warning:
        print("warning: more than 5% of bootstrap replicates failed; p value unreliable")
    return 0


def cmd_compare(args):
    sample = _load(args)
    names = [s.strip() for s in args.models.split(",") if s.strip()]
    bad = [m for m in names if m not in FULL_CHOICES + TAIL_CHOICES]
    if bad:
        raise InputError(f"unknown model(s): {', '.join(bad)}")
    tail_requested = [m for m in names if m in TAIL_CHOICES]
    if tail_requested and args.x_min is None:
        raise InputError("tail models in --models require --x-min")
    if tail_requested and any(m in FULL_CHOICES for m in names):
        raise InputError("cannot mix body and tail models in one comparison")
    fit_sample = sample.tail(args.x_min) if tail_requested else sample
    fits = {name: _fit_one(name, sample, args) for name in names}

    sel = selection_report(fits)
    header = f"{'model':<8}{'logL':>14}{'k':>4}{'AIC':>14}{'BIC':>14}{'HQC':>14}"
    print(header)
    for entry in sel.entries:
        hqc = f"{entry.values.hqc:>14.2f}" if entry.values.hqc is not None else f"{'--':>14}"
        print(
            f"{entry.name:<8}{entry.log_likelihood:>14.2f}{entry.k:>4}"
            f"{entry.values.aic:>14.2f}{entry.values.bic:>14.2f}{hqc}"
        )
    for crit, winners in sel.winners.items():
        print(f"best by {crit}: {', '.join(winners)}")
    if set(names) == set(TAIL_CHOICES):
        result = vuong(fits["pareto"], fits["lnt"], fit_sample)
        print(
            f"vuong pareto vs lnt: stat = {result.statistic:.3f}, "
            f"p = {result.p_value:.3f}, favored: {result.favored or 'neither'}"
        )
    return 0


def _parse_params(text):
    out = {}
    if not text:
        return out
    for piece in text.split(","):
        if "=" not in piece:
            raise InputError(f"--params expects k=v pairs, got {piece!r}")
        key, _, value = piece.partition("=")
        try:
            out[key.strip()] = float(value)
        except ValueError as exc:
            raise InputError(f"--params value {value!r} is not a number") from exc
    return out


def _sde_target(drift, params):
    try:
        if drift == "estexp":
            return ExpStretchedExponential(params["gamma"], params["eta"])
        if drift == "normal":
            return NormalModel(params["mu"], params["sigma"])
        if drift == "exp":
            return ShiftedExponential(params["rate"], params.get("y_min", 0.0))
        if drift == "truncnormal":
            return TruncatedNormal(params["mu"], params["sigma"], params["y_min"])
        if drift in ("mix2n", "mix3n"):
            m = int(drift[3])
            mu = tuple(params[f"mu{i+1}"] for i in range(m))
            sigma = tuple(params[f"sigma{i+1}"] for i in range(m))
            w = tuple(params[f"w{i+1}"] for i in range(m - 1))
            return NormalMixture(mu, sigma, w)
    except KeyError as exc:
        raise InputError(f"drift {drift!r} is missing parameter {exc}") from exc
    raise InputError(f"unknown drift {drift!r}")


def cmd_sde(args):
    target = _sde_target(args.drift, _parse_params(args.params))
    spec = (
        SdeSpec.for_target(target)
        if args.a is None
        else SdeSpec(target=target, diffusion_sq=args.a)
    )
    if args.check:
        worst = score_identity_check(spec)
        print(f"score identity max abs error: {worst:.3e}")
        check = stationary_check(
            spec,
            dt=args.dt,
            n_steps=args.steps,
            burn_in=args.burnin,
            thin=args.thin,
            seed=args.seed,
        )
        verdict = "pass" if check.passed else "FAIL"
        print(
            f"stationary KS = {check.ks_distance:.4f} "
            f"(threshold {check.threshold}, retained {check.n_retained}): {verdict}"
        )
        return 0 if check.passed else 3
    draws = simulate(
        spec, dt=args.dt, n_steps=args.steps, burn_in=args.burnin, thin=args.thin, seed=args.seed
    )
    if args.out:
        Path(args.out).write_text("".join(f"{v:.10g}\n" for v in draws))
        print(f"wrote {draws.size} retained log-scale draws to {args.out}")
    else:
        print(f"retained draws: {draws.size}")
        print(f"mean = {np.mean(draws):.6g}, sd = {np.std(draws, ddof=1):.6g}")
        qs = np.quantile(draws, [0.05, 0.5, 0.95])
        print(f"quantiles 5/50/95 = {qs[0]:.6g} / {qs[1]:.6g} / {qs[2]:.6g}")
    return 0


def cmd_report(args):
    cfg = PipelineConfig(
        seed=args.seed,
        column=_column(args.column),
        out_dir=args.out,
        gof_replicates=args.replicates,
        mixture_restarts=args.restarts,
        x_min=args.x_min,
        n_floor=args.n_floor,
        max_candidates=args.max_candidates,
        lnt_starts=args.lnt_starts,
        n_jobs=args.n_jobs,
        write_plots=not args.no_plots,
    )
    report = run_report(args.input, cfg)
    for stage, status in sorted(report["stages"].items()):
        print(f"{stage}: {status}")
    print(f"report written to {report['artifacts']['report']}")
    bad = [s for s, status in report["stages"].items() if status.startswith("error")]
    return 3 if bad else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sizedist",
        description="Fit, test, and compare heavy-tailed size distributions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="summary statistics for one CSV column")
    _add_common(p)
    p.set_defaults(fn=cmd_describe)

    p = sub.add_parser("fit", help="fit one model family")
    _add_common(p)
    p.add_argument("--model", required=True, choices=FULL_CHOICES + TAIL_CHOICES)
    p.add_argument("--x-min", type=float, default=None, help="tail cutoff for pareto/lnt")
    p.add_argument("--restarts", type=int, default=20, help="EM restarts for mixtures")
    p.add_argument("--lnt-starts", choices=("full", "light"), default="full")
    p.set_defaults(fn=cmd_fit)

    p = sub.add_parser("tail", help="select the power-law cutoff")
    _add_common(p)
    p.add_argument("--n-floor", type=int, default=50)
    p.add_argument("--max-candidates", type=int, default=2000)
    p.set_defaults(fn=cmd_tail)

    p = sub.add_parser("gof", help="parametric bootstrap goodness-of-fit test")
    _add_common(p)
    p.add_argument("--model", required=True, choices=FULL_CHOICES + TAIL_CHOICES)
    p.add_argument("--kind", choices=tuple(STATISTICS), default="ks")
    p.add_argument("--replicates", type=int, default=350)
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--lnt-starts", choices=("full", "light"), default="full")
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(fn=cmd_gof)

    p = sub.add_parser("compare", help="information criteria and Vuong comparison")
    _add_common(p)
    p.add_argument("--models", default=",".join(FULL_CHOICES))
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--lnt-starts", choices=("full", "light"), default="full")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sde", help="simulate a diffusion targeting a fitted log-size law")
    _add_common(p, with_input=False)
    p.add_argument(
        "--drift",
        required=True,
        choices=("estexp", "normal", "exp", "truncnormal", "mix2n", "mix3n"),
    )
    p.add_argument("--params", default="", help="comma-separated k=v pairs")
    p.add_argument("--a", type=float, default=None, help="squared diffusion coefficient")
    p.add_argument("--dt", type=float, default=0.02)
    p.add_argument("--steps", type=int, default=12_000_000)
    p.add_argument("--burnin", type=int, default=200_000)
    p.add_argument("--thin", type=int, default=128)
    p.add_argument("--check", action="store_true", help="run stationarity and score checks")
    p.add_argument("--out", default=None, help="write retained draws to this file")
    p.set_defaults(fn=cmd_sde)

    p = sub.add_parser("report", help="full batch analysis with JSON report")
    _add_common(p)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--replicates", type=int, default=350)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--x-min", type=float, default=None)
    p.add_argument("--n-floor", type=int, default=50)
    p.add_argument("--max-candidates", type=int, default=2000)
    p.add_argument("--lnt-starts", choices=("full", "light"), default="full")
    p.add_argument("--n-jobs", type=int, default=1)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(fn=cmd_report)

    return parser


def _subparsers(parser):
    return next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    ).choices


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "config", None):
            file_values = _read_config_file(args.config)
            # a key must be an option of at least one subcommand
            fresh = build_parser()
            all_dests = {
                action.dest
                for sub in _subparsers(fresh).values()
                for action in sub._actions
            }
            bad = sorted(set(file_values) - all_dests)
            if bad:
                raise InputError(f"config file sets unknown option(s): {', '.join(bad)}")
            # file values become parser defaults, so explicit flags still win
            command_dests = {a.dest for a in _subparsers(fresh)[args.command]._actions}
            _subparsers(fresh)[args.command].set_defaults(
                **{k: v for k, v in file_values.items() if k in command_dests}
            )
            args = fresh.parse_args(argv)
        return args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except SizedistError as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
