"""Command-line surface: simulate, run, fit, stability, report, compare, rerun.

Structured results are JSON, plot-data tables are CSV, and every command
writes a run manifest (full configuration + input checksum) next to its
main output so a run can be replayed byte-for-byte with ``rerun``.

Exit codes: 0 success (warnings included), 1 usage, 2 data/IO,
3 statistical/numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .cv import CvPlan, FixedData, FreshParabola, run_extremes
from .data import PreprocessSpec, dump_csv, load_csv, synthetic_parabola
from .diagnostics import (
    compare_models,
    histogram_with_fit,
    return_level_data,
    worst_case_quantile,
)
from .distributions import GevParams, GpdParams
from .errors import DataError, DegenerateSample, NumericError
from .fitting import (
    FitResult,
    bootstrap_ci,
    fit_gev_mle,
    fit_gpd_mle,
    gumbel_hypothesis_check,
)
from .models import MODEL_KINDS, ModelSpec
from .thresholds import StabilityOptions, default_threshold_grid, stability_curve, suggest_threshold

FORMAT_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _default_threads() -> int:
    return int(os.environ.get("EVTCV_THREADS", "1"))


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_manifest(command: str, params: dict, out: str, input_path=None):
    manifest = {
        "format_version": FORMAT_VERSION,
        "tool_version": __version__,
        "command": command,
        "params": params,
        "input_sha256": _sha256(input_path) if input_path else None,
    }
    _write_json(manifest, f"{out}.manifest.json")


def _params_dict(params) -> dict:
    if isinstance(params, GevParams):
        return {"xi": params.xi, "mu": params.mu, "sigma": params.sigma}
    return {"xi": params.xi, "sigma": params.sigma, "u": params.u}


def _fit_result_dict(fit: FitResult) -> dict:
    family = "gev" if isinstance(fit.params, GevParams) else "gpd"
    return {
        "family": family,
        "params": _params_dict(fit.params),
        "log_likelihood": fit.log_likelihood,
        "converged": fit.converged,
        "n_samples": fit.n_samples,
        "gumbel_flag": fit.gumbel_flag,
    }


def _ci_dict(ci) -> dict:
    return {
        "lower": ci.lower,
        "upper": ci.upper,
        "level": ci.level,
        "n_bootstrap": ci.n_bootstrap,
    }


def _floats(values) -> list:
    return [float(v) for v in np.asarray(values)]


# --- dataset flags shared by run/compare ---

def _add_data_flags(parser):
    parser.add_argument("--data", help="input CSV with a header row")
    parser.add_argument("--target", help="target column name (required with --data)")
    parser.add_argument("--drop-columns", default="", help="comma-separated columns to drop")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--no-normalize", action="store_true",
                        help="skip z-score normalization of the features")
    parser.add_argument("--synthetic", type=int, metavar="ROWS",
                        help="draw ROWS fresh synthetic parabola rows per repetition "
                             "instead of reading a file")


def _resolve_source(args):
    if (args.data is None) == (args.synthetic is None):
        raise _UsageError("exactly one of --data or --synthetic is required")
    if args.synthetic is not None:
        if args.synthetic < 2:
            raise _UsageError("--synthetic needs at least 2 rows per repetition")
        return FreshParabola(n_rows=args.synthetic), None
    if not args.target:
        raise _UsageError("--target is required with --data")
    spec = PreprocessSpec(
        target_column=args.target,
        drop_columns=tuple(c for c in args.drop_columns.split(",") if c),
        zscore_normalize=not args.no_normalize,
        delimiter=args.delimiter,
    )
    dataset, _ = load_csv(args.data, spec)
    return FixedData(dataset), args.data


def _extremes_dict(sample) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": sample.kind,
        "values": _floats(sample.values),
        "per_split_means": _floats(sample.per_split_means),
        "n_failed_splits": sample.n_failed_splits,
        "n_total_evaluations": sample.n_total_evaluations,
        "threshold": sample.threshold,
        "mean_metric": sample.mean_metric,
        "dataset_role": sample.dataset_role,
        "source": sample.source,
        "model": {"kind": sample.model.kind, "hyperparams": sample.model.hyperparams},
        "plan": sample.plan.to_dict(),
    }


# --- commands ---

def _cmd_simulate(args):
    if args.n < 1:
        raise _UsageError("--n must be >= 1")
    dataset = synthetic_parabola(args.n, np.random.default_rng(args.seed))
    dump_csv(dataset, args.out)
    _write_manifest("simulate", {"n": args.n, "seed": args.seed, "out": args.out}, args.out)
    print(f"wrote {args.n} rows to {args.out}")
    return EXIT_OK


def _cmd_run(args):
    source, input_path = _resolve_source(args)
    mode = "block_maxima" if args.mode == "blocking" else "threshold"
    if mode == "threshold" and args.u is None:
        raise _UsageError("--u is required with --mode threshold")
    plan = CvPlan(
        n_repetitions=args.n_reps,
        train_fraction=args.fraction,
        error_kind=args.error_kind,
        mode=mode,
        threshold=args.u,
        seed=args.seed,
    )
    spec = ModelSpec(args.model)
    sample = run_extremes(source, spec, plan, threads=args.threads)["validation"]
    _write_json(_extremes_dict(sample), args.out)
    _write_manifest("run", _run_params(args), args.out, input_path)
    print(
        f"collected {sample.values.size} {sample.kind} values over "
        f"{plan.n_repetitions} repetitions ({sample.n_failed_splits} failed); "
        f"mean metric {sample.mean_metric:.4g}"
    )
    return EXIT_OK


def _run_params(args) -> dict:
    return {
        "data": args.data,
        "target": args.target,
        "drop_columns": args.drop_columns,
        "delimiter": args.delimiter,
        "no_normalize": args.no_normalize,
        "synthetic": args.synthetic,
        "model": args.model,
        "mode": args.mode,
        "u": args.u,
        "n_reps": args.n_reps,
        "fraction": args.fraction,
        "error_kind": args.error_kind,
        "seed": args.seed,
        "threads": args.threads,
        "out": args.out,
    }


def _load_extremes(path) -> dict:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON ({exc})") from None
    if "values" not in payload:
        raise DataError(f"{path}: missing 'values'")
    return payload


def _cmd_fit(args):
    payload = _load_extremes(args.extremes)
    values = np.asarray(payload["values"], dtype=float)
    metadata = {
        "model": payload.get("model"),
        "error_kind": payload.get("plan", {}).get("error_kind"),
        "mode": payload.get("plan", {}).get("mode"),
        "mean_metric": payload.get("mean_metric"),
        "kind": payload.get("kind"),
        "threshold": payload.get("threshold"),
    }
    if args.family == "gpd":
        u = args.u if args.u is not None else payload.get("threshold")
        if u is None:
            raise _UsageError("--u is required for a GPD fit when the extremes "
                              "file has no threshold")
        def fit_fn(sample):
            return fit_gpd_mle(sample, u)
    else:
        def fit_fn(sample):
            return fit_gev_mle(sample)

    try:
        fit = fit_fn(values)
    except DegenerateSample as exc:
        result = {
            "format_version": FORMAT_VERSION,
            "family": args.family,
            "status": "n/a",
            "cause": "DegenerateSample",
            "message": str(exc),
            "n_samples": int(values.size),
            "values": _floats(values),
            "metadata": metadata,
        }
        _write_json(result, args.out)
        _write_manifest("fit", _fit_params(args), args.out, args.extremes)
        print(
            "warning: sample is degenerate (all values identical); "
            "recorded an n/a result",
            file=sys.stderr,
        )
        return EXIT_OK

    cis = None
    boot_info = None
    check_info = None
    if args.bootstrap > 0:
        boot = bootstrap_ci(values, fit_fn, n_bootstrap=args.bootstrap,
                            level=args.level, seed=args.seed)
        cis = {name: _ci_dict(ci) for name, ci in boot.intervals.items()}
        boot_info = {
            "n_requested": boot.n_requested,
            "n_failed": boot.n_failed,
            "seed": args.seed,
            "level": args.level,
        }
        if args.family == "gev":
            verdict = gumbel_hypothesis_check(values, fit, boot["xi"])
            fit = verdict.gev_fit
            check_info = {
                "preferred": verdict.preferred,
                "reason": verdict.reason,
                "lr_statistic": verdict.lr_statistic,
                "critical_value": verdict.critical_value,
                "gumbel_params": (
                    _params_dict(verdict.gumbel_fit.params)
                    if verdict.gumbel_fit else None
                ),
            }

    result = {
        "format_version": FORMAT_VERSION,
        "status": "ok",
        **_fit_result_dict(fit),
        "confidence_intervals": cis,
        "bootstrap": boot_info,
        "gumbel_check": check_info,
        "values": _floats(values),
        "metadata": metadata,
    }
    _write_json(result, args.out)
    _write_manifest("fit", _fit_params(args), args.out, args.extremes)
    summary = ", ".join(f"{k}={v:.4g}" for k, v in _params_dict(fit.params).items())
    print(f"fitted {args.family}: {summary} (converged={fit.converged})")
    return EXIT_OK


def _fit_params(args) -> dict:
    return {
        "extremes": args.extremes,
        "family": args.family,
        "u": args.u,
        "bootstrap": args.bootstrap,
        "level": args.level,
        "seed": args.seed,
        "out": args.out,
    }


def _cmd_stability(args):
    payload = _load_extremes(args.errors)
    errors = np.asarray(payload["values"], dtype=float)
    if args.grid:
        grid = np.asarray(sorted(float(v) for v in args.grid.split(",")))
    else:
        grid = default_threshold_grid(errors, size=args.grid_size,
                                      lo=args.grid_lo, hi=args.grid_hi)
    options = StabilityOptions(n_bootstrap=args.bootstrap, level=args.level,
                               seed=args.seed, min_fit_n=args.min_exceedances)
    curve = stability_curve(errors, grid, options)
    suggestion = suggest_threshold(curve)

    with open(args.out, "w") as fh:
        fh.write("u,xi,xi_lo,xi_hi,sigma,n_exc\n")
        for i in range(curve.thresholds.size):
            u = float(curve.thresholds[i])
            if curve.valid[i]:
                ci = curve.xi_cis[i]
                fh.write(
                    f"{u!r},{float(curve.xi_estimates[i])!r},"
                    f"{ci.lower!r},{ci.upper!r},{float(curve.sigma_estimates[i])!r},"
                    f"{int(curve.n_exceedances[i])}\n"
                )
            else:
                fh.write(f"{u!r},,,,,{int(curve.n_exceedances[i])}\n")
    _write_json(
        {
            "format_version": FORMAT_VERSION,
            "suggested_u": suggestion.u,
            "stable": suggestion.stable,
            "rationale": suggestion.rationale,
        },
        f"{args.out}.suggestion.json",
    )
    _write_manifest("stability", _stability_params(args), args.out, args.errors)
    print(f"suggested threshold u={suggestion.u:.6g} (stable={suggestion.stable})")
    return EXIT_OK


def _stability_params(args) -> dict:
    return {
        "errors": args.errors,
        "grid": args.grid,
        "grid_size": args.grid_size,
        "grid_lo": args.grid_lo,
        "grid_hi": args.grid_hi,
        "bootstrap": args.bootstrap,
        "level": args.level,
        "seed": args.seed,
        "min_exceedances": args.min_exceedances,
        "out": args.out,
    }


def _fit_from_payload(payload) -> FitResult:
    params = payload["params"]
    if payload["family"] == "gev":
        p = GevParams(xi=params["xi"], mu=params["mu"], sigma=params["sigma"])
    else:
        p = GpdParams(xi=params["xi"], sigma=params["sigma"], u=params["u"])
    return FitResult(
        params=p,
        log_likelihood=payload["log_likelihood"],
        converged=payload["converged"],
        n_samples=payload["n_samples"],
        gumbel_flag=payload.get("gumbel_flag", "not_applicable"),
    )


def _cmd_report(args):
    try:
        with open(args.fit) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.fit}: not valid JSON ({exc})") from None
    if payload.get("status") == "n/a":
        raise NumericError(
            "the fit file records an n/a result "
            f"(cause: {payload.get('cause')}); nothing to report"
        )
    fit = _fit_from_payload(payload)
    values = np.asarray(payload["values"], dtype=float)
    metadata = payload.get("metadata") or {}

    confidences = [float(c) for c in args.confidence.split(",") if c]
    if not confidences:
        confidences = [0.90, 0.95, 0.99]
    context = {
        "model": (metadata.get("model") or {}).get("kind"),
        "error_kind": metadata.get("error_kind"),
        "mode": metadata.get("mode"),
    }
    statements = [worst_case_quantile(fit, c, context) for c in confidences]
    levels = return_level_data(values, fit, n_points=args.points)
    mean_metric = metadata.get("mean_metric")

    class _WithMean:
        def __init__(self, values, mean_metric):
            self.values = values
            self.mean_metric = mean_metric

    hist = histogram_with_fit(_WithMean(values, mean_metric), fit, n_bins=args.bins)

    report = {
        "format_version": FORMAT_VERSION,
        "family": payload["family"],
        "params": payload["params"],
        "converged": fit.converged,
        "gumbel_flag": fit.gumbel_flag,
        "statements": [
            {"confidence": s.confidence, "value": s.value, "text": s.text}
            for s in statements
        ],
        "return_levels": {
            "probabilities": _floats(levels.probabilities),
            "theoretical": _floats(levels.theoretical_quantiles),
            "empirical": _floats(levels.empirical_quantiles),
        },
        "histogram": {
            "bin_centers": _floats(hist.bin_centers),
            "bin_widths": _floats(hist.bin_widths),
            "empirical_density": _floats(hist.empirical_density),
            "fitted_density": _floats(hist.fitted_density),
            "mean_metric": mean_metric,
        },
        "confidence_intervals": payload.get("confidence_intervals"),
        "gumbel_check": payload.get("gumbel_check"),
    }
    _write_json(report, f"{args.out}.json")

    lines = [f"worst-case error report ({payload['family']})", ""]
    lines.append("parameters: " + ", ".join(
        f"{k}={v:.6g}" for k, v in payload["params"].items()
    ))
    if payload.get("confidence_intervals"):
        for name, ci in sorted(payload["confidence_intervals"].items()):
            lines.append(
                f"  {name}: [{ci['lower']:.6g}, {ci['upper']:.6g}] "
                f"(level {ci['level']:.0%}, {ci['n_bootstrap']} replicates)"
            )
    lines.append("")
    for s in statements:
        lines.append(f"- {s.text}")
    if mean_metric is not None:
        lines.append(f"- mean metric over splits: {mean_metric:.4g}")
    if payload.get("gumbel_check"):
        check = payload["gumbel_check"]
        lines.append(
            f"- light-tail check: preferred={check['preferred']} ({check['reason']})"
        )
    lines.append("")
    lines.append("return levels (probability, empirical, theoretical):")
    for i in range(len(levels.probabilities)):
        lines.append(
            f"  {levels.probabilities[i]:.4f}  "
            f"{levels.empirical_quantiles[i]:.6g}  "
            f"{levels.theoretical_quantiles[i]:.6g}"
        )
    text = "\n".join(lines) + "\n"
    with open(f"{args.out}.txt", "w") as fh:
        fh.write(text)
    _write_manifest("report", _report_params(args), args.out, args.fit)
    print(text, end="")
    return EXIT_OK


def _report_params(args) -> dict:
    return {
        "fit": args.fit,
        "confidence": args.confidence,
        "bins": args.bins,
        "points": args.points,
        "out": args.out,
    }


def _cmd_compare(args):
    source, input_path = _resolve_source(args)
    plan = CvPlan(
        n_repetitions=args.n_reps,
        train_fraction=args.fraction,
        error_kind=args.error_kind,
        mode="block_maxima",
        seed=args.seed,
    )
    kinds = [k for k in args.models.split(",") if k]
    for kind in kinds:
        if kind not in MODEL_KINDS:
            raise _UsageError(f"unknown model kind {kind!r}")
    specs = [ModelSpec(kind) for kind in kinds]
    rows = compare_models(source, specs, plan, threads=args.threads)

    json_rows = []
    for row in rows:
        json_rows.append({
            "model": row.model.kind,
            "dataset_role": row.dataset_role,
            "n_values": int(row.extremes.values.size),
            "five_number": dict(zip(("min", "q1", "median", "q3", "max"), row.five_number)),
            "mean_metric": row.mean_metric,
            "n_failed_splits": row.extremes.n_failed_splits,
            "fit": _fit_result_dict(row.fit) if row.fit else None,
            "fit_error": row.fit_error,
        })
    _write_json(
        {"format_version": FORMAT_VERSION, "plan": plan.to_dict(), "rows": json_rows},
        f"{args.out}.json",
    )

    with open(f"{args.out}.csv", "w") as fh:
        fh.write("model,role,n_values,min,q1,median,q3,max,mean_metric,status,"
                 "xi,mu,sigma,log_likelihood\n")
        for row in rows:
            five = ",".join(repr(v) for v in row.five_number)
            if row.fit is not None:
                p = row.fit.params
                tail = f"ok,{p.xi!r},{p.mu!r},{p.sigma!r},{row.fit.log_likelihood!r}"
            else:
                tail = "n/a,,,,"
            fh.write(
                f"{row.model.kind},{row.dataset_role},{row.extremes.values.size},"
                f"{five},{row.mean_metric!r},{tail}\n"
            )

    for row in rows:
        path = f"{args.out}.violin.{row.model.kind}.{row.dataset_role}.csv"
        with open(path, "w") as fh:
            fh.write("value\n")
            for v in row.extremes.values:
                fh.write(f"{float(v)!r}\n")

    _write_manifest("compare", _compare_params(args), args.out, input_path)
    n_na = sum(1 for row in rows if row.fit is None)
    print(f"compared {len(kinds)} models ({len(rows)} rows, {n_na} n/a fits); "
          f"outputs at {args.out}.csv/.json")
    return EXIT_OK


def _compare_params(args) -> dict:
    return {
        "data": args.data,
        "target": args.target,
        "drop_columns": args.drop_columns,
        "delimiter": args.delimiter,
        "no_normalize": args.no_normalize,
        "synthetic": args.synthetic,
        "models": args.models,
        "n_reps": args.n_reps,
        "fraction": args.fraction,
        "error_kind": args.error_kind,
        "seed": args.seed,
        "threads": args.threads,
        "out": args.out,
    }


def _cmd_rerun(args):
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.manifest}: not valid JSON ({exc})") from None
    command = manifest.get("command")
    params = dict(manifest.get("params") or {})
    if command not in _REPLAYABLE:
        raise DataError(f"manifest names unknown command {command!r}")
    if args.out is not None:
        params["out"] = args.out
    if args.threads is not None and "threads" in params:
        params["threads"] = args.threads
    argv = [command]
    for key, value in params.items():
        if value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    return _dispatch(argv)


_REPLAYABLE = {"simulate", "run", "fit", "stability", "report", "compare"}


def build_parser() -> _Parser:
    parser = _Parser(prog="evtcv", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a synthetic parabola dataset as CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("run", help="collect extreme errors via Monte-Carlo CV")
    _add_data_flags(p)
    p.add_argument("--model", choices=MODEL_KINDS, default="linear")
    p.add_argument("--mode", choices=("blocking", "threshold"), default="blocking")
    p.add_argument("--u", type=float, help="threshold for --mode threshold")
    p.add_argument("--n-reps", type=int, default=1000)
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--error-kind", choices=("absolute", "squared"), default="absolute")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("fit", help="fit a tail distribution to collected extremes")
    p.add_argument("--extremes", required=True)
    p.add_argument("--family", choices=("gev", "gpd"), required=True)
    p.add_argument("--u", type=float, help="threshold override for GPD fits")
    p.add_argument("--bootstrap", type=int, default=1000,
                   help="bootstrap replicates for CIs (0 disables)")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("stability", help="shape-stability curve over candidate thresholds")
    p.add_argument("--errors", required=True, help="extremes/errors JSON (uses 'values')")
    p.add_argument("--grid", help="comma-separated thresholds (default: quantile grid)")
    p.add_argument("--grid-size", type=int, default=20)
    p.add_argument("--grid-lo", type=float, default=0.70)
    p.add_argument("--grid-hi", type=float, default=0.99)
    p.add_argument("--bootstrap", type=int, default=200)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-exceedances", type=int, default=20)
    p.add_argument("--out", required=True, help="curve CSV path")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("report", help="render worst-case quantile statements and fit diagnostics")
    p.add_argument("--fit", required=True, help="fit JSON from the fit command")
    p.add_argument("--confidence", default="0.9,0.95,0.99")
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--out", required=True, help="output base path (.json/.txt)")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("compare", help="per-model extreme-error comparison table")
    _add_data_flags(p)
    p.add_argument("--models", default=",".join(MODEL_KINDS))
    p.add_argument("--n-reps", type=int, default=1000)
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--error-kind", choices=("absolute", "squared"), default="absolute")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--out", required=True, help="output base path")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("rerun", help="replay a command from its manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="override the recorded output path")
    p.add_argument("--threads", type=int, help="override the recorded thread cap")
    p.set_defaults(func=_cmd_rerun)

    return parser


def _dispatch(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def main(argv=None) -> int:
    try:
        return _dispatch(sys.argv[1:] if argv is None else argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
