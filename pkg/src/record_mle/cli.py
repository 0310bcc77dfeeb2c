"""Command-line front end.

Usage::

    record-mle extract-records data.csv --column value --out records.csv
    record-mle estimate --family power --input records.csv --at 0.3,0.5
    record-mle mse-curve --family power --theta 1 --estimand theta --n 3:30 \\
        --reps 20000 --out fig --format csv,svg
    record-mle verify --section equal-in-distribution
    record-mle findings --out findings.json

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 domain or estimation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, analytic
from .errors import RecordMLEError
from .estimators import mle_theta_records, mle_theta_sample, plugin_cdf, plugin_pdf
from .family import get_member
from .montecarlo import config_digest
from .records import RecordSequence, extract_lower_records
from .reports import curve_csv, curve_json, curve_svg, mse_curve, parse_estimand
from .verification import SECTIONS, SECTION_ALIASES, default_seed, resolve_section, run_checks

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


class InputError(Exception):
    """Bad file, column or cell; maps to exit code 2."""


def _read_column(path: str, column: str) -> list[float]:
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise InputError(f"column {column!r} not found in {path}")
        values = []
        for row_no, row in enumerate(reader, start=1):
            cell = (row.get(column) or "").strip()
            try:
                values.append(float(cell))
            except ValueError:
                raise InputError(f"row {row_no}: non-numeric value {cell!r} in column {column!r}") from None
    if not values:
        raise InputError(f"{path} has no data rows")
    return values


def _read_records_or_sample(path: str):
    try:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    fields = [h.strip() for h in header or []]
    if fields == ["time", "value"]:
        times = [int(t) for t in _read_column(path, "time")]
        values = _read_column(path, "value")
        try:
            return RecordSequence(tuple(values), tuple(times))
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from exc
    if fields == ["value"]:
        return _read_column(path, "value")
    raise InputError(f"{path}: expected header 'value' (sample) or 'time,value' (records)")


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _parse_sizes(text: str) -> list[int]:
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                lo, hi, step = parts[0], parts[1], 1
            elif len(parts) == 3:
                lo, hi, step = parts
            else:
                raise ValueError
            if step < 1 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",")]
    except ValueError:
        raise InputError(f"invalid size range {text!r}; use N, A:B, A:B:STEP or a comma list") from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"invalid number list {text!r}") from None


def _member(args):
    try:
        return get_member(args.family, args.alpha)
    except (ValueError, RecordMLEError) as exc:
        raise InputError(str(exc)) from exc


def cmd_extract_records(args) -> int:
    values = _read_column(args.input, args.column)
    rec = extract_lower_records(values)
    lines = ["time,value"] + [f"{t},{v!r}" for t, v in zip(rec.times, rec.values)]
    _write("\n".join(lines) + "\n", args.out)
    print(f"m={rec.m} n={rec.source_n}", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args) -> int:
    member = _member(args)
    data = _read_records_or_sample(args.input)
    at = _parse_floats(args.at) if args.at else []
    if isinstance(data, RecordSequence):
        est = mle_theta_records(member, data)
    else:
        est = mle_theta_sample(member, data)
    plug = [{"x": x, "cdf": plugin_cdf(member, est, x), "pdf": plugin_pdf(member, est, x)} for x in at]
    config = {"command": "estimate", "family": member.label, "input": args.input, "at": at}
    doc = {
        "config": config,
        "results": {**est.as_dict(), "plugin": plug},
        "warnings": [],
        "digest": config_digest(config),
    }
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def _output_path(out: str, fmt: str) -> Path:
    p = Path(out)
    return p.with_suffix("." + fmt) if p.suffix else p.with_name(p.name + "." + fmt)


def cmd_mse_curve(args) -> int:
    member = _member(args)
    try:
        estimand = parse_estimand(args.estimand)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    sizes = _parse_sizes(args.n)
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    unknown = set(formats) - {"csv", "json", "svg"}
    if unknown:
        raise InputError(f"unknown format(s): {', '.join(sorted(unknown))}")
    if args.out is None and (len(formats) != 1 or formats[0] == "svg"):
        raise InputError("--out is required for svg output or multiple formats")
    seed = default_seed() if args.seed is None else args.seed
    try:
        result = mse_curve(member, args.theta, estimand, sizes, args.reps, seed, args.source, args.workers)
    except ValueError as exc:
        if isinstance(exc, RecordMLEError):
            raise
        raise InputError(str(exc)) from exc
    render = {
        "csv": curve_csv,
        "json": curve_json,
        "svg": lambda r: curve_svg(r, log_scale=args.log_scale),
    }
    for fmt in formats:
        text = render[fmt](result)
        if args.out is None:
            sys.stdout.write(text)
        else:
            _output_path(args.out, fmt).write_text(text)
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.section != "all":
        try:
            resolve_section(args.section)
        except KeyError:
            names = sorted(set(SECTIONS) | set(SECTION_ALIASES))
            raise InputError(f"unknown section {args.section!r}; choose from all, {', '.join(names)}") from None
    seed = default_seed() if args.seed is None else args.seed
    results = run_checks(args.section, seed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.section:<24} {r.name}", file=sys.stderr)
    doc = {
        "config": {"command": "verify", "section": args.section, "seed": seed},
        "results": [r.as_dict() for r in results],
        "warnings": [],
        "digest": config_digest({"section": args.section, "seed": seed}),
        "passed": all(r.passed for r in results),
    }
    _write(json.dumps(doc, indent=2, default=float) + "\n", args.out)
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


def cmd_findings(args) -> int:
    grid = _parse_floats(args.theta_grid)
    if not grid or any(not (t > 0 and math.isfinite(t)) for t in grid):
        raise InputError("theta grid must contain positive numbers")
    sizes = _parse_sizes(args.sample_sizes)
    report = analytic.records_vs_sample_findings(grid, args.record_m, sizes)
    config = {"command": "findings", "theta_grid": grid, "record_m": args.record_m, "sample_sizes": sizes}
    doc = {
        "config": config,
        "results": report,
        "warnings": report.pop("warnings"),
        "digest": config_digest(config),
    }
    _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="record-mle",
        description="ML estimation from samples and lower records for F(x)=exp(-B(theta)A(x)).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_family(p):
        p.add_argument("--family", required=True, choices=["power", "gumbel", "frechet"])
        p.add_argument("--alpha", type=float, default=None, help="Frechet shape")

    p = sub.add_parser("extract-records", help="extract lower records from a CSV column")
    p.add_argument("input")
    p.add_argument("--column", default="value")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_extract_records)

    p = sub.add_parser("estimate", help="MLE of theta from a sample or records file")
    add_family(p)
    p.add_argument("--input", required=True, help="CSV with header 'value' or 'time,value'")
    p.add_argument("--at", default=None, help="comma-separated x values for plug-in CDF/PDF")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("mse-curve", help="analytic and Monte Carlo MSE over n")
    add_family(p)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--estimand", default="theta", help="theta | exp-theta | pdf@X | cdf@X")
    p.add_argument("--n", "--m", dest="n", default="3:30", help="N, A:B, A:B:STEP or comma list")
    p.add_argument("--reps", type=int, default=10_000, help="0 skips the simulation")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--source", choices=["sample", "records"], default="sample")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output path; extension set per format")
    p.add_argument("--format", default="csv", help="comma list of csv, json, svg")
    p.add_argument("--log-scale", action="store_true")
    p.set_defaults(func=cmd_mse_curve)

    p = sub.add_parser("verify", help="run the verification checks")
    p.add_argument("--section", default="all")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("findings", help="records-vs-sample comparison of formal exp(theta) MSE series")
    p.add_argument("--theta-grid", default="0.1,0.25,0.5,0.75,1,1.5,2")
    p.add_argument("--record-m", type=int, default=2)
    p.add_argument("--sample-sizes", default="5:8")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_findings)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RecordMLEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
