"""Command-line driver.

Exit status: 0 when the verdict is pass (or unverifiable), 1 on a fail
verdict, 2 on usage, file or parse errors.

Construction subcommands write the resulting model to ``-o`` and the
report to stdout; without ``-o`` the model goes to stdout and the report
to stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .algebroid import check_lie_algebroid, check_weighted_algebroid
from .atlas import truncate_to_degree
from .errors import GradalError, InvariantViolation
from .linearise import compare_models, holonomic_embedding, linearise, parse_correspondence, total_linearise
from .modelio import dump_model, read_model
from .multigraded import check_compatibility
from .prolong import cotangent_chart_model, higher_tangent, tangent_lift
from .report import FAIL, INFO, PASS, Report
from .validation import validate_model

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def emit_report(report: Report, fmt: str = "text", meta: dict | None = None) -> bytes:
    text = report.to_json(meta) if fmt == "json" else report.to_text(meta)
    return text.encode("utf-8")


def _load(path: str):
    try:
        return read_model(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except IsADirectoryError:
        raise UsageError(f"{path}: is a directory") from None
    except GradalError as exc:
        raise UsageError(f"{os.path.basename(path)}:{exc}") from None


# ---------------------------------------------------------------------------
# subcommands; each returns (report, model or None)


def _construction(build):
    def run(args):
        m = _load(args.model)
        out = build(m, args)
        report = validate_model(out, f"{args.command} {os.path.basename(args.model)}")
        return report, out

    return run


def cmd_validate(args):
    m = _load(args.model)
    return validate_model(m, os.path.basename(args.model)), None


def cmd_embed(args):
    m = _load(args.model)
    report = Report(f"embed {os.path.basename(args.model)}")
    try:
        emb = holonomic_embedding(m)
    except InvariantViolation as exc:
        report.add("intertwining", FAIL, "model", "holonomic embedding does not intertwine transitions")
        if getattr(exc, "report", None) is not None:
            report.extend(exc.report)
        return report, None
    report.extend(emb.report)
    from .dsl import format_expression

    for chart, binds in emb.bindings.items():
        order = m.chart(chart).names
        shown = ", ".join(f"{n} = {format_expression(e, order)}" for n, e in binds.items())
        report.add("embedding", INFO, chart, shown)
    return report, None


def cmd_check_double(args):
    m = _load(args.model)
    report = Report(f"check-double {os.path.basename(args.model)}")
    if m.multiplicity != 2:
        report.add("double", FAIL, "model", f"expected 2 gradings, found {m.multiplicity}")
        return report, None
    report.extend(check_compatibility(m))
    for i, d in enumerate(m.grading_degrees):
        if d <= 1:
            report.add("linear", PASS, f"grading {i}")
        else:
            report.add("linear", FAIL, f"grading {i}", f"degree {d} exceeds 1")
    return report, None


def cmd_check_algebroid(args):
    m = _load(args.model)
    if not m.algebroids:
        raise UsageError(f"{os.path.basename(args.model)}: no algebroid blocks")
    report = Report(f"check-algebroid {os.path.basename(args.model)}")
    defs = m.definitions
    for a in m.algebroids:
        report.extend(check_lie_algebroid(a, defs))
        report.extend(check_weighted_algebroid(a, None, defs))
    return report, None


def cmd_compare(args):
    m1, m2 = _load(args.model), _load(args.other)
    try:
        corr = parse_correspondence(Path(args.renaming).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"{args.renaming}: no such file") from None
    except (ValueError, GradalError) as exc:
        raise UsageError(f"{os.path.basename(args.renaming)}: {exc}") from None
    report = compare_models(m1, m2, corr)
    report.subject = f"compare {os.path.basename(args.model)} {os.path.basename(args.other)}"
    return report, None


COMMANDS = {
    "validate": cmd_validate,
    "truncate": _construction(lambda m, a: truncate_to_degree(m, a.degree, a.grading)),
    "higher-tangent": _construction(lambda m, a: higher_tangent(m, a.k)),
    "lift-tangent": _construction(lambda m, a: tangent_lift(m)),
    "cotangent-weights": _construction(lambda m, a: cotangent_chart_model(m)),
    "linearise": _construction(lambda m, a: linearise(m, a.grading).model),
    "embed": cmd_embed,
    "total-linearise": _construction(lambda m, a: total_linearise(m)),
    "check-double": cmd_check_double,
    "check-algebroid": cmd_check_algebroid,
    "compare": cmd_compare,
}

CONSTRUCTIONS = {"truncate", "higher-tangent", "lift-tangent", "cotangent-weights", "linearise", "total-linearise"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradal", description="Symbolic checks and constructions for graded bundles.")
    parser.add_argument("--version", action="version", version=f"gradal {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("model", help="model file in gradal v1 format")
        p.add_argument("-o", "--output", help="write the resulting model (constructions) or the report here")
        p.add_argument("--format", choices=("text", "json"), default="text", help="report format")
        return p

    add("validate", "validate a model")
    p = add("truncate", "forget coordinates above a degree")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--grading", type=int, default=None, help="measure weights in one grading")
    p = add("higher-tangent", "k-th order tangent bundle of a base model")
    p.add_argument("-k", type=int, required=True)
    add("lift-tangent", "tangent lift, appending a linear grading")
    add("cotangent-weights", "bi-weights of the cotangent bundle as a one-chart model")
    p = add("linearise", "linearisation with respect to one grading")
    p.add_argument("--grading", type=int, default=None)
    add("embed", "check the holonomic embedding into the linearisation")
    add("total-linearise", "iterate linearisation down to a k-fold vector bundle")
    add("check-double", "check a two-graded model is a double vector bundle")
    add("check-algebroid", "check algebroid blocks")
    p = add("compare", "compare two models under a coordinate renaming")
    p.add_argument("other", help="second model file")
    p.add_argument("--renaming", required=True, help="file of 'old -> new' or 'old -> q*new' lines")
    return parser


def _write(stream, data: bytes) -> None:
    stream.buffer.write(data) if hasattr(stream, "buffer") else stream.write(data.decode("utf-8"))
    stream.flush()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    for attr in ("degree", "k"):
        value = getattr(args, attr, None)
        if value is not None and value < 0:
            print(f"gradal: --{attr} must be non-negative", file=sys.stderr)
            return EXIT_USAGE
    try:
        report, model = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gradal: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GradalError as exc:
        print(f"gradal: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data = emit_report(report, args.format)
    if args.command in CONSTRUCTIONS:
        text = dump_model(model).encode("utf-8")
        if args.output:
            Path(args.output).write_bytes(text)
            _write(sys.stdout, data)
        else:
            _write(sys.stdout, text)
            _write(sys.stderr, data)
    elif args.output:
        Path(args.output).write_bytes(data)
    else:
        _write(sys.stdout, data)
    return EXIT_FAIL if report.verdict == FAIL else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
