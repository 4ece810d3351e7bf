"""Command-line driver: parse, classify, report.

Exit codes: 0 on success, 1 when the input failed to parse or validate
(diagnostics go to the error stream as ``file:line:col: message``), 2 for
bad command-line usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .classify import ClassificationError, classify_corpus, parse_assumptions
from .ir import IRError, TemplateGraph, load_ir
from .parser import parse_corpus
from .report import build_report, explain, render_explanation, render_report

__all__ = ["main", "run_cli"]


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalimm",
        description="Static immutability analyzer for a Scala-like subset",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    analyze = sub.add_parser(
        "analyze",
        help="classify sources (or an IR document) and print report tables",
    )
    analyze.add_argument(
        "paths",
        nargs="+",
        help="source files or directories (searched for *.scala), "
        "or one IR document with --ir",
    )
    analyze.add_argument(
        "--ir",
        action="store_true",
        help="treat the single path as a serialized template-graph document",
    )
    analyze.add_argument(
        "--assume",
        metavar="FILE",
        help="assumption list: one 'qualified-name verdict' per line",
    )
    analyze.add_argument(
        "--format",
        choices=("text", "csv", "json"),
        default="text",
        help="report format (default: text)",
    )
    analyze.add_argument(
        "--explain",
        metavar="NAME",
        help="print one template's verdict and causes instead of the tables",
    )
    analyze.add_argument(
        "--out",
        metavar="PATH",
        help="write the output to a file instead of standard output",
    )
    return parser


def _fail(message: str) -> int:
    print(message, file=sys.stderr)
    return 1


def _load_graph(args: argparse.Namespace) -> TemplateGraph | int:
    paths = [Path(p) for p in args.paths]
    if args.ir:
        if len(paths) != 1:
            print(
                "error: --ir takes exactly one document path", file=sys.stderr
            )
            return 2
        try:
            data = paths[0].read_bytes()
        except OSError as exc:
            return _fail(f"{paths[0]}: {exc.strerror or exc}")
        try:
            return load_ir(data)
        except IRError as exc:
            return _fail(f"{paths[0]}: {exc}")

    files: list[Path] = []
    for path in paths:
        if path.is_dir():
            files.extend(sorted(path.rglob("*.scala")))
        elif path.is_file():
            files.append(path)
        else:
            return _fail(f"{path}: no such file or directory")
    sources: list[tuple[str, str]] = []
    for file in files:
        try:
            text = file.read_bytes().decode("utf-8")
        except OSError as exc:
            return _fail(f"{file}: {exc.strerror or exc}")
        except UnicodeDecodeError as exc:
            return _fail(f"{file}: not valid UTF-8 ({exc.reason})")
        sources.append((str(file), text))
    corpus = parse_corpus(sources)
    if corpus.diagnostics:
        for diagnostic in corpus.diagnostics:
            print(diagnostic, file=sys.stderr)
        return 1
    assert corpus.graph is not None
    return corpus.graph


def _run_analyze(args: argparse.Namespace) -> int:
    graph = _load_graph(args)
    if isinstance(graph, int):
        return graph

    assumptions = None
    if args.assume is not None:
        try:
            text = Path(args.assume).read_bytes().decode("utf-8")
        except OSError as exc:
            return _fail(f"{args.assume}: {exc.strerror or exc}")
        except UnicodeDecodeError as exc:
            return _fail(f"{args.assume}: not valid UTF-8 ({exc.reason})")
        try:
            assumptions = parse_assumptions(text)
        except ValueError as exc:
            return _fail(f"{args.assume}: {exc}")

    try:
        result = classify_corpus(graph, assumptions)
    except ClassificationError as exc:
        return _fail(str(exc))

    if args.explain is not None:
        try:
            explanation = explain(result, args.explain)
        except KeyError:
            print(
                f"error: unknown template name {args.explain!r}",
                file=sys.stderr,
            )
            return 2
        output = (render_explanation(explanation) + "\n").encode("utf-8")
    else:
        output = render_report(build_report(result, graph), args.format)

    if args.out is not None:
        try:
            Path(args.out).write_bytes(output)
        except OSError as exc:
            return _fail(f"{args.out}: {exc.strerror or exc}")
    else:
        sys.stdout.write(output.decode("utf-8"))
    return 0


def run_cli(argv: list[str]) -> int:
    """Run the command line and return its exit code instead of exiting."""
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    return _run_analyze(args)


def main() -> None:
    raise SystemExit(run_cli(sys.argv[1:]))
