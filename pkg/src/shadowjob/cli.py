"""Command-line front end.

Exit status: 0 on success, 1 when the input fails validation, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .classify import class_of, classify_message, taxonomy_csv
from .corpus import IngestError, count_summary, ingest
from .diffparse import PatchParseError
from .logparse import normalize_message
from .pipeline import analyze_store, rerender, write_analysis
from .report import ReportOptions
from .simulate import ScenarioError, ScenarioSpec, generate

log = logging.getLogger("shadowjob")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


def _report_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output directory for report.json and CSVs")
    p.add_argument("--top-k", type=int, default=4, help="number of most frequent error types to correlate (default 4)")
    p.add_argument("--normalize-time", action="store_true", help="min-max scale resolution times to [0,1] in summaries")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shadowjob", description="CI compilation-error diagnostics")
    parser.add_argument("--version", action="version", version=f"shadowjob {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest-check", help="validate a corpus and print counts")
    p.add_argument("--input", required=True, help="corpus directory (builds.jsonl, logs/, patches/)")

    p = sub.add_parser("analyze", help="run the full analysis and write a report")
    p.add_argument("--input", required=True, help="corpus directory (builds.jsonl, logs/, patches/)")
    _report_flags(p)

    p = sub.add_parser("classify", help="classify one error message, or print the taxonomy")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--message", help="compiler error message text")
    group.add_argument("--taxonomy", action="store_true", help="print the taxonomy as CSV (type,fragment,class)")

    p = sub.add_parser("simulate", help="generate a synthetic corpus with a ground-truth manifest")
    p.add_argument("--spec", help="scenario JSON file (defaults apply to omitted keys)")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--out", required=True, help="directory to write the corpus into")

    p = sub.add_parser("report", help="re-render a report from a saved resolutions.json")
    p.add_argument("--resolutions", required=True, help="resolutions.json written by 'analyze'")
    _report_flags(p)
    return parser


def _options(args) -> ReportOptions:
    if args.top_k < 0:
        raise ValueError("--top-k must be nonnegative")
    return ReportOptions(top_k=args.top_k, normalize_time=args.normalize_time)


def _load_store(path: str):
    store = ingest(path)
    if not store.builds:
        raise IngestError(f"{path}: no builds found")
    return store


def _run(args) -> int:
    if args.command == "classify":
        if args.taxonomy:
            sys.stdout.write(taxonomy_csv())
        else:
            t = classify_message(normalize_message(args.message))
            print(f"{t.value} {class_of(t).value}")
        return EXIT_OK

    if args.command == "ingest-check":
        store = _load_store(args.input)
        for key, value in count_summary(store).items():
            print(f"{key}\t{value}")
        return EXIT_OK

    if args.command == "analyze":
        options = _options(args)
        analysis = analyze_store(_load_store(args.input))
        write_analysis(analysis, args.out, options)
        log.info("%d series, %d records written to %s", len(analysis.series), len(analysis.records), args.out)
        return EXIT_OK

    if args.command == "report":
        rerender(args.resolutions, args.out, _options(args))
        return EXIT_OK

    if args.command == "simulate":
        spec = ScenarioSpec.load(args.spec, seed=args.seed) if args.spec else ScenarioSpec(
            **({"seed": args.seed} if args.seed is not None else {})
        )
        manifest = generate(spec, args.out)
        print(json.dumps({"series": len(manifest.series), "builds": manifest.n_builds}))
        return EXIT_OK
    raise AssertionError(args.command)


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except (IngestError, PatchParseError, ScenarioError, ValueError, KeyError) as exc:
        print(f"shadowjob: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"shadowjob: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    sys.exit(run())


if __name__ == "__main__":
    main()
