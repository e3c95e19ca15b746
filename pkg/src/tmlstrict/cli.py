"""tmlstrict command-line interface.

    tmlstrict validate [--json] [--consistency] [--extent-info] PATH...
    tmlstrict repair (--in-place | --out DIR | --dry-run) [--json] PATH...
    tmlstrict lint [--json] PATH...

Exit codes: 0 all files clean (or repaired to strict), 1 at least one
strict-validity violation (or irreparable file), 2 I/O or fatal parse
failure.  Reports go to stdout, operational errors to stderr.  Set
TMLSTRICT_NO_COLOR to disable ANSI color.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .parser import serialize
from .repair import RepairResult, actions_to_json, repair_bytes
from .validator import Diagnostic, ERROR, INFO, WARNING, diagnostics_to_json, validate_bytes

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_FATAL = 2


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("TMLSTRICT_NO_COLOR")


_COLORS = {ERROR: "\x1b[31m", WARNING: "\x1b[33m", INFO: "\x1b[36m"}


def _paint(text: str, severity: str) -> str:
    if _use_color():
        return f"{_COLORS.get(severity, '')}{text}\x1b[0m"
    return text


def collect_files(paths: list[str]) -> list[Path]:
    """Expand arguments: directories contribute their *.tml / *.xml files,
    sorted lexicographically for deterministic reports."""
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(
                p for p in path.rglob("*") if p.is_file() and p.suffix in (".tml", ".xml")
            )
            files.extend(found)
        else:
            files.append(path)
    return files


def _severity_counts(diagnostics: list[Diagnostic]) -> dict:
    counts = {"errors": 0, "warnings": 0, "infos": 0}
    for diag in diagnostics:
        key = {ERROR: "errors", WARNING: "warnings", INFO: "infos"}[diag.severity]
        counts[key] += 1
    return counts


def _aggregate(file_reports: list[dict]) -> dict:
    by_code: dict[str, int] = {}
    totals = {"files": len(file_reports), "errors": 0, "warnings": 0, "infos": 0}
    for report in file_reports:
        for diag in report["diagnostics"]:
            by_code[diag["code"]] = by_code.get(diag["code"], 0) + 1
        counts = _severity_counts_from_json(report["diagnostics"])
        for key in ("errors", "warnings", "infos"):
            totals[key] += counts[key]
    totals["by_code"] = dict(sorted(by_code.items()))
    return totals


def _severity_counts_from_json(diagnostics: list[dict]) -> dict:
    counts = {"errors": 0, "warnings": 0, "infos": 0}
    for diag in diagnostics:
        key = {"ERROR": "errors", "WARNING": "warnings", "INFO": "infos"}[diag["severity"]]
        counts[key] += 1
    return counts


def _print_text_report(file_reports: list[dict], totals: dict, actions_shown: bool) -> None:
    for report in file_reports:
        counts = _severity_counts_from_json(report["diagnostics"])
        status = "strict" if report["strict"] else f"{counts['errors']} error(s)"
        print(f"{report['path']}: {status}, {counts['warnings']} warning(s)")
        for diag in report["diagnostics"]:
            ids = f" [{', '.join(diag['ids'])}]" if diag["ids"] else ""
            line = (
                f"  {diag['code']} {diag['severity'].lower()} "
                f"line {diag['line']}, col {diag['column']}: {diag['message']}{ids}"
            )
            print(_paint(line, diag["severity"]))
        if actions_shown:
            for action in report.get("actions", []):
                print(
                    f"  {action['kind']} line {action['line']}, col {action['column']}: "
                    f"{action['before']!r} -> {action['after']!r} ({action['rationale']})"
                )
    summary_codes = (
        " (" + ", ".join(f"{code} x{n}" for code, n in totals["by_code"].items()) + ")"
        if totals["by_code"]
        else ""
    )
    print(
        f"{totals['files']} file(s): {totals['errors']} error(s), "
        f"{totals['warnings']} warning(s){summary_codes}"
    )


def _emit(file_reports: list[dict], as_json: bool, actions_shown: bool = False) -> None:
    totals = _aggregate(file_reports)
    if as_json:
        print(json.dumps({"files": file_reports, "totals": totals}, indent=2, sort_keys=True))
    else:
        _print_text_report(file_reports, totals, actions_shown)


def _read(path: Path) -> bytes | None:
    try:
        return path.read_bytes()
    except OSError as exc:
        print(f"tmlstrict: cannot read {path}: {exc}", file=sys.stderr)
        return None


def cmd_validate(args) -> int:
    files = collect_files(args.paths)
    exit_code = EXIT_OK
    reports = []
    for path in files:
        data = _read(path)
        if data is None:
            return EXIT_FATAL
        doc, diagnostics = validate_bytes(
            data,
            enable_consistency_lint=args.consistency,
            enable_extent_info=args.extent_info,
        )
        strict = not any(d.severity == ERROR for d in diagnostics)
        reports.append(
            {
                "path": str(path),
                "strict": strict,
                "diagnostics": diagnostics_to_json(diagnostics),
            }
        )
        if doc is None:
            exit_code = EXIT_FATAL
        elif not strict and exit_code == EXIT_OK:
            exit_code = EXIT_VIOLATIONS
    _emit(reports, args.json)
    return exit_code


def cmd_lint(args) -> int:
    args.consistency = True
    args.extent_info = False
    return cmd_validate(args)


def cmd_repair(args) -> int:
    if not args.dry_run and not args.in_place and args.out is None:
        print("tmlstrict: repair needs --in-place, --out DIR or --dry-run", file=sys.stderr)
        return EXIT_FATAL
    if args.in_place and args.out is not None:
        print("tmlstrict: --in-place and --out are mutually exclusive", file=sys.stderr)
        return EXIT_FATAL
    out_dir = Path(args.out) if args.out is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    files = collect_files(args.paths)
    exit_code = EXIT_OK
    reports = []
    for path in files:
        data = _read(path)
        if data is None:
            return EXIT_FATAL
        result: RepairResult = repair_bytes(data)
        irreparable = diagnostics_to_json(result.irreparable)
        reports.append(
            {
                "path": str(path),
                "strict": not irreparable,
                "diagnostics": irreparable,
                "actions": actions_to_json(result.actions),
            }
        )
        if result.document is None:
            exit_code = EXIT_FATAL
            continue
        if irreparable and exit_code == EXIT_OK:
            exit_code = EXIT_VIOLATIONS
        if not args.dry_run:
            target = path if args.in_place else out_dir / path.name
            try:
                target.write_bytes(serialize(result.document))
            except OSError as exc:
                print(f"tmlstrict: cannot write {target}: {exc}", file=sys.stderr)
                return EXIT_FATAL
    _emit(reports, args.json, actions_shown=not args.json)
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tmlstrict",
        description="Validate, repair and lint TimeML documents against TimeML-strict.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p_validate = sub.add_parser("validate", help="check files against the strict rule catalog")
    p_validate.add_argument("paths", nargs="+", metavar="PATH")
    p_validate.add_argument("--json", action="store_true", help="machine-readable report")
    p_validate.add_argument(
        "--consistency", action="store_true", help="also run the advisory temporal-consistency lint"
    )
    p_validate.add_argument(
        "--extent-info", action="store_true", help="report multi-word extents (informational)"
    )
    p_validate.set_defaults(func=cmd_validate)

    p_repair = sub.add_parser("repair", help="rewrite legacy TimeML into TimeML-strict")
    p_repair.add_argument("paths", nargs="+", metavar="PATH")
    p_repair.add_argument("--in-place", action="store_true", help="overwrite the input files")
    p_repair.add_argument("--out", metavar="DIR", help="write repaired files into DIR")
    p_repair.add_argument("--dry-run", action="store_true", help="print the plan, write nothing")
    p_repair.add_argument("--json", action="store_true", help="machine-readable report")
    p_repair.set_defaults(func=cmd_repair)

    p_lint = sub.add_parser("lint", help="validate plus the temporal-consistency lint")
    p_lint.add_argument("paths", nargs="+", metavar="PATH")
    p_lint.add_argument("--json", action="store_true", help="machine-readable report")
    p_lint.set_defaults(func=cmd_lint)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
