"""Command-line front end: parse, decide, conformance, analyze.

Output is deterministic for fixed inputs; --no-meta additionally drops the
input-path header so runs are byte-comparable in golden tests. Exit codes:
0 success, 1 conformance failure, 2 I/O error, 3 schema or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    EntityMap,
    entity_rollup,
    load_logs,
    prefix_shares,
    site_stats,
    summarize,
)
from .conformance import (
    ConformanceReport,
    PageSpec,
    builtin_catalog,
    builtin_profiles,
    parse_policy,
    run_profiles,
    run_test,
)
from .errors import FrameblockError
from .filterlist import count_party_modified, parse_list
from .origin import DEFAULT_SUFFIXES, SourceKind, SuffixRules

EXIT_OK = 0
EXIT_CONFORMANCE = 1
EXIT_IO = 2
EXIT_SCHEMA = 3


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str) -> object:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _CliError(EXIT_SCHEMA, f"{path}: invalid JSON ({exc.msg})") from None


def _table(header: list[str], rows: list[list[str]], indent: str = "  ") -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = [indent + "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    for row in rows:
        lines.append(indent + "  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(lines)


def _pct(value: float) -> str:
    return f"{value * 100:.1f}%"


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        if not args.no_meta:
            payload = {"meta": {"tool": f"frameblock {__version__}"}, **payload}
        print(json.dumps(payload, indent=2))
    else:
        if not args.no_meta:
            print(f"# frameblock {__version__}")
        print(text)


# ---------------------------------------------------------------------------
# parse


def cmd_parse(args) -> int:
    rules, report = parse_list(_read_text(args.rules))
    counts = report.counts()
    party = count_party_modified(rules)
    payload = {
        "counts": counts,
        "party_modified": party,
        "unsupported": [
            {"line": n, "text": t, "reason": r} for n, t, r in report.unsupported
        ],
    }
    lines = [_table(
        ["category", "count"],
        [[k, str(v)] for k, v in counts.items()] + [["party-modified", str(party)]],
    )]
    if report.unsupported:
        lines.append("unsupported lines:")
        for n, t, r in report.unsupported:
            lines.append(f"  {n}: {t}  -- {r}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# decide


def cmd_decide(args) -> int:
    try:
        policy = parse_policy(args.policy)  # reject bad config before any I/O
    except ValueError as exc:
        raise _CliError(EXIT_SCHEMA, str(exc)) from None
    try:
        page = PageSpec.from_dict(_load_json(args.page))
    except (KeyError, TypeError, ValueError) as exc:
        raise _CliError(EXIT_SCHEMA, f"{args.page}: {exc}") from None
    resources = {}
    if args.resources:
        loaded = _load_json(args.resources)
        if not isinstance(loaded, dict):
            raise _CliError(EXIT_SCHEMA, f"{args.resources}: expected a JSON object")
        resources = loaded
    rules, _ = parse_list(_read_text(args.rules), resources=resources)
    suffixes = _suffixes(args)
    try:
        matrix = run_test(page, rules, policy, suffixes)
    except FrameblockError as exc:
        raise _CliError(EXIT_SCHEMA, str(exc)) from None
    cells = [
        {"frame": f, "probe": p, "outcome": v} for (f, p), v in sorted(matrix.cells.items())
    ]
    text = _table(
        ["frame", "probe", "outcome"],
        [[c["frame"], c["probe"], c["outcome"]] for c in cells],
    )
    _emit(args, {"page": page.name, "policy": args.policy, "cells": cells}, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# conformance

_SHORT_TEST_IDS = {
    "RQ1-intermediate": "RQ1i",
    "RQ1-xhr": "RQ1x",
    "NestedAccounting": "NACC",
}


def _report_payload(report: ConformanceReport) -> dict:
    return {
        "baseline": [
            {
                "test": r.test_id,
                "ok": r.ok,
                "diffs": [
                    {
                        "run": run.run_label,
                        "frame": d.frame,
                        "probe": d.probe,
                        "expected": d.expected,
                        "actual": d.actual,
                    }
                    for run in r.runs
                    for d in run.diffs
                ],
            }
            for r in report.baseline
        ],
        "profiles": [
            {
                "id": p.profile.profile_id,
                "tool": p.profile.tool,
                "platform": p.profile.platform,
                "covers": list(p.profile.covers),
                "failed": sorted(p.failed),
                "expected_failures": sorted(p.profile.expected_failures),
                "exact": p.exact,
                "unexpected": sorted(p.unexpected),
                "missing": sorted(p.missing),
                "annotations": p.profile.annotations,
            }
            for p in report.profiles
        ],
        "coverage": [{"profile": pid, "test": tid} for pid, tid in report.coverage()],
        "ok": report.ok,
    }


def _report_text(report: ConformanceReport) -> str:
    lines = ["baseline (spec-correct policy)"]
    rows = [[r.test_id, "PASS" if r.ok else "FAIL"] for r in report.baseline]
    lines.append(_table(["test", "result"], rows))
    for r in report.baseline:
        for run in r.runs:
            for d in run.diffs:
                lines.append(
                    f"    {r.test_id}/{run.run_label} {d.frame} | {d.probe}: "
                    f"expected {d.expected}, got {d.actual}"
                )
    lines.append("")
    lines.append("tool profiles (VULN = evasion reproduced, ok = behaves correctly)")
    test_ids = [t.test_id for t in report.baseline]
    header = ["tool", "platform"] + [_SHORT_TEST_IDS.get(t, t) for t in test_ids] + ["verdict"]
    rows = []
    notes: list[str] = []
    for p in report.profiles:
        covered = {r.test_id: r for r in p.results}
        cells = []
        for tid in test_ids:
            if tid not in p.profile.covers:
                cells.append("-")
                continue
            mark = "ok" if covered[tid].ok else "VULN"
            if tid in p.profile.annotations:
                mark += "*"
                notes.append(f"  * {p.profile.profile_id} {tid}: {p.profile.annotations[tid]}")
            cells.append(mark)
        verdict = "exact"
        if not p.exact:
            parts = []
            if p.unexpected:
                parts.append("extra=" + ",".join(sorted(p.unexpected)))
            if p.missing:
                parts.append("unreproduced=" + ",".join(sorted(p.missing)))
            verdict = "MISMATCH " + " ".join(parts)
        rows.append([p.profile.tool, p.profile.platform] + cells + [verdict])
    lines.append(_table(header, rows))
    if any(short != tid for tid, short in _SHORT_TEST_IDS.items()):
        legend = ", ".join(f"{short} = {tid}" for tid, short in _SHORT_TEST_IDS.items())
        lines.append(f"  ({legend})")
    if notes:
        lines.append("annotations:")
        lines.extend(notes)
    lines.append("")
    lines.append(f"overall: {'PASS' if report.ok else 'FAIL'}")
    return "\n".join(lines)


def cmd_conformance(args) -> int:
    try:
        catalog = builtin_catalog()
        profiles = builtin_profiles()
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _CliError(EXIT_SCHEMA, f"corrupt catalog or profile data: {exc}") from None
    if args.profile:
        wanted = set(args.profile)
        known = {p.profile_id for p in profiles}
        unknown = wanted - known
        if unknown:
            raise _CliError(EXIT_SCHEMA, f"unknown profile(s): {', '.join(sorted(unknown))}")
        profiles = [p for p in profiles if p.profile_id in wanted]
    report = run_profiles(profiles=profiles, catalog=catalog)
    _emit(args, _report_payload(report), _report_text(report))
    return EXIT_OK if report.ok else EXIT_CONFORMANCE


# ---------------------------------------------------------------------------
# analyze


def _suffixes(args) -> SuffixRules:
    if getattr(args, "suffixes", None):
        try:
            return SuffixRules.from_file(args.suffixes)
        except OSError as exc:
            raise _CliError(EXIT_IO, f"cannot read {args.suffixes}: {exc.strerror}") from None
    return DEFAULT_SUFFIXES


def _analyze_payload(summary, shares, rollup) -> dict:
    return {
        "prevalence": [
            {
                "bucket": p.bucket,
                "sites": p.n_sites,
                "pct_1p": round(p.pct_1p, 4),
                "pct_3p": round(p.pct_3p, 4),
                "pct_either": round(p.pct_either, 4),
            }
            for p in summary.prevalence
        ],
        "prefix_shares": {kind.value: round(share, 4) for kind, share in shares.items()},
        "behaviors": {
            name: {
                "sites": col.n_sites,
                "mean": round(col.mean, 2),
                "median": col.median,
                "max": col.max,
                "total": col.total,
            }
            for name, col in summary.behaviors.items()
        },
        "requests": [
            {
                "bucket": r.bucket,
                "requests": r.n_requests,
                "in_local_frame": r.n_in_lf,
                "should_be_blocked": r.n_blocked,
                "sites": r.n_sites,
                "sites_with_request": r.n_sites_with_request,
                "sites_with_lf_request": r.n_sites_with_lf_request,
                "sites_with_blocked": r.n_sites_with_blocked,
            }
            for r in summary.requests
        ],
        "entities_frames": {
            bucket: [
                {"entity": row.entity, "sites": row.n_sites, "frames": row.n_items}
                for row in rows
            ]
            for bucket, rows in rollup.frames_by_bucket.items()
        },
        "entities_requests": [
            {"entity": row.entity, "sites": row.n_sites, "requests": row.n_items}
            for row in rollup.requests
        ],
    }


def _ratio(part: int, whole: int) -> str:
    return _pct(part / whole) if whole else "0.0%"


def _analyze_text(summary, shares, rollup) -> str:
    lines = ["local-frame prevalence by rank"]
    lines.append(
        _table(
            ["bucket", "sites", "1p", "3p", "either"],
            [
                [p.bucket, str(p.n_sites), _pct(p.pct_1p), _pct(p.pct_3p), _pct(p.pct_either)]
                for p in summary.prevalence
            ],
        )
    )
    lines.append("")
    lines.append("local-frame source prefixes")
    order = [
        SourceKind.ABOUT_BLANK,
        SourceKind.ABOUT_SRCDOC,
        SourceKind.BLOB,
        SourceKind.DATA,
        SourceKind.ABOUT_OTHER,
    ]
    rows = [[k.value, _pct(shares[k])] for k in order if k in shares]
    lines.append(_table(["prefix", "share"], rows))
    lines.append("")
    lines.append("privacy-relevant behavior inside local frames (per site)")
    lines.append(
        _table(
            ["column", "sites>=1", "mean", "median", "max", "total"],
            [
                [name, str(c.n_sites), f"{c.mean:.2f}", str(c.median), str(c.max), str(c.total)]
                for name, c in summary.behaviors.items()
            ],
        )
    )
    lines.append("")
    lines.append("requests made inside local frames")
    lines.append(
        _table(
            ["bucket", "requests", "in-local-frame", "should-be-blocked"],
            [
                [
                    r.bucket,
                    str(r.n_requests),
                    f"{r.n_in_lf} ({_ratio(r.n_in_lf, r.n_requests)})",
                    f"{r.n_blocked} ({_ratio(r.n_blocked, r.n_in_lf)})",
                ]
                for r in summary.requests
            ],
        )
    )
    lines.append("")
    lines.append("sites making requests")
    lines.append(
        _table(
            ["bucket", "sites", ">=1-request", "in-local-frame", "should-be-blocked"],
            [
                [
                    r.bucket,
                    str(r.n_sites),
                    f"{r.n_sites_with_request} ({_ratio(r.n_sites_with_request, r.n_sites)})",
                    f"{r.n_sites_with_lf_request} ({_ratio(r.n_sites_with_lf_request, r.n_sites_with_request)})",
                    f"{r.n_sites_with_blocked} ({_ratio(r.n_sites_with_blocked, r.n_sites_with_lf_request)})",
                ]
                for r in summary.requests
            ],
        )
    )
    lines.append("")
    lines.append("entities loaded into third-party local frames")
    for bucket, rows in rollup.frames_by_bucket.items():
        lines.append(f"  {bucket}")
        if rows:
            lines.append(
                _table(
                    ["entity", "sites", "frames"],
                    [[r.entity, str(r.n_sites), str(r.n_items)] for r in rows],
                    indent="    ",
                )
            )
        else:
            lines.append("    (none)")
    lines.append("")
    lines.append("entities receiving blocked local-frame requests")
    if rollup.requests:
        lines.append(
            _table(
                ["entity", "sites", "requests"],
                [[r.entity, str(r.n_sites), str(r.n_items)] for r in rollup.requests],
            )
        )
    else:
        lines.append("  (none)")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    if not Path(args.logs).is_dir():
        raise _CliError(EXIT_IO, f"{args.logs} is not a directory")
    try:
        logs = load_logs(args.logs)
    except OSError as exc:
        raise _CliError(EXIT_IO, f"cannot read logs: {exc}") from None
    except FrameblockError as exc:
        raise _CliError(EXIT_SCHEMA, str(exc)) from None
    rules, _ = parse_list(_read_text(args.rules)) if args.rules else (None, None)
    entities = EntityMap.from_file(args.entities) if args.entities else EntityMap.empty()
    suffixes = _suffixes(args)
    try:
        stats = [site_stats(log, rules, suffixes=suffixes) for log in logs]
        shares = prefix_shares(logs)
        rollup = entity_rollup(logs, entities, rules, suffixes=suffixes)
    except FrameblockError as exc:
        raise _CliError(EXIT_SCHEMA, str(exc)) from None
    summary = summarize(stats)
    _emit(args, _analyze_payload(summary, shares, rollup), _analyze_text(summary, shares, rollup))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frameblock",
        description="Frame-aware content-filtering decisions, conformance, and log analysis.",
    )
    parser.add_argument("--version", action="version", version=f"frameblock {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")
    common.add_argument("--no-meta", action="store_true", help="omit the version header")

    p = sub.add_parser("parse", parents=[common], help="parse a filter list and report counts")
    p.add_argument("rules", help="filter list file")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("decide", parents=[common], help="evaluate a page description")
    p.add_argument("--page", required=True, help="page description JSON")
    p.add_argument("--rules", required=True, help="filter list file")
    p.add_argument("--resources", help="JSON map of redirect resource bodies")
    p.add_argument("--policy", default="spec-correct")
    p.add_argument("--suffixes", help="public-suffix rules file")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("conformance", parents=[common], help="run the builtin test catalog")
    p.add_argument("--profile", action="append", help="restrict to a profile id (repeatable)")
    p.set_defaults(func=cmd_conformance)

    p = sub.add_parser("analyze", parents=[common], help="summarize crawl event logs")
    p.add_argument("logs", help="directory of *.jsonl event logs")
    p.add_argument("--rules", help="filter list for suspect-request checks")
    p.add_argument("--entities", help="entity map JSON")
    p.add_argument("--suffixes", help="public-suffix rules file")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"frameblock: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
