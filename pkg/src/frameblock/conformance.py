"""Conformance harness: declarative test pages, expected matrices, tool profiles.

Each catalog test is a page description plus one or more (rules, expected
matrix) runs. The runner evaluates every probe on the page through the
decision engine under a chosen attribution policy and diffs the resulting
matrix against the expectation. Tool profiles bundle a per-capability
policy choice with the set of tests the tool is expected to fail, so a
report can flag both unreproduced and extra failures.

Pages, matrices, and profiles are data files under frameblock/data, not
code; new tools or tests are added by editing JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from typing import Callable, Iterable
from urllib.parse import urlsplit, urlunsplit

from .engine import (
    Action,
    AttributionPolicy,
    PolicyName,
    RequestEvent,
    SPEC_CORRECT,
    account_blocks,
    adorn_frame,
    decide_request,
)
from .errors import FrameblockError
from .filterlist import ResourceType, RuleSet, parse_list
from .origin import (
    DEFAULT_SUFFIXES,
    FrameTree,
    SourceKind,
    SuffixRules,
    classify_source,
    resolve_tree,
)

CAPABILITIES = ("request", "request-xhr", "replacement", "scriptlet", "cosmetic", "accounting")


def parse_policy(text: str) -> AttributionPolicy:
    """Parse a policy spec like "skip-local-frames+skip-requests"."""
    parts = text.strip().lower().split("+")
    name = PolicyName(parts[0])
    skip_requests = False
    for flag in parts[1:]:
        if flag == "skip-requests":
            skip_requests = True
        else:
            raise ValueError(f"unknown policy flag {flag!r}")
    return AttributionPolicy.preset(name, skip_requests=skip_requests)


# ---------------------------------------------------------------------------
# Page descriptions


@dataclass(frozen=True)
class PageFrame:
    label: str
    src: str
    requests: tuple[tuple[str, ResourceType], ...] = ()
    elements: tuple[tuple[str, str], ...] = ()  # (tag, css class)
    scriptlet_probes: tuple[str, ...] = ()
    children: tuple["PageFrame", ...] = ()


@dataclass(frozen=True)
class PageSpec:
    name: str
    root: PageFrame
    accounting: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> PageSpec:
        frames = data.get("frames") or []
        if len(frames) != 1:
            raise ValueError("page must have exactly one top-level frame")

        def build(node: dict) -> PageFrame:
            return PageFrame(
                label=node["label"],
                src=node["src"],
                requests=tuple(
                    (r["url"], ResourceType(r.get("type", "other"))) for r in node.get("requests", [])
                ),
                elements=tuple((e["tag"], e.get("class", "")) for e in node.get("elements", [])),
                scriptlet_probes=tuple(node.get("scriptlet_probes", [])),
                children=tuple(build(c) for c in node.get("children", [])),
            )

        page = cls(
            name=data["name"],
            root=build(frames[0]),
            accounting=bool(data.get("accounting", False)),
        )
        labels = [f.label for f in page.walk()]
        if len(labels) != len(set(labels)):
            raise ValueError("frame labels must be unique")
        return page

    @classmethod
    def from_json(cls, text: str) -> PageSpec:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        def dump(frame: PageFrame) -> dict:
            out: dict = {"label": frame.label, "src": frame.src}
            if frame.requests:
                out["requests"] = [{"url": u, "type": t.value} for u, t in frame.requests]
            if frame.elements:
                out["elements"] = [{"tag": t, "class": c} for t, c in frame.elements]
            if frame.scriptlet_probes:
                out["scriptlet_probes"] = list(frame.scriptlet_probes)
            if frame.children:
                out["children"] = [dump(c) for c in frame.children]
            return out

        data: dict = {"name": self.name, "frames": [dump(self.root)]}
        if self.accounting:
            data["accounting"] = True
        return data

    def walk(self) -> Iterable[PageFrame]:
        stack = [self.root]
        while stack:
            frame = stack.pop(0)
            yield frame
            stack.extend(frame.children)

    def to_frame_tree(self) -> tuple[FrameTree, dict[int, PageFrame], dict[str, int]]:
        """Materialize the declarative page as a FrameTree (ids in preorder)."""
        triples: list[tuple[int, str, int | None]] = []
        by_id: dict[int, PageFrame] = {}
        by_label: dict[str, int] = {}
        counter = 0

        def visit(frame: PageFrame, parent: int | None) -> None:
            nonlocal counter
            counter += 1
            fid = counter
            triples.append((fid, frame.src, parent))
            by_id[fid] = frame
            by_label[frame.label] = fid
            for child in frame.children:
                visit(child, fid)

        visit(self.root, None)
        return FrameTree.build(triples), by_id, by_label


def spoof_map(
    hosts: dict[str, str], classes: dict[str, str] | None = None
) -> Callable[[PageSpec], PageSpec]:
    """Pure rewrite of a page's hosts (and optionally element classes).

    Stands in for the /etc/hosts and proxy tricks used to point test pages
    at domains that real, unmodifiable filter lists already cover. The
    host map must be one-to-one.
    """
    if len(set(hosts.values())) != len(hosts):
        raise ValueError("host map must be bijective")
    classes = classes or {}

    def swap_url(url: str) -> str:
        if classify_source(url).kind is not SourceKind.URL:
            return url
        parts = urlsplit(url)
        host = (parts.hostname or "").lower()
        if host not in hosts:
            return url
        netloc = hosts[host]
        if parts.port is not None:
            netloc += f":{parts.port}"
        return urlunsplit((parts.scheme, netloc, parts.path, parts.query, parts.fragment))

    def swap_frame(frame: PageFrame) -> PageFrame:
        return PageFrame(
            label=frame.label,
            src=swap_url(frame.src),
            requests=tuple((swap_url(u), t) for u, t in frame.requests),
            elements=tuple((tag, classes.get(cls, cls)) for tag, cls in frame.elements),
            scriptlet_probes=frame.scriptlet_probes,
            children=tuple(swap_frame(c) for c in frame.children),
        )

    def transform(page: PageSpec) -> PageSpec:
        return PageSpec(name=page.name, root=swap_frame(page.root), accounting=page.accounting)

    return transform


# ---------------------------------------------------------------------------
# Matrices


@dataclass(frozen=True)
class Matrix:
    """Outcome per (frame label, probe). Used for both expected and actual."""

    test_id: str
    cells: dict[tuple[str, str], str]

    @classmethod
    def from_dict(cls, data: dict) -> Matrix:
        cells = {(c["frame"], c["probe"]): c["expect"] for c in data["cells"]}
        return cls(test_id=data["test_id"], cells=cells)

    def to_dict(self) -> dict:
        return {
            "test_id": self.test_id,
            "cells": [
                {"frame": f, "probe": p, "expect": v}
                for (f, p), v in sorted(self.cells.items())
            ],
        }

    def outcome(self, frame: str, probe: str) -> str | None:
        return self.cells.get((frame, probe))


@dataclass(frozen=True)
class CellDiff:
    frame: str
    probe: str
    expected: str
    actual: str


def diff_matrices(expected: Matrix, actual: Matrix) -> list[CellDiff]:
    diffs: list[CellDiff] = []
    for key in sorted(set(expected.cells) | set(actual.cells)):
        want = expected.cells.get(key, "(absent)")
        got = actual.cells.get(key, "(absent)")
        if want != got:
            diffs.append(CellDiff(frame=key[0], probe=key[1], expected=want, actual=got))
    return diffs


def _selector_hides(selector: str, tag: str, cls: str) -> bool:
    # Catalog selectors are plain "tag.class" / ".class" / "tag" forms;
    # anything richer is treated as not matching the probe element.
    if "." in selector:
        sel_tag, _, sel_cls = selector.partition(".")
        return sel_cls == cls and sel_tag in ("", tag)
    return selector == tag


class ProbeError(FrameblockError):
    """Engine error annotated with the cell it occurred in."""

    def __init__(self, frame: str, probe: str, cause: Exception):
        self.frame = frame
        self.probe = probe
        self.cause = cause
        super().__init__(f"cell ({frame!r}, {probe!r}): {cause}")


def run_test(
    page: PageSpec,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
    test_id: str = "",
) -> Matrix:
    """Evaluate every probe on a page and return the actual matrix.

    Pure function of its inputs: no network, no browser, no clock.
    """
    tree, by_id, by_label = page.to_frame_tree()
    tree = resolve_tree(tree, policy)
    cells: dict[tuple[str, str], str] = {}
    all_events: list[RequestEvent] = []

    for label, fid in by_label.items():
        frame = by_id[fid]
        node = tree.node(fid)
        for url, rtype in frame.requests:
            probe = f"req:{url}"
            ev = RequestEvent(url=url, frame_id=fid, resource_type=rtype)
            all_events.append(ev)
            try:
                decision = decide_request(ev, tree, rules, policy, suffixes)
                if decision.action is Action.REDIRECT:
                    rules.resource_body(decision.resource)  # must exist
                    cells[(label, probe)] = f"redirect:{decision.resource}"
                else:
                    cells[(label, probe)] = decision.action.value
            except FrameblockError as exc:
                raise ProbeError(label, probe, exc) from exc

        if frame.elements or frame.scriptlet_probes:
            try:
                adornment = adorn_frame(node, tree, rules, policy, suffixes)
            except FrameblockError as exc:
                raise ProbeError(label, "adorn", exc) from exc
            for tag, cls in frame.elements:
                probe = f"el:{tag}.{cls}"
                hidden = any(_selector_hides(s, tag, cls) for s in adornment.hidden_selectors)
                cells[(label, probe)] = "hidden" if hidden else "visible"
            for prop in frame.scriptlet_probes:
                probe = f"scriptlet:{prop}"
                value = "undefined"
                for name, args in adornment.injected_scriptlets:
                    if name == "set-constant" and args and args[0] == prop:
                        value = args[1] if len(args) > 1 else "undefined"
                        break  # first definition wins
                cells[(label, probe)] = value

    if page.accounting:
        ledger = account_blocks(all_events, tree, rules, policy, suffixes)
        id_to_label = {fid: lbl for lbl, fid in by_label.items()}
        for entry in ledger.entries:
            label = id_to_label[entry.frame_id]
            cells[(label, f"counted:{entry.url}")] = "counted" if entry.counted else "uncounted"

    return Matrix(test_id=test_id or page.name, cells=cells)


# ---------------------------------------------------------------------------
# Builtin catalog


@dataclass(frozen=True)
class TestRun:
    label: str
    rules_text: str
    expected: Matrix
    resources: dict[str, str] = field(default_factory=dict)

    def rule_set(self) -> RuleSet:
        rules, _ = parse_list(self.rules_text, resources=self.resources)
        return rules


@dataclass(frozen=True)
class CatalogTest:
    test_id: str
    capability: str
    page: PageSpec
    runs: tuple[TestRun, ...]


def _data_text(relpath: str) -> str:
    return (importlib_resources.files("frameblock") / "data" / relpath).read_text("utf-8")


def builtin_catalog() -> list[CatalogTest]:
    """The shipped tests: the seven core ones plus two catalog extensions."""
    index = json.loads(_data_text("catalog/index.json"))
    out: list[CatalogTest] = []
    for entry in index:
        page = PageSpec.from_json(_data_text(f"catalog/{entry['page']}"))
        runs = []
        for run in entry["runs"]:
            runs.append(
                TestRun(
                    label=run["label"],
                    rules_text=_data_text(f"catalog/{run['rules']}"),
                    expected=Matrix.from_dict(json.loads(_data_text(f"catalog/{run['expected']}"))),
                    resources=run.get("resources", {}),
                )
            )
        out.append(
            CatalogTest(
                test_id=entry["id"],
                capability=entry["capability"],
                page=page,
                runs=tuple(runs),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Tool profiles


@dataclass(frozen=True)
class ToolProfile:
    profile_id: str
    tool: str
    platform: str
    policies: dict[str, AttributionPolicy]  # capability -> policy
    covers: tuple[str, ...]  # catalog test ids this tool is judged on
    expected_failures: frozenset[str]
    annotations: dict[str, str] = field(default_factory=dict)

    def policy_for(self, capability: str) -> AttributionPolicy:
        try:
            return self.policies[capability]
        except KeyError:
            raise ValueError(
                f"profile {self.profile_id!r} has no policy for capability {capability!r}"
            ) from None

    @classmethod
    def from_dict(cls, data: dict) -> ToolProfile:
        return cls(
            profile_id=data["id"],
            tool=data["tool"],
            platform=data["platform"],
            policies={cap: parse_policy(spec) for cap, spec in data["policies"].items()},
            covers=tuple(data["covers"]),
            expected_failures=frozenset(data.get("expected_failures", [])),
            annotations=dict(data.get("annotations", {})),
        )


def builtin_profiles() -> list[ToolProfile]:
    data = json.loads(_data_text("profiles.json"))
    return [ToolProfile.from_dict(p) for p in data["profiles"]]


# ---------------------------------------------------------------------------
# Running and reporting


@dataclass(frozen=True)
class RunResult:
    run_label: str
    ok: bool
    diffs: tuple[CellDiff, ...]


@dataclass(frozen=True)
class TestResult:
    test_id: str
    ok: bool
    runs: tuple[RunResult, ...]


@dataclass(frozen=True)
class ProfileResult:
    profile: ToolProfile
    results: tuple[TestResult, ...]

    @property
    def failed(self) -> frozenset[str]:
        return frozenset(r.test_id for r in self.results if not r.ok)

    @property
    def unexpected(self) -> frozenset[str]:
        """Failures the profile did not predict (over-reproduction)."""
        return self.failed - self.profile.expected_failures

    @property
    def missing(self) -> frozenset[str]:
        """Predicted failures that did not reproduce (under-reproduction)."""
        return self.profile.expected_failures - self.failed

    @property
    def exact(self) -> bool:
        return not self.unexpected and not self.missing


@dataclass(frozen=True)
class ConformanceReport:
    baseline: tuple[TestResult, ...]  # catalog under the standards-correct policy
    profiles: tuple[ProfileResult, ...]

    @property
    def baseline_ok(self) -> bool:
        return all(r.ok for r in self.baseline)

    @property
    def profiles_ok(self) -> bool:
        return all(p.exact for p in self.profiles)

    @property
    def ok(self) -> bool:
        return self.baseline_ok and self.profiles_ok

    def coverage(self) -> list[tuple[str, str]]:
        """Enumerated (profile id, test id) pairs the report covers."""
        return [(p.profile.profile_id, t) for p in self.profiles for t in p.profile.covers]


def _run_catalog_test(test: CatalogTest, policy: AttributionPolicy) -> TestResult:
    runs: list[RunResult] = []
    for run in test.runs:
        actual = run_test(test.page, run.rule_set(), policy, test_id=test.test_id)
        diffs = tuple(diff_matrices(run.expected, actual))
        runs.append(RunResult(run_label=run.label, ok=not diffs, diffs=diffs))
    return TestResult(test_id=test.test_id, ok=all(r.ok for r in runs), runs=tuple(runs))


def run_profiles(
    profiles: list[ToolProfile] | None = None,
    catalog: list[CatalogTest] | None = None,
) -> ConformanceReport:
    """Run the catalog under the correct policy and under every profile."""
    catalog = catalog if catalog is not None else builtin_catalog()
    profiles = profiles if profiles is not None else builtin_profiles()
    by_id = {t.test_id: t for t in catalog}

    baseline = tuple(_run_catalog_test(t, SPEC_CORRECT) for t in catalog)

    profile_results: list[ProfileResult] = []
    for profile in profiles:
        results: list[TestResult] = []
        for test_id in profile.covers:
            test = by_id[test_id]
            policy = profile.policy_for(test.capability)
            results.append(_run_catalog_test(test, policy))
        profile_results.append(ProfileResult(profile=profile, results=tuple(results)))
    return ConformanceReport(baseline=baseline, profiles=tuple(profile_results))
