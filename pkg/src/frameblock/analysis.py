"""Crawl-log analysis: local-frame prevalence, privacy events, entity rollups.

Input is one line-delimited JSON log per site: a site header record, frame
records (with the frame's original src, whether it ever navigated away,
and optionally the security origin the crawler observed), and event
records (requests, WebAPI calls, element insertions). The pipeline
classifies the frames that stayed local for the whole page load, counts
privacy-relevant behavior inside them, checks their requests against a
rule set, and attributes third-party frames to owning entities.

Per-site logs are independent; everything here is a pure function, and
summaries are order-independent folds, so logs can be processed in
parallel and merged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

from .engine import (
    Action,
    AttributionPolicy,
    RequestEvent,
    SPEC_CORRECT,
    decide_request,
)
from .errors import MalformedLog, MalformedUrl
from .filterlist import ResourceType, RuleSet
from .origin import (
    DEFAULT_SUFFIXES,
    FrameNode,
    FrameTree,
    Origin,
    SourceKind,
    SuffixRules,
    classify_source,
    origin_of_url,
)

RANK_BUCKETS = ("[1,15K)", "[15K,100K)", "[100K,1M)")

# WebAPI surfaces commonly read to build a device fingerprint: canvas and
# WebGL readback, media-device enumeration, and the high-entropy
# navigator/screen getters. Membership is an exact match on
# "Interface.member" names.
FINGERPRINT_APIS = frozenset(
    {
        "CanvasRenderingContext2D.measureText",
        "HTMLCanvasElement.toDataURL",
        "MediaDevices.enumerateDevices",
        "Navigator.appCodeName.get",
        "Navigator.appName.get",
        "Navigator.appVersion.get",
        "Navigator.bluetooth.get",
        "Navigator.brave.get",
        "Navigator.deviceMemory.get",
        "Navigator.doNotTrack.get",
        "Navigator.getBattery",
        "Navigator.globalPrivacyControl.get",
        "Navigator.hardwareConcurrency.get",
        "Navigator.language.get",
        "Navigator.languages.get",
        "Navigator.maxTouchPoints.get",
        "Navigator.mediaCapabilities.get",
        "Navigator.mediaDevices.get",
        "Navigator.plugins.get",
        "Navigator.productSub.get",
        "Navigator.usb.get",
        "Navigator.userAgent.get",
        "Navigator.userAgentData.get",
        "Navigator.vendor.get",
        "Navigator.vendorSub.get",
        "Screen.availHeight.get",
        "Screen.availLeft.get",
        "Screen.availTop.get",
        "Screen.availWidth.get",
        "Screen.colorDepth.get",
        "Screen.height.get",
        "Screen.isExtended.get",
        "Screen.pixelDepth.get",
        "Screen.width.get",
        "WebGL2RenderingContext.getExtension",
        "WebGL2RenderingContext.getParameter",
        "WebGLRenderingContext.getExtension",
        "WebGLRenderingContext.getParameter",
        "WebGLRenderingContext.getShaderPrecisionFormat",
    }
)

# Elements every document gets for free; their insertion events say
# nothing about page behavior.
AUTO_CREATED_TAGS = frozenset({"html", "head", "body"})


class EventKind(Enum):
    REQUEST = "request"
    API_CALL = "api"
    ELEMENT = "element"


@dataclass(frozen=True)
class LogFrame:
    id: int
    parent_id: int | None
    src: str
    ever_navigated: bool
    security_origin: str | None = None


@dataclass(frozen=True)
class LogEvent:
    frame_id: int
    kind: EventKind
    url: str = ""
    resource_type: ResourceType = ResourceType.OTHER
    api: str = ""
    tag: str = ""


@dataclass(frozen=True)
class EventLog:
    site: str
    rank: int
    frames: tuple[LogFrame, ...]
    events: tuple[LogEvent, ...]

    @property
    def rank_bucket(self) -> str:
        return rank_bucket(self.rank)


def rank_bucket(rank: int) -> str:
    if not 1 <= rank < 1_000_000:
        raise ValueError(f"rank {rank} outside [1, 1M)")
    if rank < 15_000:
        return RANK_BUCKETS[0]
    if rank < 100_000:
        return RANK_BUCKETS[1]
    return RANK_BUCKETS[2]


def parse_log(text: str) -> EventLog:
    """Parse one site's line-delimited log; raises MalformedLog with the index."""
    site: str | None = None
    rank = 0
    frames: list[LogFrame] = []
    events: list[LogEvent] = []
    for index, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLog(index, f"bad JSON: {exc.msg}") from None
        kind = record.get("t")
        try:
            if kind == "site":
                if site is not None:
                    raise MalformedLog(index, "duplicate site header")
                site = record["domain"]
                rank = int(record["rank"])
                rank_bucket(rank)
            elif kind == "frame":
                frame = LogFrame(
                    id=int(record["id"]),
                    parent_id=None if record.get("parent") is None else int(record["parent"]),
                    src=record.get("src", ""),
                    ever_navigated=bool(record.get("navigated", False)),
                    security_origin=record.get("origin"),
                )
                if frame.security_origin is not None:
                    try:
                        origin_of_url(frame.security_origin)
                    except MalformedUrl:
                        raise MalformedLog(index, f"unparseable origin {frame.security_origin!r}")
                if frame.parent_id is None:
                    try:
                        origin_of_url(frame.src)
                    except MalformedUrl:
                        raise MalformedLog(index, "root frame src must be an origin-bearing URL")
                frames.append(frame)
            elif kind == "ev":
                events.append(
                    LogEvent(
                        frame_id=int(record["frame"]),
                        kind=EventKind(record["kind"]),
                        url=record.get("url", ""),
                        resource_type=ResourceType(record.get("type", "other")),
                        api=record.get("api", ""),
                        tag=record.get("tag", ""),
                    )
                )
            else:
                raise MalformedLog(index, f"unknown record type {kind!r}")
        except MalformedLog:
            raise
        except (KeyError, ValueError) as exc:
            raise MalformedLog(index, str(exc)) from None
    if site is None:
        raise MalformedLog(0, "missing site header")
    ids = [f.id for f in frames]
    if len(ids) != len(set(ids)):
        raise MalformedLog(0, "duplicate frame ids")
    known = set(ids)
    for frame in frames:
        if frame.parent_id is not None and frame.parent_id not in known:
            raise MalformedLog(0, f"frame {frame.id} references unknown parent")
    for ev in events:
        if ev.frame_id not in known:
            raise MalformedLog(0, f"event references unknown frame {ev.frame_id}")
    roots = [f for f in frames if f.parent_id is None]
    if len(roots) != 1:
        raise MalformedLog(0, "log must have exactly one root frame")
    children: dict[int, list[int]] = {}
    for frame in frames:
        if frame.parent_id is not None:
            children.setdefault(frame.parent_id, []).append(frame.id)
    reachable = {roots[0].id}
    queue = list(children.get(roots[0].id, []))
    while queue:
        fid = queue.pop()
        reachable.add(fid)
        queue.extend(children.get(fid, []))
    if reachable != known:
        raise MalformedLog(0, "frame parent links do not form a tree")
    return EventLog(site=site, rank=rank, frames=tuple(frames), events=tuple(events))


def load_log(path: str | Path) -> EventLog:
    return parse_log(Path(path).read_text(encoding="utf-8"))


def load_logs(directory: str | Path) -> list[EventLog]:
    """All *.jsonl logs in a directory, ordered by site domain."""
    logs = [load_log(p) for p in sorted(Path(directory).glob("*.jsonl"))]
    return sorted(logs, key=lambda log: log.site)


# ---------------------------------------------------------------------------
# Frame classification


def _resolve_log_origins(log: EventLog) -> dict[int, Origin]:
    """Best-effort origin per frame: explicit crawler origin, then the
    frame's own URL, then inheritance for never-navigated local sources.

    Navigated frames without a recorded origin are opaque: their final
    document is unknown to the log.
    """
    by_id = {f.id: f for f in log.frames}
    children: dict[int | None, list[int]] = {}
    for frame in log.frames:
        children.setdefault(frame.parent_id, []).append(frame.id)

    origins: dict[int, Origin] = {}
    queue = list(children.get(None, []))
    while queue:
        frame = by_id[queue.pop(0)]
        kind = classify_source(frame.src).kind
        if frame.security_origin:
            origins[frame.id] = origin_of_url(frame.security_origin)
        elif kind is SourceKind.URL:
            try:
                origins[frame.id] = origin_of_url(frame.src)
            except MalformedUrl:
                # e.g. javascript: sources; no origin can be derived
                origins[frame.id] = Origin.opaque(f"frame-{frame.id}")
        elif frame.ever_navigated:
            origins[frame.id] = Origin.opaque(f"navigated-frame-{frame.id}")
        elif kind in (SourceKind.ABOUT_BLANK, SourceKind.ABOUT_SRCDOC, SourceKind.BLOB):
            parent = origins.get(frame.parent_id)
            origins[frame.id] = parent if parent is not None else Origin.opaque(f"frame-{frame.id}")
        else:
            origins[frame.id] = Origin.opaque(f"frame-{frame.id}")
        queue.extend(children.get(frame.id, []))
    return origins


def _is_local_frame(frame: LogFrame) -> bool:
    """Local for the whole page load: never navigated, about-family source."""
    if frame.ever_navigated:
        return False
    return classify_source(frame.src).kind in (SourceKind.ABOUT_BLANK, SourceKind.ABOUT_SRCDOC)


def _local_scope(log: EventLog) -> set[int]:
    """Frames counted as "inside a local frame": the local frames plus any
    frame whose ancestor chain passes through one."""
    by_id = {f.id: f for f in log.frames}
    scope: set[int] = set()
    for frame in log.frames:
        cur: LogFrame | None = frame
        while cur is not None:
            if _is_local_frame(cur):
                scope.add(frame.id)
                break
            cur = by_id.get(cur.parent_id) if cur.parent_id is not None else None
    return scope


def extract_local_frames(
    log: EventLog, suffixes: SuffixRules = DEFAULT_SUFFIXES
) -> tuple[list[FrameNode], list[FrameNode]]:
    """Split the log's local frames into (first-party, third-party).

    A frame is first-party when its inherited origin shares the site's
    registrable domain; opaque origins count as third-party.
    """
    origins = _resolve_log_origins(log)
    first: list[FrameNode] = []
    third: list[FrameNode] = []
    for frame in log.frames:
        if not _is_local_frame(frame):
            continue
        origin = origins[frame.id]
        node = FrameNode(
            id=frame.id,
            source=classify_source(frame.src),
            parent_id=frame.parent_id,
            resolved_origin=origin,
        )
        if not origin.is_opaque and suffixes.registrable_domain(origin.host) == log.site:
            first.append(node)
        else:
            third.append(node)
    return first, third


def prefix_shares(logs: Iterable[EventLog]) -> dict[SourceKind, float]:
    """Share of each source kind among never-navigated local-frame candidates."""
    counts: dict[SourceKind, int] = {}
    total = 0
    for log in logs:
        for frame in log.frames:
            if frame.ever_navigated:
                continue
            kind = classify_source(frame.src).kind
            if kind in (SourceKind.URL, SourceKind.FILE_URI):
                continue
            counts[kind] = counts.get(kind, 0) + 1
            total += 1
    if not total:
        return {}
    return {kind: n / total for kind, n in sorted(counts.items(), key=lambda kv: kv[0].value)}


# ---------------------------------------------------------------------------
# Per-site statistics


@dataclass(frozen=True)
class SiteStats:
    site: str
    rank_bucket: str
    n_local_frames_1p: int = 0
    n_local_frames_3p: int = 0
    n_fp_api_calls: int = 0
    n_requests_in_lf: int = 0
    n_blocked_in_lf: int = 0
    n_js_calls: int = 0
    n_html_elements: int = 0
    n_requests_total: int = 0


def privacy_events(log: EventLog, fp_table: frozenset[str] = FINGERPRINT_APIS) -> SiteStats:
    """Counts of privacy-relevant events occurring inside local frames."""
    scope = _local_scope(log)
    fp = js = requests = elements = total_requests = 0
    for ev in log.events:
        if ev.kind is EventKind.REQUEST:
            total_requests += 1
        if ev.frame_id not in scope:
            continue
        if ev.kind is EventKind.REQUEST:
            requests += 1
        elif ev.kind is EventKind.API_CALL:
            js += 1
            if ev.api in fp_table:
                fp += 1
        elif ev.kind is EventKind.ELEMENT:
            if ev.tag.lower() not in AUTO_CREATED_TAGS:
                elements += 1
    return SiteStats(
        site=log.site,
        rank_bucket=log.rank_bucket,
        n_fp_api_calls=fp,
        n_requests_in_lf=requests,
        n_js_calls=js,
        n_html_elements=elements,
        n_requests_total=total_requests,
    )


def _log_frame_tree(log: EventLog) -> FrameTree:
    """Materialize the log as a resolved FrameTree for decision calls."""
    origins = _resolve_log_origins(log)
    children: dict[int, list[int]] = {}
    root_id: int | None = None
    for frame in log.frames:
        if frame.parent_id is None:
            root_id = frame.id
        else:
            children.setdefault(frame.parent_id, []).append(frame.id)
    if root_id is None:
        raise MalformedLog(0, "log has no root frame")
    root = next(f for f in log.frames if f.id == root_id)
    if classify_source(root.src).kind is not SourceKind.URL:
        raise MalformedLog(0, "root frame must have a URL source")
    nodes = {
        f.id: FrameNode(
            id=f.id,
            source=classify_source(f.src),
            parent_id=f.parent_id,
            resolved_origin=origins[f.id],
            children=tuple(children.get(f.id, ())),
        )
        for f in log.frames
    }
    return FrameTree(nodes=nodes, root_id=root_id)


def _iter_suspects(
    log: EventLog,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> Iterable[str]:
    """URLs of local-frame requests the rule set would block."""
    scope = _local_scope(log)
    tree = _log_frame_tree(log)
    for ev in log.events:
        if ev.kind is not EventKind.REQUEST or ev.frame_id not in scope:
            continue
        request = RequestEvent(url=ev.url, frame_id=ev.frame_id, resource_type=ev.resource_type)
        try:
            decision = decide_request(request, tree, rules, policy, suffixes)
        except MalformedUrl:
            continue  # unparseable request target cannot match host rules
        if decision.action is Action.BLOCK:
            yield ev.url


def suspect_requests(
    log: EventLog,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> SiteStats:
    """Count local-frame requests the rule set would block."""
    blocked = sum(1 for _ in _iter_suspects(log, rules, policy, suffixes))
    return SiteStats(site=log.site, rank_bucket=log.rank_bucket, n_blocked_in_lf=blocked)


def site_stats(
    log: EventLog,
    rules: RuleSet | None = None,
    fp_table: frozenset[str] = FINGERPRINT_APIS,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> SiteStats:
    """Full per-site stats: frame counts, privacy events, suspect requests."""
    first, third = extract_local_frames(log, suffixes)
    stats = privacy_events(log, fp_table)
    stats = replace(stats, n_local_frames_1p=len(first), n_local_frames_3p=len(third))
    if rules is not None:
        stats = replace(stats, n_blocked_in_lf=suspect_requests(log, rules, policy, suffixes).n_blocked_in_lf)
    return stats


# ---------------------------------------------------------------------------
# Entity attribution


class EntityMap:
    """Entity -> registrable domains; unmapped hosts fall back to their
    registrable domain as the entity name."""

    def __init__(self, mapping: dict[str, list[str]]):
        self._by_domain: dict[str, str] = {}
        for entity, domains in mapping.items():
            for domain in domains:
                domain = domain.lower()
                if domain in self._by_domain:
                    raise ValueError(f"domain {domain} mapped to two entities")
                self._by_domain[domain] = entity

    @classmethod
    def from_json(cls, text: str) -> EntityMap:
        return cls(json.loads(text))

    @classmethod
    def from_file(cls, path: str | Path) -> EntityMap:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def empty(cls) -> EntityMap:
        return cls({})

    def entity_for_host(self, host: str, suffixes: SuffixRules = DEFAULT_SUFFIXES) -> str:
        domain = suffixes.registrable_domain(host)
        return self._by_domain.get(domain, domain)


@dataclass(frozen=True)
class EntityRow:
    entity: str
    n_sites: int
    n_items: int


@dataclass(frozen=True)
class EntityRollup:
    # entity rows for third-party local frames, per rank bucket
    frames_by_bucket: dict[str, tuple[EntityRow, ...]]
    # entity rows for blocked local-frame requests, all buckets combined
    requests: tuple[EntityRow, ...]


def _rows(per_entity: dict[str, tuple[set[str], int]]) -> tuple[EntityRow, ...]:
    rows = [EntityRow(entity=e, n_sites=len(sites), n_items=n) for e, (sites, n) in per_entity.items()]
    rows.sort(key=lambda r: (-r.n_sites, r.entity))
    return tuple(rows)


def entity_rollup(
    logs: Iterable[EventLog],
    entities: EntityMap,
    rules: RuleSet | None = None,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> EntityRollup:
    """Attribute third-party local frames, and blocked local-frame requests,
    to owning entities.

    The request side needs a rule set to decide what would be blocked;
    without one it covers every local-frame request instead.
    """
    frame_tally: dict[str, dict[str, tuple[set[str], int]]] = {b: {} for b in RANK_BUCKETS}
    request_tally: dict[str, tuple[set[str], int]] = {}
    for log in logs:
        _, third = extract_local_frames(log, suffixes)
        bucket = frame_tally[log.rank_bucket]
        for node in third:
            origin = node.resolved_origin
            if origin is None or origin.is_opaque:
                continue
            entity = entities.entity_for_host(origin.host, suffixes)
            sites, count = bucket.get(entity, (set(), 0))
            sites.add(log.site)
            bucket[entity] = (sites, count + 1)

        if rules is not None:
            urls: Iterable[str] = _iter_suspects(log, rules, policy, suffixes)
        else:
            scope = _local_scope(log)
            urls = (
                ev.url
                for ev in log.events
                if ev.kind is EventKind.REQUEST and ev.frame_id in scope
            )
        for url in urls:
            try:
                origin = origin_of_url(url)
            except MalformedUrl:
                continue
            entity = entities.entity_for_host(origin.host, suffixes)
            sites, count = request_tally.get(entity, (set(), 0))
            sites.add(log.site)
            request_tally[entity] = (sites, count + 1)

    return EntityRollup(
        frames_by_bucket={b: _rows(t) for b, t in frame_tally.items()},
        requests=_rows(request_tally),
    )


# ---------------------------------------------------------------------------
# Summaries


def _median_low(values: list[int]) -> int:
    """Lower-middle median, so the result is always an observed integer."""
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2] if ordered else 0


@dataclass(frozen=True)
class ColumnSummary:
    n_sites: int  # sites with at least one occurrence
    mean: float
    median: int
    max: int
    total: int


@dataclass(frozen=True)
class BucketPrevalence:
    bucket: str
    n_sites: int
    pct_1p: float
    pct_3p: float
    pct_either: float


@dataclass(frozen=True)
class BucketRequests:
    bucket: str
    n_requests: int
    n_in_lf: int
    n_blocked: int
    n_sites: int
    n_sites_with_request: int
    n_sites_with_lf_request: int
    n_sites_with_blocked: int


BEHAVIOR_COLUMNS = (
    ("1p", "n_local_frames_1p"),
    ("3p", "n_local_frames_3p"),
    ("fingerprinting-api-calls", "n_fp_api_calls"),
    ("requests", "n_requests_in_lf"),
    ("js-api-calls", "n_js_calls"),
    ("html-elements", "n_html_elements"),
)


@dataclass(frozen=True)
class Summary:
    prevalence: tuple[BucketPrevalence, ...]  # per bucket plus overall
    behaviors: dict[str, ColumnSummary]
    requests: tuple[BucketRequests, ...]  # per bucket plus total


def _prevalence(stats: list[SiteStats], bucket: str | None) -> BucketPrevalence:
    rows = [s for s in stats if bucket is None or s.rank_bucket == bucket]
    n = len(rows)

    def pct(pred) -> float:
        return (sum(1 for s in rows if pred(s)) / n) if n else 0.0

    return BucketPrevalence(
        bucket=bucket or "Overall",
        n_sites=n,
        pct_1p=pct(lambda s: s.n_local_frames_1p > 0),
        pct_3p=pct(lambda s: s.n_local_frames_3p > 0),
        pct_either=pct(lambda s: s.n_local_frames_1p + s.n_local_frames_3p > 0),
    )


def _requests_row(stats: list[SiteStats], bucket: str | None) -> BucketRequests:
    rows = [s for s in stats if bucket is None or s.rank_bucket == bucket]
    return BucketRequests(
        bucket=bucket or "Total",
        n_requests=sum(s.n_requests_total for s in rows),
        n_in_lf=sum(s.n_requests_in_lf for s in rows),
        n_blocked=sum(s.n_blocked_in_lf for s in rows),
        n_sites=len(rows),
        n_sites_with_request=sum(1 for s in rows if s.n_requests_total > 0),
        n_sites_with_lf_request=sum(1 for s in rows if s.n_requests_in_lf > 0),
        n_sites_with_blocked=sum(1 for s in rows if s.n_blocked_in_lf > 0),
    )


def summarize(stats: Iterable[SiteStats]) -> Summary:
    """Fold per-site stats into the prevalence/behavior/request tables.

    Order-independent: rows are keyed and sorted internally, so summarizing
    a concatenation equals summarizing the union.
    """
    stats = sorted(stats, key=lambda s: (s.rank_bucket, s.site))
    behaviors: dict[str, ColumnSummary] = {}
    for name, attr in BEHAVIOR_COLUMNS:
        values = [getattr(s, attr) for s in stats]
        behaviors[name] = ColumnSummary(
            n_sites=sum(1 for v in values if v > 0),
            mean=(sum(values) / len(values)) if values else 0.0,
            median=_median_low(values),
            max=max(values) if values else 0,
            total=sum(values),
        )
    buckets = [b for b in RANK_BUCKETS if any(s.rank_bucket == b for s in stats)]
    prevalence = tuple(_prevalence(stats, b) for b in buckets) + (_prevalence(stats, None),)
    requests = tuple(_requests_row(stats, b) for b in buckets) + (_requests_row(stats, None),)
    return Summary(prevalence=prevalence, behaviors=behaviors, requests=requests)
