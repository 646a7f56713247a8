"""Brute-force reference matcher, independent of the engine's indexed path.

Pattern matching is a recursive character walk (the engine compiles to
regexes), candidate selection is a plain linear scan over the rule list
(the engine goes through a host trie), and precedence is re-derived here
from scratch. Shared plumbing (URL origin extraction, registrable
domains) is reused; everything the engine tests exercise is reimplemented.
"""

from __future__ import annotations

import re

from frameblock.engine import AttributionPolicy, PolicyName, RequestEvent
from frameblock.filterlist import NetworkRule, Party, RuleSet
from frameblock.origin import DEFAULT_SUFFIXES, FrameTree, SuffixRules, origin_of_url

_NOT_SEPARATOR = set("abcdefghijklmnopqrstuvwxyz0123456789_.%-")
_SCHEME_RE = re.compile(r"^[a-z][a-z0-9+.\-]*$")
_HOST_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789.-")


def _walk(pat: str, url: str, pi: int, ui: int, end_anchored: bool) -> bool:
    if pi == len(pat):
        return ui == len(url) if end_anchored else True
    ch = pat[pi]
    if ch == "*":
        for j in range(ui, len(url) + 1):
            if _walk(pat, url, pi + 1, j, end_anchored):
                return True
        return False
    if ch == "^":
        if ui == len(url):
            return _walk(pat, url, pi + 1, ui, end_anchored)
        if url[ui] not in _NOT_SEPARATOR:
            return _walk(pat, url, pi + 1, ui + 1, end_anchored)
        return False
    return ui < len(url) and url[ui] == ch and _walk(pat, url, pi + 1, ui + 1, end_anchored)


def _host_anchor_starts(url: str) -> list[int]:
    """Positions where a ||-anchored pattern may begin: the hostname start
    and every position following a dot inside the hostname."""
    sep = url.find("://")
    if sep == -1 or not _SCHEME_RE.match(url[:sep]):
        return []
    start = sep + 3
    positions = [start]
    j = start
    while j < len(url) and url[j] in _HOST_CHARS:
        if url[j] == ".":
            positions.append(j + 1)
        j += 1
    return positions


def match_pattern(pattern: str, url: str) -> bool:
    pattern = pattern.lower()
    url = url.lower()
    if pattern.startswith("||"):
        body = pattern[2:]
        starts = _host_anchor_starts(url)
    elif pattern.startswith("|"):
        body = pattern[1:]
        starts = [0]
    else:
        body = pattern
        starts = list(range(len(url) + 1))
    end_anchored = body.endswith("|")
    if end_anchored:
        body = body[:-1]
    return any(_walk(body, url, 0, s, end_anchored) for s in starts)


def decide(
    ev: RequestEvent,
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> tuple[str, NetworkRule | None]:
    """Linear-scan re-derivation of the request decision."""
    frame = tree.nodes[ev.frame_id]
    if policy.skip_requests and frame.source.is_local:
        return "allow", None

    req_origin = origin_of_url(ev.url)
    if policy.name is PolicyName.TOP_LEVEL_PARTYNESS:
        comparison = tree.nodes[tree.root_id].resolved_origin
    else:
        comparison = frame.resolved_origin
    if req_origin.is_opaque or comparison.is_opaque:
        party = "indeterminate"
    elif req_origin.scheme == comparison.scheme and suffixes.registrable_domain(
        req_origin.host
    ) == suffixes.registrable_domain(comparison.host):
        party = "first"
    else:
        party = "third"
    frame_origin = frame.resolved_origin
    frame_domain = None if frame_origin.is_opaque else suffixes.registrable_domain(frame_origin.host)

    candidates: list[NetworkRule] = []
    for rule in rules.network:
        if rule.resource_types and ev.resource_type not in rule.resource_types:
            continue
        if rule.domains.include and (frame_domain is None or frame_domain not in rule.domains.include):
            continue
        if frame_domain is not None and frame_domain in rule.domains.exclude:
            continue
        if rule.party is Party.THIRD_ONLY and party != "third":
            continue
        if rule.party is Party.FIRST_ONLY and party != "first":
            continue
        if not match_pattern(rule.pattern, ev.url):
            continue
        candidates.append(rule)

    for rule in candidates:
        if rule.is_exception:
            return "allow", rule
    for rule in candidates:
        if rule.redirect:
            return "redirect", rule
    for rule in candidates:
        return "block", rule
    return "allow", None
