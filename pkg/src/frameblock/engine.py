"""Decision engine: evaluate events against rules inside a resolved frame tree.

All state (rule set, resolved tree, policy) is immutable, and every
operation here is a pure function of its arguments, so the engine is safe
to call concurrently. The attribution policy chooses how frame origins
resolve and how party context is computed; one policy models the
standards-correct behavior and the rest emulate specific ways shipping
blockers get local frames wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .filterlist import NetworkRule, Party, ResourceType, RuleSet
from .origin import (
    DEFAULT_SUFFIXES,
    FrameNode,
    FrameTree,
    Origin,
    SuffixRules,
    origin_of_url,
)


class PolicyName(Enum):
    SPEC_CORRECT = "spec-correct"
    SKIP_LOCAL_FRAMES = "skip-local-frames"
    FIRST_PARTY_FALLBACK = "first-party-fallback"
    LITERAL_SELF = "literal-self"
    TOP_LEVEL_PARTYNESS = "top-level-partyness"
    DIRECT_PARENT_ONLY = "direct-parent-only"


@dataclass(frozen=True)
class AttributionPolicy:
    """How origins, party context, and rule application treat local frames.

    - SpecCorrect: local frames inherit the creator origin; party context
      compares the request against the containing frame.
    - SkipLocalFrames: origins as SpecCorrect, but cosmetics/scriptlets
      (and, with skip_requests, request evaluation) are not applied inside
      local frames at all.
    - FirstPartyFallback: every local frame resolves to the top-level
      origin, so first-party rules leak into third-party local frames.
    - LiteralSelf: local frames get an opaque origin tagged about:blank,
      so no domain-scoped rule ever applies there.
    - TopLevelPartyness: origins as SpecCorrect, but every request's party
      is judged against the top-level frame instead of its own.
    - DirectParentOnly: decisions as SpecCorrect, but blocked requests are
      only counted as reportable when the frame's direct parent is a
      non-local frame (nested local frames go missing from tallies).
    """

    name: PolicyName = PolicyName.SPEC_CORRECT
    apply_cosmetics_in_local_frames: bool = True
    apply_scriptlets_in_local_frames: bool = True
    skip_requests: bool = False

    def __post_init__(self) -> None:
        if self.name is PolicyName.SPEC_CORRECT:
            if not (self.apply_cosmetics_in_local_frames and self.apply_scriptlets_in_local_frames):
                raise ValueError("SpecCorrect cannot skip adornments")
            if self.skip_requests:
                raise ValueError("SpecCorrect cannot skip request evaluation")
        if self.skip_requests and self.name is not PolicyName.SKIP_LOCAL_FRAMES:
            raise ValueError("skip_requests is a SkipLocalFrames knob")

    @classmethod
    def preset(cls, name: PolicyName | str, skip_requests: bool = False) -> AttributionPolicy:
        if isinstance(name, str):
            name = PolicyName(name)
        if name is PolicyName.SKIP_LOCAL_FRAMES:
            return cls(
                name=name,
                apply_cosmetics_in_local_frames=False,
                apply_scriptlets_in_local_frames=False,
                skip_requests=skip_requests,
            )
        return cls(name=name, skip_requests=skip_requests)


SPEC_CORRECT = AttributionPolicy()


class PartyContext(Enum):
    FIRST_PARTY = "first-party"
    THIRD_PARTY = "third-party"
    INDETERMINATE = "indeterminate"


class Action(Enum):
    ALLOW = "allow"
    BLOCK = "block"
    REDIRECT = "redirect"


@dataclass(frozen=True)
class RequestEvent:
    url: str
    frame_id: int
    resource_type: ResourceType = ResourceType.OTHER


@dataclass(frozen=True)
class Decision:
    action: Action
    matched_rule: NetworkRule | None = None
    party_context: PartyContext = PartyContext.INDETERMINATE

    @property
    def resource(self) -> str | None:
        if self.action is Action.REDIRECT and self.matched_rule is not None:
            return self.matched_rule.redirect
        return None


@dataclass(frozen=True)
class FrameAdornment:
    frame_id: int
    hidden_selectors: tuple[str, ...] = ()
    injected_scriptlets: tuple[tuple[str, tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class LedgerEntry:
    url: str
    frame_id: int
    counted: bool


@dataclass(frozen=True)
class BlockLedger:
    """Blocked-request tallies for one top-level site."""

    site: str
    counted_blocks: int = 0
    actual_blocks: int = 0
    entries: tuple[LedgerEntry, ...] = ()


def _attribution_origin(
    frame: FrameNode, tree: FrameTree, policy: AttributionPolicy
) -> Origin:
    if policy.name is PolicyName.TOP_LEVEL_PARTYNESS:
        origin = tree.nodes[tree.root_id].resolved_origin
    else:
        origin = frame.resolved_origin
    if origin is None:
        raise ValueError(f"frame {frame.id} is not resolved; call resolve_tree first")
    return origin


def partyness(
    request_origin: Origin,
    frame: FrameNode,
    tree: FrameTree,
    policy: AttributionPolicy,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> PartyContext:
    """Party context of a request made inside a frame.

    First-party means same scheme and same registrable domain as the
    attribution origin (the containing frame's, or the top-level frame's
    under TopLevelPartyness). Opaque origins on either side make the
    context indeterminate.
    """
    tree.node(frame.id)  # raises UnknownFrame for foreign nodes
    frame_origin = _attribution_origin(frame, tree, policy)
    if request_origin.is_opaque or frame_origin.is_opaque:
        return PartyContext.INDETERMINATE
    same = request_origin.scheme == frame_origin.scheme and suffixes.registrable_domain(
        request_origin.host
    ) == suffixes.registrable_domain(frame_origin.host)
    return PartyContext.FIRST_PARTY if same else PartyContext.THIRD_PARTY


def _party_admits(rule: NetworkRule, party: PartyContext) -> bool:
    if rule.party is Party.ANY:
        return True
    # Party-restricted rules fail closed when the context is unknowable.
    if party is PartyContext.INDETERMINATE:
        return False
    if rule.party is Party.THIRD_ONLY:
        return party is PartyContext.THIRD_PARTY
    return party is PartyContext.FIRST_PARTY


def _frame_domain(
    frame: FrameNode, suffixes: SuffixRules
) -> str | None:
    origin = frame.resolved_origin
    if origin is None or origin.is_opaque:
        return None
    return suffixes.registrable_domain(origin.host)


def _matching_rules(
    ev: RequestEvent,
    frame: FrameNode,
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy,
    suffixes: SuffixRules,
) -> tuple[list[tuple[int, NetworkRule]], PartyContext]:
    req_origin = origin_of_url(ev.url)
    party = partyness(req_origin, frame, tree, policy, suffixes)
    frame_domain = _frame_domain(frame, suffixes)
    matches: list[tuple[int, NetworkRule]] = []
    for idx in rules.candidate_indexes(req_origin.host):
        rule = rules.network[idx]
        if not rule.admits_type(ev.resource_type):
            continue
        if not rule.domains.admits(frame_domain):
            continue
        if not _party_admits(rule, party):
            continue
        if not rules.pattern_matches(idx, ev.url):
            continue
        matches.append((idx, rule))
    return matches, party


def decide_request(
    ev: RequestEvent,
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> Decision:
    """Decide one request: exception beats redirect beats block.

    Ties within a precedence level go to the earliest rule in list order.
    Under SkipLocalFrames with skip_requests, events inside local frames
    are allowed without consulting the rules at all.
    """
    frame = tree.node(ev.frame_id)
    if policy.skip_requests and frame.source.is_local:
        req_origin = origin_of_url(ev.url)
        return Decision(Action.ALLOW, None, partyness(req_origin, frame, tree, policy, suffixes))

    matches, party = _matching_rules(ev, frame, tree, rules, policy, suffixes)
    exception = next((r for _, r in matches if r.is_exception), None)
    if exception is not None:
        return Decision(Action.ALLOW, exception, party)
    redirect = next((r for _, r in matches if r.redirect), None)
    if redirect is not None:
        return Decision(Action.REDIRECT, redirect, party)
    block = next((r for _, r in matches if not r.is_exception and not r.redirect), None)
    if block is not None:
        return Decision(Action.BLOCK, block, party)
    return Decision(Action.ALLOW, None, party)


def decide_replacement(
    ev: RequestEvent,
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> Decision:
    """Redirect pipeline only: block rules are ignored, exceptions still win.

    Validates that a chosen redirect target exists in the resource map
    (raises UnknownResource otherwise).
    """
    frame = tree.node(ev.frame_id)
    if policy.skip_requests and frame.source.is_local:
        req_origin = origin_of_url(ev.url)
        return Decision(Action.ALLOW, None, partyness(req_origin, frame, tree, policy, suffixes))

    matches, party = _matching_rules(ev, frame, tree, rules, policy, suffixes)
    exception = next((r for _, r in matches if r.is_exception), None)
    if exception is not None:
        return Decision(Action.ALLOW, exception, party)
    redirect = next((r for _, r in matches if r.redirect), None)
    if redirect is not None:
        rules.resource_body(redirect.redirect)  # must exist
        return Decision(Action.REDIRECT, redirect, party)
    return Decision(Action.ALLOW, None, party)


def adorn_frame(
    frame: FrameNode,
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> FrameAdornment:
    """Cosmetic selectors and scriptlets that apply inside a frame.

    Selector order follows rule order in the list. Policy skip flags empty
    the corresponding side for local frames.
    """
    frame = tree.node(frame.id)
    domain = _frame_domain(frame, suffixes)

    selectors: tuple[str, ...] = ()
    if policy.apply_cosmetics_in_local_frames or not frame.source.is_local:
        applied: list[str] = []
        excepted: set[str] = set()
        for rule in rules.cosmetic:
            if not rule.domains.admits(domain):
                continue
            if rule.is_exception:
                excepted.add(rule.selector)
            elif rule.selector not in applied:
                applied.append(rule.selector)
        selectors = tuple(s for s in applied if s not in excepted)

    injected: tuple[tuple[str, tuple[str, ...]], ...] = ()
    if policy.apply_scriptlets_in_local_frames or not frame.source.is_local:
        injected = tuple(
            (srule.name, srule.args)
            for srule in rules.scriptlets
            if srule.domains.admits(domain)
        )

    return FrameAdornment(frame_id=frame.id, hidden_selectors=selectors, injected_scriptlets=injected)


def account_blocks(
    events: list[RequestEvent],
    tree: FrameTree,
    rules: RuleSet,
    policy: AttributionPolicy = SPEC_CORRECT,
    suffixes: SuffixRules = DEFAULT_SUFFIXES,
) -> BlockLedger:
    """Tally blocked requests and how many of them the policy would report.

    Under DirectParentOnly a block inside a frame whose direct parent is
    itself a local frame is not counted; every other policy counts all
    blocks.
    """
    root_origin = tree.nodes[tree.root_id].resolved_origin
    site = suffixes.registrable_domain(root_origin.host) if root_origin else ""
    entries: list[LedgerEntry] = []
    actual = counted = 0
    for ev in events:
        decision = decide_request(ev, tree, rules, policy, suffixes)
        if decision.action is not Action.BLOCK:
            continue
        actual += 1
        frame = tree.node(ev.frame_id)
        is_counted = True
        if policy.name is PolicyName.DIRECT_PARENT_ONLY and frame.parent_id is not None:
            parent = tree.nodes[frame.parent_id]
            is_counted = not parent.source.is_local
        counted += 1 if is_counted else 0
        entries.append(LedgerEntry(url=ev.url, frame_id=ev.frame_id, counted=is_counted))
    return BlockLedger(site=site, counted_blocks=counted, actual_blocks=actual, entries=tuple(entries))
