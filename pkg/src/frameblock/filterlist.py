"""Parser for the filter-list dialect driving the decision engine.

The grammar is a closed subset of the EasyList language: network rules
with ||/|/^/* pattern syntax and the options third-party, ~third-party,
first-party, script, xhr, image, subdocument, domain=, redirect=;
cosmetic rules domain##selector (exception #@#); and scriptlet rules in
both ##+js(name, args) and #%#//scriptlet('name', 'args') spellings.
Anything outside the subset parses to Unsupported with a reason, never an
error: silently dropping an unknown option is how engines grow bypasses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

# Characters "^" treats as a separator: anything outside this set, or the
# end of the URL. De-facto EasyList convention.
SEPARATOR_EXEMPT = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.%-"
_SEPARATOR_RE = r"(?:[^A-Za-z0-9_.%\-]|$)"
# "||" anchors the match at the start of the hostname or right after a
# dot inside it.
_HOST_ANCHOR_RE = r"^[a-z][a-z0-9+.\-]*://(?:[a-z0-9.\-]*\.)?"

_PATTERN_SPECIALS = "^/*|:?="
_TYPE_OPTIONS = ("script", "xhr", "image", "subdocument")


class Party(Enum):
    ANY = "any"
    THIRD_ONLY = "third-party"
    FIRST_ONLY = "first-party"


class ResourceType(Enum):
    SCRIPT = "script"
    XHR = "xhr"
    IMAGE = "image"
    SUBDOCUMENT = "subdocument"
    OTHER = "other"


@dataclass(frozen=True)
class DomainScope:
    """Include/exclude lists of registrable domains; empty include = all."""

    include: tuple[str, ...] = ()
    exclude: tuple[str, ...] = ()

    def admits(self, domain: str | None) -> bool:
        if self.include:
            if domain is None or domain not in self.include:
                return False
        if domain is not None and domain in self.exclude:
            return False
        return True

    @property
    def empty(self) -> bool:
        return not self.include and not self.exclude


@dataclass(frozen=True)
class NetworkRule:
    pattern: str
    is_exception: bool = False
    party: Party = Party.ANY
    resource_types: frozenset[ResourceType] = frozenset()
    domains: DomainScope = DomainScope()
    redirect: str | None = None

    def admits_type(self, rtype: ResourceType) -> bool:
        return not self.resource_types or rtype in self.resource_types


@dataclass(frozen=True)
class CosmeticRule:
    selector: str
    domains: DomainScope = DomainScope()
    is_exception: bool = False


@dataclass(frozen=True)
class ScriptletRule:
    name: str
    args: tuple[str, ...] = ()
    domains: DomainScope = DomainScope()


@dataclass(frozen=True)
class Comment:
    text: str


@dataclass(frozen=True)
class Unsupported:
    line: str
    reason: str


ParsedLine = NetworkRule | CosmeticRule | ScriptletRule | Comment | Unsupported

SUPPORTED_SCRIPTLETS = frozenset({"set-constant"})

# Cosmetic operators outside plain CSS selection; rules using them fall
# out of the subset.
_PROCEDURAL_MARKERS = (
    ":has-text(",
    ":has(",
    ":xpath(",
    ":matches-css",
    ":upward(",
    ":-abp-",
    ":matches-path(",
    ":remove(",
    ":style(",
)


def _parse_domain_list(text: str, sep: str) -> DomainScope:
    include, exclude = [], []
    for item in text.split(sep):
        item = item.strip().lower()
        if not item:
            continue
        if item.startswith("~"):
            exclude.append(item[1:])
        else:
            include.append(item)
    return DomainScope(include=tuple(include), exclude=tuple(exclude))


def _split_args(inner: str) -> list[str]:
    """Split a scriptlet argument list on commas, honoring simple quotes."""
    args: list[str] = []
    buf: list[str] = []
    quote: str | None = None
    for ch in inner:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            args.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    if buf or args:
        args.append("".join(buf).strip())
    return [a for a in args]


def _parse_scriptlet(line: str, domains: DomainScope, inner: str) -> ParsedLine:
    args = _split_args(inner)
    if not args or not args[0]:
        return Unsupported(line, "scriptlet without a name")
    name, rest = args[0], tuple(args[1:])
    if name not in SUPPORTED_SCRIPTLETS:
        return Unsupported(line, f"unsupported scriptlet {name!r}")
    if not domains.include:
        return Unsupported(line, "scriptlet rules need at least one include domain")
    return ScriptletRule(name=name, args=rest, domains=domains)


def _parse_cosmetic_side(line: str, domains_text: str, marker: str, body: str) -> ParsedLine:
    domains = _parse_domain_list(domains_text, ",")
    if marker == "#%#":
        m = re.fullmatch(r"//scriptlet\((.*)\)", body.strip())
        if not m:
            return Unsupported(line, "non-scriptlet #%# injection")
        return _parse_scriptlet(line, domains, m.group(1))
    if body.startswith("+js("):
        if marker == "#@#":
            return Unsupported(line, "scriptlet exceptions are out of subset")
        if not body.endswith(")"):
            return Unsupported(line, "unterminated +js(")
        return _parse_scriptlet(line, domains, body[len("+js(") : -1])
    if not body:
        return Unsupported(line, "empty selector")
    if body.startswith("^"):
        return Unsupported(line, "HTML filtering is out of subset")
    for probe in _PROCEDURAL_MARKERS:
        if probe in body:
            return Unsupported(line, f"procedural cosmetic operator {probe!r}")
    return CosmeticRule(selector=body, domains=domains, is_exception=(marker == "#@#"))


def _parse_network(line: str) -> ParsedLine:
    text = line
    is_exception = text.startswith("@@")
    if is_exception:
        text = text[2:]

    options_text = ""
    if "$" in text:
        text, options_text = text.rsplit("$", 1)

    pattern = text
    if len(pattern) > 2 and pattern.startswith("/") and pattern.endswith("/"):
        return Unsupported(line, "regex rules are out of subset")

    party = Party.ANY
    party_seen = False
    rtypes: set[ResourceType] = set()
    domains = DomainScope()
    redirect: str | None = None

    if options_text:
        for opt in options_text.split(","):
            opt = opt.strip()
            if not opt:
                return Unsupported(line, "empty option")
            if opt in ("third-party", "~third-party", "first-party"):
                wanted = Party.THIRD_ONLY if opt == "third-party" else Party.FIRST_ONLY
                if party_seen and party is not wanted:
                    return Unsupported(line, "conflicting party options")
                party, party_seen = wanted, True
            elif opt in _TYPE_OPTIONS:
                rtypes.add(ResourceType(opt))
            elif opt.startswith("domain="):
                domains = _parse_domain_list(opt[len("domain=") :], "|")
                if domains.empty:
                    return Unsupported(line, "empty domain= option")
            elif opt.startswith("redirect="):
                redirect = opt[len("redirect=") :].strip()
                if not redirect:
                    return Unsupported(line, "empty redirect= option")
            else:
                return Unsupported(line, f"unknown option {opt!r}")

    if redirect and is_exception:
        return Unsupported(line, "exception rules cannot redirect")
    if not pattern and domains.empty:
        return Unsupported(line, "empty pattern without a domain restriction")

    return NetworkRule(
        pattern=pattern,
        is_exception=is_exception,
        party=party,
        resource_types=frozenset(rtypes),
        domains=domains,
        redirect=redirect,
    )


def parse_rule(line: str) -> ParsedLine:
    """Parse one filter-list line. Total: never raises on any input."""
    line = line.rstrip("\r\n")
    stripped = line.strip()
    if not stripped or stripped.startswith("!"):
        return Comment(stripped)
    if stripped.startswith("[") and stripped.endswith("]"):
        return Comment(stripped)  # list header, e.g. [Adblock Plus 2.0]

    hits = [
        (idx, marker)
        for marker in ("#@#", "#%#", "##", "#?#", "#$#")
        if (idx := stripped.find(marker)) != -1
    ]
    if hits:
        idx, marker = min(hits, key=lambda h: (h[0], -len(h[1])))
        if marker in ("#?#", "#$#"):
            return Unsupported(line, f"cosmetic marker {marker!r} is out of subset")
        return _parse_cosmetic_side(line, stripped[:idx], marker, stripped[idx + len(marker) :])

    return _parse_network(stripped)


def render_rule(rule: NetworkRule | CosmeticRule | ScriptletRule) -> str:
    """Canonical text for a parsed rule; reparses to an equal rule."""
    if isinstance(rule, NetworkRule):
        opts: list[str] = []
        if rule.party is Party.THIRD_ONLY:
            opts.append("third-party")
        elif rule.party is Party.FIRST_ONLY:
            opts.append("~third-party")
        opts.extend(sorted(t.value for t in rule.resource_types))
        if not rule.domains.empty:
            items = list(rule.domains.include) + ["~" + d for d in rule.domains.exclude]
            opts.append("domain=" + "|".join(items))
        if rule.redirect:
            opts.append("redirect=" + rule.redirect)
        text = ("@@" if rule.is_exception else "") + rule.pattern
        return text + ("$" + ",".join(opts) if opts else "")
    if isinstance(rule, CosmeticRule):
        items = list(rule.domains.include) + ["~" + d for d in rule.domains.exclude]
        marker = "#@#" if rule.is_exception else "##"
        return ",".join(items) + marker + rule.selector
    items = list(rule.domains.include) + ["~" + d for d in rule.domains.exclude]
    inner = ", ".join([rule.name, *rule.args])
    return ",".join(items) + f"##+js({inner})"


# ---------------------------------------------------------------------------
# Compiled matching and the rule-set indexes


def compile_pattern(pattern: str) -> re.Pattern[str]:
    """Translate a match pattern to a regex over the lowercased URL."""
    parts: list[str] = []
    i = 0
    if pattern.startswith("||"):
        parts.append(_HOST_ANCHOR_RE)
        i = 2
    elif pattern.startswith("|"):
        parts.append("^")
        i = 1
    end = len(pattern)
    end_anchor = False
    if end > i and pattern.endswith("|"):
        end_anchor = True
        end -= 1
    for ch in pattern[i:end]:
        if ch == "*":
            parts.append(".*")
        elif ch == "^":
            parts.append(_SEPARATOR_RE)
        else:
            parts.append(re.escape(ch.lower()))
    if end_anchor:
        parts.append("$")
    return re.compile("".join(parts))


def anchor_host(pattern: str) -> str | None:
    """The literal hostname a ||-anchored pattern starts with, if usable."""
    if not pattern.startswith("||"):
        return None
    host = pattern[2:]
    for j, ch in enumerate(host):
        if ch in _PATTERN_SPECIALS:
            host = host[:j]
            break
    host = host.lower()
    if not host or not re.fullmatch(r"[a-z0-9.\-]+", host):
        return None
    return host


class _HostTrie:
    """Character trie over anchor hosts.

    Queried with every dot-boundary suffix of a request host; collects the
    rules at every prefix passed, so "||example.co" is found for host
    "example.com" even though the anchor stops mid-label.
    """

    __slots__ = ("_root",)

    def __init__(self) -> None:
        self._root: dict = {}

    def insert(self, host: str, value: int) -> None:
        node = self._root
        for ch in host:
            node = node.setdefault(ch, {})
        node.setdefault(None, []).append(value)

    def collect(self, text: str) -> list[int]:
        """All values whose key is a prefix of text."""
        out: list[int] = []
        node = self._root
        if None in node:
            out.extend(node[None])
        for ch in text:
            node = node.get(ch)
            if node is None:
                break
            if None in node:
                out.extend(node[None])
        return out


@dataclass
class ParseReport:
    n_network: int = 0
    n_cosmetic: int = 0
    n_scriptlet: int = 0
    n_comment: int = 0
    n_unsupported: int = 0
    unsupported: list[tuple[int, str, str]] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {
            "network": self.n_network,
            "cosmetic": self.n_cosmetic,
            "scriptlet": self.n_scriptlet,
            "comment": self.n_comment,
            "unsupported": self.n_unsupported,
        }


class RuleSet:
    """Parsed rules plus matching indexes.

    The indexes are pure functions of the flat lists: network rules with a
    usable ||-anchor live in a host trie, everything else in an
    always-checked bucket, so index-driven candidate collection can only
    over-approximate a linear scan (the engine re-verifies each candidate).
    """

    def __init__(
        self,
        network: Iterable[NetworkRule] | None = None,
        cosmetic: Iterable[CosmeticRule] | None = None,
        scriptlets: Iterable[ScriptletRule] | None = None,
        resources: dict[str, str] | None = None,
    ):
        self.network: tuple[NetworkRule, ...] = tuple(network or ())
        self.cosmetic: tuple[CosmeticRule, ...] = tuple(cosmetic or ())
        self.scriptlets: tuple[ScriptletRule, ...] = tuple(scriptlets or ())
        self.resources: dict[str, str] = dict(resources or {})
        self._compiled: list[re.Pattern[str]] = []
        self._trie = _HostTrie()
        self._unanchored: list[int] = []
        self.cosmetic_generic: tuple[CosmeticRule, ...] = ()
        self.cosmetic_by_domain: dict[str, list[CosmeticRule]] = {}
        self.scriptlets_by_domain: dict[str, list[ScriptletRule]] = {}
        self._reindex()

    def _reindex(self) -> None:
        self._compiled = [compile_pattern(r.pattern) for r in self.network]
        self._trie = _HostTrie()
        self._unanchored = []
        for idx, rule in enumerate(self.network):
            host = anchor_host(rule.pattern)
            if host is None:
                self._unanchored.append(idx)
            else:
                self._trie.insert(host, idx)
        self.cosmetic_generic = tuple(r for r in self.cosmetic if not r.domains.include)
        self.cosmetic_by_domain = {}
        for rule in self.cosmetic:
            for dom in rule.domains.include:
                self.cosmetic_by_domain.setdefault(dom, []).append(rule)
        self.scriptlets_by_domain = {}
        for srule in self.scriptlets:
            for dom in srule.domains.include:
                self.scriptlets_by_domain.setdefault(dom, []).append(srule)

    def candidate_indexes(self, url_host: str) -> list[int]:
        """Network-rule indexes worth testing for a URL on this host, in list order."""
        found = set(self._unanchored)
        host = url_host.lower()
        labels = host.split(".")
        for i in range(len(labels)):
            found.update(self._trie.collect(".".join(labels[i:])))
        return sorted(found)

    def pattern_matches(self, idx: int, url: str) -> bool:
        return self._compiled[idx].search(url.lower()) is not None

    def resource_body(self, name: str) -> str:
        from .errors import UnknownResource

        if name not in self.resources:
            raise UnknownResource(name)
        return self.resources[name]

    def with_resources(self, resources: dict[str, str]) -> "RuleSet":
        merged = dict(self.resources)
        merged.update(resources)
        return RuleSet(self.network, self.cosmetic, self.scriptlets, merged)


def parse_list(text: str, resources: dict[str, str] | None = None) -> tuple[RuleSet, ParseReport]:
    """Parse a whole list, preserving rule order within each category."""
    report = ParseReport()
    network: list[NetworkRule] = []
    cosmetic: list[CosmeticRule] = []
    scriptlets: list[ScriptletRule] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parsed = parse_rule(line)
        if isinstance(parsed, NetworkRule):
            report.n_network += 1
            network.append(parsed)
        elif isinstance(parsed, CosmeticRule):
            report.n_cosmetic += 1
            cosmetic.append(parsed)
        elif isinstance(parsed, ScriptletRule):
            report.n_scriptlet += 1
            scriptlets.append(parsed)
        elif isinstance(parsed, Comment):
            report.n_comment += 1
        else:
            report.n_unsupported += 1
            report.unsupported.append((lineno, line, parsed.reason))
    return RuleSet(network, cosmetic, scriptlets, resources), report


def count_party_modified(rules: RuleSet) -> int:
    """Network rules whose party is restricted either way."""
    return sum(1 for r in rules.network if r.party is not Party.ANY)
