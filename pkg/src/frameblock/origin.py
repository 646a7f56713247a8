"""Security origins and their resolution across iframe trees.

A frame whose src is a real URL gets its origin from that URL. Frames with
"local" sources (about:blank, about:srcdoc, blob:) load an empty document
and inherit the origin of the document that created them; data: URIs and
unrecognized about: URIs get a fresh opaque origin instead. Resolution is a
single top-down pass over the tree, parameterized by an attribution policy
so that known mis-attribution behaviors can be emulated alongside the
standard one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Iterable
from urllib.parse import urlsplit

from .errors import MalformedUrl

if TYPE_CHECKING:  # circular at runtime: engine imports origin
    from .engine import AttributionPolicy

_DEFAULT_PORTS = {"http": 80, "https": 443, "ws": 80, "wss": 443, "ftp": 21}


class OriginKind(Enum):
    TUPLE = "tuple"
    OPAQUE = "opaque"


@dataclass(frozen=True)
class Origin:
    """A (scheme, host, port) triple, or an opaque marker.

    Tuple origins compare equal iff scheme, full host, and effective port
    all match. Opaque origins carry a minted token and compare equal only
    to origins minted with the same token; resolution mints tokens
    deterministically from the frame id so re-resolving a tree is a no-op.
    """

    kind: OriginKind
    scheme: str = ""
    host: str = ""
    port: int = 0
    opaque_id: str = ""

    @classmethod
    def tuple_of(cls, scheme: str, host: str, port: int | None = None) -> Origin:
        scheme = scheme.lower()
        if not scheme:
            raise ValueError("tuple origins need a scheme")
        if port is None:
            port = _DEFAULT_PORTS.get(scheme, 0)
        return cls(OriginKind.TUPLE, scheme=scheme, host=host.lower(), port=port)

    @classmethod
    def opaque(cls, token: str) -> Origin:
        return cls(OriginKind.OPAQUE, opaque_id=token)

    @property
    def is_opaque(self) -> bool:
        return self.kind is OriginKind.OPAQUE

    def __str__(self) -> str:
        if self.is_opaque:
            return f"opaque({self.opaque_id})"
        return f"{self.scheme}://{self.host}:{self.port}"


class SourceKind(Enum):
    URL = "url"
    ABOUT_BLANK = "about:blank"
    ABOUT_SRCDOC = "about:srcdoc"
    ABOUT_OTHER = "about:other"
    BLOB = "blob"
    DATA = "data"
    FILE_URI = "file"


# Sources that start out as an empty document in the creator's browsing
# context. file: and real URLs load their own document, so they are not
# local-frame candidates.
LOCAL_KINDS = frozenset(
    {
        SourceKind.ABOUT_BLANK,
        SourceKind.ABOUT_SRCDOC,
        SourceKind.ABOUT_OTHER,
        SourceKind.BLOB,
        SourceKind.DATA,
    }
)


@dataclass(frozen=True)
class FrameSource:
    raw: str
    kind: SourceKind

    @property
    def is_local(self) -> bool:
        return self.kind in LOCAL_KINDS


def classify_source(raw: str) -> FrameSource:
    """Classify a frame src string by its scheme prefix.

    Total function: any string classifies. The empty string maps to
    about:blank, matching the browser default for iframes with no src.
    """
    stripped = raw.strip().lower()
    if stripped == "" or stripped == "about:blank":
        kind = SourceKind.ABOUT_BLANK
    elif stripped == "about:srcdoc":
        kind = SourceKind.ABOUT_SRCDOC
    elif stripped.startswith("about:"):
        kind = SourceKind.ABOUT_OTHER
    elif stripped.startswith("blob:"):
        kind = SourceKind.BLOB
    elif stripped.startswith("data:"):
        kind = SourceKind.DATA
    elif stripped.startswith("file:"):
        kind = SourceKind.FILE_URI
    else:
        kind = SourceKind.URL
    return FrameSource(raw=raw, kind=kind)


def origin_of_url(url: str) -> Origin:
    """Extract the tuple origin of a scheme://host[:port] URL.

    Raises MalformedUrl when either the scheme or the host is missing,
    e.g. for about:/data:/blob: URIs; those must go through
    resolve_frame_origin instead.
    """
    try:
        parts = urlsplit(url.strip())
        scheme = parts.scheme.lower()
        host = parts.hostname or ""
        port = parts.port
    except ValueError:
        raise MalformedUrl(url) from None
    if not scheme or not host:
        raise MalformedUrl(url)
    if port is None:
        port = _DEFAULT_PORTS.get(scheme, 0)
    return Origin.tuple_of(scheme, host, port)


@dataclass(frozen=True)
class FrameNode:
    """One frame in a page. Immutable; resolution returns updated copies."""

    id: int
    source: FrameSource
    parent_id: int | None = None
    creator_origin: Origin | None = None
    resolved_origin: Origin | None = None
    children: tuple[int, ...] = ()


@dataclass(frozen=True)
class FrameTree:
    nodes: dict[int, FrameNode]
    root_id: int

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        roots = [n for n in self.nodes.values() if n.parent_id is None]
        if len(roots) != 1 or roots[0].id != self.root_id:
            raise ValueError("tree must have exactly one parentless node, the root")
        if self.nodes[self.root_id].source.kind is not SourceKind.URL:
            raise ValueError("root frame must have a URL source")
        for node in self.nodes.values():
            if node.parent_id is not None:
                parent = self.nodes.get(node.parent_id)
                if parent is None:
                    raise ValueError(f"frame {node.id} has unknown parent {node.parent_id}")
                if node.id not in parent.children:
                    raise ValueError(f"frame {node.id} missing from parent's child list")
            for child in node.children:
                if child not in self.nodes or self.nodes[child].parent_id != node.id:
                    raise ValueError(f"frame {node.id} lists inconsistent child {child}")
        # Walk up from every node; a cycle would never reach the root.
        for node in self.nodes.values():
            seen = set()
            cur: FrameNode | None = node
            while cur is not None and cur.parent_id is not None:
                if cur.id in seen:
                    raise ValueError("parent links form a cycle")
                seen.add(cur.id)
                cur = self.nodes[cur.parent_id]

    def node(self, frame_id: int) -> FrameNode:
        try:
            return self.nodes[frame_id]
        except KeyError:
            from .errors import UnknownFrame

            raise UnknownFrame(frame_id) from None

    def walk(self) -> Iterable[FrameNode]:
        """Yield nodes top-down, parents before children."""
        stack = [self.root_id]
        while stack:
            node = self.nodes[stack.pop(0)]
            yield node
            stack.extend(node.children)

    @classmethod
    def build(cls, frames: Iterable[tuple[int, str, int | None]]) -> FrameTree:
        """Build a tree from (id, src, parent_id) triples; children follow input order."""
        nodes: dict[int, FrameNode] = {}
        children: dict[int, list[int]] = {}
        root_id = None
        for fid, src, parent in frames:
            nodes[fid] = FrameNode(id=fid, source=classify_source(src), parent_id=parent)
            if parent is None:
                root_id = fid
            else:
                children.setdefault(parent, []).append(fid)
        if root_id is None:
            raise ValueError("no root frame given")
        for fid, kids in children.items():
            nodes[fid] = replace(nodes[fid], children=tuple(kids))
        return cls(nodes=nodes, root_id=root_id)


def resolve_frame_origin(
    node: FrameNode,
    policy: "AttributionPolicy",
    root_origin: Origin | None = None,
) -> Origin:
    """Resolve one frame's origin given its already-resolved creator.

    The policy name selects the resolution behavior; root_origin is
    required for policies that collapse local frames onto the top-level
    origin. URL frames always resolve from their own URL.
    """
    from .engine import PolicyName

    kind = node.source.kind
    if kind is SourceKind.URL:
        try:
            return origin_of_url(node.source.raw)
        except MalformedUrl:
            raise MalformedUrl(node.source.raw, frame_id=node.id) from None

    if node.source.is_local:
        if policy.name is PolicyName.FIRST_PARTY_FALLBACK:
            if root_origin is None:
                raise ValueError("FirstPartyFallback needs the root origin")
            return root_origin
        if policy.name is PolicyName.LITERAL_SELF:
            return Origin.opaque(f"about:blank@frame-{node.id}")

    # Standard behavior (also used by the remaining emulation policies,
    # which differ in rule application or accounting, not origins).
    if kind in (SourceKind.ABOUT_BLANK, SourceKind.ABOUT_SRCDOC, SourceKind.BLOB):
        if node.creator_origin is None:
            raise ValueError(f"frame {node.id} has no resolved creator origin")
        return node.creator_origin
    # data:, unrecognized about:, and file: get an empty security context.
    return Origin.opaque(f"frame-{node.id}")


def resolve_tree(tree: FrameTree, policy: "AttributionPolicy") -> FrameTree:
    """Resolve every frame's origin in a single top-down pass.

    Returns a new tree; the input is untouched. creator_origin of each
    child is the resolved origin of its parent (frames are created by
    their parent document in this model). Idempotent: re-resolving a
    resolved tree yields an equal tree.
    """
    resolved: dict[int, FrameNode] = {}
    root = tree.nodes[tree.root_id]
    try:
        root_origin = origin_of_url(root.source.raw)
    except MalformedUrl:
        raise MalformedUrl(root.source.raw, frame_id=root.id) from None
    resolved[root.id] = replace(root, resolved_origin=root_origin)

    queue = list(root.children)
    while queue:
        node = tree.nodes[queue.pop(0)]
        parent = resolved[node.parent_id]  # parents precede children
        node = replace(node, creator_origin=parent.resolved_origin)
        node = replace(
            node,
            resolved_origin=resolve_frame_origin(node, policy, root_origin=root_origin),
        )
        resolved[node.id] = node
        queue.extend(node.children)
    return FrameTree(nodes=resolved, root_id=tree.root_id)


# ---------------------------------------------------------------------------
# Registrable domains (public-suffix style)

# Minimal fallback so party comparisons work without a suffix file. Real
# deployments should load a full public-suffix snapshot instead.
_BUILTIN_SUFFIXES = """\
com
net
org
edu
gov
io
co
uk
co.uk
org.uk
ac.uk
gov.uk
de
fr
nl
jp
co.jp
au
com.au
ru
br
com.br
google
ms
tv
info
biz
me
app
dev
"""


class SuffixRules:
    """Public-suffix-style rules: one suffix per line, '#' comments."""

    def __init__(self, suffixes: Iterable[str]):
        self._suffixes = frozenset(s.lower().strip(".") for s in suffixes if s)

    @classmethod
    def parse(cls, text: str) -> SuffixRules:
        out = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            out.append(line)
        return cls(out)

    @classmethod
    def from_file(cls, path: str) -> SuffixRules:
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    @classmethod
    def builtin(cls) -> SuffixRules:
        return cls.parse(_BUILTIN_SUFFIXES)

    def __contains__(self, suffix: str) -> bool:
        return suffix.lower() in self._suffixes

    def registrable_domain(self, host: str) -> str:
        """Longest matching suffix plus one label.

        Falls back to the last two labels when no rule matches (the
        implicit root rule of the reference algorithm), or the host
        itself when it has at most two labels or is itself a suffix.
        """
        host = host.lower().strip(".")
        labels = host.split(".")
        best = -1  # number of labels in the longest matching suffix
        for i in range(len(labels)):
            if ".".join(labels[i:]) in self._suffixes:
                best = len(labels) - i
                break  # scanning longest-first: first hit wins
        if best == -1:
            if len(labels) <= 2:
                return host
            return ".".join(labels[-2:])
        if best >= len(labels):
            return host
        return ".".join(labels[-(best + 1) :])


DEFAULT_SUFFIXES = SuffixRules.builtin()


def registrable_domain(host: str, suffix_rules: SuffixRules | None = None) -> str:
    rules = suffix_rules if suffix_rules is not None else DEFAULT_SUFFIXES
    return rules.registrable_domain(host)
