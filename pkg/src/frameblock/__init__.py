"""Frame-tree-aware content filtering: origins, rules, decisions, analysis."""

from .engine import (
    Action,
    AttributionPolicy,
    BlockLedger,
    Decision,
    FrameAdornment,
    PartyContext,
    PolicyName,
    RequestEvent,
    SPEC_CORRECT,
    account_blocks,
    adorn_frame,
    decide_replacement,
    decide_request,
    partyness,
)
from .errors import (
    FrameblockError,
    MalformedLog,
    MalformedUrl,
    UnknownFrame,
    UnknownResource,
)
from .filterlist import (
    Comment,
    CosmeticRule,
    DomainScope,
    NetworkRule,
    ParseReport,
    Party,
    ResourceType,
    RuleSet,
    ScriptletRule,
    Unsupported,
    count_party_modified,
    parse_list,
    parse_rule,
    render_rule,
)
from .origin import (
    DEFAULT_SUFFIXES,
    FrameNode,
    FrameSource,
    FrameTree,
    Origin,
    OriginKind,
    SourceKind,
    SuffixRules,
    classify_source,
    origin_of_url,
    registrable_domain,
    resolve_frame_origin,
    resolve_tree,
)

__version__ = "0.1.0"
