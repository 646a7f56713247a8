from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, strategies as st

from frameblock import (
    MalformedUrl,
    Origin,
    SourceKind,
    SuffixRules,
    classify_source,
    origin_of_url,
    registrable_domain,
    resolve_frame_origin,
    resolve_tree,
)
from frameblock.engine import AttributionPolicy, PolicyName, SPEC_CORRECT
from frameblock.origin import FrameNode, FrameTree

from casegen import ALL_POLICIES, random_tree
from conftest import DATA_DIR


# ---------------------------------------------------------------------------
# classify_source


@pytest.mark.parametrize(
    "raw,kind",
    [
        ("about:blank", SourceKind.ABOUT_BLANK),
        ("https://thirdparty.com", SourceKind.URL),
        ("about:srcdoc", SourceKind.ABOUT_SRCDOC),
        ("", SourceKind.ABOUT_BLANK),
        ("ABOUT:BLANK", SourceKind.ABOUT_BLANK),
        ("  about:blank  ", SourceKind.ABOUT_BLANK),
        ("about:config", SourceKind.ABOUT_OTHER),
        ("blob:https://a.com/x", SourceKind.BLOB),
        ("DATA:text/html,hi", SourceKind.DATA),
        ("file:///etc/motd", SourceKind.FILE_URI),
        ("javascript:void(0)", SourceKind.URL),
    ],
)
def test_classify_source(raw, kind):
    assert classify_source(raw).kind is kind


def test_classify_source_fixture():
    # Captured from a reference browser's frame-origin behavior: kinds per
    # src string, including the empty-src default.
    fixture = json.loads((DATA_DIR / "frame_src_kinds.json").read_text())
    for case in fixture:
        assert classify_source(case["src"]).kind.value == case["kind"], case


@given(st.text(max_size=64))
def test_classify_source_total(raw):
    source = classify_source(raw)
    assert source.kind in SourceKind
    # local-candidate kinds and only those
    assert source.is_local == (source.kind not in (SourceKind.URL, SourceKind.FILE_URI))


# ---------------------------------------------------------------------------
# origin_of_url


def test_origin_of_url_defaults_https_port():
    assert origin_of_url("https://firstparty.com/a.js") == Origin.tuple_of("https", "firstparty.com", 443)


def test_origin_of_url_explicit_port():
    assert origin_of_url("http://thirdparty.com:8080/x") == Origin.tuple_of("http", "thirdparty.com", 8080)


def test_origin_of_url_lowercases():
    assert origin_of_url("HTTPS://ThirdParty.COM/Q") == Origin.tuple_of("https", "thirdparty.com", 443)


@pytest.mark.parametrize("bad", ["about:blank", "data:text/html,x", "not a url", "", "https://"])
def test_origin_of_url_rejects_hostless(bad):
    with pytest.raises(MalformedUrl):
        origin_of_url(bad)


def test_opaque_never_equals_tuple():
    assert Origin.opaque("frame-1") != Origin.tuple_of("https", "a.com")
    assert Origin.opaque("frame-1") != Origin.opaque("frame-2")


# ---------------------------------------------------------------------------
# frame resolution


def test_resolve_local_frame_inherits_creator():
    creator = Origin.tuple_of("https", "firstparty.com", 443)
    node = FrameNode(id=7, source=classify_source("about:blank"), parent_id=1, creator_origin=creator)
    assert resolve_frame_origin(node, SPEC_CORRECT) == creator

    third = Origin.tuple_of("https", "thirdparty.com", 443)
    node = FrameNode(id=8, source=classify_source("about:blank"), parent_id=4, creator_origin=third)
    assert resolve_frame_origin(node, SPEC_CORRECT) == third


def test_resolve_blob_frame_inherits_creator():
    creator = Origin.tuple_of("https", "firstparty.com", 443)
    node = FrameNode(
        id=9,
        source=classify_source("blob:https://firstparty.com/u-1"),
        parent_id=1,
        creator_origin=creator,
    )
    assert resolve_frame_origin(node, SPEC_CORRECT) == creator


def test_resolve_data_frame_is_opaque():
    node = FrameNode(
        id=9,
        source=classify_source("data:text/html,x"),
        parent_id=1,
        creator_origin=Origin.tuple_of("https", "firstparty.com"),
    )
    assert resolve_frame_origin(node, SPEC_CORRECT).is_opaque


def test_resolve_first_party_fallback_uses_root():
    root = Origin.tuple_of("https", "firstparty.com", 443)
    node = FrameNode(
        id=9,
        source=classify_source("about:blank"),
        parent_id=4,
        creator_origin=Origin.tuple_of("https", "thirdparty.com", 443),
    )
    policy = AttributionPolicy.preset(PolicyName.FIRST_PARTY_FALLBACK)
    assert resolve_frame_origin(node, policy, root_origin=root) == root


def test_resolve_literal_self_is_tagged_opaque():
    node = FrameNode(
        id=3,
        source=classify_source("about:blank"),
        parent_id=1,
        creator_origin=Origin.tuple_of("https", "thirdparty.com"),
    )
    origin = resolve_frame_origin(node, AttributionPolicy.preset(PolicyName.LITERAL_SELF))
    assert origin.is_opaque and "about:blank" in origin.opaque_id


def test_resolve_tree_nested_chain(listing_tree):
    resolved = resolve_tree(listing_tree, SPEC_CORRECT)
    third = Origin.tuple_of("https", "thirdparty.com", 443)
    first = Origin.tuple_of("https", "firstparty.com", 443)
    assert resolved.nodes[6].resolved_origin == third  # nested local frame
    assert resolved.nodes[5].resolved_origin == third
    assert resolved.nodes[3].resolved_origin == first
    assert resolved.nodes[2].resolved_origin == first
    # creation-by-parent model: each child's creator is its parent's origin
    for node in resolved.walk():
        if node.parent_id is not None:
            assert node.creator_origin == resolved.nodes[node.parent_id].resolved_origin


def test_resolve_tree_single_node():
    tree = FrameTree.build([(1, "https://solo.example", None)])
    resolved = resolve_tree(tree, SPEC_CORRECT)
    assert resolved.nodes[1].resolved_origin == origin_of_url("https://solo.example")


def test_resolve_tree_first_party_fallback(listing_tree):
    resolved = resolve_tree(listing_tree, AttributionPolicy.preset(PolicyName.FIRST_PARTY_FALLBACK))
    first = Origin.tuple_of("https", "firstparty.com", 443)
    for fid in (2, 3, 5, 6):  # every local frame collapses onto the root
        assert resolved.nodes[fid].resolved_origin == first
    assert resolved.nodes[4].resolved_origin == Origin.tuple_of("https", "thirdparty.com", 443)


def test_resolve_tree_reports_offending_frame():
    tree = FrameTree.build([(1, "https://ok.example", None), (2, "https://:bad:", 1)])
    with pytest.raises(MalformedUrl) as err:
        resolve_tree(tree, SPEC_CORRECT)
    assert err.value.frame_id == 2


def test_tree_validation_rejects_cycles_and_orphans():
    with pytest.raises(ValueError):
        FrameTree(
            nodes={
                1: FrameNode(id=1, source=classify_source("https://a.com"), children=(2,)),
                2: FrameNode(id=2, source=classify_source("about:blank"), parent_id=1, children=(3,)),
                3: FrameNode(id=3, source=classify_source("about:blank"), parent_id=3),
            },
            root_id=1,
        )
    with pytest.raises(ValueError):
        FrameTree.build([(1, "about:blank", None)])  # root must be a URL frame


# ---------------------------------------------------------------------------
# property suite: idempotence and the nearest-ancestor law


def _expected_spec_origin(tree, node):
    """Independent restatement of the inheritance chain for local frames."""
    chain_breakers = (SourceKind.DATA, SourceKind.ABOUT_OTHER, SourceKind.FILE_URI)
    cur = node
    while True:
        if cur.source.kind is SourceKind.URL:
            return origin_of_url(cur.source.raw)
        if cur.source.kind in chain_breakers:
            return None  # opaque
        cur = tree.nodes[cur.parent_id]


def test_origin_properties_on_random_trees():
    rng = random.Random(0x5EED)
    for i in range(500):
        tree = random_tree(rng, max_depth=4, allow_file=True)
        policy = ALL_POLICIES[i % len(ALL_POLICIES)]
        resolved = resolve_tree(tree, policy)
        assert resolve_tree(resolved, policy) == resolved, "resolution must be idempotent"
        if policy.name is PolicyName.SPEC_CORRECT:
            for node in resolved.walk():
                expected = _expected_spec_origin(resolved, node)
                if expected is None:
                    assert node.resolved_origin.is_opaque
                else:
                    assert node.resolved_origin == expected


# ---------------------------------------------------------------------------
# registrable domains


def test_registrable_domain_examples():
    rules = SuffixRules.parse("com\nco.uk\n")
    assert rules.registrable_domain("cdn.firstparty.com") == "firstparty.com"
    assert rules.registrable_domain("a.b.co.uk") == "b.co.uk"
    assert rules.registrable_domain("localhost") == "localhost"


def test_registrable_domain_default_rules():
    assert registrable_domain("sub.shop.example.com") == "example.com"
    assert registrable_domain("adtrafficquality.google") == "adtrafficquality.google"
    assert registrable_domain("media.eps.co.uk") == "eps.co.uk"


def test_registrable_domain_no_rule_fallback():
    rules = SuffixRules.parse("com\n")
    # unmatched suffix: implicit root rule keeps the last two labels
    assert rules.registrable_domain("a.b.c.internal") == "c.internal"
    assert rules.registrable_domain("x.internal") == "x.internal"
    # host that is itself a suffix stays unchanged
    assert rules.registrable_domain("com") == "com"


def test_suffix_rules_file_format(tmp_path):
    path = tmp_path / "suffixes.txt"
    path.write_text("# comment\ncom\n\nco.uk\n", encoding="utf-8")
    rules = SuffixRules.from_file(str(path))
    assert rules.registrable_domain("x.y.co.uk") == "y.co.uk"


@given(st.from_regex(r"[a-z]{1,6}(\.[a-z]{2,4}){0,4}", fullmatch=True))
def test_registrable_domain_is_suffix_of_host(host):
    domain = registrable_domain(host)
    assert host == domain or host.endswith("." + domain)
