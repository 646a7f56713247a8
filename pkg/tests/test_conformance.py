from __future__ import annotations

import pytest

from frameblock import RuleSet, UnknownResource, parse_list
from frameblock.conformance import (
    CatalogTest,
    Matrix,
    PageSpec,
    ProbeError,
    ToolProfile,
    builtin_catalog,
    builtin_profiles,
    diff_matrices,
    parse_policy,
    run_profiles,
    run_test,
    spoof_map,
)
from frameblock.engine import AttributionPolicy, PolicyName, SPEC_CORRECT

FP_FRAMES = ("first-party body", "first-party local frame", "first-party nested local frame")
TP_FRAMES = ("third-party iframe", "third-party local frame", "third-party nested local frame")
FP_SCRIPT = "req:https://firstparty.com/script.js"
TP_SCRIPT = "req:https://thirdparty.com/script.js"


@pytest.fixture(scope="module")
def catalog() -> dict[str, CatalogTest]:
    return {t.test_id: t for t in builtin_catalog()}


def _actual(test: CatalogTest, run_index: int = 0, policy=SPEC_CORRECT) -> Matrix:
    run = test.runs[run_index]
    return run_test(test.page, run.rule_set(), policy, test_id=test.test_id)


def test_catalog_has_the_expected_tests(catalog):
    core = {"RQ1", "RQ1a", "RQ1b", "RQ2", "RQ3", "RQ4", "NestedAccounting"}
    extensions = {"RQ1-intermediate", "RQ1-xhr"}
    assert set(catalog) == core | extensions


def test_rq1_expected_matrix_blocks_all_cells(catalog):
    expected = catalog["RQ1"].runs[0].expected
    assert len(expected.cells) == 12
    assert set(expected.cells.values()) == {"block"}
    assert expected.outcome("third-party nested local frame", TP_SCRIPT) == "block"


def test_rq3_expected_values(catalog):
    expected = catalog["RQ3"].runs[0].expected
    for frame in FP_FRAMES:
        assert expected.outcome(frame, "scriptlet:scriptletvalue") == "1"
    for frame in TP_FRAMES:
        assert expected.outcome(frame, "scriptlet:scriptletvalue") == "42"


def test_rq4_expected_hides_exactly_third_party_frames(catalog):
    expected = catalog["RQ4"].runs[0].expected
    hidden = {f for (f, _), v in expected.cells.items() if v == "hidden"}
    assert hidden == set(TP_FRAMES)


def test_baseline_no_rules_allows_everything(catalog):
    empty = RuleSet()
    actual = run_test(catalog["RQ1"].page, empty, SPEC_CORRECT)
    assert set(actual.cells.values()) == {"allow"}
    actual = run_test(catalog["RQ4"].page, empty, SPEC_CORRECT)
    assert set(actual.cells.values()) == {"visible"}


def test_run_test_is_deterministic(catalog):
    test = catalog["RQ2"]
    first = _actual(test)
    second = _actual(test)
    assert first == second


def test_spec_correct_passes_every_catalog_run(catalog):
    for test in catalog.values():
        for i, run in enumerate(test.runs):
            actual = _actual(test, i)
            assert not diff_matrices(run.expected, actual), (test.test_id, run.label)


def test_rq1a_rq1b_are_cellwise_complements(catalog):
    a = _actual(catalog["RQ1a"])
    b = _actual(catalog["RQ1b"])
    flip = {"allow": "block", "block": "allow"}
    assert set(a.cells) == set(b.cells)
    for key, outcome in a.cells.items():
        assert b.cells[key] == flip[outcome]


def test_skip_local_frames_only_diverges_inside_local_frames(catalog):
    skip = AttributionPolicy.preset(PolicyName.SKIP_LOCAL_FRAMES, skip_requests=True)
    local = {
        "first-party local frame",
        "first-party nested local frame",
        "third-party local frame",
        "third-party nested local frame",
        "intermediate local frame",
        "intermediate nested local frame",
    }
    for test in catalog.values():
        for i in range(len(test.runs)):
            base = _actual(test, i)
            skewed = _actual(test, i, policy=skip)
            for (frame, probe), outcome in base.cells.items():
                if frame not in local:
                    assert skewed.cells.get((frame, probe)) == outcome, (test.test_id, frame, probe)


def test_rq4_skip_local_frames_cell_pattern(catalog):
    """Cosmetics skipped in local frames: the non-local third-party iframe
    is still hidden while every local frame stays visible."""
    skip = AttributionPolicy.preset(PolicyName.SKIP_LOCAL_FRAMES)
    actual = _actual(catalog["RQ4"], policy=skip)
    el = "el:h1.cosmetic-filter"
    assert actual.outcome("third-party iframe", el) == "hidden"
    for frame in (
        "first-party local frame",
        "first-party nested local frame",
        "third-party local frame",
        "third-party nested local frame",
    ):
        assert actual.outcome(frame, el) == "visible"


def test_rq2_skip_requests_bypasses_replacement(catalog):
    skip = AttributionPolicy.preset(PolicyName.SKIP_LOCAL_FRAMES, skip_requests=True)
    actual = _actual(catalog["RQ2"], policy=skip)
    assert actual.outcome("third-party local frame", "req:https://thirdparty.com/message.txt") == "allow"
    assert actual.outcome("first-party body", "req:https://thirdparty.com/message.txt") == "redirect:noop-text"


def test_rq1_xhr_under_brave_ios_request_path(catalog):
    skip = parse_policy("skip-local-frames+skip-requests")
    actual = _actual(catalog["RQ1-xhr"], policy=skip)
    probe = "req:https://thirdparty.com/ads/index.js"
    assert actual.outcome("first-party body", probe) == "block"
    assert actual.outcome("third-party iframe", probe) == "block"
    for frame in ("first-party local frame", "first-party nested local frame",
                  "third-party local frame", "third-party nested local frame"):
        assert actual.outcome(frame, probe) == "allow"


def test_adguard_signature_first_party_value_in_third_party_local_frames(catalog):
    fallback = AttributionPolicy.preset(PolicyName.FIRST_PARTY_FALLBACK)
    actual = _actual(catalog["RQ3"], policy=fallback)
    assert actual.outcome("third-party local frame", "scriptlet:scriptletvalue") == "1"
    assert actual.outcome("third-party nested local frame", "scriptlet:scriptletvalue") == "1"
    assert actual.outcome("third-party iframe", "scriptlet:scriptletvalue") == "42"


def test_safari_rq1a_blocks_thirdparty_everywhere(catalog):
    """The top-level-partyness divergence: the first-party script loads in
    every frame and the third-party script loads nowhere."""
    top = AttributionPolicy.preset(PolicyName.TOP_LEVEL_PARTYNESS)
    actual = _actual(catalog["RQ1a"], policy=top)
    for frame in FP_FRAMES + TP_FRAMES:
        assert actual.outcome(frame, FP_SCRIPT) == "allow"
        assert actual.outcome(frame, TP_SCRIPT) == "block"


def test_nested_accounting_under_direct_parent_only(catalog):
    policy = AttributionPolicy.preset(PolicyName.DIRECT_PARENT_ONLY)
    actual = _actual(catalog["NestedAccounting"], policy=policy)
    uncounted = {
        (f, p) for (f, p), v in actual.cells.items() if p.startswith("counted:") and v == "uncounted"
    }
    assert {f for f, _ in uncounted} == {
        "first-party nested local frame",
        "third-party nested local frame",
    }
    assert len(uncounted) == 4  # two scripts in each nested frame


# ---------------------------------------------------------------------------
# profiles and report


def test_profiles_reproduce_exactly_their_failure_sets():
    report = run_profiles()
    assert report.baseline_ok
    assert report.profiles_ok
    by_id = {p.profile.profile_id: p for p in report.profiles}
    assert by_id["brave-ios"].failed == {"RQ1-xhr", "RQ2", "RQ3", "RQ4"}
    assert by_id["brave-desktop"].failed == {"RQ3", "RQ4"}
    assert by_id["brave-android"].failed == {"RQ3", "RQ4"}
    assert by_id["adguard-chrome"].failed == {"RQ3", "RQ4"}
    assert by_id["adguard-firefox"].failed == {"RQ3", "RQ4"}
    assert by_id["adguard-ios"].failed == {"RQ4"}
    assert by_id["ubol"].failed == {"RQ4"}
    assert by_id["abp-ios"].failed == {"RQ4"}
    assert by_id["safari-macos"].failed == {"RQ1a", "RQ4"}
    assert by_id["ddg-desktop"].failed == {"NestedAccounting"}
    for clean in ("abp-chrome", "abp-firefox", "ubo-chrome", "ubo-firefox",
                  "ddg-chrome", "ddg-firefox", "ddg-ios", "ddg-android"):
        assert by_id[clean].failed == frozenset()


def test_report_flags_over_and_under_reproduction():
    profiles = builtin_profiles()
    sane = next(p for p in profiles if p.profile_id == "brave-desktop")
    over = ToolProfile(
        profile_id="x-over", tool="X", platform="T",
        policies=sane.policies, covers=sane.covers,
        expected_failures=frozenset({"RQ3"}),  # misses RQ4
    )
    under = ToolProfile(
        profile_id="x-under", tool="X", platform="T",
        policies=sane.policies, covers=sane.covers,
        expected_failures=frozenset({"RQ1", "RQ3", "RQ4"}),  # predicts RQ1 too
    )
    report = run_profiles(profiles=[over, under])
    assert not report.profiles_ok
    results = {p.profile.profile_id: p for p in report.profiles}
    assert results["x-over"].unexpected == {"RQ4"}
    assert results["x-under"].missing == {"RQ1"}


def test_coverage_spans_every_capability_verdict():
    """Each tool row covers a test for every capability it implements."""
    report = run_profiles()
    covered = set(report.coverage())
    for pid, tests in {
        "abp-ios": {"RQ1", "RQ4"},
        "adguard-ios": {"RQ1", "RQ4"},
        "safari-macos": {"RQ1", "RQ1a", "RQ4"},
        "ddg-desktop": {"RQ1-intermediate", "RQ2", "NestedAccounting"},
        "brave-ios": {"RQ1", "RQ1-xhr", "RQ2", "RQ3", "RQ4"},
    }.items():
        for tid in tests:
            assert (pid, tid) in covered
    full = {"RQ1", "RQ2", "RQ3", "RQ4"}
    for pid in ("abp-chrome", "ubo-chrome", "ubol", "adguard-chrome", "brave-desktop"):
        for tid in full:
            assert (pid, tid) in covered


def test_nondeterministic_behaviors_are_annotated_not_failed():
    by_id = {p.profile_id: p for p in builtin_profiles()}
    assert "RQ3" in by_id["abp-chrome"].annotations
    assert "RQ3" in by_id["ubo-chrome"].annotations
    assert "RQ3" not in by_id["abp-chrome"].expected_failures


# ---------------------------------------------------------------------------
# spoof_map and page handling


def test_spoof_map_rewrites_hosts(catalog):
    page = catalog["RQ1"].page
    spoofed = spoof_map({"thirdparty.com": "doubleclick.net"})(page)
    frames = {f.label: f for f in spoofed.walk()}
    assert frames["third-party iframe"].src == "https://doubleclick.net"
    urls = [u for u, _ in frames["third-party nested local frame"].requests]
    assert "https://doubleclick.net/script.js" in urls
    assert "https://firstparty.com/script.js" in urls  # unmapped hosts untouched
    # local-frame sources are never URL-rewritten
    assert frames["third-party local frame"].src == "about:blank"


def test_spoof_map_identity(catalog):
    page = catalog["RQ4"].page
    assert spoof_map({})(page) == page


def test_spoof_map_class_swap(catalog):
    page = catalog["RQ4"].page
    swapped = spoof_map({}, classes={"cosmetic-filter": "ADBAR"})(page)
    tags = {e for f in swapped.walk() for e in f.elements}
    assert tags == {("h1", "ADBAR")}


def test_spoof_map_rejects_non_bijective():
    with pytest.raises(ValueError):
        spoof_map({"a.com": "x.net", "b.com": "x.net"})


def test_spoofed_page_matches_real_list_style_rules(catalog):
    spoofed = spoof_map({"thirdparty.com": "doubleclick.net"})(catalog["RQ1"].page)
    rules, _ = parse_list("||doubleclick.net^\n")
    actual = run_test(spoofed, rules, SPEC_CORRECT)
    probe = "req:https://doubleclick.net/script.js"
    for frame in FP_FRAMES + TP_FRAMES:
        assert actual.outcome(frame, probe) == "block"


def test_page_spec_rejects_duplicate_labels():
    with pytest.raises(ValueError):
        PageSpec.from_dict(
            {
                "name": "bad",
                "frames": [
                    {
                        "label": "a",
                        "src": "https://x.com",
                        "children": [{"label": "a", "src": "about:blank"}],
                    }
                ],
            }
        )


def test_page_round_trips_through_dict(catalog):
    page = catalog["NestedAccounting"].page
    assert PageSpec.from_dict(page.to_dict()) == page


def test_probe_errors_carry_cell_coordinates(catalog):
    rules, _ = parse_list("||thirdparty.com/message.txt$redirect=ghost\n")
    with pytest.raises(ProbeError) as err:
        run_test(catalog["RQ2"].page, rules, SPEC_CORRECT)
    assert err.value.frame
    assert err.value.probe.startswith("req:")
    assert isinstance(err.value.cause, UnknownResource)


def test_parse_policy_specs():
    assert parse_policy("spec-correct") == SPEC_CORRECT
    policy = parse_policy("skip-local-frames+skip-requests")
    assert policy.skip_requests and not policy.apply_cosmetics_in_local_frames
    with pytest.raises(ValueError):
        parse_policy("nonsense")
    with pytest.raises(ValueError):
        parse_policy("spec-correct+skip-requests")
