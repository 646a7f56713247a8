#!/usr/bin/env python3
"""Regenerate the conformance catalog and tool profiles under src/frameblock/data.

The expected matrices spell out the correct decision for every frame/probe
cell; they are written here as explicit per-frame-group outcomes, not
computed through the engine, so the catalog stays an independent check.
"""

from __future__ import annotations

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "frameblock" / "data"

FP = "https://firstparty.com"
TP = "https://thirdparty.com"
MID = "https://intermediate.com"

FP_SCRIPT = f"{FP}/script.js"
TP_SCRIPT = f"{TP}/script.js"
FP_AJAX = f"{FP}/message.txt"
TP_AJAX = f"{TP}/message.txt"
ADS_XHR = f"{TP}/ads/index.js"
ALLOWED_JS = f"{FP}/should_be_allowed.js"
BLOCKED_JS = f"{TP}/should_be_blocked.js"

FP_FRAMES = ("first-party body", "first-party local frame", "first-party nested local frame")
TP_FRAMES = ("third-party iframe", "third-party local frame", "third-party nested local frame")
MID_FRAMES = ("intermediate iframe", "intermediate local frame", "intermediate nested local frame")


def nested(labels, srcs, extra):
    """A three-deep chain of frames sharing the same probes."""
    out = None
    for label, src in reversed(list(zip(labels, srcs))):
        node = {"label": label, "src": src, **extra}
        if out is not None:
            node["children"] = [out]
        out = node
    return out


def two_sided_page(name, extra, accounting=False):
    """Listing-style page: main frame, local chain, third-party chain."""
    fp_chain = nested(FP_FRAMES[1:], ["about:blank", "about:blank"], extra)
    tp_chain = nested(TP_FRAMES, [TP, "about:blank", "about:blank"], extra)
    root = {"label": FP_FRAMES[0], "src": FP, **extra, "children": [fp_chain, tp_chain]}
    page = {"name": name, "frames": [root]}
    if accounting:
        page["accounting"] = True
    return page


def intermediate_page(name, extra):
    fp_chain = nested(FP_FRAMES[1:], ["about:blank", "about:blank"], extra)
    mid_chain = nested(MID_FRAMES, [MID, "about:blank", "about:blank"], extra)
    root = {"label": FP_FRAMES[0], "src": FP, **extra, "children": [fp_chain, mid_chain]}
    return {"name": name, "frames": [root]}


def cells(spec):
    """spec: {(frames tuple, probe): expect} -> flat cell list."""
    out = []
    for (frames, probe), expect in spec.items():
        for frame in frames:
            out.append({"frame": frame, "probe": probe, "expect": expect})
    out.sort(key=lambda c: (c["frame"], c["probe"]))
    return out


def write(relpath: str, payload) -> None:
    path = DATA / relpath
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(payload, str):
        path.write_text(payload, encoding="utf-8")
    else:
        path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def main() -> None:
    both_scripts = {
        "requests": [
            {"url": FP_SCRIPT, "type": "script"},
            {"url": TP_SCRIPT, "type": "script"},
        ]
    }
    both_ajax = {
        "requests": [
            {"url": FP_AJAX, "type": "xhr"},
            {"url": TP_AJAX, "type": "xhr"},
        ]
    }
    h1 = {"elements": [{"tag": "h1", "class": "cosmetic-filter"}]}
    probe = {"scriptlet_probes": ["scriptletvalue"]}
    ads = {"requests": [{"url": ADS_XHR, "type": "xhr"}]}
    listing3 = {
        "requests": [
            {"url": ALLOWED_JS, "type": "script"},
            {"url": BLOCKED_JS, "type": "script"},
        ]
    }

    write("catalog/pages/scripts.json", two_sided_page("request-blocking", both_scripts))
    write("catalog/pages/ajax.json", two_sided_page("resource-replacement", both_ajax))
    write("catalog/pages/scriptlet.json", two_sided_page("scriptlet-injection", probe))
    write("catalog/pages/cosmetic.json", two_sided_page("cosmetic-filtering", h1))
    write(
        "catalog/pages/accounting.json",
        two_sided_page("blocked-request-accounting", both_scripts, accounting=True),
    )
    write("catalog/pages/intermediate.json", intermediate_page("intermediate-embed", listing3))
    write("catalog/pages/ads_xhr.json", two_sided_page("xhr-path-blocking", ads))

    write(
        "catalog/rules/block_all.txt",
        "! block both test scripts everywhere\n"
        "||firstparty.com/script.js\n"
        "||thirdparty.com/script.js\n",
    )
    write(
        "catalog/rules/block_third_party.txt",
        "||firstparty.com/script.js$third-party\n||thirdparty.com/script.js$third-party\n",
    )
    write(
        "catalog/rules/block_first_party.txt",
        "||firstparty.com/script.js$~third-party\n||thirdparty.com/script.js$~third-party\n",
    )
    write(
        "catalog/rules/redirect_tp_ajax.txt",
        "||thirdparty.com/message.txt$xhr,redirect=noop-text\n",
    )
    write(
        "catalog/rules/redirect_fp_ajax.txt",
        "||firstparty.com/message.txt$xhr,redirect=noop-text\n",
    )
    write(
        "catalog/rules/set_constant.txt",
        "firstparty.com##+js(set-constant, scriptletvalue, 1)\n"
        "thirdparty.com##+js(set-constant, scriptletvalue, 42)\n",
    )
    write("catalog/rules/hide_tp.txt", "thirdparty.com##.cosmetic-filter\n")
    write("catalog/rules/hide_fp.txt", "firstparty.com##.cosmetic-filter\n")
    write("catalog/rules/block_tp_host.txt", "||thirdparty.com^\n")
    write("catalog/rules/ads_pattern.txt", "/ads/index\n")

    six = FP_FRAMES + TP_FRAMES
    req_fp, req_tp = f"req:{FP_SCRIPT}", f"req:{TP_SCRIPT}"
    ajax_fp, ajax_tp = f"req:{FP_AJAX}", f"req:{TP_AJAX}"

    # RQ1: with both scripts blocked outright, nothing loads anywhere.
    write(
        "catalog/expected/rq1.json",
        {"test_id": "RQ1", "cells": cells({(six, req_fp): "block", (six, req_tp): "block"})},
    )
    # RQ1a: third-party-only blocking. A script is first-party with respect
    # to its containing frame, so each side loads its own script only.
    write(
        "catalog/expected/rq1a.json",
        {
            "test_id": "RQ1a",
            "cells": cells(
                {
                    (FP_FRAMES, req_fp): "allow",
                    (FP_FRAMES, req_tp): "block",
                    (TP_FRAMES, req_fp): "block",
                    (TP_FRAMES, req_tp): "allow",
                }
            ),
        },
    )
    # RQ1b: first-party-only blocking is the exact complement.
    write(
        "catalog/expected/rq1b.json",
        {
            "test_id": "RQ1b",
            "cells": cells(
                {
                    (FP_FRAMES, req_fp): "block",
                    (FP_FRAMES, req_tp): "allow",
                    (TP_FRAMES, req_fp): "allow",
                    (TP_FRAMES, req_tp): "block",
                }
            ),
        },
    )
    write(
        "catalog/expected/rq2_tp.json",
        {
            "test_id": "RQ2",
            "cells": cells({(six, ajax_fp): "allow", (six, ajax_tp): "redirect:noop-text"}),
        },
    )
    write(
        "catalog/expected/rq2_fp.json",
        {
            "test_id": "RQ2",
            "cells": cells({(six, ajax_fp): "redirect:noop-text", (six, ajax_tp): "allow"}),
        },
    )
    write(
        "catalog/expected/rq3.json",
        {
            "test_id": "RQ3",
            "cells": cells(
                {
                    (FP_FRAMES, "scriptlet:scriptletvalue"): "1",
                    (TP_FRAMES, "scriptlet:scriptletvalue"): "42",
                }
            ),
        },
    )
    el = "el:h1.cosmetic-filter"
    write(
        "catalog/expected/rq4_tp.json",
        {"test_id": "RQ4", "cells": cells({(FP_FRAMES, el): "visible", (TP_FRAMES, el): "hidden"})},
    )
    write(
        "catalog/expected/rq4_fp.json",
        {"test_id": "RQ4", "cells": cells({(FP_FRAMES, el): "hidden", (TP_FRAMES, el): "visible"})},
    )
    write(
        "catalog/expected/accounting.json",
        {
            "test_id": "NestedAccounting",
            "cells": cells(
                {
                    (six, req_fp): "block",
                    (six, req_tp): "block",
                    (six, f"counted:{FP_SCRIPT}"): "counted",
                    (six, f"counted:{TP_SCRIPT}"): "counted",
                }
            ),
        },
    )
    six_mid = FP_FRAMES + MID_FRAMES
    write(
        "catalog/expected/intermediate.json",
        {
            "test_id": "RQ1-intermediate",
            "cells": cells(
                {(six_mid, f"req:{ALLOWED_JS}"): "allow", (six_mid, f"req:{BLOCKED_JS}"): "block"}
            ),
        },
    )
    write(
        "catalog/expected/ads_xhr.json",
        {"test_id": "RQ1-xhr", "cells": cells({(six, f"req:{ADS_XHR}"): "block"})},
    )

    noop = {"noop-text": "[noop text]"}
    index = [
        {
            "id": "RQ1",
            "capability": "request",
            "page": "pages/scripts.json",
            "runs": [
                {"label": "block-all", "rules": "rules/block_all.txt", "expected": "expected/rq1.json"}
            ],
        },
        {
            "id": "RQ1a",
            "capability": "request",
            "page": "pages/scripts.json",
            "runs": [
                {
                    "label": "block-third-party",
                    "rules": "rules/block_third_party.txt",
                    "expected": "expected/rq1a.json",
                }
            ],
        },
        {
            "id": "RQ1b",
            "capability": "request",
            "page": "pages/scripts.json",
            "runs": [
                {
                    "label": "block-first-party",
                    "rules": "rules/block_first_party.txt",
                    "expected": "expected/rq1b.json",
                }
            ],
        },
        {
            "id": "RQ2",
            "capability": "replacement",
            "page": "pages/ajax.json",
            "runs": [
                {
                    "label": "redirect-third-party",
                    "rules": "rules/redirect_tp_ajax.txt",
                    "expected": "expected/rq2_tp.json",
                    "resources": noop,
                },
                {
                    "label": "redirect-first-party",
                    "rules": "rules/redirect_fp_ajax.txt",
                    "expected": "expected/rq2_fp.json",
                    "resources": noop,
                },
            ],
        },
        {
            "id": "RQ3",
            "capability": "scriptlet",
            "page": "pages/scriptlet.json",
            "runs": [
                {
                    "label": "set-constant",
                    "rules": "rules/set_constant.txt",
                    "expected": "expected/rq3.json",
                }
            ],
        },
        {
            "id": "RQ4",
            "capability": "cosmetic",
            "page": "pages/cosmetic.json",
            "runs": [
                {
                    "label": "hide-third-party",
                    "rules": "rules/hide_tp.txt",
                    "expected": "expected/rq4_tp.json",
                },
                {
                    "label": "hide-first-party",
                    "rules": "rules/hide_fp.txt",
                    "expected": "expected/rq4_fp.json",
                },
            ],
        },
        {
            "id": "NestedAccounting",
            "capability": "accounting",
            "page": "pages/accounting.json",
            "runs": [
                {
                    "label": "block-all",
                    "rules": "rules/block_all.txt",
                    "expected": "expected/accounting.json",
                }
            ],
        },
        {
            "id": "RQ1-intermediate",
            "capability": "request",
            "page": "pages/intermediate.json",
            "runs": [
                {
                    "label": "block-third-party-host",
                    "rules": "rules/block_tp_host.txt",
                    "expected": "expected/intermediate.json",
                }
            ],
        },
        {
            "id": "RQ1-xhr",
            "capability": "request-xhr",
            "page": "pages/ads_xhr.json",
            "runs": [
                {
                    "label": "path-pattern",
                    "rules": "rules/ads_pattern.txt",
                    "expected": "expected/ads_xhr.json",
                }
            ],
        },
    ]
    write("catalog/index.json", index)

    race_note = (
        "scriptlet injection races frame creation in the field; "
        "nondeterministic, so not reproducible in a decision engine"
    )
    profiles = {
        "profiles": [
            {
                "id": "abp-chrome",
                "tool": "AdBlock Plus",
                "platform": "Chrome Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "spec-correct",
                    "cosmetic": "spec-correct",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": [],
                "annotations": {"RQ3": race_note},
            },
            {
                "id": "abp-firefox",
                "tool": "AdBlock Plus",
                "platform": "Firefox Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "spec-correct",
                    "cosmetic": "spec-correct",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": [],
            },
            {
                "id": "abp-ios",
                "tool": "AdBlock Plus",
                "platform": "iOS",
                "policies": {"request": "spec-correct", "cosmetic": "skip-local-frames"},
                "covers": ["RQ1", "RQ4"],
                "expected_failures": ["RQ4"],
            },
            {
                "id": "ubo-chrome",
                "tool": "uBlock Origin",
                "platform": "Chrome Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "spec-correct",
                    "cosmetic": "spec-correct",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": [],
                "annotations": {"RQ3": race_note},
            },
            {
                "id": "ubo-firefox",
                "tool": "uBlock Origin",
                "platform": "Firefox Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "spec-correct",
                    "cosmetic": "spec-correct",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": [],
            },
            {
                "id": "ubol",
                "tool": "uBlock Origin Lite",
                "platform": "Chrome (MV3)",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "spec-correct",
                    "cosmetic": "skip-local-frames",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ4"],
                "annotations": {
                    "RQ3": "scriptlets were also skipped in local frames before an upstream patch; current releases inject them"
                },
            },
            {
                "id": "adguard-chrome",
                "tool": "AdGuard",
                "platform": "Chrome Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "first-party-fallback",
                    "cosmetic": "first-party-fallback",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ3", "RQ4"],
            },
            {
                "id": "adguard-firefox",
                "tool": "AdGuard",
                "platform": "Firefox Extension",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "first-party-fallback",
                    "cosmetic": "first-party-fallback",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ3", "RQ4"],
            },
            {
                "id": "adguard-ios",
                "tool": "AdGuard",
                "platform": "iOS",
                "policies": {"request": "spec-correct", "cosmetic": "first-party-fallback"},
                "covers": ["RQ1", "RQ4"],
                "expected_failures": ["RQ4"],
            },
            {
                "id": "brave-desktop",
                "tool": "Brave Browser",
                "platform": "Desktop",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "skip-local-frames",
                    "cosmetic": "skip-local-frames",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ3", "RQ4"],
            },
            {
                "id": "brave-ios",
                "tool": "Brave Browser",
                "platform": "iOS",
                "policies": {
                    "request": "spec-correct",
                    "request-xhr": "skip-local-frames+skip-requests",
                    "replacement": "skip-local-frames+skip-requests",
                    "scriptlet": "skip-local-frames",
                    "cosmetic": "skip-local-frames",
                },
                "covers": ["RQ1", "RQ1-xhr", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ1-xhr", "RQ2", "RQ3", "RQ4"],
            },
            {
                "id": "brave-android",
                "tool": "Brave Browser",
                "platform": "Android",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "scriptlet": "skip-local-frames",
                    "cosmetic": "skip-local-frames",
                },
                "covers": ["RQ1", "RQ2", "RQ3", "RQ4"],
                "expected_failures": ["RQ3", "RQ4"],
            },
            {
                "id": "ddg-chrome",
                "tool": "DuckDuckGo",
                "platform": "Chrome Extension",
                "policies": {"request": "spec-correct", "replacement": "spec-correct"},
                "covers": ["RQ1-intermediate", "RQ2"],
                "expected_failures": [],
            },
            {
                "id": "ddg-firefox",
                "tool": "DuckDuckGo",
                "platform": "Firefox Extension",
                "policies": {"request": "spec-correct", "replacement": "spec-correct"},
                "covers": ["RQ1-intermediate", "RQ2"],
                "expected_failures": [],
            },
            {
                "id": "ddg-desktop",
                "tool": "DuckDuckGo",
                "platform": "Desktop",
                "policies": {
                    "request": "spec-correct",
                    "replacement": "spec-correct",
                    "accounting": "direct-parent-only",
                },
                "covers": ["RQ1-intermediate", "RQ2", "NestedAccounting"],
                "expected_failures": ["NestedAccounting"],
                "annotations": {
                    "NestedAccounting": "requests are still blocked; only the per-site tracker tally under-reports nested local frames"
                },
            },
            {
                "id": "ddg-ios",
                "tool": "DuckDuckGo",
                "platform": "iOS",
                "policies": {"request": "spec-correct", "replacement": "spec-correct"},
                "covers": ["RQ1-intermediate", "RQ2"],
                "expected_failures": [],
            },
            {
                "id": "ddg-android",
                "tool": "DuckDuckGo",
                "platform": "Android",
                "policies": {"request": "spec-correct", "replacement": "spec-correct"},
                "covers": ["RQ1-intermediate", "RQ2"],
                "expected_failures": [],
            },
            {
                "id": "safari-macos",
                "tool": "Safari Content Blocker",
                "platform": "MacOS",
                "policies": {"request": "top-level-partyness", "cosmetic": "skip-local-frames"},
                "covers": ["RQ1", "RQ1a", "RQ4"],
                "expected_failures": ["RQ1a", "RQ4"],
                "annotations": {
                    "RQ1a": "party context is judged against the top-level page, a definitional divergence rather than an evasion"
                },
            },
        ]
    }
    write("profiles.json", profiles)
    print(f"wrote catalog under {DATA}")


if __name__ == "__main__":
    main()
