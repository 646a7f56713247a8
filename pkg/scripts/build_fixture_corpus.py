#!/usr/bin/env python3
"""Regenerate the synthetic crawl corpus under tests/data/corpus.

Every site below is specified by explicit counts (how many local frames of
each flavor, which requests its local frames make and whether the mini
filter list is meant to block them, etc.). The script tallies those
intents straight into tests/data/manifest.json, so the manifest is ground
truth by construction and never passes through the analysis pipeline it
is used to check.

Engineered corpus-wide properties:
  - 1000 never-navigated local-frame candidates split 958 about:blank /
    37 about:srcdoc / 4 blob / 1 data (95.8% / 3.7% / 0.4% / 0.1%)
  - rank bucket [1,15K): 500 local-frame requests, 374 blocked (74.8%)
  - rank bucket [15K,100K): 250 / 183 (73.2%)
  - rank bucket [100K,1M): 500 / 349 (69.8%)
"""

from __future__ import annotations

import json
from collections import defaultdict
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
BUCKETS = ("[1,15K)", "[15K,100K)", "[100K,1M)")

# Entity ownership mirrored from tests/data/entities.json (hosts absent
# here fall back to their registrable domain).
ENTITY_OF = {
    "doubleclick.net": "Google",
    "googlesyndication.com": "Google",
    "pubmatic.com": "PubMatic",
    "cloudflare.com": "Cloudflare",
    "criteo.com": "Criteo",
    "criteo.net": "Criteo",
    "adnxs.com": "Xandr",
    "scorecardresearch.com": "Comscore",
    "quantserve.com": "Quantcast",
    "amazon-adsystem.com": "Amazon",
    "taboola.com": "Taboola",
    "outbrain.com": "Outbrain",
    "seedtag.com": "SeedTag",
    "rubiconproject.com": "Magnite",
    "bluekai.com": "Oracle",
    "openx.net": "OpenX",
}


def req(host_or_url, n, blocked, rtype="script"):
    return {"url": host_or_url, "n": n, "blocked": blocked, "type": rtype}


# fmt: off
SITES = [
    # ---- rank bucket [1,15K) ----
    {"domain": "news-site-01.com", "rank": 40, "www": True,
     "lf_1p": 40, "srcdoc": 5, "blob": 1, "data": 0, "navigated_blank": 3,
     "iframes": [("doubleclick.net", 20)],
     "nested_navigated": {"src": "https://widgetcdn.net/embed", "origin": "https://widgetcdn.net",
                          "requests": [req("https://ads.doubleclick.net/nested-{i:03d}.gif", 3, True, "image")]},
     "lf_requests": [req("https://ads.doubleclick.net/pixel-{i:03d}.gif", 47, True, "image"),
                     req("https://pagead.googlesyndication.com/tag-{i:03d}.js", 44, True),
                     req("https://static.news-site-01.com/asset-{i:03d}.js", 26, False)],
     "other_requests": 150, "fp_calls": 20, "js_other": 80, "elements": 12, "auto_elements": 3},
    {"domain": "video-hub-02.com", "rank": 210,
     "lf_1p": 30, "srcdoc": 5, "blob": 0, "data": 1,
     "iframes": [("doubleclick.net", 20), ("pubmatic.com", 20)],
     "lf_requests": [req("https://cdn.pubmatic.com/tag-{i:03d}.js", 80, True),
                     req("https://static.video-hub-02.com/asset-{i:03d}.js", 20, False)],
     "other_requests": 150, "fp_calls": 0, "js_other": 10, "elements": 4, "auto_elements": 0},
    {"domain": "shop-portal-03.com", "rank": 777,
     "lf_1p": 30, "srcdoc": 5, "blob": 0, "data": 0,
     "iframes": [("doubleclick.net", 20)],
     "lf_requests": [req("https://bid.criteo.com/slot-{i:03d}.js", 60, True),
                     req("https://secure.adnxs.com/seg-{i:03d}.gif", 40, True, "image"),
                     req("https://static.shop-portal-03.com/asset-{i:03d}.js", 20, False)],
     "other_requests": 150, "fp_calls": 5, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "recipe-box-04.net", "rank": 1500,
     "lf_1p": 30, "srcdoc": 0, "blob": 1, "data": 0,
     "iframes": [("pubmatic.com", 20)],
     "lf_requests": [req("https://sb.scorecardresearch.com/beacon-{i:03d}.js", 60, True),
                     req("https://static.recipe-box-04.net/asset-{i:03d}.js", 20, False)],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "travel-deals-05.com", "rank": 3200,
     "lf_1p": 30, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("doubleclick.net", 20)],
     "lf_requests": [req("https://ad.doubleclick.net/impression-{i:03d}.gif", 40, True, "image"),
                     req("https://static.travel-deals-05.com/asset-{i:03d}.js", 20, False)],
     "other_requests": 150, "fp_calls": 3, "js_other": 7, "elements": 2, "auto_elements": 0},
    {"domain": "weather-now-06.org", "rank": 5000,
     "lf_1p": 30, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("pubmatic.com", 20)],
     "lf_requests": [req("https://www.googletagmanager.com/gtm-{i:03d}.json", 4, False, "xhr"),
                     req("https://static.weather-now-06.org/asset-{i:03d}.js", 16, False)],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "sports-fan-07.com", "rank": 7800, "www": True,
     "lf_1p": 25, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("adtrafficquality.google", 15)],
     "lf_requests": [],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "finance-tips-08.com", "rank": 9100,
     "lf_1p": 25, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("adtrafficquality.google", 15)],
     "lf_requests": [],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "blog-network-09.net", "rank": 12000,
     "lf_1p": 0, "srcdoc": 0, "blob": 0, "data": 0, "navigated_blank": 5,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "photo-share-10.com", "rank": 14999,
     "lf_1p": 0, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("cloudflare.com", 30)],
     "lf_requests": [],
     "other_requests": 150, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    # ---- rank bucket [15K,100K) ----
    {"domain": "stream-live-11.com", "rank": 16000,
     "lf_1p": 20, "srcdoc": 6, "blob": 1, "data": 0,
     "iframes": [("doubleclick.net", 20)],
     "lf_requests": [req("https://stats.g.doubleclick.net/collect-{i:03d}.js", 60, True),
                     req("https://static.stream-live-11.com/asset-{i:03d}.js", 15, False)],
     "other_requests": 75, "fp_calls": 50, "js_other": 150, "elements": 30, "auto_elements": 2},
    {"domain": "music-wave-12.net", "rank": 22000,
     "lf_1p": 20, "srcdoc": 6, "blob": 0, "data": 0,
     "iframes": [("doubleclick.net", 10)],
     "lf_requests": [req("https://pixel.quantserve.com/pixel-{i:03d}.gif", 50, True, "image"),
                     req("https://static.music-wave-12.net/asset-{i:03d}.js", 12, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 5, "elements": 3, "auto_elements": 0},
    {"domain": "auto-trader-13.com", "rank": 31000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("doubleclick.net", 10)],
     "lf_requests": [req("https://cdn.taboola.com/widget-{i:03d}.js", 25, True),
                     req("https://widgets.outbrain.com/unit-{i:03d}.js", 10, True),
                     req("https://cdn.auto-trader-13.com/ads/banner-{i:03d}.png", 5, True, "image"),
                     req("https://static.auto-trader-13.com/asset-{i:03d}.js", 10, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "health-hub-14.org", "rank": 45000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("adtrafficquality.google", 15)],
     "lf_requests": [req("https://pixel.mathtag.com/sync-{i:03d}.gif", 30, True, "image"),
                     req("https://static.health-hub-14.org/asset-{i:03d}.js", 10, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "forum-hub.net", "rank": 52000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("adtrafficquality.google", 15)],
     "lf_requests": [req("https://socialwidgets.net/sdk-{i:03d}.js", 2, True),
                     req("https://static.forum-hub.net/asset-{i:03d}.js", 10, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "game-zone-16.com", "rank": 61000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("seedtag.com", 20)],
     "lf_requests": [req("https://insights.hotjar.com/hj-{i:03d}.js", 1, True),
                     req("https://cdn.doubleclick.net/safe/lib-{i:03d}.js", 2, False),
                     req("https://static.game-zone-16.com/asset-{i:03d}.js", 5, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "kids-corner-17.org", "rank": 70000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("amazon-adsystem.com", 10)],
     "lf_requests": [],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "code-snips-18.dev", "rank": 83000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "diy-crafts-19.net", "rank": 91000,
     "lf_1p": 18, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "socialwidgets.net", "rank": 99999,
     "lf_1p": 2, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [req("https://socialwidgets.net/sdk-{i:03d}.js", 3, False)],
     "other_requests": 75, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    # ---- rank bucket [100K,1M) ----
    {"domain": "local-news-21.com", "rank": 120000, "www": True,
     "lf_1p": 20, "srcdoc": 5, "blob": 1, "data": 0,
     "iframes": [("googlesyndication.com", 15)],
     "lf_requests": [req("https://tpc.googlesyndication.com/frame-{i:03d}.js", 120, True),
                     req("https://static.local-news-21.com/asset-{i:03d}.js", 40, False)],
     "other_requests": 100, "fp_calls": 100, "js_other": 300, "elements": 60, "auto_elements": 1},
    {"domain": "artisan-mart-22.net", "rank": 180000,
     "lf_1p": 20, "srcdoc": 5, "blob": 0, "data": 0,
     "iframes": [("googlesyndication.com", 15)],
     "lf_requests": [req("https://ads.doubleclick.net/unit-{i:03d}.gif", 100, True, "image"),
                     req("https://static.artisan-mart-22.net/asset-{i:03d}.js", 30, False)],
     "other_requests": 100, "fp_calls": 2, "js_other": 4, "elements": 0, "auto_elements": 0},
    {"domain": "book-nook-23.org", "rank": 250000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("cloudflare.com", 20)],
     "lf_requests": [req("https://dis.criteo.net/dis-{i:03d}.js", 60, True),
                     req("https://static.book-nook-23.org/asset-{i:03d}.js", 30, False)],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "garden-pro-24.com", "rank": 310000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [("criteo.com", 8)],
     "lf_requests": [req("https://fastlane.rubiconproject.com/slot-{i:03d}.js", 40, True),
                     req("https://static.garden-pro-24.com/asset-{i:03d}.js", 20, False)],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "pet-care-25.net", "rank": 400000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [req("https://bidder.openx.net/bid-{i:03d}.js", 20, True),
                     req("https://static.pet-care-25.net/asset-{i:03d}.js", 15, False)],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "star-gazer-26.org", "rank": 520000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [req("https://tags.bluekai.com/site-{i:03d}.gif", 9, True, "image"),
                     req("https://static.star-gazer-26.org/asset-{i:03d}.js", 6, False)],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "retro-games-27.com", "rank": 640000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [req("https://npttech.com/advertising.js", 2, False),
                     req("https://static.retro-games-27.com/asset-{i:03d}.js", 8, False)],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "tiny-house-28.net", "rank": 750000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "vintage-cars-29.com", "rank": 860000,
     "lf_1p": 20, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 100, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
    {"domain": "parked-30.com", "rank": 999999,
     "lf_1p": 0, "srcdoc": 0, "blob": 0, "data": 0,
     "iframes": [],
     "lf_requests": [],
     "other_requests": 0, "fp_calls": 0, "js_other": 0, "elements": 0, "auto_elements": 0},
]
# fmt: on

FP_APIS = ["Navigator.userAgent.get", "HTMLCanvasElement.toDataURL", "Screen.width.get"]
OTHER_APIS = ["Date.now", "Performance.now", "JSON.parse"]
ELEMENT_TAGS = ["div", "img", "span"]


def bucket_of(rank: int) -> str:
    if rank < 15_000:
        return BUCKETS[0]
    if rank < 100_000:
        return BUCKETS[1]
    return BUCKETS[2]


def entity_of_url(url: str) -> str:
    host = url.split("//", 1)[1].split("/", 1)[0]
    labels = host.split(".")
    domain = ".".join(labels[-2:]) if labels[-1] != "google" else ".".join(labels[-2:])
    return ENTITY_OF.get(domain, domain)


def build_site(spec: dict) -> tuple[list[str], dict]:
    domain = spec["domain"]
    records: list[str] = []
    add = lambda rec: records.append(json.dumps(rec, separators=(",", ":")))
    add({"t": "site", "domain": domain, "rank": spec["rank"]})
    root_src = f"https://{'www.' if spec.get('www') else ''}{domain}"
    add({"t": "frame", "id": 1, "parent": None, "src": root_src, "navigated": False})
    next_id = 2
    first_lf: int | None = None

    for _ in range(spec["lf_1p"]):
        add({"t": "frame", "id": next_id, "parent": 1, "src": "about:blank", "navigated": False})
        if first_lf is None:
            first_lf = next_id
        next_id += 1
    for _ in range(spec["srcdoc"]):
        add({"t": "frame", "id": next_id, "parent": 1, "src": "about:srcdoc", "navigated": False})
        next_id += 1
    for _ in range(spec["blob"]):
        add({"t": "frame", "id": next_id, "parent": 1,
             "src": f"blob:https://{domain}/0000-{next_id}", "navigated": False})
        next_id += 1
    for _ in range(spec["data"]):
        add({"t": "frame", "id": next_id, "parent": 1,
             "src": "data:text/html,<p>x</p>", "navigated": False})
        next_id += 1
    for _ in range(spec.get("navigated_blank", 0)):
        add({"t": "frame", "id": next_id, "parent": 1, "src": "about:blank",
             "navigated": True, "origin": "https://late-loader.com"})
        next_id += 1

    n_3p = 0
    for host, n_children in spec["iframes"]:
        iframe_id = next_id
        add({"t": "frame", "id": iframe_id, "parent": 1,
             "src": f"https://{host}/container", "navigated": False})
        next_id += 1
        for _ in range(n_children):
            add({"t": "frame", "id": next_id, "parent": iframe_id,
                 "src": "about:blank", "navigated": False})
            next_id += 1
            n_3p += 1

    nested = spec.get("nested_navigated")
    nested_id = None
    if nested:
        nested_id = next_id
        add({"t": "frame", "id": nested_id, "parent": first_lf, "src": nested["src"],
             "navigated": True, "origin": nested["origin"]})
        next_id += 1

    lf_blocked = lf_allowed = 0
    suspect_urls: list[str] = []
    request_groups = [(first_lf, spec["lf_requests"])]
    if nested:
        request_groups.append((nested_id, nested["requests"]))
    for frame_id, group in request_groups:
        for template in group:
            for i in range(template["n"]):
                url = template["url"].format(i=i)
                add({"t": "ev", "frame": frame_id, "kind": "request",
                     "url": url, "type": template["type"]})
                if template["blocked"]:
                    lf_blocked += 1
                    suspect_urls.append(url)
                else:
                    lf_allowed += 1
    for i in range(spec["other_requests"]):
        add({"t": "ev", "frame": 1, "kind": "request",
             "url": f"{root_src}/page-{i:04d}.css", "type": "other"})

    for i in range(spec["fp_calls"]):
        add({"t": "ev", "frame": first_lf, "kind": "api", "api": FP_APIS[i % len(FP_APIS)]})
    for i in range(spec["js_other"]):
        add({"t": "ev", "frame": first_lf, "kind": "api", "api": OTHER_APIS[i % len(OTHER_APIS)]})
    for i in range(spec["elements"]):
        add({"t": "ev", "frame": first_lf, "kind": "element", "tag": ELEMENT_TAGS[i % len(ELEMENT_TAGS)]})
    for i in range(spec["auto_elements"]):
        add({"t": "ev", "frame": first_lf, "kind": "element", "tag": ("body", "head")[i % 2]})

    intent = {
        "site": domain,
        "bucket": bucket_of(spec["rank"]),
        "n_local_frames_1p": spec["lf_1p"] + spec["srcdoc"],
        "n_local_frames_3p": n_3p,
        "candidates": {
            "about:blank": spec["lf_1p"] + n_3p,
            "about:srcdoc": spec["srcdoc"],
            "blob": spec["blob"],
            "data": spec["data"],
        },
        "n_requests_in_lf": lf_blocked + lf_allowed,
        "n_blocked_in_lf": lf_blocked,
        "n_requests_total": lf_blocked + lf_allowed + spec["other_requests"],
        "n_fp_api_calls": spec["fp_calls"],
        "n_js_calls": spec["fp_calls"] + spec["js_other"],
        "n_html_elements": spec["elements"],
        "suspect_urls": suspect_urls,
        "frame_entities": [(ENTITY_OF.get(h, h), n) for h, n in spec["iframes"]],
    }
    return records, intent


def main() -> None:
    corpus = DATA / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    for stale in corpus.glob("*.jsonl"):
        stale.unlink()

    candidates: dict[str, int] = defaultdict(int)
    per_bucket: dict[str, dict] = {
        b: {
            "sites": 0, "requests": 0, "in_lf": 0, "blocked": 0,
            "sites_with_request": 0, "sites_with_lf_request": 0, "sites_with_blocked": 0,
            "sites_1p": 0, "sites_3p": 0, "sites_either": 0,
            "frames_1p": 0, "frames_3p": 0,
        }
        for b in BUCKETS
    }
    totals = {"fp": 0, "js": 0, "elements": 0, "sites_fp": 0, "sites_js": 0, "sites_el": 0}
    frame_entities: dict[str, dict[str, tuple[set, int]]] = {b: defaultdict(lambda: (set(), 0)) for b in BUCKETS}
    request_entities: dict[str, tuple[set, int]] = defaultdict(lambda: (set(), 0))
    site_rows = []

    for n, spec in enumerate(SITES, start=1):
        records, intent = build_site(spec)
        (corpus / f"site-{n:02d}.jsonl").write_text("\n".join(records) + "\n", encoding="utf-8")
        site_rows.append({k: v for k, v in intent.items() if k not in ("suspect_urls", "frame_entities", "candidates")})
        for kind, count in intent["candidates"].items():
            candidates[kind] += count
        b = per_bucket[intent["bucket"]]
        b["sites"] += 1
        b["requests"] += intent["n_requests_total"]
        b["in_lf"] += intent["n_requests_in_lf"]
        b["blocked"] += intent["n_blocked_in_lf"]
        b["sites_with_request"] += 1 if intent["n_requests_total"] else 0
        b["sites_with_lf_request"] += 1 if intent["n_requests_in_lf"] else 0
        b["sites_with_blocked"] += 1 if intent["n_blocked_in_lf"] else 0
        b["sites_1p"] += 1 if intent["n_local_frames_1p"] else 0
        b["sites_3p"] += 1 if intent["n_local_frames_3p"] else 0
        b["sites_either"] += 1 if intent["n_local_frames_1p"] or intent["n_local_frames_3p"] else 0
        b["frames_1p"] += intent["n_local_frames_1p"]
        b["frames_3p"] += intent["n_local_frames_3p"]
        totals["fp"] += intent["n_fp_api_calls"]
        totals["js"] += intent["n_js_calls"]
        totals["elements"] += intent["n_html_elements"]
        totals["sites_fp"] += 1 if intent["n_fp_api_calls"] else 0
        totals["sites_js"] += 1 if intent["n_js_calls"] else 0
        totals["sites_el"] += 1 if intent["n_html_elements"] else 0

        tally = frame_entities[intent["bucket"]]
        for entity, count in intent["frame_entities"]:
            if count:
                sites, frames = tally[entity]
                sites.add(intent["site"])
                tally[entity] = (sites, frames + count)
        for url in intent["suspect_urls"]:
            entity = entity_of_url(url)
            sites, count = request_entities[entity]
            sites.add(intent["site"])
            request_entities[entity] = (sites, count + 1)

    n_candidates = sum(candidates.values())
    manifest = {
        "sites": site_rows,
        "candidates": dict(sorted(candidates.items())),
        "prefix_shares": {k: v / n_candidates for k, v in sorted(candidates.items())},
        "per_bucket": per_bucket,
        "behavior_totals": totals,
        "entities_frames": {
            bucket: [
                {"entity": e, "sites": len(sites), "frames": frames}
                for e, (sites, frames) in sorted(tally.items(), key=lambda kv: (-len(kv[1][0]), kv[0]))
            ]
            for bucket, tally in frame_entities.items()
        },
        "entities_requests": [
            {"entity": e, "sites": len(sites), "requests": count}
            for e, (sites, count) in sorted(request_entities.items(), key=lambda kv: (-len(kv[1][0]), kv[0]))
        ],
    }
    (DATA / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"{len(SITES)} sites, {n_candidates} local-frame candidates")
    print("shares:", {k: f"{v:.3f}" for k, v in manifest["prefix_shares"].items()})
    for bucket in BUCKETS:
        b = per_bucket[bucket]
        share = b["blocked"] / b["in_lf"] if b["in_lf"] else 0
        print(f"{bucket}: lf-requests={b['in_lf']} blocked={b['blocked']} ({share:.1%})")


if __name__ == "__main__":
    main()
