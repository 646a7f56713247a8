"""Engine vs. brute-force oracle over seeded random cases."""

from __future__ import annotations

import random

from frameblock import SPEC_CORRECT, decide_request, parse_list, resolve_tree

import casegen
import oracle


def run_equivalence(n_cases: int, seed: int, vary_policy: bool = False) -> int:
    rng = random.Random(seed)
    agreed = 0
    for i in range(n_cases):
        rules, _ = parse_list(casegen.random_rules_text(rng), resources={"noop": ""})
        policy = casegen.ALL_POLICIES[i % len(casegen.ALL_POLICIES)] if vary_policy else SPEC_CORRECT
        tree = resolve_tree(casegen.random_tree(rng), policy)
        ev = casegen.random_event(rng, tree)

        got = decide_request(ev, tree, rules, policy)
        want_action, want_rule = oracle.decide(ev, tree, rules, policy)
        assert got.action.value == want_action, (ev, rules.network, policy)
        assert got.matched_rule == want_rule, (ev, rules.network, policy)
        agreed += 1
    return agreed


def test_thousand_seeded_cases_match_oracle():
    assert run_equivalence(1000, seed=0xBEEF) == 1000


def test_oracle_agreement_across_policies():
    assert run_equivalence(400, seed=0xCAFE, vary_policy=True) == 400


def test_exhaustive_small_grammar_agreement():
    """Every anchor/body/end-anchor combination against a fixed URL set."""
    from frameblock.filterlist import compile_pattern

    bodies = ["a.com", "a.com^", "a*m", "a^", "^a", "*", "om/x", "a.co", "b.a.com", "m/x"]
    urls = [
        "https://a.com/x",
        "http://b.a.com",
        "https://xa.com",
        "https://a.com",
        "https://a.com.evil.org/",
        "ftp://a.com:21/a",
        "https://c.net/a.com/x",
    ]
    checked = 0
    for lead in ("", "|", "||"):
        for body in bodies:
            for tail in ("", "|"):
                pattern = lead + body + tail
                regex = compile_pattern(pattern)
                for url in urls:
                    engine_hit = regex.search(url.lower()) is not None
                    oracle_hit = oracle.match_pattern(pattern, url)
                    assert engine_hit == oracle_hit, (pattern, url, engine_hit, oracle_hit)
                    checked += 1
    assert checked == len(bodies) * len(urls) * 6
