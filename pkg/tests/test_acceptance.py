"""Acceptance suite: one test per primary criterion, at its stated tolerance.

Run with ``pytest -v tests/test_acceptance.py`` for one pass/fail line per
criterion (``-s`` additionally shows the ACCEPTANCE lines printed here).
"""

from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import date
from pathlib import Path

import pytest

import helpers
from conftest import run_driver
from quirkprint.classifier import (
    InductionConfig,
    Split,
    best_split,
    classify,
    evaluate,
    gain_ratio,
    induce_tree,
)
from quirkprint.corpus import expand_test_cases, load_corpus
from quirkprint.reports import timemap_points
from quirkprint.server import verify_pass_after_sent
from quirkprint.signatures import (
    BrowserSignature,
    Outcome,
    SignatureDataset,
    confidence,
    fingerprint_efficiency,
    mhd,
)
from quirkprint.simagent import QuirkProfile, Behavior, replay
from quirkprint.store import export_signatures_text, import_signatures_text
from test_classifier import labeled, random_labeled_dataset

SAMPLE_CORPUS = (
    Path(__file__).parent.parent / "src" / "quirkprint" / "data" / "sample_corpus.txt"
)


def _report(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}", flush=True)


def test_criterion_01_mhd_worked_example():
    sb1 = BrowserSignature.from_tokens("pps", browser_label="Sb1")
    sb2 = BrowserSignature.from_tokens("pns", browser_label="Sb2")
    sb3 = BrowserSignature.from_tokens("pnp", browser_label="Sb3")
    assert mhd(sb1, sb2)[0] == 0
    assert mhd(sb1, sb3)[0] == 1
    _report("MHD worked example (pps/pns -> 0, pps/pnp -> 1)")


def test_criterion_02_confidence_gate():
    sig = BrowserSignature.from_tokens("pns", browser_label="gate")
    assert confidence(sig) == 2 / 3

    text = "browser,family,release_date,1-1-1,2-1-1,3-1-1\ngate,,,P,N,S\n"
    strict = import_signatures_text(text, min_confidence=0.90)
    assert len(strict.dataset) == 0
    assert strict.excluded == [(1, 2 / 3)]
    relaxed = import_signatures_text(text, min_confidence=0.5)
    assert len(relaxed.dataset) == 1
    assert relaxed.excluded == []
    _report("confidence gate (p,n,s -> 2/3; 0.90 excludes, 0.5 includes)")


def test_criterion_03_fixture_tree_fidelity():
    tree = helpers.fixture_tree()
    expectations = ["Firefox", "IE", "Chrome", "Android", "Safari", "Opera"]
    verdicts = [classify(tree, helpers.probe(family)) for family in expectations]
    assert verdicts == expectations
    _report("fixture tree fidelity (six leaf paths classify exactly)")


def test_criterion_04_induction_reproduces_published_accuracy():
    ds = helpers.fixture_training_set()
    per_family = {f: 0 for f in helpers.FAMILY_COUNTS}
    for sig in ds.signatures:
        per_family[sig.family] += 1
    assert per_family == helpers.FAMILY_COUNTS
    assert len(ds.signatures) == 72

    started = time.monotonic()
    tree = induce_tree(ds, InductionConfig(split_kind="binary"))
    matrix = evaluate(tree, ds)
    elapsed = time.monotonic() - started

    assert matrix.total == 72
    assert matrix.trace == 71
    assert matrix.accuracy == 71 / 72  # exactly 98.61%
    assert matrix.off_diagonal() == {("Android", "Chrome"): 1}
    assert matrix.count("Safari", "Safari") == 11
    assert matrix.count("Firefox", "Firefox") == 15
    assert matrix.count("IE", "IE") == 6
    assert matrix.count("Opera", "Opera") == 6
    assert matrix.count("Android", "Android") == 14
    assert matrix.count("Chrome", "Chrome") == 19
    assert elapsed < 1.0
    _report(
        f"induction on 72-instance fixture: 71/72 = {matrix.accuracy:.2%}, "
        f"single Android->Chrome error, {elapsed * 1000:.0f} ms"
    )


def _oracle_best_split(ds, split_kind="binary"):
    """Exhaustive enumeration over all (attribute, split) candidates.

    Independent of the induction path: recomputes entropies from scratch
    and walks candidates in the documented tie-break order (attribute
    order, then PASS, SENT, NA), keeping the first strict maximum of the
    score rounded to 1e-12.
    """
    import math

    def entropy_of(items):
        total = len(items)
        h = 0.0
        for value in set(items):
            p = items.count(value) / total
            h -= p * math.log2(p)
        return h

    best = None
    values = [Outcome.PASS, Outcome.SENT, Outcome.NA]
    for attr in ds.attributes:
        candidates = (
            [Split(attr, "binary", v) for v in values]
            if split_kind == "binary"
            else [Split(attr, "multiway")]
        )
        for split in candidates:
            buckets: dict[int, list[str]] = {}
            for sig in ds.signatures:
                for i, pred in enumerate(split.predicates()):
                    if pred.matches(sig.outcomes[attr]):
                        buckets.setdefault(i, []).append(sig.family)
                        break
            membership = []
            for i, bucket in buckets.items():
                membership.extend([i] * len(bucket))
            split_info = entropy_of(membership)
            if split_info == 0:
                score = 0.0
            else:
                base = entropy_of([s.family for s in ds.signatures])
                total = len(ds.signatures)
                remainder = sum(
                    len(b) / total * entropy_of(b) for b in buckets.values()
                )
                score = max(0.0, base - remainder) / split_info
                score = min(1.0, score)
            score = round(score, 12)
            if best is None or score > best[1]:
                best = (split, score)
    if best is None or best[1] <= 0:
        return None
    return best


def test_criterion_05_gain_ratio_oracle_equivalence():
    rng = random.Random(0xBADC0DE)
    checked = 0
    for _ in range(200):
        ds = random_labeled_dataset(rng)
        expected = _oracle_best_split(ds)
        actual = best_split(ds, InductionConfig(split_kind="binary"))
        if expected is None:
            assert actual is None
        else:
            assert actual is not None
            assert actual[0] == expected[0], (
                f"root split mismatch: {actual[0]} != {expected[0]} "
                f"on dataset {[ (s.tokens(), s.family) for s in ds.signatures ]}"
            )
            assert abs(actual[1] - expected[1]) <= 1e-12
        checked += 1
    assert checked == 200
    _report("gain-ratio oracle equivalence over 200 random datasets")


def test_criterion_06_fingerprint_efficiency_table():
    # 77 signatures over 8 fully-answered attributes: 11 identical pairs
    # (22 signatures with a zero-distance duplicate) plus 55 unique rows.
    attrs = [f"{i + 1}-1-1" for i in range(8)]

    def pattern(i: int) -> str:
        return "".join("s" if (i >> bit) & 1 else "p" for bit in range(8))

    signatures = []
    for pair in range(11):
        for copy in range(2):
            signatures.append(
                BrowserSignature.from_tokens(
                    pattern(pair), attributes=attrs, browser_label=f"dup{pair}.{copy}"
                )
            )
    for unique in range(55):
        signatures.append(
            BrowserSignature.from_tokens(
                pattern(11 + unique), attributes=attrs, browser_label=f"uniq{unique}"
            )
        )
    ds = SignatureDataset(signatures=signatures, attributes=attrs)
    assert len(ds) == 77

    duplicates, total, rate = fingerprint_efficiency(ds)
    assert duplicates == 22
    assert total == 77
    fp_rate_pct = 100.0 * duplicates / total
    well_pct = 100.0 * rate
    assert fp_rate_pct == pytest.approx(28.57, abs=0.01)
    assert well_pct == pytest.approx(71.42, abs=0.01)
    _report(
        f"fingerprint efficiency: {duplicates}/{total} duplicates, "
        f"{fp_rate_pct:.2f}% / {well_pct:.2f}%"
    )


def test_criterion_07_end_to_end_protocol():
    corpus = load_corpus(SAMPLE_CORPUS)
    cases = expand_test_cases(corpus)
    assert len(corpus.vectors) == 20
    assert len(cases) == 40

    attrs = [tc.attribute_name for tc in cases]
    rng = random.Random(2012)
    token_strings: set[str] = set()
    while len(token_strings) < 10:
        token_strings.add("".join(rng.choice("psn") for _ in range(40)))
    profiles = [
        QuirkProfile(
            label=f"agent{i}",
            behavior={
                a: {
                    "p": Behavior.EXECUTES,
                    "s": Behavior.PARSES_ONLY,
                    "n": Behavior.SKIPS,
                }[t]
                for a, t in zip(attrs, tokens)
            },
            ua_string=f"agent{i}/sim",
        )
        for i, tokens in enumerate(sorted(token_strings))
    ]

    started = time.monotonic()
    with run_driver(corpus) as (base, driver):
        with ThreadPoolExecutor(max_workers=10) as pool:
            signatures = list(pool.map(lambda p: replay(p, base), profiles))
        elapsed = time.monotonic() - started

        by_label = {s.browser_label: s for s in signatures}
        for profile in profiles:
            produced = by_label[profile.ua_string]
            expected = profile.expected_signature()
            assert produced.outcomes == expected.outcomes

        assert len(driver._sessions) == 10
        for session in driver._sessions.values():
            assert session.finalized
            assert verify_pass_after_sent(session.events) == []

    assert elapsed < 10.0
    _report(
        f"end-to-end protocol: 10 concurrent agents x 40 tests in {elapsed:.2f} s, "
        f"all signatures exact, PASS-after-SENT holds"
    )


def _random_dataset(rng: random.Random) -> SignatureDataset:
    n_attrs = rng.randint(1, 15)
    attrs = [f"{i + 1}-{rng.randint(1, 2)}-1" for i in range(n_attrs)]
    label_alphabet = "abcXYZ 09._,\"'()/"
    families = [None, "Android", "Chrome", "Firefox", "IE", "Opera", "Safari"]
    signatures = []
    for i in range(rng.randint(0, 12)):
        tokens = "".join(rng.choice("psn") for _ in range(n_attrs))
        label = "".join(rng.choice(label_alphabet) for _ in range(rng.randint(0, 14)))
        release = (
            date.fromordinal(rng.randint(730000, 735000))
            if rng.random() < 0.5
            else None
        )
        signatures.append(
            BrowserSignature.from_tokens(
                tokens,
                attributes=attrs,
                browser_label=label,
                family=rng.choice(families),
                release_date=release,
            )
        )
    return SignatureDataset(signatures=signatures, attributes=attrs)


def test_criterion_08_dataset_round_trip():
    rng = random.Random(77)
    for _ in range(100):
        ds = _random_dataset(rng)
        first = export_signatures_text(ds)
        again = export_signatures_text(ds)
        assert first == again  # byte-level determinism
        back = import_signatures_text(first, min_confidence=0.0)
        assert back.dataset.attributes == ds.attributes
        assert back.dataset.signatures == ds.signatures
        assert export_signatures_text(back.dataset) == first
    _report("dataset round-trip identity over 100 random datasets")


def test_criterion_09_timemap_pair_counts():
    rng = random.Random(42)
    families = ["Opera", "Firefox", "Chrome"]
    attrs = [f"{i + 1}-1-1" for i in range(6)]
    signatures = [
        BrowserSignature.from_tokens(
            "".join(rng.choice("ps") for _ in range(6)),
            attributes=attrs,
            browser_label=f"b{i}",
            family=families[i % 3],
            release_date=date.fromordinal(733000 + 31 * i),
        )
        for i in range(9)
    ]
    ds = SignatureDataset(signatures=signatures, attributes=attrs)

    points = timemap_points(ds)
    n = len(signatures)
    assert len(points) == n * (n - 1) // 2 == 36

    for family in families:
        filtered = timemap_points(ds, family=family)
        oracle = {
            frozenset((a.browser_label, b.browser_label))
            for a, b in itertools.combinations(signatures, 2)
            if a.family == family and b.family == family
        }
        assert {frozenset((p.browser_a, p.browser_b)) for p in filtered} == oracle
    _report("timemap pair count n(n-1)/2 and family filter vs oracle")
