"""Shared fixtures: the hand-coded family tree and its synthetic training set."""

from __future__ import annotations

from quirkprint.classifier import (
    Branch,
    BranchPredicate,
    LabeledDataset,
    TreeInternal,
    TreeLeaf,
    TreeNode,
)
from quirkprint.signatures import BrowserSignature, Outcome, SignatureDataset

FIXTURE_ATTRS = ["1-1-1", "89-1-1", "90-2-1", "128-1-1", "258-1-1", "397-1-1"]

# Tokens over FIXTURE_ATTRS for each family's canonical path through the
# fixture tree.  The deviant Android instance walks the Chrome path.
PATH_TOKENS = {
    "Firefox": "sssssp",  # 397=P
    "IE": "spssss",       # 89=P
    "Chrome": "ssssss",   # nothing passes
    "Android": "sspsss",  # 90=P
    "Safari": "ssppss",   # 90=P 128=P 258=S
    "Opera": "ssppps",    # 90=P 128=P 258=P
}
CHROME_PATH = PATH_TOKENS["Chrome"]

FAMILY_COUNTS = {
    "Safari": 11,
    "Firefox": 15,
    "IE": 6,
    "Opera": 6,
    "Android": 15,  # one of which follows the Chrome path
    "Chrome": 19,
}


def _eq(value: Outcome) -> BranchPredicate:
    return BranchPredicate("=", value)


def _ne(value: Outcome) -> BranchPredicate:
    return BranchPredicate("!=", value)


def fixture_tree() -> TreeNode:
    """The published six-test family tree, hand-coded.

    397-1-1=PASS -> Firefox; else 89-1-1=PASS -> IE; else 90-2-1!=PASS ->
    Chrome; else 128-1-1!=PASS -> Android; else 258-1-1=SENT -> Safari,
    otherwise Opera.
    """
    node_258 = TreeInternal(
        attribute="258-1-1",
        branches=[
            Branch(_eq(Outcome.SENT), TreeLeaf("Safari", 11)),
            Branch(_ne(Outcome.SENT), TreeLeaf("Opera", 6)),
        ],
    )
    node_128 = TreeInternal(
        attribute="128-1-1",
        branches=[
            Branch(_ne(Outcome.PASS), TreeLeaf("Android", 14)),
            Branch(_eq(Outcome.PASS), node_258),
        ],
    )
    node_90 = TreeInternal(
        attribute="90-2-1",
        branches=[
            Branch(_ne(Outcome.PASS), TreeLeaf("Chrome", 20)),
            Branch(_eq(Outcome.PASS), node_128),
        ],
    )
    node_89 = TreeInternal(
        attribute="89-1-1",
        branches=[
            Branch(_ne(Outcome.PASS), node_90),
            Branch(_eq(Outcome.PASS), TreeLeaf("IE", 6)),
        ],
    )
    return TreeInternal(
        attribute="397-1-1",
        branches=[
            Branch(_eq(Outcome.PASS), TreeLeaf("Firefox", 15)),
            Branch(_ne(Outcome.PASS), node_89),
        ],
    )


def probe(family: str) -> BrowserSignature:
    """A signature following the fixture-tree path of the given family."""
    return BrowserSignature.from_tokens(
        PATH_TOKENS[family],
        attributes=FIXTURE_ATTRS,
        browser_label=f"{family} probe",
    )


def fixture_training_set() -> LabeledDataset:
    """72 labeled instances matching the published per-family counts.

    71 instances follow their family's tree path; exactly one Android
    instance follows the Chrome path and is therefore indistinguishable
    from the Chrome instances.
    """
    signatures = []
    for family, count in FAMILY_COUNTS.items():
        deviants = 1 if family == "Android" else 0
        for i in range(count - deviants):
            signatures.append(
                BrowserSignature.from_tokens(
                    PATH_TOKENS[family],
                    attributes=FIXTURE_ATTRS,
                    browser_label=f"{family} {i + 1}",
                    family=family,
                )
            )
        for i in range(deviants):
            signatures.append(
                BrowserSignature.from_tokens(
                    CHROME_PATH,
                    attributes=FIXTURE_ATTRS,
                    browser_label=f"{family} deviant",
                    family=family,
                )
            )
    return LabeledDataset(signatures=signatures, attributes=FIXTURE_ATTRS)


def fixture_signature_dataset() -> SignatureDataset:
    labeled = fixture_training_set()
    return SignatureDataset(
        signatures=labeled.signatures, attributes=labeled.attributes
    )
