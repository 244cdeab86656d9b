"""Browser-family classification with gain-ratio decision trees.

Induction follows the classic C4.5 recipe: at each node, score every
candidate split by information gain ratio (information gain normalized by
the split's own entropy) and recurse on the best one.  Outcomes are nominal
values, NA included as an ordinary third value.  Two split schemes exist:
one-vs-rest binary splits (``= PASS`` / ``!= PASS``), the default because
family trees over quirk outcomes come out this shape, and classic multiway
splits with one branch per outcome value.

Deterministic tie-breaks, which callers may rely on:
  - candidate splits are enumerated attribute-first (dataset attribute
    order), then by outcome value in the order PASS, SENT, NA;
  - scores are compared after rounding to 12 decimal places and the first
    candidate achieving the maximum wins;
  - leaf labels are the majority class, ties broken alphabetically.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import (
    EmptyDatasetError,
    MissingAttributeError,
    SignatureError,
    TreeFormatError,
)
from .signatures import BrowserSignature, Outcome

# Canonical outcome order for split enumeration and serialization.
OUTCOME_ORDER = (Outcome.PASS, Outcome.SENT, Outcome.NA)

_OUTCOME_NAMES = {Outcome.PASS: "PASS", Outcome.SENT: "SENT", Outcome.NA: "NA"}
_OUTCOMES_BY_NAME = {name: o for o, name in _OUTCOME_NAMES.items()}


@dataclass
class LabeledDataset:
    """Signatures that all carry a family label, sharing one attribute list."""

    signatures: list[BrowserSignature]
    attributes: list[str] = field(default_factory=list)
    family_set: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if not self.attributes and self.signatures:
            self.attributes = self.signatures[0].attributes
        for sig in self.signatures:
            if sig.family is None:
                raise SignatureError(
                    f"instance {sig.browser_label!r} has no family label"
                )
            if self.family_set is not None and sig.family not in self.family_set:
                raise SignatureError(
                    f"instance {sig.browser_label!r} has family {sig.family!r} "
                    f"outside the configured family set"
                )
            if sig.attributes != self.attributes:
                raise SignatureError(
                    f"instance {sig.browser_label!r} does not share the dataset attribute list"
                )

    def labels(self) -> list[str]:
        return [sig.family for sig in self.signatures]  # type: ignore[misc]

    def __len__(self) -> int:
        return len(self.signatures)


@dataclass(frozen=True)
class BranchPredicate:
    """Outcome test on one branch: equality or inequality against a value."""

    op: str  # "=" or "!="
    value: Outcome

    def matches(self, outcome: Outcome) -> bool:
        if self.op == "=":
            return outcome is self.value
        return outcome is not self.value

    def __str__(self) -> str:
        return f"{self.op} {_OUTCOME_NAMES[self.value]}"


@dataclass(frozen=True)
class Split:
    """A candidate way to partition instances on one attribute."""

    attribute: str
    kind: str  # "binary" (one-vs-rest) or "multiway"
    value: Outcome | None = None  # the singled-out value for binary splits

    def predicates(self) -> list[BranchPredicate]:
        if self.kind == "binary":
            assert self.value is not None
            return [
                BranchPredicate("=", self.value),
                BranchPredicate("!=", self.value),
            ]
        return [BranchPredicate("=", v) for v in OUTCOME_ORDER]


@dataclass
class TreeLeaf:
    family: str
    support: int

    def is_leaf(self) -> bool:
        return True


@dataclass
class Branch:
    predicate: BranchPredicate
    child: "TreeNode"


@dataclass
class TreeInternal:
    attribute: str
    branches: list[Branch]

    def is_leaf(self) -> bool:
        return False


TreeNode = TreeLeaf | TreeInternal


@dataclass(frozen=True)
class InductionConfig:
    split_kind: str = "binary"  # "binary" or "multiway"
    max_depth: int | None = None

    def __post_init__(self) -> None:
        if self.split_kind not in ("binary", "multiway"):
            raise ValueError(f"unknown split kind {self.split_kind!r}")


def _entropy(counts: Counter[str]) -> float:
    total = sum(counts.values())
    if total == 0:
        return 0.0
    h = 0.0
    for count in counts.values():
        if count:
            p = count / total
            h -= p * math.log2(p)
    return h


def class_entropy(ds: LabeledDataset) -> float:
    """Shannon entropy (bits) of the family-label distribution."""
    if not ds.signatures:
        raise EmptyDatasetError("entropy of an empty dataset is undefined")
    return _entropy(Counter(ds.labels()))


def _partition(
    signatures: list[BrowserSignature], split: Split
) -> list[list[BrowserSignature]]:
    parts: list[list[BrowserSignature]] = [[] for _ in split.predicates()]
    predicates = split.predicates()
    for sig in signatures:
        outcome = sig.outcomes[split.attribute]
        for i, predicate in enumerate(predicates):
            if predicate.matches(outcome):
                parts[i].append(sig)
                break
    return parts


def gain_ratio(ds: LabeledDataset, attribute: str, split: Split) -> float:
    """Information gain of the split normalized by its split info.

    Returns 0 when the split info is 0 (all instances on one branch).
    """
    if attribute not in ds.attributes:
        raise MissingAttributeError(f"unknown attribute {attribute!r}")
    if split.attribute != attribute:
        raise ValueError("split does not test the given attribute")
    total = len(ds.signatures)
    if total == 0:
        raise EmptyDatasetError("gain ratio over an empty dataset is undefined")

    parts = _partition(ds.signatures, split)
    sizes = [len(p) for p in parts]
    split_info = _entropy(Counter({i: n for i, n in enumerate(sizes) if n}))
    if split_info == 0.0:
        return 0.0

    base = _entropy(Counter(ds.labels()))
    remainder = 0.0
    for part, size in zip(parts, sizes):
        if size:
            remainder += (size / total) * _entropy(
                Counter(s.family for s in part)  # type: ignore[misc]
            )
    gain = base - remainder
    if gain <= 0.0:
        return 0.0
    # Floating rounding can nudge the ratio a hair past 1; clamp.
    return min(1.0, gain / split_info)


def _candidate_splits(attributes: list[str], split_kind: str) -> list[Split]:
    if split_kind == "binary":
        return [
            Split(attribute=a, kind="binary", value=v)
            for a in attributes
            for v in OUTCOME_ORDER
        ]
    return [Split(attribute=a, kind="multiway") for a in attributes]


def _majority_label(signatures: list[BrowserSignature]) -> str:
    counts = Counter(s.family for s in signatures)
    best = max(counts.values())
    return min(label for label, count in counts.items() if count == best)  # type: ignore[arg-type]


def best_split(ds: LabeledDataset, config: InductionConfig) -> tuple[Split, float] | None:
    """The highest-scoring candidate split, or None when nothing helps.

    Scores are rounded to 12 decimals before comparison; the first
    candidate in enumeration order wins ties.
    """
    best: tuple[Split, float] | None = None
    for split in _candidate_splits(ds.attributes, config.split_kind):
        score = round(gain_ratio(ds, split.attribute, split), 12)
        if best is None or score > best[1]:
            best = (split, score)
    if best is None or best[1] <= 0.0:
        return None
    return best


def induce_tree(ds: LabeledDataset, config: InductionConfig | None = None) -> TreeNode:
    """Grow an unpruned gain-ratio decision tree over the labeled dataset."""
    if not ds.signatures:
        raise EmptyDatasetError("cannot induce a tree from an empty dataset")
    config = config or InductionConfig()

    def grow(signatures: list[BrowserSignature], depth: int) -> TreeNode:
        majority = _majority_label(signatures)
        labels = {s.family for s in signatures}
        if len(labels) == 1:
            return TreeLeaf(family=majority, support=len(signatures))
        if config.max_depth is not None and depth >= config.max_depth:
            return TreeLeaf(family=majority, support=len(signatures))
        subset = LabeledDataset(
            signatures=signatures, attributes=ds.attributes, family_set=ds.family_set
        )
        chosen = best_split(subset, config)
        if chosen is None:
            return TreeLeaf(family=majority, support=len(signatures))
        split, _ = chosen
        branches = []
        for predicate, part in zip(split.predicates(), _partition(signatures, split)):
            if part:
                child: TreeNode = grow(part, depth + 1)
            else:
                # Empty multiway branch: fall back to the parent majority.
                child = TreeLeaf(family=majority, support=0)
            branches.append(Branch(predicate=predicate, child=child))
        return TreeInternal(attribute=split.attribute, branches=branches)

    return grow(list(ds.signatures), 0)


def classify(tree: TreeNode, sig: BrowserSignature) -> str:
    """Family label at the leaf the signature reaches."""
    node = tree
    while isinstance(node, TreeInternal):
        if node.attribute not in sig.outcomes:
            raise MissingAttributeError(
                f"signature {sig.browser_label!r} lacks attribute {node.attribute!r}"
            )
        outcome = sig.outcomes[node.attribute]
        for branch in node.branches:
            if branch.predicate.matches(outcome):
                node = branch.child
                break
        else:
            raise TreeFormatError(
                f"no branch of node {node.attribute!r} matches outcome {outcome}"
            )
    return node.family


def tree_attributes(tree: TreeNode) -> list[str]:
    """Distinct attributes the tree tests, in first-visit order."""
    seen: list[str] = []

    def walk(node: TreeNode) -> None:
        if isinstance(node, TreeInternal):
            if node.attribute not in seen:
                seen.append(node.attribute)
            for branch in node.branches:
                walk(branch.child)

    walk(tree)
    return seen


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, TreeLeaf):
        return 0
    return 1 + max(tree_depth(b.child) for b in tree.branches)


@dataclass
class ConfusionMatrix:
    """Actual-by-predicted family counts with derived accuracy."""

    families: list[str]
    counts: dict[tuple[str, str], int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def trace(self) -> int:
        return sum(self.counts.get((f, f), 0) for f in self.families)

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            return 0.0
        return self.trace / self.total

    def count(self, actual: str, predicted: str) -> int:
        return self.counts.get((actual, predicted), 0)

    def off_diagonal(self) -> dict[tuple[str, str], int]:
        return {
            (a, p): c for (a, p), c in self.counts.items() if a != p and c > 0
        }


def evaluate(tree: TreeNode, ds: LabeledDataset) -> ConfusionMatrix:
    """Classify every instance and tally actual vs predicted families."""
    if not ds.signatures:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    counts: dict[tuple[str, str], int] = {}
    families: list[str] = []
    for sig in ds.signatures:
        predicted = classify(tree, sig)
        actual = sig.family
        assert actual is not None
        key = (actual, predicted)
        counts[key] = counts.get(key, 0) + 1
        for f in (actual, predicted):
            if f not in families:
                families.append(f)
    return ConfusionMatrix(families=sorted(families), counts=counts)


def serialize_tree(tree: TreeNode) -> str:
    """Deterministic indented text form, one node or branch per line.

    Internal nodes print their attribute; each branch line carries the
    predicate and either an inline leaf (``= PASS: Firefox [15]``) or a
    nested subtree below it.
    """
    lines: list[str] = []

    def emit(node: TreeNode, indent: int) -> None:
        pad = "  " * indent
        if isinstance(node, TreeLeaf):
            lines.append(f"{pad}{node.family} [{node.support}]")
            return
        lines.append(f"{pad}{node.attribute}")
        for branch in node.branches:
            if isinstance(branch.child, TreeLeaf):
                leaf = branch.child
                lines.append(
                    f"{pad}  {branch.predicate}: {leaf.family} [{leaf.support}]"
                )
            else:
                lines.append(f"{pad}  {branch.predicate}:")
                emit(branch.child, indent + 2)
        return

    emit(tree, 0)
    return "\n".join(lines) + "\n"


def _parse_leaf(text: str, line_no: int) -> TreeLeaf:
    text = text.strip()
    if not text.endswith("]") or "[" not in text:
        raise TreeFormatError(f"line {line_no}: malformed leaf {text!r}")
    family, _, support_text = text.rpartition("[")
    try:
        support = int(support_text[:-1])
    except ValueError:
        raise TreeFormatError(f"line {line_no}: bad support count in {text!r}") from None
    family = family.strip()
    if not family:
        raise TreeFormatError(f"line {line_no}: leaf without family label")
    return TreeLeaf(family=family, support=support)


def _parse_predicate(text: str, line_no: int) -> BranchPredicate:
    parts = text.strip().split()
    if len(parts) != 2 or parts[0] not in ("=", "!="):
        raise TreeFormatError(f"line {line_no}: malformed predicate {text!r}")
    value = _OUTCOMES_BY_NAME.get(parts[1])
    if value is None:
        raise TreeFormatError(f"line {line_no}: unknown outcome {parts[1]!r}")
    return BranchPredicate(op=parts[0], value=value)


def parse_tree(text: str) -> TreeNode:
    """Inverse of serialize_tree."""
    rows = [
        (i + 1, len(line) - len(line.lstrip(" ")), line.strip())
        for i, line in enumerate(text.splitlines())
        if line.strip()
    ]
    if not rows:
        raise TreeFormatError("empty tree document")

    pos = 0

    def parse_node(indent: int) -> TreeNode:
        nonlocal pos
        line_no, actual_indent, content = rows[pos]
        if actual_indent != indent:
            raise TreeFormatError(
                f"line {line_no}: expected indent {indent}, got {actual_indent}"
            )
        pos += 1
        if ":" not in content and "[" in content:
            return _parse_leaf(content, line_no)
        attribute = content
        branches: list[Branch] = []
        while pos < len(rows) and rows[pos][1] == indent + 2 and ":" in rows[pos][2]:
            b_line, _, b_content = rows[pos]
            predicate_text, _, rest = b_content.partition(":")
            predicate = _parse_predicate(predicate_text, b_line)
            pos += 1
            if rest.strip():
                child: TreeNode = _parse_leaf(rest, b_line)
            else:
                if pos >= len(rows):
                    raise TreeFormatError(f"line {b_line}: branch without child")
                child = parse_node(indent + 4)
            branches.append(Branch(predicate=predicate, child=child))
        if not branches:
            raise TreeFormatError(f"line {line_no}: node {attribute!r} has no branches")
        _check_exhaustive(branches, line_no)
        return TreeInternal(attribute=attribute, branches=branches)

    tree = parse_node(0)
    if pos != len(rows):
        raise TreeFormatError(f"line {rows[pos][0]}: trailing content after tree")
    return tree


def _check_exhaustive(branches: list[Branch], line_no: int) -> None:
    """Branch predicates must cover {PASS, SENT, NA} mutually exclusively."""
    for outcome in OUTCOME_ORDER:
        matching = sum(1 for b in branches if b.predicate.matches(outcome))
        if matching != 1:
            raise TreeFormatError(
                f"line {line_no}: branches match outcome {_OUTCOME_NAMES[outcome]} "
                f"{matching} times (want exactly 1)"
            )


def load_tree(path) -> TreeNode:
    from pathlib import Path

    return parse_tree(Path(path).read_text(encoding="utf-8"))


def save_tree(tree: TreeNode, path) -> None:
    from pathlib import Path

    Path(path).write_text(serialize_tree(tree), encoding="utf-8")
