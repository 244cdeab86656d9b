"""Browser signatures and the modified Hamming distance over them.

A signature maps every test-case attribute to one of three outcomes:
the test page was fetched but the payload never executed (SENT), the
payload executed and called back (PASS), or the test was never served
(NA).  The modified Hamming distance (MHD) compares two signatures only
on positions that are non-NA in both, so missing coverage never counts
as a difference.
"""

from __future__ import annotations

import enum
import statistics
from dataclasses import dataclass, field
from datetime import date

from .errors import (
    AttributeMismatchError,
    EmptyDatasetError,
    SignatureError,
    ZeroOverlapError,
)


class Outcome(enum.Enum):
    SENT = "s"
    PASS = "p"
    NA = "n"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "Outcome":
        try:
            return cls(token.lower())
        except ValueError:
            raise SignatureError(f"unknown outcome token {token!r}") from None


@dataclass
class BrowserSignature:
    """Ordered outcome vector for one browser, plus its metadata."""

    outcomes: dict[str, Outcome]
    browser_label: str = ""
    family: str | None = None
    release_date: date | None = None

    @classmethod
    def from_tokens(
        cls,
        tokens: str,
        attributes: list[str] | None = None,
        browser_label: str = "",
        family: str | None = None,
        release_date: date | None = None,
    ) -> "BrowserSignature":
        """Build from a compact token string such as ``"pps"``."""
        if attributes is None:
            attributes = [f"{i + 1}-1-1" for i in range(len(tokens))]
        if len(attributes) != len(tokens):
            raise SignatureError(
                f"{len(tokens)} tokens for {len(attributes)} attributes"
            )
        outcomes = {a: Outcome.from_token(t) for a, t in zip(attributes, tokens)}
        return cls(
            outcomes=outcomes,
            browser_label=browser_label,
            family=family,
            release_date=release_date,
        )

    @property
    def attributes(self) -> list[str]:
        return list(self.outcomes.keys())

    def tokens(self) -> str:
        return "".join(o.token for o in self.outcomes.values())

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass
class SignatureDataset:
    """Signatures sharing one ordered attribute list."""

    signatures: list[BrowserSignature]
    attributes: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.attributes and self.signatures:
            self.attributes = self.signatures[0].attributes
        for sig in self.signatures:
            if sig.attributes != self.attributes:
                raise AttributeMismatchError(
                    f"signature {sig.browser_label!r} does not share the dataset attribute list"
                )

    def __len__(self) -> int:
        return len(self.signatures)

    def __iter__(self):
        return iter(self.signatures)


def confidence(sig: BrowserSignature) -> float:
    """Fraction of test cases with a non-NA outcome, in [0, 1]."""
    if not sig.outcomes:
        raise SignatureError("confidence of an empty signature is undefined")
    non_na = sum(1 for o in sig.outcomes.values() if o is not Outcome.NA)
    return non_na / len(sig.outcomes)


def mhd(a: BrowserSignature, b: BrowserSignature) -> tuple[int, int]:
    """Modified Hamming distance between two signatures.

    Returns (distance, overlap), where overlap counts the positions that
    are non-NA in both signatures and distance counts how many of those
    positions disagree.  Raises ZeroOverlapError when overlap is 0: such
    a pair is incomparable, not identical.
    """
    if a.attributes != b.attributes:
        raise AttributeMismatchError(
            f"signatures {a.browser_label!r} and {b.browser_label!r} have different attribute lists"
        )
    distance = 0
    overlap = 0
    for attr, oa in a.outcomes.items():
        ob = b.outcomes[attr]
        if oa is Outcome.NA or ob is Outcome.NA:
            continue
        overlap += 1
        if oa is not ob:
            distance += 1
    if overlap == 0:
        raise ZeroOverlapError(
            f"signatures {a.browser_label!r} and {b.browser_label!r} share no non-NA positions"
        )
    return distance, overlap


def _comparable_distances(
    sig: BrowserSignature, others: list[BrowserSignature]
) -> list[tuple[BrowserSignature, int]]:
    """Distances to every comparable candidate, skipping zero-overlap pairs."""
    out = []
    for other in others:
        try:
            distance, _ = mhd(sig, other)
        except ZeroOverlapError:
            continue
        out.append((other, distance))
    return out


def nearest_neighbors(
    query: BrowserSignature, ds: SignatureDataset
) -> list[tuple[str, int]]:
    """All dataset members at the minimal MHD from the query, ties included.

    The query itself is excluded when it is (by object identity) a member
    of the dataset.  Raises when no candidate shares a non-NA position.
    """
    candidates = [s for s in ds.signatures if s is not query]
    if not candidates:
        raise EmptyDatasetError("nearest_neighbors requires a non-empty candidate set")
    scored = _comparable_distances(query, candidates)
    if not scored:
        raise ZeroOverlapError(
            f"no dataset member shares a non-NA position with {query.browser_label!r}"
        )
    best = min(d for _, d in scored)
    return sorted(
        [(s.browser_label, d) for s, d in scored if d == best], key=lambda t: t[0]
    )


def median_family_distance(
    sig: BrowserSignature, ds: SignatureDataset
) -> float | None:
    """Median MHD from ``sig`` to the other members of its family (MDF).

    Returns None for singleton families (rendered ``-`` in reports).
    """
    if sig.family is None:
        raise SignatureError(
            f"signature {sig.browser_label!r} has no family label; MDF is undefined"
        )
    siblings = [
        s for s in ds.signatures if s is not sig and s.family == sig.family
    ]
    distances = [d for _, d in _comparable_distances(sig, siblings)]
    if not distances:
        return None
    return float(statistics.median(distances))


def median_dataset_distance(
    sig: BrowserSignature, ds: SignatureDataset
) -> float | None:
    """Median MHD from ``sig`` to every other dataset member (MDD)."""
    others = [s for s in ds.signatures if s is not sig]
    if not others:
        raise EmptyDatasetError("MDD requires at least one other signature")
    distances = [d for _, d in _comparable_distances(sig, others)]
    if not distances:
        return None
    return float(statistics.median(distances))


def family_size(sig: BrowserSignature, ds: SignatureDataset) -> int:
    """Number of dataset members sharing ``sig``'s family, including itself."""
    if sig.family is None:
        return 1
    return sum(1 for s in ds.signatures if s.family == sig.family)


def fingerprint_efficiency(ds: SignatureDataset) -> tuple[int, int, float]:
    """How many signatures are exactly duplicated within the dataset.

    Returns (duplicates, total, well_fingerprinted_rate): duplicates is
    the number of signatures whose nearest neighbor sits at distance 0,
    and the rate is 1 - duplicates/total.
    """
    if len(ds) < 2:
        raise EmptyDatasetError("fingerprint efficiency requires at least 2 signatures")
    duplicates = 0
    for sig in ds.signatures:
        try:
            neighbors = nearest_neighbors(sig, ds)
        except ZeroOverlapError:
            continue
        if neighbors[0][1] == 0:
            duplicates += 1
    total = len(ds)
    return duplicates, total, 1.0 - duplicates / total
