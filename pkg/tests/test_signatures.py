from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quirkprint.errors import (
    AttributeMismatchError,
    EmptyDatasetError,
    SignatureError,
    ZeroOverlapError,
)
from quirkprint.signatures import (
    BrowserSignature,
    Outcome,
    SignatureDataset,
    confidence,
    family_size,
    fingerprint_efficiency,
    median_dataset_distance,
    median_family_distance,
    mhd,
    nearest_neighbors,
)


def sig(tokens: str, label: str = "", family: str | None = None) -> BrowserSignature:
    return BrowserSignature.from_tokens(tokens, browser_label=label, family=family)


def dataset(*sigs: BrowserSignature) -> SignatureDataset:
    return SignatureDataset(signatures=list(sigs))


class TestConfidence:
    def test_no_na_entries(self):
        assert confidence(sig("pps")) == 1.0

    def test_one_na_among_three(self):
        assert confidence(sig("pns")) == pytest.approx(2 / 3)

    def test_all_na(self):
        assert confidence(sig("nnnnn")) == 0.0

    def test_empty_signature_is_an_error(self):
        with pytest.raises(SignatureError):
            confidence(BrowserSignature(outcomes={}))


class TestMHD:
    def test_worked_example_sb1_sb2(self):
        distance, overlap = mhd(sig("pps", "Sb1"), sig("pns", "Sb2"))
        assert distance == 0
        assert overlap == 2

    def test_worked_example_sb1_sb3(self):
        distance, overlap = mhd(sig("pps", "Sb1"), sig("pnp", "Sb3"))
        assert distance == 1
        assert overlap == 2

    def test_self_distance_is_zero_with_full_non_na_overlap(self):
        s = sig("ppsnsp")
        distance, overlap = mhd(s, s)
        assert distance == 0
        assert overlap == 5  # one NA position skipped

    def test_attribute_mismatch(self):
        a = BrowserSignature.from_tokens("pp", attributes=["1-1-1", "2-1-1"])
        b = BrowserSignature.from_tokens("pp", attributes=["1-1-1", "3-1-1"])
        with pytest.raises(AttributeMismatchError):
            mhd(a, b)

    def test_zero_overlap_is_incomparable(self):
        with pytest.raises(ZeroOverlapError):
            mhd(sig("pnn"), sig("nps"))


class TestNearestNeighbors:
    def test_tied_neighbors_are_all_returned(self):
        sb1, sb2, sb3 = sig("pps", "Sb1"), sig("pns", "Sb2"), sig("pnp", "Sb3")
        result = nearest_neighbors(sb3, dataset(sb1, sb2))
        assert result == [("Sb1", 1), ("Sb2", 1)]

    def test_member_query_excluded_by_identity(self):
        sb1, sb2 = sig("pps", "Sb1"), sig("pns", "Sb2")
        ds = dataset(sb1, sb2)
        assert nearest_neighbors(sb1, ds) == [("Sb2", 0)]

    def test_equal_copy_matches_at_distance_zero(self):
        member = sig("pss", "member")
        ds = dataset(member, sig("ppp", "other"))
        copy = sig("pss", "query")
        assert nearest_neighbors(copy, ds)[0] == ("member", 0)

    def test_empty_dataset(self):
        lone = sig("pp", "only")
        with pytest.raises(EmptyDatasetError):
            nearest_neighbors(lone, dataset(lone))

    def test_no_overlapping_candidate(self):
        with pytest.raises(ZeroOverlapError):
            nearest_neighbors(sig("pnn", "q"), dataset(sig("nps", "a")))


class TestMedians:
    def test_family_of_two_with_mutual_distance_zero(self):
        a = sig("pps", "a", family="F")
        b = sig("pps", "b", family="F")
        assert median_family_distance(a, dataset(a, b)) == 0.0

    def test_even_count_averages_central_values(self):
        # Distances from q to its four siblings: 0, 0, 1, 1 -> median 0.5.
        q = sig("pppp", "q", family="F")
        siblings = [
            sig("pppp", "s1", family="F"),
            sig("pppp", "s2", family="F"),
            sig("sppp", "s3", family="F"),
            sig("pspp", "s4", family="F"),
        ]
        ds = dataset(q, *siblings, sig("ssss", "other", family="G"))
        assert median_family_distance(q, ds) == 0.5

    def test_singleton_family_is_undefined(self):
        a = sig("pps", "a", family="F")
        b = sig("pps", "b", family="G")
        assert median_family_distance(a, dataset(a, b)) is None

    def test_unlabeled_signature_has_no_mdf(self):
        a = sig("pps", "a")
        with pytest.raises(SignatureError):
            median_family_distance(a, dataset(a, sig("pps", "b", family="F")))

    def test_mdd_single_other(self):
        a = sig("ppppss", "a")
        b = sig("ssspss", "b")  # differs at the first three positions
        assert mhd(a, b)[0] == 3
        assert median_dataset_distance(a, dataset(a, b)) == 3.0

    def test_mdd_odd_count(self):
        base = "p" * 6
        q = sig(base, "q")
        others = [
            sig("s" + base[1:], "d1"),
            sig("ss" + base[2:], "d2"),
            sig("sss" + base[3:], "d3"),
        ]
        assert median_dataset_distance(q, dataset(q, *others)) == 2.0

    def test_mdd_even_count_averages(self):
        n = 104
        base = "p" * n
        q = sig(base, "q")

        def flipped(k: int, label: str) -> BrowserSignature:
            return sig("s" * k + base[k:], label)

        ds = dataset(q, flipped(1, "d1"), flipped(2, "d2"), flipped(3, "d3"), flipped(100, "d4"))
        assert median_dataset_distance(q, ds) == 2.5

    def test_mdd_needs_more_than_one_signature(self):
        lone = sig("pp", "only")
        with pytest.raises(EmptyDatasetError):
            median_dataset_distance(lone, dataset(lone))

    def test_family_size_counts_self(self):
        a = sig("pp", "a", family="F")
        b = sig("ps", "b", family="F")
        c = sig("ss", "c", family="G")
        assert family_size(a, dataset(a, b, c)) == 2


class TestEfficiency:
    def test_all_distinct(self):
        ds = dataset(sig("pp", "a"), sig("ps", "b"), sig("ss", "c"))
        duplicates, total, rate = fingerprint_efficiency(ds)
        assert (duplicates, total, rate) == (0, 3, 1.0)

    def test_all_identical(self):
        ds = dataset(sig("pp", "a"), sig("pp", "b"), sig("pp", "c"))
        duplicates, total, rate = fingerprint_efficiency(ds)
        assert (duplicates, total, rate) == (3, 3, 0.0)

    def test_requires_two_signatures(self):
        with pytest.raises(EmptyDatasetError):
            fingerprint_efficiency(dataset(sig("pp", "a")))


tokens_strategy = st.text(alphabet="spn", min_size=1, max_size=30)


def pair_strategy():
    return tokens_strategy.flatmap(
        lambda a: st.tuples(
            st.just(a), st.text(alphabet="spn", min_size=len(a), max_size=len(a))
        )
    )


class TestProperties:
    @given(pair_strategy())
    def test_symmetry(self, pair):
        a, b = sig(pair[0], "a"), sig(pair[1], "b")
        try:
            forward = mhd(a, b)
        except ZeroOverlapError:
            with pytest.raises(ZeroOverlapError):
                mhd(b, a)
            return
        assert forward == mhd(b, a)

    @given(pair_strategy())
    def test_bounds(self, pair):
        a, b = sig(pair[0], "a"), sig(pair[1], "b")
        try:
            distance, overlap = mhd(a, b)
        except ZeroOverlapError:
            return
        assert 0 <= distance <= overlap <= len(pair[0])

    @given(tokens_strategy)
    def test_reflexivity(self, tokens):
        s = sig(tokens)
        try:
            distance, _ = mhd(s, s)
        except ZeroOverlapError:
            assert all(t == "n" for t in tokens)
            return
        assert distance == 0

    @given(pair_strategy(), st.data())
    def test_na_never_increases_distance(self, pair, data):
        a, b = sig(pair[0], "a"), sig(pair[1], "b")
        try:
            before, _ = mhd(a, b)
        except ZeroOverlapError:
            return
        index = data.draw(st.integers(min_value=0, max_value=len(pair[0]) - 1))
        masked_tokens = pair[0][:index] + "n" + pair[0][index + 1:]
        masked = sig(masked_tokens, "a-masked")
        try:
            after, _ = mhd(masked, b)
        except ZeroOverlapError:
            return
        assert after <= before

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_medians_invariant_under_dataset_permutation(self, seed):
        rng = random.Random(seed)
        tokens = ["ppps", "ppss", "psss", "pppp", "spss"]
        labels = "abcde"
        families = ["F", "F", "F", "G", "G"]
        sigs = [
            sig(t, l, family=f) for t, l, f in zip(tokens, labels, families)
        ]
        ds = dataset(*sigs)
        mdf = median_family_distance(sigs[0], ds)
        mdd = median_dataset_distance(sigs[0], ds)
        shuffled = sigs[:]
        rng.shuffle(shuffled)
        ds2 = dataset(*shuffled)
        assert median_family_distance(sigs[0], ds2) == mdf
        assert median_dataset_distance(sigs[0], ds2) == mdd
