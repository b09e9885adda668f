"""Comparison modes and greedy set matching."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from storygraph.evaluation import (
    ComparisonMode,
    CompareOptions,
    Counts,
    compare_element,
    match_sets,
    strip_qualifiers,
)

STRICT = ComparisonMode.STRICT
INCLUSIVE = ComparisonMode.INCLUSIVE
RELAXED = ComparisonMode.RELAXED

SPLIT = ["user", "webpage"]

# One row per (gt, prediction) pair and mode; split predictions only ever
# match inclusively.
PINNED = [
    ("webpage", "webpages", STRICT, False),
    ("all webpages", "webpages", STRICT, False),
    ("user's webpage", SPLIT, STRICT, False),
    ("webpage", "webpage", STRICT, True),
    ("webpage", "webpages", INCLUSIVE, True),
    ("all webpages", "webpages", INCLUSIVE, False),
    ("user's webpage", SPLIT, INCLUSIVE, False),
    ("webpage", "webpage", INCLUSIVE, True),
    ("webpage", "webpages", RELAXED, False),
    ("all webpages", "webpages", RELAXED, True),
    ("user's webpage", SPLIT, RELAXED, False),
    ("webpage", "webpage", RELAXED, True),
]


@pytest.mark.parametrize("expected,predicted,mode,outcome", PINNED)
def test_pinned_mode_behavior(expected, predicted, mode, outcome):
    assert compare_element(expected, predicted, mode) is outcome


class TestElement:
    def test_strict_ignores_case_and_spacing(self):
        assert compare_element("Web  Page", "web page", STRICT)

    def test_inclusive_needs_gt_inside_pred(self):
        assert compare_element("data", "my data set", INCLUSIVE)
        assert not compare_element("my data set", "data", INCLUSIVE)

    def test_relaxed_strips_both_sides(self):
        assert compare_element("user's webpage", "webpage", RELAXED)
        assert compare_element("webpage", "the webpage", RELAXED)

    def test_relaxed_keeps_interior_tokens(self):
        assert not compare_element("login page", "page", RELAXED)

    def test_relaxed_list_never_matches(self):
        assert not compare_element("webpage", ["webpage"], RELAXED)

    def test_inclusive_split_concept(self):
        assert compare_element("webpage", SPLIT, INCLUSIVE)
        assert not compare_element("account", SPLIT, INCLUSIVE)


class TestStripQualifiers:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("all webpages", "webpages"),
            ("the user's own new dashboard", "dashboard"),
            ("my data", "data"),
            ("webpage", "webpage"),
            ("login page", "login page"),
            ("THE Report", "report"),
        ],
    )
    def test_examples(self, raw, expected):
        assert strip_qualifiers(raw) == expected

    def test_all_qualifiers_leaves_empty(self):
        assert strip_qualifiers("the my own") == ""

    @given(st.text(alphabet="abcdefgh '", max_size=30))
    def test_idempotent(self, text):
        once = strip_qualifiers(text)
        assert strip_qualifiers(once) == once


class TestOptions:
    def test_plural_folding_off_by_default(self):
        assert not compare_element("webpage", "webpages", RELAXED)

    @pytest.mark.parametrize(
        "expected,predicted",
        [("webpage", "webpages"), ("company", "companies"), ("bus", "buses")],
    )
    def test_plural_folding_on(self, expected, predicted):
        options = CompareOptions(fold_plurals=True)
        assert compare_element(expected, predicted, RELAXED, options)

    def test_folding_does_not_touch_strict(self):
        options = CompareOptions(fold_plurals=True)
        assert not compare_element("webpage", "webpages", STRICT, options)

    def test_token_boundary_off_by_default(self):
        assert compare_element("age", "webpage", INCLUSIVE)

    def test_token_boundary_on(self):
        options = CompareOptions(token_boundary=True)
        assert not compare_element("age", "webpage", INCLUSIVE, options)
        assert compare_element("age", "the age limit", INCLUSIVE, options)


class TestMatchSets:
    def test_identity(self):
        counts = match_sets(["access", "see"], ["access", "see"], STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (2, 0, 0)

    def test_partial(self):
        counts = match_sets(["access", "see"], ["access", "browse"], STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (1, 1, 1)

    def test_hallucination(self):
        counts = match_sets([], ["ghost"], STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (0, 1, 0)

    def test_missing(self):
        counts = match_sets(["real"], [], STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (0, 0, 1)

    def test_each_prediction_consumed_once(self):
        counts = match_sets(["see", "see"], ["see"], STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (1, 0, 1)

    def test_greedy_takes_first_unconsumed(self):
        # Inclusive: "page" could match either prediction; the first one
        # is consumed, leaving the second for the more specific gt item.
        counts = match_sets(
            ["page", "login page"], ["the login page", "page"], INCLUSIVE
        )
        assert (counts.tp, counts.fp, counts.fn) == (1, 1, 1)

    def test_split_prediction_inclusive(self):
        counts = match_sets(["user's webpage"], [SPLIT], INCLUSIVE)
        assert (counts.tp, counts.fp, counts.fn) == (0, 1, 1)

    def test_counts_add(self):
        total = Counts()
        total.add(Counts(1, 2, 3))
        total.add(Counts(tp=1))
        assert (total.tp, total.fp, total.fn) == (2, 2, 3)

    @given(
        st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=6),
        st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=6),
        st.sampled_from(list(ComparisonMode)),
    )
    def test_totals_invariant(self, gt, pred, mode):
        counts = match_sets(gt, pred, mode)
        assert counts.tp + counts.fn == len(gt)
        assert counts.tp + counts.fp == len(pred)
        assert min(counts.tp, counts.fp, counts.fn) >= 0

    @given(st.lists(st.sampled_from(["x", "y", "z"]), max_size=6))
    def test_self_match_is_perfect(self, items):
        counts = match_sets(items, items, STRICT)
        assert (counts.tp, counts.fp, counts.fn) == (len(items), 0, 0)


@given(
    st.text(alphabet="abc s'", min_size=1, max_size=15),
    st.text(alphabet="abc s'", min_size=1, max_size=15),
)
def test_strict_match_implies_inclusive(expected, predicted):
    if compare_element(expected, predicted, STRICT):
        assert compare_element(expected, predicted, INCLUSIVE)
