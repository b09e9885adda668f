"""Element comparison modes and set matching.

Three modes of increasing leniency:

- strict: normalized equality.
- inclusive: the normalized expected element must appear inside the
  predicted one (annotations name the head concept, models often return a
  longer phrase around it).
- relaxed: strict equality after leading qualifiers are peeled off both
  sides, so determiner and possessive noise does not count against a match.

Relaxed is meaningless for benefit clauses (full sentences), which is
enforced one level up, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from ..model import normalize_id


class ComparisonMode(str, Enum):
    STRICT = "strict"
    INCLUSIVE = "inclusive"
    RELAXED = "relaxed"


# Leading tokens the relaxed mode peels off. Versioned: results are only
# comparable across runs that used the same list.
QUALIFIER_STOP_LIST_VERSION = "1"
QUALIFIER_STOP_LIST = frozenset(
    {
        "a", "an", "the",
        "all", "any", "some", "each", "every", "both", "few", "several",
        "many", "much", "more", "most", "other", "another", "such",
        "no", "this", "that", "these", "those",
        "my", "your", "his", "her", "its", "our", "their", "own", "new",
    }
)


@dataclass(frozen=True)
class CompareOptions:
    """Opt-in variants; both default off to keep baseline behavior fixed.

    fold_plurals: treat singular and plural token forms as equal (relaxed
    mode only, naive English folding).
    token_boundary: inclusive containment must line up with token edges, so
    "age" no longer hides inside "page".
    """

    fold_plurals: bool = False
    token_boundary: bool = False


DEFAULT_OPTIONS = CompareOptions()


def strip_qualifiers(text: str) -> str:
    """Remove leading stop-list tokens and possessives from normalized text."""
    tokens = normalize_id(text).split()
    while tokens and (tokens[0] in QUALIFIER_STOP_LIST or tokens[0].endswith("'s")):
        tokens.pop(0)
    return " ".join(tokens)


def _fold_plural(token: str) -> str:
    if len(token) > 3 and token.endswith("ies"):
        return token[:-3] + "y"
    for suffix in ("ses", "xes", "zes", "ches", "shes"):
        if len(token) > len(suffix) + 1 and token.endswith(suffix):
            return token[:-2]
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss"):
        return token[:-1]
    return token


def _fold_plurals(text: str) -> str:
    return " ".join(_fold_plural(token) for token in text.split())


def _contains(haystack: str, needle: str, token_boundary: bool) -> bool:
    if not token_boundary:
        return needle in haystack
    return f" {needle} " in f" {haystack} "


def compare_element(
    expected: str,
    predicted: str | Sequence[str],
    mode: ComparisonMode,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> bool:
    """Does one predicted element satisfy one expected element?

    A list-valued prediction is a split concept: inclusive mode accepts it
    when any fragment contains the expected element, the other modes never
    accept it.
    """
    if isinstance(predicted, (list, tuple)):
        if mode is ComparisonMode.INCLUSIVE:
            return any(
                compare_element(expected, item, mode, options) for item in predicted
            )
        return False

    left = normalize_id(expected)
    right = normalize_id(predicted)
    if mode is ComparisonMode.STRICT:
        return left == right
    if mode is ComparisonMode.INCLUSIVE:
        return _contains(right, left, options.token_boundary)
    left = strip_qualifiers(left)
    right = strip_qualifiers(right)
    if options.fold_plurals:
        left = _fold_plurals(left)
        right = _fold_plurals(right)
    return left == right


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "Counts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn


def match_sets(
    expected: Sequence[str],
    predicted: Sequence[str | Sequence[str]],
    mode: ComparisonMode,
    options: CompareOptions = DEFAULT_OPTIONS,
) -> Counts:
    """Greedy one-to-one matching in list order.

    Each expected element consumes the first not-yet-consumed predicted
    element it matches.  Leftover expected elements are false negatives,
    leftover predicted ones false positives.
    """
    consumed = [False] * len(predicted)
    counts = Counts()
    for exp in expected:
        for i, pred in enumerate(predicted):
            if not consumed[i] and compare_element(exp, pred, mode, options):
                consumed[i] = True
                counts.tp += 1
                break
        else:
            counts.fn += 1
    counts.fp = consumed.count(False)
    return counts
