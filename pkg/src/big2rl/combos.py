"""Combination types, comparison keys, and hand enumeration.

A combination is a typed set of cards. Within a type, combinations are
ordered by a single key card:

  * Single, Straight, Flush, StraightFlush: the highest card id.
  * Pair, Triple: the highest card id in the set.
  * FullHouse: the highest card of the triple (orders by triple rank,
    then suit within the triple).
  * FourOfAKind: the highest card of the quad (orders by quad rank).

Five-card categories are strictly ordered
Straight < Flush < FullHouse < FourOfAKind < StraightFlush, and the global
ordering used by the greedy opponent sorts by (type, key).

Straights use ranks 3..A only (the 2 never participates, no wraparound);
five consecutive ranks in a single suit classify as a straight flush, never
as a straight or a flush.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cards import TWO_RANK, rank_index, suit_index, card_name


class CombinationType(enum.IntEnum):
    PASS = 0
    SINGLE = 1
    PAIR = 2
    TRIPLE = 3
    STRAIGHT = 4
    FLUSH = 5
    FULL_HOUSE = 6
    FOUR_OF_A_KIND = 7
    STRAIGHT_FLUSH = 8


FIVE_CARD_TYPES = (
    CombinationType.STRAIGHT,
    CombinationType.FLUSH,
    CombinationType.FULL_HOUSE,
    CombinationType.FOUR_OF_A_KIND,
    CombinationType.STRAIGHT_FLUSH,
)


@dataclass(frozen=True)
class Combination:
    ctype: CombinationType
    cards: tuple = ()  # sorted ascending; empty iff PASS
    key: int = field(default=-1)  # key card id; -1 for PASS

    @property
    def is_pass(self) -> bool:
        return self.ctype == CombinationType.PASS

    @property
    def is_five_card(self) -> bool:
        return self.ctype in FIVE_CARD_TYPES

    def sort_key(self):
        """Global ordering: type first, then comparison key.

        The card tuple breaks residual ties (e.g. full houses sharing a
        triple but differing in the pair) so sorting is deterministic.
        """
        return (int(self.ctype), self.key, self.cards)

    def beats(self, other: "Combination") -> bool:
        """Whether this combination may be played on top of `other`."""
        if self.is_pass or other.is_pass:
            raise ValueError("beats() compares non-pass combinations")
        if self.ctype == other.ctype:
            return self.key > other.key
        if self.is_five_card and other.is_five_card:
            return self.ctype > other.ctype
        return False

    def __str__(self) -> str:
        if self.is_pass:
            return "PASS"
        return self.ctype.name + "[" + " ".join(card_name(c) for c in self.cards) + "]"


PASS = Combination(CombinationType.PASS)


def _make(ctype: CombinationType, cards: Iterable[int], key: int) -> Combination:
    return Combination(ctype, tuple(sorted(cards)), key)


def _is_straight_window(ranks: list) -> bool:
    """True when sorted distinct ranks form 5 consecutive ranks without the 2."""
    if len(ranks) != 5 or len(set(ranks)) != 5:
        return False
    lo, hi = min(ranks), max(ranks)
    return hi - lo == 4 and hi < TWO_RANK


def classify_five(cards) -> Optional[Combination]:
    """Classify 5 distinct cards as a five-card combination, or None."""
    cards = sorted(cards)
    if len(cards) != 5:
        return None
    ranks = [rank_index(c) for c in cards]
    suits = [suit_index(c) for c in cards]
    same_suit = len(set(suits)) == 1
    straight = _is_straight_window(ranks)
    if straight and same_suit:
        return _make(CombinationType.STRAIGHT_FLUSH, cards, cards[-1])
    if straight:
        return _make(CombinationType.STRAIGHT, cards, cards[-1])
    if same_suit:
        return _make(CombinationType.FLUSH, cards, cards[-1])
    counts = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    by_count = sorted(counts.values(), reverse=True)
    if by_count == [3, 2]:
        triple_rank = next(r for r, n in counts.items() if n == 3)
        key = max(c for c in cards if rank_index(c) == triple_rank)
        return _make(CombinationType.FULL_HOUSE, cards, key)
    if by_count == [4, 1]:
        quad_rank = next(r for r, n in counts.items() if n == 4)
        key = max(c for c in cards if rank_index(c) == quad_rank)
        return _make(CombinationType.FOUR_OF_A_KIND, cards, key)
    return None


def classify(cards) -> Optional[Combination]:
    """Classify an arbitrary card set as a combination, or None if invalid."""
    cards = sorted(cards)
    if len(cards) == 0:
        return PASS
    if len(cards) == 1:
        return _make(CombinationType.SINGLE, cards, cards[0])
    if len(cards) in (2, 3):
        if len({rank_index(c) for c in cards}) == 1:
            ctype = CombinationType.PAIR if len(cards) == 2 else CombinationType.TRIPLE
            return _make(ctype, cards, cards[-1])
        return None
    if len(cards) == 5:
        return classify_five(cards)
    return None


def _group_by_rank(hand) -> dict:
    groups: dict = {}
    for c in hand:
        groups.setdefault(rank_index(c), []).append(c)
    for g in groups.values():
        g.sort()
    return groups


def _group_by_suit(hand) -> dict:
    groups: dict = {}
    for c in hand:
        groups.setdefault(suit_index(c), []).append(c)
    for g in groups.values():
        g.sort()
    return groups


def enumerate_singles(hand) -> list:
    return [_make(CombinationType.SINGLE, (c,), c) for c in sorted(hand)]


def enumerate_pairs(hand) -> list:
    out = []
    for cards in _group_by_rank(hand).values():
        for pair in itertools.combinations(cards, 2):
            out.append(_make(CombinationType.PAIR, pair, pair[1]))
    return out


def enumerate_triples(hand) -> list:
    out = []
    for cards in _group_by_rank(hand).values():
        for trip in itertools.combinations(cards, 3):
            out.append(_make(CombinationType.TRIPLE, trip, trip[2]))
    return out


def enumerate_straightlike(hand) -> list:
    """All straights and straight flushes (one entry per 5-card set)."""
    by_rank = _group_by_rank(hand)
    out = []
    for start in range(0, TWO_RANK - 4):  # windows 3..7 through 10..A
        window = [by_rank.get(r) for r in range(start, start + 5)]
        if any(g is None for g in window):
            continue
        for pick in itertools.product(*window):
            cards = sorted(pick)
            if len({suit_index(c) for c in cards}) == 1:
                out.append(_make(CombinationType.STRAIGHT_FLUSH, cards, cards[-1]))
            else:
                out.append(_make(CombinationType.STRAIGHT, cards, cards[-1]))
    return out


def enumerate_flushes(hand) -> list:
    """Flushes only; consecutive-rank same-suit sets are straight flushes."""
    out = []
    for cards in _group_by_suit(hand).values():
        if len(cards) < 5:
            continue
        for pick in itertools.combinations(cards, 5):
            if not _is_straight_window([rank_index(c) for c in pick]):
                out.append(_make(CombinationType.FLUSH, pick, pick[-1]))
    return out


def enumerate_full_houses(hand) -> list:
    by_rank = _group_by_rank(hand)
    out = []
    for r3, cards3 in by_rank.items():
        if len(cards3) < 3:
            continue
        for trip in itertools.combinations(cards3, 3):
            for r2, cards2 in by_rank.items():
                if r2 == r3 or len(cards2) < 2:
                    continue
                for pair in itertools.combinations(cards2, 2):
                    out.append(
                        _make(CombinationType.FULL_HOUSE, trip + pair, trip[2])
                    )
    return out


def enumerate_quads(hand) -> list:
    by_rank = _group_by_rank(hand)
    out = []
    for r4, cards4 in by_rank.items():
        if len(cards4) != 4:
            continue
        for kicker in hand:
            if rank_index(kicker) != r4:
                out.append(
                    _make(CombinationType.FOUR_OF_A_KIND, cards4 + [kicker], cards4[3])
                )
    return out


def enumerate_five_card(hand) -> list:
    return (
        enumerate_straightlike(hand)
        + enumerate_flushes(hand)
        + enumerate_full_houses(hand)
        + enumerate_quads(hand)
    )


def enumerate_combinations(hand) -> list:
    """Every Single, Pair, Triple, and five-card combination in `hand`.

    No Pass entries; sorted by (type, key).
    """
    out = (
        enumerate_singles(hand)
        + enumerate_pairs(hand)
        + enumerate_triples(hand)
        + enumerate_five_card(hand)
    )
    out.sort(key=Combination.sort_key)
    return out
