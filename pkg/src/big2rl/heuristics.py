"""Non-learning opponents: Random, Greedy, and the hand-aware Smart policy.

All three are pure functions of their inputs (Random takes an explicit
generator). Greedy plays the weakest legal non-pass combination under the
global (type, key) ordering. Smart scores every non-pass candidate with
lightweight strategic features (lower is better) and passes only in narrow
situations: to avoid spending multiple 2s early on an expensive response,
or when the active trick is a four-of-a-kind or straight flush.
"""

from __future__ import annotations

import enum
from typing import List, Optional

import numpy as np

from .cards import TWO_RANK, rank_index, suit_index
from .combos import Combination, CombinationType

WIN_SCORE = -1000.0


class Phase(enum.Enum):
    EARLY = "early"  # |hand| > 10
    MID = "mid"  # 6 <= |hand| <= 10
    LATE = "late"  # |hand| <= 5


def phase_of(hand_size: int) -> Phase:
    if hand_size > 10:
        return Phase.EARLY
    if hand_size >= 6:
        return Phase.MID
    return Phase.LATE


def random_agent(legal: List[Combination], rng: np.random.Generator) -> Combination:
    if not legal:
        raise ValueError("legal action set must be non-empty")
    return legal[int(rng.integers(len(legal)))]


def greedy_agent(legal: List[Combination]) -> Combination:
    if not legal:
        raise ValueError("legal action set must be non-empty")
    if len(legal) == 1:
        return legal[0]
    non_pass = [a for a in legal if not a.is_pass]
    return min(non_pass, key=Combination.sort_key)


def _rank_counts(hand) -> dict:
    counts: dict = {}
    for c in hand:
        r = rank_index(c)
        counts[r] = counts.get(r, 0) + 1
    return counts


def _suit_counts(hand) -> dict:
    counts: dict = {}
    for c in hand:
        s = suit_index(c)
        counts[s] = counts.get(s, 0) + 1
    return counts


def _straight_windows(hand) -> list:
    """Start ranks of fully-present five-rank windows (rank 2 excluded)."""
    present = {rank_index(c) for c in hand}
    return [
        s
        for s in range(0, TWO_RANK - 4)
        if all(r in present for r in range(s, s + 5))
    ]


def break_penalty(action: Combination, hand) -> float:
    """Penalty for destroying remaining structure when playing `action`.

    A pair/triple break (a rank held as exactly 2 or 3 cards is split)
    costs 8 early / 4 mid / 0 late. Destroying a latent five-card
    structure (a quad, full-house components, a 5+ card suit, or a
    complete five-rank straight window) costs 20 early / 8 mid / 4 late,
    unless the action itself plays that category. The two penalty kinds
    add; each kind is applied at most once per action.
    """
    ph = phase_of(len(hand))
    remaining = [c for c in hand if c not in set(action.cards)]
    before_r = _rank_counts(hand)
    after_r = _rank_counts(remaining)

    penalty = 0.0

    splits_group = any(
        2 <= before_r[rank_index(c)] <= 3 and after_r.get(rank_index(c), 0) > 0
        for c in action.cards
    )
    if splits_group:
        penalty += {Phase.EARLY: 8.0, Phase.MID: 4.0, Phase.LATE: 0.0}[ph]

    if _breaks_structure(action, hand, remaining, before_r, after_r):
        penalty += {Phase.EARLY: 20.0, Phase.MID: 8.0, Phase.LATE: 4.0}[ph]
    return penalty


def _breaks_structure(action, hand, remaining, before_r, after_r) -> bool:
    # Four of a kind.
    if action.ctype != CombinationType.FOUR_OF_A_KIND:
        if any(n >= 4 for n in before_r.values()) and not any(
            n >= 4 for n in after_r.values()
        ):
            return True
    # Full-house components: a triple plus a pair of another rank.
    if action.ctype != CombinationType.FULL_HOUSE:
        if _has_full_house(before_r) and not _has_full_house(after_r):
            return True
    # A suit holding at least five cards.
    if action.ctype not in (CombinationType.FLUSH, CombinationType.STRAIGHT_FLUSH):
        before_s = _suit_counts(hand)
        after_s = _suit_counts(remaining)
        if any(n >= 5 for n in before_s.values()) and not any(
            n >= 5 for n in after_s.values()
        ):
            return True
    # Complete five-rank straight windows (rank 2 excluded).
    if action.ctype not in (CombinationType.STRAIGHT, CombinationType.STRAIGHT_FLUSH):
        if _straight_windows(hand) and not _straight_windows(remaining):
            return True
    return False


def _has_full_house(rank_counts: dict) -> bool:
    """A triple of one rank together with a pair of a different rank."""
    return any(
        n3 >= 3 and any(r2 != r3 and n2 >= 2 for r2, n2 in rank_counts.items())
        for r3, n3 in rank_counts.items()
    )


def low_orphans(hand) -> int:
    """Lone low cards: rank held exactly once, rank index <= 4 (ranks 3..7),
    and outside every latent five-card structure the break checker sees."""
    counts = _rank_counts(hand)
    suit_c = _suit_counts(hand)
    windows = _straight_windows(hand)
    n = 0
    for c in hand:
        r = rank_index(c)
        if counts[r] != 1 or r > 4:
            continue
        if suit_c[suit_index(c)] >= 5:
            continue
        if any(s <= r <= s + 4 for s in windows):
            continue
        n += 1
    return n


def _count_twos(action: Combination) -> int:
    return sum(1 for c in action.cards if rank_index(c) == TWO_RANK)


def _is_unbeatable_trick(trick: Optional[Combination]) -> bool:
    return trick is not None and trick.ctype in (
        CombinationType.FOUR_OF_A_KIND,
        CombinationType.STRAIGHT_FLUSH,
    )


def _is_very_strong(trick: Optional[Combination]) -> bool:
    """Active trick of category full house or higher, or led by a 2."""
    if trick is None:
        return False
    if trick.ctype in (
        CombinationType.FULL_HOUSE,
        CombinationType.FOUR_OF_A_KIND,
        CombinationType.STRAIGHT_FLUSH,
    ):
        return True
    return rank_index(trick.key) == TWO_RANK


def smart_score(action: Combination, hand, trick: Optional[Combination]) -> float:
    """Desirability score for a non-pass candidate; lower is better."""
    if action.is_pass:
        raise ValueError("smart_score is defined for non-pass actions only")
    if len(action.cards) == len(hand):
        return WIN_SCORE  # win immediately
    ph = phase_of(len(hand))
    s = 0.8 * sum(rank_index(c) for c in action.cards)
    if ph == Phase.EARLY:
        s += 10.0 * _count_twos(action)
    elif ph == Phase.MID:
        s += 5.0 * _count_twos(action)
    s += break_penalty(action, hand)
    remaining = [c for c in hand if c not in set(action.cards)]
    s += 6.0 * low_orphans(remaining)
    s -= 4.0 * len(action.cards)
    if ph == Phase.LATE:
        s -= 10.0
    if _is_very_strong(trick) and ph == Phase.LATE:
        s -= 10.0
    if _is_unbeatable_trick(trick):
        s += 25.0
    return s


def smart_agent(
    legal: List[Combination], hand, trick: Optional[Combination]
) -> Combination:
    if not legal:
        raise ValueError("legal action set must be non-empty")
    non_pass = [a for a in legal if not a.is_pass]
    if not non_pass or len(legal) == 1:
        return legal[0]
    best = min(non_pass, key=lambda a: (smart_score(a, hand, trick), a.sort_key()))
    best_score = smart_score(best, hand, trick)
    pass_legal = any(a.is_pass for a in legal)
    if (
        pass_legal
        and phase_of(len(hand)) == Phase.EARLY
        and _count_twos(best) >= 2
        and best_score > 30.0
    ):
        return next(a for a in legal if a.is_pass)
    if pass_legal and _is_unbeatable_trick(trick):
        return next(a for a in legal if a.is_pass)
    return best
