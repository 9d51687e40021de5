"""Big 2 rules engine: dealing, legality, transitions, and scoring.

GameState is a value; every transition returns a new state, so arbitrarily
many games can run in parallel as long as each has its own generator.
Seats are 0..3 and play advances (seat + 1) % 4.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from .cards import NUM_CARDS, cards_to_mask
from .combos import (
    PASS,
    Combination,
    CombinationType,
    enumerate_combinations,
    enumerate_five_card,
    enumerate_pairs,
    enumerate_singles,
    enumerate_triples,
)

NUM_PLAYERS = 4
HAND_SIZE = 13

# Random games terminate far below this; hitting it indicates a rules bug.
MAX_PLIES = 400


class IllegalActionError(Exception):
    pass


@dataclass(frozen=True)
class GameState:
    hands: tuple  # 4 sorted card tuples
    current_player: int
    trick: Optional[Combination]  # active trick, None when in control
    seen: int  # 52-bit mask of all played cards
    pass_count: int
    played_by: tuple  # 4 x 52-bit masks
    winner: Optional[int] = None

    @property
    def is_terminal(self) -> bool:
        return self.winner is not None

    @property
    def is_opening(self) -> bool:
        """True before any card has been played (the 3-of-diamonds play)."""
        return self.seen == 0

    @property
    def in_control(self) -> bool:
        return self.trick is None

    def hand(self, seat: int) -> tuple:
        return self.hands[seat]


@dataclass(frozen=True)
class TerminalScores:
    scores: tuple  # 4 ints, zero-sum, winner positive

    def __iter__(self):
        return iter(self.scores)


def deal(seed_or_rng) -> GameState:
    """Shuffle and deal 13 cards to each seat; the 3-of-diamonds holder opens."""
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.Generator(
        np.random.PCG64(seed_or_rng)
    )
    deck = rng.permutation(NUM_CARDS)
    hands = tuple(
        tuple(sorted(int(c) for c in deck[i * HAND_SIZE : (i + 1) * HAND_SIZE]))
        for i in range(NUM_PLAYERS)
    )
    opener = next(i for i in range(NUM_PLAYERS) if 0 in hands[i])
    return GameState(
        hands=hands,
        current_player=opener,
        trick=None,
        seen=0,
        pass_count=0,
        played_by=(0, 0, 0, 0),
    )


def legal_actions(state: GameState) -> List[Combination]:
    """Legal candidate set for the acting player.

    In control: every combination in the hand (restricted to those containing
    card 0 on the game's opening play), no Pass. Against a single/pair/triple:
    same type with a strictly greater key, plus Pass. Against a five-card
    hand: strictly greater key in the same category or any five-card hand of
    a higher category, plus Pass.
    """
    if state.is_terminal:
        raise IllegalActionError("terminal state has no legal actions")
    hand = state.hands[state.current_player]
    trick = state.trick
    if trick is None:
        combos = enumerate_combinations(hand)
        if state.is_opening:
            combos = [c for c in combos if 0 in c.cards]
        return combos
    if trick.ctype == CombinationType.SINGLE:
        candidates = enumerate_singles(hand)
    elif trick.ctype == CombinationType.PAIR:
        candidates = enumerate_pairs(hand)
    elif trick.ctype == CombinationType.TRIPLE:
        candidates = enumerate_triples(hand)
    else:
        candidates = enumerate_five_card(hand)
    out = [c for c in candidates if c.beats(trick)]
    out.sort(key=Combination.sort_key)
    out.append(PASS)
    return out


def apply_action(state: GameState, action: Combination) -> GameState:
    """Advance the game by one ply. `action` must be legal."""
    if state.is_terminal:
        raise IllegalActionError("cannot act in a terminal state")
    seat = state.current_player
    nxt = (seat + 1) % NUM_PLAYERS
    if action.is_pass:
        if state.trick is None:
            raise IllegalActionError("pass is illegal when in control")
        pass_count = state.pass_count + 1
        if pass_count >= NUM_PLAYERS - 1:
            # All other players passed: trick clears and the last non-pass
            # player (the next seat) regains control.
            return replace(state, current_player=nxt, trick=None, pass_count=0)
        return replace(state, current_player=nxt, pass_count=pass_count)

    hand = state.hands[seat]
    action_set = set(action.cards)
    if not action_set.issubset(hand):
        raise IllegalActionError(f"action {action} not contained in hand")
    if state.trick is not None and not action.beats(state.trick):
        raise IllegalActionError(f"action {action} does not beat {state.trick}")
    if state.is_opening and 0 not in action_set:
        raise IllegalActionError("opening play must include the 3 of diamonds")

    new_hand = tuple(c for c in hand if c not in action_set)
    hands = tuple(new_hand if i == seat else h for i, h in enumerate(state.hands))
    mask = cards_to_mask(action.cards)
    played_by = tuple(
        (m | mask) if i == seat else m for i, m in enumerate(state.played_by)
    )
    winner = seat if not new_hand else None
    return GameState(
        hands=hands,
        current_player=nxt,
        trick=action,
        seen=state.seen | mask,
        pass_count=0,
        played_by=played_by,
        winner=winner,
    )


def terminal_scores(state: GameState) -> TerminalScores:
    """Winner gains the total cards left in the losers' hands; each loser
    scores the negative of their own remaining count. Unscaled."""
    if not state.is_terminal:
        raise IllegalActionError("scores are defined only at terminal states")
    remaining = [len(h) for h in state.hands]
    total = sum(remaining)
    scores = tuple(total if i == state.winner else -remaining[i] for i in range(NUM_PLAYERS))
    return TerminalScores(scores)


def check_invariants(state: GameState) -> None:
    """Card conservation and bookkeeping invariants; raises on violation."""
    hand_mask = 0
    total = 0
    for h in state.hands:
        m = cards_to_mask(h)
        assert hand_mask & m == 0, "hands overlap"
        hand_mask |= m
        total += len(h)
    assert hand_mask | state.seen == (1 << NUM_CARDS) - 1, "cards lost"
    assert hand_mask & state.seen == 0, "seen card still in a hand"
    union = 0
    for m in state.played_by:
        assert m & state.seen == m, "played_by not subset of seen"
        union |= m
    assert union == state.seen, "seen not covered by played_by"
    assert state.pass_count < NUM_PLAYERS - 1 or state.trick is None
    empties = sum(1 for h in state.hands if not h)
    assert empties <= 1
    assert (state.winner is not None) == (empties == 1)
