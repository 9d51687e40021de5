"""Observation and action feature encoding.

The observation is the 277-dim information state available to the acting
player: own hand (13 card ids, padded with 52), a 52-dim indicator for the
active trick, a 52-dim indicator for all seen cards, the three opponents'
remaining counts (clockwise from the seat, scaled by 1/13), the consecutive
pass count (scaled by 1/3), and per-opponent 52-dim played-card indicators.
It never encodes an unplayed opponent card.

Each candidate action becomes an 80-dim feature vector:

    [0..51]   card indicators of the combination
    [52]      pass bit
    [53..61]  one-hot combination type (9 tags including Pass)
    [62..74]  one-hot rank of the key card
    [75..78]  one-hot suit of the key card
    [79]      card count / 5

A Pass sets only the pass bit and the Pass slot of the type one-hot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cards import NUM_CARDS, PAD_CARD, rank_index, suit_index, card_name
from .combos import Combination, CombinationType, classify
from .game import HAND_SIZE, NUM_PLAYERS, GameState

OBS_DIM = HAND_SIZE + NUM_CARDS + NUM_CARDS + 3 + 1 + 3 * NUM_CARDS  # 277
ACTION_DIM = 80

# Action feature layout offsets.
_PASS_BIT = 52
_TYPE_OFF = 53
_RANK_OFF = 62
_SUIT_OFF = 75
_COUNT_OFF = 79


@dataclass(frozen=True)
class Observation:
    hand_ids: np.ndarray  # (13,) int64, ascending, padded with 52
    trick_indicator: np.ndarray  # (52,) float32
    seen_indicator: np.ndarray  # (52,) float32
    opponent_counts: np.ndarray  # (3,) float32, clockwise, / 13
    pass_count: np.ndarray  # (1,) float32, / 3
    opponent_played: np.ndarray  # (3, 52) float32, clockwise

    @property
    def vector(self) -> np.ndarray:
        """Flat 277-dim view used by the length contract and debug dumps."""
        return np.concatenate(
            [
                self.hand_ids.astype(np.float32),
                self.trick_indicator,
                self.seen_indicator,
                self.opponent_counts,
                self.pass_count,
                self.opponent_played.reshape(-1),
            ]
        )

    @property
    def hand(self) -> tuple:
        return tuple(int(c) for c in self.hand_ids if c != PAD_CARD)

    @property
    def active_trick(self):
        """Reconstruct the active trick combination, or None when in control."""
        cards = np.flatnonzero(self.trick_indicator)
        if len(cards) == 0:
            return None
        return classify(int(c) for c in cards)


def _indicator(mask_or_cards) -> np.ndarray:
    out = np.zeros(NUM_CARDS, dtype=np.float32)
    if isinstance(mask_or_cards, int):
        for c in range(NUM_CARDS):
            if mask_or_cards & (1 << c):
                out[c] = 1.0
    else:
        for c in mask_or_cards:
            out[c] = 1.0
    return out


def encode_observation(state: GameState, seat: int) -> Observation:
    """Information-state observation for `seat` (the acting player)."""
    hand = state.hands[seat]
    hand_ids = np.full(HAND_SIZE, PAD_CARD, dtype=np.int64)
    hand_ids[: len(hand)] = sorted(hand)

    trick = (
        _indicator(state.trick.cards)
        if state.trick is not None
        else np.zeros(NUM_CARDS, dtype=np.float32)
    )
    seen = _indicator(state.seen)
    opp_seats = [(seat + k) % NUM_PLAYERS for k in range(1, NUM_PLAYERS)]
    counts = np.array(
        [len(state.hands[s]) / HAND_SIZE for s in opp_seats], dtype=np.float32
    )
    passes = np.array([state.pass_count / 3.0], dtype=np.float32)
    played = np.stack([_indicator(state.played_by[s]) for s in opp_seats])
    return Observation(hand_ids, trick, seen, counts, passes, played)


def encode_action(action: Combination) -> np.ndarray:
    """80-dim feature vector for a candidate action (Pass included)."""
    out = np.zeros(ACTION_DIM, dtype=np.float32)
    out[_TYPE_OFF + int(action.ctype)] = 1.0
    if action.is_pass:
        out[_PASS_BIT] = 1.0
        return out
    for c in action.cards:
        out[c] = 1.0
    out[_RANK_OFF + rank_index(action.key)] = 1.0
    out[_SUIT_OFF + suit_index(action.key)] = 1.0
    out[_COUNT_OFF] = len(action.cards) / 5.0
    return out


def encode_candidates(actions) -> np.ndarray:
    """Stack action features for a legal candidate list: (n, 80) float32."""
    return np.stack([encode_action(a) for a in actions])


def decode_action_cards(features: np.ndarray) -> tuple:
    """Recover the combination's cards from the indicator slots."""
    return tuple(int(c) for c in np.flatnonzero(features[:NUM_CARDS] > 0.5))


def format_observation(obs: Observation) -> str:
    """Human-readable dump used by the inspect-obs CLI subcommand."""
    lines = []
    lines.append("hand: " + " ".join(card_name(int(c)) for c in obs.hand_ids))
    trick = obs.active_trick
    lines.append(f"active trick: {trick if trick is not None else 'none (control)'}")
    seen = [card_name(int(c)) for c in np.flatnonzero(obs.seen_indicator)]
    lines.append(f"seen ({len(seen)}): " + " ".join(seen))
    counts = [int(round(c * HAND_SIZE)) for c in obs.opponent_counts]
    lines.append(f"opponent counts (clockwise): {counts}")
    lines.append(f"pass count: {int(round(float(obs.pass_count[0]) * 3))}")
    for k in range(3):
        played = [card_name(int(c)) for c in np.flatnonzero(obs.opponent_played[k])]
        lines.append(f"opponent +{k + 1} played: " + " ".join(played))
    lines.append(f"vector length: {len(obs.vector)}")
    return "\n".join(lines)
