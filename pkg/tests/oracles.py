"""Independent brute-force oracles the main code is checked against.

These deliberately avoid the package's enumeration and filtering logic:
combinations come from exhaustive subset classification and legality from
the rule definitions applied directly. The heuristic oracle re-implements
the smart policy's pseudocode line by line on top of the subset oracle.
"""

import itertools

from big2rl.cards import rank_index, suit_index, TWO_RANK
from big2rl.combos import Combination, CombinationType, PASS


def classify_subset(cards):
    """Classify a card subset by direct rule definitions, or None."""
    cards = tuple(sorted(cards))
    n = len(cards)
    ranks = sorted(rank_index(c) for c in cards)
    suits = {suit_index(c) for c in cards}
    if n == 1:
        return Combination(CombinationType.SINGLE, cards, cards[0])
    if n == 2 and ranks[0] == ranks[1]:
        return Combination(CombinationType.PAIR, cards, cards[-1])
    if n == 3 and ranks[0] == ranks[2]:
        return Combination(CombinationType.TRIPLE, cards, cards[-1])
    if n != 5:
        return None
    consecutive = (
        len(set(ranks)) == 5 and ranks[4] - ranks[0] == 4 and ranks[4] < TWO_RANK
    )
    if consecutive and len(suits) == 1:
        return Combination(CombinationType.STRAIGHT_FLUSH, cards, cards[-1])
    if consecutive:
        return Combination(CombinationType.STRAIGHT, cards, cards[-1])
    if len(suits) == 1:
        return Combination(CombinationType.FLUSH, cards, cards[-1])
    counts = {r: ranks.count(r) for r in set(ranks)}
    if sorted(counts.values()) == [2, 3]:
        triple_rank = [r for r, k in counts.items() if k == 3][0]
        key = max(c for c in cards if rank_index(c) == triple_rank)
        return Combination(CombinationType.FULL_HOUSE, cards, key)
    if sorted(counts.values()) == [1, 4]:
        quad_rank = [r for r, k in counts.items() if k == 4][0]
        key = max(c for c in cards if rank_index(c) == quad_rank)
        return Combination(CombinationType.FOUR_OF_A_KIND, cards, key)
    return None


def enumerate_by_subsets(hand):
    """All combinations in a hand via exhaustive subset classification."""
    out = []
    for size in (1, 2, 3, 5):
        for subset in itertools.combinations(sorted(hand), size):
            combo = classify_subset(subset)
            if combo is not None:
                out.append(combo)
    return out


FIVE_ORDER = [
    CombinationType.STRAIGHT,
    CombinationType.FLUSH,
    CombinationType.FULL_HOUSE,
    CombinationType.FOUR_OF_A_KIND,
    CombinationType.STRAIGHT_FLUSH,
]


def legal_by_definition(state):
    """Legal action set from the rule definitions and the subset oracle."""
    hand = state.hands[state.current_player]
    combos = enumerate_by_subsets(hand)
    trick = state.trick
    if trick is None:
        if state.seen == 0:
            combos = [c for c in combos if 0 in c.cards]
        return sorted(combos, key=Combination.sort_key)
    legal = []
    for c in combos:
        if trick.ctype in (
            CombinationType.SINGLE,
            CombinationType.PAIR,
            CombinationType.TRIPLE,
        ):
            if c.ctype == trick.ctype and c.key > trick.key:
                legal.append(c)
        else:
            if c.ctype == trick.ctype and c.key > trick.key:
                legal.append(c)
            elif c.ctype in FIVE_ORDER and FIVE_ORDER.index(c.ctype) > FIVE_ORDER.index(
                trick.ctype
            ):
                legal.append(c)
    legal = sorted(legal, key=Combination.sort_key)
    legal.append(PASS)
    return legal


# ---------------------------------------------------------------------------
# Smart-policy pseudocode oracle


def _phase(hand_size):
    if hand_size > 10:
        return "early"
    if hand_size >= 6:
        return "mid"
    return "late"


def _twos(action):
    return sum(1 for c in action.cards if rank_index(c) == TWO_RANK)


def _counts(cards, keyfn):
    out = {}
    for c in cards:
        out[keyfn(c)] = out.get(keyfn(c), 0) + 1
    return out


def _windows(cards):
    present = {rank_index(c) for c in cards}
    return [s for s in range(8) if all(r in present for r in range(s, s + 5))]


def oracle_break_penalty(action, hand):
    phase = _phase(len(hand))
    rest = [c for c in hand if c not in action.cards]
    before = _counts(hand, rank_index)
    after = _counts(rest, rank_index)
    total = 0.0
    if phase != "late" and any(
        before[rank_index(c)] in (2, 3) and after.get(rank_index(c), 0) >= 1
        for c in action.cards
    ):
        total += 8.0 if phase == "early" else 4.0
    broke = False
    if action.ctype != CombinationType.FOUR_OF_A_KIND:
        if max(before.values(), default=0) >= 4 and max(after.values(), default=0) < 4:
            broke = True
    if not broke and action.ctype != CombinationType.FULL_HOUSE:
        def fh(counts):
            return any(
                a >= 3 and any(r2 != r and b >= 2 for r2, b in counts.items())
                for r, a in counts.items()
            )
        if fh(before) and not fh(after):
            broke = True
    if not broke and action.ctype not in (
        CombinationType.FLUSH,
        CombinationType.STRAIGHT_FLUSH,
    ):
        bs = _counts(hand, suit_index)
        as_ = _counts(rest, suit_index)
        if max(bs.values(), default=0) >= 5 and max(as_.values(), default=0) < 5:
            broke = True
    if not broke and action.ctype not in (
        CombinationType.STRAIGHT,
        CombinationType.STRAIGHT_FLUSH,
    ):
        if _windows(hand) and not _windows(rest):
            broke = True
    if broke:
        total += {"early": 20.0, "mid": 8.0, "late": 4.0}[phase]
    return total


def oracle_low_orphans(cards):
    counts = _counts(cards, rank_index)
    suits = _counts(cards, suit_index)
    windows = _windows(cards)
    total = 0
    for c in cards:
        r = rank_index(c)
        if counts[r] == 1 and r <= 4:
            if suits[suit_index(c)] >= 5:
                continue
            if any(w <= r <= w + 4 for w in windows):
                continue
            total += 1
    return total


def _very_strong(trick):
    if trick is None:
        return False
    return trick.ctype in (
        CombinationType.FULL_HOUSE,
        CombinationType.FOUR_OF_A_KIND,
        CombinationType.STRAIGHT_FLUSH,
    ) or rank_index(trick.key) == TWO_RANK


def oracle_smart_score(a, hand, trick):
    if len(a.cards) == len(hand):
        return -1000.0
    s = 0.8 * sum(rank_index(c) for c in a.cards)
    phase = _phase(len(hand))
    if phase == "early":
        s += 10 * _twos(a)
    if phase == "mid":
        s += 5 * _twos(a)
    s += oracle_break_penalty(a, hand)
    s += 6 * oracle_low_orphans([c for c in hand if c not in a.cards])
    s -= 4 * len(a.cards)
    if phase == "late":
        s -= 10
    if _very_strong(trick) and phase == "late":
        s -= 10
    if trick is not None and trick.ctype in (
        CombinationType.FOUR_OF_A_KIND,
        CombinationType.STRAIGHT_FLUSH,
    ):
        s += 25
    return s


def oracle_smart_agent(legal, hand, trick):
    """Line-by-line transcription of the smart policy's selection rule."""
    non_pass = [a for a in legal if not a.is_pass]
    if not non_pass or len(legal) == 1:
        return legal[0]
    scored = [(oracle_smart_score(a, hand, trick), a.sort_key(), a) for a in non_pass]
    scored.sort(key=lambda t: (t[0], t[1]))
    best_score, _, best = scored[0]
    has_pass = any(a.is_pass for a in legal)
    if has_pass and _phase(len(hand)) == "early" and _twos(best) >= 2 and best_score > 30:
        return next(a for a in legal if a.is_pass)
    if has_pass and trick is not None and trick.ctype in (
        CombinationType.FOUR_OF_A_KIND,
        CombinationType.STRAIGHT_FLUSH,
    ):
        return next(a for a in legal if a.is_pass)
    return best


def oracle_greedy_agent(legal):
    if len(legal) <= 1:
        return legal[0]
    return sorted((a for a in legal if not a.is_pass), key=Combination.sort_key)[0]


def gae_double_sum(rewards, values, gamma, lam):
    """GAE by its definition: exponentially weighted k-step advantages."""
    n = len(rewards)
    out = []
    for t in range(n):
        total = 0.0
        for k in range(1, n - t + 1):
            # k-step advantage estimate with terminal bootstrap 0.
            ret = sum(gamma**i * rewards[t + i] for i in range(k))
            if t + k < n:
                ret += gamma**k * values[t + k]
            weight = (1 - lam) * lam ** (k - 1) if t + k < n else lam ** (k - 1)
            total += weight * (ret - values[t])
        out.append(total)
    return out
