"""Card identities for the 52-card deck.

Cards are integers 0..51, ordered first by rank and then by suit.
Ranks ascend 3,4,...,K,A,2 (rank index 0..12) and suits ascend
diamonds < clubs < hearts < spades (suit index 0..3), so card 0 is
the 3 of diamonds, the lowest card.
"""

NUM_CARDS = 52
PAD_CARD = 52  # sentinel used to pad hands to fixed length

RANK_NAMES = ["3", "4", "5", "6", "7", "8", "9", "10", "J", "Q", "K", "A", "2"]
SUIT_NAMES = ["d", "c", "h", "s"]
SUIT_SYMBOLS = ["♦", "♣", "♥", "♠"]

TWO_RANK = 12  # rank index of the 2, highest rank, excluded from straights


def rank_index(card: int) -> int:
    return card // 4


def suit_index(card: int) -> int:
    return card % 4


def card_name(card: int) -> str:
    if card == PAD_CARD:
        return "--"
    return RANK_NAMES[card // 4] + SUIT_NAMES[card % 4]


def card_from_name(name: str) -> int:
    rank_part = name[:-1]
    if rank_part == "T":
        rank_part = "10"
    rank = RANK_NAMES.index(rank_part)
    suit = SUIT_NAMES.index(name[-1].lower())
    return rank * 4 + suit


def cards_to_mask(cards) -> int:
    mask = 0
    for c in cards:
        mask |= 1 << c
    return mask


def mask_to_cards(mask: int) -> list:
    return [c for c in range(NUM_CARDS) if mask & (1 << c)]
