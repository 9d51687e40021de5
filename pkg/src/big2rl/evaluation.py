"""Tournament evaluation, branching-factor statistics, and entropy probes."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List

import numpy as np

from .agents import Agent, PolicyAgent, make_heuristic
from .game import NUM_PLAYERS, apply_action, deal, legal_actions, terminal_scores
from .encoders import encode_candidates, encode_observation
from .nn import evaluate_candidates, sample_action
from .orchestrator import play_episode
from .rng import make_rng


@dataclass
class TournamentResult:
    games: int
    wins: int
    win_rate: float
    avg_score: float
    scores: List[float]
    seed: int

    @property
    def ci_half_width(self) -> float:
        """95% normal-approximation half-width on the win rate."""
        p = self.win_rate
        return 1.96 * math.sqrt(max(p * (1 - p), 1e-12) / self.games)

    @property
    def success(self) -> bool:
        """Beats an opponent pool: win rate above 1/4 and positive score."""
        return self.win_rate > 0.25 and self.avg_score > 0

    def summary(self) -> str:
        return (
            f"games={self.games} win_rate={self.win_rate:.3f} "
            f"(±{self.ci_half_width:.3f}) avg_score={self.avg_score:.2f} "
            f"success={self.success}"
        )


def tournament(
    agent: Agent,
    opponent: str,
    n_games: int = 1000,
    seed: int = 0,
) -> TournamentResult:
    """Seat-randomized games of `agent` against three `opponent` heuristics.

    Policy agents sample from their softmax; value agents play greedily
    (epsilon 0) -- both are properties of the passed-in agent.
    """
    rng = make_rng(seed)
    wins = 0
    scores: List[float] = []
    for _ in range(n_games):
        eval_seat = int(rng.integers(NUM_PLAYERS))
        agents = [
            agent if s == eval_seat else make_heuristic(opponent)
            for s in range(NUM_PLAYERS)
        ]
        deal_seed = int(rng.integers(2**63))
        _, _, game_scores = play_episode(agents, deal_seed, rng)
        if game_scores.scores[eval_seat] > 0:
            wins += 1
        scores.append(float(game_scores.scores[eval_seat]))
    return TournamentResult(
        games=n_games,
        wins=wins,
        win_rate=wins / n_games,
        avg_score=float(np.mean(scores)),
        scores=scores,
        seed=seed,
    )


@dataclass
class BranchingStats:
    games: int
    decision_points: int
    histogram: Counter  # legal-action count -> occurrences, all states
    control_histogram: Counter  # control (no active trick) states only

    @staticmethod
    def _percentile(hist: Counter, q: float) -> int:
        total = sum(hist.values())
        threshold = q * total
        acc = 0
        for k in sorted(hist):
            acc += hist[k]
            if acc >= threshold:
                return k
        return max(hist)

    @staticmethod
    def _mean(hist: Counter) -> float:
        total = sum(hist.values())
        return sum(k * n for k, n in hist.items()) / total

    @property
    def mean(self) -> float:
        return self._mean(self.histogram)

    @property
    def p95(self) -> int:
        return self._percentile(self.histogram, 0.95)

    @property
    def p99(self) -> int:
        return self._percentile(self.histogram, 0.99)

    @property
    def max(self) -> int:
        return max(self.histogram)

    @property
    def control_mean(self) -> float:
        return self._mean(self.control_histogram)

    @property
    def control_p95(self) -> int:
        return self._percentile(self.control_histogram, 0.95)

    def summary(self) -> str:
        return (
            f"games={self.games} decision_points={self.decision_points}\n"
            f"overall: mean={self.mean:.2f} p95={self.p95} p99={self.p99} max={self.max}\n"
            f"control: mean={self.control_mean:.2f} p95={self.control_p95}"
        )


def branching_stats(n_games: int = 10000, seed: int = 0) -> BranchingStats:
    """Legal-action-count statistics under uniform random legal play.

    Percentiles are computed on the exact histogram, no sampling.
    """
    rng = make_rng(seed)
    hist: Counter = Counter()
    control: Counter = Counter()
    for _ in range(n_games):
        state = deal(rng)
        while not state.is_terminal:
            legal = legal_actions(state)
            hist[len(legal)] += 1
            if state.in_control:
                control[len(legal)] += 1
            state = apply_action(state, legal[int(rng.integers(len(legal)))])
    return BranchingStats(
        games=n_games,
        decision_points=sum(hist.values()),
        histogram=hist,
        control_histogram=control,
    )


def entropy_probe(model, n_states: int, rng: np.random.Generator) -> float:
    """Mean policy entropy over fresh self-play decision points.

    Rolls current-policy self-play games and averages the categorical
    entropy of the sampled action distribution until `n_states` decision
    points have been probed.
    """
    entropies: List[float] = []
    while len(entropies) < n_states:
        state = deal(int(rng.integers(2**63)))
        while not state.is_terminal and len(entropies) < n_states:
            seat = state.current_player
            candidates = legal_actions(state)
            obs = encode_observation(state, seat)
            scores, _ = evaluate_candidates(model, obs, encode_candidates(candidates))
            idx, _, entropy = sample_action(scores, rng)
            entropies.append(entropy)
            state = apply_action(state, candidates[idx])
    return float(np.mean(entropies))
