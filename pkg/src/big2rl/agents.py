"""Agent interface shared by heuristic and model-backed players.

Every agent sees only the acting player's Observation and the legal
candidate list; hidden hands never reach an agent. `act` returns the index
of the chosen candidate plus an info dict (model agents report log_prob,
value, and entropy so the orchestrator can store training records).
"""

from __future__ import annotations

from typing import List

import numpy as np

from .combos import Combination
from .encoders import Observation, encode_candidates
from .heuristics import greedy_agent, random_agent, smart_agent
from .nn import Big2Network, evaluate_candidates, greedy_index, sample_action


class Agent:
    name = "agent"

    def act(self, obs: Observation, candidates: List[Combination], rng: np.random.Generator):
        raise NotImplementedError


class RandomAgent(Agent):
    name = "random"

    def act(self, obs, candidates, rng):
        chosen = random_agent(candidates, rng)
        return candidates.index(chosen), {}


class GreedyAgent(Agent):
    name = "greedy"

    def act(self, obs, candidates, rng):
        return candidates.index(greedy_agent(candidates)), {}


class SmartAgent(Agent):
    name = "smart"

    def act(self, obs, candidates, rng):
        chosen = smart_agent(candidates, list(obs.hand), obs.active_trick)
        return candidates.index(chosen), {}


class PolicyAgent(Agent):
    """Samples from the softmax over candidate logits (the evaluation
    default for policy networks); `sample=False` plays the argmax."""

    name = "policy"

    def __init__(self, model: Big2Network, sample: bool = True):
        self.model = model
        self.sample = sample

    def act(self, obs, candidates, rng):
        features = encode_candidates(candidates)
        scores, value = evaluate_candidates(self.model, obs, features)
        if self.sample:
            idx, logp, entropy = sample_action(scores, rng)
        else:
            idx = greedy_index(scores)
            _, logp, entropy = idx, 0.0, 0.0
        return idx, {
            "log_prob": logp,
            "value": value,
            "entropy": entropy,
            "features": features,
        }


class ValueAgent(Agent):
    """Epsilon-greedy over legal candidates' Q values; greedy at epsilon 0
    (the evaluation setting)."""

    name = "value"

    def __init__(self, model: Big2Network, epsilon: float = 0.0):
        self.model = model
        self.epsilon = epsilon

    def act(self, obs, candidates, rng):
        features = encode_candidates(candidates)
        scores, _ = evaluate_candidates(self.model, obs, features)
        if self.epsilon > 0.0 and rng.random() < self.epsilon:
            idx = int(rng.integers(len(candidates)))
        else:
            idx = greedy_index(scores)
        return idx, {"features": features}


HEURISTIC_AGENTS = {
    "random": RandomAgent,
    "greedy": GreedyAgent,
    "smart": SmartAgent,
}


def make_heuristic(name: str) -> Agent:
    try:
        return HEURISTIC_AGENTS[name]()
    except KeyError:
        raise ValueError(f"unknown heuristic agent {name!r}") from None
