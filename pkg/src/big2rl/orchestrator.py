"""Episode execution, seat assignment, opponent curricula, batch collection.

A training episode is a full four-player game. Decision records are stored
only for learner (model-controlled) seats, with rewards assigned from each
seat's own perspective: intermediate rewards are zero and the seat's
terminal game score lands on its final decision record.

Curricula:
  * current self-play: the current policy in all four seats, all learners;
  * checkpoint self-play: one learner seat; each other seat is the current
    policy with probability `current_mix`, otherwise a uniform draw from a
    ring of up to 20 saved snapshots (falls back to the current policy
    while the ring is empty);
  * fixed opponent: one uniformly drawn learner seat, the named heuristic
    in the other three.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .agents import Agent, make_heuristic
from .combos import Combination, PASS, classify
from .encoders import Observation, encode_observation
from .game import (
    MAX_PLIES,
    NUM_PLAYERS,
    GameState,
    apply_action,
    deal,
    legal_actions,
    terminal_scores,
)
from .rng import episode_rng

CHECKPOINT_POOL_CAPACITY = 20


class AgentFaultError(Exception):
    """An agent returned an out-of-range candidate index."""


@dataclass
class DecisionRecord:
    obs: Observation
    features: np.ndarray  # (A, 80) candidate features
    chosen: int
    seat: int
    episode_id: int
    step_index: int
    log_prob: float = 0.0
    value: float = 0.0
    entropy: float = 0.0
    reward: float = 0.0  # terminal score on the seat's last record, else 0


@dataclass
class Transcript:
    seed: int
    agents: List[str]  # per-seat agent names
    plays: List[tuple]  # (seat, card tuple) with () meaning pass
    scores: tuple

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "agents": self.agents,
                "plays": [
                    [seat, list(cards) if cards else "PASS"] for seat, cards in self.plays
                ],
                "scores": list(self.scores),
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "Transcript":
        d = json.loads(line)
        plays = [
            (seat, () if cards == "PASS" else tuple(cards)) for seat, cards in d["plays"]
        ]
        return cls(d["seed"], d["agents"], plays, tuple(d["scores"]))


@dataclass
class TrajectoryBatch:
    records: Dict[int, List[List[DecisionRecord]]] = field(default_factory=dict)
    # records[seat] is a list of per-episode trajectories for that seat
    scores: List[tuple] = field(default_factory=list)
    transcripts: List[Transcript] = field(default_factory=list)

    def all_trajectories(self) -> List[List[DecisionRecord]]:
        out = []
        for seat_trajs in self.records.values():
            out.extend(seat_trajs)
        return out

    def all_records(self) -> List[DecisionRecord]:
        return [r for traj in self.all_trajectories() for r in traj]


def play_episode(
    seat_agents: List[Agent],
    seed: int,
    rng: np.random.Generator,
    learner_seats: Optional[set] = None,
    episode_id: int = 0,
):
    """Run one full game. Returns (transcript, per-seat record lists, scores).

    Records are kept only for seats in `learner_seats` (default: none).
    """
    learner_seats = learner_seats or set()
    state = deal(seed)
    records: Dict[int, List[DecisionRecord]] = {s: [] for s in learner_seats}
    plays: List[tuple] = []
    step = 0
    while not state.is_terminal:
        seat = state.current_player
        candidates = legal_actions(state)
        obs = encode_observation(state, seat)
        idx, info = seat_agents[seat].act(obs, candidates, rng)
        if not 0 <= idx < len(candidates):
            raise AgentFaultError(
                f"agent {seat_agents[seat].name} returned index {idx} of "
                f"{len(candidates)} candidates; transcript so far: {plays}"
            )
        action = candidates[idx]
        if seat in learner_seats:
            features = info.get("features")
            if features is None:
                from .encoders import encode_candidates

                features = encode_candidates(candidates)
            records[seat].append(
                DecisionRecord(
                    obs=obs,
                    features=features,
                    chosen=idx,
                    seat=seat,
                    episode_id=episode_id,
                    step_index=step,
                    log_prob=info.get("log_prob", 0.0),
                    value=info.get("value") or 0.0,
                    entropy=info.get("entropy", 0.0),
                )
            )
        plays.append((seat, action.cards))
        state = apply_action(state, action)
        step += 1
        if step > MAX_PLIES:
            raise RuntimeError("game exceeded the ply cap; rules engine bug")
    scores = terminal_scores(state)
    for seat, recs in records.items():
        if recs:
            recs[-1].reward = float(scores.scores[seat])
    transcript = Transcript(
        seed=seed,
        agents=[a.name for a in seat_agents],
        plays=plays,
        scores=scores.scores,
    )
    return transcript, records, scores


def replay_transcript(transcript: Transcript):
    """Re-run a transcript through the rules engine, validating every ply.

    Returns (ok, message); on failure the message names the first bad ply.
    """
    state = deal(transcript.seed)
    for i, (seat, cards) in enumerate(transcript.plays):
        if state.is_terminal:
            return False, f"ply {i}: game already over"
        if seat != state.current_player:
            return False, f"ply {i}: seat {seat} acted out of turn"
        action = PASS if not cards else classify(cards)
        if action is None:
            return False, f"ply {i}: {cards} is not a valid combination"
        legal = legal_actions(state)
        if action not in legal:
            return False, f"ply {i}: {action} is not legal"
        state = apply_action(state, action)
    if not state.is_terminal:
        return False, "transcript ended before the game did"
    scores = terminal_scores(state)
    if scores.scores != transcript.scores:
        return False, f"scores mismatch: recorded {transcript.scores}, got {scores.scores}"
    return True, f"ok: {len(transcript.plays)} plies, scores {scores.scores}"


class CheckpointPool:
    """Ring of up to 20 parameter snapshots, oldest evicted first.
    Snapshots are deep copies: later training never mutates pool entries."""

    def __init__(self, capacity: int = CHECKPOINT_POOL_CAPACITY):
        self.capacity = capacity
        self.snapshots: List[tuple] = []  # (batch_index, state_dict)

    def __len__(self):
        return len(self.snapshots)

    def add(self, model, batch_index: int):
        snapshot = copy.deepcopy(model.state_dict())
        self.snapshots.append((batch_index, snapshot))
        if len(self.snapshots) > self.capacity:
            self.snapshots.pop(0)

    def sample(self, rng: np.random.Generator):
        idx = int(rng.integers(len(self.snapshots)))
        return self.snapshots[idx][1]


def maybe_checkpoint(pool: CheckpointPool, model, batch_index: int, period: int):
    if period > 0 and batch_index > 0 and batch_index % period == 0:
        pool.add(model, batch_index)
    return pool


@dataclass(frozen=True)
class Curriculum:
    kind: str  # "current" | "checkpoint" | "fixed"
    opponent: str = "smart"  # fixed-opponent heuristic name
    current_mix: float = 0.5  # checkpoint self-play: P(seat uses current policy)


def assign_seats(
    curriculum: Curriculum,
    learner_agent_factory,
    opponent_agent_factory,
    pool: Optional[CheckpointPool],
    rng: np.random.Generator,
):
    """Build the 4 seat agents and the learner seat set for one episode.

    `learner_agent_factory()` returns an agent backed by the current
    parameters; `opponent_agent_factory(state_dict_or_none)` returns an
    agent backed by a snapshot (None means current parameters).
    """
    if curriculum.kind == "current":
        return [learner_agent_factory() for _ in range(NUM_PLAYERS)], set(range(NUM_PLAYERS))
    learner_seat = int(rng.integers(NUM_PLAYERS))
    agents: List[Agent] = []
    for seat in range(NUM_PLAYERS):
        if seat == learner_seat:
            agents.append(learner_agent_factory())
        elif curriculum.kind == "fixed":
            agents.append(make_heuristic(curriculum.opponent))
        elif curriculum.kind == "checkpoint":
            if pool is None or len(pool) == 0 or rng.random() < curriculum.current_mix:
                agents.append(opponent_agent_factory(None))
            else:
                agents.append(opponent_agent_factory(pool.sample(rng)))
        else:
            raise ValueError(f"unknown curriculum kind {curriculum.kind!r}")
    return agents, {learner_seat}


def collect_batch(
    curriculum: Curriculum,
    learner_agent_factory,
    opponent_agent_factory,
    pool: Optional[CheckpointPool],
    run_seed: int,
    batch_index: int,
    n_episodes: int,
) -> TrajectoryBatch:
    """Play `n_episodes` independent games and aggregate decision records.

    Episode seeds derive from (run seed, batch index, episode index), so any
    single episode can be replayed in isolation.
    """
    batch = TrajectoryBatch()
    for ep in range(n_episodes):
        rng = episode_rng(run_seed, batch_index, ep)
        deal_seed = int(rng.integers(2**63))
        agents, learner_seats = assign_seats(
            curriculum, learner_agent_factory, opponent_agent_factory, pool, rng
        )
        transcript, records, scores = play_episode(
            agents, deal_seed, rng, learner_seats, episode_id=ep
        )
        for seat, recs in records.items():
            if recs:
                batch.records.setdefault(seat, []).append(recs)
        batch.scores.append(scores.scores)
        batch.transcripts.append(transcript)
    return batch
