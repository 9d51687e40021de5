"""Learning algorithms: PPO (clipped surrogate, GAE, entropy bonus) and the
three value-based variants (Monte Carlo Q, SARSA, target-network Q-learning).

Each seat's model-controlled decisions form that seat's trajectory; other
players' moves are folded into the environment transition. Rewards are zero
except at the final transition, which carries the seat's terminal game
score. PPO trains on the unscaled score; value-based training divides the
terminal reward by 13 to compress targets for the dot-product scorer.

Value-based collection is epsilon-greedy over legal candidates with epsilon
decaying linearly from 0.5 to 0 over training, no replay buffer, one
optimizer update per collected batch, gradients clipped to norm 1.0, and
(for SARSA / Q-learning) a target network synchronized every 10 batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np
import torch
import torch.nn.functional as F

from .nn import Big2Network, obs_to_tensors, pad_candidates
from .orchestrator import DecisionRecord, TrajectoryBatch

VALUE_REWARD_DIVISOR = 13.0


@dataclass
class PPOConfig:
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    learning_rate: float = 3e-5
    epochs: int = 4
    minibatch_size: int = 256
    value_coef: float = 0.5
    entropy_beta: float = 0.0
    grad_clip: float = 0.5


@dataclass
class ValueConfig:
    learning_rate: float = 3e-5
    gamma: float = 0.99
    epsilon_start: float = 0.5
    epsilon_end: float = 0.0
    target_sync_period: int = 10
    grad_clip: float = 1.0
    reward_divisor: float = VALUE_REWARD_DIVISOR


class NonFiniteLossError(Exception):
    pass


def compute_gae(rewards, values, gamma: float, lam: float):
    """Generalized advantage estimation over one seat trajectory.

    The trajectory ends at the terminal state (bootstrap value 0). Returns
    (advantages, returns) with returns = advantages + values. No
    normalization here; PPO normalizes within the collected update batch.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if rewards.shape != values.shape:
        raise ValueError("rewards and values must be aligned")
    n = len(rewards)
    advantages = np.zeros(n)
    last = 0.0
    for t in reversed(range(n)):
        next_value = values[t + 1] if t + 1 < n else 0.0
        delta = rewards[t] + gamma * next_value - values[t]
        last = delta + gamma * lam * last
        advantages[t] = last
    return advantages, advantages + values


def epsilon_schedule(batch_index: int, total_batches: int, start: float = 0.5, end: float = 0.0) -> float:
    """Linear decay from `start` at batch 0 to `end` at the final batch."""
    if total_batches <= 1:
        return end
    frac = min(batch_index / (total_batches - 1), 1.0)
    return start + (end - start) * frac


def lr_schedule(batch_index: int, total_batches: int, base_lr: float) -> float:
    """Linear warmup over the first max(50, 2%) batches, then cosine decay
    to base_lr / 100 at the final batch."""
    warmup = min(max(50, round(0.02 * total_batches)), max(total_batches - 1, 1))
    if batch_index < warmup:
        return base_lr * batch_index / warmup
    floor = base_lr / 100.0
    span = max(total_batches - 1 - warmup, 1)
    t = min((batch_index - warmup) / span, 1.0)
    return floor + (base_lr - floor) * 0.5 * (1.0 + math.cos(math.pi * t))


def set_learning_rate(optimizer: torch.optim.Optimizer, lr: float):
    for group in optimizer.param_groups:
        group["lr"] = lr


def _flatten_ppo_batch(batch: TrajectoryBatch, gamma: float, lam: float):
    records: List[DecisionRecord] = []
    advantages: List[float] = []
    returns: List[float] = []
    for traj in batch.all_trajectories():
        rewards = [r.reward for r in traj]
        values = [r.value for r in traj]
        adv, ret = compute_gae(rewards, values, gamma, lam)
        records.extend(traj)
        advantages.extend(adv)
        returns.extend(ret)
    return records, np.array(advantages), np.array(returns)


def _forward_records(model: Big2Network, records: List[DecisionRecord]):
    hand, sets, scalars = obs_to_tensors([r.obs for r in records])
    state = model.forward_state(hand, sets, scalars)
    feats, mask = pad_candidates([r.features for r in records])
    scores = model.score_actions(state, feats)
    scores = scores.masked_fill(~mask, float("-inf"))
    return state, scores


def ppo_update(
    batch: TrajectoryBatch,
    model: Big2Network,
    optimizer: torch.optim.Optimizer,
    cfg: PPOConfig,
    rng: np.random.Generator,
) -> dict:
    """Run the PPO epochs over one collected batch; returns update stats."""
    records, advantages, returns = _flatten_ppo_batch(batch, cfg.gamma, cfg.gae_lambda)
    # Normalized within the collected update batch, before minibatching.
    advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

    n = len(records)
    stats = {"policy_loss": [], "value_loss": [], "entropy": [], "clip_fraction": []}
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.minibatch_size):
            idx = order[start : start + cfg.minibatch_size]
            mb = [records[i] for i in idx]
            adv = torch.tensor(advantages[idx], dtype=torch.float32)
            ret = torch.tensor(returns[idx], dtype=torch.float32)
            old_logp = torch.tensor([r.log_prob for r in mb], dtype=torch.float32)
            old_value = torch.tensor([r.value for r in mb], dtype=torch.float32)
            chosen = torch.tensor([r.chosen for r in mb], dtype=torch.long)

            state, scores = _forward_records(model, mb)
            log_probs = F.log_softmax(scores, dim=-1)
            new_logp = log_probs.gather(1, chosen.unsqueeze(1)).squeeze(1)
            probs = log_probs.exp()
            entropy = -(probs * log_probs.masked_fill(probs == 0, 0.0)).sum(-1)

            ratio = (new_logp - old_logp).exp()
            clipped = ratio.clamp(1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon)
            policy_loss = -torch.min(ratio * adv, clipped * adv).mean()

            value = model.value_estimate(state)
            value_clipped = old_value + (value - old_value).clamp(
                -cfg.clip_epsilon, cfg.clip_epsilon
            )
            value_loss = torch.max(
                (value - ret) ** 2, (value_clipped - ret) ** 2
            ).mean()

            loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_beta * entropy.mean()
            if not torch.isfinite(loss):
                raise NonFiniteLossError(
                    f"non-finite PPO loss: policy={policy_loss}, value={value_loss}"
                )
            optimizer.zero_grad()
            loss.backward()
            torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
            optimizer.step()

            with torch.no_grad():
                clip_frac = ((ratio - 1.0).abs() > cfg.clip_epsilon).float().mean()
            stats["policy_loss"].append(policy_loss.item())
            stats["value_loss"].append(value_loss.item())
            stats["entropy"].append(entropy.mean().item())
            stats["clip_fraction"].append(float(clip_frac))
    return {
        "records": n,
        "policy_loss": float(np.mean(stats["policy_loss"])),
        "value_loss": float(np.mean(stats["value_loss"])),
        "entropy": float(np.mean(stats["entropy"])),
        "clip_fraction": float(np.mean(stats["clip_fraction"])),
    }


def mc_q_target(rewards, gamma: float) -> np.ndarray:
    """Full discounted return-to-go over a seat trajectory (scaled rewards)."""
    rewards = np.asarray(rewards, dtype=np.float64)
    out = np.zeros(len(rewards))
    acc = 0.0
    for t in reversed(range(len(rewards))):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


@torch.no_grad()
def _target_q_values(target_net: Big2Network, records: List[DecisionRecord]):
    """Q values of the target network for every candidate of each record."""
    _, scores = _forward_records(target_net, records)
    return scores


def sarsa_target(reward: float, next_q_chosen, gamma: float, terminal: bool) -> float:
    """y = r + gamma * Q_target(o', a') with a' the behavior policy's actual
    next action; y = r at the trajectory's final transition."""
    if terminal:
        return float(reward)
    return float(reward + gamma * next_q_chosen)


def q_learning_target(reward: float, next_q_all, gamma: float, terminal: bool) -> float:
    """y = r + gamma * max over legal a' of Q_target(o', a'); the max runs
    over the legal candidate set only."""
    if terminal:
        return float(reward)
    return float(reward + gamma * float(np.max(next_q_all)))


def _trajectory_targets(
    traj: List[DecisionRecord],
    variant: str,
    target_net,
    cfg: ValueConfig,
) -> np.ndarray:
    rewards = [r.reward / cfg.reward_divisor for r in traj]
    if variant == "mc_q":
        return mc_q_target(rewards, cfg.gamma)
    successors = traj[1:]
    if successors:
        next_scores = _target_q_values(target_net, successors)
    targets = np.zeros(len(traj))
    for t, rec in enumerate(traj):
        terminal = t == len(traj) - 1
        if terminal:
            targets[t] = rewards[t]
        elif variant == "sarsa":
            q_next = float(next_scores[t, traj[t + 1].chosen])
            targets[t] = sarsa_target(rewards[t], q_next, cfg.gamma, False)
        elif variant == "q_learning":
            row = next_scores[t]
            q_all = row[torch.isfinite(row)].numpy()
            targets[t] = q_learning_target(rewards[t], q_all, cfg.gamma, False)
        else:
            raise ValueError(f"unknown value variant {variant!r}")
    return targets


def value_update(
    batch: TrajectoryBatch,
    model: Big2Network,
    target_net,
    optimizer: torch.optim.Optimizer,
    cfg: ValueConfig,
    variant: str,
) -> dict:
    """One optimizer step on the MSE of the selected actions' Q values."""
    records: List[DecisionRecord] = []
    targets: List[float] = []
    for traj in batch.all_trajectories():
        records.extend(traj)
        targets.extend(_trajectory_targets(traj, variant, target_net, cfg))

    target_t = torch.tensor(np.array(targets), dtype=torch.float32)
    chosen = torch.tensor([r.chosen for r in records], dtype=torch.long)
    _, scores = _forward_records(model, records)
    q_chosen = scores.gather(1, chosen.unsqueeze(1)).squeeze(1)
    loss = F.mse_loss(q_chosen, target_t)
    if not torch.isfinite(loss):
        raise NonFiniteLossError(f"non-finite value loss ({variant})")
    optimizer.zero_grad()
    loss.backward()
    torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
    optimizer.step()
    return {"records": len(records), "loss": loss.item(), "mean_target": float(target_t.mean())}


def sync_target(model: Big2Network, target_net: Big2Network):
    """Copy online parameters into the target network, bit-identically."""
    target_net.load_state_dict(model.state_dict())
