"""Card-aware state encoder, action encoder, dot-product scorer, value head.

The acting player's hand is embedded with a shared card table, passed
through masked self-attention, and mean-pooled over valid (non-pad)
positions. Indicator sets (active trick, seen cards, three per-opponent
played histories) are projected through the same card table and through
per-role feed-forward encoders. Scalar features (opponent counts, pass
count) get their own encoder. Everything is concatenated, projected,
layer-normed, and passed through a residual feed-forward block to give the
state embedding. Candidates are encoded from their 80-dim features by a
two-layer MLP and scored against a projection of the state embedding with
a scaled dot product: a logit for the policy network, Q(o, a) for the
Q-network. The policy network additionally has a value head.

Checkpoints use a versioned binary format: a magic line, a JSON header
(format version, config hash, named parameter shapes, optimizer metadata),
then raw little-endian float32 tensors in header order. See
docs/formats.md.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, asdict, field

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .cards import NUM_CARDS
from .encoders import ACTION_DIM, Observation

CHECKPOINT_MAGIC = b"BIG2RL-CKPT-v1\n"


@dataclass(frozen=True)
class NetworkConfig:
    d_emb: int = 64
    n_heads: int = 4
    d_state: int = 256
    d_act: int = 128
    d_misc: int = 32
    value_head: bool = True

    def hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


class MaskedSelfAttention(nn.Module):
    """Single-layer multi-head self-attention; pad positions get exactly
    zero attention weight and are excluded from pooling downstream."""

    def __init__(self, d_model: int, n_heads: int):
        super().__init__()
        assert d_model % n_heads == 0
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q = nn.Linear(d_model, d_model)
        self.k = nn.Linear(d_model, d_model)
        self.v = nn.Linear(d_model, d_model)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x: torch.Tensor, valid: torch.Tensor) -> torch.Tensor:
        # x: (B, L, D); valid: (B, L) bool
        b, l, d = x.shape
        q = self.q(x).view(b, l, self.n_heads, self.d_head).transpose(1, 2)
        k = self.k(x).view(b, l, self.n_heads, self.d_head).transpose(1, 2)
        v = self.v(x).view(b, l, self.n_heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-1, -2) / math.sqrt(self.d_head)
        mask = valid[:, None, None, :]  # keys masked; every query row has >=1 valid key
        scores = scores.masked_fill(~mask, float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        y = (attn @ v).transpose(1, 2).reshape(b, l, d)
        return self.out(y)


class Big2Network(nn.Module):
    """Shared policy/Q architecture; `value_head` distinguishes the two."""

    SET_ROLES = ("trick", "seen", "opp0", "opp1", "opp2")

    def __init__(self, config: NetworkConfig):
        super().__init__()
        self.config = config
        d = config.d_emb
        self.card_embedding = nn.Embedding(NUM_CARDS + 1, d, padding_idx=NUM_CARDS)
        self.hand_attention = MaskedSelfAttention(d, config.n_heads)
        self.set_encoders = nn.ModuleDict(
            {
                role: nn.Sequential(nn.Linear(d, d), nn.ReLU(), nn.Linear(d, d))
                for role in self.SET_ROLES
            }
        )
        self.scalar_encoder = nn.Sequential(
            nn.Linear(4, config.d_misc), nn.ReLU(), nn.Linear(config.d_misc, config.d_misc)
        )
        concat_dim = d * (1 + len(self.SET_ROLES)) + config.d_misc
        self.state_proj = nn.Linear(concat_dim, config.d_state)
        self.state_norm = nn.LayerNorm(config.d_state)
        self.state_ff = nn.Sequential(
            nn.Linear(config.d_state, config.d_state),
            nn.ReLU(),
            nn.Linear(config.d_state, config.d_state),
        )
        self.action_mlp = nn.Sequential(
            nn.Linear(ACTION_DIM, config.d_act), nn.ReLU(), nn.Linear(config.d_act, config.d_act)
        )
        self.state_to_action = nn.Linear(config.d_state, config.d_act)
        if config.value_head:
            self.value_mlp = nn.Sequential(
                nn.Linear(config.d_state, 128), nn.ReLU(), nn.Linear(128, 1)
            )
        self._init_weights()

    def _init_weights(self):
        nn.init.normal_(self.card_embedding.weight, std=0.02)
        with torch.no_grad():
            self.card_embedding.weight[NUM_CARDS].zero_()
        if self.config.value_head:
            # Zero-init the final value layer: stabilizes early PPO.
            final = self.value_mlp[-1]
            nn.init.zeros_(final.weight)
            nn.init.zeros_(final.bias)

    def forward_state(
        self,
        hand_ids: torch.Tensor,  # (B, 13) long
        set_indicators: torch.Tensor,  # (B, 5, 52) float: trick, seen, opp x3
        scalars: torch.Tensor,  # (B, 4) float: counts x3, pass count
    ) -> torch.Tensor:
        valid = hand_ids < NUM_CARDS
        emb = self.card_embedding(hand_ids)
        attended = self.hand_attention(emb, valid)
        weights = valid.float().unsqueeze(-1)
        pooled = (attended * weights).sum(1) / weights.sum(1).clamp(min=1.0)

        table = self.card_embedding.weight[:NUM_CARDS]
        set_emb = set_indicators @ table  # (B, 5, d_emb)
        set_parts = [
            self.set_encoders[role](set_emb[:, i]) for i, role in enumerate(self.SET_ROLES)
        ]
        misc = self.scalar_encoder(scalars)
        combined = torch.cat([pooled] + set_parts + [misc], dim=-1)
        state = self.state_norm(self.state_proj(combined))
        return state + self.state_ff(state)

    def score_actions(
        self, state_embedding: torch.Tensor, action_features: torch.Tensor
    ) -> torch.Tensor:
        # state: (B, d_state); actions: (B, A, 80) -> (B, A)
        act = self.action_mlp(action_features)
        proj = self.state_to_action(state_embedding)
        return (act @ proj.unsqueeze(-1)).squeeze(-1) / math.sqrt(self.config.d_act)

    def value_estimate(self, state_embedding: torch.Tensor) -> torch.Tensor:
        if not self.config.value_head:
            raise RuntimeError("this network has no value head")
        return self.value_mlp(state_embedding).squeeze(-1)


def obs_to_tensors(observations, device=None):
    """Stack Observation values into the three forward_state inputs."""
    hand = torch.from_numpy(np.stack([o.hand_ids for o in observations]))
    sets = torch.from_numpy(
        np.stack(
            [
                np.concatenate(
                    [o.trick_indicator[None], o.seen_indicator[None], o.opponent_played]
                )
                for o in observations
            ]
        )
    )
    scalars = torch.from_numpy(
        np.stack(
            [np.concatenate([o.opponent_counts, o.pass_count]) for o in observations]
        )
    )
    if device is not None:
        hand, sets, scalars = hand.to(device), sets.to(device), scalars.to(device)
    return hand, sets, scalars


def pad_candidates(feature_arrays, device=None):
    """Pad variable-length candidate feature stacks to a common length.

    Returns (features (B, Amax, 80), mask (B, Amax) bool with True = real).
    """
    n = len(feature_arrays)
    amax = max(f.shape[0] for f in feature_arrays)
    feats = np.zeros((n, amax, ACTION_DIM), dtype=np.float32)
    mask = np.zeros((n, amax), dtype=bool)
    for i, f in enumerate(feature_arrays):
        feats[i, : f.shape[0]] = f
        mask[i, : f.shape[0]] = True
    t_feats = torch.from_numpy(feats)
    t_mask = torch.from_numpy(mask)
    if device is not None:
        t_feats, t_mask = t_feats.to(device), t_mask.to(device)
    return t_feats, t_mask


@torch.no_grad()
def evaluate_candidates(model: Big2Network, obs: Observation, cand_features: np.ndarray):
    """Scores for one decision point: (scores (A,), value or None)."""
    hand, sets, scalars = obs_to_tensors([obs])
    state = model.forward_state(hand, sets, scalars)
    feats = torch.from_numpy(cand_features).unsqueeze(0)
    scores = model.score_actions(state, feats)[0]
    value = float(model.value_estimate(state)[0]) if model.config.value_head else None
    return scores.numpy(), value


def sample_action(logits: np.ndarray, rng: np.random.Generator):
    """Categorical sample over candidate logits.

    Returns (index, log_prob of the sampled index, entropy in nats).
    Computed in float64 for numerical stability.
    """
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    p = np.exp(z)
    p /= p.sum()
    idx = int(rng.choice(len(p), p=p))
    logp = float(np.log(p[idx]))
    entropy = float(-(p * np.log(np.maximum(p, 1e-300))).sum())
    return idx, logp, entropy


def greedy_index(scores: np.ndarray) -> int:
    return int(np.argmax(scores))


# ---------------------------------------------------------------------------
# Checkpoint serialization


def _named_tensors(model: Big2Network):
    return list(model.state_dict().items())


def save_checkpoint(path, model: Big2Network, optimizer=None, meta: dict | None = None):
    """Write the versioned binary checkpoint format."""
    entries = []
    blobs = []
    for name, tensor in _named_tensors(model):
        arr = tensor.detach().cpu().numpy().astype("<f4")
        entries.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    opt_entries = []
    if optimizer is not None:
        state = optimizer.state_dict()
        for gi, group_state in sorted(state["state"].items()):
            for key in ("exp_avg", "exp_avg_sq"):
                arr = group_state[key].detach().cpu().numpy().astype("<f4")
                opt_entries.append(
                    {
                        "name": f"opt.{gi}.{key}",
                        "shape": list(arr.shape),
                        "step": int(group_state["step"]),
                    }
                )
                blobs.append(arr.tobytes())
    header = {
        "format_version": 1,
        "config": asdict(model.config),
        "config_hash": model.config.hash(),
        "parameters": entries,
        "optimizer": opt_entries,
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path, optimizer=None):
    """Load a checkpoint; returns (model, meta). Parameter shapes and the
    config hash are asserted against the stored header."""
    with open(path, "rb") as f:
        magic = f.read(len(CHECKPOINT_MAGIC))
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (hlen,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(hlen))
        config = NetworkConfig(**header["config"])
        if header["config_hash"] != config.hash():
            raise ValueError("checkpoint config hash mismatch")
        model = Big2Network(config)
        state = {}
        for entry in header["parameters"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(f.read(count * 4), dtype="<f4").reshape(shape)
            state[entry["name"]] = torch.from_numpy(arr.copy())
        expected = {n: tuple(t.shape) for n, t in model.state_dict().items()}
        actual = {n: tuple(t.shape) for n, t in state.items()}
        if expected != actual:
            raise ValueError("checkpoint parameter shapes do not match config")
        model.load_state_dict(state)
        if optimizer is not None and header["optimizer"]:
            opt_state = optimizer.state_dict()
            for entry in header["optimizer"]:
                shape = tuple(entry["shape"])
                count = int(np.prod(shape)) if shape else 1
                arr = np.frombuffer(f.read(count * 4), dtype="<f4").reshape(shape)
                _, gi, key = entry["name"].split(".")
                slot = opt_state["state"].setdefault(int(gi), {})
                slot[key] = torch.from_numpy(arr.copy())
                slot["step"] = torch.tensor(float(entry["step"]))
            optimizer.load_state_dict(opt_state)
    return model, header["meta"]
