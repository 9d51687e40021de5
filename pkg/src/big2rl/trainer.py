"""The training loop: collect -> update -> schedules -> periodic probes,
evaluation snapshots, and checkpoints. Resumable from the latest checkpoint.

Determinism: the model is initialized from the run seed, every episode's
generator derives from (run seed, batch, episode), and the PPO shuffle
generator derives from (run seed, batch). Two runs with the same config
and seed in deterministic mode therefore produce identical metrics logs
and checkpoints. Deterministic mode forces single-worker collection and
omits wall-clock fields from the metrics log.
"""

from __future__ import annotations

import dataclasses
import json
import multiprocessing
import os
import time
from pathlib import Path
from typing import Optional

import numpy as np
import torch

from .agents import PolicyAgent, ValueAgent
from .config import RunConfig, config_to_dict
from .evaluation import entropy_probe, tournament
from .nn import Big2Network, load_checkpoint, save_checkpoint
from .orchestrator import (
    CheckpointPool,
    Curriculum,
    TrajectoryBatch,
    assign_seats,
    collect_batch,
    maybe_checkpoint,
    play_episode,
)
from .rl import (
    PPOConfig,
    ValueConfig,
    epsilon_schedule,
    lr_schedule,
    ppo_update,
    set_learning_rate,
    sync_target,
    value_update,
)
from .rng import episode_rng, make_rng

LATEST_CKPT = "latest.ckpt"
FINAL_CKPT = "final.ckpt"
METRICS_LOG = "metrics.jsonl"

# Globals inherited by forked collection workers.
_FORK_STATE: dict = {}


def _collect_episode_task(ep: int):
    st = _FORK_STATE
    rng = episode_rng(st["run_seed"], st["batch_index"], ep)
    deal_seed = int(rng.integers(2**63))
    agents, learner_seats = assign_seats(
        st["curriculum"], st["learner_factory"], st["opponent_factory"], st["pool"], rng
    )
    return play_episode(agents, deal_seed, rng, learner_seats, episode_id=ep)


class Trainer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = Path(cfg.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        torch.manual_seed(cfg.seed)
        self.model = Big2Network(cfg.network_for())
        self.optimizer = torch.optim.Adam(
            self.model.parameters(), lr=cfg.ppo.learning_rate
        )
        self.target_net: Optional[Big2Network] = None
        if cfg.algorithm in ("sarsa", "q_learning"):
            self.target_net = Big2Network(cfg.network_for())
            sync_target(self.model, self.target_net)
        self.pool = CheckpointPool()
        self.start_batch = 0
        self._maybe_resume()

    # -- setup ------------------------------------------------------------

    def _maybe_resume(self):
        latest = self.out / LATEST_CKPT
        if not latest.exists():
            (self.out / "config.json").write_text(
                json.dumps(config_to_dict(self.cfg), indent=2, sort_keys=True)
            )
            return
        model, meta = load_checkpoint(latest)
        self.model = model
        self.optimizer = torch.optim.Adam(
            self.model.parameters(), lr=self.cfg.ppo.learning_rate
        )
        # Second pass restores the Adam moments into the fresh optimizer.
        load_checkpoint(latest, optimizer=self.optimizer)
        self.start_batch = int(meta.get("batch_index", -1)) + 1
        if self.target_net is not None:
            sync_target(self.model, self.target_net)
        pool_dir = self.out / "pool"
        if pool_dir.exists():
            for path in sorted(pool_dir.glob("batch_*.ckpt"))[-self.pool.capacity :]:
                snap_model, snap_meta = load_checkpoint(path)
                self.pool.snapshots.append(
                    (int(snap_meta["batch_index"]), snap_model.state_dict())
                )

    # -- agents -----------------------------------------------------------

    def _learner_factory(self, epsilon: float):
        if self.cfg.algorithm == "ppo":
            return lambda: PolicyAgent(self.model, sample=True)
        return lambda: ValueAgent(self.model, epsilon=epsilon)

    def _opponent_factory(self):
        def factory(snapshot):
            if snapshot is None:
                if self.cfg.algorithm == "ppo":
                    return PolicyAgent(self.model, sample=True)
                return ValueAgent(self.model, epsilon=0.0)
            model = Big2Network(self.cfg.network_for())
            model.load_state_dict(snapshot)
            if self.cfg.algorithm == "ppo":
                return PolicyAgent(model, sample=True)
            return ValueAgent(model, epsilon=0.0)

        return factory

    def _eval_agent(self):
        if self.cfg.algorithm == "ppo":
            return PolicyAgent(self.model, sample=True)
        return ValueAgent(self.model, epsilon=0.0)

    # -- collection -------------------------------------------------------

    def _collect(self, batch_index: int, epsilon: float) -> TrajectoryBatch:
        cfg = self.cfg
        learner = self._learner_factory(epsilon)
        opponent = self._opponent_factory()
        if cfg.effective_workers == 1:
            return collect_batch(
                cfg.curriculum,
                learner,
                opponent,
                self.pool,
                cfg.seed,
                batch_index,
                cfg.episodes_per_batch,
            )
        _FORK_STATE.update(
            run_seed=cfg.seed,
            batch_index=batch_index,
            curriculum=cfg.curriculum,
            learner_factory=learner,
            opponent_factory=opponent,
            pool=self.pool,
        )
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(cfg.effective_workers, initializer=_set_worker_threads) as pool:
            results = pool.map(_collect_episode_task, range(cfg.episodes_per_batch))
        batch = TrajectoryBatch()
        for transcript, records, scores in results:
            for seat, recs in records.items():
                if recs:
                    batch.records.setdefault(seat, []).append(recs)
            batch.scores.append(scores.scores)
            batch.transcripts.append(transcript)
        return batch

    # -- loop -------------------------------------------------------------

    def run(self, max_batches: Optional[int] = None) -> Path:
        """Run the training loop; `max_batches` caps how many batches this
        invocation processes (useful for time-sliced jobs), with the run
        resuming from latest.ckpt on the next invocation."""
        cfg = self.cfg
        metrics_path = self.out / METRICS_LOG
        pool_dir = self.out / "pool"
        stop = cfg.total_batches
        if max_batches is not None:
            stop = min(stop, self.start_batch + max_batches)
        with open(metrics_path, "a") as metrics:
            for b in range(self.start_batch, stop):
                t0 = time.time()
                lr = lr_schedule(b, cfg.total_batches, cfg.ppo.learning_rate)
                set_learning_rate(self.optimizer, lr)
                epsilon = epsilon_schedule(
                    b, cfg.total_batches, cfg.value.epsilon_start, cfg.value.epsilon_end
                )

                batch = self._collect(b, epsilon)
                if cfg.algorithm == "ppo":
                    update_rng = episode_rng(cfg.seed, b, 1_000_000)
                    stats = ppo_update(batch, self.model, self.optimizer, cfg.ppo, update_rng)
                else:
                    stats = value_update(
                        batch,
                        self.model,
                        self.target_net,
                        self.optimizer,
                        cfg.value,
                        cfg.algorithm,
                    )
                    if (
                        self.target_net is not None
                        and (b + 1) % cfg.value.target_sync_period == 0
                    ):
                        sync_target(self.model, self.target_net)

                if cfg.curriculum.kind == "checkpoint":
                    before = len(self.pool)
                    maybe_checkpoint(
                        self.pool, self.model, b, cfg.effective_checkpoint_period
                    )
                    if len(self.pool) != before or (
                        self.pool.snapshots and self.pool.snapshots[-1][0] == b
                    ):
                        pool_dir.mkdir(exist_ok=True)
                        if self.pool.snapshots and self.pool.snapshots[-1][0] == b:
                            save_checkpoint(
                                pool_dir / f"batch_{b:06d}.ckpt",
                                self.model,
                                meta={"batch_index": b},
                            )

                learner_rewards = [
                    traj[-1].reward for traj in batch.all_trajectories() if traj
                ]
                record = {
                    "batch": b,
                    "records": sum(len(t) for t in batch.all_trajectories()),
                    "mean_learner_score": float(np.mean(learner_rewards))
                    if learner_rewards
                    else 0.0,
                    "epsilon": epsilon if cfg.algorithm != "ppo" else None,
                    "lr": lr,
                    **stats,
                }
                if cfg.probe_period > 0 and b % cfg.probe_period == 0 and cfg.algorithm == "ppo":
                    probe_rng = episode_rng(cfg.seed, b, 2_000_000)
                    record["probe_entropy"] = entropy_probe(
                        self.model, cfg.probe_states, probe_rng
                    )
                if not cfg.deterministic:
                    record["wall_time"] = time.time() - t0
                metrics.write(json.dumps(record, sort_keys=True) + "\n")
                metrics.flush()

                if cfg.eval_period > 0 and (b + 1) % cfg.eval_period == 0:
                    self._eval_snapshot(b)
                save_checkpoint(
                    self.out / LATEST_CKPT,
                    self.model,
                    optimizer=self.optimizer,
                    meta={"batch_index": b},
                )
        if stop < cfg.total_batches:
            return self.out / LATEST_CKPT
        final = self.out / FINAL_CKPT
        save_checkpoint(
            final,
            self.model,
            optimizer=self.optimizer,
            meta={"batch_index": cfg.total_batches - 1},
        )
        return final

    def _eval_snapshot(self, batch_index: int):
        results = {}
        for opponent in ("random", "greedy", "smart"):
            res = tournament(
                self._eval_agent(),
                opponent,
                n_games=self.cfg.eval_games,
                seed=self.cfg.eval_seed + batch_index,
            )
            results[opponent] = {
                "games": res.games,
                "win_rate": res.win_rate,
                "avg_score": res.avg_score,
            }
        path = self.out / f"eval_{batch_index + 1:06d}.json"
        path.write_text(json.dumps({"batch": batch_index, "results": results}, indent=2))


def _set_worker_threads():
    torch.set_num_threads(1)


def train(cfg: RunConfig) -> Path:
    return Trainer(cfg).run()
