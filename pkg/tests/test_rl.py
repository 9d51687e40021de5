import math

import numpy as np
import pytest
import torch

from big2rl.agents import PolicyAgent, ValueAgent
from big2rl.nn import Big2Network, NetworkConfig
from big2rl.orchestrator import Curriculum, collect_batch
from big2rl.rl import (
    PPOConfig,
    ValueConfig,
    compute_gae,
    epsilon_schedule,
    lr_schedule,
    mc_q_target,
    ppo_update,
    q_learning_target,
    sarsa_target,
    sync_target,
    value_update,
)
from big2rl.rng import make_rng

from oracles import gae_double_sum

TINY = NetworkConfig(d_emb=16, n_heads=2, d_state=32, d_act=16, d_misc=8)


def tiny_model(seed=0, value_head=True):
    torch.manual_seed(seed)
    cfg = NetworkConfig(d_emb=16, n_heads=2, d_state=32, d_act=16, d_misc=8,
                        value_head=value_head)
    return Big2Network(cfg)


def tiny_ppo_batch(model, n_episodes=4, run_seed=11):
    return collect_batch(
        Curriculum("current"),
        lambda: PolicyAgent(model),
        lambda sd: PolicyAgent(model),
        None,
        run_seed=run_seed,
        batch_index=0,
        n_episodes=n_episodes,
    )


def tiny_value_batch(model, n_episodes=4, run_seed=13, epsilon=0.3):
    return collect_batch(
        Curriculum("current"),
        lambda: ValueAgent(model, epsilon=epsilon),
        lambda sd: ValueAgent(model, epsilon=epsilon),
        None,
        run_seed=run_seed,
        batch_index=0,
        n_episodes=n_episodes,
    )


class TestGAE:
    def test_lambda_one_telescopes_to_discounted_return(self):
        # With lambda = 1 the advantage is the full discounted return minus
        # the baseline.
        rng = make_rng(0)
        rewards = rng.normal(size=7)
        values = rng.normal(size=7)
        gamma = 0.97
        adv, ret = compute_gae(rewards, values, gamma, 1.0)
        for t in range(7):
            g = sum(gamma ** (k - t) * rewards[k] for k in range(t, 7))
            assert adv[t] == pytest.approx(g - values[t], abs=1e-12)
            assert ret[t] == pytest.approx(g, abs=1e-12)

    def test_lambda_zero_is_one_step_td(self):
        rng = make_rng(1)
        rewards = rng.normal(size=6)
        values = rng.normal(size=6)
        gamma = 0.9
        adv, _ = compute_gae(rewards, values, gamma, 0.0)
        for t in range(6):
            next_v = values[t + 1] if t + 1 < 6 else 0.0
            assert adv[t] == pytest.approx(
                rewards[t] + gamma * next_v - values[t], abs=1e-12
            )

    def test_matches_definition_double_sum(self):
        rng = make_rng(2)
        for _ in range(20):
            n = int(rng.integers(1, 12))
            rewards = rng.normal(size=n)
            values = rng.normal(size=n)
            adv, _ = compute_gae(rewards, values, 0.99, 0.95)
            oracle = gae_double_sum(rewards, values, 0.99, 0.95)
            assert np.allclose(adv, oracle, atol=1e-10)

    def test_sparse_terminal_reward(self):
        # Zero rewards except the last step, zero values: the advantage at
        # step t is (gamma*lambda)^(T-1-t) * gamma^0... check closed form.
        rewards = [0.0, 0.0, 0.0, 13.0]
        values = [0.0, 0.0, 0.0, 0.0]
        adv, ret = compute_gae(rewards, values, 0.99, 0.95)
        assert adv[3] == pytest.approx(13.0)
        for t in range(3):
            assert adv[t] == pytest.approx(13.0 * (0.99 * 0.95) ** (3 - t))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            compute_gae([1.0, 2.0], [0.0], 0.99, 0.95)


class TestSchedules:
    def test_epsilon_endpoints(self):
        assert epsilon_schedule(0, 100) == 0.5
        assert epsilon_schedule(99, 100) == 0.0
        assert epsilon_schedule(500, 100) == 0.0  # clamped past the end

    def test_epsilon_midpoint_linear(self):
        assert epsilon_schedule(50, 101) == pytest.approx(0.25)

    def test_lr_warmup(self):
        base = 3e-5
        # 5000 batches: warmup = max(50, 100) = 100.
        assert lr_schedule(0, 5000, base) == 0.0
        assert lr_schedule(100, 5000, base) == pytest.approx(base)
        assert lr_schedule(50, 5000, base) == pytest.approx(base / 2)

    def test_lr_short_run_uses_50_batch_warmup(self):
        base = 3e-5
        # 300 batches: warmup = max(50, 6) = 50.
        assert lr_schedule(50, 300, base) == pytest.approx(base)
        assert lr_schedule(25, 300, base) == pytest.approx(base / 2)

    def test_lr_final_floor(self):
        base = 3e-5
        assert lr_schedule(4999, 5000, base) == pytest.approx(base / 100)

    def test_lr_cosine_midpoint(self):
        base = 3e-5
        warmup = 100
        mid = warmup + (5000 - 1 - warmup) // 2
        lr = lr_schedule(mid, 5000, base)
        floor = base / 100
        expected = floor + (base - floor) * 0.5 * (
            1 + math.cos(math.pi * (mid - warmup) / (5000 - 1 - warmup))
        )
        assert lr == pytest.approx(expected)

    def test_lr_monotone_after_warmup(self):
        vals = [lr_schedule(b, 1000, 3e-5) for b in range(50, 1000)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestValueTargets:
    def test_mc_q_sparse_terminal(self):
        # 13-point win scaled by 13 gives 1.0 at the end; two steps back at
        # gamma 0.99 the return is 0.9801.
        targets = mc_q_target([0.0, 0.0, 1.0], 0.99)
        assert targets[2] == pytest.approx(1.0)
        assert targets[1] == pytest.approx(0.99)
        assert targets[0] == pytest.approx(0.9801)

    def test_mc_q_dense(self):
        targets = mc_q_target([1.0, 2.0, 3.0], 0.5)
        assert targets[2] == 3.0
        assert targets[1] == 2.0 + 0.5 * 3.0
        assert targets[0] == 1.0 + 0.5 * targets[1]

    def test_sarsa_and_q_learning_relations(self):
        q_next = np.array([0.3, -0.1, 0.8, 0.2])
        chosen = 1
        s = sarsa_target(0.0, q_next[chosen], 0.99, terminal=False)
        q = q_learning_target(0.0, q_next, 0.99, terminal=False)
        assert s == pytest.approx(0.99 * -0.1)
        assert q == pytest.approx(0.99 * 0.8)
        assert q >= s  # max dominates any specific choice

    def test_terminal_targets_equal_reward(self):
        assert sarsa_target(-0.4, 99.0, 0.99, terminal=True) == -0.4
        assert q_learning_target(-0.4, np.array([99.0]), 0.99, terminal=True) == -0.4


class TestPPOUpdate:
    def test_stats_and_learning_signal(self):
        model = tiny_model(3)
        batch = tiny_ppo_batch(model)
        opt = torch.optim.Adam(model.parameters(), lr=3e-4)
        cfg = PPOConfig(epochs=1, minibatch_size=100000)
        stats = ppo_update(batch, model, opt, cfg, make_rng(0))
        assert stats["records"] == len(batch.all_records())
        # Single full-batch minibatch at the old parameters: ratio is 1
        # everywhere, so nothing clips and the surrogate equals the mean of
        # the normalized advantages (which is ~0 by construction).
        assert stats["clip_fraction"] == 0.0
        assert abs(stats["policy_loss"]) < 1e-5
        assert np.isfinite(stats["value_loss"])
        assert stats["entropy"] > 0.0

    def test_later_epochs_move_the_ratio(self):
        model = tiny_model(4)
        batch = tiny_ppo_batch(model)
        opt = torch.optim.Adam(model.parameters(), lr=1e-2)
        cfg = PPOConfig(epochs=4, minibatch_size=64)
        stats = ppo_update(batch, model, opt, cfg, make_rng(1))
        # With an aggressive lr some updates should hit the clip region.
        assert stats["clip_fraction"] > 0.0

    def test_value_loss_decreases_value_error(self):
        model = tiny_model(5)
        batch = tiny_ppo_batch(model, n_episodes=6)
        opt = torch.optim.Adam(model.parameters(), lr=1e-3)
        cfg = PPOConfig(epochs=1, minibatch_size=100000)
        first = ppo_update(batch, model, opt, cfg, make_rng(2))
        for _ in range(30):
            last = ppo_update(batch, model, opt, cfg, make_rng(2))
        assert last["value_loss"] < first["value_loss"]

    def test_deterministic_given_seed(self):
        results = []
        for _ in range(2):
            model = tiny_model(6)
            batch = tiny_ppo_batch(model)
            opt = torch.optim.Adam(model.parameters(), lr=3e-4)
            stats = ppo_update(batch, model, opt, PPOConfig(), make_rng(7))
            results.append((stats, [p.detach().clone() for p in model.parameters()]))
        assert results[0][0] == results[1][0]
        for a, b in zip(results[0][1], results[1][1]):
            assert torch.equal(a, b)


class TestValueUpdate:
    def test_single_step_reduces_loss_on_repetition(self):
        model = tiny_model(8, value_head=False)
        target = tiny_model(8, value_head=False)
        batch = tiny_value_batch(model)
        opt = torch.optim.Adam(model.parameters(), lr=1e-3)
        cfg = ValueConfig()
        losses = [
            value_update(batch, model, target, opt, cfg, "mc_q")["loss"]
            for _ in range(25)
        ]
        assert losses[-1] < losses[0]

    def test_targets_are_scaled_by_13(self):
        # Monte Carlo targets never exceed the scaled score range.
        model = tiny_model(9, value_head=False)
        batch = tiny_value_batch(model)
        opt = torch.optim.Adam(model.parameters(), lr=0.0)
        stats = value_update(batch, model, model, opt, ValueConfig(), "mc_q")
        assert abs(stats["mean_target"]) <= 39.0 / 13.0

    @pytest.mark.parametrize("variant", ["sarsa", "q_learning"])
    def test_bootstrapped_variants_run(self, variant):
        model = tiny_model(10, value_head=False)
        target = tiny_model(10, value_head=False)
        batch = tiny_value_batch(model, n_episodes=2)
        opt = torch.optim.Adam(model.parameters(), lr=3e-4)
        stats = value_update(batch, model, target, opt, ValueConfig(), variant)
        assert stats["records"] == len(batch.all_records())
        assert np.isfinite(stats["loss"])

    def test_unknown_variant_rejected(self):
        model = tiny_model(11, value_head=False)
        batch = tiny_value_batch(model, n_episodes=1)
        opt = torch.optim.Adam(model.parameters(), lr=3e-4)
        with pytest.raises(ValueError):
            value_update(batch, model, model, opt, ValueConfig(), "td_lambda")

    def test_q_learning_targets_dominate_sarsa(self):
        # Same batch and target net: the max-over-actions target is
        # pointwise at least the on-policy target, so its mean is too.
        model = tiny_model(12, value_head=False)
        target = tiny_model(13, value_head=False)
        batch = tiny_value_batch(model, n_episodes=3)
        means = {}
        for variant in ("sarsa", "q_learning"):
            frozen = tiny_model(12, value_head=False)
            opt = torch.optim.Adam(frozen.parameters(), lr=0.0)
            means[variant] = value_update(
                batch, frozen, target, opt, ValueConfig(), variant
            )["mean_target"]
        assert means["q_learning"] >= means["sarsa"] - 1e-9

    def test_sync_target_bit_identical(self):
        model = tiny_model(14, value_head=False)
        target = tiny_model(15, value_head=False)
        sync_target(model, target)
        for a, b in zip(model.state_dict().values(), target.state_dict().values()):
            assert torch.equal(a, b)
