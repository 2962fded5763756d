import numpy as np
import pytest

from cogsim import ppo
from cogsim.ppo import PPOConfig, PolicyNetwork


class OneStepEnv:
    """Single-step bandit: reward peaks at action 0.5."""

    def __init__(self, obs):
        self.obs = obs
        self.done = False

    def step(self, action):
        if self.done:
            raise RuntimeError("episode finished")
        self.done = True
        return self.obs, 1.0 - abs(action - 0.5), True, {}


class BanditProvider:
    def __init__(self, obs_dim=4, seed=0):
        self.obs = np.random.default_rng(seed).standard_normal(obs_dim)

    def new_episode(self):
        env = OneStepEnv(self.obs)
        return env, self.obs


class ZeroRewardEnv:
    def __init__(self, obs, length=5):
        self.obs = obs
        self.remaining = length

    def step(self, action):
        self.remaining -= 1
        return self.obs, 0.0, self.remaining == 0, {}


class ZeroProvider:
    def __init__(self, obs_dim=4):
        self.obs = np.zeros(obs_dim) + 0.3

    def new_episode(self):
        return ZeroRewardEnv(self.obs), self.obs


def batch_from_rollout(n=32, obs_dim=4, seed=0):
    rng = np.random.default_rng(seed)
    return (
        rng.standard_normal((n, obs_dim)),
        rng.standard_normal(n),
        rng.standard_normal(n) - 1.5,
        rng.standard_normal(n),
        rng.standard_normal(n),
    )


def test_gradients_match_finite_differences():
    policy = PolicyNetwork.init(4, seed=1)
    obs, actions, logp_old, adv, rets = batch_from_rollout()
    cfg = PPOConfig(ent_coef=0.01)
    _, analytic = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
    eps = 1e-6
    for name, p in policy.params.items():
        flat = p.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + eps
            sp, _ = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
            flat[j] = orig - eps
            sm, _ = ppo.loss_and_grads(policy, obs, actions, logp_old, adv, rets, cfg)
            flat[j] = orig
            numeric = (sp["total"] - sm["total"]) / (2 * eps)
            assert analytic[name].reshape(-1)[j] == pytest.approx(numeric, rel=1e-4, abs=1e-7)


def test_gae_matches_reference():
    cfg = PPOConfig()
    rng = np.random.default_rng(2)
    batch = ppo.collect_rollouts(BanditProvider(), PolicyNetwork.init(4, seed=0), 64, rng, cfg)
    # one-step episodes: every transition is terminal, so GAE reduces to r - V
    np.testing.assert_allclose(batch.advantages, batch.rewards - batch.values)
    np.testing.assert_allclose(batch.returns, batch.rewards)
    assert batch.dones.all()


def test_gae_multistep_reference():
    # hand-rolled discounted-delta recursion as the oracle
    cfg = PPOConfig(gamma=0.9, gae_lambda=0.8)
    rng = np.random.default_rng(3)
    batch = ppo.collect_rollouts(ZeroProvider(), PolicyNetwork.init(4, seed=4), 23, rng, cfg)
    n = len(batch.rewards)
    expected = np.zeros(n)
    gae = 0.0
    next_v = batch.values[-1] if not batch.dones[-1] else 0.0
    # recompute next_v exactly as the collector: value of obs after last step
    _, v_after = ppo.forward(PolicyNetwork.init(4, seed=4), ZeroProvider().obs[None, :])
    next_v = float(v_after[0])
    for t in range(n - 1, -1, -1):
        nonterm = 0.0 if batch.dones[t] else 1.0
        delta = batch.rewards[t] + cfg.gamma * next_v * nonterm - batch.values[t]
        gae = delta + cfg.gamma * cfg.gae_lambda * nonterm * gae
        expected[t] = gae
        next_v = batch.values[t]
    np.testing.assert_allclose(batch.advantages, expected)


def test_zero_rewards_leave_policy_unchanged():
    cfg = PPOConfig()
    rng = np.random.default_rng(5)
    policy = PolicyNetwork.init(4, seed=6)
    before = {k: v.copy() for k, v in policy.params.items()}
    batch = ppo.collect_rollouts(ZeroProvider(), policy, 40, rng, cfg)
    assert (batch.advantages == 0).all()
    ppo.update(policy, batch, cfg)
    for k in before:
        np.testing.assert_array_equal(policy.params[k], before[k])


def test_act_clamps_to_action_range():
    policy = PolicyNetwork.init(4, seed=0)
    policy.params["bmu"][:] = 50.0
    action, raw, _ = ppo.act(policy, np.zeros(4), np.random.default_rng(0))
    assert action == 1.0
    assert raw > 1.0


def test_act_deterministic_without_rng():
    policy = PolicyNetwork.init(4, seed=0)
    obs = np.random.default_rng(1).standard_normal(4)
    a1, raw1, lp1 = ppo.act(policy, obs)
    a2, raw2, lp2 = ppo.act(policy, obs)
    assert (a1, raw1, lp1) == (a2, raw2, lp2)


def test_update_improves_bandit_reward():
    cfg = PPOConfig(rollout_steps=256, minibatch=64)
    result = ppo.train(BanditProvider(), obs_dim=4, total_steps=4096, seed=0, config=cfg)
    first, last = result.curve[0]["mean_reward"], result.curve[-1]["mean_reward"]
    assert last > first
    action, _, _ = ppo.act(result.policy, BanditProvider().obs)
    assert action == pytest.approx(0.5, abs=0.15)  # deterministic mean near optimum


def test_training_deterministic():
    cfg = PPOConfig(rollout_steps=128)
    r1 = ppo.train(BanditProvider(), obs_dim=4, total_steps=256, seed=3, config=cfg)
    r2 = ppo.train(BanditProvider(), obs_dim=4, total_steps=256, seed=3, config=cfg)
    for k in r1.policy.params:
        np.testing.assert_array_equal(r1.policy.params[k], r2.policy.params[k])
    assert [p["mean_reward"] for p in r1.curve] == [p["mean_reward"] for p in r2.curve]


def test_empty_batch_rejected():
    policy = PolicyNetwork.init(4, seed=0)
    batch = ppo.RolloutBatch(
        observations=np.zeros((0, 4)), actions=np.zeros(0), log_probs=np.zeros(0),
        rewards=np.zeros(0), values=np.zeros(0), dones=np.zeros(0, dtype=bool),
        advantages=np.zeros(0), returns=np.zeros(0), episode_rewards=[],
    )
    with pytest.raises(ValueError):
        ppo.update(policy, batch)


def test_checkpoint_round_trip(tmp_path):
    policy = PolicyNetwork.init(6, seed=9)
    path = tmp_path / "policy.ckpt"
    policy.save(path)
    loaded = PolicyNetwork.load(path)
    assert loaded.obs_dim == 6
    obs = np.random.default_rng(0).standard_normal((3, 6))
    mu1, v1 = ppo.forward(policy, obs)
    mu2, v2 = ppo.forward(loaded, obs)
    np.testing.assert_array_equal(mu1, mu2)
    np.testing.assert_array_equal(v1, v2)


def test_curve_csv(tmp_path):
    curve = [
        {"step": 10.0, "mean_reward": 0.1, "policy_loss": -0.01, "value_loss": 0.5, "wall_seconds": 1.0},
        {"step": 20.0, "mean_reward": 0.4, "policy_loss": -0.02, "value_loss": 0.3, "wall_seconds": 2.0},
    ]
    path = tmp_path / "curve.csv"
    ppo.write_curve_csv(curve, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("step,mean_reward")
    assert len(lines) == 3


def test_convergence_time():
    def pt(step, r, t):
        return {"step": step, "mean_reward": r, "policy_loss": 0.0, "value_loss": 0.0, "wall_seconds": t}

    rising = [pt(i, min(i / 5.0, 1.0), float(i)) for i in range(1, 21)]
    t = ppo.convergence_time(rising, window=1)
    assert 4.0 <= t <= 6.0
    assert ppo.convergence_time([]) == 0.0
