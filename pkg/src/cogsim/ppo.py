"""Clipped-surrogate policy-gradient trainer with an actor-critic MLP.

The policy is a Gaussian over a 1-d action: a shared two-layer tanh trunk
(64 units each) feeds an action-mean head and a scalar value head, with a
learnable log standard deviation. Gradients are written out analytically so
they can be verified against finite differences.
"""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from . import checkpoint
from .optim import Adam

log = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class PPOConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    lr: float = 3e-4
    update_epochs: int = 10
    minibatch: int = 64
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    rollout_steps: int = 1024
    init_log_std: float = -0.5


@dataclass
class PolicyNetwork:
    obs_dim: int
    seed: int
    params: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def init(cls, obs_dim: int, seed: int, init_log_std: float = -0.5) -> PolicyNetwork:
        rng = np.random.default_rng(seed)

        def layer(n_in: int, n_out: int) -> np.ndarray:
            return rng.uniform(-1, 1, size=(n_in, n_out)) / np.sqrt(n_in)

        params = {
            "W1": layer(obs_dim, 64), "b1": np.zeros(64),
            "W2": layer(64, 64), "b2": np.zeros(64),
            "Wmu": layer(64, 1) * 0.01, "bmu": np.zeros(1),
            # Zero-init value head: a fresh policy values every state at 0,
            # so GAE of an all-zero reward stream is exactly zero.
            "Wv": np.zeros((64, 1)), "bv": np.zeros(1),
            "log_std": np.array([init_log_std]),
        }
        return cls(obs_dim=obs_dim, seed=seed, params=params)

    def save(self, path: str | Path) -> None:
        checkpoint.save(path, "policy", {"obs_dim": self.obs_dim, "seed": self.seed}, self.params)

    @classmethod
    def load(cls, path: str | Path) -> PolicyNetwork:
        meta, arrays = checkpoint.load(path, expect_kind="policy")
        return cls(obs_dim=int(meta["obs_dim"]), seed=int(meta["seed"]), params=arrays)


def _trunk(params: dict[str, np.ndarray], obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h1 = np.tanh(obs @ params["W1"] + params["b1"])
    h2 = np.tanh(h1 @ params["W2"] + params["b2"])
    return h1, h2


def forward(policy: PolicyNetwork, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(action mean, value) for a batch of observations."""
    _, h2 = _trunk(policy.params, obs)
    mu = (h2 @ policy.params["Wmu"] + policy.params["bmu"])[:, 0]
    v = (h2 @ policy.params["Wv"] + policy.params["bv"])[:, 0]
    return mu, v


def act(
    policy: PolicyNetwork, obs: np.ndarray, rng: np.random.Generator | None = None
) -> tuple[float, float, float]:
    """(env action in [-1, 1], raw sampled action, log-prob); mean if rng is None."""
    mu, _ = forward(policy, obs[None, :])
    std = float(np.exp(policy.params["log_std"][0]))
    if rng is None:
        raw = float(mu[0])
    else:
        raw = float(mu[0] + std * rng.standard_normal())
    logp = -0.5 * ((raw - float(mu[0])) / std) ** 2 - np.log(std) - 0.5 * LOG_2PI
    return float(np.clip(raw, -1.0, 1.0)), raw, float(logp)


@dataclass
class RolloutBatch:
    observations: np.ndarray
    actions: np.ndarray  # raw (unclamped) samples, log-prob basis
    log_probs: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    dones: np.ndarray
    advantages: np.ndarray
    returns: np.ndarray
    episode_rewards: list[float]


class EpisodeProvider(Protocol):
    """Supplies fresh episodes to the rollout collector."""

    def new_episode(self):  # returns (env, first observation)
        ...


def collect_rollouts(
    provider: EpisodeProvider,
    policy: PolicyNetwork,
    n_steps: int,
    rng: np.random.Generator,
    config: PPOConfig = PPOConfig(),
) -> RolloutBatch:
    """Step environments for n_steps transitions and attach GAE estimates."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    obs_buf, act_buf, logp_buf, rew_buf, val_buf, done_buf = [], [], [], [], [], []
    episode_rewards: list[float] = []
    env, obs = provider.new_episode()
    ep_reward = 0.0
    for _ in range(n_steps):
        action, raw, logp = act(policy, obs, rng)
        _, value = forward(policy, obs[None, :])
        next_obs, reward, done, _ = env.step(action)
        obs_buf.append(obs)
        act_buf.append(raw)
        logp_buf.append(logp)
        rew_buf.append(reward)
        val_buf.append(float(value[0]))
        done_buf.append(done)
        ep_reward += reward
        if done:
            episode_rewards.append(ep_reward)
            ep_reward = 0.0
            env, obs = provider.new_episode()
        else:
            obs = next_obs
    # Bootstrap the value of the observation after the last stored transition.
    _, last_value = forward(policy, obs[None, :])
    rewards = np.array(rew_buf)
    values = np.array(val_buf)
    dones = np.array(done_buf, dtype=bool)
    advantages = np.zeros(n_steps)
    gae = 0.0
    next_value = float(last_value[0])
    for t in range(n_steps - 1, -1, -1):
        nonterminal = 0.0 if dones[t] else 1.0
        delta = rewards[t] + config.gamma * next_value * nonterminal - values[t]
        gae = delta + config.gamma * config.gae_lambda * nonterminal * gae
        advantages[t] = gae
        next_value = values[t]
    return RolloutBatch(
        observations=np.stack(obs_buf),
        actions=np.array(act_buf),
        log_probs=np.array(logp_buf),
        rewards=rewards,
        values=values,
        dones=dones,
        advantages=advantages,
        returns=advantages + values,
        episode_rewards=episode_rewards,
    )


def loss_and_grads(
    policy: PolicyNetwork,
    obs: np.ndarray,
    actions: np.ndarray,
    logp_old: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    config: PPOConfig = PPOConfig(),
) -> tuple[dict[str, float], dict[str, np.ndarray]]:
    """Clipped-surrogate + value + entropy loss with analytic gradients."""
    p = policy.params
    n = obs.shape[0]
    h1 = np.tanh(obs @ p["W1"] + p["b1"])
    h2 = np.tanh(h1 @ p["W2"] + p["b2"])
    mu = (h2 @ p["Wmu"] + p["bmu"])[:, 0]
    v = (h2 @ p["Wv"] + p["bv"])[:, 0]
    log_std = p["log_std"][0]
    std = np.exp(log_std)

    z = (actions - mu) / std
    logp = -0.5 * z**2 - log_std - 0.5 * LOG_2PI
    ratio = np.exp(logp - logp_old)
    clipped = np.clip(ratio, 1.0 - config.clip, 1.0 + config.clip)
    surr1 = ratio * advantages
    surr2 = clipped * advantages
    policy_loss = -float(np.mean(np.minimum(surr1, surr2)))
    value_loss = float(np.mean((v - returns) ** 2))
    entropy = float(log_std + 0.5 * (LOG_2PI + 1.0))
    total = policy_loss + config.vf_coef * value_loss - config.ent_coef * entropy
    if not np.isfinite(total):
        raise FloatingPointError(f"non-finite loss (policy={policy_loss}, value={value_loss})")

    # d(policy_loss)/d(logp): active only where the unclipped branch is the min.
    unclipped_active = surr1 <= surr2
    dlogp = np.where(unclipped_active, -ratio * advantages, 0.0) / n
    dmu = dlogp * z / std
    dlog_std = float(np.sum(dlogp * (z**2 - 1.0))) - config.ent_coef
    dv = 2.0 * config.vf_coef * (v - returns) / n

    dh2 = dmu[:, None] @ p["Wmu"].T + dv[:, None] @ p["Wv"].T
    dz2 = dh2 * (1.0 - h2**2)
    dh1 = dz2 @ p["W2"].T
    dz1 = dh1 * (1.0 - h1**2)
    grads = {
        "Wmu": h2.T @ dmu[:, None], "bmu": np.array([dmu.sum()]),
        "Wv": h2.T @ dv[:, None], "bv": np.array([dv.sum()]),
        "W2": h1.T @ dz2, "b2": dz2.sum(axis=0),
        "W1": obs.T @ dz1, "b1": dz1.sum(axis=0),
        "log_std": np.array([dlog_std]),
    }
    stats = {"policy_loss": policy_loss, "value_loss": value_loss, "entropy": entropy, "total": total}
    return stats, grads


def update(
    policy: PolicyNetwork,
    batch: RolloutBatch,
    config: PPOConfig = PPOConfig(),
    opt: Adam | None = None,
    rng: np.random.Generator | None = None,
) -> dict[str, float]:
    """Several epochs of minibatch gradient ascent on the clipped objective."""
    n = len(batch.actions)
    if n == 0:
        raise ValueError("empty batch")
    adv = batch.advantages
    if n > 1 and adv.std() > 0:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    opt = opt or Adam(policy.params, config.lr)
    rng = rng or np.random.default_rng(0)
    last_stats: dict[str, float] = {}
    for _ in range(config.update_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch):
            idx = order[start : start + config.minibatch]
            stats, grads = loss_and_grads(
                policy,
                batch.observations[idx],
                batch.actions[idx],
                batch.log_probs[idx],
                adv[idx],
                batch.returns[idx],
                config,
            )
            opt.step(policy.params, grads)
            last_stats = stats
    return last_stats


@dataclass
class TrainResult:
    policy: PolicyNetwork
    curve: list[dict[str, float]]  # per-rollout: step, mean_reward, losses, wall time
    wall_seconds: float


def train(
    provider: EpisodeProvider,
    obs_dim: int,
    total_steps: int,
    seed: int = 0,
    config: PPOConfig = PPOConfig(),
    eval_hook: Callable[[PolicyNetwork, int], None] | None = None,
) -> TrainResult:
    """Alternate rollout collection and updates until total_steps are consumed."""
    policy = PolicyNetwork.init(obs_dim, seed, config.init_log_std)
    if total_steps < 1:
        return TrainResult(policy=policy, curve=[], wall_seconds=0.0)
    opt = Adam(policy.params, config.lr)
    rng = np.random.default_rng(seed)
    curve: list[dict[str, float]] = []
    consumed = 0
    t0 = time.monotonic()
    while consumed < total_steps:
        n = min(config.rollout_steps, total_steps - consumed)
        batch = collect_rollouts(provider, policy, n, rng, config)
        stats = update(policy, batch, config, opt, rng)
        consumed += n
        mean_reward = float(np.mean(batch.episode_rewards)) if batch.episode_rewards else 0.0
        point = {
            "step": float(consumed),
            "mean_reward": mean_reward,
            "policy_loss": stats["policy_loss"],
            "value_loss": stats["value_loss"],
            "wall_seconds": time.monotonic() - t0,
        }
        curve.append(point)
        log.info("steps %d mean_reward %.4f", consumed, mean_reward)
        if eval_hook is not None:
            eval_hook(policy, consumed)
    return TrainResult(policy=policy, curve=curve, wall_seconds=time.monotonic() - t0)


def write_curve_csv(curve: list[dict[str, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "mean_reward", "policy_loss", "value_loss", "wall_seconds"])
        for pt in curve:
            w.writerow([int(pt["step"]), pt["mean_reward"], pt["policy_loss"], pt["value_loss"], pt["wall_seconds"]])


def convergence_time(curve: list[dict[str, float]], window: int = 5, frac: float = 0.95) -> float:
    """Wall-clock seconds until the smoothed reward first reaches frac of its
    final plateau (relative to the curve's starting level)."""
    if not curve:
        return 0.0
    rewards = np.array([pt["mean_reward"] for pt in curve])
    kernel = np.ones(min(window, len(rewards))) / min(window, len(rewards))
    smooth = np.convolve(rewards, kernel, mode="valid")
    final = smooth[-1]
    start = smooth[0]
    target = start + frac * (final - start)
    for i, v in enumerate(smooth):
        if (final >= start and v >= target) or (final < start and v <= target):
            return curve[min(i + len(rewards) - len(smooth), len(curve) - 1)]["wall_seconds"]
    return curve[-1]["wall_seconds"]
