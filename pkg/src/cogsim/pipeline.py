"""Glue between dataset records, transfer models, environments, and agents."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import ddm, ppo, reasoner, transfer
from .data import TrialRecord
from .envs import EpisodeContext, EpisodeRecord, HybridEnv, PureEnv, PureTrial

log = logging.getLogger(__name__)


def transfer_inputs(
    model: reasoner.ReasonerModel, records: list[TrialRecord]
) -> list[transfer.TransferInput]:
    """Reasoner features + trial index for each record, batched for speed."""
    from .taskgen import encode

    encoded = np.stack([encode(r.question) for r in records])
    feats = reasoner.extract_features_batch(model, encoded)
    return [
        transfer.TransferInput(features=feats[i], question_id=r.trial_index)
        for i, r in enumerate(records)
    ]


def fit_transfer(
    model: reasoner.ReasonerModel, train_records: list[TrialRecord], seed: int = 0
) -> tuple[transfer.ChoiceModel, transfer.RtModel]:
    inputs = transfer_inputs(model, train_records)
    choice_rows = [(inp, r.human_choice) for inp, r in zip(inputs, train_records)]
    rt_rows = [(inp, r.rt_seconds) for inp, r in zip(inputs, train_records)]
    return transfer.fit_classifier(choice_rows, seed=seed), transfer.fit_regressor(rt_rows)


def baseline_predictions(
    model: reasoner.ReasonerModel,
    choice_model: transfer.ChoiceModel,
    rt_model: transfer.RtModel,
    records: list[TrialRecord],
) -> list[transfer.BaselinePrediction]:
    inputs = transfer_inputs(model, records)
    choices, probs = transfer.predict_choice(choice_model, inputs)
    rts = transfer.predict_rt(rt_model, inputs)
    return [
        transfer.BaselinePrediction(choice=bool(choices[i]), r_p=float(probs[i]), r_t=float(rts[i]))
        for i in range(len(records))
    ]


def make_contexts(
    records: list[TrialRecord],
    baselines: list[transfer.BaselinePrediction],
    lam: float = 0.5,
    f: int = 5,
    steepness: float = ddm.DEFAULT_STEEPNESS,
) -> list[EpisodeContext]:
    return [
        EpisodeContext(
            trial=r,
            baseline=b,
            trajectory=ddm.build_trajectory(b.r_p, b.r_t, f, steepness),
            lam=lam,
            f=f,
            r_u=r.rt_seconds,
        )
        for r, b in zip(records, baselines)
    ]


@dataclass
class HybridProvider:
    """Cycles through episode contexts in a seeded shuffled order."""

    contexts: list[EpisodeContext]
    seed: int = 0

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        self._order: list[int] = []
        self._env = HybridEnv()

    def new_episode(self):
        if not self._order:
            self._order = list(self._rng.permutation(len(self.contexts)))
        ctx = self.contexts[self._order.pop()]
        return self._env, self._env.reset(ctx)


@dataclass
class PureProvider:
    """Serves seeded shuffled chunks of at most 60 trials per episode."""

    trials: list[PureTrial]
    seed: int = 0
    feature_dim: int = 128

    def __post_init__(self) -> None:
        self._rng = np.random.default_rng(self.seed)
        from .envs import DeterministicProjectionExtractor

        self._env = PureEnv(extractor=DeterministicProjectionExtractor(dim=self.feature_dim))
        self.observation_dim = self._env.observation_dim

    def new_episode(self):
        idx = self._rng.permutation(len(self.trials))[: PureEnv.max_trials]
        chunk = [self.trials[i] for i in idx]
        return self._env, self._env.reset(chunk)


def rollout_hybrid(policy: ppo.PolicyNetwork, ctx: EpisodeContext) -> EpisodeRecord:
    """One deterministic (mean-action) episode; returns its record."""
    env = HybridEnv()
    obs = env.reset(ctx)
    done = False
    reward = 0.0
    while not done:
        action, _, _ = ppo.act(policy, obs)
        obs, reward, done, _ = env.step(action)
    return env.record(reward)


def simulate_hybrid(
    policy: ppo.PolicyNetwork, contexts: list[EpisodeContext]
) -> list[EpisodeRecord]:
    return [rollout_hybrid(policy, ctx) for ctx in contexts]


def simulate_pure(
    policy: ppo.PolicyNetwork, trials: list[PureTrial], feature_dim: int = 128
) -> list[float]:
    """Deterministic per-trial response-time predictions from a Pure policy."""
    from .envs import DeterministicProjectionExtractor, RT_MAX

    env = PureEnv(extractor=DeterministicProjectionExtractor(dim=feature_dim))
    out = []
    for t in trials:
        obs = env.reset([t])
        action, _, _ = ppo.act(policy, obs)
        _, _, _, info = env.step(action)
        out.append(float(np.clip(info["r_rl"], 0.2, RT_MAX)))
    return out


def pure_trials(
    records: list[TrialRecord], baselines: list[transfer.BaselinePrediction]
) -> list[PureTrial]:
    return [
        PureTrial(trial=r, baseline=b, r_u=r.rt_seconds) for r, b in zip(records, baselines)
    ]
