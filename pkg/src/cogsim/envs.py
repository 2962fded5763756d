"""Episodic environments for policy training.

Hybrid: one step per stimulus frame; the action biases the evidence
accumulator around the precomputed sigmoid trajectory, and the episode ends
when the accumulator reaches the boundary or the 50-step cap.

Pure: one step per trial; the action offsets the baseline response time
directly, with the whole stimulus video summarized by a pluggable
deterministic feature extractor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ddm import EvidenceTrajectory, START_POINT
from .stimuli import frame_sequence, render_frame
from .taskgen import encode
from .data import TrialRecord
from .transfer import BaselinePrediction

RT_MAX = 10.0
EPS_E_SVM = 1e-6
QUESTION_DIM = 11 * 17
FRAME_DIM = 100 * 12


@dataclass(frozen=True)
class EpisodeContext:
    """Everything one Hybrid episode needs, precomputed from a dataset trial."""

    trial: TrialRecord
    baseline: BaselinePrediction
    trajectory: EvidenceTrajectory
    lam: float = 0.5
    f: int = 5
    r_u: float | None = None  # real response time; required for rewards

    @property
    def n_max(self) -> int:
        return int(RT_MAX) * self.f


@dataclass
class EpisodeRecord:
    trial_id: str
    actions: list[float]
    steps_taken: int
    r_rl: float
    reward: float
    effect_trajectory: np.ndarray  # delta_p * cumsum(actions)

    def csv_row(self) -> list[str]:
        return [
            self.trial_id,
            str(self.steps_taken),
            repr(self.r_rl),
            repr(self.reward),
            ";".join(f"{a:.6f}" for a in self.actions),
        ]


def reward_time_match(r_rl: float, r_u: float, r_svm: float, penalty: bool) -> float:
    """Terminal reward: relative improvement over the kernel-regressor error.

    Positive only when the policy's response-time error beats the baseline
    predictor's; an episode that overran the step cap pays a flat -1.
    """
    if r_u <= 0:
        raise ValueError(f"real response time must be positive: {r_u}")
    if r_svm <= 0:
        raise ValueError(f"baseline response time must be positive: {r_svm}")
    e_rl = abs(r_rl - r_u) / r_u
    e_svm = max(abs(r_svm - r_u) / r_u, EPS_E_SVM)
    base = (e_svm - e_rl) / e_svm if e_rl < e_svm else 0.0
    return base + (-1.0 if penalty else 0.0)


class HybridEnv:
    """Frame-level environment; one instance owns one episode at a time."""

    observation_dim = QUESTION_DIM + FRAME_DIM
    action_low = -1.0
    action_high = 1.0

    def __init__(self) -> None:
        self.ctx: EpisodeContext | None = None
        self._i = 0
        self._bias = 0.0
        self._actions: list[float] = []
        self._done = True
        self._question_flat: np.ndarray | None = None
        self._obs_cache: dict[int, np.ndarray] = {}

    def reset(self, ctx: EpisodeContext) -> np.ndarray:
        self.ctx = ctx
        self._i = 0
        self._bias = 0.0
        self._actions = []
        self._done = False
        self._question_flat = encode(ctx.trial.question).reshape(-1)
        self._obs_cache: dict[int, np.ndarray] = {}
        return self._observation()

    def _observation(self) -> np.ndarray:
        assert self.ctx is not None and self._question_flat is not None
        # at most six distinct observations per episode (bar fill states)
        frame = render_frame(self._i / self.ctx.f, self.ctx.trial.pressure_shown)
        obs = self._obs_cache.get(frame.filled_units)
        if obs is None:
            obs = np.concatenate([self._question_flat, frame.flat()])
            obs.setflags(write=False)
            self._obs_cache[frame.filled_units] = obs
        return obs

    def step(self, action: float) -> tuple[np.ndarray, float, bool, dict]:
        if self._done or self.ctx is None:
            raise RuntimeError("step() called on a finished episode; reset() first")
        ctx = self.ctx
        # scalar clamp; np.clip is surprisingly slow on Python floats
        a = min(max(float(action), self.action_low), self.action_high)
        self._actions.append(a)
        self._i += 1
        self._bias += a * ctx.lam * ctx.trajectory.delta_p
        traj = ctx.trajectory
        accumulator = traj.values[min(self._i, traj.n_steps)] + self._bias
        info: dict = {}
        reward = 0.0
        if accumulator >= traj.r_p:
            self._done = True
            r_rl = self._i / ctx.f
            info["r_rl"] = r_rl
            if ctx.r_u is not None:
                reward = reward_time_match(r_rl, ctx.r_u, ctx.baseline.r_t, penalty=False)
        elif self._i >= ctx.n_max:
            self._done = True
            r_rl = RT_MAX
            info["r_rl"] = r_rl
            if ctx.r_u is not None:
                reward = reward_time_match(r_rl, ctx.r_u, ctx.baseline.r_t, penalty=True)
        return self._observation(), reward, self._done, info

    def record(self, reward: float) -> EpisodeRecord:
        """EpisodeRecord for the just-finished episode."""
        assert self.ctx is not None and self._done
        actions = np.array(self._actions)
        return EpisodeRecord(
            trial_id=f"{self.ctx.trial.participant_id}:{self.ctx.trial.trial_index}",
            actions=list(self._actions),
            steps_taken=self._i,
            r_rl=min(self._i / self.ctx.f, RT_MAX) if self._i < self.ctx.n_max else RT_MAX,
            reward=reward,
            effect_trajectory=self.ctx.trajectory.delta_p * np.cumsum(actions),
        )


class DeterministicProjectionExtractor:
    """Fixed seeded random projection standing in for a pretrained image net."""

    def __init__(self, dim: int = 128, seed: int = 1234) -> None:
        self.dim = dim
        rng = np.random.default_rng(seed)
        self._w = rng.standard_normal((FRAME_DIM, dim)) / np.sqrt(FRAME_DIM)

    def __call__(self, frame_flat: np.ndarray) -> np.ndarray:
        return np.tanh(frame_flat @ self._w)


def extract_video_features(frames: list, extractor) -> np.ndarray:
    """Per-frame feature rows for a 25-frame stimulus video."""
    if len(frames) != 25:
        raise ValueError(f"expected 25 frames, got {len(frames)}")
    return np.stack([extractor(f.flat()) for f in frames])


@dataclass(frozen=True)
class PureTrial:
    trial: TrialRecord
    baseline: BaselinePrediction
    r_u: float


class PureEnv:
    """Trial-level environment: one action per trial, at most 60 trials/episode."""

    max_trials = 60
    action_low = -1.0
    action_high = 1.0

    def __init__(self, extractor=None, video_seconds: float = 5.0, f: int = 5) -> None:
        self.extractor = extractor or DeterministicProjectionExtractor()
        self.video_seconds = video_seconds
        self.f = f
        self.observation_dim = QUESTION_DIM + 25 * self.extractor.dim
        self._trials: list[PureTrial] = []
        self._cursor = 0
        self._done = True

    def reset(self, trials: list[PureTrial]) -> np.ndarray:
        if not trials:
            raise ValueError("empty trial list")
        self._trials = trials
        self._cursor = 0
        self._done = False
        return self._observation()

    def _observation(self) -> np.ndarray:
        t = self._trials[self._cursor]
        frames = frame_sequence(self.video_seconds, self.f, t.trial.pressure_shown)
        feats = extract_video_features(frames, self.extractor)
        return np.concatenate([encode(t.trial.question).reshape(-1), feats.reshape(-1)])

    def step(self, r_delta: float) -> tuple[np.ndarray, float, bool, dict]:
        if self._done:
            raise RuntimeError("step() called on a finished episode; reset() first")
        t = self._trials[self._cursor]
        r_delta = min(max(float(r_delta), self.action_low), self.action_high)
        r_rl = t.baseline.r_t + r_delta * RT_MAX
        out_of_range = r_rl < 0 or r_rl > RT_MAX
        reward = reward_time_match(r_rl, t.r_u, t.baseline.r_t, penalty=out_of_range)
        self._cursor += 1
        if out_of_range or self._cursor >= min(self.max_trials, len(self._trials)):
            self._done = True
            obs = np.zeros(self.observation_dim)
        else:
            obs = self._observation()
        return obs, reward, self._done, {"r_rl": r_rl}
