"""Split strategies, error metrics, and trajectory analytics."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import TrialRecord
from .envs import EpisodeRecord

log = logging.getLogger(__name__)

STRATEGIES = ("general", "group", "individual", "lopo")
MIN_RECORDS_PER_PARTICIPANT = 5


@dataclass(frozen=True)
class SplitSpec:
    strategy: str
    seed: int = 0
    test_fraction: float = 0.2

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown split strategy {self.strategy!r}")
        if not (0 < self.test_fraction < 1):
            raise ValueError(f"test_fraction must lie in (0, 1): {self.test_fraction}")


def _holdout(records: list[TrialRecord], rng: np.random.Generator, frac: float):
    idx = rng.permutation(len(records))
    n_test = max(1, round(len(records) * frac))
    test = [records[i] for i in idx[:n_test]]
    train = [records[i] for i in idx[n_test:]]
    return train, test


def _by(records: list[TrialRecord], key) -> dict[str, list[TrialRecord]]:
    out: dict[str, list[TrialRecord]] = {}
    for r in records:
        out.setdefault(key(r), []).append(r)
    return out


def split(records: list[TrialRecord], spec: SplitSpec) -> list[tuple[list[TrialRecord], list[TrialRecord]]]:
    """Train/test folds per the requested strategy.

    general: one seeded 80/20 shuffle over everything. group / individual:
    80/20 within each group / participant, merged into one fold. lopo: one
    fold per participant with training data from same-group others.
    """
    if not records:
        raise ValueError("no records to split")
    by_participant = _by(records, lambda r: r.participant_id)
    small = [p for p, rs in by_participant.items() if len(rs) < MIN_RECORDS_PER_PARTICIPANT]
    if small:
        log.warning("excluding participants with < %d records: %s", MIN_RECORDS_PER_PARTICIPANT, small)
        records = [r for r in records if r.participant_id not in set(small)]
        by_participant = _by(records, lambda r: r.participant_id)
    rng = np.random.default_rng(spec.seed)
    if spec.strategy == "general":
        return [_holdout(records, rng, spec.test_fraction)]
    if spec.strategy == "group":
        train, test = [], []
        for _, rs in sorted(_by(records, lambda r: r.group).items()):
            tr, te = _holdout(rs, rng, spec.test_fraction)
            train.extend(tr)
            test.extend(te)
        return [(train, test)]
    if spec.strategy == "individual":
        train, test = [], []
        for _, rs in sorted(by_participant.items()):
            tr, te = _holdout(rs, rng, spec.test_fraction)
            train.extend(tr)
            test.extend(te)
        return [(train, test)]
    # lopo
    by_group = _by(records, lambda r: r.group)
    folds = []
    for pid, rs in sorted(by_participant.items()):
        group = rs[0].group
        train = [r for r in by_group[group] if r.participant_id != pid]
        folds.append((train, rs))
    return folds


def mape(pred: list[float], truth: list[float]) -> float:
    """Mean absolute percentage error."""
    if len(pred) != len(truth) or not pred:
        raise ValueError("pred and truth must be equal-length and nonempty")
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if (t <= 0).any():
        raise ValueError("truth values must be positive")
    return float(np.mean(np.abs(p - t) / t))


def pearson(x: list[float], y: list[float]) -> float:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if len(xa) != len(ya) or len(xa) < 2:
        raise ValueError("need two equal-length sequences of length >= 2")
    if xa.std() == 0 or ya.std() == 0:
        raise ValueError("zero variance input")
    return float(np.corrcoef(xa, ya)[0, 1])


@dataclass(frozen=True)
class TrajectoryStats:
    mean_effect: float  # per-episode mean of the effect trajectory, averaged
    action_std: float  # population std over all actions
    mean_slope: float


def episode_slope(ep: EpisodeRecord) -> float:
    """(last effect - first effect) / (steps - 1); 0 for single-step episodes."""
    if ep.steps_taken < 2:
        return 0.0
    eff = ep.effect_trajectory
    return float((eff[-1] - eff[0]) / (ep.steps_taken - 1))


def trajectory_stats(episodes: list[EpisodeRecord]) -> TrajectoryStats:
    """Within-episode means first, then averaged across episodes."""
    if not episodes:
        raise ValueError("no episodes")
    mean_effects = [float(np.mean(ep.effect_trajectory)) for ep in episodes]
    all_actions = np.concatenate([np.asarray(ep.actions) for ep in episodes])
    return TrajectoryStats(
        mean_effect=float(np.mean(mean_effects)),
        action_std=float(all_actions.std()),  # population std
        mean_slope=float(np.mean([episode_slope(ep) for ep in episodes])),
    )


def write_fold_results_csv(rows: list[dict], path: str | Path) -> None:
    """Per-fold metric table: fold, participant, group, mape, pearson."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["fold", "participant", "group", "mape", "pearson"])
        w.writeheader()
        w.writerows(rows)


def write_group_summary_json(summary: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)


def write_chronological_csv(
    rows: list[tuple[str, int, float, float]], path: str | Path
) -> None:
    """participant, trial_index, predicted rt, true rt — for trend plots."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["participant_id", "trial_index", "predicted_rt", "true_rt"])
        w.writerows(rows)
