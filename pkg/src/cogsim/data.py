"""Trial-record schema, CSV ingestion/validation, and synthetic participants.

The synthetic generator is a known-ground-truth oracle: response times follow
an explicit formula over question hardness and pressure exposure, so recovery
tests can check the pipeline end to end without human data.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import controller as ctl
from .taskgen import MathQuestion, answer, is_divisible, random_question

GROUPS = ("none", "static", "random", "rule")

COLUMNS = [
    "participant_id", "group", "day", "trial_index", "num1", "num2", "num3",
    "pressure_shown", "human_choice", "correct", "rt_seconds", "attention", "anxiety",
]


@dataclass(frozen=True)
class TrialRecord:
    participant_id: str
    group: str
    day: int
    trial_index: int
    question: MathQuestion
    pressure_shown: bool
    human_choice: bool
    correct: bool
    rt_seconds: float
    attention: int | None = None
    anxiety: int | None = None


@dataclass(frozen=True)
class SynthProfile:
    """Generative parameters for one synthetic participant."""

    base_rt: float = 2.5
    hardness_weight: float = 1.0  # w1
    pressure_weight: float = -0.5  # w2
    noise_sd: float = 0.1
    accuracy_floor: float = 0.85


def hardness(q: MathQuestion) -> float:
    """Monotone difficulty proxy in [0, 1.4]."""
    return (abs(q.num1 - q.num2) % 10) / 10 + (0.0 if answer(q) == 0 else 0.5)


def validate(rec: TrialRecord) -> list[str]:
    """Row-level invariant violations; empty when the record is consistent."""
    problems = []
    if rec.group not in GROUPS:
        problems.append(f"unknown group {rec.group!r}")
    if rec.day not in (1, 2):
        problems.append(f"day must be 1 or 2, got {rec.day}")
    if rec.trial_index < 1:
        problems.append(f"trial_index must be >= 1, got {rec.trial_index}")
    if not (0 < rec.rt_seconds <= 10):
        problems.append(f"rt {rec.rt_seconds} outside (0, 10]")
    if rec.group == "none" and rec.pressure_shown:
        problems.append("none-group trial with pressure shown")
    if rec.group == "static" and not rec.pressure_shown:
        problems.append("static-group trial without pressure")
    if rec.correct != (rec.human_choice == is_divisible(rec.question)):
        problems.append("correct flag inconsistent with choice and question")
    for name, v in (("attention", rec.attention), ("anxiety", rec.anxiety)):
        if v is not None and not (1 <= v <= 7):
            problems.append(f"{name} rating {v} outside 1-7")
    return problems


def write_csv(records: list[TrialRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in records:
            w.writerow(_row(r))


def _row(r: TrialRecord) -> list:
    return [
        r.participant_id, r.group, r.day, r.trial_index,
        r.question.num1, r.question.num2, r.question.num3,
        int(r.pressure_shown), int(r.human_choice), int(r.correct),
        repr(r.rt_seconds),
        "" if r.attention is None else r.attention,
        "" if r.anxiety is None else r.anxiety,
    ]


def csv_row_strings(r: TrialRecord) -> list[str]:
    """One record as schema-ordered strings (used by the session export)."""
    return [str(v) for v in _row(r)]


def ingest(
    path: str | Path, column_map: dict[str, str] | None = None
) -> tuple[list[TrialRecord], list[str]]:
    """Parse and validate a trial CSV.

    Malformed or invariant-violating rows are skipped and reported; only an
    unreadable file raises. ``column_map`` renames external column names onto
    the canonical schema (mapping shim for third-party releases).
    """
    records: list[TrialRecord] = []
    report: list[str] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, raw in enumerate(csv.DictReader(fh), start=2):
            row = dict(raw)
            if column_map:
                row = {column_map.get(k, k): v for k, v in row.items()}
            try:
                rec = _parse_row(row)
            except (KeyError, ValueError) as exc:
                report.append(f"line {lineno}: {exc}")
                continue
            problems = validate(rec)
            if problems:
                report.extend(f"line {lineno}: {p}" for p in problems)
            else:
                records.append(rec)
    return records, report


def _parse_row(row: dict[str, str]) -> TrialRecord:
    def opt_int(v: str | None) -> int | None:
        return None if v in (None, "") else int(v)

    return TrialRecord(
        participant_id=row["participant_id"],
        group=row["group"],
        day=int(row["day"]),
        trial_index=int(row["trial_index"]),
        question=MathQuestion.from_numbers(int(row["num1"]), int(row["num2"]), int(row["num3"])),
        pressure_shown=bool(int(row["pressure_shown"])),
        human_choice=bool(int(row["human_choice"])),
        correct=bool(int(row["correct"])),
        rt_seconds=float(row["rt_seconds"]),
        attention=opt_int(row.get("attention")),
        anxiety=opt_int(row.get("anxiety")),
    )


def synth_generate(
    profiles: list[SynthProfile],
    group: str,
    n_trials: int,
    seed: int,
    day: int = 1,
    controller_thresholds: ctl.Thresholds | None = None,
) -> list[TrialRecord]:
    """One synthetic session per profile under the given group's pressure policy.

    rt = clip(base_rt + w1*hardness + w2*pressure + noise, 0.2, 10) with
    pressure 1.0 on pressure-shown trials, 0 otherwise. Choices are correct
    with probability max(accuracy_floor, 1 - hardness/4). Likert ratings are
    filled every 30th trial only.
    """
    if group not in GROUPS:
        raise ValueError(f"unknown group {group!r}")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    records: list[TrialRecord] = []
    for p_idx, prof in enumerate(profiles):
        rng = np.random.default_rng((seed, GROUPS.index(group), p_idx, day))
        pid = f"{group}_{p_idx:02d}"
        state = ctl.ControllerState(thresholds=controller_thresholds or ctl.Thresholds())
        for t in range(1, n_trials + 1):
            q = random_question(rng)
            if group == "none":
                pressure = False
            elif group == "static":
                pressure = True
            elif group == "random":
                pressure = bool(rng.integers(0, 2))
            else:
                pressure = bool(state.buffer) and ctl.decide(state)
            h = hardness(q)
            rt = prof.base_rt + prof.hardness_weight * h
            rt += prof.pressure_weight * (1.0 if pressure else 0.0)
            rt += prof.noise_sd * rng.standard_normal()
            rt = float(np.clip(rt, 0.2, 10.0))
            p_correct = max(prof.accuracy_floor, 1.0 - h / 4.0)
            correct = bool(rng.random() < p_correct)
            choice = is_divisible(q) if correct else not is_divisible(q)
            likert = t % 30 == 0
            records.append(
                TrialRecord(
                    participant_id=pid,
                    group=group,
                    day=day,
                    trial_index=t,
                    question=q,
                    pressure_shown=pressure,
                    human_choice=choice,
                    correct=correct,
                    rt_seconds=rt,
                    attention=int(rng.integers(1, 8)) if likert else None,
                    anxiety=int(rng.integers(1, 8)) if likert else None,
                )
            )
            if group == "rule":
                ctl.observe(state, rt, correct)
    return records


def synth_dataset(
    n_participants_per_group: int,
    n_trials: int,
    seed: int,
    profile: SynthProfile | None = None,
) -> list[TrialRecord]:
    """All four groups with identical profiles; the standard oracle dataset."""
    prof = profile or SynthProfile()
    out = []
    for group in GROUPS:
        out.extend(synth_generate([prof] * n_participants_per_group, group, n_trials, seed))
    return out


def write_synth_manifest(path: str | Path, profile: SynthProfile, seed: int, n_trials: int) -> None:
    """Generative parameters stored next to the dataset they produced."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"profile": asdict(profile), "seed": seed, "n_trials": n_trials}, fh, indent=2)


def block_relative_change(records: list[TrialRecord], n_blocks: int = 5) -> dict[str, list[float]]:
    """Per-block changes vs. block 1 for one participant-session.

    rt and accuracy report (R_i - R_1) / R_1; attention and anxiety report
    R_i - R_1. Output lists have n_blocks - 1 entries (blocks 2..n).
    """
    if len(records) < n_blocks:
        raise ValueError(f"need at least {n_blocks} records")
    blocks = np.array_split(np.arange(len(records)), n_blocks)

    def block_mean(values: list[float | None], idx: np.ndarray) -> float | None:
        got = [values[i] for i in idx if values[i] is not None]
        return sum(got) / len(got) if got else None

    rts = [r.rt_seconds for r in records]
    accs = [1.0 if r.correct else 0.0 for r in records]
    atts = [None if r.attention is None else float(r.attention) for r in records]
    anxs = [None if r.anxiety is None else float(r.anxiety) for r in records]
    out: dict[str, list[float]] = {"rt": [], "accuracy": [], "attention": [], "anxiety": []}
    for name, values, relative in (
        ("rt", rts, True), ("accuracy", accs, True), ("attention", atts, False), ("anxiety", anxs, False),
    ):
        base = block_mean(values, blocks[0])
        for blk in blocks[1:]:
            m = block_mean(values, blk)
            if m is None or base is None:
                out[name].append(float("nan"))
            elif relative:
                if base == 0:
                    raise ValueError(f"zero baseline block mean for {name}")
                out[name].append((m - base) / base)
            else:
                out[name].append(m - base)
    return out
