"""HTTP service hosting live task sessions.

The server is authoritative: it generates questions, decides pressure per
the session group's policy (controller-driven for the rule group), grades
choices, and exports trial logs in the ingestion schema. Per-session events
are journaled append-only as JSON lines.
"""

from __future__ import annotations

import io
import json
import os
import secrets
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from . import controller as ctl
from .data import COLUMNS, GROUPS, TrialRecord, csv_row_strings
from .taskgen import MathQuestion, is_divisible, random_question

MAX_TRIALS = 300
LIKERT_EVERY = 30


class CreateSession(BaseModel):
    participant_id: str
    group: str
    n_trials: int = MAX_TRIALS
    seed: int | None = None


class Response(BaseModel):
    trial_index: int
    choice: bool
    rt_ms: float
    attention: int | None = None
    anxiety: int | None = None


@dataclass
class PendingTrial:
    trial_index: int
    question: MathQuestion
    pressure: bool


@dataclass
class Session:
    session_id: str
    participant_id: str
    group: str
    n_trials: int
    seed: int
    rng: np.random.Generator
    controller: ctl.ControllerState
    pending: PendingTrial | None = None
    trials: list[TrialRecord] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def done(self) -> bool:
        return len(self.trials) >= self.n_trials


def next_pressure(session: Session) -> bool:
    """Group policy for the upcoming trial; mutates rule-group counters."""
    if session.group == "none":
        return False
    if session.group == "static":
        return True
    if session.group == "random":
        return bool(session.rng.integers(0, 2))
    if not session.controller.buffer:
        return False
    return ctl.decide(session.controller)


def replay_rule_pressure(
    responses: list[tuple[float, bool]], thresholds: ctl.Thresholds | None = None
) -> list[bool]:
    """Pressure-delivery sequence a rule-group session would produce for a
    recorded (rt, correct) response log; pure, replayable."""
    state = ctl.ControllerState(thresholds=thresholds or ctl.Thresholds())
    out = []
    for rt, correct in responses:
        out.append(bool(state.buffer) and ctl.decide(state))
        ctl.observe(state, rt, correct)
    return out


def create_app(session_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cogsim task service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    journal_dir = Path(session_dir or os.environ.get("COGSIM_SESSION_DIR", "sessions"))
    sessions: dict[str, Session] = {}

    def journal(session: Session, event: dict) -> None:
        journal_dir.mkdir(parents=True, exist_ok=True)
        with open(journal_dir / f"{session.session_id}.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSession):
        if body.group not in GROUPS:
            raise HTTPException(status_code=400, detail=f"invalid group {body.group!r}")
        if not (1 <= body.n_trials <= MAX_TRIALS):
            raise HTTPException(status_code=400, detail=f"n_trials must lie in [1, {MAX_TRIALS}]")
        for s in sessions.values():
            if s.participant_id == body.participant_id and not s.done:
                raise HTTPException(status_code=409, detail="participant has an active session")
        seed = body.seed if body.seed is not None else secrets.randbits(32)
        session = Session(
            session_id=secrets.token_hex(8),
            participant_id=body.participant_id,
            group=body.group,
            n_trials=body.n_trials,
            seed=seed,
            rng=np.random.default_rng(seed),
            controller=ctl.ControllerState(),
        )
        sessions[session.session_id] = session
        journal(session, {"event": "created", "participant_id": session.participant_id,
                          "group": session.group, "n_trials": session.n_trials, "seed": seed})
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/trial")
    def get_trial(session_id: str):
        session = get_session(session_id)
        with session.lock:
            if session.done:
                return {"done": True}
            if session.pending is not None:
                raise HTTPException(status_code=409, detail="previous trial unanswered")
            idx = len(session.trials) + 1
            session.pending = PendingTrial(
                trial_index=idx,
                question=random_question(session.rng),
                pressure=next_pressure(session),
            )
            journal(session, {"event": "trial", "trial_index": idx,
                              "question": session.pending.question.render(),
                              "pressure": session.pending.pressure})
            return {
                "trial_index": idx,
                "question": session.pending.question.render(),
                "pressure": session.pending.pressure,
                "likert_due": idx % LIKERT_EVERY == 0,
                "done": False,
            }

    @app.post("/sessions/{session_id}/response")
    def post_response(session_id: str, body: Response):
        session = get_session(session_id)
        with session.lock:
            if session.pending is None or body.trial_index != session.pending.trial_index:
                raise HTTPException(status_code=409, detail="stale or unknown trial_index")
            if not (0 < body.rt_ms <= 10000):
                raise HTTPException(status_code=422, detail="rt_ms outside (0, 10000]")
            for name, v in (("attention", body.attention), ("anxiety", body.anxiety)):
                if v is not None and not (1 <= v <= 7):
                    raise HTTPException(status_code=422, detail=f"{name} outside 1-7")
            pending = session.pending
            correct = body.choice == is_divisible(pending.question)
            rt_s = body.rt_ms / 1000.0
            session.trials.append(
                TrialRecord(
                    participant_id=session.participant_id,
                    group=session.group,
                    day=1,
                    trial_index=pending.trial_index,
                    question=pending.question,
                    pressure_shown=pending.pressure,
                    human_choice=body.choice,
                    correct=correct,
                    rt_seconds=rt_s,
                    attention=body.attention,
                    anxiety=body.anxiety,
                )
            )
            if session.group == "rule":
                ctl.observe(session.controller, rt_s, correct)
            session.pending = None
            journal(session, {"event": "response", "trial_index": pending.trial_index,
                              "choice": body.choice, "rt_ms": body.rt_ms, "correct": correct})
            return {"accepted": True, "correct": correct}

    @app.get("/sessions/{session_id}/export")
    def export(session_id: str):
        session = get_session(session_id)
        with session.lock:
            buf = io.StringIO()
            buf.write(",".join(COLUMNS) + "\n")
            for rec in session.trials:
                buf.write(",".join(csv_row_strings(rec)) + "\n")
        return PlainTextResponse(buf.getvalue(), media_type="text/csv")

    return app


app = create_app()
