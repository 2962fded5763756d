"""Rule-based adaptive time-pressure controller.

Keeps the most recent 20 (rt, correct) responses and decides per trial
whether pressure should be delivered, gated by five quantities: mean rt,
delta rt (recent-half mean minus older-half mean), mean accuracy, a push
counter capping total deliveries, and a tolerant counter that delays
delivery for a few triggering trials.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

BUFFER_SIZE = 20


@dataclass(frozen=True)
class Thresholds:
    rt: float = 3.0  # seconds; trigger when mean rt exceeds this
    delta_rt: float = 0.0  # trigger when the rt trend exceeds this (signed)
    accu: float = 0.9  # trigger when mean accuracy falls below this
    pc: int = 20  # max deliveries per session
    tc: int = 3  # triggering trials to tolerate before delivering


@dataclass
class ControllerState:
    thresholds: Thresholds = field(default_factory=Thresholds)
    buffer: list[tuple[float, bool]] = field(default_factory=list)
    push_counter: int = 0
    tolerant_counter: int = 0

    def to_json(self) -> str:
        d = asdict(self)
        d["buffer"] = [[rt, bool(c)] for rt, c in self.buffer]
        return json.dumps(d)

    @classmethod
    def from_json(cls, payload: str) -> ControllerState:
        d = json.loads(payload)
        return cls(
            thresholds=Thresholds(**d["thresholds"]),
            buffer=[(float(rt), bool(c)) for rt, c in d["buffer"]],
            push_counter=int(d["push_counter"]),
            tolerant_counter=int(d["tolerant_counter"]),
        )


def observe(state: ControllerState, rt: float, correct: bool) -> None:
    """Append one response, evicting the oldest beyond the 20-trial window."""
    if not (0 < rt <= 10):
        raise ValueError(f"rt out of range (0, 10]: {rt}")
    state.buffer.append((rt, correct))
    if len(state.buffer) > BUFFER_SIZE:
        del state.buffer[0]


def metrics(state: ControllerState) -> dict[str, float]:
    if not state.buffer:
        raise ValueError("empty response buffer")
    rts = [rt for rt, _ in state.buffer]
    mean_rt = sum(rts) / len(rts)
    half = len(rts) // 2
    # Recent-half mean minus older-half mean; 0 for a single-element buffer.
    delta = 0.0
    if half > 0:
        delta = sum(rts[len(rts) - half :]) / half - sum(rts[:half]) / half
    accu = sum(1 for _, c in state.buffer if c) / len(state.buffer)
    return {"mean_rt": mean_rt, "delta_rt": delta, "mean_accu": accu}


def decide(state: ControllerState) -> bool:
    """Whether to deliver pressure on the next trial; mutates the counters.

    The three buffer metrics gate the tolerant counter; delivery additionally
    requires the tolerant counter to have reached TC and the push counter to
    be below PC. Delivery increments the push counter and resets tolerance.
    """
    m = metrics(state)
    th = state.thresholds
    trigger = m["mean_rt"] > th.rt and m["delta_rt"] > th.delta_rt and m["mean_accu"] < th.accu
    if not trigger:
        return False
    state.tolerant_counter += 1
    if state.tolerant_counter >= th.tc and state.push_counter < th.pc:
        state.push_counter += 1
        state.tolerant_counter = 0
        return True
    return False
