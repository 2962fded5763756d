"""Sigmoid evidence-accumulation trajectories for the frame-level environment.

A trajectory runs from start evidence 0.5 to the boundary R_p (the calibrated
probability of the predicted choice) over N_t = round(f * R_t) frames. The
per-frame evidence quantum is delta_p = |R_p - 0.5| / (f * R_t).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

START_POINT = 0.5
DEFAULT_STEEPNESS = 6.0


@dataclass(frozen=True)
class EvidenceTrajectory:
    r_p: float
    r_t: float
    f: int
    n_steps: int  # N_t
    values: np.ndarray  # length n_steps + 1; values[0] = 0.5, values[-1] = r_p
    delta_p: float

    def to_csv_rows(self) -> list[tuple[int, float]]:
        return [(i, float(v)) for i, v in enumerate(self.values)]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _shape(x: np.ndarray, k: float) -> np.ndarray:
    """Normalized logistic ramp: 0 at x=0, 1 at x=1, symmetric about 0.5."""
    lo = 1.0 / (1.0 + math.exp(k))  # sigma(-k)
    hi = 1.0 / (1.0 + math.exp(-k))  # sigma(k)
    sig = 1.0 / (1.0 + np.exp(-k * (2.0 * x - 1.0)))
    return (sig - lo) / (hi - lo)


def build_trajectory(
    r_p: float, r_t: float, f: int = 5, steepness: float = DEFAULT_STEEPNESS
) -> EvidenceTrajectory:
    """Discretize the start-to-boundary accumulation path onto the frame grid.

    A degenerate boundary at exactly 0.5 (maximally uncertain classifier) is
    clamped to 0.51 so delta_p stays positive.
    """
    if r_p <= START_POINT:
        log.warning("degenerate boundary R_p=%.4f clamped to 0.51", r_p)
        r_p = 0.51
    if r_p > 1.0:
        raise ValueError(f"R_p must lie in (0.5, 1]: {r_p}")
    if not (0.2 <= r_t <= 10.0):
        raise ValueError(f"R_t must lie in [0.2, 10]: {r_t}")
    if f < 1:
        raise ValueError(f"frame rate must be >= 1: {f}")
    if steepness <= 0:
        raise ValueError(f"steepness must be positive: {steepness}")

    n = max(1, _round_half_up(f * r_t))
    x = np.arange(n + 1) / n
    values = START_POINT + (r_p - START_POINT) * _shape(x, steepness)
    # Endpoints exact regardless of float rounding inside the ramp.
    values[0] = START_POINT
    values[-1] = r_p
    delta_p = (r_p - START_POINT) / (f * r_t)
    return EvidenceTrajectory(r_p=r_p, r_t=r_t, f=f, n_steps=n, values=values, delta_p=delta_p)

