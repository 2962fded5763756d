"""Time-pressure progress-bar stimulus rendered as discrete grayscale frames.

The bar gains one unit per elapsed second and resets to empty after five
units. Frames are 100x12 rasters with values in [0, 1]; a frame with no
pressure is all zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

WIDTH = 100
HEIGHT = 12
UNITS = 5


@dataclass(frozen=True)
class StimulusFrame:
    pixels: np.ndarray  # (HEIGHT, WIDTH), values in [0, 1]
    filled_units: int

    def flat(self) -> np.ndarray:
        return self.pixels.reshape(-1)


def filled_units_at(t: float) -> int:
    """Unit count shown at elapsed time t: floor(t) mod 5 (reset to empty)."""
    if t < 0:
        raise ValueError(f"negative time: {t}")
    return int(math.floor(t)) % UNITS


def _frame_for_units(units: int) -> StimulusFrame:
    pixels = np.zeros((HEIGHT, WIDTH))
    fill_cols = round(WIDTH * units / UNITS)
    pixels[:, :fill_cols] = 1.0
    pixels.setflags(write=False)
    return StimulusFrame(pixels, units)


# Only six distinct frames exist (empty plus 0-4 filled units under
# pressure); share immutable instances instead of re-rasterizing per step.
_EMPTY = _frame_for_units(0)
_BY_UNITS = [_frame_for_units(u) for u in range(UNITS)]


def render_frame(t: float, pressure_on: bool) -> StimulusFrame:
    if t < 0:
        raise ValueError(f"negative time: {t}")
    if not pressure_on:
        return _EMPTY
    return _BY_UNITS[filled_units_at(t)]


def frame_sequence(duration: float, f: int, pressure_on: bool) -> list[StimulusFrame]:
    """Frames sampled at t = i/f for i in [0, round(duration*f))."""
    if duration <= 0:
        raise ValueError(f"duration must be positive: {duration}")
    if f < 1:
        raise ValueError(f"frame rate must be >= 1: {f}")
    n = round(duration * f)
    return [render_frame(i / f, pressure_on) for i in range(n)]


def write_pgm(frame: StimulusFrame, path: str | Path) -> None:
    """Export one frame as a binary PGM for visual inspection."""
    data = np.clip(frame.pixels * 255, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{WIDTH} {HEIGHT}\n255\n".encode("ascii"))
        fh.write(data.tobytes())
