import { describe, expect, it } from "vitest";

import { BarAnimator, filledUnits } from "../src/bar.js";

const FRAME_MS = 1000 / 60;

/** Deterministic rAF substitute: runs queued frames on a simulated clock. */
class FakeFrames {
  private queue: ((nowMs: number) => void)[] = [];
  nowMs = 0;

  schedule = (cb: (nowMs: number) => void): number => {
    this.queue.push(cb);
    return this.queue.length;
  };

  advanceTo(targetMs: number): void {
    while (this.nowMs < targetMs) {
      this.nowMs = Math.min(this.nowMs + FRAME_MS, targetMs);
      const pending = this.queue;
      this.queue = [];
      for (const cb of pending) cb(this.nowMs);
    }
  }
}

describe("filledUnits", () => {
  it("is floor(t) mod 5", () => {
    expect(filledUnits(0)).toBe(0);
    expect(filledUnits(0.99)).toBe(0);
    expect(filledUnits(1)).toBe(1);
    expect(filledUnits(4.9)).toBe(4);
    expect(filledUnits(5)).toBe(0); // reset to empty
    expect(filledUnits(11.2)).toBe(1);
  });

  it("rejects negative times", () => {
    expect(() => filledUnits(-0.1)).toThrow(RangeError);
  });
});

describe("BarAnimator", () => {
  it.each([
    [0.5, 0],
    [1.5, 1],
    [4.5, 4],
    [5.5, 0],
  ])("shows %f s as %i units within one frame", (t, expected) => {
    const frames = new FakeFrames();
    let units = -1;
    const animator = new BarAnimator((u) => (units = u), frames.schedule);
    animator.start(frames.nowMs);
    frames.advanceTo(t * 1000);
    // allow one extra frame of staleness, per the animation-frame tolerance
    const lagged = filledUnits(Math.max(0, t - FRAME_MS / 1000));
    expect([expected, lagged]).toContain(units);
    frames.advanceTo(t * 1000 + FRAME_MS);
    expect(units).toBe(expected);
  });

  it("stops cleanly", () => {
    const frames = new FakeFrames();
    let calls = 0;
    const animator = new BarAnimator(() => calls++, frames.schedule);
    animator.start(0);
    frames.advanceTo(100);
    const seen = calls;
    animator.stop();
    frames.advanceTo(200);
    expect(calls).toBeLessThanOrEqual(seen + 1);
  });
});
