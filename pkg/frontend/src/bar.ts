/** Progress-bar pressure stimulus: one unit per elapsed second, reset to
 * empty after five. Mirrors the server's raster semantics exactly. */

export const UNITS = 5;

export function filledUnits(elapsedSeconds: number): number {
  if (elapsedSeconds < 0) throw new RangeError(`negative time: ${elapsedSeconds}`);
  return Math.floor(elapsedSeconds) % UNITS;
}

export type Clock = () => number; // monotonic milliseconds
export type FrameScheduler = (cb: (nowMs: number) => void) => number;

/** Drives a per-frame callback with the current fill state. Rendering is the
 * caller's job; this only owns the timing. */
export class BarAnimator {
  private startMs: number | null = null;
  private running = false;

  constructor(
    private readonly onFrame: (units: number) => void,
    private readonly schedule: FrameScheduler,
  ) {}

  start(nowMs: number): void {
    this.startMs = nowMs;
    this.running = true;
    this.schedule(this.tick);
  }

  stop(): void {
    this.running = false;
    this.startMs = null;
  }

  private tick = (nowMs: number): void => {
    if (!this.running || this.startMs === null) return;
    this.onFrame(filledUnits((nowMs - this.startMs) / 1000));
    this.schedule(this.tick);
  };
}
