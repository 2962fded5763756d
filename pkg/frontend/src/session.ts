/** Session state machine. One active trial at a time, service calls strictly
 * sequential, single submission per trial (double clicks are ignored), and
 * Likert prompts interposed exactly when the server flags likert_due. */

import { ResponseResult, SessionDone, TaskClient, TrialView } from "./api.js";
import { Clock } from "./bar.js";

export type Phase = "idle" | "trial" | "submitting" | "likert" | "summary" | "error";

export interface LikertAnswers {
  attention: number;
  anxiety: number;
}

export interface Summary {
  nTrials: number;
  nCorrect: number;
  meanRtMs: number;
}

export interface SessionEvents {
  onTrial(trial: TrialView): void;
  onLikert(): void;
  onSummary(summary: Summary): void;
  onError(message: string): void;
}

export class SessionRunner {
  phase: Phase = "idle";
  private sessionId = "";
  private trial: TrialView | null = null;
  private trialStartMs = 0;
  private pendingLikert: LikertAnswers | null = null;
  private results: { correct: boolean; rtMs: number }[] = [];

  constructor(
    private readonly client: TaskClient,
    private readonly clock: Clock,
    private readonly events: SessionEvents,
  ) {}

  get currentTrial(): TrialView | null {
    return this.trial;
  }

  async start(participantId: string, group: string, nTrials: number, seed?: number): Promise<void> {
    try {
      this.sessionId = await this.client.createSession(participantId, group, nTrials, seed);
    } catch (err) {
      this.fail(err);
      return;
    }
    await this.nextTrial();
  }

  /** Marks the question as painted; rt measurement starts here. */
  markPainted(): void {
    this.trialStartMs = this.clock();
  }

  async submit(choice: boolean): Promise<void> {
    if (this.phase !== "trial" || this.trial === null) return; // double-click guard
    this.phase = "submitting";
    const rtMs = this.clock() - this.trialStartMs;
    const trial = this.trial;
    let result: ResponseResult;
    try {
      result = await this.client.postResponse(this.sessionId, {
        trial_index: trial.trial_index,
        choice,
        rt_ms: rtMs,
        ...(this.pendingLikert ?? {}),
      });
    } catch (err) {
      this.fail(err);
      return;
    }
    this.pendingLikert = null;
    this.results.push({ correct: result.correct, rtMs });
    if (trial.likert_due) {
      this.phase = "likert";
      this.events.onLikert();
      return;
    }
    await this.nextTrial();
  }

  /** Likert answers ride along with the next trial's response. */
  async answerLikert(answers: LikertAnswers): Promise<void> {
    if (this.phase !== "likert") return;
    this.pendingLikert = answers;
    await this.nextTrial();
  }

  private async nextTrial(): Promise<void> {
    let view: TrialView | SessionDone;
    try {
      view = await this.client.getTrial(this.sessionId);
    } catch (err) {
      this.fail(err);
      return;
    }
    if (view.done) {
      this.phase = "summary";
      this.trial = null;
      this.events.onSummary(this.summary());
      return;
    }
    this.trial = view;
    this.phase = "trial";
    this.markPainted();
    this.events.onTrial(view);
  }

  private summary(): Summary {
    const n = this.results.length;
    const correct = this.results.filter((r) => r.correct).length;
    const meanRt = n === 0 ? 0 : this.results.reduce((s, r) => s + r.rtMs, 0) / n;
    return { nTrials: n, nCorrect: correct, meanRtMs: meanRt };
  }

  private fail(err: unknown): void {
    this.phase = "error";
    this.events.onError(err instanceof Error ? err.message : String(err));
  }
}
