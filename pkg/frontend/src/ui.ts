/** DOM wiring: renders the question, the pressure bar, True/False buttons,
 * Likert prompts, and the end-of-session summary. All state lives in
 * SessionRunner; this module only paints and forwards input. */

import { TrialView } from "./api.js";
import { BarAnimator, UNITS } from "./bar.js";
import { LikertAnswers, SessionRunner, Summary } from "./session.js";

const INTER_TRIAL_MS = 500;

export interface UiConfig {
  root: HTMLElement;
  runner: SessionRunner;
  nowMs: () => number;
  interTrialMs?: number;
}

export function likertScale(name: string): HTMLElement {
  const row = document.createElement("div");
  row.className = "likert-row";
  row.dataset.name = name;
  const label = document.createElement("span");
  label.textContent = name;
  row.appendChild(label);
  for (let v = 1; v <= 7; v++) {
    const btn = document.createElement("button");
    btn.textContent = String(v);
    btn.dataset.value = String(v);
    row.appendChild(btn);
  }
  return row;
}

export class TaskUi {
  private readonly question: HTMLElement;
  private readonly bar: HTMLElement;
  private readonly cells: HTMLElement[] = [];
  private readonly buttons: HTMLElement;
  private readonly message: HTMLElement;
  private readonly animator: BarAnimator;
  private readonly interTrialMs: number;

  constructor(private readonly cfg: UiConfig) {
    this.interTrialMs = cfg.interTrialMs ?? INTER_TRIAL_MS;
    this.question = el("div", "question");
    this.bar = el("div", "pressure-bar");
    for (let i = 0; i < UNITS; i++) {
      const cell = el("div", "bar-cell");
      this.cells.push(cell);
      this.bar.appendChild(cell);
    }
    this.buttons = el("div", "choices");
    for (const [label, choice] of [["True", true], ["False", false]] as const) {
      const btn = document.createElement("button");
      btn.textContent = label;
      btn.addEventListener("click", () => void this.cfg.runner.submit(choice));
      this.buttons.appendChild(btn);
    }
    this.message = el("div", "message");
    cfg.root.replaceChildren(this.question, this.bar, this.buttons, this.message);
    document.addEventListener("keydown", (ev) => {
      if (ev.key === "t" || ev.key === "T") void this.cfg.runner.submit(true);
      if (ev.key === "f" || ev.key === "F") void this.cfg.runner.submit(false);
    });
    this.animator = new BarAnimator(
      (units) => this.paintBar(units),
      (cb) => requestAnimationFrame((t) => cb(t)),
    );
  }

  showTrial(trial: TrialView): void {
    this.message.textContent = "";
    this.question.textContent = trial.question;
    this.bar.style.visibility = trial.pressure ? "visible" : "hidden";
    this.animator.stop();
    this.paintBar(0);
    if (trial.pressure) this.animator.start(this.cfg.nowMs());
    this.cfg.runner.markPainted();
  }

  showLikert(done: (answers: LikertAnswers) => void): void {
    this.animator.stop();
    const prompt = el("div", "likert");
    const answers: Partial<LikertAnswers> = {};
    for (const name of ["attention", "anxiety"] as const) {
      const row = likertScale(name);
      row.addEventListener("click", (ev) => {
        const value = (ev.target as HTMLElement).dataset?.value;
        if (!value) return;
        answers[name] = Number(value);
        if (answers.attention && answers.anxiety) {
          prompt.remove();
          done(answers as LikertAnswers);
        }
      });
      prompt.appendChild(row);
    }
    this.cfg.root.appendChild(prompt);
  }

  showSummary(summary: Summary): void {
    this.animator.stop();
    this.question.textContent = "";
    this.bar.style.visibility = "hidden";
    this.message.textContent =
      `Done. ${summary.nCorrect}/${summary.nTrials} correct, ` +
      `mean response time ${(summary.meanRtMs / 1000).toFixed(2)} s.`;
  }

  showError(message: string): void {
    this.message.textContent = `Connection problem: ${message}. Your answers are saved; retry below.`;
  }

  interTrialDelay(): Promise<void> {
    return new Promise((resolve) => setTimeout(resolve, this.interTrialMs));
  }

  private paintBar(units: number): void {
    this.cells.forEach((cell, i) => cell.classList.toggle("filled", i < units));
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
