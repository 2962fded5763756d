import { TaskClient } from "./api.js";
import { SessionRunner } from "./session.js";
import { TaskUi } from "./ui.js";

// Build-time service location; override with e.g. esbuild --define.
declare const SERVICE_BASE_URL: string | undefined;
const BASE_URL = typeof SERVICE_BASE_URL === "string" ? SERVICE_BASE_URL : "http://127.0.0.1:8000";

function main(): void {
  const form = document.getElementById("session-form") as HTMLFormElement;
  const root = document.getElementById("task-root") as HTMLElement;
  const client = new TaskClient(BASE_URL);
  const nowMs = () => performance.now();

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    const participant = String(data.get("participant") ?? "").trim();
    const group = String(data.get("group") ?? "none");
    const nTrials = Number(data.get("trials") ?? 60);
    if (!participant) return;

    let ui: TaskUi;
    const runner = new SessionRunner(client, nowMs, {
      onTrial: (trial) => ui.showTrial(trial),
      onLikert: () => ui.showLikert((answers) => void runner.answerLikert(answers)),
      onSummary: (summary) => ui.showSummary(summary),
      onError: (message) => ui.showError(message),
    });
    ui = new TaskUi({ root, runner, nowMs });
    form.style.display = "none";
    void runner.start(participant, group, nTrials);
  });
}

main();
