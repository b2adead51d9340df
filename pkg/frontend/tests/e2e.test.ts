// Stepper parity against a live server: boot the real backend, drive the UI
// by clicking, and check after every click that what the client displays is
// exactly what GET /state says. Runs in jsdom; the backend is the Python
// package from this repository.
import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import type { LessonState, RenderState } from "../src/types.js";

const PORT = 8700 + (process.pid % 900);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let storeDir: string;

async function waitForServer(): Promise<void> {
  const deadline = Date.now() + 20000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/packs`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("backend did not come up in time");
}

async function waitFor(predicate: () => boolean, what: string): Promise<void> {
  const deadline = Date.now() + 10000;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 10));
  }
  throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), "crosstutor-e2e-"));
  server = spawn(
    "python3",
    ["-m", "crosstutor.cli", "serve", "--port", String(PORT), "--store", storeDir],
    { cwd: join(__dirname, "..", ".."), stdio: ["ignore", "pipe", "pipe"] },
  );
  server.stderr?.on("data", (chunk: Buffer) => {
    const line = chunk.toString();
    if (line.includes("Traceback")) console.error(line);
  });
  await waitForServer();
});

afterAll(() => {
  server?.kill();
  rmSync(storeDir, { recursive: true, force: true });
});

function mountPoint(): HTMLElement {
  document.body.innerHTML = '<main id="app"></main>';
  return document.querySelector<HTMLElement>("#app")!;
}

async function serverState(sessionId: string): Promise<RenderState> {
  const response = await fetch(`${BASE}/api/sessions/${sessionId}/state`);
  expect(response.ok).toBe(true);
  return (await response.json()) as RenderState;
}

function displayedLesson(mount: HTMLElement): { lesson: number; step: number } {
  const view = mount.querySelector<HTMLElement>(".lesson-view");
  expect(view, "lesson view should be on screen").not.toBeNull();
  return {
    lesson: Number(view!.dataset.lessonIndex),
    step: Number(view!.dataset.stepIndex),
  };
}

async function submitCurrentForm(app: App, mount: HTMLElement, pick: number[]): Promise<void> {
  const inputs = mount.querySelectorAll<HTMLInputElement>("form input");
  for (const index of pick) inputs[index].checked = true;
  const before = JSON.stringify(app.currentState);
  mount.querySelector("form")!.dispatchEvent(new Event("submit", { cancelable: true }));
  await waitFor(
    () => !app.isBusy && JSON.stringify(app.currentState) !== before,
    "form submission to settle",
  );
}

describe("stepper parity end to end", () => {
  it("walks all four lessons in lockstep with the server", async () => {
    const mount = mountPoint();
    localStorage.clear();
    const api = new ApiClient(BASE);
    const app = await App.boot(api, mount, localStorage);
    const sessionId = localStorage.getItem("crosstutor.session")!;
    expect(sessionId).toBeTruthy();

    // Pre-test: answer every question through the form.
    while (app.currentState!.phase === "pretest") {
      await submitCurrentForm(app, mount, [0]);
    }
    expect(app.currentState!.phase).toBe("lessons");

    const packs = await (await fetch(`${BASE}/api/packs`)).json();
    expect(packs[0].lesson_count).toBe(4);

    // Lessons: click Next until the post-test, checking parity every click.
    const seenSteps: Array<[number, number]> = [];
    let gotchaMarkSeen = false;
    let newfactMarkSeen = false;
    for (let guard = 0; guard < 100 && app.currentState!.phase === "lessons"; guard++) {
      const ui = displayedLesson(mount);
      const remote = await serverState(sessionId);
      expect(remote.phase).toBe("lessons");
      expect(ui.lesson).toBe(remote.lesson!.lesson_index);
      expect(ui.step).toBe(remote.lesson!.step_index);
      seenSteps.push([ui.lesson, ui.step]);

      const lesson = remote.lesson as LessonState;
      // Output box parity: visible exactly on a lesson's final step.
      const finalStep = lesson.step_index === lesson.step_count - 1;
      expect(mount.querySelector(".output-box") !== null).toBe(finalStep);
      expect(lesson.output !== null).toBe(finalStep);

      // The double-bracket gotcha step: red-kind mark over "[[".
      const gotchaMark = mount.querySelector<HTMLElement>("mark.hl-gotcha");
      if (gotchaMark && gotchaMark.textContent === "[[") gotchaMarkSeen = true;
      // The vector-builder new-fact step: blue-kind mark over the c() call.
      const newfactMark = mount.querySelector<HTMLElement>("mark.hl-newfact");
      if (newfactMark && newfactMark.textContent?.startsWith("c(")) newfactMarkSeen = true;

      const before = JSON.stringify(app.currentState);
      mount.querySelector<HTMLButtonElement>(".step-next")!.click();
      await waitFor(
        () => !app.isBusy && JSON.stringify(app.currentState) !== before,
        "step to settle",
      );
    }

    expect(gotchaMarkSeen, "saw the [[ gotcha highlight").toBe(true);
    expect(newfactMarkSeen, "saw the c() new-fact highlight").toBe(true);
    expect(seenSteps).toHaveLength(27); // 6 + 6 + 7 + 8 steps
    expect(seenSteps[0]).toEqual([0, 0]);
    expect(seenSteps[26]).toEqual([3, 7]);
    // Step indices never skip: each click moves exactly one position.
    for (let i = 1; i < seenSteps.length; i++) {
      const [pl, ps] = seenSteps[i - 1];
      const [cl, cs] = seenSteps[i];
      expect(cl === pl ? cs - ps : cs).toBe(cl === pl ? 1 : 0);
    }

    // Post-test and survey, still through the forms.
    expect(app.currentState!.phase).toBe("posttest");
    while (app.currentState!.phase === "posttest") {
      await submitCurrentForm(app, mount, [1]);
    }
    expect(app.currentState!.phase).toBe("survey");
    while (app.currentState!.phase === "survey") {
      await submitCurrentForm(app, mount, [4]);
    }
    expect(app.currentState!.phase).toBe("done");
    const remote = await serverState(sessionId);
    expect(remote.phase).toBe("done");
  });

  it("restores the identical view after a reload", async () => {
    const mount = mountPoint();
    localStorage.clear();
    const api = new ApiClient(BASE);
    const app = await App.boot(api, mount, localStorage);
    await submitCurrentForm(app, mount, [0]);
    const before = JSON.stringify(app.currentState);

    // A "reload": fresh App against the same storage and server.
    const mountAgain = mountPoint();
    const resumed = await App.boot(new ApiClient(BASE), mountAgain, localStorage);
    expect(JSON.stringify(resumed.currentState)).toBe(before);
  });

  it("prev at a lesson's first step is refused by the server and recovers", async () => {
    const mount = mountPoint();
    localStorage.clear();
    const app = await App.boot(new ApiClient(BASE), mount, localStorage);
    while (app.currentState!.phase === "pretest") {
      await submitCurrentForm(app, mount, [0]);
    }
    const sessionId = localStorage.getItem("crosstutor.session")!;
    // The Back button is disabled at step 0, so hit the API directly the way
    // a stale client would, then confirm the server refused.
    const response = await fetch(`${BASE}/api/sessions/${sessionId}/step`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ direction: "prev" }),
    });
    expect(response.status).toBe(409);
    expect((await response.json()).code).toBe("no-previous");
    const remote = await serverState(sessionId);
    expect(remote.lesson!.step_index).toBe(0);
  });

  it("never receives an answer key in any payload before done", async () => {
    const mount = mountPoint();
    localStorage.clear();
    const app = await App.boot(new ApiClient(BASE), mount, localStorage);
    const sessionId = localStorage.getItem("crosstutor.session")!;
    const payloads: unknown[] = [JSON.parse(JSON.stringify(app.currentState))];
    payloads.push(await (await fetch(`${BASE}/api/packs/python-to-r`)).json());
    payloads.push(await serverState(sessionId));
    const blob = JSON.stringify(payloads);
    expect(blob.includes('"correct":')).toBe(false);
  });
});
