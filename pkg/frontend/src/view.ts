// DOM construction for each phase. Pure functions from state to elements;
// user intent comes back through the handler callbacks, and all state
// lives on the server.

import { segment } from "./highlight.js";
import { renderInline } from "./markdown.js";
import type {
  AnnotationKind,
  LessonState,
  QuestionState,
  RenderState,
  Report,
  StatementState,
} from "./types.js";

export const KIND_ICONS: Record<AnnotationKind, string> = {
  transfer: "⇄", // ⇄ carries over
  gotcha: "⚠",   // ⚠ warning
  newfact: "★",  // ★ brand new
};

export const KIND_LABELS: Record<AnnotationKind, string> = {
  transfer: "transfer",
  gotcha: "gotcha",
  newfact: "new fact",
};

const LIKERT_LABELS: Record<number, string> = {
  1: "Strongly disagree",
  2: "Disagree",
  3: "Neutral",
  4: "Agree",
  5: "Strongly agree",
};

export interface Handlers {
  onStep(direction: "next" | "prev"): void;
  onAnswer(questionId: string, selection: number[]): void;
  onSurvey(statementId: string, level: number): void;
  onShowReport(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function codePane(label: string, source: string, highlights: LessonState["known_highlights"]): HTMLElement {
  const pane = el("div", "pane");
  pane.append(el("span", "pane-label", label));
  const code = el("pre", "code-line");
  for (const piece of segment(source, highlights)) {
    if (piece.kind === null) {
      code.append(document.createTextNode(piece.text));
    } else {
      const mark = el("mark", `hl hl-${piece.kind}`, piece.text);
      mark.dataset.kind = piece.kind;
      code.append(mark);
    }
  }
  pane.append(code);
  return pane;
}

export function renderLesson(state: LessonState, handlers: Handlers, busy: boolean): HTMLElement {
  const root = el("section", "lesson-view");
  root.dataset.lessonIndex = String(state.lesson_index);
  root.dataset.stepIndex = String(state.step_index);

  const header = el("header", "lesson-header");
  header.append(el("h2", undefined, state.title));
  header.append(el(
    "span",
    "progress",
    `Lesson ${state.lesson_index + 1}/${state.lesson_count} - step ${state.step_index + 1}/${state.step_count}`,
  ));
  root.append(header);

  const body = el("div", "lesson-body");
  const panes = el("div", "panes");
  panes.append(codePane(state.known.language, state.known.source, state.known_highlights));
  panes.append(codePane(state.target.language, state.target.source, state.target_highlights));

  const stepper = el("div", "stepper");
  const prev = el("button", "step-prev", "← Back");
  prev.disabled = busy || state.step_index === 0;
  prev.addEventListener("click", () => handlers.onStep("prev"));
  const last = state.lesson_index === state.lesson_count - 1
    && state.step_index === state.step_count - 1;
  const next = el("button", "step-next", last ? "Finish lessons →" : "Next →");
  next.disabled = busy;
  next.addEventListener("click", () => handlers.onStep("next"));
  stepper.append(prev, next);
  panes.append(stepper);
  body.append(panes);

  const explain = el("aside", "explanations");
  for (const annotation of state.annotations) {
    const entry = el("div", `annotation annotation-${annotation.kind}`);
    entry.dataset.kind = annotation.kind;
    const head = el("div", "annotation-head");
    head.append(el("span", `icon icon-${annotation.kind}`, KIND_ICONS[annotation.kind]));
    head.append(el("span", "annotation-kind", KIND_LABELS[annotation.kind]));
    head.append(el("span", "annotation-side", annotation.side));
    entry.append(head);
    const text = el("p", "annotation-text");
    text.innerHTML = renderInline(annotation.text);
    entry.append(text);
    explain.append(entry);
  }
  body.append(explain);
  root.append(body);

  if (state.output !== null) {
    const output = el("div", "output-box");
    output.append(el("h3", undefined, "Result"));
    const frames = el("div", "output-frames");
    for (const [language, text] of [
      [state.known.language, state.output.known],
      [state.target.language, state.output.target],
    ] as const) {
      const frame = el("div", "output-frame");
      frame.append(el("span", "pane-label", language));
      frame.append(el("pre", undefined, text));
      frames.append(frame);
    }
    output.append(frames);
    output.append(el("p", "output-caption", state.output.caption));
    root.append(output);
  }
  return root;
}

export function renderQuestion(
  phase: "pretest" | "posttest",
  state: QuestionState,
  handlers: Handlers,
  busy: boolean,
): HTMLElement {
  const root = el("section", "quiz-view");
  root.dataset.questionId = state.id;
  const title = phase === "pretest" ? "Before we start" : "Check what stuck";
  const header = el("header");
  header.append(el("h2", undefined, title));
  header.append(el("span", "progress", `Question ${state.answered + 1} of ${state.total}`));
  root.append(header);
  root.append(el("p", "prompt", state.prompt));
  if (state.kind === "multi_answer") {
    root.append(el("p", "hint", "Select every answer that applies."));
  }

  const form = el("form", "choices");
  const inputType = state.kind === "single_choice" ? "radio" : "checkbox";
  state.choices.forEach((choice, index) => {
    const label = el("label", "choice");
    const input = document.createElement("input");
    input.type = inputType;
    input.name = "choice";
    input.value = String(index);
    input.disabled = busy;
    label.append(input, el("code", undefined, choice));
    form.append(label);
  });

  const error = el("p", "inline-error");
  error.hidden = true;
  const submit = el("button", "submit", "Submit answer");
  submit.type = "submit";
  submit.disabled = busy;
  form.append(error, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const selection = [...form.querySelectorAll<HTMLInputElement>("input:checked")]
      .map((input) => Number(input.value));
    if (selection.length === 0) {
      error.textContent = "Pick at least one answer first.";
      error.hidden = false;
      return; // validated locally; no request leaves
    }
    handlers.onAnswer(state.id, selection);
  });
  root.append(form);
  return root;
}

export function renderSurvey(state: StatementState, handlers: Handlers, busy: boolean): HTMLElement {
  const root = el("section", "survey-view");
  root.dataset.statementId = state.id;
  const header = el("header");
  header.append(el("h2", undefined, "One last thing"));
  header.append(el("span", "progress", `Statement ${state.answered + 1} of ${state.total}`));
  root.append(header);
  root.append(el("p", "prompt", state.text));

  const form = el("form", "likert");
  for (const level of state.levels) {
    const label = el("label", "likert-level");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = "level";
    input.value = String(level);
    input.disabled = busy;
    label.append(input, el("span", undefined, LIKERT_LABELS[level] ?? String(level)));
    form.append(label);
  }
  const error = el("p", "inline-error");
  error.hidden = true;
  const submit = el("button", "submit", "Submit");
  submit.type = "submit";
  submit.disabled = busy;
  form.append(error, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const chosen = form.querySelector<HTMLInputElement>("input:checked");
    if (!chosen) {
      error.textContent = "Pick a level first.";
      error.hidden = false;
      return;
    }
    handlers.onSurvey(state.id, Number(chosen.value));
  });
  root.append(form);
  return root;
}

export function renderDone(handlers: Handlers): HTMLElement {
  const root = el("section", "done-view");
  root.append(el("h2", undefined, "All done"));
  root.append(el("p", undefined, "Thanks for working through the lessons."));
  const button = el("button", "show-report", "Show my report");
  button.addEventListener("click", () => handlers.onShowReport());
  root.append(button);
  return root;
}

export function renderReport(report: Report): HTMLElement {
  const root = el("section", "report-view");
  root.append(el("h2", undefined, "Report"));
  const list = el("dl", "report-scores");
  const add = (label: string, value: string) => {
    list.append(el("dt", undefined, label));
    list.append(el("dd", undefined, value));
  };
  const questions = Object.keys(report.pretest.per_question).length;
  add("Before the lessons", `${report.pretest.total} / ${questions}`);
  add("After the lessons", `${report.posttest.total} / ${questions}`);
  root.append(list);
  return root;
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const root = el("section", "error-view");
  root.append(el("h2", undefined, "Something went sideways"));
  root.append(el("p", "error-message", message));
  const retry = el("button", "retry", "Reload state");
  retry.addEventListener("click", onRetry);
  root.append(retry);
  return root;
}

export function renderState(state: RenderState, handlers: Handlers, busy: boolean): HTMLElement {
  switch (state.phase) {
    case "lessons":
      return renderLesson(state.lesson!, handlers, busy);
    case "pretest":
    case "posttest":
      return renderQuestion(state.phase, state.question!, handlers, busy);
    case "survey":
      return renderSurvey(state.statement!, handlers, busy);
    case "done":
      return renderDone(handlers);
  }
}
