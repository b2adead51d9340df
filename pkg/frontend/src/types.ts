// Payload shapes of the lesson server's JSON API. The client renders these
// verbatim; it never computes scores or sees answer keys.

export type AnnotationKind = "transfer" | "gotcha" | "newfact";
export type AnnotationSide = "known" | "target" | "both";
export type Phase = "pretest" | "lessons" | "posttest" | "survey" | "done";

export interface Highlight {
  start: number;
  end: number;
  kind: AnnotationKind;
}

export interface AnnotationPayload {
  kind: AnnotationKind;
  side: AnnotationSide;
  text: string;
  rule: string | null;
}

export interface SnippetPayload {
  language: string;
  source: string;
}

export interface OutputPayload {
  known: string;
  target: string;
  caption: string;
}

export interface LessonState {
  lesson_id: string;
  lesson_index: number;
  lesson_count: number;
  title: string;
  step_index: number;
  step_count: number;
  known: SnippetPayload;
  target: SnippetPayload;
  known_highlights: Highlight[];
  target_highlights: Highlight[];
  annotations: AnnotationPayload[];
  output: OutputPayload | null;
}

export interface QuestionState {
  id: string;
  prompt: string;
  kind: "single_choice" | "multi_answer";
  choices: string[];
  answered: number;
  total: number;
}

export interface StatementState {
  id: string;
  text: string;
  answered: number;
  total: number;
  levels: number[];
}

export interface RenderState {
  phase: Phase;
  lesson?: LessonState;
  question?: QuestionState;
  statement?: StatementState;
}

export interface PackSummary {
  id: string;
  title: string;
  lesson_count: number;
  known_language: string;
  target_language: string;
}

export interface SessionCreated {
  session_id: string;
  seed: number;
  state: RenderState;
}

export interface ScoreSide {
  per_question: Record<string, number>;
  total: number;
}

export interface Report {
  session_id: string;
  participant: string;
  pretest: ScoreSide;
  posttest: ScoreSide;
  survey_responses: Record<string, number>;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: Record<string, unknown>;
}
