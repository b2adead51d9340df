// Controller: owns the mount point, the current server state, and the busy
// flag. At most one mutation request is in flight at a time; controls are
// disabled while it runs. Nothing is cached across reloads except the
// session id, so a refresh lands exactly where the server says.

import { ApiClient, ApiError } from "./api.js";
import type { RenderState } from "./types.js";
import { renderError, renderReport, renderState, type Handlers } from "./view.js";

const STORAGE_KEY = "crosstutor.session";

export class App {
  private state: RenderState | null = null;
  private busy = false;

  constructor(
    private readonly api: ApiClient,
    private readonly mount: HTMLElement,
    private sessionId: string,
  ) {}

  /** Attach to an existing session (after reload) or start a fresh one. */
  static async boot(api: ApiClient, mount: HTMLElement, storage: Storage): Promise<App> {
    const remembered = storage.getItem(STORAGE_KEY);
    if (remembered) {
      try {
        const app = new App(api, mount, remembered);
        app.state = await api.state(remembered);
        app.draw();
        return app;
      } catch {
        storage.removeItem(STORAGE_KEY); // stale id; fall through and restart
      }
    }
    const packs = await api.listPacks();
    if (packs.length === 0) throw new Error("the server has no lesson packs");
    const participant = `web-${Date.now().toString(36)}`;
    const created = await api.createSession(packs[0].id, participant);
    storage.setItem(STORAGE_KEY, created.session_id);
    const app = new App(api, mount, created.session_id);
    app.state = created.state;
    app.draw();
    return app;
  }

  get currentState(): RenderState | null {
    return this.state;
  }

  get isBusy(): boolean {
    return this.busy;
  }

  async refresh(): Promise<void> {
    this.state = await this.api.state(this.sessionId);
    this.draw();
  }

  private handlers(): Handlers {
    return {
      onStep: (direction) => void this.mutate(() => this.api.step(this.sessionId, direction)),
      onAnswer: (questionId, selection) =>
        void this.mutate(() => this.api.answer(this.sessionId, questionId, selection)),
      onSurvey: (statementId, level) =>
        void this.mutate(() => this.api.survey(this.sessionId, statementId, level)),
      onShowReport: () => void this.showReport(),
    };
  }

  private async mutate(operation: () => Promise<RenderState>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.draw();
    try {
      this.state = await operation();
    } catch (error) {
      if (error instanceof ApiError) {
        // Conflicts mean our view was stale; fetch the truth, don't retry.
        this.state = await this.api.state(this.sessionId);
        if (error.status !== 409) {
          this.busy = false;
          this.drawError(error.message);
          return;
        }
      } else {
        this.busy = false;
        this.drawError(String(error));
        return;
      }
    }
    this.busy = false;
    this.draw();
  }

  private async showReport(): Promise<void> {
    try {
      const report = await this.api.report(this.sessionId);
      this.mount.replaceChildren(renderReport(report));
    } catch (error) {
      this.drawError(error instanceof Error ? error.message : String(error));
    }
  }

  private draw(): void {
    if (this.state === null) return;
    this.mount.replaceChildren(renderState(this.state, this.handlers(), this.busy));
  }

  private drawError(message: string): void {
    this.mount.replaceChildren(renderError(message, () => void this.refresh()));
  }
}
