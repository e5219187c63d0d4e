/**
 * Session driver: glues the REST client to the state machine.
 *
 * The server is the source of truth - refreshing the page restarts the
 * session and simply resumes from whatever the server still has unlabeled
 * for this annotator.
 */

import { ApiClient } from "./api.js";
import {
  canSubmit,
  initialState,
  keyAction,
  reduce,
  UiEvent,
  UiState,
} from "./state.js";

export class AnnotationSession {
  readonly annotator: string;
  private api: ApiClient;
  private onChange: (state: UiState) => void;
  state: UiState;

  constructor(api: ApiClient, annotator: string, onChange?: (s: UiState) => void) {
    this.api = api;
    this.annotator = annotator;
    this.onChange = onChange ?? (() => undefined);
    this.state = initialState();
  }

  private dispatch(event: UiEvent): void {
    this.state = reduce(this.state, event);
    this.onChange(this.state);
  }

  async start(): Promise<void> {
    await this.refreshProgress();
    await this.advance();
  }

  async refreshProgress(): Promise<void> {
    try {
      const progress = await this.api.fetchProgress(this.annotator);
      this.dispatch({ type: "progress", ...progress });
    } catch (err) {
      this.dispatch({ type: "network_error", message: String(err) });
    }
  }

  private async advance(): Promise<void> {
    try {
      const next = await this.api.fetchNext(this.annotator);
      if (next === null) {
        this.dispatch({ type: "pool_exhausted" });
      } else {
        this.dispatch({ type: "individual_loaded", individual: next });
      }
    } catch (err) {
      this.dispatch({ type: "network_error", message: String(err) });
    }
  }

  select(label: number): void {
    this.dispatch({ type: "select", label });
  }

  /** Submit the selected label; no-op unless submission is allowed. */
  async submit(): Promise<void> {
    if (!canSubmit(this.state)) {
      return;
    }
    const individualId = this.state.individualId as string;
    const label = this.state.selected as number;
    this.dispatch({ type: "submit_started" });
    let outcome;
    try {
      outcome = await this.api.submitLabel(individualId, this.annotator, label);
    } catch (err) {
      this.dispatch({ type: "network_error", message: String(err) });
      return;
    }
    if (outcome === "created") {
      this.dispatch({ type: "submit_ok", label });
      await this.advance();
    } else {
      this.dispatch({ type: "submit_rejected", reason: outcome });
    }
  }

  /** Keyboard entry point: digits select, Enter submits. */
  async handleKey(key: string): Promise<void> {
    const action = keyAction(key);
    if (action === null) {
      return;
    }
    if (action.kind === "select") {
      this.select(action.label);
    } else {
      await this.submit();
    }
  }
}
