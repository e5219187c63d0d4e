/**
 * Pure UI state machine for the labeling flow.
 *
 * One individual is on screen at a time; keys 1-9 select tones 1-9, key 0
 * selects tone 10, Enter submits. Submission is enabled only with a
 * selected label, at most one submission is in flight, and the next
 * individual is fetched only after the server acknowledges.
 */

import { isValidLabel } from "./api.js";
import type { NextIndividual } from "./api.js";

export type Phase = "loading" | "labeling" | "submitting" | "done" | "fatal";

export interface UiState {
  phase: Phase;
  individualId: string | null;
  imageUrls: string[];
  selected: number | null;
  pendingSubmit: boolean;
  progress: { assigned: number; completed: number };
  /** per-tone tally of this annotator's submitted labels */
  tally: Record<number, number>;
  /** transient message (duplicate, validation, network retry) */
  notice: string | null;
}

export type UiEvent =
  | { type: "individual_loaded"; individual: NextIndividual }
  | { type: "pool_exhausted" }
  | { type: "select"; label: number }
  | { type: "submit_started" }
  | { type: "submit_ok"; label: number }
  | { type: "submit_rejected"; reason: "duplicate" | "invalid" }
  | { type: "network_error"; message: string }
  | { type: "progress"; assigned: number; completed: number }
  | { type: "fatal"; message: string };

export function initialState(): UiState {
  const tally: Record<number, number> = {};
  for (let tone = 1; tone <= 10; tone += 1) {
    tally[tone] = 0;
  }
  return {
    phase: "loading",
    individualId: null,
    imageUrls: [],
    selected: null,
    pendingSubmit: false,
    progress: { assigned: 0, completed: 0 },
    tally,
    notice: null,
  };
}

export function canSubmit(state: UiState): boolean {
  return (
    state.phase === "labeling" &&
    !state.pendingSubmit &&
    state.selected !== null &&
    isValidLabel(state.selected)
  );
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.type) {
    case "individual_loaded":
      return {
        ...state,
        phase: "labeling",
        individualId: event.individual.individual_id,
        imageUrls: [...event.individual.image_urls],
        selected: null,
        pendingSubmit: false,
        notice: null,
      };
    case "pool_exhausted":
      return {
        ...state,
        phase: "done",
        individualId: null,
        imageUrls: [],
        selected: null,
        pendingSubmit: false,
      };
    case "select":
      if (state.phase !== "labeling" || !isValidLabel(event.label)) {
        return state;
      }
      return { ...state, selected: event.label, notice: null };
    case "submit_started":
      return { ...state, phase: "submitting", pendingSubmit: true };
    case "submit_ok": {
      const tally = { ...state.tally, [event.label]: state.tally[event.label] + 1 };
      return {
        ...state,
        phase: "loading",
        pendingSubmit: false,
        tally,
        progress: {
          ...state.progress,
          completed: state.progress.completed + 1,
        },
        notice: null,
      };
    }
    case "submit_rejected":
      // keep the current individual and selection on screen
      return {
        ...state,
        phase: "labeling",
        pendingSubmit: false,
        notice:
          event.reason === "duplicate"
            ? "Already labeled by you - duplicate rejected."
            : "The server rejected this label as invalid.",
      };
    case "network_error":
      return {
        ...state,
        phase: state.individualId === null ? "loading" : "labeling",
        pendingSubmit: false,
        notice: `Network problem: ${event.message}. Nothing was lost - retry.`,
      };
    case "progress":
      return {
        ...state,
        progress: { assigned: event.assigned, completed: event.completed },
      };
    case "fatal":
      return { ...state, phase: "fatal", notice: event.message };
    default:
      return state;
  }
}

export type KeyAction =
  | { kind: "select"; label: number }
  | { kind: "submit" };

/** Maps a keyboard key to a labeling action (1-9 -> tones, 0 -> 10, Enter). */
export function keyAction(key: string): KeyAction | null {
  if (key >= "1" && key <= "9") {
    return { kind: "select", label: Number(key) };
  }
  if (key === "0") {
    return { kind: "select", label: 10 };
  }
  if (key === "Enter") {
    return { kind: "submit" };
  }
  return null;
}
