// Pure view-state transitions. The server snapshot is the single source of
// truth; local state is only what the grader is composing right now.

import type { SessionSnapshot } from "./api";

export interface ItemDraft {
  applicability: string;
  prompt_code: string;
  prompt_message: string;
  feedback: string;
  points: string;
}

export type OpenForm = "none" | "message" | "new_item" | "issue";

export interface ViewState {
  snapshot: SessionSnapshot | null;
  selected: string[]; // invariant: subset of visible codes, entry order kept
  openForm: OpenForm;
  inFlight: boolean; // invariant: commit & action buttons disabled while true
  error: string | null;
  disconnected: boolean;
  finalized: boolean;
}

export function initialState(): ViewState {
  return {
    snapshot: null,
    selected: [],
    openForm: "none",
    inFlight: false,
    error: null,
    disconnected: false,
    finalized: false,
  };
}

export function visibleCodes(state: ViewState): string[] {
  return state.snapshot?.visible_items.map((item) => item.prompt_code) ?? [];
}

export function toggleCode(state: ViewState, code: string): ViewState {
  if (!visibleCodes(state).includes(code)) return state;
  const selected = state.selected.includes(code)
    ? state.selected.filter((c) => c !== code)
    : [...state.selected, code];
  return { ...state, selected, error: null };
}

// Typing a code and pressing Enter equals clicking its button.
export function toggleTyped(state: ViewState, raw: string): ViewState {
  let next = state;
  const tokens = raw.split(/[\s,]+/).filter((t) => t.length > 0);
  for (const token of tokens) {
    if (!visibleCodes(state).includes(token)) {
      return { ...next, error: `unknown prompt code '${token}'` };
    }
    next = toggleCode(next, token);
  }
  return next;
}

export function commitDisabled(state: ViewState): boolean {
  return state.inFlight || state.snapshot === null || state.snapshot.ended;
}

export function beginRequest(state: ViewState): ViewState {
  return { ...state, inFlight: true, error: null };
}

export function applySnapshot(
  state: ViewState,
  snapshot: SessionSnapshot,
  finalized = false,
): ViewState {
  return {
    ...state,
    snapshot,
    selected: [], // the cell advanced or the rubric changed; start clean
    openForm: "none",
    inFlight: false,
    error: null,
    disconnected: false,
    finalized: state.finalized || finalized,
  };
}

export function applyError(state: ViewState, message: string): ViewState {
  return { ...state, inFlight: false, error: message };
}

export function connectionLost(state: ViewState): ViewState {
  return { ...state, inFlight: false, disconnected: true };
}

export function openForm(state: ViewState, form: OpenForm): ViewState {
  return { ...state, openForm: form, error: null };
}

export function progressLabel(state: ViewState): string {
  if (!state.snapshot) return "";
  return `${state.snapshot.graded_cells}/${state.snapshot.total_cells} graded`;
}

export function progressPercent(state: ViewState): number {
  if (!state.snapshot || state.snapshot.total_cells === 0) return 0;
  return Math.round(
    (100 * state.snapshot.graded_cells) / state.snapshot.total_cells,
  );
}

// "[code] message (-points)" with the sign taken from the grading mode;
// the points string itself comes from the server untouched.
export function itemLabel(
  mode: "negative" | "positive",
  code: string,
  message: string,
  points: string,
): string {
  const sign = mode === "negative" ? "-" : "+";
  return `[${code}] ${message} (${sign}${points})`;
}
