// The controller: wires server calls to view-state transitions and rendering.
// Exported as a factory so tests can drive a full session against a fake
// fetch without a browser bootstrap.

import {
  ActionRequest,
  ApiError,
  GradeSheetPreview,
  getGradeSheetPreview,
  getSession,
  postAction,
} from "./api";
import * as state from "./state";
import { Handlers, render } from "./ui";

export interface App {
  handlers: Handlers;
  refresh(): Promise<void>;
  view(): state.ViewState;
}

export function createApp(root: HTMLElement): App {
  let view = state.initialState();
  let preview: GradeSheetPreview | null = null;

  function draw(): void {
    render(root, view, preview, handlers);
  }

  async function loadPreview(): Promise<void> {
    try {
      preview = await getGradeSheetPreview();
    } catch {
      preview = null;
    }
  }

  async function refresh(): Promise<void> {
    try {
      const snapshot = await getSession();
      view = state.applySnapshot(view, snapshot);
      if (snapshot.ended) await loadPreview();
    } catch {
      view = state.connectionLost(view);
    }
    draw();
  }

  async function dispatch(action: ActionRequest): Promise<void> {
    if (view.inFlight) return; // one mutation at a time; server enforces with 409
    view = state.beginRequest(view);
    draw();
    try {
      const response = await postAction(action);
      view = state.applySnapshot(view, response.snapshot, response.finalized);
      if (response.snapshot.ended) await loadPreview();
    } catch (error) {
      if (error instanceof ApiError) {
        view = state.applyError(view, error.message);
      } else {
        view = state.connectionLost(view);
      }
    }
    draw();
  }

  const handlers: Handlers = {
    toggle(code) {
      view = state.toggleCode(view, code);
      draw();
    },
    typed(raw) {
      view = state.toggleTyped(view, raw);
      draw();
    },
    commit() {
      void dispatch({ type: "apply_codes", codes: view.selected });
    },
    openForm(form) {
      view = state.openForm(view, form);
      draw();
    },
    submitMessage(text) {
      void dispatch({ type: "personalized_message", text });
    },
    submitItem(draft) {
      void dispatch({ type: "new_rubric_item", item: draft });
    },
    submitIssue(title, body) {
      void dispatch({ type: "note_issue", title, body });
    },
    skip() {
      void dispatch({ type: "skip" });
    },
    quit() {
      void dispatch({ type: "quit" });
    },
    retry() {
      void refresh();
    },
  };

  return { handlers, refresh, view: () => view };
}

export function startPolling(app: App, intervalMs = 5000): number {
  // Pull-based: refresh happens on load and after actions; the only polling
  // is the reconnect loop while the banner is up.
  return window.setInterval(() => {
    if (app.view().disconnected && !app.view().inFlight) void app.refresh();
  }, intervalMs);
}
