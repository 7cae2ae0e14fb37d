import { describe, expect, it } from "vitest";

import type { SessionSnapshot } from "../src/api";
import {
  applyError,
  applySnapshot,
  beginRequest,
  commitDisabled,
  connectionLost,
  initialState,
  itemLabel,
  progressLabel,
  progressPercent,
  toggleCode,
  toggleTyped,
} from "../src/state";

function snapshot(overrides: Partial<SessionSnapshot> = {}): SessionSnapshot {
  return {
    ended: false,
    mode: "negative",
    github_issues: false,
    current_gradee: "BaronPoisson",
    current_question: "Q1",
    visible_items: [
      {
        applicability: "Q1",
        prompt_code: "1a",
        prompt_message: "no inline R code",
        points: "0.75",
        total_points: "10",
      },
      {
        applicability: "all_questions",
        prompt_code: "1",
        prompt_message: "tidyverse code style",
        points: "0.5",
        total_points: null,
      },
    ],
    graded_cells: 0,
    total_cells: 9,
    pending_message: "",
    missing_submissions: [],
    submission: null,
    ...overrides,
  };
}

describe("selection", () => {
  it("keeps selected codes a subset of visible codes", () => {
    let view = applySnapshot(initialState(), snapshot());
    view = toggleCode(view, "1a");
    view = toggleCode(view, "zz"); // not visible: ignored
    expect(view.selected).toEqual(["1a"]);
  });

  it("toggles off on second click", () => {
    let view = applySnapshot(initialState(), snapshot());
    view = toggleCode(view, "1a");
    view = toggleCode(view, "1a");
    expect(view.selected).toEqual([]);
  });

  it("typed entry equals clicking, with unknown codes reported", () => {
    let view = applySnapshot(initialState(), snapshot());
    view = toggleTyped(view, "1a, 1");
    expect(view.selected).toEqual(["1a", "1"]);
    view = toggleTyped(view, "nope");
    expect(view.error).toContain("'nope'");
  });

  it("clears the selection when a new snapshot arrives", () => {
    let view = applySnapshot(initialState(), snapshot());
    view = toggleCode(view, "1a");
    view = applySnapshot(view, snapshot({ current_question: "Q2" }));
    expect(view.selected).toEqual([]);
  });
});

describe("in-flight handling", () => {
  it("disables commit while a POST is in flight", () => {
    let view = applySnapshot(initialState(), snapshot());
    expect(commitDisabled(view)).toBe(false);
    view = beginRequest(view);
    expect(commitDisabled(view)).toBe(true);
  });

  it("an error response re-enables input and shows the server text", () => {
    let view = beginRequest(applySnapshot(initialState(), snapshot()));
    view = applyError(view, "unknown prompt code 'zz'");
    expect(view.inFlight).toBe(false);
    expect(view.error).toBe("unknown prompt code 'zz'");
  });

  it("a transport failure raises the disconnected banner", () => {
    const view = connectionLost(beginRequest(applySnapshot(initialState(), snapshot())));
    expect(view.disconnected).toBe(true);
  });
});

describe("display values come from the server untouched", () => {
  it("renders the item label around the verbatim points string", () => {
    expect(itemLabel("negative", "1a", "no inline R code", "0.75")).toBe(
      "[1a] no inline R code (-0.75)",
    );
    expect(itemLabel("positive", "1b", "model fit", "6")).toBe(
      "[1b] model fit (+6)",
    );
  });

  it("progress is a counter, not a grade", () => {
    const view = applySnapshot(initialState(), snapshot({ graded_cells: 3 }));
    expect(progressLabel(view)).toBe("3/9 graded");
    expect(progressPercent(view)).toBe(33);
  });
});
