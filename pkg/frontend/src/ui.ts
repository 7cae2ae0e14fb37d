// DOM rendering. Re-renders on state transitions only (not on keystrokes),
// so plain uncontrolled inputs are read at submit time.

import type { GradeSheetPreview, SubmissionView } from "./api";
import { renderMarkdown } from "./markdown";
import {
  ItemDraft,
  OpenForm,
  ViewState,
  commitDisabled,
  itemLabel,
  progressLabel,
  progressPercent,
} from "./state";

export interface Handlers {
  toggle(code: string): void;
  typed(raw: string): void;
  commit(): void;
  openForm(form: OpenForm): void;
  submitMessage(text: string): void;
  submitItem(draft: ItemDraft): void;
  submitIssue(title: string, body: string): void;
  skip(): void;
  quit(): void;
  retry(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function submissionPane(view: SubmissionView | null): HTMLElement {
  const pane = el("section", "pane submission");
  if (!view) {
    pane.append(el("p", "dim", "no current submission"));
    return pane;
  }
  pane.append(el("h3", "path", view.path));
  if (view.kind === "markdown" && view.text !== null) {
    const body = el("div", "rendered");
    body.innerHTML = renderMarkdown(view.text);
    pane.append(body);
  } else if (view.kind === "text" && view.text !== null) {
    pane.append(el("pre", "raw", view.text));
  } else if (view.kind === "directory") {
    pane.append(el("p", "dim", "folder submission:"));
    const list = el("ul");
    for (const entry of view.entries ?? []) list.append(el("li", "", entry));
    pane.append(list);
  } else if (view.kind === "missing") {
    pane.append(el("p", "warn", "submission file not found"));
  } else {
    const note = el("p", "dim", "binary file; open it in your editor, or ");
    if (view.download_url) {
      const link = el("a", "", "download it");
      link.setAttribute("href", view.download_url);
      note.append(link);
    }
    pane.append(note);
  }
  return pane;
}

function completionScreen(
  state: ViewState,
  preview: GradeSheetPreview | null,
): HTMLElement {
  const screen = el("section", "complete");
  screen.append(el("h2", "", "Grading session ended"));
  if (state.finalized) {
    screen.append(
      el("p", "", "Grade sheet and feedback files have been written."),
    );
  }
  const link = el("a", "", "grade-sheet preview (raw)");
  link.setAttribute("href", "/api/gradesheet/preview");
  screen.append(link);
  if (preview) {
    const table = el("table", "preview");
    const head = el("tr");
    for (const column of preview.columns) head.append(el("th", "", column));
    table.append(head);
    for (const row of preview.rows) {
      const tr = el("tr");
      for (const column of preview.columns)
        tr.append(el("td", "", row[column] ?? ""));
      table.append(tr);
    }
    screen.append(table);
  }
  return screen;
}

function formPane(state: ViewState, handlers: Handlers): HTMLElement {
  const pane = el("div", "form");
  if (state.openForm === "message") {
    pane.append(el("h4", "", "Personalized message for this question"));
    const text = el("textarea");
    text.value = state.snapshot?.pending_message ?? "";
    const send = el("button", "", "Attach message");
    send.addEventListener("click", () => handlers.submitMessage(text.value));
    pane.append(text, send);
  } else if (state.openForm === "new_item") {
    pane.append(el("h4", "", "New rubric item"));
    const scope = el("input");
    scope.value = state.snapshot?.current_question ?? "";
    const code = el("input");
    code.placeholder = "prompt code";
    const message = el("input");
    message.placeholder = "prompt message (what you see)";
    const feedback = el("textarea");
    feedback.placeholder = "feedback (what the student sees)";
    const points = el("input");
    points.placeholder = "points, e.g. 0.5";
    const send = el("button", "", "Add item");
    send.addEventListener("click", () =>
      handlers.submitItem({
        applicability: scope.value,
        prompt_code: code.value,
        prompt_message: message.value,
        feedback: feedback.value,
        points: points.value,
      }),
    );
    for (const [label, input] of [
      ["applies to", scope],
      ["code", code],
      ["message", message],
      ["feedback", feedback],
      ["points", points],
    ] as const) {
      const row = el("label", "field", label + " ");
      row.append(input);
      pane.append(row);
    }
    pane.append(send);
  } else if (state.openForm === "issue") {
    pane.append(el("h4", "", "Note a GitHub issue (created later by push)"));
    const title = el("input");
    title.placeholder = "issue title";
    const body = el("textarea");
    body.placeholder = "issue body";
    const send = el("button", "", "Note issue");
    send.addEventListener("click", () =>
      handlers.submitIssue(title.value, body.value),
    );
    pane.append(title, body, send);
  }
  return pane;
}

export function render(
  root: HTMLElement,
  state: ViewState,
  preview: GradeSheetPreview | null,
  handlers: Handlers,
): void {
  root.textContent = "";

  if (state.disconnected) {
    const banner = el("div", "banner", "connection to the grading session lost ");
    const retry = el("button", "", "retry");
    retry.addEventListener("click", handlers.retry);
    banner.append(retry);
    root.append(banner);
  }

  const snapshot = state.snapshot;
  if (!snapshot) {
    root.append(el("p", "dim", "loading session..."));
    return;
  }
  if (snapshot.ended) {
    root.append(completionScreen(state, preview));
    return;
  }

  const header = el("header");
  const where =
    snapshot.current_question === "general"
      ? `${snapshot.current_gradee} | overall`
      : `${snapshot.current_gradee} | ${snapshot.current_question}`;
  header.append(el("h2", "", where));
  const bar = el("div", "progress");
  const fill = el("div", "fill");
  fill.style.width = `${progressPercent(state)}%`;
  bar.append(fill);
  header.append(bar, el("span", "counter", progressLabel(state)));
  root.append(header);

  if (snapshot.missing_submissions.length > 0) {
    root.append(
      el(
        "p",
        "warn",
        "missing submissions: " + snapshot.missing_submissions.join(", "),
      ),
    );
  }

  const main = el("main");
  main.append(submissionPane(snapshot.submission));

  const rubricPane = el("section", "pane rubric");
  rubricPane.append(el("h3", "", "Rubric"));
  for (const item of snapshot.visible_items) {
    const button = el(
      "button",
      state.selected.includes(item.prompt_code) ? "item selected" : "item",
      itemLabel(snapshot.mode, item.prompt_code, item.prompt_message, item.points),
    );
    button.dataset.code = item.prompt_code;
    button.addEventListener("click", () => handlers.toggle(item.prompt_code));
    rubricPane.append(button);
  }

  const entry = el("div", "entry");
  const codeInput = el("input");
  codeInput.placeholder = "type a prompt code and press Enter";
  codeInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      handlers.typed(codeInput.value);
      codeInput.value = "";
    }
  });
  const commit = el("button", "commit", `Commit (${state.selected.join(", ") || "none"})`);
  commit.disabled = commitDisabled(state);
  commit.addEventListener("click", handlers.commit);
  entry.append(codeInput, commit);
  rubricPane.append(entry);

  if (snapshot.pending_message) {
    rubricPane.append(
      el("p", "pending", `pending message: ${snapshot.pending_message}`),
    );
  }

  const actions = el("div", "actions");
  const buttons: [string, () => void][] = [
    ["personalized message", () => handlers.openForm("message")],
    ["new rubric item", () => handlers.openForm("new_item")],
  ];
  if (snapshot.github_issues)
    buttons.push(["note issue", () => handlers.openForm("issue")]);
  buttons.push(["skip", handlers.skip]);
  buttons.push([
    "quit",
    () => {
      if (window.confirm("End the grading session and write outputs?"))
        handlers.quit();
    },
  ]);
  for (const [label, onClick] of buttons) {
    const button = el("button", "action", label);
    button.disabled = state.inFlight;
    button.addEventListener("click", onClick);
    actions.append(button);
  }
  rubricPane.append(actions);
  rubricPane.append(formPane(state, handlers));

  if (state.error) rubricPane.append(el("p", "error", state.error));
  main.append(rubricPane);
  root.append(main);
}
