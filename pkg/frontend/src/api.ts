// Typed client for the local gradekit session API. All point values arrive
// as pre-rendered strings and are displayed verbatim; this module (and the
// rest of the UI) never does grade arithmetic.

export interface RubricItemView {
  applicability: string;
  prompt_code: string;
  prompt_message: string;
  points: string;
  total_points: string | null;
}

export interface SubmissionView {
  path: string;
  kind: "markdown" | "text" | "binary" | "directory" | "missing";
  text: string | null;
  entries: string[] | null;
  download_url?: string | null;
}

export interface SessionSnapshot {
  ended: boolean;
  mode: "negative" | "positive";
  github_issues: boolean;
  current_gradee: string | null;
  current_question: string | null;
  visible_items: RubricItemView[];
  graded_cells: number;
  total_cells: number;
  pending_message: string;
  missing_submissions: string[];
  submission: SubmissionView | null;
}

export interface ActionResponse {
  snapshot: SessionSnapshot;
  notices: string[];
  finalized: boolean;
}

export interface NewItemPayload {
  applicability: string;
  prompt_code: string;
  prompt_message: string;
  feedback: string;
  points: string;
  total_points?: string | null;
}

export type ActionRequest =
  | { type: "apply_codes"; codes: string[] }
  | { type: "personalized_message"; text: string }
  | { type: "new_rubric_item"; item: NewItemPayload }
  | { type: "note_issue"; title: string; body: string }
  | { type: "skip" }
  | { type: "quit" };

export interface GradeSheetPreview {
  columns: string[];
  rows: Record<string, string>[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function parseDetail(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return `HTTP ${response.status}`;
  }
}

async function getJson<T>(path: string): Promise<T> {
  const response = await fetch(path);
  if (!response.ok) throw new ApiError(response.status, await parseDetail(response));
  return (await response.json()) as T;
}

export function getSession(): Promise<SessionSnapshot> {
  return getJson("/api/session");
}

export function getGradeSheetPreview(): Promise<GradeSheetPreview> {
  return getJson("/api/gradesheet/preview");
}

const RETRY_DELAY_MS = 400;

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

// One mutation is in flight at a time, enforced by the server with 409; on a
// 409 we wait for the other action to resolve and retry exactly once.
export async function postAction(
  action: ActionRequest,
  wait: (ms: number) => Promise<unknown> = sleep,
): Promise<ActionResponse> {
  for (let attempt = 0; ; attempt++) {
    const response = await fetch("/api/action", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(action),
    });
    if (response.ok) return (await response.json()) as ActionResponse;
    if (response.status === 409 && attempt === 0) {
      await wait(RETRY_DELAY_MS);
      continue;
    }
    throw new ApiError(response.status, await parseDetail(response));
  }
}
