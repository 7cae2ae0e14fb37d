"""Request/response models for the local grading API.

Point values cross the wire as pre-rendered strings: the browser UI must
never do grade arithmetic of its own, so it is never given numbers to do it
with.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel


class RubricItemView(BaseModel):
    applicability: str  # question name, "all_questions", or "general"
    prompt_code: str
    prompt_message: str
    points: str
    total_points: Optional[str] = None


class SubmissionView(BaseModel):
    path: str
    kind: Literal["markdown", "text", "binary", "directory", "missing"]
    text: Optional[str] = None
    entries: Optional[list[str]] = None  # directory submissions
    download_url: Optional[str] = None  # binary submissions


class SessionSnapshot(BaseModel):
    ended: bool
    mode: str
    github_issues: bool
    current_gradee: Optional[str] = None
    current_question: Optional[str] = None  # "general" marks the overall step
    visible_items: list[RubricItemView] = []
    graded_cells: int
    total_cells: int
    pending_message: str = ""
    missing_submissions: list[str] = []
    submission: Optional[SubmissionView] = None


class NewItemPayload(BaseModel):
    applicability: str
    prompt_code: str
    prompt_message: str = ""
    feedback: str = ""
    points: str
    total_points: Optional[str] = None


class ActionRequest(BaseModel):
    type: Literal[
        "apply_codes",
        "personalized_message",
        "new_rubric_item",
        "note_issue",
        "skip",
        "quit",
    ]
    codes: Optional[list[str]] = None
    text: Optional[str] = None
    item: Optional[NewItemPayload] = None
    title: Optional[str] = None
    body: Optional[str] = None


class ActionResponse(BaseModel):
    snapshot: SessionSnapshot
    notices: list[str] = []
    finalized: bool = False


class RubricResponse(BaseModel):
    mode: str
    items: list[RubricItemView]


class ProgressResponse(BaseModel):
    graded_cells: int
    total_cells: int
    ended: bool


class GradeSheetPreview(BaseModel):
    columns: list[str]
    rows: list[dict[str, str]]
