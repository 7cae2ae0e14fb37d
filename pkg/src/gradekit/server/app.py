"""Local HTTP facade over a running grading session.

Every mutating request becomes exactly one engine action, processed by the
same single actor the terminal uses; reads return immutable snapshots. Bound
to loopback by default — grading data is private.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from ..engine import (
    Action,
    ApplyCodes,
    GradingSession,
    NewRubricItem,
    NoteIssue,
    PersonalizedMessage,
    Quit,
    Skip,
)
from ..errors import (
    GradekitError,
    InputError,
    SessionBusyError,
    SessionEndedError,
    ValidationError,
)
from ..outputs import build_grade_sheet, format_points
from ..rubric import (
    ALL_QUESTIONS,
    ALL_QUESTIONS_NAME,
    GENERAL,
    GENERAL_NAME,
    Applicability,
    Rubric,
    RubricItem,
    parse_points,
)
from .schemas import (
    ActionRequest,
    ActionResponse,
    GradeSheetPreview,
    NewItemPayload,
    ProgressResponse,
    RubricResponse,
    RubricItemView,
    SessionSnapshot,
    SubmissionView,
)

TEXT_CAP_BYTES = 2 * 1024 * 1024
RAW_SUBMISSION_PATH = "/api/submission/raw"
_MARKDOWN_SUFFIXES = {".md", ".markdown", ".rmd", ".qmd"}


def _item_view(item: RubricItem) -> RubricItemView:
    return RubricItemView(
        applicability=item.applicability.file_name,
        prompt_code=item.prompt_code,
        prompt_message=item.prompt_message,
        points=format_points(item.points),
        total_points=None if item.total_points is None else format_points(item.total_points),
    )


def _submission_view(session: GradingSession) -> SubmissionView | None:
    rel = session.current_submission_path()
    if rel is None:
        return None
    path = Path(session.config.root) / rel
    if not path.exists():
        return SubmissionView(path=rel, kind="missing")
    if path.is_dir():
        entries = sorted(p.name for p in path.iterdir())
        return SubmissionView(path=rel, kind="directory", entries=entries)
    if path.stat().st_size > TEXT_CAP_BYTES:
        return SubmissionView(path=rel, kind="binary", download_url=RAW_SUBMISSION_PATH)
    payload = path.read_bytes()
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError:
        text = None
    if text is None or "\x00" in text:  # NUL decodes fine but marks binary data
        return SubmissionView(path=rel, kind="binary", download_url=RAW_SUBMISSION_PATH)
    kind = "markdown" if path.suffix.lower() in _MARKDOWN_SUFFIXES else "text"
    return SubmissionView(path=rel, kind=kind, text=text)


def _snapshot(session: GradingSession) -> SessionSnapshot:
    graded, total = session.counts()
    current_gradee, current_question = (None, None)
    if session.current is not None:
        current_gradee, current_question = session.current
    return SessionSnapshot(
        ended=session.ended,
        mode=session.rubric.mode.value,
        github_issues=session.config.github_issues,
        current_gradee=current_gradee,
        current_question=current_question,
        visible_items=[_item_view(i) for i in session.visible_items()],
        graded_cells=graded,
        total_cells=total,
        pending_message=session.pending_message(),
        missing_submissions=list(session.missing),
        submission=_submission_view(session),
    )


def _parse_applicability(text: str) -> Applicability:
    cleaned = text.strip()
    lowered = cleaned.lower()
    if lowered == ALL_QUESTIONS_NAME:
        return ALL_QUESTIONS
    if lowered == GENERAL_NAME:
        return GENERAL
    try:
        return Applicability.for_question(cleaned)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def _payload_item(payload: NewItemPayload) -> RubricItem:
    points = parse_points(payload.points.strip())
    if points is None:
        raise HTTPException(
            status_code=400,
            detail=f"points {payload.points!r} is not a non-negative decimal",
        )
    total = None
    if payload.total_points is not None and payload.total_points.strip():
        total = parse_points(payload.total_points.strip())
        if total is None:
            raise HTTPException(
                status_code=400,
                detail=f"total_points {payload.total_points!r} is not a "
                "non-negative decimal",
            )
    return RubricItem(
        applicability=_parse_applicability(payload.applicability),
        prompt_code=payload.prompt_code.strip(),
        prompt_message=payload.prompt_message,
        feedback=payload.feedback,
        points=points,
        total_points=total,
    )


def _to_action(request: ActionRequest) -> Action:
    if request.type == "apply_codes":
        return ApplyCodes(codes=tuple(request.codes or []))
    if request.type == "personalized_message":
        return PersonalizedMessage(text=request.text or "")
    if request.type == "note_issue":
        return NoteIssue(title=request.title or "", body=request.body or "")
    if request.type == "skip":
        return Skip()
    if request.type == "quit":
        return Quit()
    if request.item is None:
        raise HTTPException(status_code=400, detail="new_rubric_item needs an item payload")
    return NewRubricItem(item=_payload_item(request.item))


def create_app(session: GradingSession, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="gradekit session API")

    @app.get("/api/session", response_model=SessionSnapshot)
    def get_session() -> SessionSnapshot:
        return _snapshot(session)

    @app.get("/api/rubric", response_model=RubricResponse)
    def get_rubric() -> RubricResponse:
        rubric: Rubric = session.rubric
        return RubricResponse(
            mode=rubric.mode.value, items=[_item_view(i) for i in rubric.items]
        )

    @app.get("/api/submission/current", response_model=SubmissionView)
    def get_submission() -> SubmissionView:
        view = _submission_view(session)
        if view is None:
            raise HTTPException(status_code=404, detail="no current submission")
        return view

    @app.get(RAW_SUBMISSION_PATH)
    def get_submission_raw() -> FileResponse:
        rel = session.current_submission_path()
        if rel is None:
            raise HTTPException(status_code=404, detail="no current submission")
        target = Path(session.config.root) / rel
        if not target.is_file():
            raise HTTPException(status_code=404, detail=f"{rel} is not a file")
        return FileResponse(target, filename=Path(rel).name)

    @app.get("/api/progress", response_model=ProgressResponse)
    def get_progress() -> ProgressResponse:
        graded, total = session.counts()
        return ProgressResponse(
            graded_cells=graded, total_cells=total, ended=session.ended
        )

    @app.get("/api/gradesheet/preview", response_model=GradeSheetPreview)
    def gradesheet_preview() -> GradeSheetPreview:
        try:
            sheet = build_grade_sheet(
                session.roster,
                session.log,
                session.rubric,
                missing=set(session.missing),
                team_mode=session.config.team_mode,
            )
        except GradekitError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return GradeSheetPreview(columns=sheet.columns, rows=sheet.rows)

    @app.post("/api/action", response_model=ActionResponse)
    def post_action(request: ActionRequest) -> ActionResponse:
        action = _to_action(request)
        try:
            effects = session.apply(action)
        except SessionBusyError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (InputError, SessionEndedError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ValidationError as exc:
            raise HTTPException(
                status_code=400, detail="; ".join(str(i) for i in exc.issues)
            )
        return ActionResponse(
            snapshot=_snapshot(session),
            notices=effects.notices,
            finalized=effects.finalized,
        )

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    else:

        @app.get("/")
        def index() -> dict[str, str]:
            return {
                "service": "gradekit",
                "hint": "build the web UI (frontend/) or use the /api endpoints",
            }

    return app
