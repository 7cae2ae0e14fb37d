"""HTTP facade over a grading session."""

import hashlib
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from gradekit.engine import GradingSession, SessionConfig
from gradekit.server.app import create_app

from conftest import make_course


def _session(flags, **overrides) -> GradingSession:
    config = SessionConfig(
        rubric_path=flags["rubric"],
        roster_path=flags["roster"],
        example_identifier=flags["example_id"],
        example_submission_path=flags["example_sub"],
        example_feedback_path=flags["example_feedback"],
        log_path=flags["log"],
        grade_sheet_path=flags["grades"],
        open_hook="none",
        close_hook="none",
        root=Path.cwd(),
        **overrides,
    )
    return GradingSession.start(config)


@pytest.fixture
def client(course):
    session = _session(course)
    app = create_app(session)
    with TestClient(app) as test_client:
        test_client.gradekit_session = session
        yield test_client
    session.close()


def test_fresh_session_snapshot(client):
    data = client.get("/api/session").json()
    assert data["current_gradee"] == "BaronPoisson"
    assert data["current_question"] == "Q1"
    assert data["graded_cells"] == 0
    assert data["total_cells"] == 9
    assert [i["prompt_code"] for i in data["visible_items"]] == ["1a", "1b", "1"]
    assert data["visible_items"][0]["points"] == "0.75"  # rendered string
    assert data["submission"]["kind"] == "markdown"  # .Rmd renders as markdown
    assert "Homework of BaronPoisson" in data["submission"]["text"]


def test_apply_codes_advances(client):
    response = client.post("/api/action", json={"type": "apply_codes", "codes": ["1a"]})
    assert response.status_code == 200
    snapshot = response.json()["snapshot"]
    assert snapshot["current_question"] == "Q2"
    assert snapshot["graded_cells"] == 1


def test_unknown_code_is_400(client):
    response = client.post("/api/action", json={"type": "apply_codes", "codes": ["zz"]})
    assert response.status_code == 400
    assert "'zz'" in response.json()["detail"]


def test_note_issue_disabled_names_flag(client):
    response = client.post(
        "/api/action", json={"type": "note_issue", "title": "t", "body": "b"}
    )
    assert response.status_code == 400
    assert "--github-issues" in response.json()["detail"]


def test_personalized_message_sets_pending_flag(client):
    response = client.post(
        "/api/action", json={"type": "personalized_message", "text": "See me."}
    )
    assert response.status_code == 200
    assert response.json()["snapshot"]["pending_message"] == "See me."


def test_new_rubric_item_appears(client):
    response = client.post(
        "/api/action",
        json={
            "type": "new_rubric_item",
            "item": {
                "applicability": "all_questions",
                "prompt_code": "t9",
                "prompt_message": "relabel axes",
                "feedback": "Label both axes.",
                "points": "0.25",
            },
        },
    )
    assert response.status_code == 200
    codes = [i["prompt_code"] for i in response.json()["snapshot"]["visible_items"]]
    assert "t9" in codes
    rubric = client.get("/api/rubric").json()
    assert any(i["prompt_code"] == "t9" for i in rubric["items"])


def test_bad_new_item_points_is_400(client):
    response = client.post(
        "/api/action",
        json={
            "type": "new_rubric_item",
            "item": {"applicability": "all_questions", "prompt_code": "x",
                     "points": "-3"},
        },
    )
    assert response.status_code == 400


def test_read_endpoints_do_not_mutate(client, course):
    log_path = Path(course["log"])
    before = hashlib.sha256(log_path.read_bytes()).hexdigest()
    for endpoint in [
        "/api/session",
        "/api/rubric",
        "/api/progress",
        "/api/submission/current",
        "/api/gradesheet/preview",
    ]:
        assert client.get(endpoint).status_code == 200
    after = hashlib.sha256(log_path.read_bytes()).hexdigest()
    assert before == after


def test_progress_counts(client):
    client.post("/api/action", json={"type": "apply_codes", "codes": []})
    data = client.get("/api/progress").json()
    assert data == {"graded_cells": 1, "total_cells": 9, "ended": False}


def test_gradesheet_preview_columns(client):
    client.post("/api/action", json={"type": "apply_codes", "codes": ["1a"]})
    data = client.get("/api/gradesheet/preview").json()
    assert "grade_Q1" in data["columns"]
    row = next(r for r in data["rows"] if r["student_identifier"] == "BaronPoisson")
    assert row["grade_Q1"] == "9.25"
    assert row["status"] == "PARTIAL"


def test_skip_and_quit_flow(client, course):
    client.post("/api/action", json={"type": "skip"})
    response = client.post("/api/action", json={"type": "quit"})
    assert response.status_code == 200
    body = response.json()
    assert body["finalized"] is True
    assert body["snapshot"]["ended"] is True
    assert Path(course["grades"]).exists()
    after_end = client.post("/api/action", json={"type": "skip"})
    assert after_end.status_code == 400


def test_busy_actor_is_409(client):
    session = client.gradekit_session
    assert session._actor.acquire(blocking=False)
    try:
        response = client.post("/api/action", json={"type": "skip"})
        assert response.status_code == 409
    finally:
        session._actor.release()


def test_directory_submission_descriptor(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    flags = make_course(tmp_path, submissions=[])
    for student in ["BaronPoisson", "sergent-gamma", "student_T"]:
        folder = tmp_path / "hws" / f"hw01-{student}"
        folder.mkdir(parents=True)
        (folder / "report.Rmd").write_text("hi")
        (folder / "data.csv").write_text("a,b")
    flags["example_sub"] = "hws/hw01-BaronPoisson"
    session = _session(flags)
    with TestClient(create_app(session)) as client:
        data = client.get("/api/submission/current").json()
        assert data["kind"] == "directory"
        assert data["entries"] == ["data.csv", "report.Rmd"]
    session.close()


def test_markdown_submission_kind(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    flags = make_course(tmp_path, submissions=[])
    (tmp_path / "hws").mkdir(exist_ok=True)
    for student in ["BaronPoisson", "sergent-gamma", "student_T"]:
        (tmp_path / "hws" / f"hw01-{student}.md").write_text(f"# {student}\n")
    flags["example_sub"] = "hws/hw01-BaronPoisson.md"
    session = _session(flags)
    with TestClient(create_app(session)) as client:
        data = client.get("/api/submission/current").json()
        assert data["kind"] == "markdown"
    session.close()


def test_binary_submission_kind(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    flags = make_course(tmp_path, submissions=[])
    (tmp_path / "hws").mkdir(exist_ok=True)
    for student in ["BaronPoisson", "sergent-gamma", "student_T"]:
        # NUL alone decodes as UTF-8, so it is the interesting binary marker
        (tmp_path / "hws" / f"hw01-{student}.pdf").write_bytes(b"%PDF\x00binary")
    flags["example_sub"] = "hws/hw01-BaronPoisson.pdf"
    session = _session(flags)
    with TestClient(create_app(session)) as client:
        data = client.get("/api/submission/current").json()
        assert data["kind"] == "binary"
        assert data["text"] is None
        raw = client.get(data["download_url"])
        assert raw.status_code == 200
        assert raw.content.startswith(b"%PDF")
    session.close()


def test_static_ui_served_when_built(course, tmp_path):
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<html><body>grading console</body></html>")
    session = _session(course)
    with TestClient(create_app(session, static_dir=static)) as client:
        response = client.get("/")
        assert response.status_code == 200
        assert "grading console" in response.text
        assert client.get("/api/session").status_code == 200  # API still reachable
    session.close()


def test_placeholder_index_without_ui(client):
    data = client.get("/").json()
    assert data["service"] == "gradekit"
